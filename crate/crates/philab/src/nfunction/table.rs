//! User-supplied generators tabulated on a log grid.
//!
//! The table stores `(t_i, phi(t_i))` with strictly increasing `t_i > 0`
//! and interpolates log-log linearly, i.e. each segment is an exact power
//! law `phi(t) = phi_i * (t/t_i)^{s_i}`. Outside the knot range the end
//! slopes extend the power law. Because every segment is a power,
//! `Phi(t) = integral of s*phi(s)` has a closed segment-wise primitive; the
//! cumulative values at the knots are cached at load time.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GeneratorTable {
    ts: Vec<f64>,
    phis: Vec<f64>,
    /// Log-log slope of each segment `[t_i, t_{i+1}]`.
    slopes: Vec<f64>,
    /// `Phi(t_i)` for each knot.
    cum: Vec<f64>,
}

impl GeneratorTable {
    pub fn new(ts: Vec<f64>, phis: Vec<f64>) -> Result<Self> {
        if ts.len() != phis.len() {
            return Err(Error::Validation(format!(
                "table columns differ in length: {} vs {}",
                ts.len(),
                phis.len()
            )));
        }
        if ts.len() < 4 {
            return Err(Error::Validation(
                "generator table needs at least 4 rows".into(),
            ));
        }
        for (i, (&t, &p)) in ts.iter().zip(phis.iter()).enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Validation(format!("table t[{i}] = {t} must be finite and positive")));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Validation(format!(
                    "generator negative or undefined at table row {i}: phi({t}) = {p}"
                )));
            }
            if i > 0 && t <= ts[i - 1] {
                return Err(Error::Validation(format!(
                    "table abscissae must be strictly increasing; row {i} has {t} after {}",
                    ts[i - 1]
                )));
            }
        }
        let slopes: Vec<f64> = ts
            .windows(2)
            .zip(phis.windows(2))
            .map(|(tw, pw)| (pw[1] / pw[0]).ln() / (tw[1] / tw[0]).ln())
            .collect();
        // The extension below the first knot uses the first slope; the
        // integrand s*phi(s) ~ s^(a+1) must be integrable at 0.
        let a0 = slopes[0];
        if a0 + 2.0 <= 0.0 {
            return Err(Error::Validation(format!(
                "generator grows like t^{a0} near 0; s*phi(s) is not integrable"
            )));
        }
        let mut cum = Vec::with_capacity(ts.len());
        // Phi(t_0) from the power extension on (0, t_0].
        cum.push(phis[0] * ts[0] * ts[0] / (a0 + 2.0));
        for i in 0..slopes.len() {
            let seg = segment_integral(ts[i], phis[i], slopes[i], ts[i], ts[i + 1]);
            let prev = cum[i];
            cum.push(prev + seg);
        }
        Ok(GeneratorTable { ts, phis, slopes, cum })
    }

    /// Parse a two-column whitespace- or comma-separated text table.
    /// Lines beginning with `#` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ts = Vec::new();
        let mut phis = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Validation(format!(
                    "table line {} must have two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let t: f64 = cols[0].parse().map_err(|_| {
                Error::Validation(format!("bad number '{}' on table line {}", cols[0], lineno + 1))
            })?;
            let p: f64 = cols[1].parse().map_err(|_| {
                Error::Validation(format!("bad number '{}' on table line {}", cols[1], lineno + 1))
            })?;
            ts.push(t);
            phis.push(p);
        }
        GeneratorTable::new(ts, phis)
    }

    /// Segment index whose power law covers `t` (end segments extrapolate).
    fn segment(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.slopes.len() - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.slopes.len() - 1),
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.phis[i] * (t / self.ts[i]).powf(self.slopes[i])
    }

    pub fn dphi(&self, t: f64) -> f64 {
        let i = self.segment(t);
        self.slopes[i] * self.phi(t) / t
    }

    pub fn big_phi_prime(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        t * self.phi(t)
    }

    /// Exact integral of the interpolant: `Phi(t)`.
    pub fn big_phi(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        if t <= self.ts[0] {
            let a = self.slopes[0];
            let c = self.phis[0] / self.ts[0].powf(a);
            return c * t.powf(a + 2.0) / (a + 2.0);
        }
        let i = self.segment(t);
        self.cum[i] + segment_integral(self.ts[i], self.phis[i], self.slopes[i], self.ts[i], t)
    }

    pub fn t_min(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().unwrap()
    }
}

/// Integral of `s * phi0 * (s/t0)^a` over `[lo, hi]`.
fn segment_integral(t0: f64, phi0: f64, a: f64, lo: f64, hi: f64) -> f64 {
    let c = phi0 / t0.powf(a);
    if (a + 2.0).abs() < 1e-14 {
        // s^(a+1) = 1/s, logarithmic primitive
        c * (hi / lo).ln()
    } else {
        c * (hi.powf(a + 2.0) - lo.powf(a + 2.0)) / (a + 2.0)
    }
}
