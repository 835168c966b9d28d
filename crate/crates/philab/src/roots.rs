//! Bracketed scalar root finding.
//!
//! Every scalar inversion in the crate (inverting Phi, conjugate
//! stationarity, Luxemburg lambda, the Sobolev-conjugate outer solve) goes
//! through [`bracketed_root`]: a safeguarded Newton iteration that falls
//! back to bisection whenever the Newton candidate leaves the bracket or no
//! derivative is available. Robust for merely continuous monotone residuals.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct RootOpts {
    /// Relative width of the bracket at which iteration stops.
    pub x_tol: f64,
    /// Residual magnitude (relative to `f_scale`) at which iteration stops.
    pub f_tol: f64,
    /// Scale used to make the residual tolerance relative.
    pub f_scale: f64,
    pub max_iter: usize,
}

impl Default for RootOpts {
    fn default() -> Self {
        RootOpts {
            x_tol: 1e-14,
            f_tol: 1e-12,
            f_scale: 1.0,
            max_iter: 200,
        }
    }
}

/// Find `x` in `[lo, hi]` with `f(x) = 0`, assuming `f(lo)` and `f(hi)`
/// have opposite (or zero) signs.
pub fn bracketed_root(
    f: &dyn Fn(f64) -> f64,
    df: Option<&dyn Fn(f64) -> f64>,
    lo: f64,
    hi: f64,
    opts: &RootOpts,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "root bracket [{lo}, {hi}] is not a finite ordered interval"
        )));
    }
    let f_lo = f(lo);
    let f_hi = f(hi);
    let f_tol = opts.f_tol * opts.f_scale.abs().max(f64::MIN_POSITIVE);
    if f_lo.abs() <= f_tol {
        return Ok(lo);
    }
    if f_hi.abs() <= f_tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on bracket [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}"
        )));
    }

    let (mut a, mut b) = (lo, hi);
    let mut f_a = f_lo;
    let mut x = 0.5 * (a + b);
    for _ in 0..opts.max_iter {
        let f_x = f(x);
        if f_x.abs() <= f_tol {
            return Ok(x);
        }
        // Shrink the bracket around the sign change.
        if f_x.signum() == f_a.signum() {
            a = x;
            f_a = f_x;
        } else {
            b = x;
        }
        // Relative bracket width; never saturates for tiny roots, which
        // bisection reaches within the iteration budget anyway.
        if (b - a).abs() <= opts.x_tol * x.abs() {
            return Ok(0.5 * (a + b));
        }
        // Newton candidate, accepted only if it stays strictly inside.
        let mut next = f64::NAN;
        if let Some(df) = df {
            let d = df(x);
            if d.is_finite() && d != 0.0 {
                let cand = x - f_x / d;
                if cand.is_finite() && cand > a && cand < b {
                    next = cand;
                }
            }
        }
        x = if next.is_finite() { next } else { 0.5 * (a + b) };
    }
    Ok(x)
}

/// Grow `hi` geometrically from `start` until `f(hi) >= target` or the
/// overflow guard trips. Used to bracket strictly increasing maps.
pub fn grow_until_at_least(
    f: &dyn Fn(f64) -> f64,
    start: f64,
    target: f64,
    cap: f64,
    what: &str,
) -> Result<f64> {
    let mut hi = start.max(f64::MIN_POSITIVE);
    for _ in 0..4000 {
        if f(hi) >= target {
            return Ok(hi);
        }
        hi *= 2.0;
        if hi > cap {
            return Err(Error::Range(format!(
                "bracket for {what} exceeded overflow threshold {cap:e} before reaching target {target:e}"
            )));
        }
    }
    Err(Error::Range(format!("bracket search for {what} stalled")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let df = |x: f64| 3.0 * x * x;
        let r = bracketed_root(&f, Some(&df), 0.0, 2.0, &RootOpts::default()).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bisection_only() {
        let f = |x: f64| x.exp() - 3.0;
        let r = bracketed_root(&f, None, 0.0, 4.0, &RootOpts::default()).unwrap();
        assert!((r - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_bracket() {
        let f = |x: f64| x + 10.0;
        assert!(bracketed_root(&f, None, 0.0, 1.0, &RootOpts::default()).is_err());
    }

    #[test]
    fn grows_bracket() {
        let f = |x: f64| x * x;
        let hi = grow_until_at_least(&f, 1.0, 100.0, 1e300, "test").unwrap();
        assert!(f(hi) >= 100.0);
    }

    #[test]
    fn grow_reports_overflow() {
        let f = |_: f64| 0.0;
        assert!(grow_until_at_least(&f, 1.0, 1.0, 1e10, "test").is_err());
    }
}
