//! Catalog of generator families.
//!
//! Each family fixes a generator `phi` so that the induced N-function is
//! `Phi(t) = integral of s*phi(s) over [0, t]`. Closed forms for `Phi`, its
//! derivative `t*phi(t)`, and the generator derivative are provided
//! wherever they exist; the generalized-Newtonian family falls back to
//! quadrature for `Phi` itself.

use crate::error::{Error, Result};

/// A named generator family with its real parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NFunctionFamily {
    /// `Phi(t) = (1 + t^2)^gamma - 1`, nonlinear elasticity.
    Elasticity { gamma: f64 },
    /// `Phi(t) = t^alpha * ln(1+t)^beta`, plasticity with hardening.
    Plasticity { alpha: f64, beta: f64 },
    /// `Phi(t) = t^p / p`, the p-Laplacian scale.
    Power { p: f64 },
    /// `Phi(t) = t^p/p + t^q/q`, the (p,q)-Laplacian scale.
    PowerSum { p: f64, q: f64 },
    /// `Phi'(t) = t^(1-alpha) * asinh(t)^beta`, generalized Newtonian fluid.
    NewtonianFluid { alpha: f64, beta: f64 },
}

impl NFunctionFamily {
    pub fn id(&self) -> &'static str {
        match self {
            NFunctionFamily::Elasticity { .. } => "elasticity",
            NFunctionFamily::Plasticity { .. } => "plasticity",
            NFunctionFamily::Power { .. } => "power",
            NFunctionFamily::PowerSum { .. } => "power_sum",
            NFunctionFamily::NewtonianFluid { .. } => "newtonian_fluid",
        }
    }

    /// Parameter-range validation. `dim_n` enters only where the admissible
    /// range itself depends on the ambient dimension.
    pub fn validate(&self, dim_n: u32) -> Result<()> {
        let n = f64::from(dim_n);
        match *self {
            NFunctionFamily::Elasticity { gamma } => {
                let upper = if dim_n <= 2 { f64::INFINITY } else { n / (n - 2.0) };
                if !(gamma > 1.0 && gamma < upper) {
                    return Err(Error::Validation(format!(
                        "elasticity requires 1 < gamma < N/(N-2) = {upper}; got gamma = {gamma}"
                    )));
                }
            }
            NFunctionFamily::Plasticity { alpha, beta } => {
                if !(alpha >= 1.0 && beta > 0.0) {
                    return Err(Error::Validation(format!(
                        "plasticity requires alpha >= 1 and beta > 0; got alpha = {alpha}, beta = {beta}"
                    )));
                }
            }
            NFunctionFamily::Power { p } => {
                if !(p > 1.0) {
                    return Err(Error::Validation(format!("power requires p > 1; got p = {p}")));
                }
            }
            NFunctionFamily::PowerSum { p, q } => {
                if !(1.0 < p && p < q && q < n) {
                    return Err(Error::Validation(format!(
                        "power_sum requires 1 < p < q < N = {n}; got p = {p}, q = {q}"
                    )));
                }
                let p_star = p * n / (n - p);
                if !(q < p_star) {
                    return Err(Error::Validation(format!(
                        "power_sum requires q < p* = {p_star}; got q = {q}"
                    )));
                }
            }
            NFunctionFamily::NewtonianFluid { alpha, beta } => {
                if !((0.0..=1.0).contains(&alpha) && beta > 0.0) {
                    return Err(Error::Validation(format!(
                        "newtonian_fluid requires 0 <= alpha <= 1 and beta > 0; got alpha = {alpha}, beta = {beta}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Global Simonenko indices `(ell, m)`: the inf and sup over `t > 0` of
    /// `1 + t*phi'(t)/phi(t)`. For every catalog family the two extremes are
    /// attained in the limits `t -> infinity` and `t -> 0`, which gives the
    /// closed forms below; they override grid estimation because the ratio
    /// approaches its limit only logarithmically for the log-perturbed
    /// families and no floating-point grid can resolve that.
    pub fn indices(&self) -> (f64, f64) {
        match *self {
            NFunctionFamily::Elasticity { gamma } => (2.0, 2.0 * gamma),
            NFunctionFamily::Plasticity { alpha, beta } => (alpha, alpha + beta),
            NFunctionFamily::Power { p } => (p, p),
            NFunctionFamily::PowerSum { p, q } => (p, q),
            NFunctionFamily::NewtonianFluid { alpha, beta } => (2.0 - alpha, 2.0 - alpha + beta),
        }
    }

    /// Generator `phi(t)`, `t > 0`.
    pub fn phi(&self, t: f64) -> f64 {
        match *self {
            NFunctionFamily::Elasticity { gamma } => 2.0 * gamma * (1.0 + t * t).powf(gamma - 1.0),
            NFunctionFamily::Plasticity { alpha, beta } => {
                let l = t.ln_1p();
                alpha * t.powf(alpha - 2.0) * l.powf(beta)
                    + beta * t.powf(alpha - 1.0) * l.powf(beta - 1.0) / (1.0 + t)
            }
            NFunctionFamily::Power { p } => t.powf(p - 2.0),
            NFunctionFamily::PowerSum { p, q } => t.powf(p - 2.0) + t.powf(q - 2.0),
            NFunctionFamily::NewtonianFluid { alpha, beta } => {
                t.powf(-alpha) * t.asinh().powf(beta)
            }
        }
    }

    /// Generator derivative `phi'(t)`, `t > 0`.
    pub fn dphi(&self, t: f64) -> f64 {
        match *self {
            NFunctionFamily::Elasticity { gamma } => {
                4.0 * gamma * (gamma - 1.0) * t * (1.0 + t * t).powf(gamma - 2.0)
            }
            NFunctionFamily::Plasticity { alpha, beta } => {
                let l = t.ln_1p();
                let one_t = 1.0 + t;
                let mut d = 0.0;
                if alpha != 2.0 {
                    d += alpha * (alpha - 2.0) * t.powf(alpha - 3.0) * l.powf(beta);
                }
                d += (alpha * beta + beta * (alpha - 1.0))
                    * t.powf(alpha - 2.0)
                    * l.powf(beta - 1.0)
                    / one_t;
                if beta != 1.0 {
                    d += beta * (beta - 1.0) * t.powf(alpha - 1.0) * l.powf(beta - 2.0)
                        / (one_t * one_t);
                }
                d -= beta * t.powf(alpha - 1.0) * l.powf(beta - 1.0) / (one_t * one_t);
                d
            }
            NFunctionFamily::Power { p } => {
                if p == 2.0 {
                    0.0
                } else {
                    (p - 2.0) * t.powf(p - 3.0)
                }
            }
            NFunctionFamily::PowerSum { p, q } => {
                let mut d = 0.0;
                if p != 2.0 {
                    d += (p - 2.0) * t.powf(p - 3.0);
                }
                if q != 2.0 {
                    d += (q - 2.0) * t.powf(q - 3.0);
                }
                d
            }
            NFunctionFamily::NewtonianFluid { alpha, beta } => {
                let a = t.asinh();
                let mut d = beta * t.powf(-alpha) * a.powf(beta - 1.0) / (1.0 + t * t).sqrt();
                if alpha != 0.0 {
                    d -= alpha * t.powf(-alpha - 1.0) * a.powf(beta);
                }
                d
            }
        }
    }

    /// `t * phi(t)`, the derivative of the N-function. Defined to vanish at
    /// `t = 0` so integrands never see `0 * infinity`.
    pub fn big_phi_prime(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match *self {
            NFunctionFamily::Elasticity { gamma } => {
                2.0 * gamma * t * (1.0 + t * t).powf(gamma - 1.0)
            }
            NFunctionFamily::Plasticity { alpha, beta } => {
                let l = t.ln_1p();
                alpha * t.powf(alpha - 1.0) * l.powf(beta)
                    + beta * t.powf(alpha) * l.powf(beta - 1.0) / (1.0 + t)
            }
            NFunctionFamily::Power { p } => t.powf(p - 1.0),
            NFunctionFamily::PowerSum { p, q } => t.powf(p - 1.0) + t.powf(q - 1.0),
            NFunctionFamily::NewtonianFluid { alpha, beta } => {
                t.powf(1.0 - alpha) * t.asinh().powf(beta)
            }
        }
    }

    /// Closed form of `Phi(t)` where one exists.
    pub fn big_phi_closed(&self, t: f64) -> Option<f64> {
        match *self {
            // (1 + t^2)^gamma - 1 through expm1/ln1p: the direct form loses
            // all significance for small t
            NFunctionFamily::Elasticity { gamma } => Some((gamma * (t * t).ln_1p()).exp_m1()),
            NFunctionFamily::Plasticity { alpha, beta } => {
                if t == 0.0 {
                    Some(0.0)
                } else {
                    Some(t.powf(alpha) * t.ln_1p().powf(beta))
                }
            }
            NFunctionFamily::Power { p } => Some(t.powf(p) / p),
            NFunctionFamily::PowerSum { p, q } => Some(t.powf(p) / p + t.powf(q) / q),
            NFunctionFamily::NewtonianFluid { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_dphi(fam: &NFunctionFamily, t: f64) -> f64 {
        let h = 1e-6 * t;
        (fam.phi(t + h) - fam.phi(t - h)) / (2.0 * h)
    }

    #[test]
    fn dphi_matches_finite_differences() {
        let fams = [
            NFunctionFamily::Elasticity { gamma: 1.5 },
            NFunctionFamily::Plasticity { alpha: 2.0, beta: 1.0 },
            NFunctionFamily::Plasticity { alpha: 1.5, beta: 0.7 },
            NFunctionFamily::Power { p: 2.6 },
            NFunctionFamily::PowerSum { p: 1.5, q: 1.8 },
            NFunctionFamily::NewtonianFluid { alpha: 0.5, beta: 1.0 },
        ];
        for fam in &fams {
            for &t in &[0.05, 0.3, 1.0, 4.0, 50.0] {
                let exact = fam.dphi(t);
                let approx = fd_dphi(fam, t);
                let scale = exact.abs().max(1e-8);
                assert!(
                    (exact - approx).abs() <= 1e-5 * scale,
                    "{} dphi mismatch at t={t}: {exact} vs {approx}",
                    fam.id()
                );
            }
        }
    }

    #[test]
    fn big_phi_prime_consistent_with_phi() {
        let fam = NFunctionFamily::Plasticity { alpha: 2.0, beta: 1.0 };
        for &t in &[0.1, 1.0, 10.0] {
            assert!((fam.big_phi_prime(t) - t * fam.phi(t)).abs() < 1e-12 * fam.big_phi_prime(t));
        }
        assert_eq!(fam.big_phi_prime(0.0), 0.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(NFunctionFamily::Power { p: 1.0 }.validate(3).is_err());
        assert!(NFunctionFamily::Power { p: 2.0 }.validate(3).is_ok());
        assert!(NFunctionFamily::PowerSum { p: 2.0, q: 3.0 }.validate(4).is_ok());
        // q >= N
        assert!(NFunctionFamily::PowerSum { p: 2.0, q: 3.0 }.validate(3).is_err());
        // gamma above N/(N-2)
        assert!(NFunctionFamily::Elasticity { gamma: 2.5 }.validate(4).is_err());
        assert!(NFunctionFamily::Elasticity { gamma: 1.5 }.validate(4).is_ok());
        assert!(NFunctionFamily::Plasticity { alpha: 0.5, beta: 1.0 }.validate(3).is_err());
        assert!(NFunctionFamily::NewtonianFluid { alpha: 1.5, beta: 1.0 }.validate(3).is_err());
    }
}
