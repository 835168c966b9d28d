//! N-functions built from generators, and the scalar Orlicz calculus.
//!
//! An [`NFunction`] is the even convex function `Phi(t) = integral of
//! s*phi(s) ds over [0,t]` induced by a generator `phi`, together with its
//! cached growth data: the Simonenko index pair `(ell, m)` bounding
//! `1 + t*phi'(t)/phi(t)`, the ambient dimension N, and the values of `phi`
//! and `Phi` at 1. Generators come from the parametric catalog
//! ([`NFunctionFamily`]) or from a tabulation ([`GeneratorTable`]).
//!
//! On top of the pointwise evaluations the module provides the derived
//! transforms: the convex conjugate, the Sobolev conjugate `Phi_*`, the
//! doubling constant, the `zeta` power sandwiches, structural condition
//! checks for a generator, and two-function equivalence estimation.

mod family;
mod table;

pub use family::NFunctionFamily;
pub use table::GeneratorTable;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOpts};
use crate::roots::{bracketed_root, grow_until_at_least, RootOpts};

/// Argument magnitude above which bracket growth gives up; `t*phi(t)`
/// already overflows well before this for every catalog family.
const BRACKET_CAP: f64 = 1e160;

#[derive(Clone, Debug)]
enum Generator {
    Family(NFunctionFamily),
    Table(GeneratorTable),
}

/// An N-function with cached growth indices.
#[derive(Clone, Debug)]
pub struct NFunction {
    gen: Generator,
    /// Positive multiplier applied to the generator (`phi -> scale*phi`).
    scale: f64,
    ell: f64,
    em: f64,
    dim_n: u32,
    phi_at_one: f64,
    bigphi_at_one: f64,
}

impl NFunction {
    /// Build from a catalog family; indices come from the family's closed
    /// forms and the structural constraints of the growth hypotheses are
    /// enforced.
    pub fn from_family(family: NFunctionFamily, dim_n: u32) -> Result<Self> {
        family.validate(dim_n)?;
        let (ell, em) = family.indices();
        let mut nf = NFunction {
            gen: Generator::Family(family),
            scale: 1.0,
            ell,
            em,
            dim_n,
            phi_at_one: 0.0,
            bigphi_at_one: 0.0,
        };
        nf.validate_indices()?;
        nf.phi_at_one = nf.phi(1.0);
        nf.bigphi_at_one = nf.big_phi(1.0)?;
        Ok(nf)
    }

    /// Convenience constructor for the p-Laplacian scale.
    pub fn power(p: f64, dim_n: u32) -> Result<Self> {
        NFunction::from_family(NFunctionFamily::Power { p }, dim_n)
    }

    /// Build from a tabulated generator. Indices are estimated on a log
    /// grid and stored as measured; downstream operations that need
    /// `ell > 1` or `m < ell*` enforce that themselves, so that structurally
    /// defective tables can still be inspected with [`NFunction::check_conditions`].
    pub fn from_table(table: GeneratorTable, dim_n: u32) -> Result<Self> {
        if dim_n < 2 {
            return Err(Error::Validation(format!("dim_N must be >= 2, got {dim_n}")));
        }
        let mut nf = NFunction {
            gen: Generator::Table(table),
            scale: 1.0,
            ell: 1.0,
            em: 1.0,
            dim_n,
            phi_at_one: 0.0,
            bigphi_at_one: 0.0,
        };
        let grid = default_grid();
        let (ell_hat, em_hat) = nf.empirical_index_range(&grid)?;
        nf.ell = ell_hat;
        nf.em = em_hat;
        nf.phi_at_one = nf.phi(1.0);
        nf.bigphi_at_one = nf.big_phi(1.0)?;
        Ok(nf)
    }

    /// Same N-function with the generator multiplied by `c > 0`. Indices
    /// are scale-invariant.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {c}")));
        }
        let mut nf = self.clone();
        nf.scale *= c;
        nf.phi_at_one *= c;
        nf.bigphi_at_one *= c;
        Ok(nf)
    }

    fn validate_indices(&self) -> Result<()> {
        let n = f64::from(self.dim_n);
        if self.dim_n < 2 {
            return Err(Error::Validation(format!("dim_N must be >= 2, got {}", self.dim_n)));
        }
        if !(self.ell >= 1.0 && self.ell < n) {
            return Err(Error::Validation(format!(
                "index ell = {} must lie in [1, N) with N = {n}",
                self.ell
            )));
        }
        if !(self.em > 1.0 && self.em < n) {
            return Err(Error::Validation(format!(
                "index m = {} must lie in (1, N) with N = {n}",
                self.em
            )));
        }
        if !(self.em < self.ell_star()) {
            return Err(Error::Validation(format!(
                "index m = {} must stay below ell* = {}",
                self.em,
                self.ell_star()
            )));
        }
        Ok(())
    }

    pub fn family(&self) -> Option<&NFunctionFamily> {
        match &self.gen {
            Generator::Family(f) => Some(f),
            Generator::Table(_) => None,
        }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn em(&self) -> f64 {
        self.em
    }

    pub fn dim_n(&self) -> u32 {
        self.dim_n
    }

    pub fn phi_at_one(&self) -> f64 {
        self.phi_at_one
    }

    pub fn bigphi_at_one(&self) -> f64 {
        self.bigphi_at_one
    }

    /// `ell* = N*ell/(N - ell)`.
    pub fn ell_star(&self) -> f64 {
        let n = f64::from(self.dim_n);
        n * self.ell / (n - self.ell)
    }

    /// `m* = N*m/(N - m)`.
    pub fn em_star(&self) -> f64 {
        let n = f64::from(self.dim_n);
        n * self.em / (n - self.em)
    }

    /// Generator value `phi(t)`, `t > 0`.
    pub fn phi(&self, t: f64) -> f64 {
        self.scale
            * match &self.gen {
                Generator::Family(f) => f.phi(t),
                Generator::Table(tab) => tab.phi(t),
            }
    }

    /// Generator derivative `phi'(t)`, `t > 0`.
    pub fn dphi(&self, t: f64) -> f64 {
        self.scale
            * match &self.gen {
                Generator::Family(f) => f.dphi(t),
                Generator::Table(tab) => tab.dphi(t),
            }
    }

    /// `Phi'(t) = t*phi(t)`, extended by 0 at the origin.
    pub fn big_phi_prime(&self, t: f64) -> f64 {
        self.scale
            * match &self.gen {
                Generator::Family(f) => f.big_phi_prime(t),
                Generator::Table(tab) => tab.big_phi_prime(t),
            }
    }

    /// `Phi(t)`: closed form when the catalog provides one, otherwise
    /// adaptive quadrature of `s*phi(s)` on `[0, t]` (exact segment-wise
    /// integration for tables).
    pub fn big_phi(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "big_phi requires finite t >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let raw = match &self.gen {
            Generator::Family(f) => match f.big_phi_closed(t) {
                Some(v) => v,
                None => integrate(&|s| f.big_phi_prime(s), 0.0, t, &QuadOpts::default())?,
            },
            Generator::Table(tab) => tab.big_phi(t),
        };
        if !(raw.is_finite() && raw >= 0.0) {
            return Err(Error::Validation(format!(
                "generator produced invalid Phi({t}) = {raw}"
            )));
        }
        Ok(self.scale * raw)
    }

    /// Inverse of `Phi` on `[0, infinity)`.
    pub fn big_phi_inv(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "big_phi_inv requires finite y >= 0, got {y}"
            )));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let phi_of = |s: f64| self.big_phi(s).unwrap_or(f64::INFINITY);
        let hi = grow_until_at_least(&phi_of, 1.0, y, BRACKET_CAP, "Phi inverse")?;
        let f = |s: f64| phi_of(s) - y;
        let df = |s: f64| self.big_phi_prime(s);
        bracketed_root(
            &f,
            Some(&df),
            0.0,
            hi,
            &RootOpts {
                f_scale: y,
                ..RootOpts::default()
            },
        )
    }

    /// Convex conjugate `max over s >= 0 of (t*s - Phi(s))`, found from the
    /// stationarity condition `s*phi(s) = t` (unique by strict monotonicity
    /// of `t*phi(t)`).
    pub fn conjugate(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "conjugate requires finite t >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let flux = |s: f64| self.big_phi_prime(s);
        let hi = grow_until_at_least(&flux, 1.0, t, BRACKET_CAP, "conjugate maximizer")?;
        let f = |s: f64| flux(s) - t;
        let df = |s: f64| self.phi(s) + s * self.dphi(s);
        let s_star = bracketed_root(
            &f,
            Some(&df),
            0.0,
            hi,
            &RootOpts {
                f_scale: t,
                ..RootOpts::default()
            },
        )?;
        Ok(t * s_star - self.big_phi(s_star)?)
    }

    /// The integral `G(tau) = integral of Phi^{-1}(s) * s^{-(N+1)/N}` over
    /// `[0, tau]` whose inverse is the Sobolev conjugate. The panel next to
    /// the origin is integrated analytically from a local power fit of
    /// `Phi^{-1}`; the rest goes to adaptive quadrature.
    fn sobolev_g(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        let n = f64::from(self.dim_n);
        let expo = -(n + 1.0) / n;
        let s1 = tau * 1e-4;
        let u1 = self.big_phi_inv(s1)?;
        let u_half = self.big_phi_inv(0.5 * s1)?;
        let gamma = (u1 / u_half).ln() / std::f64::consts::LN_2;
        let a = gamma + expo;
        if a <= -1.0 {
            return Err(Error::Unsupported(format!(
                "Phi^-1 grows like s^{gamma} near 0; the Sobolev-conjugate integrand is not integrable"
            )));
        }
        let head = u1 * s1.powf(expo) * s1 / (a + 1.0);
        let integrand = |s: f64| self.big_phi_inv(s).unwrap_or(f64::NAN) * s.powf(expo);
        let tail = integrate(
            &integrand,
            s1,
            tau,
            &QuadOpts {
                rel_tol: 1e-10,
                ..QuadOpts::default()
            },
        )?;
        Ok(head + tail)
    }

    /// Sobolev conjugate `Phi_*(t)`, the inverse of [`sobolev_g`]; extended
    /// evenly to negative arguments at the caller's side.
    pub fn sobolev_conjugate(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sobolev_conjugate requires finite t >= 0, got {t}"
            )));
        }
        if self.ell <= 1.0 {
            return Err(Error::Unsupported(format!(
                "sobolev_conjugate requires ell > 1 (non-reflexive scale not handled); measured ell = {}",
                self.ell
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let g = |tau: f64| self.sobolev_g(tau).unwrap_or(f64::NAN);
        let hi = grow_until_at_least(&g, 1.0, t, BRACKET_CAP, "Sobolev conjugate")?;
        let f = |tau: f64| g(tau) - t;
        let n = f64::from(self.dim_n);
        let dg = |tau: f64| {
            self.big_phi_inv(tau).unwrap_or(f64::NAN) * tau.powf(-(n + 1.0) / n)
        };
        bracketed_root(
            &f,
            Some(&dg),
            0.0,
            hi,
            &RootOpts {
                f_scale: t.max(1e-300),
                ..RootOpts::default()
            },
        )
    }

    /// The logarithmic slope `t * Phi_*'(t) / Phi_*(t)`, computed exactly
    /// from the inverse-function derivative: with `y = Phi_*(t)`,
    /// `Phi_*'(t) = y^{(N+1)/N} / Phi^{-1}(y)`.
    pub fn sobolev_conjugate_ratio(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sobolev_conjugate_ratio requires t > 0, got {t}"
            )));
        }
        let y = self.sobolev_conjugate(t)?;
        let n = f64::from(self.dim_n);
        Ok(t * y.powf(1.0 / n) / self.big_phi_inv(y)?)
    }

    /// Doubling constant: sup over sampled `t` in `[max(t0, eps), t_max]`
    /// of `Phi(2t)/Phi(t)`.
    pub fn delta2_constant(&self, t0: f64, t_max: f64) -> Result<f64> {
        if !(t0 >= 0.0 && t0 < t_max && t_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta2_constant requires 0 <= t0 < t_max, got [{t0}, {t_max}]"
            )));
        }
        let lo = t0.max(1e-8);
        let grid = log_grid(lo, t_max, 512);
        let mut sup: f64 = 0.0;
        for &t in &grid {
            let ratio = self.big_phi(2.0 * t)? / self.big_phi(t)?;
            sup = sup.max(ratio);
        }
        Ok(sup)
    }

    /// `H(t) = t^2 phi(t) - Phi(t)`, the increasing auxiliary function whose
    /// inverse drives the strong-maximum-principle positivity criterion.
    pub fn smp_h(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("smp_h requires t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(t * self.big_phi_prime(t) - self.big_phi(t)?)
    }

    /// `zeta_0(t) = min(t^ell, t^m)`.
    pub fn zeta0(&self, t: f64) -> f64 {
        t.powf(self.ell).min(t.powf(self.em))
    }

    /// `zeta_1(t) = max(t^ell, t^m)`.
    pub fn zeta1(&self, t: f64) -> f64 {
        t.powf(self.ell).max(t.powf(self.em))
    }

    /// `zeta_2(t) = min(t^{ell*}, t^{m*})`.
    pub fn zeta2(&self, t: f64) -> f64 {
        t.powf(self.ell_star()).min(t.powf(self.em_star()))
    }

    /// `zeta_3(t) = max(t^{ell*}, t^{m*})`.
    pub fn zeta3(&self, t: f64) -> f64 {
        t.powf(self.ell_star()).max(t.powf(self.em_star()))
    }

    /// Whether the power sandwich
    /// `zeta_0(t) Phi(rho) <= Phi(rho t) <= zeta_1(t) Phi(rho)`
    /// holds at `(rho, t)` within 1e-9 relative slack.
    pub fn zeta_bounds_check(&self, rho: f64, t: f64) -> Result<bool> {
        if !(rho > 0.0 && t > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zeta_bounds_check requires positive rho and t, got ({rho}, {t})"
            )));
        }
        let mid = self.big_phi(rho * t)?;
        let base = self.big_phi(rho)?;
        let lo = self.zeta0(t) * base;
        let hi = self.zeta1(t) * base;
        let slack = 1e-9;
        Ok(lo <= mid * (1.0 + slack) + f64::MIN_POSITIVE && mid <= hi * (1.0 + slack) + f64::MIN_POSITIVE)
    }

    /// Empirical range of the growth ratio `(t*phi(t))'/phi(t)` on a grid,
    /// reported as the induced index pair `(1 + inf, 1 + sup)`. Central
    /// differences with relative step 1e-5.
    pub fn empirical_index_range(&self, grid: &[f64]) -> Result<(f64, f64)> {
        validate_grid(grid)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in grid {
            let r = self.growth_ratio(t);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        Ok((1.0 + lo, 1.0 + hi))
    }

    /// `(t*phi(t))'/phi(t)` by central differences of `Phi'`.
    pub fn growth_ratio(&self, t: f64) -> f64 {
        let h = 1e-5;
        (self.big_phi_prime(t * (1.0 + h)) - self.big_phi_prime(t * (1.0 - h)))
            / (2.0 * h * self.big_phi_prime(t))
    }

    /// Structural hypothesis check on a sampling grid: the limits of
    /// `t*phi(t)` at 0 and infinity (monotone trend at the grid extremes),
    /// strict monotonicity of `t*phi(t)`, and containment of the growth
    /// ratio in `[ell-1, m-1]`.
    pub fn check_conditions(&self, grid: &[f64]) -> Result<ConditionReport> {
        validate_grid(grid)?;
        let flux: Vec<f64> = grid.iter().map(|&t| self.big_phi_prime(t)).collect();
        let mid = flux[flux.len() / 2];

        let head_monotone = flux.windows(2).take(8).all(|w| w[1] >= w[0]);
        let zero_limit = head_monotone && flux[0] < 1e-3 * mid;

        let tail_monotone = flux
            .windows(2)
            .skip(flux.len().saturating_sub(9))
            .all(|w| w[1] >= w[0]);
        let infinity_limit = tail_monotone && *flux.last().unwrap() > 1e3 * mid;

        let strictly_increasing = flux
            .windows(2)
            .all(|w| w[1] > w[0] * (1.0 + 1e-13) || (w[0] == 0.0 && w[1] > 0.0));

        let mut ratio_min = f64::INFINITY;
        let mut ratio_max = f64::NEG_INFINITY;
        for &t in grid {
            let r = self.growth_ratio(t);
            ratio_min = ratio_min.min(r);
            ratio_max = ratio_max.max(r);
        }
        let tol = 1e-6 * (self.em - 1.0).abs().max(1.0);
        let ratio_in_bounds =
            ratio_min >= self.ell - 1.0 - tol && ratio_max <= self.em - 1.0 + tol;

        Ok(ConditionReport {
            zero_limit,
            infinity_limit,
            strictly_increasing,
            ratio_in_bounds,
            ratio_min,
            ratio_max,
        })
    }

    /// The index pair `(ell, m)` for downstream growth comparisons. Catalog
    /// families use their closed forms (the grid inf/sup converges only
    /// logarithmically for log-perturbed generators); tabulated generators
    /// use the grid estimate.
    pub fn simonenko_indices(&self, grid: &[f64]) -> Result<(f64, f64)> {
        match &self.gen {
            Generator::Family(_) => {
                validate_grid(grid)?;
                Ok((self.ell, self.em))
            }
            Generator::Table(_) => self.empirical_index_range(grid),
        }
    }
}

/// Outcome of [`NFunction::check_conditions`].
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct ConditionReport {
    /// `t*phi(t) -> 0` as `t -> 0` (trend test at the low grid end).
    pub zero_limit: bool,
    /// `t*phi(t) -> infinity` as `t -> infinity`.
    pub infinity_limit: bool,
    /// `t*phi(t)` strictly increasing across the grid.
    pub strictly_increasing: bool,
    /// Growth ratio within `[ell-1, m-1]` everywhere on the grid.
    pub ratio_in_bounds: bool,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.zero_limit && self.infinity_limit && self.strictly_increasing && self.ratio_in_bounds
    }
}

/// Result of comparing two N-functions for equivalence up to constants on
/// `[t0, infinity)`.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Lower sandwich constant: `c1 * Psi <= Phi` on the sampled range.
    pub c1: f64,
    /// Upper sandwich constant: `Phi <= c2 * Psi`.
    pub c2: f64,
    /// Threshold above which the sandwich was sampled.
    pub t0: f64,
}

impl EquivalenceReport {
    /// For a report produced against the pure power `t^m`, the pair `(C, T)`
    /// with `C*t^m <= Phi(t)` for `t >= T`; `None` when not equivalent.
    pub fn power_lower_bound(&self) -> Option<(f64, f64)> {
        if self.equivalent {
            Some((self.c1, self.t0))
        } else {
            None
        }
    }
}

/// Estimate the equivalence constants of `Phi` (from `nf1`) against `Psi`
/// (from `nf2`) on `grid` intersected with `[t0, infinity)`. Divergence or
/// decay of the ratio is detected from the logarithmic slope over the top
/// decade of the grid.
pub fn equivalence_check(
    nf1: &NFunction,
    nf2: &NFunction,
    grid: &[f64],
    t0: f64,
) -> Result<EquivalenceReport> {
    ratio_equivalence(grid, t0, |t| Ok(nf1.big_phi(t)? / nf2.big_phi(t)?))
}

/// Equivalence of `Phi` against the pure power `t^m`; the reported `c1` is
/// directly the constant in `c1 * t^m <= Phi(t)` for `t >= t0`.
pub fn power_equivalence(nf: &NFunction, m: f64, grid: &[f64], t0: f64) -> Result<EquivalenceReport> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("power exponent must be positive, got {m}")));
    }
    ratio_equivalence(grid, t0, |t| Ok(nf.big_phi(t)? / t.powf(m)))
}

fn ratio_equivalence(
    grid: &[f64],
    t0: f64,
    ratio: impl Fn(f64) -> Result<f64>,
) -> Result<EquivalenceReport> {
    validate_grid(grid)?;
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .filter(|&&t| t >= t0)
        .map(|&t| Ok((t, ratio(t)?)))
        .collect::<Result<_>>()?;
    if pts.len() < 8 {
        return Err(Error::InvalidArgument(format!(
            "fewer than 8 grid points at or above t0 = {t0}"
        )));
    }
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let mut all_finite = true;
    for &(_, r) in &pts {
        if !(r.is_finite() && r > 0.0) {
            all_finite = false;
        }
        c1 = c1.min(r);
        c2 = c2.max(r);
    }
    // Least-squares slope of ln(ratio) vs ln(t) over the top decade; a
    // nonzero slope means the ratio still drifts at the top of the grid,
    // i.e. the two functions separate by more than a constant.
    let t_max = pts.last().unwrap().0;
    let top: Vec<(f64, f64)> = pts
        .iter()
        .filter(|&&(t, _)| t >= t_max / 10.0)
        .map(|&(t, r)| (t.ln(), r.ln()))
        .collect();
    let slope = if all_finite && top.len() >= 3 {
        let n = top.len() as f64;
        let sx: f64 = top.iter().map(|p| p.0).sum();
        let sy: f64 = top.iter().map(|p| p.1).sum();
        let sxx: f64 = top.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = top.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::INFINITY
    };
    let equivalent = all_finite && slope.abs() <= 0.01;
    Ok(EquivalenceReport { equivalent, c1, c2, t0 })
}

/// Geometric grid with `n` points from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && n >= 2);
    let l0 = t_min.ln();
    let l1 = t_max.ln();
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default index-estimation grid: 512 log-spaced points on [1e-8, 1e8].
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-8, 1e8, 512)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 64 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 64 points, got {}",
            grid.len()
        )));
    }
    for w in grid.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
        }
    }
    if !(grid[0] > 0.0 && grid[0].is_finite() && grid.last().unwrap().is_finite()) {
        return Err(Error::InvalidArgument("grid must lie in (0, infinity)".into()));
    }
    if grid.last().unwrap() / grid[0] < 1e8 * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "grid must span at least 8 decades; spans {:.2}",
            (grid.last().unwrap() / grid[0]).log10()
        )));
    }
    Ok(())
}
