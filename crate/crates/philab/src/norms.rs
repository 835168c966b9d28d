//! Modulars, Luxemburg norms, and the norm inequalities on discrete fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::nfunction::NFunction;
use crate::roots::{bracketed_root, RootOpts};

/// Norms of a field in one bundle, as persisted by the harness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    /// `integral of Phi(|u|)`.
    pub modular: f64,
    /// Luxemburg norm of `u`.
    pub luxemburg: f64,
    /// Luxemburg norm of `|grad u|`.
    pub grad_luxemburg: f64,
    /// Requested Lp norms as `(p, value)` pairs.
    pub lp_values: Vec<LpEntry>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LpEntry {
    pub p: f64,
    pub value: f64,
}

/// Element-wise quadrature of `Phi(|u|)`.
pub fn modular(field: &Field, nf: &NFunction, mesh: &Mesh) -> Result<f64> {
    field.matches(mesh)?;
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        let mut acc = 0.0;
        let mut err = Ok(());
        mesh.for_each_quad_point(k, |bary, w| {
            let v = field.at(mesh, k, bary).abs();
            match nf.big_phi(v) {
                Ok(phi) => acc += w * phi,
                Err(e) => {
                    if err.is_ok() {
                        err = Err(e);
                    }
                }
            }
        });
        err?;
        total += acc;
    }
    Ok(total)
}

/// Quadrature of `Phi(|u| / lambda)`, the scaled modular the Luxemburg
/// solve iterates on.
fn scaled_modular(field: &Field, nf: &NFunction, mesh: &Mesh, lambda: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        mesh.for_each_quad_point(k, |bary, w| {
            let v = field.at(mesh, k, bary).abs() / lambda;
            total += w * nf.big_phi(v).unwrap_or(f64::INFINITY);
        });
    }
    total
}

/// Derivative of the scaled modular in `lambda`.
fn scaled_modular_derivative(field: &Field, nf: &NFunction, mesh: &Mesh, lambda: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        mesh.for_each_quad_point(k, |bary, w| {
            let v = field.at(mesh, k, bary).abs();
            total += w * nf.big_phi_prime(v / lambda) * v;
        });
    }
    -total / (lambda * lambda)
}

/// Luxemburg norm: the unique `lambda > 0` with
/// `integral of Phi(|u|/lambda) = 1`, or 0 for the zero field.
pub fn luxemburg_norm(field: &Field, nf: &NFunction, mesh: &Mesh) -> Result<f64> {
    field.matches(mesh)?;
    let sup = field.sup_norm();
    if sup == 0.0 {
        return Ok(0.0);
    }
    lux_of(nf, mesh, sup, |lam| scaled_modular(field, nf, mesh, lam), |lam| {
        scaled_modular_derivative(field, nf, mesh, lam)
    })
}

/// Luxemburg norm of the element-wise gradient magnitude `|grad u|`
/// (piecewise constant, integrated with element measures).
pub fn grad_luxemburg_norm(field: &Field, nf: &NFunction, mesh: &Mesh) -> Result<f64> {
    field.matches(mesh)?;
    let grads: Vec<f64> = (0..mesh.n_elements())
        .map(|k| {
            let g = mesh.element_gradient(k, field.values());
            g[0].hypot(g[1])
        })
        .collect();
    let sup = grads.iter().fold(0.0f64, |m, g| m.max(*g));
    if sup == 0.0 {
        return Ok(0.0);
    }
    let modular_of = |lam: f64| -> f64 {
        (0..mesh.n_elements())
            .map(|k| mesh.element_measure(k) * nf.big_phi(grads[k] / lam).unwrap_or(f64::INFINITY))
            .sum()
    };
    let dmod = |lam: f64| -> f64 {
        let s: f64 = (0..mesh.n_elements())
            .map(|k| mesh.element_measure(k) * nf.big_phi_prime(grads[k] / lam) * grads[k])
            .sum();
        -s / (lam * lam)
    };
    lux_of(nf, mesh, sup, modular_of, dmod)
}

fn lux_of(
    nf: &NFunction,
    mesh: &Mesh,
    sup: f64,
    modular_of: impl Fn(f64) -> f64,
    dmod: impl Fn(f64) -> f64,
) -> Result<f64> {
    // Scaling heuristic from the constant-field case: for u = c on Omega the
    // norm is c / Phi^{-1}(1/|Omega|).
    let center = sup / nf.big_phi_inv(1.0 / mesh.measure())?;
    let mut lo = center * 1e-3;
    let mut hi = center * 1e3;
    // expand geometrically until the bracket straddles modular = 1
    for _ in 0..200 {
        if modular_of(lo) > 1.0 {
            break;
        }
        lo /= 8.0;
    }
    for _ in 0..200 {
        if modular_of(hi) < 1.0 {
            break;
        }
        hi *= 8.0;
    }
    let f = |lam: f64| modular_of(lam) - 1.0;
    bracketed_root(
        &f,
        Some(&dmod),
        lo,
        hi,
        &RootOpts {
            x_tol: 1e-10,
            f_tol: 1e-12,
            f_scale: 1.0,
            max_iter: 300,
        },
    )
}

/// Lp norm (quasi-norm for p < 1) of the P1 interpolant by element
/// quadrature of `|u|^p`.
pub fn lp_norm(field: &Field, mesh: &Mesh, p: f64) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("lp_norm requires p > 0, got {p}")));
    }
    field.matches(mesh)?;
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        mesh.for_each_quad_point(k, |bary, w| {
            total += w * field.at(mesh, k, bary).abs().powf(p);
        });
    }
    Ok(total.powf(1.0 / p))
}

/// Full norm bundle.
pub fn norm_report(field: &Field, nf: &NFunction, mesh: &Mesh, lp: &[f64]) -> Result<NormReport> {
    let mut lp_values = Vec::with_capacity(lp.len());
    for &p in lp {
        lp_values.push(LpEntry {
            p,
            value: lp_norm(field, mesh, p)?,
        });
    }
    Ok(NormReport {
        modular: modular(field, nf, mesh)?,
        luxemburg: luxemburg_norm(field, nf, mesh)?,
        grad_luxemburg: grad_luxemburg_norm(field, nf, mesh)?,
        lp_values,
    })
}

/// Whether the trace-zero norm inequality
/// `||u||_Phi <= 2 d_Omega ||grad u||_Phi` holds with slack `1 + 1e-8`.
pub fn poincare_check(field: &Field, nf: &NFunction, mesh: &Mesh) -> Result<bool> {
    field.matches(mesh)?;
    if !field.is_boundary_zero(mesh) {
        return Err(Error::Precondition(
            "poincare_check requires a field vanishing on the boundary".into(),
        ));
    }
    let lhs = luxemburg_norm(field, nf, mesh)?;
    let rhs = 2.0 * mesh.diameter() * grad_luxemburg_norm(field, nf, mesh)?;
    Ok(lhs <= rhs * (1.0 + 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval(n: usize) -> Mesh {
        Mesh::interval(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn modular_of_zero_field() {
        let m = unit_interval(16);
        let nf = NFunction::power(2.0, 3).unwrap();
        let u = Field::zeros(&m);
        assert_eq!(modular(&u, &nf, &m).unwrap(), 0.0);
    }

    #[test]
    fn modular_of_constant_field() {
        let m = unit_interval(16);
        let nf = NFunction::power(2.0, 3).unwrap();
        let c = 1.7;
        let u = Field::from_fn(&m, |_| c).unwrap();
        assert!((modular(&u, &nf, &m).unwrap() - c * c / 2.0).abs() < 1e-14);
    }

    #[test]
    fn modular_of_linear_field_exact() {
        // u(x) = x with Phi = t^2/2: 2-point Gauss integrates the quadratic
        // integrand exactly, so the modular is 1/6 to machine precision.
        let m = unit_interval(32);
        let nf = NFunction::power(2.0, 3).unwrap();
        let u = Field::from_fn(&m, |p| p[0]).unwrap();
        assert!((modular(&u, &nf, &m).unwrap() - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn modular_size_mismatch() {
        let m = unit_interval(16);
        let m2 = unit_interval(8);
        let nf = NFunction::power(2.0, 3).unwrap();
        let u = Field::zeros(&m2);
        assert!(modular(&u, &nf, &m).is_err());
    }

    #[test]
    fn luxemburg_equals_lp_for_pure_power() {
        // Phi = t^p (no 1/p factor): the Luxemburg norm is exactly the Lp norm.
        let m = unit_interval(64);
        for p in [1.5, 2.0, 3.0] {
            let nf = NFunction::power(p, 4).unwrap().scaled(p).unwrap();
            let u = Field::from_fn(&m, |q| (3.0 * q[0]).sin() + 0.2).unwrap();
            let lux = luxemburg_norm(&u, &nf, &m).unwrap();
            let lp = lp_norm(&u, &m, p).unwrap();
            assert!(
                (lux - lp).abs() <= 1e-9 * lp,
                "p={p}: luxemburg {lux} vs lp {lp}"
            );
        }
    }

    #[test]
    fn luxemburg_linear_field_closed_form() {
        // u(x) = x on (0,1), Phi = t^2: lambda solves ||u/lambda||_2^2 = 1,
        // i.e. lambda = 1/sqrt(3).
        let m = unit_interval(64);
        let nf = NFunction::power(2.0, 3).unwrap().scaled(2.0).unwrap();
        let u = Field::from_fn(&m, |p| p[0]).unwrap();
        let lux = luxemburg_norm(&u, &nf, &m).unwrap();
        assert!((lux - 1.0 / 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn luxemburg_zero_field() {
        let m = unit_interval(16);
        let nf = NFunction::power(2.0, 3).unwrap();
        assert_eq!(luxemburg_norm(&Field::zeros(&m), &nf, &m).unwrap(), 0.0);
    }

    #[test]
    fn poincare_on_closed_form_field() {
        // u = x(1-x) with Phi = t^2: LHS = sqrt(1/30), RHS = 2*sqrt(1/3).
        let m = unit_interval(128);
        let nf = NFunction::power(2.0, 3).unwrap().scaled(2.0).unwrap();
        let u = Field::from_fn(&m, |p| p[0] * (1.0 - p[0])).unwrap();
        assert!(poincare_check(&u, &nf, &m).unwrap());
        let lhs = luxemburg_norm(&u, &nf, &m).unwrap();
        let rhs = 2.0 * m.diameter() * grad_luxemburg_norm(&u, &nf, &m).unwrap();
        assert!((lhs - (1.0f64 / 30.0).sqrt()).abs() < 1e-4, "lhs = {lhs}");
        assert!((rhs - 2.0 * (1.0f64 / 3.0).sqrt()).abs() < 1e-4, "rhs = {rhs}");
    }

    #[test]
    fn poincare_trivial_zero() {
        let m = unit_interval(16);
        let nf = NFunction::power(2.0, 3).unwrap();
        assert!(poincare_check(&Field::zeros(&m), &nf, &m).unwrap());
    }

    #[test]
    fn poincare_rejects_nonzero_boundary() {
        let m = unit_interval(16);
        let nf = NFunction::power(2.0, 3).unwrap();
        let u = Field::from_fn(&m, |_| 1.0).unwrap();
        assert!(matches!(
            poincare_check(&u, &nf, &m),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn norm_modular_sandwich() {
        // zeta_0(||u||) <= modular(u) <= zeta_1(||u||), inherited pointwise
        // from the power sandwich of Phi.
        let m = unit_interval(48);
        let nf = NFunction::from_family(
            crate::nfunction::NFunctionFamily::PowerSum { p: 1.5, q: 1.8 },
            2,
        )
        .unwrap();
        let u = Field::from_fn(&m, |p| (7.0 * p[0]).cos() * 1.3).unwrap();
        let lux = luxemburg_norm(&u, &nf, &m).unwrap();
        let md = modular(&u, &nf, &m).unwrap();
        let tol = 1e-7 * md.max(1.0);
        assert!(nf.zeta0(lux) <= md + tol && md <= nf.zeta1(lux) + tol);
    }
}
