//! Explicit constant chains for the a-priori L-infinity bounds.
//!
//! The homogeneous bound iterates the exponent ladder
//! `beta_1 = q'(ell-1)`, `beta_k* = beta_k + beta_1`,
//! `beta_{k+1} = delta beta_k*` with `delta = ell*/(ell q')`, accumulates
//! the logarithmic chain `F_{k+1} <= lambda_k + delta F_k`, and passes to
//! the closed-form limit `d_0`; the solution then satisfies
//! `||u||_inf <= exp(d_0)`. A second variant runs the same chain on the
//! `(m, m*)` pair when `Phi` is equivalent to the pure power `t^m` above a
//! threshold. The module also carries the integrability ladders used to
//! push a weak solution into every `L^q`, the pointwise gradient inequality
//! for truncated powers that drives them, and the bounded tail-cutoff
//! construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::norms::lp_norm;

/// Scalar inputs of the homogeneous a-priori bound. The norms come from
/// computed fields; everything else is problem data.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MoserInputs {
    /// Integrability exponent of the source (`q > N/ell`, or `N/m` on the
    /// power-equivalent branch).
    pub q: f64,
    pub ell: f64,
    pub em: f64,
    pub dim_n: u32,
    /// `||f||_q`.
    pub norm_f_q: f64,
    /// `|Omega|`.
    pub omega_measure: f64,
    /// `||u_1||_1` of the first truncated solution.
    pub norm_u1_l1: f64,
    /// `Phi(1)`.
    pub bigphi_at_one: f64,
    /// Constant of the trace-zero Sobolev embedding used by the chain.
    pub mu: f64,
    /// `beta_1 * ln ||u||_{beta_1}` from a computed field; may be negative.
    pub f1: f64,
}

impl MoserInputs {
    fn validate(&self) -> Result<()> {
        let positives = [
            ("q", self.q),
            ("ell", self.ell),
            ("em", self.em),
            ("norm_f_q", self.norm_f_q),
            ("omega_measure", self.omega_measure),
            ("norm_u1_l1", self.norm_u1_l1),
            ("bigphi_at_one", self.bigphi_at_one),
            ("mu", self.mu),
        ];
        for (name, v) in positives {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "MoserInputs.{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.dim_n < 2 {
            return Err(Error::InvalidArgument(format!(
                "MoserInputs.dim_n must be >= 2, got {}",
                self.dim_n
            )));
        }
        if !self.f1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "MoserInputs.f1 must be finite, got {}",
                self.f1
            )));
        }
        Ok(())
    }
}

/// The exponent ladder of the homogeneous iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaSequence {
    pub q_prime: f64,
    pub delta: f64,
    pub beta: Vec<f64>,
    pub beta_star: Vec<f64>,
}

/// Closed form `beta_k = (2 delta^k - delta^{k-1} - delta)/(delta - 1) * beta_1`.
pub fn beta_closed_form(beta1: f64, delta: f64, k: usize) -> f64 {
    let dk = delta.powi(k as i32);
    (2.0 * dk - dk / delta - delta) / (delta - 1.0) * beta1
}

/// Closed form `beta_k* = (2 delta^k - delta^{k-1} - 1)/(delta - 1) * beta_1`.
pub fn beta_star_closed_form(beta1: f64, delta: f64, k: usize) -> f64 {
    let dk = delta.powi(k as i32);
    (2.0 * dk - dk / delta - 1.0) / (delta - 1.0) * beta1
}

/// Build the ladder by recursion and check it against the closed forms.
pub fn beta_sequence(q: f64, ell: f64, dim_n: u32, k_max: usize) -> Result<BetaSequence> {
    let n = f64::from(dim_n);
    if dim_n < 2 || !(ell > 1.0 && ell < n) {
        return Err(Error::InvalidArgument(format!(
            "beta_sequence requires 1 < ell < N, got ell = {ell}, N = {n}"
        )));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if !(q > n / ell) {
        return Err(Error::InvalidArgument(format!(
            "iteration is void unless q > N/ell = {}; got q = {q} (delta <= 1)",
            n / ell
        )));
    }
    let q_prime = q / (q - 1.0);
    let ell_star = n * ell / (n - ell);
    let delta = ell_star / (ell * q_prime);
    let beta1 = q_prime * (ell - 1.0);
    let mut beta = Vec::with_capacity(k_max);
    let mut beta_star = Vec::with_capacity(k_max);
    beta.push(beta1);
    beta_star.push(2.0 * beta1);
    for k in 1..k_max {
        let b = delta * beta_star[k - 1];
        beta.push(b);
        beta_star.push(b + beta1);
    }
    for (k, (&b, &bs)) in beta.iter().zip(beta_star.iter()).enumerate() {
        let bc = beta_closed_form(beta1, delta, k + 1);
        let bsc = beta_star_closed_form(beta1, delta, k + 1);
        if (b - bc).abs() > 1e-9 * bc.abs() || (bs - bsc).abs() > 1e-9 * bsc.abs() {
            return Err(Error::Internal(format!(
                "beta recursion disagrees with closed form at k = {}",
                k + 1
            )));
        }
    }
    Ok(BetaSequence {
        q_prime,
        delta,
        beta,
        beta_star,
    })
}

/// The full constant chain of the homogeneous bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MoserReport {
    pub q_prime: f64,
    pub delta: f64,
    pub beta: Vec<f64>,
    pub beta_star: Vec<f64>,
    #[serde(rename = "A")]
    pub a_const: f64,
    pub b: f64,
    pub lambda: Vec<f64>,
    #[serde(rename = "F")]
    pub f_chain: Vec<f64>,
    pub d0: f64,
    /// Truncated-series evaluation of `d0` at `k_max`, for cross-checking
    /// against the closed form.
    pub d0_series: f64,
    pub linf_bound: f64,
}

/// Sharp constant of the Sobolev embedding `W^{1,p}(R^N) -> L^{p*}`, a
/// valid upper bound for the trace-zero embedding on any domain.
pub fn talenti_constant(p: f64, dim_n: u32) -> Result<f64> {
    let n = f64::from(dim_n);
    if !(p > 1.0 && p < n) {
        return Err(Error::InvalidArgument(format!(
            "talenti_constant requires 1 < p < N, got p = {p}, N = {n}"
        )));
    }
    let g = libm::tgamma;
    let bracket = g(1.0 + 0.5 * n) * g(n) / (g(n / p) * g(1.0 + n - n / p));
    Ok(std::f64::consts::PI.powf(-0.5)
        * n.powf(-1.0 / p)
        * ((p - 1.0) / (n - p)).powf(1.0 - 1.0 / p)
        * bracket.powf(1.0 / n))
}

/// Shared arithmetic of the two bound variants: given the exponent ladder,
/// the constant `A`, the embedding constant and `F_1`, produce the
/// logarithmic chain and the limit `d_0`.
fn apriori_chain(
    seq: &BetaSequence,
    alpha_star: f64,
    a_const: f64,
    mu: f64,
    f1: f64,
) -> Result<(f64, Vec<f64>, Vec<f64>, f64, f64)> {
    let delta = seq.delta;
    let beta1 = seq.beta[0];
    let b = alpha_star * (mu * a_const * beta1).ln();
    let lambda: Vec<f64> = seq
        .beta_star
        .iter()
        .map(|&bs| alpha_star * (mu * a_const * bs).ln())
        .collect();
    let mut f_chain = Vec::with_capacity(seq.beta.len());
    f_chain.push(f1);
    for k in 1..seq.beta.len() {
        f_chain.push(lambda[k - 1] + delta * f_chain[k - 1]);
    }
    let dm1 = delta - 1.0;
    // closed form of the limit, using sum n/delta^n = delta/(delta-1)^2
    let numerator = f1 + b / dm1 + alpha_star * ((2.0 / dm1).ln() / dm1 + delta.ln() * delta / (dm1 * dm1));
    let denominator = (2.0 * delta - 1.0) / dm1 * beta1;
    let d0 = numerator / denominator;
    // truncated series with the same per-term upper bounds
    let k_max = seq.beta.len();
    let mut series_num = f1;
    for n in 1..k_max {
        let dn = delta.powi(n as i32);
        series_num += b / dn + alpha_star * ((2.0 / dm1).ln() + n as f64 * delta.ln()) / dn;
    }
    let series_den = (2.0 * delta - 1.0 - delta.powi(1 - k_max as i32)) / dm1 * beta1;
    let d0_series = series_num / series_den;
    if !(d0.is_finite() && d0 < 700.0) {
        return Err(Error::Range(format!(
            "a-priori exponent d0 = {d0} overflows exp()"
        )));
    }
    Ok((b, lambda, f_chain, d0, d0_series))
}

/// A-priori bound for the data problem on the `(ell, ell*)` branch
/// (`Phi` not equivalent to `t^m`): computes `A`, `b`, the `lambda_k` and
/// `F_k` chains, the closed-form `d_0`, and the bound `exp(d_0)`.
pub fn homog_apriori_bound(inputs: &MoserInputs, k_max: usize) -> Result<MoserReport> {
    inputs.validate()?;
    let n = f64::from(inputs.dim_n);
    if !(inputs.q * inputs.ell > n) {
        return Err(Error::InvalidArgument(format!(
            "homog_apriori_bound requires q > N/ell = {}, got q = {}",
            n / inputs.ell,
            inputs.q
        )));
    }
    let seq = beta_sequence(inputs.q, inputs.ell, inputs.dim_n, k_max)?;
    let q_prime = seq.q_prime;
    let lp1 = inputs.ell * inputs.bigphi_at_one;
    let a_const = q_prime / lp1
        * (inputs.norm_f_q
            + lp1 / q_prime
                * inputs.omega_measure.powf(2.0 - 1.0 / q_prime)
                / inputs.norm_u1_l1);
    let ell_star = n * inputs.ell / (n - inputs.ell);
    let (b, lambda, f_chain, d0, d0_series) =
        apriori_chain(&seq, ell_star, a_const, inputs.mu, inputs.f1)?;
    Ok(MoserReport {
        q_prime,
        delta: seq.delta,
        beta: seq.beta,
        beta_star: seq.beta_star,
        a_const,
        b,
        lambda,
        f_chain,
        d0,
        d0_series,
        linf_bound: d0.exp(),
    })
}

/// Lower power bound established by an equivalence check:
/// `c * t^m <= Phi(t)` for `t >= t_threshold`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PowerEquivalence {
    pub c: f64,
    pub t_threshold: f64,
}

/// A-priori bound on the `(m, m*)` branch, for `Phi` equivalent to `t^m`
/// above `t_threshold`. The chain swaps `(ell, ell*)` for `(m, m*)` in the
/// exponent ladder and picks up the `T^m` factor in the constant `A`; for a
/// homogeneous `Phi` with `T = 1` it reproduces the other branch exactly.
pub fn homog_apriori_bound_m(
    inputs: &MoserInputs,
    equiv: &PowerEquivalence,
    k_max: usize,
) -> Result<MoserReport> {
    inputs.validate()?;
    if !(equiv.c > 0.0 && equiv.c.is_finite()) {
        return Err(Error::Precondition(format!(
            "power equivalence not established: lower constant c = {}",
            equiv.c
        )));
    }
    if !(equiv.t_threshold >= 0.0) {
        return Err(Error::Precondition(format!(
            "power equivalence threshold must be nonnegative, got {}",
            equiv.t_threshold
        )));
    }
    let n = f64::from(inputs.dim_n);
    if !(inputs.q * inputs.em > n) {
        return Err(Error::InvalidArgument(format!(
            "homog_apriori_bound_m requires q > N/m = {}, got q = {}",
            n / inputs.em,
            inputs.q
        )));
    }
    let seq = beta_sequence(inputs.q, inputs.em, inputs.dim_n, k_max)?;
    let q_prime = seq.q_prime;
    let lp1 = inputs.ell * inputs.bigphi_at_one;
    let t_m = equiv.t_threshold.powf(inputs.em);
    let a_const = q_prime / lp1
        * (inputs.norm_f_q
            + lp1 * t_m / q_prime
                * inputs.omega_measure.powf(2.0 - 1.0 / q_prime)
                / inputs.norm_u1_l1);
    let em_star = n * inputs.em / (n - inputs.em);
    let (b, lambda, f_chain, d0, d0_series) =
        apriori_chain(&seq, em_star, a_const, inputs.mu, inputs.f1)?;
    Ok(MoserReport {
        q_prime,
        delta: seq.delta,
        beta: seq.beta,
        beta_star: seq.beta_star,
        a_const,
        b,
        lambda,
        f_chain,
        d0,
        d0_series,
        linf_bound: d0.exp(),
    })
}

/// `F_1 = beta_1 * ln ||u||_{beta_1}` from a computed field.
pub fn f1_term(field: &Field, mesh: &Mesh, beta1: f64) -> Result<f64> {
    let norm = lp_norm(field, mesh, beta1)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "f1_term of the zero field is -infinity".into(),
        ));
    }
    Ok(beta1 * norm.ln())
}

/// Pointwise inequality for gradients of truncated powers:
/// `|grad(u min(|u|^s, L))|^ell` is bounded by
/// `c_ell { |grad u|^ell min(|u|^{ell s}, L^ell)
///          + (2s + s^2)^{ell/2} |grad u|^ell |u|^{ell s} chi_{|u|^s <= L} }`
/// with `c_ell = 1` for `ell <= 2` and `2^{ell/2 - 1}` otherwise. The left
/// side is evaluated by the exact chain rule; returns whether the
/// inequality holds within `1e-12 * scale`.
pub fn truncated_gradient_inequality(
    u: f64,
    grad_u: &[f64],
    s: f64,
    level: f64,
    ell: f64,
) -> Result<bool> {
    if !(s > 0.0 && level > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncated_gradient_inequality requires s > 0 and L > 0, got s = {s}, L = {level}"
        )));
    }
    if !(u.is_finite() && grad_u.iter().all(|g| g.is_finite()) && ell > 0.0 && ell.is_finite()) {
        return Err(Error::InvalidArgument("inputs must be finite with ell > 0".into()));
    }
    let grad_norm = grad_u.iter().map(|g| g * g).sum::<f64>().sqrt();
    let us = u.abs().powf(s);
    let c_ell = if ell <= 2.0 { 1.0 } else { 2f64.powf(ell / 2.0 - 1.0) };

    let lhs = if us <= level {
        ((1.0 + s) * us * grad_norm).powf(ell)
    } else {
        (level * grad_norm).powf(ell)
    };
    let grad_ell = grad_norm.powf(ell);
    let mut rhs = grad_ell * us.min(level).powf(ell);
    if us <= level {
        rhs += (2.0 * s + s * s).powf(ell / 2.0) * grad_ell * us.powf(ell);
    }
    rhs *= c_ell;
    let scale = rhs.abs().max(lhs.abs()).max(1.0);
    Ok(lhs <= rhs + 1e-12 * scale)
}

/// Smallest nodal threshold `k >= 0` such that
/// `2 S c_ell (1+s)^ell / phi(1) * (integral over {|a| >= k} of |a|^{N/ell})^{ell/N} <= 1/2`.
/// The tail integral uses lumped nodal weights, so the expression is a
/// nonincreasing step function of `k` jumping at the sorted nodal values;
/// the search walks those values. Falls back to `max|a|` (empty tail) when
/// even the largest value does not suffice.
pub fn cutoff_level(
    a: &Field,
    mesh: &Mesh,
    s: f64,
    ell: f64,
    dim_n: u32,
    phi_at_one: f64,
    s_embed: f64,
) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("cutoff_level requires s > 0, got {s}")));
    }
    let n = f64::from(dim_n);
    if !(ell > 0.0 && ell < n) {
        return Err(Error::InvalidArgument(format!(
            "cutoff_level requires 0 < ell < N, got ell = {ell}, N = {n}"
        )));
    }
    if !(phi_at_one > 0.0 && s_embed > 0.0) {
        return Err(Error::InvalidArgument(
            "cutoff_level requires positive phi(1) and embedding constant".into(),
        ));
    }
    a.matches(mesh)?;
    let n_nodes = mesh.n_nodes();
    let mut lumped = vec![0.0; n_nodes];
    for k in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(k);
        let w = mesh.element_measure(k) / nodes.len() as f64;
        for &i in nodes {
            lumped[i] += w;
        }
    }
    let c_ell = if ell <= 2.0 { 1.0 } else { 2f64.powf(ell / 2.0 - 1.0) };
    let prefactor = 2.0 * s_embed * c_ell * (1.0 + s).powf(ell) / phi_at_one;
    // sort nodes by |a| ascending and precompute suffix sums of w * |a|^{N/ell}
    let mut vals: Vec<(f64, f64)> = (0..n_nodes)
        .map(|i| (a.values()[i].abs(), lumped[i] * a.values()[i].abs().powf(n / ell)))
        .collect();
    vals.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut suffix = vec![0.0; n_nodes + 1];
    for i in (0..n_nodes).rev() {
        suffix[i] = suffix[i + 1] + vals[i].1;
    }
    let tail_at = |idx: usize| prefactor * suffix[idx].powf(ell / n);
    // tail with threshold k = vals[idx].0 uses the suffix starting at the
    // first index whose value >= that threshold (ties collapse leftward)
    let mut result = vals[n_nodes - 1].0;
    // k = 0 keeps the whole field
    if tail_at(0) <= 0.5 {
        return Ok(0.0);
    }
    let mut found = false;
    for idx in 0..n_nodes {
        if idx > 0 && vals[idx].0 == vals[idx - 1].0 {
            continue;
        }
        if tail_at(idx) <= 0.5 {
            result = vals[idx].0;
            found = true;
            break;
        }
    }
    if !found {
        result = vals[n_nodes - 1].0;
    }
    Ok(result)
}

/// Integrability ladder and its companions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderReport {
    /// `s_0 = 0` and `s_i + 1 = (s_{i-1} + 1) N/(N - ell)`.
    pub s_values: Vec<f64>,
    /// Least `i` with `ell (N/(N-ell))^i > q_target`.
    pub steps_needed: usize,
    /// The critical-iteration exponent `r`.
    pub r: f64,
    /// Tail cutoff level, when a coefficient field was supplied.
    pub k_cutoff: Option<f64>,
    /// Closed-form limit of the critical iteration, when run.
    pub product_bound: Option<f64>,
}

/// The geometric integrability ladder with its stopping index against a
/// target exponent.
pub fn subcritical_ladder(ell: f64, dim_n: u32, q_target: f64) -> Result<LadderReport> {
    let n = f64::from(dim_n);
    if !(ell > 1.0 && ell < n) {
        return Err(Error::InvalidArgument(format!(
            "subcritical_ladder requires 1 < ell < N, got ell = {ell}, N = {n}"
        )));
    }
    if !(q_target >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "q_target must be at least 1, got {q_target}"
        )));
    }
    let ratio = n / (n - ell);
    let mut s_values = vec![0.0];
    let mut i = 1usize;
    loop {
        s_values.push(ratio.powi(i as i32) - 1.0);
        if ell * ratio.powi(i as i32) > q_target {
            break;
        }
        i += 1;
        if i > 10_000 {
            return Err(Error::Internal("ladder failed to clear q_target".into()));
        }
    }
    Ok(LadderReport {
        s_values,
        steps_needed: i,
        r: critical_r(ell, dim_n)?,
        k_cutoff: None,
        product_bound: None,
    })
}

/// `r = ((ell*)^2 - ell ell* + ell^2)/(ell ell*)`, the exponent ratio of
/// the critical iteration; algebraically `r = 1 + (ell* - ell)^2/(ell ell*) > 1`.
pub fn critical_r(ell: f64, dim_n: u32) -> Result<f64> {
    let n = f64::from(dim_n);
    if !(ell > 1.0 && ell < n) {
        return Err(Error::InvalidArgument(format!(
            "critical_r requires 1 < ell < N, got ell = {ell}, N = {n}"
        )));
    }
    let ls = n * ell / (n - ell);
    Ok((ls * ls - ell * ls + ell * ell) / (ell * ls))
}

/// Closed-form limit of the iterated critical bound
/// `||u||_{ell* r^{j}} <= k^{1/r^j} (r^j)^{ell/r^j} max(prev, 1)`:
/// the limit is `k^{1/(r-1)} r^{ell r/(r-1)^2} max(base, 1)`. Returns the
/// limit together with the partial products at `j = 1..20`.
pub fn critical_linf_bound(
    k_const: f64,
    r: f64,
    ell: f64,
    base_norm: f64,
) -> Result<(f64, Vec<f64>)> {
    if !(r > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "critical_linf_bound requires r > 1, got {r}"
        )));
    }
    if !(k_const > 0.0 && base_norm >= 0.0) {
        return Err(Error::InvalidArgument(
            "critical_linf_bound requires k > 0 and base_norm >= 0".into(),
        ));
    }
    let base = base_norm.max(1.0);
    let rm1 = r - 1.0;
    let limit = k_const.powf(1.0 / rm1) * r.powf(ell * r / (rm1 * rm1)) * base;
    let mut partials = Vec::with_capacity(20);
    let mut sum_inv = 0.0;
    let mut sum_j_inv = 0.0;
    for j in 1..=20 {
        let rj = r.powi(j);
        sum_inv += 1.0 / rj;
        sum_j_inv += j as f64 / rj;
        partials.push(k_const.powf(sum_inv) * r.powf(ell * sum_j_inv) * base);
    }
    Ok((limit, partials))
}

/// Whether the nodal sup of a computed solution stays below a bound.
pub fn verify_bound(solution: &Field, bound: f64) -> bool {
    solution.sup_norm() <= bound
}
