//! Dirichlet solver for the Phi-Laplacian by convex energy minimization.
//!
//! The discrete problem minimizes `J(u) = integral of Phi(|grad u|) - f u`
//! over P1 fields vanishing on the boundary. The operator degenerates (or
//! blows up) where the gradient vanishes, so the solve replaces
//! `phi(|grad u|)` by `phi(sqrt(|grad u|^2 + eps^2))` and drives `eps`
//! through a geometric continuation, running a damped Newton iteration with
//! Armijo backtracking at each stage. Dirichlet values are imposed by
//! eliminating boundary unknowns; tangent systems are solved by banded
//! Cholesky.

use serde::{Deserialize, Serialize};

use crate::band::BandMatrix;
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::nfunction::NFunction;

/// Right-hand side data: a closed-form source or a nodal field.
#[derive(Clone, Debug)]
pub enum Source {
    Const(f64),
    /// `coeff * |x - center|^exponent` (radially symmetric about `center`).
    RadialPower {
        center: [f64; 2],
        exponent: f64,
        coeff: f64,
    },
    Nodal(Field),
}

impl Source {
    pub fn eval(&self, x: [f64; 2], node: usize) -> f64 {
        match self {
            Source::Const(c) => *c,
            Source::RadialPower { center, exponent, coeff } => {
                let d = (x[0] - center[0]).hypot(x[1] - center[1]);
                coeff * d.powf(*exponent)
            }
            Source::Nodal(f) => f.values()[node],
        }
    }
}

/// Growth class of a nonlinearity `g(x, u)`; the canonical representative
/// of each class (the bound itself) is used as the source when such
/// problems are solved.
#[derive(Clone, Debug)]
pub struct GrowthSpec {
    pub kind: GrowthKind,
    pub alpha: AlphaChoice,
}

#[derive(Clone, Debug)]
pub enum GrowthKind {
    /// `|g| <= a(x) (1 + |t|^{alpha-1})` with `a` a nodal field.
    SubA { a: Field },
    /// `|g| <= c (|t|^{alpha-1} + |t|^{r-1})`, `alpha < r < alpha*`.
    SubPower { c: f64, r: f64 },
    /// `|g| <= c (|t|^{alpha-1} + |t|^{alpha*-1})`.
    Critical { c: f64 },
}

/// Which growth index plays the role of `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaChoice {
    Ell,
    Em,
}

impl GrowthSpec {
    pub fn alpha_value(&self, nf: &NFunction) -> f64 {
        match self.alpha {
            AlphaChoice::Ell => nf.ell(),
            AlphaChoice::Em => nf.em(),
        }
    }

    pub fn alpha_star(&self, nf: &NFunction) -> f64 {
        let n = f64::from(nf.dim_n());
        let a = self.alpha_value(nf);
        n * a / (n - a)
    }

    pub fn validate(&self, nf: &NFunction, mesh: &Mesh) -> Result<()> {
        let alpha = self.alpha_value(nf);
        match &self.kind {
            GrowthKind::SubA { a } => a.matches(mesh)?,
            GrowthKind::SubPower { c, r } => {
                if !(*c > 0.0) {
                    return Err(Error::Validation(format!("growth constant must be positive, got {c}")));
                }
                let a_star = self.alpha_star(nf);
                if !(alpha < *r && *r < a_star) {
                    return Err(Error::Validation(format!(
                        "subcritical exponent must satisfy alpha < r < alpha*; got r = {r}, alpha = {alpha}, alpha* = {a_star}"
                    )));
                }
            }
            GrowthKind::Critical { c } => {
                if !(*c > 0.0) {
                    return Err(Error::Validation(format!("growth constant must be positive, got {c}")));
                }
            }
        }
        Ok(())
    }

    /// The representative source `g(x, u(x))` as a nodal field.
    pub fn source_field(&self, nf: &NFunction, mesh: &Mesh, u: &Field) -> Result<Field> {
        let alpha = self.alpha_value(nf);
        let vals: Vec<f64> = (0..mesh.n_nodes())
            .map(|i| {
                let t = u.values()[i].abs();
                match &self.kind {
                    GrowthKind::SubA { a } => a.values()[i] * (1.0 + t.powf(alpha - 1.0)),
                    GrowthKind::SubPower { c, r } => c * (t.powf(alpha - 1.0) + t.powf(r - 1.0)),
                    GrowthKind::Critical { c } => {
                        c * (t.powf(alpha - 1.0) + t.powf(self.alpha_star(nf) - 1.0))
                    }
                }
            })
            .collect();
        Field::new(mesh, vals)
    }
}

/// Right-hand side of a problem: explicit data or a growth class.
#[derive(Clone, Debug)]
pub enum Rhs {
    Data(Source),
    Growth(GrowthSpec),
}

/// A Dirichlet problem for the Phi-Laplacian on a mesh.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub mesh: Mesh,
    pub nf: NFunction,
    pub rhs: Rhs,
    /// Optional truncation level `n`; when set, the effective source is
    /// `min(f, n)`.
    pub truncation_level: Option<u32>,
}

impl ProblemSpec {
    pub fn new(mesh: Mesh, nf: NFunction, rhs: Rhs) -> ProblemSpec {
        ProblemSpec {
            mesh,
            nf,
            rhs,
            truncation_level: None,
        }
    }

    /// Materialize the data source nodally, truncated at `level` when given.
    pub fn data_field(&self, level: Option<f64>) -> Result<Field> {
        let src = match &self.rhs {
            Rhs::Data(s) => s,
            Rhs::Growth(_) => {
                return Err(Error::InvalidArgument(
                    "problem has a growth right-hand side, not data".into(),
                ))
            }
        };
        let vals: Vec<f64> = (0..self.mesh.n_nodes())
            .map(|i| {
                let raw = src.eval(self.mesh.node(i), i);
                match level {
                    Some(n) => raw.min(n),
                    None => raw,
                }
            })
            .collect();
        Field::new(&self.mesh, vals).map_err(|_| {
            Error::Precondition("source is unbounded on mesh nodes; solve requires bounded f (truncate first)".into())
        })
    }

    /// The effective right-hand side used by a plain solve.
    pub fn effective_rhs(&self) -> Result<Field> {
        self.data_field(self.truncation_level.map(f64::from))
    }
}

/// Solver options.
#[derive(Clone, Copy, Debug)]
pub struct SolveOpts {
    /// Residual tolerance; defaults to 1e-9 in 1D and 1e-8 in 2D.
    pub tol: Option<f64>,
    pub max_newton_per_stage: usize,
    pub armijo_slope: f64,
    pub max_halvings: usize,
    pub eps_start: f64,
    pub eps_final: f64,
    pub eps_factor: f64,
}

impl Default for SolveOpts {
    fn default() -> Self {
        SolveOpts {
            tol: None,
            max_newton_per_stage: 200,
            armijo_slope: 1e-4,
            max_halvings: 60,
            eps_start: 1e-2,
            eps_final: 1e-10,
            eps_factor: 10.0,
        }
    }
}

impl SolveOpts {
    pub fn with_tol(tol: f64) -> SolveOpts {
        SolveOpts {
            tol: Some(tol),
            ..SolveOpts::default()
        }
    }

    fn resolved_tol(&self, mesh: &Mesh) -> f64 {
        self.tol.unwrap_or(if mesh.dim() == 1 { 1e-9 } else { 1e-8 })
    }
}

/// Convergence diagnostics of a solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub newton_iterations: usize,
    pub continuation_steps: usize,
    pub final_energy: f64,
    pub residual_dual_norm: f64,
    pub sup_norm: f64,
    pub converged: bool,
    /// Regularized energy after each accepted step, one list per
    /// continuation stage (monotone within a stage by the Armijo rule).
    pub energy_trace: Vec<Vec<f64>>,
    /// Scaled residual norm per Newton iterate, one list per stage.
    pub residual_trace: Vec<Vec<f64>>,
}

struct Dofs {
    interior: Vec<usize>,
    node_to_int: Vec<usize>,
    bw: usize,
}

const NO_DOF: usize = usize::MAX;

fn build_dofs(mesh: &Mesh) -> Dofs {
    let interior = mesh.interior_nodes();
    let mut node_to_int = vec![NO_DOF; mesh.n_nodes()];
    for (d, &n) in interior.iter().enumerate() {
        node_to_int[n] = d;
    }
    let mut bw = 0usize;
    for k in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(k);
        for &a in nodes {
            for &b in nodes {
                let (da, db) = (node_to_int[a], node_to_int[b]);
                if da != NO_DOF && db != NO_DOF {
                    bw = bw.max(da.abs_diff(db));
                }
            }
        }
    }
    Dofs {
        interior,
        node_to_int,
        bw,
    }
}

/// `integral of f v_i` for each interior basis function.
fn load_vector(mesh: &Mesh, f: &Field, dofs: &Dofs) -> Vec<f64> {
    let mut load = vec![0.0; dofs.interior.len()];
    for k in 0..mesh.n_elements() {
        let nodes = mesh.element_nodes(k);
        mesh.for_each_quad_point(k, |bary, w| {
            let fq = f.at(mesh, k, bary);
            for (loc, &n) in nodes.iter().enumerate() {
                let d = dofs.node_to_int[n];
                if d != NO_DOF {
                    load[d] += w * fq * bary[loc];
                }
            }
        });
    }
    load
}

/// `integral of f u` by element quadrature (exact for P1 times P1).
fn source_dot(mesh: &Mesh, f: &Field, u: &Field) -> f64 {
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        mesh.for_each_quad_point(k, |bary, w| {
            total += w * f.at(mesh, k, bary) * u.at(mesh, k, bary);
        });
    }
    total
}

/// Regularized energy `sum |K| Phi(sqrt(|grad u|^2 + eps^2)) - integral f u`.
fn energy_value(mesh: &Mesh, nf: &NFunction, f: &Field, u: &Field, eps: f64) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..mesh.n_elements() {
        let g = mesh.element_gradient(k, u.values());
        let t = g[0].hypot(g[1]).hypot(eps);
        total += mesh.element_measure(k) * nf.big_phi(t)?;
    }
    Ok(total - source_dot(mesh, f, u))
}

/// Gradient of the regularized energy with respect to the interior nodal
/// values: `r_i = sum_K |K| phi(g_K) grad u . grad v_i - integral f v_i`.
fn energy_gradient_interior(
    mesh: &Mesh,
    nf: &NFunction,
    u: &Field,
    eps: f64,
    dofs: &Dofs,
    load: &[f64],
) -> Vec<f64> {
    let mut r: Vec<f64> = load.iter().map(|&l| -l).collect();
    for k in 0..mesh.n_elements() {
        let grad = mesh.element_gradient(k, u.values());
        let t = grad[0].hypot(grad[1]);
        let g = t.hypot(eps);
        // phi(g) * grad u, written through Phi' to stay finite as g -> 0
        let w = if g == 0.0 { 0.0 } else { nf.big_phi_prime(g) / g };
        let measure = mesh.element_measure(k);
        let basis = mesh.basis_gradients(k);
        for (loc, &n) in mesh.element_nodes(k).iter().enumerate() {
            let d = dofs.node_to_int[n];
            if d != NO_DOF {
                let gb = basis[loc];
                r[d] += measure * w * (grad[0] * gb[0] + grad[1] * gb[1]);
            }
        }
    }
    r
}

/// Tangent matrix of the regularized energy. Returns the banded matrix and
/// whether every element tangent was positive definite.
fn energy_hessian_interior(
    mesh: &Mesh,
    nf: &NFunction,
    u: &Field,
    eps: f64,
    dofs: &Dofs,
) -> (BandMatrix, bool) {
    let n = dofs.interior.len();
    let mut h = BandMatrix::zeros(n, dofs.bw);
    let mut elementwise_spd = true;
    for k in 0..mesh.n_elements() {
        let grad = mesh.element_gradient(k, u.values());
        let t = grad[0].hypot(grad[1]);
        let g = t.hypot(eps);
        let w = nf.phi(g);
        let wp = nf.dphi(g) / g;
        if !(w > 0.0 && w + wp * t * t > 0.0) {
            elementwise_spd = false;
        }
        let measure = mesh.element_measure(k);
        let basis = mesh.basis_gradients(k);
        let nodes = mesh.element_nodes(k);
        for (li, &ni) in nodes.iter().enumerate() {
            let di = dofs.node_to_int[ni];
            if di == NO_DOF {
                continue;
            }
            let gi = basis[li];
            let gu_i = grad[0] * gi[0] + grad[1] * gi[1];
            for (lj, &nj) in nodes.iter().enumerate() {
                let dj = dofs.node_to_int[nj];
                if dj == NO_DOF || dj > di {
                    continue;
                }
                let gj = basis[lj];
                let gu_j = grad[0] * gj[0] + grad[1] * gj[1];
                let v = measure * (w * (gi[0] * gj[0] + gi[1] * gj[1]) + wp * gu_i * gu_j);
                h.add(di, dj, v);
            }
        }
    }
    (h, elementwise_spd)
}

fn scaled_norm(r: &[f64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

fn require_boundary_zero(mesh: &Mesh, field: &Field) -> Result<()> {
    field.matches(mesh)?;
    if !field.is_boundary_zero(mesh) {
        return Err(Error::Precondition(
            "field must vanish on the boundary nodes".into(),
        ));
    }
    Ok(())
}

/// The convex energy `integral of Phi(|grad u|) - integral of f u` of a
/// boundary-zero field.
pub fn energy(problem: &ProblemSpec, field: &Field) -> Result<f64> {
    require_boundary_zero(&problem.mesh, field)?;
    let f = problem.effective_rhs()?;
    energy_value(&problem.mesh, &problem.nf, &f, field, 0.0)
}

/// Assembled gradient of the (unregularized) energy over interior nodes.
pub fn energy_gradient(problem: &ProblemSpec, field: &Field) -> Result<Vec<f64>> {
    require_boundary_zero(&problem.mesh, field)?;
    let f = problem.effective_rhs()?;
    let dofs = build_dofs(&problem.mesh);
    let load = load_vector(&problem.mesh, &f, &dofs);
    Ok(energy_gradient_interior(
        &problem.mesh,
        &problem.nf,
        field,
        0.0,
        &dofs,
        &load,
    ))
}

/// Scaled Euclidean norm of the weak residual
/// `integral of phi(|grad u|) grad u . grad v_i - f v_i` over interior
/// basis functions, divided by the square root of the interior node count.
pub fn weak_residual_norm(problem: &ProblemSpec, field: &Field) -> Result<f64> {
    Ok(scaled_norm(&energy_gradient(problem, field)?))
}

/// True when every interior nodal value exceeds `tol`.
pub fn positivity_check(mesh: &Mesh, field: &Field, tol: f64) -> Result<bool> {
    require_boundary_zero(mesh, field)?;
    Ok(mesh
        .interior_nodes()
        .iter()
        .all(|&i| field.values()[i] > tol))
}

/// Nodal monotonicity of a solution chain: each consecutive pair satisfies
/// `u_k <= u_{k+1} + tol`, the first entry is nonnegative up to `tol` and
/// strictly positive at interior nodes.
pub fn monotonicity_check(mesh: &Mesh, solutions: &[Field], tol: f64) -> Result<bool> {
    if solutions.is_empty() {
        return Err(Error::InvalidArgument("empty solution chain".into()));
    }
    for s in solutions {
        s.matches(mesh)?;
    }
    let first = &solutions[0];
    if first.values().iter().any(|&v| v < -tol) {
        return Ok(false);
    }
    if !mesh
        .interior_nodes()
        .iter()
        .all(|&i| first.values()[i] > 0.0)
    {
        return Ok(false);
    }
    for w in solutions.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for i in 0..a.len() {
            if a.values()[i] > b.values()[i] + tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn check_solvable(nf: &NFunction) -> Result<()> {
    if !(nf.ell() > 1.0) {
        return Err(Error::Precondition(format!(
            "solver requires ell > 1; this N-function has ell = {}",
            nf.ell()
        )));
    }
    Ok(())
}

/// Minimize the energy over boundary-zero P1 fields.
pub fn solve_dirichlet(problem: &ProblemSpec, opts: &SolveOpts) -> Result<(Field, SolveReport)> {
    check_solvable(&problem.nf)?;
    let f = problem.effective_rhs()?;
    solve_data(&problem.mesh, &problem.nf, &f, opts)
}

/// Core solve with an explicit nodal right-hand side.
pub fn solve_data(
    mesh: &Mesh,
    nf: &NFunction,
    f: &Field,
    opts: &SolveOpts,
) -> Result<(Field, SolveReport)> {
    check_solvable(nf)?;
    f.matches(mesh)?;
    let tol = opts.resolved_tol(mesh);
    let dofs = build_dofs(mesh);
    let load = load_vector(mesh, f, &dofs);

    let mut u = Field::zeros(mesh);
    let mut newton_total = 0usize;
    let mut energy_trace: Vec<Vec<f64>> = Vec::new();
    let mut residual_trace: Vec<Vec<f64>> = Vec::new();
    let mut last_residual = f64::INFINITY;

    // Geometric continuation eps_start -> eps_final.
    let mut stages = Vec::new();
    let mut eps = opts.eps_start;
    while eps > opts.eps_final * (1.0 + 1e-12) {
        stages.push(eps);
        eps /= opts.eps_factor;
    }
    stages.push(opts.eps_final);

    let partial = |u: &Field,
                   newton_total: usize,
                   stages_run: usize,
                   last_residual: f64,
                   energy_trace: &[Vec<f64>],
                   residual_trace: &[Vec<f64>]|
     -> SolveReport {
        SolveReport {
            newton_iterations: newton_total,
            continuation_steps: stages_run,
            final_energy: f64::NAN,
            residual_dual_norm: last_residual,
            sup_norm: u.sup_norm(),
            converged: false,
            energy_trace: energy_trace.to_vec(),
            residual_trace: residual_trace.to_vec(),
        }
    };

    for (stage_idx, &eps) in stages.iter().enumerate() {
        let mut stage_energies = Vec::new();
        let mut stage_residuals = Vec::new();
        let mut j_cur = energy_value(mesh, nf, f, &u, eps)?;
        stage_energies.push(j_cur);
        let mut converged_stage = false;
        for _ in 0..opts.max_newton_per_stage {
            let r = energy_gradient_interior(mesh, nf, &u, eps, &dofs, &load);
            let rn = scaled_norm(&r);
            stage_residuals.push(rn);
            last_residual = rn;
            if rn <= tol {
                converged_stage = true;
                break;
            }
            let (h, elementwise_spd) = energy_hessian_interior(mesh, nf, &u, eps, &dofs);
            let mut dir: Vec<f64>;
            if elementwise_spd {
                let chol = h.cholesky().map_err(|e| {
                    Error::Internal(format!(
                        "regularized tangent system indefinite at stage eps = {eps}: {e}"
                    ))
                })?;
                let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
                dir = chol.solve(&neg_r);
            } else {
                dir = r.iter().map(|x| -x).collect();
            }
            let mut slope: f64 = r.iter().zip(dir.iter()).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                // fall back to steepest descent
                dir = r.iter().map(|x| -x).collect();
                slope = -r.iter().map(|x| x * x).sum::<f64>();
            }

            let mut alpha = 1.0;
            let mut accepted = false;
            let mut u_trial = u.clone();
            for halving in 0..=opts.max_halvings {
                for (d, &node) in dofs.interior.iter().enumerate() {
                    u_trial.values_mut()[node] = u.values()[node] + alpha * dir[d];
                }
                let j_trial = energy_value(mesh, nf, f, &u_trial, eps)?;
                if j_trial <= j_cur + opts.armijo_slope * alpha * slope {
                    u = u_trial.clone();
                    j_cur = j_trial;
                    accepted = true;
                    break;
                }
                // Near the minimizer the predicted energy decrease drops
                // below the f64 resolution of the energy itself while the
                // gradient still carries information; accept a full Newton
                // step that substantially reduces the residual norm.
                if halving == 0 {
                    let r_trial = energy_gradient_interior(mesh, nf, &u_trial, eps, &dofs, &load);
                    if scaled_norm(&r_trial) < 0.5 * rn
                        && j_trial <= j_cur + (j_cur.abs() + 1.0) * 1e-14
                    {
                        u = u_trial.clone();
                        j_cur = j_trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(Error::NonConvergence {
                    message: format!(
                        "line search failed after {} halvings at stage eps = {eps}",
                        opts.max_halvings
                    ),
                    report: Some(partial(
                        &u,
                        newton_total,
                        stage_idx + 1,
                        last_residual,
                        &energy_trace,
                        &residual_trace,
                    )),
                });
            }
            newton_total += 1;
            stage_energies.push(j_cur);
        }
        energy_trace.push(stage_energies);
        residual_trace.push(stage_residuals);
        if !converged_stage {
            return Err(Error::NonConvergence {
                message: format!(
                    "Newton did not reach tol = {tol} within {} iterations at stage eps = {eps}",
                    opts.max_newton_per_stage
                ),
                report: Some(partial(
                    &u,
                    newton_total,
                    stage_idx + 1,
                    last_residual,
                    &energy_trace,
                    &residual_trace,
                )),
            });
        }
    }

    let final_energy = energy_value(mesh, nf, f, &u, 0.0)?;
    let report = SolveReport {
        newton_iterations: newton_total,
        continuation_steps: stages.len(),
        final_energy,
        residual_dual_norm: last_residual,
        sup_norm: u.sup_norm(),
        converged: true,
        energy_trace,
        residual_trace,
    };
    Ok((u, report))
}

/// Solve the auxiliary problems with sources `min(f, n)` for each level in
/// ascending `n_list`; the discrete comparison principle makes the returned
/// chain nodally nondecreasing.
pub fn truncated_sequence(
    problem: &ProblemSpec,
    n_list: &[u32],
    opts: &SolveOpts,
) -> Result<Vec<(Field, SolveReport)>> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("n_list must be nonempty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n_list must be strictly ascending".into()));
    }
    let mut results = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let f_n = problem.data_field(Some(f64::from(n)))?;
        if f_n.values().iter().any(|&v| v < 0.0) {
            return Err(Error::Precondition(
                "truncated_sequence requires f >= 0 nodal-wise".into(),
            ));
        }
        if f_n.values().iter().all(|&v| v == 0.0) {
            return Err(Error::Precondition(
                "truncated_sequence requires f not identically zero".into(),
            ));
        }
        results.push(solve_data(&problem.mesh, &problem.nf, &f_n, opts)?);
    }
    Ok(results)
}

/// Diagnostics of a damped Picard iteration on a growth-class source.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthReport {
    pub picard_iterations: usize,
    pub converged: bool,
    /// Sup-norm difference between consecutive Picard iterates.
    pub diff_trace: Vec<f64>,
    pub last_solve: SolveReport,
}

/// Solve a growth-class problem by freezing the source at the current
/// iterate: `u_{k+1} = (1 - omega) u_k + omega * solve(f = g(x, u_k))` with
/// damping `omega = 0.5`, at most 50 outer iterations. The first source is
/// frozen at `u = 1`.
pub fn solve_growth(problem: &ProblemSpec, opts: &SolveOpts) -> Result<(Field, GrowthReport)> {
    let growth = match &problem.rhs {
        Rhs::Growth(g) => g,
        Rhs::Data(_) => {
            return Err(Error::InvalidArgument(
                "problem has a data right-hand side, not a growth class".into(),
            ))
        }
    };
    check_solvable(&problem.nf)?;
    growth.validate(&problem.nf, &problem.mesh)?;
    let mesh = &problem.mesh;
    let ones = Field::from_fn(mesh, |_| 1.0)?;
    let f0 = growth.source_field(&problem.nf, mesh, &ones)?;
    let (mut u, mut last_solve) = solve_data(mesh, &problem.nf, &f0, opts)?;

    let damping = 0.5;
    let max_picard = 50;
    let mut diff_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_picard {
        iterations += 1;
        let f_k = growth.source_field(&problem.nf, mesh, &u)?;
        let (u_hat, rep) = solve_data(mesh, &problem.nf, &f_k, opts)?;
        last_solve = rep;
        let mut diff: f64 = 0.0;
        let mut next = u.clone();
        for i in 0..u.len() {
            let v = (1.0 - damping) * u.values()[i] + damping * u_hat.values()[i];
            diff = diff.max((v - u.values()[i]).abs());
            next.values_mut()[i] = v;
        }
        u = next;
        diff_trace.push(diff);
        if diff <= 1e-8 * u.sup_norm().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            message: format!("Picard iteration did not settle within {max_picard} steps"),
            report: Some(last_solve),
        });
    }
    Ok((
        u,
        GrowthReport {
            picard_iterations: iterations,
            converged,
            diff_trace,
            last_solve,
        },
    ))
}

/// Closed-form solution of the 1D p-Laplacian problem with constant source
/// 1 on (0, 1): `u(x) = ((p-1)/p) * ((1/2)^{p'} - |x - 1/2|^{p'})` with
/// `p' = p/(p-1)`. Used as a test oracle.
pub fn p_laplacian_1d_exact(p: f64, x: f64) -> f64 {
    let pp = p / (p - 1.0);
    (p - 1.0) / p * (0.5f64.powf(pp) - (x - 0.5).abs().powf(pp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_problem(n: usize) -> ProblemSpec {
        ProblemSpec::new(
            Mesh::interval(0.0, 1.0, n).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        )
    }

    #[test]
    fn energy_of_zero_field() {
        let p = poisson_problem(32);
        assert_eq!(energy(&p, &Field::zeros(&p.mesh)).unwrap(), 0.0);
    }

    #[test]
    fn energy_of_parabola() {
        // u = x(1-x)/2 gives energy 1/24 - 1/12 = -1/24 up to mesh error
        let p = poisson_problem(256);
        let u = Field::from_fn(&p.mesh, |q| q[0] * (1.0 - q[0]) / 2.0).unwrap();
        let e = energy(&p, &u).unwrap();
        assert!((e + 1.0 / 24.0).abs() < 1e-5, "energy = {e}");
    }

    #[test]
    fn energy_requires_boundary_zero() {
        let p = poisson_problem(16);
        let u = Field::from_fn(&p.mesh, |_| 1.0).unwrap();
        assert!(matches!(energy(&p, &u), Err(Error::Precondition(_))));
    }

    #[test]
    fn poisson_sup_norm() {
        let p = poisson_problem(256);
        let (u, rep) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        assert!(rep.converged);
        assert!(
            (rep.sup_norm - 0.125).abs() < 1e-3,
            "sup = {}",
            rep.sup_norm
        );
        // nodal exactness of the 1D Laplacian with exact load integration
        let mid = u.values()[128];
        assert!((mid - 0.125).abs() < 1e-9, "u(1/2) = {mid}");
    }

    #[test]
    fn p_laplacian_sup_norm() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 512).unwrap(),
            NFunction::power(3.0, 4).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        );
        let (_, rep) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        let exact = p_laplacian_1d_exact(3.0, 0.5);
        assert!(
            (rep.sup_norm - exact).abs() < 2e-3,
            "sup = {} vs {exact}",
            rep.sup_norm
        );
    }

    #[test]
    fn zero_source_gives_zero_exactly() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 64).unwrap(),
            NFunction::power(2.5, 4).unwrap(),
            Rhs::Data(Source::Const(0.0)),
        );
        let (u, rep) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.newton_iterations, 0);
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_trace_monotone_within_stages() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 128).unwrap(),
            NFunction::power(3.0, 4).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        );
        let (_, rep) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        for stage in &rep.energy_trace {
            for w in stage.windows(2) {
                assert!(w[1] <= w[0] + 1e-14, "energy increased within a stage");
            }
        }
    }

    #[test]
    fn minimizer_beats_perturbations() {
        let p = poisson_problem(64);
        let (u, _) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        let e0 = energy(&p, &u).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let mut v = u.clone();
            for &i in &p.mesh.interior_nodes() {
                v.values_mut()[i] += 1e-3 * rng.gen_range(-1.0..1.0);
            }
            assert!(energy(&p, &v).unwrap() >= e0 - 1e-14);
        }
    }

    #[test]
    fn weak_residual_of_minimizer_small() {
        let p = poisson_problem(128);
        let opts = SolveOpts::default();
        let (u, _) = solve_dirichlet(&p, &opts).unwrap();
        let r = weak_residual_norm(&p, &u).unwrap();
        assert!(r <= 1e-9, "weak residual {r}");
    }

    #[test]
    fn weak_residual_of_zero_is_load_norm() {
        let p = poisson_problem(64);
        let u = Field::zeros(&p.mesh);
        let r = weak_residual_norm(&p, &u).unwrap();
        // load_i = h for interior hats; scaled norm = h
        assert!((r - 1.0 / 64.0).abs() < 1e-12, "r = {r}");
    }

    #[test]
    fn truncation_inactive_is_identity() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 64).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::Const(0.5)),
        );
        let opts = SolveOpts::default();
        let full = solve_dirichlet(&p, &opts).unwrap().0;
        let chain = truncated_sequence(&p, &[1, 2], &opts).unwrap();
        for (f, _) in &chain {
            for i in 0..f.len() {
                assert!((f.values()[i] - full.values()[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_at_one_equals_unit_source() {
        let p5 = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 64).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::Const(5.0)),
        );
        let p1 = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 64).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        );
        let opts = SolveOpts::default();
        let truncated = &truncated_sequence(&p5, &[1], &opts).unwrap()[0].0;
        let unit = &solve_dirichlet(&p1, &opts).unwrap().0;
        for i in 0..truncated.len() {
            assert!((truncated.values()[i] - unit.values()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_chain_for_unbounded_source() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 256).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::RadialPower {
                center: [0.0, 0.0],
                exponent: -0.25,
                coeff: 1.0,
            }),
        );
        let opts = SolveOpts::with_tol(1e-12);
        let chain = truncated_sequence(&p, &[1, 2, 4, 8, 16], &opts).unwrap();
        let fields: Vec<Field> = chain.into_iter().map(|(f, _)| f).collect();
        let scale = fields.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
        assert!(monotonicity_check(&p.mesh, &fields, 1e-8 * scale).unwrap());
    }

    #[test]
    fn monotonicity_detects_swap() {
        let p = poisson_problem(32);
        let u = solve_dirichlet(&p, &SolveOpts::default()).unwrap().0;
        let mut bigger = u.clone();
        for v in bigger.values_mut() {
            *v *= 2.0;
        }
        let ok = monotonicity_check(&p.mesh, &[u.clone(), bigger.clone()], 1e-10).unwrap();
        assert!(ok);
        let swapped = monotonicity_check(&p.mesh, &[bigger, u], 1e-10).unwrap();
        assert!(!swapped);
    }

    #[test]
    fn monotonicity_constant_chain() {
        let p = poisson_problem(32);
        let u = solve_dirichlet(&p, &SolveOpts::default()).unwrap().0;
        assert!(monotonicity_check(&p.mesh, &[u.clone(), u.clone(), u], 1e-12).unwrap());
    }

    #[test]
    fn positivity_of_poisson_solution() {
        let p = poisson_problem(64);
        let (u, _) = solve_dirichlet(&p, &SolveOpts::default()).unwrap();
        assert!(positivity_check(&p.mesh, &u, 1e-6).unwrap());
        assert!(!positivity_check(&p.mesh, &Field::zeros(&p.mesh), 0.0).unwrap());
        let mut flipped = u.clone();
        for v in flipped.values_mut() {
            *v = -*v;
        }
        assert!(!positivity_check(&p.mesh, &flipped, 0.0).unwrap());
    }

    #[test]
    fn discrete_comparison_principle() {
        use rand::{Rng, SeedableRng};
        let mesh = Mesh::interval(0.0, 1.0, 48).unwrap();
        let nf = NFunction::power(2.5, 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let opts = SolveOpts::with_tol(1e-11);
        for _ in 0..20 {
            let f_lo =
                Field::new(&mesh, (0..mesh.n_nodes()).map(|_| rng.gen_range(0.0..2.0)).collect())
                    .unwrap();
            let f_hi = Field::new(
                &mesh,
                f_lo.values().iter().map(|&v| v + rng.gen_range(0.0..1.0)).collect(),
            )
            .unwrap();
            let u_lo = solve_data(&mesh, &nf, &f_lo, &opts).unwrap().0;
            let u_hi = solve_data(&mesh, &nf, &f_hi, &opts).unwrap().0;
            let scale = u_hi.sup_norm().max(1e-12);
            for i in 0..u_lo.len() {
                assert!(u_lo.values()[i] <= u_hi.values()[i] + 1e-7 * scale);
            }
        }
    }

    #[test]
    fn symmetric_problem_symmetric_solution() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 256).unwrap(),
            NFunction::power(3.0, 4).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        );
        let (u, _) = solve_dirichlet(&p, &SolveOpts::with_tol(1e-11)).unwrap();
        let n = u.len();
        for i in 0..n {
            let d = (u.values()[i] - u.values()[n - 1 - i]).abs();
            assert!(d <= 1e-10, "asymmetry {d} at node {i}");
        }
    }

    #[test]
    fn continuation_tail_insensitive() {
        let base = SolveOpts::default();
        let mut halved = base;
        halved.eps_final = 5e-11;
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 256).unwrap(),
            NFunction::power(3.0, 4).unwrap(),
            Rhs::Data(Source::Const(1.0)),
        );
        let a = solve_dirichlet(&p, &base).unwrap().1.sup_norm;
        let b = solve_dirichlet(&p, &halved).unwrap().1.sup_norm;
        assert!((a - b).abs() < 1e-6, "eps sensitivity {}", (a - b).abs());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mesh = Mesh::rectangle(1.0, 1.0, 5, 4).unwrap();
        let nf = NFunction::power(2.6, 4).unwrap();
        let p = ProblemSpec::new(mesh, nf, Rhs::Data(Source::Const(1.0)));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut u = Field::zeros(&p.mesh);
        for &i in &p.mesh.interior_nodes() {
            u.values_mut()[i] = rng.gen_range(-1.0..1.0);
        }
        let g = energy_gradient(&p, &u).unwrap();
        let interior = p.mesh.interior_nodes();
        let mut g_fd = vec![0.0; interior.len()];
        let h = 1e-6;
        for (d, &i) in interior.iter().enumerate() {
            let mut up = u.clone();
            up.values_mut()[i] += h;
            let mut dn = u.clone();
            dn.values_mut()[i] -= h;
            g_fd[d] = (energy(&p, &up).unwrap() - energy(&p, &dn).unwrap()) / (2.0 * h);
        }
        let num: f64 = g
            .iter()
            .zip(g_fd.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num <= 1e-5 * den, "relative gradient error {}", num / den);
    }

    #[test]
    fn growth_solve_suba() {
        let mesh = Mesh::interval(0.0, 1.0, 64).unwrap();
        let nf = NFunction::power(2.0, 3).unwrap();
        let a = Field::from_fn(&mesh, |_| 0.5).unwrap();
        let p = ProblemSpec::new(
            mesh,
            nf,
            Rhs::Growth(GrowthSpec {
                kind: GrowthKind::SubA { a },
                alpha: AlphaChoice::Ell,
            }),
        );
        let (u, rep) = solve_growth(&p, &SolveOpts::default()).unwrap();
        assert!(rep.converged);
        // the fixed point satisfies the frozen-source equation
        let g = match &p.rhs {
            Rhs::Growth(g) => g,
            _ => unreachable!(),
        };
        let f_star = g.source_field(&p.nf, &p.mesh, &u).unwrap();
        let frozen = ProblemSpec::new(p.mesh.clone(), p.nf.clone(), Rhs::Data(Source::Nodal(f_star)));
        let r = weak_residual_norm(&frozen, &u).unwrap();
        assert!(r < 1e-6, "fixed-point residual {r}");
    }

    #[test]
    fn growth_validation() {
        let mesh = Mesh::interval(0.0, 1.0, 16).unwrap();
        let nf = NFunction::power(2.0, 3).unwrap();
        // r outside (alpha, alpha*): alpha = 2, alpha* = 6
        let bad = GrowthSpec {
            kind: GrowthKind::SubPower { c: 1.0, r: 7.0 },
            alpha: AlphaChoice::Ell,
        };
        assert!(bad.validate(&nf, &mesh).is_err());
        let good = GrowthSpec {
            kind: GrowthKind::SubPower { c: 1.0, r: 3.0 },
            alpha: AlphaChoice::Ell,
        };
        assert!(good.validate(&nf, &mesh).is_ok());
    }

    #[test]
    fn unbounded_source_requires_truncation() {
        let p = ProblemSpec::new(
            Mesh::interval(0.0, 1.0, 32).unwrap(),
            NFunction::power(2.0, 3).unwrap(),
            Rhs::Data(Source::RadialPower {
                center: [0.0, 0.0],
                exponent: -0.5,
                coeff: 1.0,
            }),
        );
        assert!(solve_dirichlet(&p, &SolveOpts::default()).is_err());
        let mut truncated = p;
        truncated.truncation_level = Some(3);
        assert!(solve_dirichlet(&truncated, &SolveOpts::default()).is_ok());
    }
}
