//! Numerical laboratory for Dirichlet problems driven by the
//! Phi-Laplacian `div(phi(|grad u|) grad u)` in the Orlicz-Sobolev
//! setting.
//!
//! The crate has four layers:
//!
//! - [`nfunction`]: N-functions `Phi(t) = integral of s*phi(s)` built from
//!   generator families or tabulations, with the scalar calculus around
//!   them (conjugates, Sobolev conjugate, growth indices, doubling
//!   constants, equivalence estimation).
//! - [`mesh`] and [`norms`]: P1 finite elements on intervals and
//!   rectangles, modulars, Luxemburg norms, and the trace-zero norm
//!   inequality.
//! - [`solver`]: the convex-energy Dirichlet solve with
//!   eps-regularized damped Newton continuation, monotone truncation
//!   chains, and weak-residual diagnostics.
//! - [`moser`]: the explicit constant chains behind the a-priori
//!   L-infinity bounds, the integrability ladders, and their pointwise
//!   companion inequalities.
//!
//! The `harness` module adds config parsing, report persistence, and the
//! runnable verification suite behind the `philab` binary; `examples/`
//! shows one end-to-end program per capability.

pub mod band;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod moser;
pub mod nfunction;
pub mod norms;
pub mod quad;
pub mod roots;
pub mod solver;
pub mod suite;

pub use error::{Error, Result};
pub use mesh::{Field, Mesh};
pub use nfunction::{
    default_grid, equivalence_check, log_grid, power_equivalence, ConditionReport,
    EquivalenceReport, GeneratorTable, NFunction, NFunctionFamily,
};
pub use norms::{
    grad_luxemburg_norm, luxemburg_norm, lp_norm, modular, norm_report, poincare_check, NormReport,
};
pub use solver::{
    energy, energy_gradient, monotonicity_check, positivity_check, solve_dirichlet, solve_growth,
    truncated_sequence, weak_residual_norm, AlphaChoice, GrowthKind, GrowthSpec, ProblemSpec, Rhs,
    SolveOpts, SolveReport, Source,
};
pub use moser::{
    beta_sequence, critical_linf_bound, critical_r, cutoff_level, f1_term, homog_apriori_bound,
    homog_apriori_bound_m, subcritical_ladder, talenti_constant, truncated_gradient_inequality,
    verify_bound, BetaSequence, LadderReport, MoserInputs, MoserReport, PowerEquivalence,
};
