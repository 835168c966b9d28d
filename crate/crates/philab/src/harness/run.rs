//! Run pipelines: dispatch a parsed config, persist reports.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::harness::config::{RunConfig, RunKind};
use crate::harness::report::{read_report, write_meta, write_plotdata, write_report};
use crate::mesh::Field;
use crate::moser::{
    f1_term, homog_apriori_bound, homog_apriori_bound_m, talenti_constant, verify_bound,
    MoserInputs, PowerEquivalence,
};
use crate::nfunction::{power_equivalence, NFunction};
use crate::norms::{lp_norm, norm_report};
use crate::solver::{
    monotonicity_check, positivity_check, solve_dirichlet, truncated_sequence, weak_residual_norm,
    ProblemSpec, Rhs, SolveReport,
};
use crate::suite;

/// An error tagged with the subsystem it came from, for the
/// machine-readable error report.
#[derive(Debug)]
pub struct ModuleError {
    pub module: &'static str,
    pub error: Error,
}

impl ModuleError {
    pub fn code(&self) -> String {
        format!("{}/{}", self.module, self.error.code())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "code": self.code(),
                "message": self.error.to_string(),
            }
        })
    }
}

impl std::fmt::Display for ModuleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}", self.code(), self.error)
    }
}

pub type RunResult<T> = std::result::Result<T, ModuleError>;

fn stage<T>(module: &'static str, r: Result<T>) -> RunResult<T> {
    r.map_err(|error| ModuleError { module, error })
}

/// Execute a run and persist `report.json`, `plotdata.csv`, field CSVs and
/// `meta.json` under `out_dir`. Returns the report value.
pub fn run(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let started = std::time::Instant::now();
    let report = match config.kind {
        RunKind::CheckNFunction => run_check_nfunction(config, out_dir)?,
        RunKind::Solve => run_solve(config, out_dir)?,
        RunKind::TruncateSequence => run_truncate(config, out_dir)?,
        RunKind::MoserBound => run_moser(config, out_dir)?,
        RunKind::Verify => run_verify(config, out_dir)?,
        RunKind::Suite => run_suite(config, out_dir)?,
    };
    stage("cli_harness", write_report(out_dir, "report.json", &report))?;
    stage("cli_harness", write_meta(out_dir, started.elapsed().as_secs_f64()))?;
    Ok(report)
}

fn nf_summary(nf: &NFunction, label: &Option<String>) -> Value {
    json!({
        "family": label.clone().unwrap_or_else(|| "table".into()),
        "dim": nf.dim_n(),
        "ell": nf.ell(),
        "em": nf.em(),
        "ell_star": nf.ell_star(),
        "em_star": nf.em_star(),
        "phi_at_one": nf.phi_at_one(),
        "bigphi_at_one": nf.bigphi_at_one(),
    })
}

fn problem_summary(config: &RunConfig) -> Value {
    let mesh = config.mesh.as_ref().unwrap();
    json!({
        "nfunction": nf_summary(config.nf.as_ref().unwrap(), &config.nf_label),
        "domain": {
            "kind": config.domain_label.clone().unwrap_or_default(),
            "dim": mesh.dim(),
            "nodes": mesh.n_nodes(),
            "elements": mesh.n_elements(),
            "diameter": mesh.diameter(),
            "measure": mesh.measure(),
        },
        "rhs": {
            "kind": config.rhs_label.clone().unwrap_or_default(),
            "truncation": config.truncation,
        },
    })
}

fn solve_report_json(rep: &SolveReport) -> Value {
    serde_json::to_value(rep).unwrap_or(Value::Null)
}

fn problem_of(config: &RunConfig) -> ProblemSpec {
    let mut p = ProblemSpec::new(
        config.mesh.clone().unwrap(),
        config.nf.clone().unwrap(),
        Rhs::Data(config.rhs.clone().unwrap()),
    );
    p.truncation_level = config.truncation;
    p
}

fn run_check_nfunction(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let nf = config.nf.as_ref().unwrap();
    let grid = &config.grid;
    let conditions = stage("nfunction_core", nf.check_conditions(grid))?;
    let (ell_hat, em_hat) = stage("nfunction_core", nf.simonenko_indices(grid))?;
    let (emp_lo, emp_hi) = stage("nfunction_core", nf.empirical_index_range(grid))?;
    let delta2 = stage("nfunction_core", nf.delta2_constant(0.0, 1e6))?;

    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&t| vec![t, nf.big_phi_prime(t), nf.growth_ratio(t)])
        .collect();
    stage("cli_harness", write_plotdata(out_dir, "t,flux,growth_ratio", &rows))?;

    Ok(json!({
        "kind": "check-nfunction",
        "nfunction": nf_summary(nf, &config.nf_label),
        "conditions": {
            "zero_limit": conditions.zero_limit,
            "infinity_limit": conditions.infinity_limit,
            "strictly_increasing": conditions.strictly_increasing,
            "ratio_in_bounds": conditions.ratio_in_bounds,
            "ratio_min": conditions.ratio_min,
            "ratio_max": conditions.ratio_max,
            "passed": conditions.passed(),
        },
        "simonenko": {"ell": ell_hat, "em": em_hat},
        "empirical_range": {"lo": emp_lo, "hi": emp_hi},
        "delta2_constant": delta2,
    }))
}

fn run_solve(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let problem = problem_of(config);
    let (field, rep) = stage("phi_solver", solve_dirichlet(&problem, &config.solve_opts))?;
    let norms = stage(
        "orlicz_norms",
        norm_report(&field, &problem.nf, &problem.mesh, &config.lp),
    )?;
    let weak = stage("phi_solver", weak_residual_norm(&problem, &field))?;
    stage("cli_harness", {
        std::fs::create_dir_all(out_dir).map_err(Error::Io).and_then(|_| {
            field.write_csv(&problem.mesh, &out_dir.join("field.csv"))
        })
    })?;
    let mut rows = Vec::new();
    for (stage_idx, residuals) in rep.residual_trace.iter().enumerate() {
        for (iter, &r) in residuals.iter().enumerate() {
            rows.push(vec![stage_idx as f64, iter as f64, r]);
        }
    }
    stage("cli_harness", write_plotdata(out_dir, "stage,iteration,residual", &rows))?;

    Ok(json!({
        "kind": "solve",
        "problem": problem_summary(config),
        "solve": solve_report_json(&rep),
        "norms": serde_json::to_value(&norms).unwrap_or(Value::Null),
        "weak_residual_norm": weak,
    }))
}

fn run_truncate(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let problem = problem_of(config);
    let chain = stage(
        "phi_solver",
        truncated_sequence(&problem, &config.n_list, &config.solve_opts),
    )?;
    let fields: Vec<Field> = chain.iter().map(|(f, _)| f.clone()).collect();
    let scale = fields.iter().map(Field::sup_norm).fold(0.0, f64::max);
    let tol = 1e-8 * scale;
    let monotone = stage(
        "phi_solver",
        monotonicity_check(&problem.mesh, &fields, tol),
    )?;
    let positive = stage(
        "phi_solver",
        positivity_check(&problem.mesh, &fields[0], 0.0),
    )?;

    std::fs::create_dir_all(out_dir).map_err(|e| ModuleError {
        module: "cli_harness",
        error: e.into(),
    })?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for ((field, rep), &n) in chain.iter().zip(config.n_list.iter()) {
        let name = format!("field_level_{n}.csv");
        stage("cli_harness", field.write_csv(&problem.mesh, &out_dir.join(name)))?;
        rows.push(vec![f64::from(n), rep.sup_norm]);
        levels.push(json!({
            "level": n,
            "sup_norm": rep.sup_norm,
            "converged": rep.converged,
            "newton_iterations": rep.newton_iterations,
        }));
    }
    stage("cli_harness", fields.last().unwrap().write_csv(&problem.mesh, &out_dir.join("field.csv")))?;
    stage("cli_harness", write_plotdata(out_dir, "level,sup_norm", &rows))?;

    Ok(json!({
        "kind": "truncate-sequence",
        "problem": problem_summary(config),
        "levels": Value::Array(levels),
        "monotone": monotone,
        "monotone_tolerance": tol,
        "first_positive_interior": positive,
    }))
}

fn run_moser(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let problem = problem_of(config);
    let spec = config.moser.as_ref().unwrap();
    let nf = &problem.nf;
    let mesh = &problem.mesh;
    let n = f64::from(nf.dim_n());

    // the solution whose norms feed the chain
    let (u, solve_rep) = stage("phi_solver", solve_dirichlet(&problem, &config.solve_opts))?;
    // the first truncated solution fixes ||u_1||_1
    let chain = stage(
        "phi_solver",
        truncated_sequence(&problem, &[spec.n1], &config.solve_opts),
    )?;
    let u1 = &chain[0].0;
    let norm_u1_l1 = stage("orlicz_norms", lp_norm(u1, mesh, 1.0))?;

    let f_field = stage("phi_solver", problem.effective_rhs())?;
    let norm_f_q = stage("orlicz_norms", lp_norm(&f_field, mesh, spec.q))?;

    // branch on power equivalence of Phi against t^m
    let equiv = stage(
        "nfunction_core",
        power_equivalence(nf, nf.em(), &config.grid, 1.0),
    )?;
    let branch_m = equiv.equivalent;
    let alpha = if branch_m { nf.em() } else { nf.ell() };
    let mu = match spec.mu {
        Some(v) => v,
        None => stage("moser_engine", talenti_constant(alpha, nf.dim_n()))?,
    };
    if !branch_m && !(spec.q > n / nf.ell()) {
        return Err(ModuleError {
            module: "moser_engine",
            error: Error::InvalidArgument(format!(
                "q = {} must exceed N/ell = {}",
                spec.q,
                n / nf.ell()
            )),
        });
    }
    let q_prime = spec.q / (spec.q - 1.0);
    let beta1 = q_prime * (alpha - 1.0);
    let f1 = stage("moser_engine", f1_term(&u, mesh, beta1))?;
    let inputs = MoserInputs {
        q: spec.q,
        ell: nf.ell(),
        em: nf.em(),
        dim_n: nf.dim_n(),
        norm_f_q,
        omega_measure: mesh.measure(),
        norm_u1_l1,
        bigphi_at_one: nf.bigphi_at_one(),
        mu,
        f1,
    };
    let moser_rep = if branch_m {
        let pe = PowerEquivalence {
            c: equiv.c1,
            t_threshold: equiv.t0,
        };
        stage("moser_engine", homog_apriori_bound_m(&inputs, &pe, spec.k_max))?
    } else {
        stage("moser_engine", homog_apriori_bound(&inputs, spec.k_max))?
    };
    let dominates = verify_bound(&u, moser_rep.linf_bound);

    std::fs::create_dir_all(out_dir).map_err(|e| ModuleError {
        module: "cli_harness",
        error: e.into(),
    })?;
    stage("cli_harness", u.write_csv(mesh, &out_dir.join("field.csv")))?;
    let rows: Vec<Vec<f64>> = (0..moser_rep.beta.len())
        .map(|k| {
            vec![
                (k + 1) as f64,
                moser_rep.beta[k],
                moser_rep.beta_star[k],
                moser_rep.lambda[k],
                moser_rep.f_chain[k],
            ]
        })
        .collect();
    stage("cli_harness", write_plotdata(out_dir, "k,beta,beta_star,lambda,F", &rows))?;

    Ok(json!({
        "kind": "moser-bound",
        "problem": problem_summary(config),
        "branch": if branch_m { "m" } else { "ell" },
        "equivalence": serde_json::to_value(equiv).unwrap_or(Value::Null),
        "inputs": serde_json::to_value(inputs).unwrap_or(Value::Null),
        "moser": serde_json::to_value(&moser_rep).unwrap_or(Value::Null),
        "solve": solve_report_json(&solve_rep),
        "dominates": dominates,
    }))
}

fn run_verify(config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let spec = config.verify.as_ref().unwrap();
    let solve = stage("cli_harness", read_report(&spec.solve_report))?;
    let moser = stage("cli_harness", read_report(&spec.moser_report))?;
    let sup_norm = solve
        .pointer("/solve/sup_norm")
        .and_then(Value::as_f64)
        .ok_or_else(|| ModuleError {
            module: "cli_harness",
            error: Error::InvalidArgument(format!(
                "'{}' has no solve.sup_norm field",
                spec.solve_report.display()
            )),
        })?;
    let linf_bound = moser
        .pointer("/moser/linf_bound")
        .and_then(Value::as_f64)
        .ok_or_else(|| ModuleError {
            module: "cli_harness",
            error: Error::InvalidArgument(format!(
                "'{}' has no moser.linf_bound field",
                spec.moser_report.display()
            )),
        })?;
    let dominates = sup_norm <= linf_bound;
    stage(
        "cli_harness",
        write_plotdata(out_dir, "sup_norm,linf_bound", &[vec![sup_norm, linf_bound]]),
    )?;
    Ok(json!({
        "kind": "verify",
        "sup_norm": sup_norm,
        "linf_bound": linf_bound,
        "dominates": dominates,
    }))
}

fn run_suite(_config: &RunConfig, out_dir: &Path) -> RunResult<Value> {
    let results = suite::run_all();
    let rows: Vec<Vec<f64>> = results
        .iter()
        .map(|r| vec![r.index as f64, f64::from(u8::from(r.passed)), r.elapsed_seconds])
        .collect();
    stage("cli_harness", write_plotdata(out_dir, "criterion,passed,elapsed_seconds", &rows))?;
    let all_passed = results.iter().all(|r| r.passed);
    let criteria: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "index": r.index,
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
            })
        })
        .collect();
    Ok(json!({
        "kind": "suite",
        "criteria": Value::Array(criteria),
        "all_passed": all_passed,
    }))
}
