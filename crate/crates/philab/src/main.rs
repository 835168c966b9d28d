//! Thin command-line front end over the library pipelines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use philab::harness::config::{parse_config, RunKind};
use philab::harness::report::{to_json_string, write_report};
use philab::harness::run::{run, ModuleError};

#[derive(Parser)]
#[command(
    name = "philab",
    about = "Dirichlet Phi-Laplacian laboratory: N-function calculus, convex-energy finite elements, explicit sup-norm bound chains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the flat key-value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to $PHILAB_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a generator and report its growth data.
    CheckNfunction(RunArgs),
    /// Solve a Dirichlet problem and persist the field and diagnostics.
    Solve(RunArgs),
    /// Solve the ascending chain of truncated problems.
    TruncateSequence(RunArgs),
    /// Compute the explicit a-priori sup-norm bound for a problem.
    MoserBound(RunArgs),
    /// Compare a persisted solve report against a persisted bound report.
    Verify(RunArgs),
    /// Run the full verification suite.
    Suite(RunArgs),
}

impl Command {
    fn kind(&self) -> RunKind {
        match self {
            Command::CheckNfunction(_) => RunKind::CheckNFunction,
            Command::Solve(_) => RunKind::Solve,
            Command::TruncateSequence(_) => RunKind::TruncateSequence,
            Command::MoserBound(_) => RunKind::MoserBound,
            Command::Verify(_) => RunKind::Verify,
            Command::Suite(_) => RunKind::Suite,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::CheckNfunction(a)
            | Command::Solve(a)
            | Command::TruncateSequence(a)
            | Command::MoserBound(a)
            | Command::Verify(a)
            | Command::Suite(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = cli.command.args();
    let out_dir = match args.out.clone().or_else(|| {
        std::env::var_os("PHILAB_OUT").map(PathBuf::from)
    }) {
        Some(dir) => dir,
        None => {
            eprintln!("error: no output directory (pass --out or set PHILAB_OUT)");
            return ExitCode::FAILURE;
        }
    };

    let config = match parse_config(&args.config) {
        Ok(c) => c,
        Err(error) => {
            return fail(
                &out_dir,
                ModuleError {
                    module: "cli_harness",
                    error,
                },
            )
        }
    };
    if config.kind != cli.command.kind() {
        eprintln!(
            "error: config declares run kind '{}' but the subcommand is '{}'",
            config.kind.name(),
            cli.command.kind().name()
        );
        return ExitCode::FAILURE;
    }

    match run(&config, &out_dir) {
        Ok(report) => {
            if config.kind == RunKind::Suite {
                print_suite_table(&report);
            }
            println!("wrote {}", out_dir.join("report.json").display());
            if report.get("kind") == Some(&serde_json::json!("suite"))
                && report.get("all_passed") != Some(&serde_json::json!(true))
            {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&out_dir, e),
    }
}

fn print_suite_table(report: &serde_json::Value) {
    if let Some(criteria) = report.get("criteria").and_then(|c| c.as_array()) {
        for c in criteria {
            println!(
                "criterion {:02} {:<28} {} ({})",
                c.get("index").and_then(|v| v.as_u64()).unwrap_or(0),
                c.get("name").and_then(|v| v.as_str()).unwrap_or("?"),
                if c.get("passed").and_then(|v| v.as_bool()).unwrap_or(false) {
                    "PASS"
                } else {
                    "FAIL"
                },
                c.get("detail").and_then(|v| v.as_str()).unwrap_or(""),
            );
        }
    }
}

fn fail(out_dir: &std::path::Path, e: ModuleError) -> ExitCode {
    let payload = e.to_json();
    eprintln!("{}", to_json_string(&payload).trim_end());
    if write_report(out_dir, "error.json", &payload).is_err() {
        eprintln!("error: could not write error.json to {}", out_dir.display());
    }
    ExitCode::FAILURE
}
