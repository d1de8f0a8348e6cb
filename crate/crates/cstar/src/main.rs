use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cstar::driver::{self, DriverError, DriverResult};
use cstar::scenario;

#[derive(Parser)]
#[command(name = "cstar", version, about = "Quasi-bases, basic constructions and perturbation of finite-dimensional C*-inclusions")]
struct Cli {
    /// Slack tolerance when judging bound tables.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Print the full JSON report instead of a summary.
    #[arg(long, global = true)]
    json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index values, one recovery and one clustering on small scenarios.
    Demo,
    /// Plant `u₀` with `‖u₀ − I‖ = eps` and recover a conjugating unitary.
    Perturb {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        eps: f64,
        /// Include per-stage wall-clock timings.
        #[arg(long)]
        timings: bool,
    },
    /// Randomized audits of the norm estimates.
    Audit {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Watatani index of the scenario's base expectation.
    Index {
        #[arg(long)]
        scenario: String,
    },
    /// Unit-ball quasi-basis of the scenario's base expectation.
    QuasiBasis {
        #[arg(long)]
        scenario: String,
    },
    /// Distance bracket between `A` and a planted conjugate.
    Distance {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        eps: f64,
    },
    /// Cluster `A`, a planted conjugate and the scenario's other intermediate.
    Cluster {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Override the Jones-distance threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// List catalog scenarios.
    Scenarios,
}

fn emit<T: Serialize>(json: bool, report: &T, summary: impl FnOnce(&T) -> String) {
    if json {
        out(&serde_json::to_string_pretty(report).expect("reports serialize"));
    } else {
        out(&summary(report));
    }
}

fn recover_summary(r: &driver::RecoverReport) -> String {
    let mut out = format!(
        "{} eps={:e} seed={}\n  N={} gamma={:e} d in [{:e}, {:e}] delta={:e}\n  conjugation residual {:e}, ‖u−I‖={:e}, [u,C] residual {:e}\n",
        r.scenario,
        r.eps,
        r.seed,
        r.n_quasi_basis,
        r.gamma,
        r.distance.lower,
        r.distance.upper,
        r.delta,
        r.conjugation_residual,
        r.u_bound.lhs,
        r.u_commutes_with_c_residual
    );
    for b in &r.bounds {
        out.push_str(&format!("  {:<36} {:>12.4e} <= {:>12.4e}  slack {:+.3e}\n", b.name, b.lhs, b.rhs, b.slack));
    }
    out.push_str(if r.bounds_hold { "  all bounds hold" } else { "  BOUND VIOLATED" });
    if let Some(t) = &r.timings {
        for s in t {
            out.push_str(&format!("\n  {:<22} {:.3} ms", s.stage, s.millis));
        }
    }
    out
}

fn index_summary(r: &driver::IndexReport) -> String {
    let expected = match (r.expected_index, r.expected_deviation) {
        (Some(v), Some(dev)) => format!(" (expected {v}·I, deviation {dev:e})"),
        _ => String::new(),
    };
    format!(
        "{}: ‖Index‖ = {:.12}, min eigenvalue {:.12}{}; {} elements, reconstruction residual {:e}",
        r.scenario, r.index_norm, r.min_eigenvalue, expected, r.n_elements, r.reconstruction_residual
    )
}

fn cluster_summary(r: &driver::ClusterJson) -> String {
    let classes: Vec<String> = r
        .classes
        .iter()
        .map(|c| format!("{{{}}}", c.iter().map(|&i| r.members[i]).collect::<Vec<_>>().join(", ")))
        .collect();
    format!(
        "{}: epsilon {:e} (formula {:e}), {} attempt(s), classes {}",
        r.scenario,
        r.epsilon,
        r.formula_epsilon,
        r.attempts.len(),
        classes.join(" ")
    )
}

fn run(cli: &Cli) -> DriverResult<bool> {
    let json = cli.json;
    match &cli.command {
        Command::Demo => {
            let r = driver::run_demo(cli.seed, cli.tol)?;
            emit(json, &r, |r| {
                let mut out: Vec<String> = r.indices.iter().map(index_summary).collect();
                out.push(recover_summary(&r.recover));
                out.push(cluster_summary(&r.cluster));
                out.join("\n")
            });
            Ok(r.recover.bounds_hold)
        }
        Command::Perturb { scenario, eps, timings } => {
            let r = driver::run_recover(scenario, *eps, cli.seed, cli.tol, *timings)?;
            emit(json, &r, recover_summary);
            Ok(r.bounds_hold)
        }
        Command::Audit { trials } => {
            let r = driver::run_audit(*trials, cli.seed)?;
            emit(json, &r, |r| {
                let mut out = format!("{} trials, seed {}\n", r.trials, r.seed);
                for i in &r.items {
                    out.push_str(&format!("  {:<28} max violation {:+.3e}  max ratio {:.4}\n", i.name, i.max_violation, i.max_ratio));
                }
                out.push_str(if r.passed { "  passed" } else { "  FAILED" });
                out
            });
            Ok(r.passed)
        }
        Command::Index { scenario } => {
            let r = driver::run_index(scenario)?;
            emit(json, &r, index_summary);
            Ok(true)
        }
        Command::QuasiBasis { scenario } => {
            let r = driver::run_quasi_basis(scenario, cli.seed)?;
            emit(json, &r, |r| {
                format!(
                    "{}: {} frame elements, K = {}, {} unit-ball elements, reconstruction residual {:e}, Pimsner–Popa margin {:e}",
                    r.scenario,
                    r.frame_len,
                    r.rescale_factor,
                    r.quasi_basis.elements.len(),
                    r.reconstruction_residual,
                    r.pimsner_popa_margin
                )
            });
            Ok(true)
        }
        Command::Distance { scenario, eps } => {
            let r = driver::run_distance(scenario, *eps, cli.seed)?;
            emit(json, &r, |r| {
                format!(
                    "{}: d(A, u₀Au₀*) in [{:e}, {:e}]; Jones bound {:e}, sweep bound {:e}, witness bound {:e}",
                    r.scenario,
                    r.estimate.lower,
                    r.estimate.upper,
                    r.estimate.jones_bound,
                    r.estimate.sweep_bound,
                    r.estimate.witness_bound.unwrap_or(f64::NAN)
                )
            });
            Ok(true)
        }
        Command::Cluster { scenario, eps, threshold } => {
            let r = driver::run_cluster(scenario, *eps, cli.seed, *threshold)?;
            emit(json, &r, cluster_summary);
            Ok(true)
        }
        Command::Scenarios => {
            let cat = scenario::catalog();
            if json {
                let names: Vec<_> = cat.iter().map(|s| serde_json::json!({"name": s.name, "description": s.description})).collect();
                out(&serde_json::to_string_pretty(&names).expect("names serialize"));
            } else {
                for s in cat {
                    out(&format!("{:<20} {}", s.name, s.description));
                }
            }
            Ok(true)
        }
    }
}

/// Writes a line to stdout, ignoring a closed pipe.
fn out(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved for TooFar
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => report_error(&cli, &e),
    }
}

fn report_error(cli: &Cli, e: &DriverError) -> ExitCode {
    eprintln!("error: {e}");
    if cli.json {
        out(&serde_json::to_string_pretty(&e.to_json()).expect("errors serialize"));
    }
    ExitCode::from(e.exit_code() as u8)
}
