use clap::{Parser, Subcommand, ValueEnum};
use ssg_core::schedules::ConstantReport;
use ssg_core::stationarity::near_stationarity;
use ssg_core::RngStream;
use ssg_harness::experiment::{solve_single, stationarity_weights};
use ssg_harness::plot::{emit_plots, PlotInput, XAxis};
use ssg_harness::selftest::run_selftest;
use ssg_harness::setup::prepare;
use ssg_harness::{run_experiment, ExperimentConfig, HarnessError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ssg", version, about = "Switching subgradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Iterations,
    CpuTime,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first cell of one solver and print its outcome.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solver: Option<String>,
    },
    /// Near-stationarity report at the configured start point or `--point`.
    EvaluateStationarity {
        #[command(flatten)]
        common: Common,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',')]
        point: Option<Vec<f64>>,
    },
    /// Run every grid cell and write CSVs, a summary and plots.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// SVG plots from run CSVs; each file is one curve.
    Plot {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "plot")]
        title: String,
        #[arg(long, value_enum, default_value = "iterations")]
        x_axis: Axis,
        #[arg(long)]
        log_y: bool,
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
    /// Analytic constants of the configured problem.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho_hat: Option<f64>,
    },
    /// Invariant suites on synthetic inputs.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    Ok(cfg)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Solve { common, solver } => {
            let cfg = load(&common)?;
            let (cell, res) = solve_single(&cfg, solver.as_deref())?;
            let last = res.final_row();
            let report = serde_json::json!({
                "run_id": cell.run_id,
                "method": cell.method.as_str(),
                "tolerance": cell.tolerance,
                "step": cell.step,
                "initial_objective": res.initial_objective,
                "final_objective": last.objective,
                "final_infeasibility": last.infeasibility,
                "output_iteration": res.output_iteration,
                "output_point": res.output_point,
                "cpu_seconds": res.cpu_seconds,
            });
            println!("{}", json(&report));
        }
        Command::EvaluateStationarity { common, point } => {
            let cfg = load(&common)?;
            let prepared = prepare(&cfg)?;
            let x = match point {
                Some(p) => p,
                None => prepared.x0.to_vec(),
            };
            let (rho_hat, rho_tilde) = stationarity_weights(&cfg, &prepared);
            let mut rng = RngStream::new(cfg.seed);
            let report = near_stationarity(&prepared.problem, &x, rho_hat, rho_tilde, cfg.stationarity.inner_iters, &mut rng)?;
            println!("{}", json(&report));
        }
        Command::Experiment { common } => {
            let cfg = load(&common)?;
            let outcome = run_experiment(&cfg)?;
            for r in &outcome.runs {
                match &r.outcome {
                    Ok(res) => println!(
                        "{}{} final objective {} infeasibility {}",
                        r.cell.run_id,
                        if r.winner { " (winner)" } else { "" },
                        res.final_row().objective,
                        res.final_row().infeasibility
                    ),
                    Err(e) => println!("{} failed: {e}", r.cell.run_id),
                }
            }
            println!("summary: {}", outcome.summary.display());
        }
        Command::Plot { out, title, x_axis, log_y, csv } => {
            let inputs: Vec<PlotInput> = csv
                .into_iter()
                .map(|p| PlotInput {
                    label: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                    path: p,
                })
                .collect();
            let axis = match x_axis {
                Axis::Iterations => XAxis::Iterations,
                Axis::CpuTime => XAxis::CpuTime,
            };
            for p in emit_plots(&inputs, &out, &title, axis, log_y)? {
                println!("{}", p.display());
            }
        }
        Command::Constants { common, rho_hat } => {
            let cfg = load(&common)?;
            let prepared = prepare(&cfg)?;
            let k = prepared.problem.constants();
            let rho_hat = rho_hat.unwrap_or_else(|| stationarity_weights(&cfg, &prepared).0);
            let report = serde_json::json!({
                "problem": prepared.problem.name(),
                "rho_hat": rho_hat,
                "constants": k,
                "info": prepared.info,
                "derived": ConstantReport::for_constants(k, rho_hat),
            });
            println!("{}", json(&report));
        }
        Command::Selftest { seed } => {
            let lines = run_selftest(seed);
            for l in &lines {
                println!("{l}");
            }
            return Ok(lines.iter().all(|l| l.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
