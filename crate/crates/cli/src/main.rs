//! `qumode` command line: single benchmark cells, sweep grids, Wigner
//! exports, and report regeneration.
//!
//! Exit codes: 0 success, 2 bad usage or config, 1 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qumode_core::harness::{
    emit_report, parse_target, run_cell, run_trial, BenchTable, ExperimentConfig, SweepConfig,
};
use qumode_core::objective::EvalMode;
use qumode_core::wigner::{export_grid, symmetric_axis, wigner};
use qumode_core::{Error, OptimizerKind, OptimizerSpec};

/// Environment variable overriding the default output directory.
const OUT_DIR_ENV: &str = "QUMODE_OUT";

#[derive(Parser)]
#[command(name = "qumode", version, about = "qumode state-preparation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory (default: $QUMODE_OUT or ./out).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl OutputArgs {
    fn resolve(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark cell and print its aggregate row.
    Run {
        /// Target: local-gaussian, gaussian, gaussian:MEAN,STD,
        /// non-gaussian, vacuum, fock:N, file:PATH.
        #[arg(long)]
        target: String,
        /// Optimizer: spsa, nelder-mead, powell, cobyla, cg, l-bfgs.
        #[arg(long)]
        optimizer: String,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        /// ideal or sampled.
        #[arg(long, default_value = "ideal")]
        mode: String,
        #[arg(long, default_value_t = qumode_core::objective::DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        /// Finite-difference step for cg / l-bfgs (default: per-mode).
        #[arg(long)]
        fd_step: Option<f64>,
        /// Record per-iteration convergence traces.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a TOML-configured sweep grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Skip cells whose trials are already archived in the output dir.
        #[arg(long)]
        resume: bool,
        /// Worker threads (default: rayon's choice).
        #[arg(long)]
        parallelism: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Export the Wigner function of a target state, or of the qumode after
    /// optimizing toward it.
    Wigner {
        #[arg(long)]
        target: String,
        /// Optimize with this method first and render the prepared state
        /// instead of the target itself.
        #[arg(long)]
        optimizer: Option<String>,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        /// Half-width of the symmetric phase-space window.
        #[arg(long, default_value_t = 5.0)]
        range: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate aggregate.csv and the markdown tables from an existing
    /// sweep output directory.
    Report {
        /// Sweep output directory holding resolved_config.toml and
        /// trials.jsonl.
        #[arg(long)]
        input_dir: PathBuf,
    },
}

fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_)
            | Error::Parse { .. }
            | Error::InvalidTarget(_)
            | Error::PresetCutoff(_)
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn parse_mode(s: &str) -> Result<EvalMode, Error> {
    match s {
        "ideal" => Ok(EvalMode::Ideal),
        "sampled" => Ok(EvalMode::Sampled),
        other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run {
            target,
            optimizer,
            layers,
            mode,
            shots,
            trials,
            seed,
            cutoff,
            fd_step,
            trace,
            output,
        } => {
            let mode = parse_mode(&mode)?;
            let kind = OptimizerKind::parse(&optimizer)?;
            let mut spec = OptimizerSpec::new(kind);
            spec.fd_step = fd_step.unwrap_or(match mode {
                EvalMode::Ideal => qumode_core::optimize::DEFAULT_FD_STEP_IDEAL,
                EvalMode::Sampled => qumode_core::optimize::DEFAULT_FD_STEP_SAMPLED,
            });
            if kind == OptimizerKind::NelderMead && mode == EvalMode::Sampled {
                // shot noise keeps the simplex from contracting; same cap as
                // the sweep path
                spec.max_fevals =
                    Some(qumode_core::harness::NELDER_MEAD_SAMPLED_MAX_FEVALS);
            }
            let mut cfg =
                ExperimentConfig::new(parse_target(&target, cutoff)?, spec, layers, mode);
            cfg.shots = shots;
            cfg.trials = trials;
            cfg.base_seed = seed;
            cfg.record_trace = trace;

            let (row, trial_results) = run_cell(&cfg)?;
            let out_dir = output.resolve();
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
            let table = BenchTable { rows: vec![row.clone()] };
            std::fs::write(out_dir.join("aggregate.csv"), table.to_csv())
                .map_err(|e| Error::io("writing aggregate.csv", e))?;
            emit_report(&table, &trial_results, &out_dir)?;

            println!("cell: {}", row.cell);
            println!(
                "infidelity: {:.6} +/- {:.6}  (optimizer-visible {:.6})",
                row.infidelity_mean, row.infidelity_std, row.objective_mean
            );
            println!(
                "nfev: {:.1} +/- {:.1}   total evals (mean): {:.1}   nonconverged: {:.1}%",
                row.nfev_mean, row.nfev_std, row.total_evals_mean, row.nonconverged_pct
            );
            println!("wrote {}", out_dir.join("aggregate.csv").display());
            Ok(())
        }
        Command::Sweep { config, resume, parallelism, output } => {
            let cfg = SweepConfig::from_path(&config)?;
            let out_dir = output.resolve();
            let outcome = qumode_core::harness::run_sweep(&cfg, &out_dir, resume, parallelism)?;
            println!(
                "sweep {:?}: {} cells run, {} reused, {} trials",
                cfg.name,
                outcome.cells_run,
                outcome.cells_skipped,
                outcome.trials.len()
            );
            println!("wrote {}", outcome.aggregate_path.display());
            Ok(())
        }
        Command::Wigner {
            target,
            optimizer,
            layers,
            seed,
            cutoff,
            range,
            points,
            output,
        } => {
            if points < 2 || range <= 0.0 {
                return Err(Error::InvalidConfig(
                    "wigner needs range > 0 and points >= 2".into(),
                ));
            }
            let spec = parse_target(&target, cutoff)?;
            let rho = match optimizer {
                None => spec.resolve()?.projector(),
                Some(opt) => {
                    let kind = OptimizerKind::parse(&opt)?;
                    let mut cfg = ExperimentConfig::new(
                        spec,
                        OptimizerSpec::new(kind),
                        layers,
                        EvalMode::Ideal,
                    );
                    cfg.base_seed = seed;
                    cfg.trials = 1;
                    let trial = run_trial(&cfg, 0)?;
                    prepared_mode_density(&cfg, &trial.final_params)?
                }
            };
            let axis = symmetric_axis(range, points);
            let grid = wigner(&rho, &axis, &axis)?;
            let out_dir = output.resolve();
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
            let path = out_dir.join("wigner.csv");
            export_grid(&grid, &path)?;
            println!(
                "wigner grid {}x{} on [-{range}, {range}], min {:.6}, integral {:.6}",
                points,
                points,
                grid.min_value(),
                grid.integral()
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Report { input_dir } => {
            let cfg = SweepConfig::from_path(&input_dir.join("resolved_config.toml"))?;
            if !input_dir.join("trials.jsonl").exists() {
                return Err(Error::InvalidConfig(format!(
                    "no trials.jsonl under {}",
                    input_dir.display()
                )));
            }
            let outcome = qumode_core::harness::run_sweep(&cfg, &input_dir, true, None)?;
            if outcome.cells_run > 0 {
                eprintln!(
                    "note: {} cells were missing from the archive and were re-run",
                    outcome.cells_run
                );
            }
            println!("rebuilt {}", outcome.aggregate_path.display());
            Ok(())
        }
    }
}

/// Reduced qumode density matrix of the ansatz output at `params`.
fn prepared_mode_density(
    cfg: &ExperimentConfig,
    params: &[f64],
) -> Result<qumode_core::CMatrix, Error> {
    use qumode_core::ansatz::{apply_ansatz_flat, AnsatzConfig};
    use qumode_core::linalg::partial_trace_qubit;
    let cutoff = qumode_core::FockCutoff::new(cfg.target.cutoff())?;
    let ansatz = AnsatzConfig::new(cfg.layers, cutoff)?;
    let psi = apply_ansatz_flat(params, &ansatz)?;
    partial_trace_qubit(&psi, cutoff)
}
