//! Experiment orchestration: seeded trial replication, per-cell statistics,
//! sweep grids with resumable archives, and report emission.
//!
//! Determinism contract: every trial derives its rng streams from
//! (base_seed, cell key, trial index) alone, so results are independent of
//! execution order and parallelism degree, and aggregation is a fold over
//! trial index order.

mod report;
mod sweep;

pub use report::emit_report;
pub use sweep::{parse_target, run_sweep, SweepConfig, SweepOutcome};

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{AnsatzConfig, PARAMS_PER_LAYER};
use crate::cost::Purpose;
use crate::error::{Error, Result};
use crate::linalg::FockCutoff;
use crate::objective::{fidelity, EvalMode, EvalRecord, ObjectiveConfig, SwapTestObjective};
use crate::optimize::{minimize, OptimizerKind, OptimizerSpec};
use crate::target::TargetSpec;

pub const DEFAULT_TRIALS: usize = 30;
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.1;
/// Evaluation cap for Nelder-Mead in sampled mode, where shot noise keeps
/// the simplex from ever meeting a spread tolerance.
pub const NELDER_MEAD_SAMPLED_MAX_FEVALS: usize = 3000;

/// Initialization ranges for the per-trial starting point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InitRanges {
    pub angle_low: f64,
    pub angle_high: f64,
    pub disp_low: f64,
    pub disp_high: f64,
}

impl Default for InitRanges {
    fn default() -> Self {
        InitRanges {
            angle_low: 0.0,
            angle_high: std::f64::consts::TAU,
            disp_low: -1.0,
            disp_high: 1.0,
        }
    }
}

/// One benchmark cell: a (target, optimizer, layers, mode, shots) setting
/// replicated over `trials` seeded runs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub optimizer: OptimizerSpec,
    pub layers: usize,
    pub mode: EvalMode,
    pub shots: u64,
    pub trials: usize,
    pub base_seed: u64,
    pub init_ranges: InitRanges,
    pub convergence_threshold: f64,
    pub record_trace: bool,
}

impl ExperimentConfig {
    pub fn new(
        target: TargetSpec,
        optimizer: OptimizerSpec,
        layers: usize,
        mode: EvalMode,
    ) -> Self {
        ExperimentConfig {
            target,
            optimizer,
            layers,
            mode,
            shots: crate::objective::DEFAULT_SHOTS,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            init_ranges: InitRanges::default(),
            convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
            record_trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.convergence_threshold) || self.convergence_threshold <= 0.0 {
            return Err(Error::InvalidConfig(
                "convergence_threshold must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Stable identifier of the cell; keys the trial archive and seeds.
    pub fn cell_key(&self) -> String {
        format!(
            "{}|{}|L{}|{}|shots{}|fd{}",
            self.target.label(),
            self.optimizer.kind.label(),
            self.layers,
            self.mode,
            match self.mode {
                EvalMode::Ideal => 0,
                EvalMode::Sampled => self.shots,
            },
            self.optimizer.fd_step,
        )
    }

    /// File-name-safe variant of the cell key.
    pub fn cell_slug(&self) -> String {
        self.cell_key()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
    pub true_infidelity: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrialResult {
    pub cell: String,
    pub trial_index: usize,
    pub seed: u64,
    pub final_params: Vec<f64>,
    /// Optimizer-visible best objective (noisy in sampled mode).
    pub final_objective: f64,
    /// Ideal re-evaluation of the final parameters: 1 - sqrt(F).
    pub final_true_infidelity: f64,
    /// Reported per the benchmark convention: objective calls for
    /// derivative-free methods, objective calls excluding gradient probes
    /// for cg / l-bfgs, iteration count for spsa.
    pub nfev: usize,
    pub grad_probe_evals: usize,
    pub total_evals: usize,
    pub iterations: usize,
    pub converged: bool,
    pub termination_reason: crate::optimize::TerminationReason,
    pub wall_time_s: f64,
    pub optimizer: OptimizerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TracePoint>>,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Child-stream seed for (base_seed, cell, trial, stream index).
fn derive_seed(base_seed: u64, cell_key: &str, trial_index: usize, stream: u64) -> u64 {
    let mut bytes = Vec::with_capacity(cell_key.len() + 24);
    bytes.extend_from_slice(&base_seed.to_le_bytes());
    bytes.extend_from_slice(cell_key.as_bytes());
    bytes.extend_from_slice(&(trial_index as u64).to_le_bytes());
    bytes.extend_from_slice(&stream.to_le_bytes());
    fnv1a64(&bytes)
}

fn draw_x0(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x0 = Vec::with_capacity(PARAMS_PER_LAYER * cfg.layers);
    let r = &cfg.init_ranges;
    for _ in 0..cfg.layers {
        x0.push(rng.gen_range(r.disp_low..r.disp_high));
        x0.push(rng.gen_range(r.disp_low..r.disp_high));
        x0.push(rng.gen_range(r.angle_low..r.angle_high));
        x0.push(rng.gen_range(r.angle_low..r.angle_high));
        x0.push(rng.gen_range(r.angle_low..r.angle_high));
    }
    x0
}

fn build_trace(kind: OptimizerKind, log: &[EvalRecord]) -> Vec<TracePoint> {
    match kind {
        OptimizerKind::Spsa => log
            .chunks(2)
            .enumerate()
            .map(|(k, pair)| {
                let obj = pair.iter().map(|r| r.objective).sum::<f64>() / pair.len() as f64;
                let inf =
                    pair.iter().map(|r| r.true_infidelity).sum::<f64>() / pair.len() as f64;
                TracePoint { iteration: k, objective: obj, true_infidelity: inf }
            })
            .collect(),
        _ => log
            .iter()
            .filter(|r| r.purpose == Purpose::Objective)
            .enumerate()
            .map(|(i, r)| TracePoint {
                iteration: i,
                objective: r.objective,
                true_infidelity: r.true_infidelity,
            })
            .collect(),
    }
}

/// Runs one seeded trial of the cell. Fully deterministic given
/// (cfg, trial_index); the optional `x0_override` is a test hook.
pub fn run_trial_with_x0(
    cfg: &ExperimentConfig,
    trial_index: usize,
    x0_override: Option<Vec<f64>>,
) -> Result<TrialResult> {
    cfg.validate()?;
    let cell = cfg.cell_key();
    let seed = derive_seed(cfg.base_seed, &cell, trial_index, 0);
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.base_seed, &cell, trial_index, 1));
    let mut opt_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.base_seed, &cell, trial_index, 2));

    let target = cfg.target.resolve()?;
    let cutoff = FockCutoff::new(cfg.target.cutoff())?;
    let ansatz = AnsatzConfig::new(cfg.layers, cutoff)?;
    let x0 = x0_override.unwrap_or_else(|| draw_x0(cfg, &mut init_rng));
    if x0.len() != ansatz.n_params() {
        return Err(Error::DimensionMismatch { expected: ansatz.n_params(), got: x0.len() });
    }

    let obj_cfg = match cfg.mode {
        EvalMode::Ideal => ObjectiveConfig::ideal(ansatz, target.clone()),
        EvalMode::Sampled => ObjectiveConfig::sampled(ansatz, target.clone(), cfg.shots),
    };
    let ideal_cfg = ObjectiveConfig { mode: EvalMode::Ideal, ..obj_cfg.clone() };
    let mut objective = match cfg.mode {
        EvalMode::Ideal => SwapTestObjective::new(obj_cfg)?,
        EvalMode::Sampled => SwapTestObjective::with_rng(obj_cfg, noise_rng)?,
    };

    let start = Instant::now();
    let opt = minimize(&mut objective, &x0, &cfg.optimizer, &mut opt_rng).map_err(|e| {
        Error::InvalidConfig(format!("trial {trial_index} of cell {cell} aborted: {e}"))
    })?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let final_true_infidelity = match fidelity(&opt.best_params, &ideal_cfg) {
        Ok(f) => 1.0 - f.sqrt(),
        Err(Error::DisplacementRange(_)) => 1.0,
        Err(e) => return Err(e),
    };

    let reported_nfev = match cfg.optimizer.kind {
        OptimizerKind::Spsa => opt.iterations,
        _ => opt.nfev,
    };
    let trace = cfg.record_trace.then(|| build_trace(cfg.optimizer.kind, objective.log()));

    Ok(TrialResult {
        cell,
        trial_index,
        seed,
        final_params: opt.best_params,
        final_objective: opt.best_objective,
        final_true_infidelity,
        nfev: reported_nfev,
        grad_probe_evals: opt.grad_probe_evals,
        total_evals: opt.total_evals,
        iterations: opt.iterations,
        converged: final_true_infidelity <= cfg.convergence_threshold,
        termination_reason: opt.termination_reason,
        wall_time_s,
        optimizer: cfg.optimizer.clone(),
        trace,
    })
}

pub fn run_trial(cfg: &ExperimentConfig, trial_index: usize) -> Result<TrialResult> {
    run_trial_with_x0(cfg, trial_index, None)
}

/// Aggregated statistics of one cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BenchRow {
    pub cell: String,
    pub target: String,
    pub optimizer: String,
    pub layers: usize,
    pub mode: EvalMode,
    pub shots: u64,
    pub fd_step: f64,
    pub trials: usize,
    /// Ground-truth infidelity statistics (ideal re-evaluation).
    pub infidelity_mean: f64,
    pub infidelity_std: f64,
    /// Optimizer-visible objective statistics; this is the column that
    /// mirrors the published sampled-mode tables.
    pub objective_mean: f64,
    pub objective_std: f64,
    pub nfev_mean: f64,
    pub nfev_std: f64,
    pub total_evals_mean: f64,
    pub nonconverged_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Deterministic fold over trial results in trial-index order.
pub fn aggregate_cell(cfg: &ExperimentConfig, trials: &[TrialResult]) -> Result<BenchRow> {
    if trials.len() != cfg.trials {
        return Err(Error::InvalidConfig(format!(
            "cell {} has {} trials, expected {}",
            cfg.cell_key(),
            trials.len(),
            cfg.trials
        )));
    }
    let mut ordered: Vec<&TrialResult> = trials.iter().collect();
    ordered.sort_by_key(|t| t.trial_index);
    let (infidelity_mean, infidelity_std) =
        mean_std(ordered.iter().map(|t| t.final_true_infidelity).collect::<Vec<_>>().into_iter());
    let (objective_mean, objective_std) =
        mean_std(ordered.iter().map(|t| t.final_objective).collect::<Vec<_>>().into_iter());
    let (nfev_mean, nfev_std) =
        mean_std(ordered.iter().map(|t| t.nfev as f64).collect::<Vec<_>>().into_iter());
    let (total_evals_mean, _) =
        mean_std(ordered.iter().map(|t| t.total_evals as f64).collect::<Vec<_>>().into_iter());
    let nonconverged = ordered.iter().filter(|t| !t.converged).count();
    Ok(BenchRow {
        cell: cfg.cell_key(),
        target: cfg.target.label(),
        optimizer: cfg.optimizer.kind.label().to_string(),
        layers: cfg.layers,
        mode: cfg.mode,
        shots: match cfg.mode {
            EvalMode::Ideal => 0,
            EvalMode::Sampled => cfg.shots,
        },
        fd_step: cfg.optimizer.fd_step,
        trials: cfg.trials,
        infidelity_mean,
        infidelity_std,
        objective_mean,
        objective_std,
        nfev_mean,
        nfev_std,
        total_evals_mean,
        nonconverged_pct: 100.0 * nonconverged as f64 / cfg.trials as f64,
    })
}

/// Runs every trial of the cell (in parallel on the current rayon pool)
/// and aggregates. Results are independent of scheduling.
pub fn run_cell(cfg: &ExperimentConfig) -> Result<(BenchRow, Vec<TrialResult>)> {
    cfg.validate()?;
    use rayon::prelude::*;
    let trials: Result<Vec<TrialResult>> =
        (0..cfg.trials).into_par_iter().map(|i| run_trial(cfg, i)).collect();
    let trials = trials?;
    let row = aggregate_cell(cfg, &trials)?;
    Ok((row, trials))
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "target,optimizer,layers,mode,shots,fd_step,trials,infidelity_mean,infidelity_std,objective_mean,objective_std,nfev_mean,nfev_std,total_evals_mean,nonconverged_pct\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.target,
                r.optimizer,
                r.layers,
                r.mode,
                r.shots,
                r.fd_step,
                r.trials,
                r.infidelity_mean,
                r.infidelity_std,
                r.objective_mean,
                r.objective_std,
                r.nfev_mean,
                r.nfev_std,
                r.total_evals_mean,
                r.nonconverged_pct
            ));
        }
        out
    }
}
