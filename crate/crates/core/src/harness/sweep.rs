//! Grid sweeps over (target, optimizer, layers, mode, shots, fd_step) cells
//! with a resumable JSONL trial archive and atomic output files.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::FockCutoff;
use crate::objective::{EvalMode, DEFAULT_SHOTS};
use crate::optimize::{
    OptimizerKind, OptimizerSpec, DEFAULT_FD_STEP_IDEAL, DEFAULT_FD_STEP_SAMPLED,
};
use crate::target::{load_target_file, TargetSpec};

use super::report::emit_report;
use super::{
    aggregate_cell, run_cell, BenchTable, ExperimentConfig, InitRanges, TrialResult,
    DEFAULT_CONVERGENCE_THRESHOLD, DEFAULT_TRIALS, NELDER_MEAD_SAMPLED_MAX_FEVALS,
};

fn default_name() -> String {
    "sweep".into()
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_cutoff() -> usize {
    10
}
fn default_threshold() -> f64 {
    DEFAULT_CONVERGENCE_THRESHOLD
}
fn default_modes() -> Vec<String> {
    vec!["ideal".into()]
}
fn default_shots() -> Vec<u64> {
    vec![DEFAULT_SHOTS]
}
fn default_layers() -> Vec<usize> {
    vec![1]
}
fn default_spsa_iterations() -> usize {
    1000
}
fn default_cobyla_iterations() -> usize {
    1000
}
fn default_nm_cap() -> usize {
    NELDER_MEAD_SAMPLED_MAX_FEVALS
}

/// Declarative sweep grid, loadable from TOML. Every field has a default so
/// minimal configs stay minimal; the resolved form is echoed into the output
/// directory for provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_threshold")]
    pub convergence_threshold: f64,
    pub targets: Vec<String>,
    pub optimizers: Vec<String>,
    #[serde(default = "default_layers")]
    pub layers: Vec<usize>,
    /// "ideal" and/or "sampled".
    #[serde(default = "default_modes")]
    pub modes: Vec<String>,
    /// Shot counts; applies to sampled cells only.
    #[serde(default = "default_shots")]
    pub shots: Vec<u64>,
    /// Finite-difference steps for cg / l-bfgs; empty means the per-mode
    /// default (0.03 ideal, 0.08 sampled).
    #[serde(default)]
    pub fd_steps: Vec<f64>,
    #[serde(default)]
    pub record_traces: bool,
    #[serde(default = "default_spsa_iterations")]
    pub spsa_iterations: usize,
    #[serde(default = "default_cobyla_iterations")]
    pub cobyla_iterations: usize,
    /// Evaluation cap for Nelder-Mead in sampled mode.
    #[serde(default = "default_nm_cap")]
    pub nm_sampled_max_fevals: usize,
    #[serde(default)]
    pub init: Option<InitRanges>,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            context: "sweep config".into(),
            message: format!("{e}"),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_toml_str(&text)
    }

    /// Expands the grid into cells, in deterministic grid order:
    /// targets x layers x optimizers x modes x shots x fd_steps.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        if self.targets.is_empty() || self.optimizers.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one target and one optimizer".into(),
            ));
        }
        let mut cells = Vec::new();
        for target_str in &self.targets {
            let target = parse_target(target_str, self.cutoff)?;
            for &layers in &self.layers {
                for opt_str in &self.optimizers {
                    let kind = OptimizerKind::parse(opt_str)?;
                    for mode_str in &self.modes {
                        let mode = parse_mode(mode_str)?;
                        let shots_axis: Vec<u64> = match mode {
                            EvalMode::Ideal => vec![0],
                            EvalMode::Sampled => self.shots.clone(),
                        };
                        let fd_axis: Vec<Option<f64>> = if self.fd_steps.is_empty() {
                            vec![None]
                        } else {
                            self.fd_steps.iter().copied().map(Some).collect()
                        };
                        for &shots in &shots_axis {
                            for &fd in &fd_axis {
                                let optimizer = self.build_spec(kind, mode, fd);
                                let mut cfg = ExperimentConfig::new(
                                    target.clone(),
                                    optimizer,
                                    layers,
                                    mode,
                                );
                                cfg.shots = if shots == 0 { DEFAULT_SHOTS } else { shots };
                                cfg.trials = self.trials;
                                cfg.base_seed = self.base_seed;
                                cfg.convergence_threshold = self.convergence_threshold;
                                cfg.record_trace = self.record_traces;
                                if let Some(init) = self.init {
                                    cfg.init_ranges = init;
                                }
                                cells.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        Ok(cells)
    }

    fn build_spec(&self, kind: OptimizerKind, mode: EvalMode, fd: Option<f64>) -> OptimizerSpec {
        let mut spec = OptimizerSpec::new(kind);
        spec.fd_step = fd.unwrap_or(match mode {
            EvalMode::Ideal => DEFAULT_FD_STEP_IDEAL,
            EvalMode::Sampled => DEFAULT_FD_STEP_SAMPLED,
        });
        match kind {
            OptimizerKind::Spsa => spec.max_iterations = self.spsa_iterations,
            OptimizerKind::Cobyla => spec.max_iterations = self.cobyla_iterations,
            OptimizerKind::NelderMead if mode == EvalMode::Sampled => {
                spec.max_fevals = Some(self.nm_sampled_max_fevals);
            }
            _ => {}
        }
        spec
    }
}

fn parse_mode(s: &str) -> Result<EvalMode> {
    match s.to_ascii_lowercase().as_str() {
        "ideal" => Ok(EvalMode::Ideal),
        "sampled" => Ok(EvalMode::Sampled),
        other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
    }
}

/// Target shorthand used in sweep configs and on the command line:
/// `local-gaussian`, `gaussian`, `gaussian:MEAN,STD`, `non-gaussian`,
/// `vacuum`, `fock:N`, `file:PATH`.
pub fn parse_target(s: &str, cutoff: usize) -> Result<TargetSpec> {
    let bad = |msg: String| Error::InvalidConfig(msg);
    match s {
        "local-gaussian" | "local_gaussian" => Ok(TargetSpec::LocalGaussian { cutoff }),
        "gaussian" => Ok(TargetSpec::Gaussian { mean: 5.0, std: 1.0, cutoff }),
        "non-gaussian" | "non_gaussian" => Ok(TargetSpec::NonGaussianPreset { cutoff }),
        "vacuum" => fock_spec(0, cutoff),
        _ => {
            if let Some(rest) = s.strip_prefix("gaussian:") {
                let (m, sd) = rest
                    .split_once(',')
                    .ok_or_else(|| bad(format!("expected gaussian:MEAN,STD, got {s:?}")))?;
                let mean: f64 = m.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
                let std: f64 = sd.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
                Ok(TargetSpec::Gaussian { mean, std, cutoff })
            } else if let Some(rest) = s.strip_prefix("fock:") {
                let n: usize = rest.trim().parse().map_err(|e| bad(format!("{s:?}: {e}")))?;
                fock_spec(n, cutoff)
            } else if let Some(path) = s.strip_prefix("file:") {
                let state = load_target_file(Path::new(path), FockCutoff::new(cutoff)?)?;
                let (re, im): (Vec<f64>, Vec<f64>) =
                    state.amplitudes().iter().map(|z: &Complex64| (z.re, z.im)).unzip();
                Ok(TargetSpec::Explicit { re, im, cutoff })
            } else {
                Err(bad(format!("unknown target {s:?}")))
            }
        }
    }
}

fn fock_spec(n: usize, cutoff: usize) -> Result<TargetSpec> {
    if n >= cutoff {
        return Err(Error::InvalidConfig(format!(
            "fock level {n} out of range for cutoff {cutoff}"
        )));
    }
    let mut re = vec![0.0; cutoff];
    re[n] = 1.0;
    Ok(TargetSpec::Explicit { re, im: vec![0.0; cutoff], cutoff })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub table: BenchTable,
    pub trials: Vec<TrialResult>,
    pub cells_run: usize,
    pub cells_skipped: usize,
    pub aggregate_path: PathBuf,
    pub archive_path: PathBuf,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, contents)
        .map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::io(format!("renaming into {}", path.display()), e))
}

fn load_archive(path: &Path) -> Result<HashMap<String, Vec<TrialResult>>> {
    let mut by_cell: HashMap<String, Vec<TrialResult>> = HashMap::new();
    if !path.exists() {
        return Ok(by_cell);
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: TrialResult = serde_json::from_str(line).map_err(|e| Error::Parse {
            context: format!("{}:{}", path.display(), i + 1),
            message: format!("{e}"),
        })?;
        by_cell.entry(t.cell.clone()).or_default().push(t);
    }
    Ok(by_cell)
}

/// Runs (or resumes) a sweep into `out_dir`, producing `trials.jsonl`,
/// `aggregate.csv`, `resolved_config.toml`, and markdown tables. With
/// `resume`, cells whose full trial set is already archived are not re-run;
/// the aggregate is rebuilt from scratch either way, so a resumed sweep
/// yields byte-identical outputs to a fresh one.
pub fn run_sweep(
    config: &SweepConfig,
    out_dir: &Path,
    resume: bool,
    parallelism: Option<usize>,
) -> Result<SweepOutcome> {
    let cells = config.expand()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let archive_path = out_dir.join("trials.jsonl");
    let aggregate_path = out_dir.join("aggregate.csv");

    let mut archive = if resume { load_archive(&archive_path)? } else { HashMap::new() };
    for trials in archive.values_mut() {
        trials.sort_by_key(|t| t.trial_index);
        trials.dedup_by_key(|t| t.trial_index);
    }

    let pool = match parallelism {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
        ),
        None => None,
    };

    let mut table = BenchTable::default();
    let mut all_trials: Vec<TrialResult> = Vec::new();
    let mut cells_run = 0;
    let mut cells_skipped = 0;
    for cfg in &cells {
        let key = cfg.cell_key();
        let cached = archive.get(&key).filter(|t| t.len() >= cfg.trials);
        let (row, trials) = match cached {
            Some(t) => {
                cells_skipped += 1;
                let kept: Vec<TrialResult> = t.iter().take(cfg.trials).cloned().collect();
                (aggregate_cell(cfg, &kept)?, kept)
            }
            None => {
                cells_run += 1;
                match &pool {
                    Some(p) => p.install(|| run_cell(cfg))?,
                    None => run_cell(cfg)?,
                }
            }
        };
        table.rows.push(row);
        all_trials.extend(trials);
    }

    let mut jsonl = String::new();
    for t in &all_trials {
        jsonl.push_str(&serde_json::to_string(t).map_err(|e| Error::Parse {
            context: "trial archive".into(),
            message: format!("{e}"),
        })?);
        jsonl.push('\n');
    }
    write_atomic(&archive_path, &jsonl)?;
    write_atomic(&aggregate_path, &table.to_csv())?;
    let resolved = toml::to_string_pretty(config).map_err(|e| Error::Parse {
        context: "resolved config".into(),
        message: format!("{e}"),
    })?;
    write_atomic(&out_dir.join("resolved_config.toml"), &resolved)?;
    emit_report(&table, &all_trials, out_dir)?;

    Ok(SweepOutcome {
        table,
        trials: all_trials,
        cells_run,
        cells_skipped,
        aggregate_path,
        archive_path,
    })
}
