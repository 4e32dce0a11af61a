//! Swap-test objective: fidelity between the learned qumode state and the
//! target, mapped to the ancilla P(|0>) and then to the infidelity cost
//! 1 - sqrt(2 (p0 - 1/2)), with ideal and shot-sampled evaluation paths.
//!
//! The learned register may be entangled with the ansatz transmon, so the
//! fidelity is taken against the reduced qumode state:
//! F = <phi| rho_mode |phi> = sum_q |<phi|psi_q>|^2 over the qubit blocks.
//! The production path computes p0 analytically and samples a Binomial; the
//! explicit controlled-SWAP circuit lives on as [`swap_circuit_oracle`].

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::ansatz::{apply_ansatz_flat, AnsatzConfig};
use crate::cost::{CostFn, Purpose};
use crate::error::{Error, Result};
use crate::linalg::{identity, kron, CMatrix, FockCutoff};
use crate::target::TargetState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Ideal,
    Sampled,
}

impl std::fmt::Display for EvalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalMode::Ideal => write!(f, "ideal"),
            EvalMode::Sampled => write!(f, "sampled"),
        }
    }
}

pub const DEFAULT_SHOTS: u64 = 6144;
pub const DEFAULT_CLAMP_FLOOR: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct ObjectiveConfig {
    pub mode: EvalMode,
    pub shots: u64,
    pub clamp_floor: f64,
    pub ansatz: AnsatzConfig,
    pub target: TargetState,
}

impl ObjectiveConfig {
    pub fn ideal(ansatz: AnsatzConfig, target: TargetState) -> Self {
        ObjectiveConfig {
            mode: EvalMode::Ideal,
            shots: DEFAULT_SHOTS,
            clamp_floor: DEFAULT_CLAMP_FLOOR,
            ansatz,
            target,
        }
    }

    pub fn sampled(ansatz: AnsatzConfig, target: TargetState, shots: u64) -> Self {
        ObjectiveConfig {
            mode: EvalMode::Sampled,
            shots,
            clamp_floor: DEFAULT_CLAMP_FLOOR,
            ansatz,
            target,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.target.n_levels() != self.ansatz.cutoff.n_levels() {
            return Err(Error::DimensionMismatch {
                expected: self.ansatz.cutoff.n_levels(),
                got: self.target.n_levels(),
            });
        }
        if self.mode == EvalMode::Sampled && self.shots < 1 {
            return Err(Error::InvalidConfig("shots must be >= 1 in sampled mode".into()));
        }
        if !(0.0..=1.0).contains(&self.clamp_floor) {
            return Err(Error::InvalidConfig("clamp_floor must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// One logged objective call.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EvalRecord {
    pub call_index: usize,
    pub params: Vec<f64>,
    pub p0: f64,
    pub objective: f64,
    /// 1 - sqrt(F) from the ideal path, recorded in both modes.
    pub true_infidelity: f64,
    pub purpose: Purpose,
}

/// F = <phi| rho_mode |phi> for the reduced qumode state of the ansatz output.
pub fn fidelity(params: &[f64], cfg: &ObjectiveConfig) -> Result<f64> {
    cfg.validate()?;
    let psi = apply_ansatz_flat(params, &cfg.ansatz)?;
    let n = cfg.ansatz.cutoff.n_levels();
    let phi = cfg.target.amplitudes();
    let mut f = 0.0;
    for q in 0..2 {
        let overlap: Complex64 = (0..n).map(|k| phi[k].conj() * psi[q * n + k]).sum();
        f += overlap.norm_sqr();
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Ancilla ground-state probability of the swap test: 0.5 + 0.5 F.
pub fn swap_test_p0(fid: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&fid) {
        return Err(Error::FidelityRange(fid));
    }
    Ok(0.5 + 0.5 * fid.clamp(0.0, 1.0))
}

/// The optimized cost: 1 - sqrt(2 (max(p0, floor) - 1/2)). With floor = 0.5
/// a sampled p0 below one half maps to cost 1.
pub fn objective_from_p0(p0: f64, clamp_floor: f64) -> f64 {
    let clamped = p0.max(clamp_floor).min(1.0);
    1.0 - (2.0 * (clamped - 0.5)).max(0.0).sqrt()
}

/// Logged swap-test objective; owns its evaluation log and, in sampled mode,
/// its rng stream. One instance per trial.
pub struct SwapTestObjective<R: Rng> {
    cfg: ObjectiveConfig,
    rng: Option<R>,
    log: Vec<EvalRecord>,
}

impl<R: Rng> SwapTestObjective<R> {
    pub fn new(cfg: ObjectiveConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode == EvalMode::Sampled {
            return Err(Error::MissingRng);
        }
        Ok(SwapTestObjective { cfg, rng: None, log: Vec::new() })
    }

    pub fn with_rng(cfg: ObjectiveConfig, rng: R) -> Result<Self> {
        cfg.validate()?;
        Ok(SwapTestObjective { cfg, rng: Some(rng), log: Vec::new() })
    }

    pub fn config(&self) -> &ObjectiveConfig {
        &self.cfg
    }

    pub fn log(&self) -> &[EvalRecord] {
        &self.log
    }

    pub fn evaluate(&mut self, params: &[f64], purpose: Purpose) -> Result<EvalRecord> {
        // a line-search or simplex step past the displacement window sees the
        // worst-case cost and backs off; the trial survives as nonconverged
        let fid = match fidelity(params, &self.cfg) {
            Ok(f) => f,
            Err(Error::DisplacementRange(_)) => {
                let record = EvalRecord {
                    call_index: self.log.len(),
                    params: params.to_vec(),
                    p0: 0.5,
                    objective: 1.0,
                    true_infidelity: 1.0,
                    purpose,
                };
                self.log.push(record.clone());
                return Ok(record);
            }
            Err(e) => return Err(e),
        };
        let p0_exact = swap_test_p0(fid)?;
        let p0 = match self.cfg.mode {
            EvalMode::Ideal => p0_exact,
            EvalMode::Sampled => {
                let rng = self.rng.as_mut().ok_or(Error::MissingRng)?;
                let dist = Binomial::new(self.cfg.shots, p0_exact)
                    .map_err(|e| Error::InvalidConfig(format!("binomial: {e}")))?;
                dist.sample(rng) as f64 / self.cfg.shots as f64
            }
        };
        let record = EvalRecord {
            call_index: self.log.len(),
            params: params.to_vec(),
            p0,
            objective: objective_from_p0(p0, self.cfg.clamp_floor),
            true_infidelity: 1.0 - fid.sqrt(),
            purpose,
        };
        self.log.push(record.clone());
        Ok(record)
    }

    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        write_eval_log_csv(&self.log, path)
    }
}

impl<R: Rng> CostFn for SwapTestObjective<R> {
    fn eval(&mut self, x: &[f64], purpose: Purpose) -> Result<f64> {
        Ok(self.evaluate(x, purpose)?.objective)
    }
}

pub fn write_eval_log_csv(log: &[EvalRecord], path: &Path) -> Result<()> {
    let mut out = String::from("call_index,purpose,p0,objective,true_infidelity\n");
    for r in log {
        out.push_str(&format!(
            "{},{},{:.17e},{:.17e},{:.17e}\n",
            r.call_index, r.purpose, r.p0, r.objective, r.true_infidelity
        ));
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Cutoff guard for the explicit circuit oracle (dimension grows as 2 N^2).
pub const ORACLE_MAX_CUTOFF: usize = 8;

/// Full controlled-SWAP circuit between two pure qumode states, built
/// explicitly: H on the ancilla, ancilla-controlled SWAP of the two modes,
/// H again, then P(ancilla = 0). Verification-scale only.
pub fn swap_circuit_oracle(state_a: &TargetState, state_b: &TargetState) -> Result<f64> {
    let n = state_a.n_levels();
    if state_b.n_levels() != n {
        return Err(Error::DimensionMismatch { expected: n, got: state_b.n_levels() });
    }
    if n > ORACLE_MAX_CUTOFF {
        return Err(Error::OracleCutoff { max: ORACLE_MAX_CUTOFF, got: n });
    }
    let _ = FockCutoff::new(n)?;

    let nn = n * n;
    // |0>_anc (x) |a> (x) |b>
    let mut psi = nalgebra::DVector::zeros(2 * nn);
    for (i, &ai) in state_a.amplitudes().iter().enumerate() {
        for (j, &bj) in state_b.amplitudes().iter().enumerate() {
            psi[i * n + j] = ai * bj;
        }
    }
    let h = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ],
    )
    .unscale(2.0_f64.sqrt());
    let h_full = kron(&h, &identity(nn))?;

    // controlled swap: identity on the ancilla-0 block, mode permutation on the 1 block
    let mut cswap = CMatrix::zeros(2 * nn, 2 * nn);
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            cswap[(col, col)] = Complex64::ONE;
            cswap[(nn + j * n + i, nn + col)] = Complex64::ONE;
        }
    }

    let out = &h_full * (&cswap * (&h_full * psi));
    let p0: f64 = (0..nn).map(|k| out[k].norm_sqr()).sum();
    Ok(p0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::coherent_amplitudes;
    use crate::target::{load_explicit_target, make_gaussian_target, TargetSpec};
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn cut10() -> FockCutoff {
        FockCutoff::new(10).unwrap()
    }

    fn vacuum_target(n: usize) -> TargetState {
        let mut v = vec![Complex64::ZERO; n];
        v[0] = Complex64::ONE;
        load_explicit_target(&v, FockCutoff::new(n).unwrap()).unwrap()
    }

    fn fock_target(n: usize, k: usize) -> TargetState {
        let mut v = vec![Complex64::ZERO; n];
        v[k] = Complex64::ONE;
        load_explicit_target(&v, FockCutoff::new(n).unwrap()).unwrap()
    }

    fn ideal_cfg(layers: usize, target: TargetState) -> ObjectiveConfig {
        ObjectiveConfig::ideal(AnsatzConfig::new(layers, cut10()).unwrap(), target)
    }

    #[test]
    fn fidelity_identity_circuit_on_vacuum() {
        let cfg = ideal_cfg(1, vacuum_target(10));
        let f = fidelity(&[0.0; 5], &cfg).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_coherent_vs_vacuum_is_exp_minus_one() {
        // |<0|coherent(1)>|^2 = e^{-1}; the coherent-series oracle fixes
        // the truncation error bound.
        let cfg = ideal_cfg(1, vacuum_target(10));
        let f = fidelity(&[1.0, 0.0, 0.0, 0.0, 0.0], &cfg).unwrap();
        let oracle = coherent_amplitudes(Complex64::ONE, 10)[0].norm_sqr();
        assert_abs_diff_eq!(f, (-1.0_f64).exp(), epsilon = 1e-5);
        assert_abs_diff_eq!(f, oracle, epsilon = 1e-9);
    }

    #[test]
    fn fidelity_orthogonal_target() {
        let cfg = ideal_cfg(1, fock_target(10, 1));
        let f = fidelity(&[0.0; 5], &cfg).unwrap();
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let cfg = ObjectiveConfig::ideal(
            AnsatzConfig::new(1, cut10()).unwrap(),
            vacuum_target(8),
        );
        assert!(fidelity(&[0.0; 5], &cfg).is_err());
    }

    #[test]
    fn swap_test_p0_values() {
        assert_abs_diff_eq!(swap_test_p0(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(swap_test_p0(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(swap_test_p0(0.36).unwrap(), 0.68);
        assert!(swap_test_p0(1.5).is_err());
        assert!(swap_test_p0(-0.1).is_err());
    }

    #[test]
    fn objective_from_p0_values() {
        assert_abs_diff_eq!(objective_from_p0(1.0, 0.5), 0.0);
        assert_abs_diff_eq!(objective_from_p0(0.5, 0.5), 1.0);
        assert_abs_diff_eq!(objective_from_p0(0.875, 0.5), 1.0 - 0.75_f64.sqrt(), epsilon = 1e-15);
        // below-floor sampled outcomes clamp to cost 1
        assert_abs_diff_eq!(objective_from_p0(0.3, 0.5), 1.0);
    }

    #[test]
    fn objective_monotone_and_bounded() {
        let mut prev = f64::INFINITY;
        for i in 0..=1000 {
            let p0 = i as f64 / 1000.0;
            let obj = objective_from_p0(p0, 0.5);
            assert!((0.0..=1.0).contains(&obj));
            assert!(obj <= prev + 1e-15);
            prev = obj;
        }
    }

    #[test]
    fn ideal_evaluate_is_deterministic() {
        let cfg = ideal_cfg(1, vacuum_target(10));
        let mut obj = SwapTestObjective::<ChaCha8Rng>::new(cfg).unwrap();
        let params = [0.3, -0.2, 0.5, 0.1, 0.9];
        let a = obj.evaluate(&params, Purpose::Objective).unwrap();
        let b = obj.evaluate(&params, Purpose::Objective).unwrap();
        assert_eq!(a.p0, b.p0);
        assert_eq!(a.objective, b.objective);
        assert_eq!(b.call_index, 1);
    }

    #[test]
    fn ideal_zero_params_vacuum_gives_zero_objective() {
        let cfg = ideal_cfg(1, vacuum_target(10));
        let mut obj = SwapTestObjective::<ChaCha8Rng>::new(cfg).unwrap();
        let r = obj.evaluate(&[0.0; 5], Purpose::Objective).unwrap();
        assert_abs_diff_eq!(r.objective, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.true_infidelity, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn sampled_mode_requires_rng() {
        let cfg = ObjectiveConfig::sampled(
            AnsatzConfig::new(1, cut10()).unwrap(),
            vacuum_target(10),
            6144,
        );
        assert!(matches!(
            SwapTestObjective::<ChaCha8Rng>::new(cfg),
            Err(Error::MissingRng)
        ));
    }

    #[test]
    fn sampled_full_fidelity_is_degenerate() {
        let cfg = ObjectiveConfig::sampled(
            AnsatzConfig::new(1, cut10()).unwrap(),
            vacuum_target(10),
            512,
        );
        let mut obj =
            SwapTestObjective::with_rng(cfg, ChaCha8Rng::seed_from_u64(3)).unwrap();
        let r = obj.evaluate(&[0.0; 5], Purpose::Objective).unwrap();
        assert_eq!(r.p0, 1.0);
        assert_abs_diff_eq!(r.objective, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn sampled_orthogonal_state_statistics() {
        // F = 0 => p0 = 0.5; Monte-Carlo mean close to 0.5, clamped
        // objective puts mass at exactly 1.
        let cfg = ObjectiveConfig::sampled(
            AnsatzConfig::new(1, cut10()).unwrap(),
            fock_target(10, 1),
            6144,
        );
        let mut obj =
            SwapTestObjective::with_rng(cfg, ChaCha8Rng::seed_from_u64(4)).unwrap();
        let mut sum = 0.0;
        let mut clamped = 0usize;
        let draws = 10_000;
        for _ in 0..draws {
            let r = obj.evaluate(&[0.0; 5], Purpose::Objective).unwrap();
            sum += r.p0;
            if r.objective == 1.0 {
                clamped += 1;
            }
        }
        let mean = sum / draws as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean p0 = {mean}");
        assert!(clamped > draws / 3, "clamped {clamped} of {draws}");
    }

    #[test]
    fn true_infidelity_matches_ideal_fidelity() {
        let cfg = ObjectiveConfig::sampled(
            AnsatzConfig::new(2, cut10()).unwrap(),
            make_gaussian_target(0.0, 0.75, cut10()).unwrap(),
            2048,
        );
        let check_cfg = ObjectiveConfig { mode: EvalMode::Ideal, ..cfg.clone() };
        let mut obj =
            SwapTestObjective::with_rng(cfg, ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let params: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = obj.evaluate(&params, Purpose::Objective).unwrap();
            let f = fidelity(&params, &check_cfg).unwrap();
            assert_abs_diff_eq!(r.true_infidelity, 1.0 - f.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn oracle_identical_and_orthogonal_states() {
        let a = vacuum_target(4);
        assert_abs_diff_eq!(swap_circuit_oracle(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let b = fock_target(4, 1);
        assert_abs_diff_eq!(swap_circuit_oracle(&a, &b).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn oracle_half_overlap() {
        let a = vacuum_target(4);
        let mut v = vec![Complex64::ZERO; 4];
        v[0] = Complex64::ONE;
        v[1] = Complex64::ONE;
        let b = load_explicit_target(&v, FockCutoff::new(4).unwrap()).unwrap();
        assert_abs_diff_eq!(swap_circuit_oracle(&a, &b).unwrap(), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn oracle_cutoff_guard() {
        let spec = TargetSpec::Gaussian { mean: 2.0, std: 3.0, cutoff: 12 };
        let t = spec.resolve().unwrap();
        assert!(matches!(
            swap_circuit_oracle(&t, &t),
            Err(Error::OracleCutoff { .. })
        ));
    }

    #[test]
    fn oracle_matches_analytic_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cut = FockCutoff::new(4).unwrap();
        for _ in 0..100 {
            let rand_state = |rng: &mut ChaCha8Rng| {
                let v: Vec<Complex64> = (0..4)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                load_explicit_target(&v, cut).unwrap()
            };
            let a = rand_state(&mut rng);
            let b = rand_state(&mut rng);
            let overlap: Complex64 = a
                .amplitudes()
                .iter()
                .zip(b.amplitudes().iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            let analytic = swap_test_p0(overlap.norm_sqr()).unwrap();
            let circuit = swap_circuit_oracle(&a, &b).unwrap();
            assert!((analytic - circuit).abs() <= 1e-10);
        }
    }

    #[test]
    fn log_csv_format() {
        let cfg = ideal_cfg(1, vacuum_target(10));
        let mut obj = SwapTestObjective::<ChaCha8Rng>::new(cfg).unwrap();
        obj.evaluate(&[0.0; 5], Purpose::Objective).unwrap();
        obj.evaluate(&[0.1; 5], Purpose::GradientProbe).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.csv");
        obj.write_log_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "call_index,purpose,p0,objective,true_infidelity");
        assert!(lines.next().unwrap().starts_with("0,objective,"));
        assert!(lines.next().unwrap().starts_with("1,gradient_probe,"));
    }
}
