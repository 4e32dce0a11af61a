//! Layered variational circuit on the joint qubit (x) qumode space.
//!
//! One layer = a three-angle transmon rotation followed by the
//! qubit-conditional displacement Vp(alpha). Five real parameters per layer:
//! `[v_r, v_i, theta_x, theta_y, theta_z]` with alpha = v_r + i*v_i.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{annihilation, basis_state, kron, CMatrix, CVector, FockCutoff};

/// Parameters of a single circuit layer.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LayerParams {
    pub v_r: f64,
    pub v_i: f64,
    pub theta_x: f64,
    pub theta_y: f64,
    pub theta_z: f64,
}

impl LayerParams {
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.v_r, self.v_i)
    }
}

pub const PARAMS_PER_LAYER: usize = 5;

/// Circuit shape: layer count, cutoff, and the initial basis state.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnsatzConfig {
    pub n_layers: usize,
    pub cutoff: FockCutoff,
    pub initial_qubit: usize,
    pub initial_mode: usize,
}

impl AnsatzConfig {
    pub fn new(n_layers: usize, cutoff: FockCutoff) -> Result<Self> {
        if n_layers < 1 {
            return Err(Error::InvalidConfig("n_layers must be >= 1".into()));
        }
        Ok(AnsatzConfig {
            n_layers,
            cutoff,
            initial_qubit: 0,
            initial_mode: 0,
        })
    }

    pub fn n_params(&self) -> usize {
        PARAMS_PER_LAYER * self.n_layers
    }
}

/// Splits a flat parameter vector into per-layer parameters.
pub fn layers_from_flat(flat: &[f64], n_layers: usize) -> Result<Vec<LayerParams>> {
    if flat.len() != PARAMS_PER_LAYER * n_layers {
        return Err(Error::DimensionMismatch {
            expected: PARAMS_PER_LAYER * n_layers,
            got: flat.len(),
        });
    }
    Ok(flat
        .chunks_exact(PARAMS_PER_LAYER)
        .map(|c| LayerParams {
            v_r: c[0],
            v_i: c[1],
            theta_x: c[2],
            theta_y: c[3],
            theta_z: c[4],
        })
        .collect())
}

static ROTATION_BUILDS: AtomicUsize = AtomicUsize::new(0);
static VP_BUILDS: AtomicUsize = AtomicUsize::new(0);

/// (rotation gate builds, Vp gate builds) since process start; test instrumentation.
pub fn gate_build_counts() -> (usize, usize) {
    (
        ROTATION_BUILDS.load(Ordering::Relaxed),
        VP_BUILDS.load(Ordering::Relaxed),
    )
}

/// Displacement amplitudes past this magnitude make the truncation meaningless.
pub const MAX_DISPLACEMENT: f64 = 50.0;

/// Qubit-conditional displacement exp(sigma_z (x) (alpha a^H - alpha* a)):
/// D(alpha) on the qubit-|0> block, D(-alpha) on the qubit-|1> block.
pub fn vp_gate(alpha: Complex64, cutoff: FockCutoff) -> Result<CMatrix> {
    if !alpha.is_finite() || alpha.norm() >= MAX_DISPLACEMENT {
        return Err(Error::DisplacementRange(alpha.norm()));
    }
    VP_BUILDS.fetch_add(1, Ordering::Relaxed);
    let n = cutoff.n_levels();
    let a = annihilation(cutoff);
    // generator of the mode-space displacement; the sigma_z factor flips its sign
    let d = a.adjoint().map(|z| z * alpha) - a.map(|z| z * alpha.conj());
    let disp = crate::linalg::expm_anti_hermitian(&d)?;
    let disp_neg = disp.adjoint();
    let mut u = CMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&disp);
    u.view_mut((n, n), (n, n)).copy_from(&disp_neg);
    Ok(u)
}

fn rx(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(0.0, -s),
            Complex64::new(0.0, -s),
            Complex64::new(c, 0.0),
        ],
    )
}

fn ry(theta: f64) -> DMatrix<Complex64> {
    let (s, c) = (theta / 2.0).sin_cos();
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

fn rz(theta: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(0.0, -theta / 2.0).exp(),
        Complex64::new(0.0, theta / 2.0).exp(),
    ]))
}

/// Transmon rotation (RZ RY RX) (x) I_N, with RX applied first.
pub fn rotation_gate(
    theta_x: f64,
    theta_y: f64,
    theta_z: f64,
    cutoff: FockCutoff,
) -> Result<CMatrix> {
    if !(theta_x.is_finite() && theta_y.is_finite() && theta_z.is_finite()) {
        return Err(Error::InvalidConfig("non-finite rotation angle".into()));
    }
    ROTATION_BUILDS.fetch_add(1, Ordering::Relaxed);
    let qubit = rz(theta_z) * ry(theta_y) * rx(theta_x);
    kron(&qubit, &crate::linalg::identity(cutoff.n_levels()))
}

/// Applies the full layered circuit to the configured initial state.
pub fn apply_ansatz(params: &[LayerParams], cfg: &AnsatzConfig) -> Result<CVector> {
    if params.len() != cfg.n_layers {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_layers,
            got: params.len(),
        });
    }
    let n = cfg.cutoff.n_levels();
    let mut psi = basis_state(2 * n, cfg.initial_qubit * n + cfg.initial_mode);
    for layer in params {
        let rot = rotation_gate(layer.theta_x, layer.theta_y, layer.theta_z, cfg.cutoff)?;
        psi = rot * psi;
        let vp = vp_gate(layer.alpha(), cfg.cutoff)?;
        psi = vp * psi;
    }
    Ok(psi)
}

/// Flat-parameter convenience wrapper around [`apply_ansatz`].
pub fn apply_ansatz_flat(flat: &[f64], cfg: &AnsatzConfig) -> Result<CVector> {
    let layers = layers_from_flat(flat, cfg.n_layers)?;
    apply_ansatz(&layers, cfg)
}

#[cfg(test)]
pub(crate) fn coherent_amplitudes(alpha: Complex64, n_levels: usize) -> Vec<Complex64> {
    // truncated series e^{-|a|^2/2} a^n / sqrt(n!)
    let pref = (-alpha.norm_sqr() / 2.0).exp();
    let mut amps = Vec::with_capacity(n_levels);
    let mut term = Complex64::new(pref, 0.0);
    for n in 0..n_levels {
        if n > 0 {
            term *= alpha / (n as f64).sqrt();
        }
        amps.push(term);
    }
    amps
}
