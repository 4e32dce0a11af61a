//! Wigner quasi-probability on a phase-space grid from a Fock-basis density
//! matrix, via the stable iterative Laguerre-kernel recurrence.
//!
//! Convention: hbar = 1, x = sqrt(2) Re(alpha), p = sqrt(2) Im(alpha), so
//! the vacuum peaks at W(0,0) = 1/pi and the grid integrates to trace(rho).

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMatrix};

pub const WIGNER_MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    /// Row-major over (x, p): values[ix * p_axis.len() + ip].
    pub values: Vec<f64>,
    pub source: String,
}

impl WignerGrid {
    pub fn value(&self, ix: usize, ip: usize) -> f64 {
        self.values[ix * self.p_axis.len() + ip]
    }

    /// Riemann sum W dx dp; approaches trace(rho) on a wide, fine grid.
    pub fn integral(&self) -> f64 {
        if self.x_axis.len() < 2 || self.p_axis.len() < 2 {
            return 0.0;
        }
        let dx = self.x_axis[1] - self.x_axis[0];
        let dp = self.p_axis[1] - self.p_axis[0];
        self.values.iter().sum::<f64>() * dx * dp
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Uniformly spaced axis of `points` samples on [-range, range].
pub fn symmetric_axis(range: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|i| -range + 2.0 * range * i as f64 / (points - 1) as f64)
        .collect()
}

/// W(x, p) for each grid point. `rho` must be Hermitian and unit trace;
/// asymmetry below 1e-8 is symmetrized away, anything larger is an error.
pub fn wigner(rho: &CMatrix, x_axis: &[f64], p_axis: &[f64]) -> Result<WignerGrid> {
    let n = rho.nrows();
    if n != rho.ncols() || n > WIGNER_MAX_DIM {
        return Err(Error::InvalidConfig(format!(
            "density matrix must be square with dim <= {WIGNER_MAX_DIM}, got {n}x{}",
            rho.ncols()
        )));
    }
    let asymmetry = max_abs(&(rho - rho.adjoint()));
    if asymmetry > 1e-8 {
        return Err(Error::NotHermitian(asymmetry));
    }
    let rho = (rho + rho.adjoint()).scale(0.5);

    let mut values = vec![0.0; x_axis.len() * p_axis.len()];
    let mut w_diag: Vec<Complex64> = vec![Complex64::ZERO; n];
    for (ix, &x) in x_axis.iter().enumerate() {
        for (ip, &p) in p_axis.iter().enumerate() {
            // alpha = (x + i p)/sqrt(2)
            let a = Complex64::new(x, p).unscale(2.0_f64.sqrt());
            let two_a = 2.0 * a;

            // recurrence over Fock-kernel diagonals, vacuum term first
            w_diag[0] = Complex64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
            let mut w = rho[(0, 0)].re * w_diag[0].re;
            for k in 1..n {
                w_diag[k] = two_a * w_diag[k - 1] / (k as f64).sqrt();
                w += 2.0 * (rho[(0, k)] * w_diag[k]).re;
            }
            for m in 1..n {
                let mut prev = w_diag[m];
                w_diag[m] =
                    (two_a.conj() * prev - (m as f64).sqrt() * w_diag[m - 1]) / (m as f64).sqrt();
                w += (rho[(m, m)] * w_diag[m]).re;
                for k in m + 1..n {
                    let next = (two_a.conj() * w_diag[k] - (k as f64).sqrt() * prev)
                        / (m as f64).sqrt();
                    prev = w_diag[k];
                    w_diag[k] = next;
                    w += 2.0 * (rho[(m, k)] * w_diag[k]).re;
                }
            }
            values[ix * p_axis.len() + ip] = w;
        }
    }

    Ok(WignerGrid {
        x_axis: x_axis.to_vec(),
        p_axis: p_axis.to_vec(),
        values,
        source: format!("fock density matrix, dim {n}"),
    })
}

/// CSV export: header comment with the phase-space convention, then
/// `x,p,w` rows in grid-row-major order, 17 significant digits.
pub fn export_grid(grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("# wigner grid, hbar = 1, x = sqrt(2) Re(alpha), p = sqrt(2) Im(alpha)\n");
    out.push_str(&format!("# source: {}\n", grid.source));
    out.push_str("x,p,w\n");
    for (ix, &x) in grid.x_axis.iter().enumerate() {
        for (ip, &p) in grid.p_axis.iter().enumerate() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", x, p, grid.value(ix, ip)));
        }
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

/// Reads back a CSV written by [`export_grid`].
pub fn import_grid(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let mut rows = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let mut parts = line.split(',');
        let mut next = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| Error::Parse {
                    context: path.display().to_string(),
                    message: "short row".into(),
                })?
                .parse()
                .map_err(|e| Error::Parse {
                    context: path.display().to_string(),
                    message: format!("{e}"),
                })
        };
        rows.push((next()?, next()?, next()?));
    }
    Ok(rows)
}
