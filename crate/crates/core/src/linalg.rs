//! Dense complex linear algebra and truncated bosonic operators.
//!
//! Everything here is a pure function; matrices are plain `DMatrix<Complex64>`
//! values and freely shareable across threads. Dimensions stay small
//! (2 x cutoff <= 128 in every experiment) so there is no sparse path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest dimension `kron` will produce; anything bigger is a misconfiguration.
pub const MAX_KRON_DIM: usize = 4096;

/// Truncation dimension of the qumode Hilbert space (Fock levels 0..n_levels-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(n_levels: usize) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be >= 2, got {n_levels}"
            )));
        }
        Ok(FockCutoff(n_levels))
    }

    pub fn n_levels(&self) -> usize {
        self.0
    }
}

impl std::fmt::Display for FockCutoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Truncated annihilation operator: entry [n-1, n] = sqrt(n).
pub fn annihilation(cutoff: FockCutoff) -> CMatrix {
    let n = cutoff.n_levels();
    CMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    })
}

/// Truncated creation operator, the adjoint of [`annihilation`].
pub fn creation(cutoff: FockCutoff) -> CMatrix {
    annihilation(cutoff).adjoint()
}

/// Kronecker product with an overflow guard.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    let dim = rows.max(cols);
    if dim > MAX_KRON_DIM {
        return Err(Error::DimensionOverflow(dim, MAX_KRON_DIM));
    }
    Ok(a.kronecker(b))
}

/// Fock basis column vector |n> in a `dim`-level space.
pub fn basis_state(dim: usize, n: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[n] = Complex64::ONE;
    v
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |A - B| over entries.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

/// ||U^H U - I||_max; zero for an exactly unitary matrix.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

/// exp(G) for an anti-Hermitian generator G, via the Hermitian
/// eigendecomposition of H = -iG: exp(G) = Q diag(e^{i lambda}) Q^H.
pub fn expm_anti_hermitian(g: &CMatrix) -> Result<CMatrix> {
    let defect = max_abs(&(g + g.adjoint()));
    if defect > 1e-8 {
        return Err(Error::NotAntiHermitian(defect));
    }
    let h = g.map(|z| z * Complex64::new(0.0, -1.0));
    let eig = h.symmetric_eigen();
    let phases = CVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(0.0, l).exp()),
    );
    let q = eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(scaled * q.adjoint())
}

/// Reduced qumode density matrix of a joint qubit (x) mode state
/// (index convention q*N + n, qubit first).
pub fn partial_trace_qubit(psi: &CVector, cutoff: FockCutoff) -> Result<CMatrix> {
    let n = cutoff.n_levels();
    if psi.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: psi.len(),
        });
    }
    let block0 = psi.rows(0, n).into_owned();
    let block1 = psi.rows(n, n).into_owned();
    Ok(&block0 * block0.adjoint() + &block1 * block1.adjoint())
}
