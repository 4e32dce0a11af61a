//! Simulator and benchmark harness for variational qumode state preparation
//! on a qubit-coupled bosonic mode: truncated Fock-space linear algebra, the
//! layered rotation + conditional-displacement ansatz, the swap-test
//! infidelity objective (ideal and shot-sampled), six black-box optimizers
//! with exact evaluation accounting, Wigner-function export, and a
//! reproducible sweep harness.

pub mod ansatz;
pub mod cost;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod optimize;
pub mod target;
pub mod wigner;

pub use cost::{CostFn, Purpose};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, FockCutoff};
pub use optimize::{OptResult, OptimizerKind, OptimizerSpec};
pub use target::{TargetSpec, TargetState};
