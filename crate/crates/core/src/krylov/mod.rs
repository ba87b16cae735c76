//! Krylov evaluation of simultaneous φ-function linear combinations
//! `Σ_k φ_k(ρ_i M) ρ_i^k v_k` for several scalings `ρ_i` sharing one operator
//! and one vector set.

mod arnoldi;
mod diagonal;
mod operator;
mod phipm;

pub use arnoldi::{arnoldi_iom, ArnoldiResult};
pub use diagonal::diagonal_fast_path;
pub use operator::{CsrMatrix, DiagonalOperator, LinearOperator, ScaledOperator, Structure};
pub use phipm::{evaluate_combination, ControllerEvent, KrylovStats, PhiCombinationResult, PhiCombinationTask};

use crate::matfun::MatfunError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KrylovError {
    #[error("seed vector is zero")]
    DegenerateSeed,
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not diagonal")]
    NotDiagonal,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("no convergence after {attempts} sub-step attempts at tau = {tau}; last events: {trace:?}")]
    NoConvergence { tau: f64, attempts: usize, trace: Vec<ControllerEvent> },
    #[error(transparent)]
    Matfun(#[from] MatfunError),
}
