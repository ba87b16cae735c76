//! Dense small-matrix kernels: matrix exponential and φ-functions.
//!
//! These serve as the projection backend of the Krylov engine and as the
//! brute-force oracle it is checked against. Everything here is a pure
//! function of its inputs.

mod dense;
mod expm;
mod phi;

pub use dense::DenseMatrix;
pub use expm::expm;
pub use phi::{phi_combination_dense, phi_scalars, phi_stack, PhiStack, MAX_PHI_ORDER};

pub(crate) use phi::{combine_with_stack, factorial};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatfunError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has NaN or infinite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("phi order {q} outside 0..={max}")]
    OrderOutOfRange { q: usize, max: usize },
    #[error("scaling {0} outside (0, 1]")]
    InvalidScaling(f64),
    #[error("no input vectors given")]
    EmptyVectorSet,
    #[error("singular matrix in linear solve")]
    Singular,
}
