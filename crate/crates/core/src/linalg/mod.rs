//! Complex matrices and metered arithmetic.

mod cost;
mod matrix;
pub mod text;

pub use cost::{
    abs2, cdiv_real, cmul, cmul_conj, cscale, rdiv, rmul, rsqrt, CostLedger, Meter, OpCounts, RealOp, Stage, Unmetered,
    DIV_WEIGHT, SQRT_WEIGHT,
};
pub use matrix::{
    column_norm, hermitian_mat_vec, mat_vec, matmul, metered_mul, metered_mul_real, ComplexMatrix, ComplexScalar,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix data has {found} entries, expected {expected}")]
    DataLength { expected: usize, found: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("index out of range")]
    IndexOutOfRange,
    #[error("numeric overflow produced a non-finite value")]
    Overflow,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
