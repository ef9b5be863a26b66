//! MIMO detectors over QPSK.
//!
//! Linear detectors ([`detect_zf`], [`detect_mmse`]) and exhaustive search
//! ([`detect_ml`]) work on `(H, y)`. The tree detectors ([`detect_sic`],
//! [`detect_sd`], [`detect_qrdm`]) work on a triangularized system
//! `(R, ỹ)` and decide layers from the last one up to the first.

mod constellation;
mod linear;
mod tree;

pub use constellation::{demodulate_index, quantize, quantize_index, ConstellationPoint, BITS_PER_SYMBOL, QPSK};
pub use linear::{back_substitute, detect_mmse, detect_zf};
pub use tree::{detect_ml, detect_ml_capped, detect_qrdm, detect_sd, detect_sic, ML_DEFAULT_CAP};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::qrd::QrdError;

/// Diagonal entries of `R` below this make a layer undecidable.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("layer {layer} is singular (|R_ii| = {magnitude:e})")]
    SingularLayer { layer: usize, magnitude: f64 },
    #[error("no lattice point within radius {radius}")]
    EmptySphere { radius: f64 },
    #[error("search space of {candidates} candidates exceeds the cap of {cap}")]
    SearchTooLarge { candidates: u128, cap: u64 },
    #[error("beam width must be at least 1")]
    InvalidBeam,
    #[error("invalid sphere radius {0}")]
    InvalidRadius(f64),
    #[error("noise variance must be finite and nonnegative, got {0}")]
    InvalidNoiseVariance(f64),
    #[error("system shape mismatch: matrix {rows}x{cols}, vector length {len}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error(transparent)]
    Qrd(#[from] QrdError),
}

/// Decisions of one detector run.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub symbols: Vec<Complex64>,
    /// Constellation indices of `symbols`.
    pub indices: Vec<usize>,
    /// Squared Euclidean cost of the decision in the detector's own domain:
    /// `‖ỹ − R·x̂‖²` for tree detectors, `‖y − H·x̂‖²` otherwise.
    pub metric: f64,
    /// Tree nodes expanded (candidates evaluated for ML).
    pub visited_nodes: u64,
}

impl DetectionResult {
    fn from_indices(indices: Vec<usize>, metric: f64, visited_nodes: u64) -> Self {
        DetectionResult {
            symbols: indices.iter().map(|&k| QPSK[k]).collect(),
            indices,
            metric,
            visited_nodes,
        }
    }
}

/// `‖y − A·x‖²` recomputed from scratch.
pub fn residual_norm_sqr(a: &ComplexMatrix, y: &[Complex64], x: &[Complex64]) -> f64 {
    let ax = a.mat_vec_unmetered(x).expect("caller checked shapes");
    y.iter().zip(&ax).map(|(u, v)| (u - v).norm_sqr()).sum()
}

fn check_system(a: &ComplexMatrix, y: &[Complex64]) -> Result<(), DetectError> {
    if a.rows() != y.len() || a.rows() < a.cols() {
        return Err(DetectError::Shape {
            rows: a.rows(),
            cols: a.cols(),
            len: y.len(),
        });
    }
    Ok(())
}
