//! QR decomposition engines.
//!
//! Every engine consumes a channel matrix `H` (`n_R × n_T`, `n_R ≥ n_T`) and
//! a received vector `y`, and produces `R` together with `ỹ = Qᴴ·y`. All but
//! [`QrdMethod::Rcpgr`] also form the thin unitary factor `Q`.
//!
//! Engines return the raw factorization; [`canonicalize`] removes the
//! per-row phase freedom so that results from different engines can be
//! compared entry by entry.

mod givens;
mod gram_schmidt;
mod householder;

pub(crate) use givens::{annihilate, finish_with_q};
pub use givens::{givens_params, qrd_givens, qrd_rcpgr, GivensRotation};
pub use gram_schmidt::{qrd_clgs, qrd_stgs};
pub use householder::{house, house_metered, qrd_householder, HouseholderReflector};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, CostLedger, LinalgError, Meter, Unmetered};

/// Norms below this are treated as exact rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QrdError {
    #[error("channel matrix is {rows}x{cols}; need rows >= cols")]
    Shape { rows: usize, cols: usize },
    #[error("received vector has length {found}, expected {expected}")]
    VectorLength { expected: usize, found: usize },
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("rank deficiency detected at column {column} (norm {norm:e})")]
    RankDeficient { column: usize, norm: f64 },
    #[error("degenerate rotation: both entries are zero")]
    DegenerateRotation,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Factorization algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QrdMethod {
    /// Classical Gram-Schmidt (projections against the original columns).
    Clgs,
    /// Stable (modified) Gram-Schmidt.
    Stgs,
    Householder,
    /// Sequential Givens rotations, column by column.
    Givens,
    /// Givens rotations executed round by round from the parallel schedule.
    ParallelGivens,
    /// Givens rotations on `[H y]` without forming `Q`.
    Rcpgr,
}

impl QrdMethod {
    pub const ALL: [QrdMethod; 6] = [
        QrdMethod::Clgs,
        QrdMethod::Stgs,
        QrdMethod::Householder,
        QrdMethod::Givens,
        QrdMethod::ParallelGivens,
        QrdMethod::Rcpgr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QrdMethod::Clgs => "clgs",
            QrdMethod::Stgs => "stgs",
            QrdMethod::Householder => "hh",
            QrdMethod::Givens => "gr",
            QrdMethod::ParallelGivens => "pgr",
            QrdMethod::Rcpgr => "rcpgr",
        }
    }

    /// Whether the engine forms `Q`.
    pub fn forms_q(self) -> bool {
        self != QrdMethod::Rcpgr
    }

    pub(crate) fn run<M: Meter>(self, h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
        validate(h, y)?;
        match self {
            QrdMethod::Clgs => gram_schmidt::clgs(h, y, meter),
            QrdMethod::Stgs => gram_schmidt::stgs(h, y, meter),
            QrdMethod::Householder => householder::householder(h, y, meter),
            QrdMethod::Givens => givens::givens(h, y, meter),
            QrdMethod::ParallelGivens => crate::schedule::pgr(h, y, meter),
            QrdMethod::Rcpgr => givens::rcpgr(h, y, meter),
        }
    }

    /// Runs the engine with a fresh ledger; the result is not canonicalized.
    pub fn factorize_raw(self, h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
        let mut ledger = CostLedger::new();
        let f = self.run(h, y, &mut ledger)?;
        Ok(f.into_factorization(self, ledger))
    }

    /// Metered, canonicalized factorization.
    pub fn factorize(self, h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
        self.factorize_raw(h, y).map(canonicalize)
    }

    /// Canonicalized factorization with an empty ledger.
    pub fn factorize_unmetered(self, h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
        let f = self.run(h, y, &mut Unmetered)?;
        Ok(canonicalize(f.into_factorization(self, CostLedger::new())))
    }
}

impl fmt::Display for QrdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QrdMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "clgs" => Ok(QrdMethod::Clgs),
            "stgs" | "mgs" => Ok(QrdMethod::Stgs),
            "hh" | "householder" => Ok(QrdMethod::Householder),
            "gr" | "givens" => Ok(QrdMethod::Givens),
            "pgr" => Ok(QrdMethod::ParallelGivens),
            "rcpgr" => Ok(QrdMethod::Rcpgr),
            other => Err(format!("unknown QRD method {other:?}")),
        }
    }
}

/// Raw engine output.
#[derive(Debug, Clone)]
pub(crate) struct Factors {
    pub q: Option<ComplexMatrix>,
    pub r: ComplexMatrix,
    pub y_tilde: Vec<Complex64>,
}

impl Factors {
    fn into_factorization(self, method: QrdMethod, ledger: CostLedger) -> QrFactorization {
        QrFactorization {
            q: self.q,
            r: self.r,
            y_tilde: self.y_tilde,
            ledger,
            method,
        }
    }
}

/// `H = Q·R` together with `ỹ = Qᴴ·y` and the cost of computing them.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    /// Thin unitary factor (`n_R × n_T`); absent for RCPGR.
    pub q: Option<ComplexMatrix>,
    /// Upper triangular factor (`n_T × n_T`).
    pub r: ComplexMatrix,
    pub y_tilde: Vec<Complex64>,
    pub ledger: CostLedger,
    pub method: QrdMethod,
}

impl QrFactorization {
    /// `‖H − Q·R‖_max`, if `Q` was formed.
    pub fn reconstruction_error(&self, h: &ComplexMatrix) -> Option<f64> {
        let q = self.q.as_ref()?;
        q.matmul_unmetered(&self.r).ok()?.max_abs_diff(h)
    }

    pub fn orthogonality_error(&self) -> Option<f64> {
        self.q.as_ref().map(ComplexMatrix::orthogonality_error)
    }

    pub fn is_canonical(&self) -> bool {
        (0..self.r.rows()).all(|i| {
            let d = self.r[(i, i)];
            d.im == 0.0 && d.re >= 0.0
        })
    }
}

fn validate(h: &ComplexMatrix, y: &[Complex64]) -> Result<(), QrdError> {
    if h.rows() < h.cols() {
        return Err(QrdError::Shape {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    if y.len() != h.rows() {
        return Err(QrdError::VectorLength {
            expected: h.rows(),
            found: y.len(),
        });
    }
    if !h.is_finite() || y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(QrdError::NonFinite);
    }
    Ok(())
}

/// Rotates each row of `R` (and `ỹ`, and the matching column of `Q`) by the
/// conjugate phase of its diagonal entry so that `diag(R)` is real and
/// nonnegative. `Q·R` is unchanged.
pub fn canonicalize(mut f: QrFactorization) -> QrFactorization {
    let n = f.r.rows();
    for i in 0..n {
        let d = f.r[(i, i)];
        let magnitude = d.norm();
        if magnitude == 0.0 || (d.im == 0.0 && d.re > 0.0) {
            continue;
        }
        let phase = d / magnitude;
        let undo = phase.conj();
        for j in i..f.r.cols() {
            f.r[(i, j)] *= undo;
        }
        f.r[(i, i)] = Complex64::new(magnitude, 0.0);
        f.y_tilde[i] *= undo;
        if let Some(q) = f.q.as_mut() {
            for k in 0..q.rows() {
                q[(k, i)] *= phase;
            }
        }
    }
    f
}
