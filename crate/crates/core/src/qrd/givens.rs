use num_complex::Complex64;

use super::{Factors, QrFactorization, QrdError, QrdMethod, RANK_TOLERANCE};
use crate::linalg::{abs2, cdiv_real, cmul, column_norm, hermitian_mat_vec, rsqrt, ComplexMatrix, Meter, Stage};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unitary `G = (1/r)·[conj(a), conj(b); −b, a]` with `G·(a, b)ᵀ = (r, 0)ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub g: [[Complex64; 2]; 2],
    pub r: f64,
}

impl GivensRotation {
    /// Forms `G` from `(a, b)` and their precomputed norm `r`.
    ///
    /// The entries `conj(a)/r`, `conj(b)/r` and `−b/r` each cost a
    /// complex/real division (6 real_div in total); `a/r` is the conjugate
    /// of the first.
    fn from_norm<M: Meter>(a: Complex64, b: Complex64, r: f64, meter: &mut M) -> Self {
        let g00 = cdiv_real(a.conj(), r, meter);
        let g01 = cdiv_real(b.conj(), r, meter);
        let g10 = -cdiv_real(b, r, meter);
        GivensRotation {
            g: [[g00, g01], [g10, g00.conj()]],
            r,
        }
    }

    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let [[g00, g01], [g10, g11]] = self.g;
        (g00 * a + g01 * b, g10 * a + g11 * b)
    }

    /// `G·[row_p; row_t]` over `cols`; 16 real_mul per column.
    fn rotate_rows<M: Meter>(
        &self,
        w: &mut ComplexMatrix,
        p: usize,
        t: usize,
        cols: std::ops::Range<usize>,
        meter: &mut M,
    ) {
        let [[g00, g01], [g10, g11]] = self.g;
        for k in cols {
            let (u, v) = (w[(p, k)], w[(t, k)]);
            w[(p, k)] = cmul(g00, u, meter) + cmul(g01, v, meter);
            w[(t, k)] = cmul(g10, u, meter) + cmul(g11, v, meter);
        }
    }

    /// `[col_p, col_t] ← [col_p, col_t]·Gᴴ`; 16 real_mul per row.
    fn rotate_cols_hermitian<M: Meter>(&self, q: &mut ComplexMatrix, p: usize, t: usize, meter: &mut M) {
        let [[g00, g01], [g10, g11]] = self.g;
        let (h00, h01, h10, h11) = (g00.conj(), g01.conj(), g10.conj(), g11.conj());
        for k in 0..q.rows() {
            let (u, v) = (q[(k, p)], q[(k, t)]);
            q[(k, p)] = cmul(u, h00, meter) + cmul(v, h01, meter);
            q[(k, t)] = cmul(u, h10, meter) + cmul(v, h11, meter);
        }
    }
}

/// Rotation annihilating `b` against `a`.
///
/// Charges `|a|² + |b|²` (4 real_mul), one square root and the entry
/// divisions of [`GivensRotation`].
pub fn givens_params<M: Meter>(a: Complex64, b: Complex64, meter: &mut M) -> Result<GivensRotation, QrdError> {
    let sum = abs2(a, meter) + abs2(b, meter);
    let r = rsqrt(sum, meter);
    if r < RANK_TOLERANCE {
        return Err(QrdError::DegenerateRotation);
    }
    Ok(GivensRotation::from_norm(a, b, r, meter))
}

/// Zeroes `w[target, pivot]` using pivot row `pivot`.
///
/// The rotation norm is taken over the sub-column `w[pivot..=target,
/// pivot]`, whose interior entries are already zero when tasks run in a
/// dependency-respecting order. Entries that are already exactly zero are
/// skipped at no cost. When `q` is given, the rotation is accumulated into
/// it under [`Stage::QAccumulate`].
pub(crate) fn annihilate<M: Meter>(
    w: &mut ComplexMatrix,
    q: Option<&mut ComplexMatrix>,
    pivot: usize,
    target: usize,
    meter: &mut M,
) -> Result<(), QrdError> {
    let b = w[(target, pivot)];
    if b == ZERO {
        return Ok(());
    }
    let a = w[(pivot, pivot)];
    let r = column_norm(w, pivot, pivot, target, meter)?;
    if r < RANK_TOLERANCE {
        return Err(QrdError::RankDeficient { column: pivot, norm: r });
    }
    let rot = GivensRotation::from_norm(a, b, r, meter);
    rot.rotate_rows(w, pivot, target, pivot..w.cols(), meter);
    w[(pivot, pivot)] = Complex64::new(r, 0.0);
    w[(target, pivot)] = ZERO;
    if let Some(q) = q {
        meter.set_stage(Stage::QAccumulate);
        rot.rotate_cols_hermitian(q, pivot, target, meter);
        meter.set_stage(Stage::Factor);
    }
    Ok(())
}

fn check_diagonal(w: &ComplexMatrix, n: usize) -> Result<(), QrdError> {
    for k in 0..n {
        let norm = w[(k, k)].norm();
        if norm < RANK_TOLERANCE {
            return Err(QrdError::RankDeficient { column: k, norm });
        }
    }
    Ok(())
}

/// Extracts thin `Q` and `R` after all rotations and computes `ỹ = Qᴴ·y`.
pub(crate) fn finish_with_q<M: Meter>(
    w: &ComplexMatrix,
    q_full: &ComplexMatrix,
    y: &[Complex64],
    meter: &mut M,
) -> Result<Factors, QrdError> {
    let (m, n) = (w.rows(), w.cols());
    check_diagonal(w, n)?;
    let q = q_full.top_left(m, n);
    meter.set_stage(Stage::YTilde);
    let y_tilde = hermitian_mat_vec(&q, y, meter)?;
    meter.set_stage(Stage::Factor);
    Ok(Factors {
        q: Some(q),
        r: w.top_left(n, n),
        y_tilde,
    })
}

/// Sequential Givens rotations. Not canonicalized.
pub fn qrd_givens(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::Givens.factorize_raw(h, y)
}

/// Givens rotations on `[H y]`, no `Q`. Not canonicalized.
pub fn qrd_rcpgr(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::Rcpgr.factorize_raw(h, y)
}

pub(super) fn givens<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let mut w = h.clone();
    let mut q = ComplexMatrix::identity(m);
    meter.set_stage(Stage::Factor);
    for pivot in 0..n {
        for target in pivot + 1..m {
            annihilate(&mut w, Some(&mut q), pivot, target, meter)?;
        }
    }
    finish_with_q(&w, &q, y, meter)
}

/// `[H y]` is triangularized over its first `n_T` columns only; rotations
/// in the appended column would touch rows below `n_T` and cannot change
/// `[R ỹ]`.
pub(super) fn rcpgr<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let mut w = ComplexMatrix::from_fn(m, n + 1, |i, j| if j < n { h[(i, j)] } else { y[i] });
    meter.set_stage(Stage::Factor);
    for pivot in 0..n {
        for target in pivot + 1..m {
            annihilate(&mut w, None, pivot, target, meter)?;
        }
    }
    check_diagonal(&w, n)?;
    Ok(Factors {
        q: None,
        r: w.top_left(n, n),
        y_tilde: (0..n).map(|i| w[(i, n)]).collect(),
    })
}
