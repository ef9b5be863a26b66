use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use super::cost::{abs2, cmul, rsqrt, Meter, RealOp};
use super::LinalgError;

/// Complex scalar; components are plain `f64`.
pub type ComplexScalar = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_fn(rows.len(), cols, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Copy of the block `rows × cols` starting at the origin.
    pub fn top_left(&self, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(i, j)])
    }

    pub fn hermitian_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Largest `|a_ij − b_ij|`; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }

    /// True when every entry below the diagonal is exactly zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    /// `‖AᴴA − I‖_max`.
    pub fn orthogonality_error(&self) -> f64 {
        let gram = self
            .hermitian_transpose()
            .matmul_unmetered(self)
            .expect("Aᴴ·A shapes always agree");
        gram.max_abs_diff(&Self::identity(self.cols)).unwrap()
    }

    /// Plain `A·B` without cost accounting.
    pub fn matmul_unmetered(&self, other: &Self) -> Result<Self, LinalgError> {
        matmul(self, other, &mut super::Unmetered)
    }

    pub fn mat_vec_unmetered(&self, v: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
        mat_vec(self, v, &mut super::Unmetered)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

fn check_finite(z: Complex64) -> Result<Complex64, LinalgError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(LinalgError::Overflow)
    }
}

/// Complex product charged as 4 real_mul.
pub fn metered_mul<M: Meter>(a: Complex64, b: Complex64, meter: &mut M) -> Result<Complex64, LinalgError> {
    check_finite(cmul(a, b, meter))
}

/// Complex-by-real product charged as 2 real_mul.
pub fn metered_mul_real<M: Meter>(a: Complex64, s: f64, meter: &mut M) -> Result<Complex64, LinalgError> {
    meter.charge(RealOp::Mul, 2);
    check_finite(Complex64::new(a.re * s, a.im * s))
}

/// `A·B`, charged `4·A.rows·A.cols·B.cols` real_mul.
pub fn matmul<M: Meter>(a: &ComplexMatrix, b: &ComplexMatrix, meter: &mut M) -> Result<ComplexMatrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            op: "matmul",
            left: (a.rows, a.cols),
            right: (b.rows, b.cols),
        });
    }
    let mut c = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.cols {
                acc += cmul(a[(i, k)], b[(k, j)], meter);
            }
            c[(i, j)] = acc;
        }
    }
    if !c.is_finite() {
        return Err(LinalgError::Overflow);
    }
    Ok(c)
}

/// `A·v`, charged `4·A.rows·A.cols` real_mul.
pub fn mat_vec<M: Meter>(a: &ComplexMatrix, v: &[Complex64], meter: &mut M) -> Result<Vec<Complex64>, LinalgError> {
    if a.cols != v.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "mat_vec",
            left: (a.rows, a.cols),
            right: (v.len(), 1),
        });
    }
    Ok((0..a.rows)
        .map(|i| {
            a.row(i)
                .iter()
                .zip(v)
                .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + cmul(*x, *y, meter))
        })
        .collect())
}

/// `Aᴴ·v` without materializing `Aᴴ`; same charge as [`mat_vec`].
pub fn hermitian_mat_vec<M: Meter>(
    a: &ComplexMatrix,
    v: &[Complex64],
    meter: &mut M,
) -> Result<Vec<Complex64>, LinalgError> {
    if a.rows != v.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "hermitian_mat_vec",
            left: (a.cols, a.rows),
            right: (v.len(), 1),
        });
    }
    Ok((0..a.cols)
        .map(|j| {
            (0..a.rows).fold(Complex64::new(0.0, 0.0), |acc, i| {
                acc + super::cost::cmul_conj(a[(i, j)], v[i], meter)
            })
        })
        .collect())
}

/// Euclidean norm of `A[row_from..=row_to, j]`.
///
/// Charged `2·(row_to − row_from + 1)` real_mul and one real_sqrt.
pub fn column_norm<M: Meter>(
    a: &ComplexMatrix,
    j: usize,
    row_from: usize,
    row_to: usize,
    meter: &mut M,
) -> Result<f64, LinalgError> {
    if j >= a.cols || row_to >= a.rows || row_from > row_to {
        return Err(LinalgError::IndexOutOfRange);
    }
    let mut sum = 0.0;
    for i in row_from..=row_to {
        sum += abs2(a[(i, j)], meter);
    }
    Ok(rsqrt(sum, meter))
}
