use num_complex::Complex64;

use super::{check_system, quantize_index, residual_norm_sqr, DetectError, DetectionResult, SINGULAR_TOLERANCE};
use crate::linalg::ComplexMatrix;
use crate::qrd::QrdMethod;

/// Solves `R·x = b` for upper triangular `R`.
pub fn back_substitute(r: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, DetectError> {
    check_system(r, b)?;
    let n = r.cols();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let d = r[(i, i)];
        if d.norm() < SINGULAR_TOLERANCE {
            return Err(DetectError::SingularLayer {
                layer: i,
                magnitude: d.norm(),
            });
        }
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= r[(i, j)] * x[j];
        }
        x[i] = acc / d;
    }
    Ok(x)
}

/// Least-squares solve of `A·x ≈ b` through a Householder QR, then slicing.
fn solve_and_slice(
    a: &ComplexMatrix,
    b: &[Complex64],
    h: &ComplexMatrix,
    y: &[Complex64],
) -> Result<DetectionResult, DetectError> {
    let f = QrdMethod::Householder.factorize_unmetered(a, b)?;
    let x = back_substitute(&f.r, &f.y_tilde)?;
    let indices: Vec<usize> = x.iter().map(|&z| quantize_index(z)).collect();
    let mut result = DetectionResult::from_indices(indices, 0.0, 0);
    result.metric = residual_norm_sqr(h, y, &result.symbols);
    Ok(result)
}

/// Zero-forcing: quantized least-squares solution of `y = H·x`.
pub fn detect_zf(h: &ComplexMatrix, y: &[Complex64]) -> Result<DetectionResult, DetectError> {
    check_system(h, y)?;
    solve_and_slice(h, y, h, y)
}

/// Linear MMSE: quantized `(HᴴH + σ²I)⁻¹Hᴴy`.
///
/// Computed as the least-squares solution of `[H; σI]·x ≈ [y; 0]`. With
/// `σ² = 0` this is zero-forcing.
pub fn detect_mmse(h: &ComplexMatrix, y: &[Complex64], sigma2: f64) -> Result<DetectionResult, DetectError> {
    check_system(h, y)?;
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(DetectError::InvalidNoiseVariance(sigma2));
    }
    let (m, n) = (h.rows(), h.cols());
    let sigma = Complex64::new(sigma2.sqrt(), 0.0);
    let aug = ComplexMatrix::from_fn(m + n, n, |i, j| {
        if i < m {
            h[(i, j)]
        } else if i - m == j {
            sigma
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut y_aug = y.to_vec();
    y_aug.resize(m + n, Complex64::new(0.0, 0.0));
    solve_and_slice(&aug, &y_aug, h, y)
}
