use num_complex::Complex64;

use super::{Factors, QrFactorization, QrdError, QrdMethod, RANK_TOLERANCE};
use crate::linalg::{cdiv_real, cmul, cmul_conj, column_norm, hermitian_mat_vec, ComplexMatrix, Meter, Stage};

/// Classical Gram-Schmidt. Not canonicalized.
pub fn qrd_clgs(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::Clgs.factorize_raw(h, y)
}

/// Stable Gram-Schmidt. Not canonicalized.
pub fn qrd_stgs(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::Stgs.factorize_raw(h, y)
}

fn normalize_column<M: Meter>(q: &mut ComplexMatrix, j: usize, meter: &mut M) -> Result<f64, QrdError> {
    let norm = column_norm(q, j, 0, q.rows() - 1, meter)?;
    if norm < RANK_TOLERANCE {
        return Err(QrdError::RankDeficient { column: j, norm });
    }
    for k in 0..q.rows() {
        q[(k, j)] = cdiv_real(q[(k, j)], norm, meter);
    }
    Ok(norm)
}

fn with_ytilde<M: Meter>(
    q: ComplexMatrix,
    r: ComplexMatrix,
    y: &[Complex64],
    meter: &mut M,
) -> Result<Factors, QrdError> {
    meter.set_stage(Stage::YTilde);
    let y_tilde = hermitian_mat_vec(&q, y, meter)?;
    meter.set_stage(Stage::Factor);
    Ok(Factors { q: Some(q), r, y_tilde })
}

/// Normalize column `i`, then orthogonalize every trailing column against it.
pub(super) fn stgs<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let mut q = h.clone();
    let mut r = ComplexMatrix::zeros(n, n);
    meter.set_stage(Stage::Factor);
    for i in 0..n {
        r[(i, i)] = Complex64::new(normalize_column(&mut q, i, meter)?, 0.0);
        for j in i + 1..n {
            let mut rij = Complex64::new(0.0, 0.0);
            for k in 0..m {
                rij += cmul_conj(q[(k, i)], q[(k, j)], meter);
            }
            r[(i, j)] = rij;
            for k in 0..m {
                let qki = q[(k, i)];
                q[(k, j)] -= cmul(rij, qki, meter);
            }
        }
    }
    with_ytilde(q, r, y, meter)
}

/// Column `j` is projected against the already-built `q_0..q_{j-1}` using
/// the original `h_j` for every coefficient.
pub(super) fn clgs<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let mut q = h.clone();
    let mut r = ComplexMatrix::zeros(n, n);
    meter.set_stage(Stage::Factor);
    for j in 0..n {
        for i in 0..j {
            let mut rij = Complex64::new(0.0, 0.0);
            for k in 0..m {
                rij += cmul_conj(q[(k, i)], h[(k, j)], meter);
            }
            r[(i, j)] = rij;
        }
        for i in 0..j {
            let rij = r[(i, j)];
            for k in 0..m {
                let qki = q[(k, i)];
                q[(k, j)] -= cmul(rij, qki, meter);
            }
        }
        r[(j, j)] = Complex64::new(normalize_column(&mut q, j, meter)?, 0.0);
    }
    with_ytilde(q, r, y, meter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_channel;
    use crate::linalg::{CostLedger, Unmetered};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_and_scaled_identity() {
        let y: Vec<_> = (1..=4).map(|k| c(k as f64, 0.0)).collect();
        for engine in [qrd_clgs, qrd_stgs] {
            let f = engine(&ComplexMatrix::identity(4), &y).unwrap();
            assert_eq!(f.q.as_ref().unwrap(), &ComplexMatrix::identity(4));
            assert_eq!(f.r, ComplexMatrix::identity(4));
            assert_eq!(f.y_tilde, y);

            let two = ComplexMatrix::from_fn(4, 4, |i, j| if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) });
            let f = engine(&two, &y).unwrap();
            assert_eq!(f.q.unwrap(), ComplexMatrix::identity(4));
            assert_eq!(f.r[(3, 3)], c(2.0, 0.0));
        }
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = gen_channel(4, 4, &mut rng);
        let y = vec![c(0.5, -0.5); 4];
        for engine in [qrd_clgs, qrd_stgs] {
            let f = engine(&h, &y).unwrap();
            assert!(f.reconstruction_error(&h).unwrap() <= 1e-10);
            assert!(f.orthogonality_error().unwrap() <= 1e-10);
            assert!(f.r.is_upper_triangular());
        }
    }

    #[test]
    fn stable_variant_loses_less_orthogonality() {
        // Läuchli-type near-dependent columns.
        let eps = 1e-8;
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[eps, 0.0], &[0.0, eps]]);
        let y = vec![c(0.0, 0.0); 3];
        let cl = qrd_clgs(&h, &y).unwrap().orthogonality_error().unwrap();
        let st = qrd_stgs(&h, &y).unwrap().orthogonality_error().unwrap();
        assert!(st <= cl, "stgs {st:e} clgs {cl:e}");

        // With three columns the difference is dramatic.
        let h =
            ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 1.0], &[eps, 0.0, 0.0], &[0.0, eps, 0.0], &[0.0, 0.0, eps]]);
        let y = vec![c(0.0, 0.0); 4];
        let cl = qrd_clgs(&h, &y).unwrap().orthogonality_error().unwrap();
        let st = qrd_stgs(&h, &y).unwrap().orthogonality_error().unwrap();
        assert!(cl > 0.1, "clgs should break down, got {cl:e}");
        assert!(st < 1e-7, "stgs {st:e}");
    }

    #[test]
    fn single_entry_charges_norm_and_normalize() {
        let h = ComplexMatrix::from_vec(1, 1, vec![c(3.0, 4.0)]).unwrap();
        let mut l = CostLedger::new();
        let f = stgs(&h, &[c(1.0, 0.0)], &mut l).unwrap();
        assert_eq!(f.r[(0, 0)], c(5.0, 0.0));
        // 2 mul + sqrt for the norm, 2 div for the scaling, 4 mul for ỹ.
        assert_eq!(l.stage(Stage::Factor).mul_units(), 2 + 32 + 32);
        assert_eq!(l.stage(Stage::YTilde).mul_units(), 4);
    }

    #[test]
    fn metering_does_not_change_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = gen_channel(6, 4, &mut rng);
        let y = vec![c(1.0, 2.0); 6];
        let pairs = [
            (
                stgs(&h, &y, &mut CostLedger::new()).unwrap(),
                stgs(&h, &y, &mut Unmetered).unwrap(),
            ),
            (
                clgs(&h, &y, &mut CostLedger::new()).unwrap(),
                clgs(&h, &y, &mut Unmetered).unwrap(),
            ),
        ];
        for (metered, plain) in pairs {
            assert_eq!(metered.r, plain.r);
            assert_eq!(metered.q, plain.q);
            assert_eq!(metered.y_tilde, plain.y_tilde);
        }
    }
}
