mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qrdkit::linalg::Stage;
use qrdkit::qrd::canonicalize;
use qrdkit::{ComplexMatrix, QrdError, QrdMethod};

const Q_ENGINES: [QrdMethod; 5] = [
    QrdMethod::Clgs,
    QrdMethod::Stgs,
    QrdMethod::Householder,
    QrdMethod::Givens,
    QrdMethod::ParallelGivens,
];

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn every_engine_factorizes_every_shape() {
    for (r, t) in common::shapes(8) {
        let (h, y) = common::system(1000 + 10 * r as u64 + t as u64, r, t);
        for m in Q_ENGINES {
            let f = m.factorize(&h, &y).unwrap();
            assert!(f.reconstruction_error(&h).unwrap() <= 1e-10, "{m} {r}x{t}");
            assert!(f.orthogonality_error().unwrap() <= 1e-10, "{m} {r}x{t}");
            assert!(f.r.is_upper_triangular(), "{m} {r}x{t}");
            assert!(f.is_canonical());
            assert_eq!((f.r.rows(), f.r.cols()), (t, t));
            assert_eq!(f.y_tilde.len(), t);
        }
    }
}

#[test]
fn canonical_factors_agree_across_engines() {
    for (r, t) in common::shapes(6) {
        let (h, y) = common::system(77 + r as u64 * 31 + t as u64, r, t);
        let reference = QrdMethod::Householder.factorize(&h, &y).unwrap();
        for m in QrdMethod::ALL {
            let f = m.factorize(&h, &y).unwrap();
            assert!(f.r.max_abs_diff(&reference.r).unwrap() <= 1e-9, "{m} {r}x{t}");
            assert!(max_diff(&f.y_tilde, &reference.y_tilde) <= 1e-9, "{m} {r}x{t}");
            if let Some(q) = &f.q {
                assert!(q.max_abs_diff(reference.q.as_ref().unwrap()).unwrap() <= 1e-9);
            }
        }
    }
}

#[test]
fn rcpgr_equals_givens_r_and_qh_y() {
    for (r, t) in common::shapes(8) {
        let (h, y) = common::system(5 + r as u64 * 9 + t as u64, r, t);
        let gr = QrdMethod::Givens.factorize(&h, &y).unwrap();
        let rc = QrdMethod::Rcpgr.factorize(&h, &y).unwrap();
        assert!(rc.q.is_none());
        assert!(rc.r.max_abs_diff(&gr.r).unwrap() <= 1e-10);
        assert!(max_diff(&rc.y_tilde, &gr.y_tilde) <= 1e-10);
        let qhy =
            gr.q.as_ref()
                .unwrap()
                .hermitian_transpose()
                .mat_vec_unmetered(&y)
                .unwrap();
        assert!(max_diff(&gr.y_tilde, &qhy) <= 1e-10);
    }
}

#[test]
fn metered_and_unmetered_runs_are_bit_identical() {
    let (h, y) = common::system(4, 7, 5);
    for m in QrdMethod::ALL {
        let a = m.factorize(&h, &y).unwrap();
        let b = m.factorize_unmetered(&h, &y).unwrap();
        assert_eq!(a.r, b.r, "{m}");
        assert_eq!(a.q, b.q, "{m}");
        assert_eq!(a.y_tilde, b.y_tilde, "{m}");
        assert_eq!(b.ledger.mul_count(), 0);
        assert!(a.ledger.mul_count() > 0);
        assert!(a.ledger.audit());
    }
}

#[test]
fn ledgers_are_data_independent() {
    // Counts depend only on the shape for generic inputs.
    for m in QrdMethod::ALL {
        let a = m
            .factorize(&common::system(1, 6, 4).0, &common::system(1, 6, 4).1)
            .unwrap();
        let b = m
            .factorize(&common::system(2, 6, 4).0, &common::system(2, 6, 4).1)
            .unwrap();
        assert_eq!(a.ledger, b.ledger, "{m}");
    }
}

#[test]
fn rcpgr_never_charges_q_or_ytilde_stages() {
    let (h, y) = common::system(3, 8, 8);
    let rc = QrdMethod::Rcpgr.factorize(&h, &y).unwrap();
    assert_eq!(rc.ledger.stage(Stage::QAccumulate).mul_units(), 0);
    assert_eq!(rc.ledger.stage(Stage::YTilde).mul_units(), 0);
    let gr = QrdMethod::Givens.factorize(&h, &y).unwrap();
    assert_eq!(gr.ledger.stage(Stage::YTilde).mul_units(), 4 * 8 * 8);
}

#[test]
fn rank_deficient_square_input() {
    let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[0.0, 1.0, 1.0]]);
    for m in QrdMethod::ALL {
        let err = m.factorize(&h, &[Complex64::new(1.0, 0.0); 3]).unwrap_err();
        assert!(matches!(err, QrdError::RankDeficient { .. }), "{m}: {err:?}");
    }
}

fn complex_matrix(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max)
        .prop_flat_map(move |t| (t..=max, Just(t)))
        .prop_flat_map(|(r, t)| {
            proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), r * t).prop_map(move |v| {
                ComplexMatrix::from_vec(r, t, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_reconstruction_and_triangularity(h in complex_matrix(6)) {
        let y = vec![Complex64::new(1.0, -1.0); h.rows()];
        for m in QrdMethod::ALL {
            match m.factorize(&h, &y) {
                Ok(f) => {
                    prop_assert!(f.r.is_upper_triangular());
                    prop_assert!(f.is_canonical());
                    if let Some(err) = f.reconstruction_error(&h) {
                        prop_assert!(err <= 1e-9, "{} {:e}", m, err);
                    }
                }
                // Random inputs are full rank with probability one; only
                // near-singular draws may be rejected.
                Err(QrdError::RankDeficient { .. }) => {}
                Err(e) => prop_assert!(false, "{}: {:?}", m, e),
            }
        }
    }

    #[test]
    fn prop_canonicalize_is_idempotent(h in complex_matrix(5)) {
        let y = vec![Complex64::new(0.5, 0.5); h.rows()];
        if let Ok(f) = QrdMethod::Givens.factorize(&h, &y) {
            let g = canonicalize(f.clone());
            prop_assert_eq!(g.r, f.r);
            prop_assert_eq!(g.y_tilde, f.y_tilde);
        }
    }
}
