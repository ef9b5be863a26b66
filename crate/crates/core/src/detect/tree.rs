use std::cmp::Ordering;

use num_complex::Complex64;

use super::{check_system, quantize_index, DetectError, DetectionResult, QPSK, SINGULAR_TOLERANCE};
use crate::linalg::ComplexMatrix;

/// Default limit on the number of candidates [`detect_ml`] will enumerate.
pub const ML_DEFAULT_CAP: u64 = 1 << 20;

fn check_triangular(r: &ComplexMatrix, y_tilde: &[Complex64]) -> Result<(), DetectError> {
    check_system(r, y_tilde)?;
    if r.rows() != r.cols() {
        return Err(DetectError::Shape {
            rows: r.rows(),
            cols: r.cols(),
            len: y_tilde.len(),
        });
    }
    for i in 0..r.rows() {
        let magnitude = r[(i, i)].norm();
        if magnitude < SINGULAR_TOLERANCE {
            return Err(DetectError::SingularLayer { layer: i, magnitude });
        }
    }
    Ok(())
}

/// `ỹ_i − Σ_{j>i} R_ij·x_j` for the symbols already fixed below layer `i`.
fn interference_free(
    r: &ComplexMatrix,
    y_tilde: &[Complex64],
    i: usize,
    symbol_at: impl Fn(usize) -> Complex64,
) -> Complex64 {
    let mut acc = y_tilde[i];
    for j in i + 1..r.cols() {
        acc -= r[(i, j)] * symbol_at(j);
    }
    acc
}

/// Successive interference cancellation, layers `n_T..1`, no ordering.
pub fn detect_sic(r: &ComplexMatrix, y_tilde: &[Complex64]) -> Result<DetectionResult, DetectError> {
    check_triangular(r, y_tilde)?;
    let n = r.cols();
    let mut indices = vec![0usize; n];
    let mut metric = 0.0;
    for i in (0..n).rev() {
        let b = interference_free(r, y_tilde, i, |j| QPSK[indices[j]]);
        let d = r[(i, i)];
        indices[i] = quantize_index(b / d);
        metric += (b - d * QPSK[indices[i]]).norm_sqr();
    }
    Ok(DetectionResult::from_indices(indices, metric, n as u64))
}

struct SphereSearch<'a> {
    r: &'a ComplexMatrix,
    y_tilde: &'a [Complex64],
    radius2: f64,
    path: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
    visited: u64,
}

impl SphereSearch<'_> {
    fn descend(&mut self, i: usize, partial: f64) {
        let b = interference_free(self.r, self.y_tilde, i, |j| QPSK[self.path[j]]);
        let d = self.r[(i, i)];
        for (k, s) in QPSK.iter().enumerate() {
            let metric = partial + (b - d * s).norm_sqr();
            if metric > self.radius2 {
                continue;
            }
            self.visited += 1;
            self.path[i] = k;
            if i == 0 {
                if self.best.as_ref().is_none_or(|(_, m)| metric < *m) {
                    self.best = Some((self.path.clone(), metric));
                    self.radius2 = metric;
                }
            } else {
                self.descend(i - 1, metric);
            }
        }
    }
}

/// Depth-first sphere decoder with radius `radius` (`f64::INFINITY` for an
/// unbounded start).
///
/// Children are visited in constellation order; the squared radius shrinks
/// to the metric of every improved leaf. `visited_nodes` counts nodes that
/// pass the sphere test.
pub fn detect_sd(r: &ComplexMatrix, y_tilde: &[Complex64], radius: f64) -> Result<DetectionResult, DetectError> {
    check_triangular(r, y_tilde)?;
    if radius.is_nan() || radius <= 0.0 {
        return Err(DetectError::InvalidRadius(radius));
    }
    let n = r.cols();
    let mut search = SphereSearch {
        r,
        y_tilde,
        radius2: radius * radius,
        path: vec![0; n],
        best: None,
        visited: 0,
    };
    search.descend(n - 1, 0.0);
    match search.best {
        Some((indices, metric)) => Ok(DetectionResult::from_indices(indices, metric, search.visited)),
        None => Err(DetectError::EmptySphere { radius }),
    }
}

#[derive(Clone)]
struct Candidate {
    /// Indices from the last layer downwards.
    path: Vec<usize>,
    metric: f64,
}

fn rank(a: &Candidate, b: &Candidate) -> Ordering {
    a.metric.total_cmp(&b.metric).then_with(|| a.path.cmp(&b.path))
}

/// Breadth-first search keeping the `m` best partial candidates per layer.
///
/// Ties in the partial metric go to the lexicographically smaller index
/// path, last layer first. `visited_nodes` is the number of children
/// evaluated, which depends only on `m` and the number of layers.
pub fn detect_qrdm(r: &ComplexMatrix, y_tilde: &[Complex64], m: usize) -> Result<DetectionResult, DetectError> {
    check_triangular(r, y_tilde)?;
    if m == 0 {
        return Err(DetectError::InvalidBeam);
    }
    let n = r.cols();
    let mut survivors = vec![Candidate {
        path: Vec::with_capacity(n),
        metric: 0.0,
    }];
    let mut visited = 0u64;
    for i in (0..n).rev() {
        let mut children = Vec::with_capacity(survivors.len() * QPSK.len());
        for parent in &survivors {
            let b = interference_free(r, y_tilde, i, |j| QPSK[parent.path[n - 1 - j]]);
            let d = r[(i, i)];
            for (k, s) in QPSK.iter().enumerate() {
                let mut path = parent.path.clone();
                path.push(k);
                children.push(Candidate {
                    path,
                    metric: parent.metric + (b - d * s).norm_sqr(),
                });
            }
        }
        visited += children.len() as u64;
        children.sort_by(rank);
        children.truncate(m);
        survivors = children;
    }
    let best = &survivors[0];
    let indices: Vec<usize> = (0..n).map(|j| best.path[n - 1 - j]).collect();
    Ok(DetectionResult::from_indices(indices, best.metric, visited))
}

/// Exhaustive maximum likelihood with the default candidate cap.
pub fn detect_ml(h: &ComplexMatrix, y: &[Complex64]) -> Result<DetectionResult, DetectError> {
    detect_ml_capped(h, y, ML_DEFAULT_CAP)
}

/// Exhaustive minimization of `‖y − H·x‖²` over all `4^{n_T}` vectors.
///
/// Candidates are enumerated with the last layer most significant; the
/// first minimizer found wins ties.
pub fn detect_ml_capped(h: &ComplexMatrix, y: &[Complex64], cap: u64) -> Result<DetectionResult, DetectError> {
    check_system(h, y)?;
    let (m, n) = (h.rows(), h.cols());
    let candidates = (QPSK.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if candidates > cap as u128 {
        return Err(DetectError::SearchTooLarge { candidates, cap });
    }
    // products[j][k] = column j of H times symbol k
    let products: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|j| QPSK.iter().map(|s| (0..m).map(|i| h[(i, j)] * s).collect()).collect())
        .collect();
    let mut residuals = vec![y.to_vec(); n + 1];
    let mut path = vec![0usize; n];
    let mut best = (Vec::new(), f64::INFINITY);
    let mut visited = 0u64;
    enumerate(&products, &mut residuals, &mut path, n, &mut best, &mut visited);
    Ok(DetectionResult::from_indices(best.0, best.1, visited))
}

/// Fixes layer `level − 1`; `residuals[level]` holds `y` minus the layers
/// already fixed.
fn enumerate(
    products: &[Vec<Vec<Complex64>>],
    residuals: &mut [Vec<Complex64>],
    path: &mut [usize],
    level: usize,
    best: &mut (Vec<usize>, f64),
    visited: &mut u64,
) {
    let j = level - 1;
    for k in 0..QPSK.len() {
        path[j] = k;
        let (lower, upper) = residuals.split_at_mut(level);
        let (src, dst) = (&upper[0], &mut lower[j]);
        for ((d, s), p) in dst.iter_mut().zip(src).zip(&products[j][k]) {
            *d = s - p;
        }
        if j == 0 {
            *visited += 1;
            let metric: f64 = lower[0].iter().map(Complex64::norm_sqr).sum();
            if metric < best.1 {
                *best = (path.to_vec(), metric);
            }
        } else {
            enumerate(products, residuals, path, j, best, visited);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::residual_norm_sqr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn upper() -> ComplexMatrix {
        ComplexMatrix::from_fn(3, 3, |i, j| match (i, j) {
            _ if i > j => c(0.0, 0.0),
            _ if i == j => c(1.5 + i as f64 * 0.25, 0.0),
            _ => c(0.3, -0.2 * j as f64),
        })
    }

    #[test]
    fn identity_sic_slices() {
        let y = [c(-1.0, 0.5), c(0.2, -0.2)];
        let d = detect_sic(&ComplexMatrix::identity(2), &y).unwrap();
        assert_eq!(d.indices, vec![2, 1]);
        assert_eq!(d.visited_nodes, 2);
    }

    #[test]
    fn noiseless_tree_detectors_recover_symbols() {
        let r = upper();
        let x = vec![QPSK[3], QPSK[0], QPSK[2]];
        let y = r.mat_vec_unmetered(&x).unwrap();
        for d in [
            detect_sic(&r, &y).unwrap(),
            detect_sd(&r, &y, f64::INFINITY).unwrap(),
            detect_sd(&r, &y, 1e-9).unwrap(),
            detect_qrdm(&r, &y, 2).unwrap(),
        ] {
            assert_eq!(d.indices, vec![3, 0, 2]);
            assert!(d.metric < 1e-24);
        }
    }

    #[test]
    fn metric_matches_recomputation() {
        let r = upper();
        let y = [c(0.1, 0.9), c(-1.3, 0.2), c(0.4, 0.4)];
        for d in [
            detect_sic(&r, &y).unwrap(),
            detect_sd(&r, &y, f64::INFINITY).unwrap(),
            detect_qrdm(&r, &y, 3).unwrap(),
            detect_ml(&r, &y).unwrap(),
        ] {
            assert!((d.metric - residual_norm_sqr(&r, &y, &d.symbols)).abs() <= 1e-10);
        }
    }

    #[test]
    fn small_radius_is_an_empty_sphere() {
        let r = upper();
        let y = [c(0.1, 0.9), c(-1.3, 0.2), c(0.4, 0.4)];
        let ml = detect_ml(&r, &y).unwrap();
        let d = 0.5 * ml.metric.sqrt();
        assert_eq!(detect_sd(&r, &y, d), Err(DetectError::EmptySphere { radius: d }));
        assert!(detect_sd(&r, &y, 0.0).is_err());
    }

    #[test]
    fn qrdm_visits_fixed_node_counts() {
        let r = upper();
        let y = [c(0.0, 0.0); 3];
        // Per layer: min(M, 4^done)·4 children.
        assert_eq!(detect_qrdm(&r, &y, 1).unwrap().visited_nodes, 12);
        assert_eq!(detect_qrdm(&r, &y, 2).unwrap().visited_nodes, 4 + 8 + 8);
        assert_eq!(detect_qrdm(&r, &y, 16).unwrap().visited_nodes, 4 + 16 + 64);
        assert_eq!(detect_qrdm(&r, &y, 0), Err(DetectError::InvalidBeam));
    }

    #[test]
    fn ml_cap_and_candidate_count() {
        let h = ComplexMatrix::identity(3);
        let y = [QPSK[1], QPSK[2], QPSK[3]];
        let d = detect_ml(&h, &y).unwrap();
        assert_eq!(d.indices, vec![1, 2, 3]);
        assert_eq!(d.visited_nodes, 64);
        assert_eq!(
            detect_ml_capped(&h, &y, 63),
            Err(DetectError::SearchTooLarge {
                candidates: 64,
                cap: 63
            })
        );
    }

    #[test]
    fn singular_layer_is_reported() {
        let mut r = upper();
        r[(1, 1)] = c(0.0, 0.0);
        let y = [c(0.0, 0.0); 3];
        assert!(matches!(
            detect_sic(&r, &y),
            Err(DetectError::SingularLayer { layer: 1, .. })
        ));
        assert!(detect_sd(&r, &y, f64::INFINITY).is_err());
        assert!(detect_qrdm(&r, &y, 4).is_err());
    }
}
