use num_complex::Complex64;

use super::{Factors, QrFactorization, QrdError, QrdMethod, RANK_TOLERANCE};
use crate::linalg::{
    abs2, cdiv_real, cmul, cmul_conj, cscale, hermitian_mat_vec, rdiv, rmul, rsqrt, ComplexMatrix, Meter, Stage,
    Unmetered,
};

/// Reflector `P = I − τ·u·uᴴ` mapping its generating vector `x` to
/// `(beta, 0, …, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderReflector {
    pub u: Vec<Complex64>,
    pub tau: f64,
    /// `−phase(x₁)·‖x‖`.
    pub beta: Complex64,
}

impl HouseholderReflector {
    /// `v = √τ·u`, so that `P = I − v·vᴴ`.
    pub fn unit_vector(&self) -> Vec<Complex64> {
        let s = self.tau.sqrt();
        self.u.iter().map(|z| z * s).collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let n = self.u.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            Complex64::new(id, 0.0) - self.u[i] * self.u[j].conj() * self.tau
        })
    }

    /// Applies `P` to `a[row0.., cols]`, charging `8·len + 2` per column.
    fn apply<M: Meter>(&self, a: &mut ComplexMatrix, row0: usize, cols: std::ops::Range<usize>, meter: &mut M) {
        for c in cols {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, uk) in self.u.iter().enumerate() {
                s += cmul_conj(*uk, a[(row0 + k, c)], meter);
            }
            let s = cscale(s, self.tau, meter);
            for (k, uk) in self.u.iter().enumerate() {
                a[(row0 + k, c)] -= cmul(*uk, s, meter);
            }
        }
    }
}

/// Unmetered [`house_metered`].
pub fn house(x: &[Complex64]) -> Result<HouseholderReflector, QrdError> {
    house_metered(x, &mut Unmetered)
}

/// Builds the reflector that zeroes `x[1..]`.
///
/// Charges `2·len` real_mul for `‖x‖²`, two square roots (`‖x‖` and
/// `|x₁|`), a complex/real division for the phase of `x₁`, a complex/real
/// product for `beta`, and one product and one division for `τ`.
pub fn house_metered<M: Meter>(x: &[Complex64], meter: &mut M) -> Result<HouseholderReflector, QrdError> {
    let Some(&x1) = x.first() else {
        return Err(QrdError::RankDeficient { column: 0, norm: 0.0 });
    };
    let x1_sq = abs2(x1, meter);
    let mut sum = x1_sq;
    for z in &x[1..] {
        sum += abs2(*z, meter);
    }
    let norm = rsqrt(sum, meter);
    if norm < RANK_TOLERANCE {
        return Err(QrdError::RankDeficient { column: 0, norm });
    }
    let x1_abs = rsqrt(x1_sq, meter);
    let phase = if x1_abs == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        cdiv_real(x1, x1_abs, meter)
    };
    let beta = -cscale(phase, norm, meter);
    let mut u = x.to_vec();
    u[0] = x1 - beta;
    // ‖u‖² = 2·‖x‖·(‖x‖ + |x₁|)
    let tau = rdiv(1.0, rmul(norm, norm + x1_abs, meter), meter);
    Ok(HouseholderReflector { u, tau, beta })
}

/// Householder triangulation. Not canonicalized.
pub fn qrd_householder(h: &ComplexMatrix, y: &[Complex64]) -> Result<QrFactorization, QrdError> {
    QrdMethod::Householder.factorize_raw(h, y)
}

pub(super) fn householder<M: Meter>(h: &ComplexMatrix, y: &[Complex64], meter: &mut M) -> Result<Factors, QrdError> {
    let (m, n) = (h.rows(), h.cols());
    let mut w = h.clone();
    let mut reflectors = Vec::with_capacity(n);
    meter.set_stage(Stage::Factor);
    for i in 0..n {
        let x: Vec<Complex64> = (i..m).map(|k| w[(k, i)]).collect();
        let refl = house_metered(&x, meter).map_err(|e| match e {
            QrdError::RankDeficient { norm, .. } => QrdError::RankDeficient { column: i, norm },
            other => other,
        })?;
        refl.apply(&mut w, i, i + 1..n, meter);
        w[(i, i)] = refl.beta;
        for k in i + 1..m {
            w[(k, i)] = Complex64::new(0.0, 0.0);
        }
        reflectors.push(refl);
    }
    let r = w.top_left(n, n);

    // Backward accumulation of the thin Q = P_1 ⋯ P_n · [I; 0].
    meter.set_stage(Stage::QAccumulate);
    let mut q = ComplexMatrix::from_fn(m, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for (i, refl) in reflectors.iter().enumerate().rev() {
        refl.apply(&mut q, i, i..n, meter);
    }

    meter.set_stage(Stage::YTilde);
    let y_tilde = hermitian_mat_vec(&q, y, meter)?;
    meter.set_stage(Stage::Factor);
    Ok(Factors { q: Some(q), r, y_tilde })
}
