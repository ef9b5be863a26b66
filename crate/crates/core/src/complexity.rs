//! Closed-form MUL counts and their reconciliation with metered runs.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{gen_channel, gen_noise};
use crate::qrd::{QrdError, QrdMethod};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexityError {
    #[error("no closed-form count for method {0}")]
    UnsupportedMethod(QrdMethod),
    #[error("invalid dimensions {n_r}x{n_t}: need n_r >= n_t >= 1")]
    Dimensions { n_r: usize, n_t: usize },
    #[error(transparent)]
    Engine(#[from] QrdError),
}

/// Methods with a closed-form count.
pub const TABLE_METHODS: [QrdMethod; 5] = [
    QrdMethod::Stgs,
    QrdMethod::Householder,
    QrdMethod::Givens,
    QrdMethod::ParallelGivens,
    QrdMethod::Rcpgr,
];

/// Closed-form MUL count for an `n_r × n_t` decomposition, `Qᴴ·y` included.
///
/// Polynomials with thirds are evaluated as `3·p` in integers and divided
/// exactly.
pub fn mul_count_formula(method: QrdMethod, n_r: usize, n_t: usize) -> Result<i64, ComplexityError> {
    if n_t == 0 || n_r < n_t {
        return Err(ComplexityError::Dimensions { n_r, n_t });
    }
    let (r, t) = (n_r as i64, n_t as i64);
    let thrice = match method {
        QrdMethod::Stgs => 3 * (4 * t * t * r + 34 * r * t + 32 * t),
        QrdMethod::Householder => 24 * r * t * t + 18 * r * t - 8 * t * t * t + 9 * t * t + 395 * t,
        QrdMethod::Givens | QrdMethod::ParallelGivens => {
            51 * r * r * t - 3 * r * t * t + 402 * r * t - 7 * t * t * t - 219 * t * t - 212 * t
        }
        QrdMethod::Rcpgr => 3 * r * r * t + 21 * r * t * t + 462 * r * t - 7 * t * t * t - 243 * t * t - 236 * t,
        QrdMethod::Clgs => return Err(ComplexityError::UnsupportedMethod(method)),
    };
    debug_assert_eq!(thrice % 3, 0, "{method} at {n_r}x{n_t}");
    Ok(thrice / 3)
}

/// Closed-form versus metered count for one method and shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub method: QrdMethod,
    pub n_r: usize,
    pub n_t: usize,
    pub formula_mul: i64,
    pub measured_mul: u64,
    pub include_ytilde: bool,
    /// `|measured − formula| / formula`; 0 when both are 0, infinite when
    /// only the formula is.
    pub relative_gap: f64,
}

fn relative_gap(formula: i64, measured: u64) -> f64 {
    let diff = (measured as f64 - formula as f64).abs();
    if formula > 0 {
        diff / formula as f64
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// [`reconcile_with`] counting the `Qᴴ·y` product.
pub fn reconcile(method: QrdMethod, n_r: usize, n_t: usize, seed: u64) -> Result<ComplexityReport, ComplexityError> {
    reconcile_with(method, n_r, n_t, seed, true)
}

/// Runs `method` on a seeded random channel and received vector.
///
/// With `include_ytilde = false` the `Qᴴ·y` stage is dropped from the
/// measured count while the formula is left as is.
pub fn reconcile_with(
    method: QrdMethod,
    n_r: usize,
    n_t: usize,
    seed: u64,
    include_ytilde: bool,
) -> Result<ComplexityReport, ComplexityError> {
    let formula_mul = mul_count_formula(method, n_r, n_t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = gen_channel(n_r, n_t, &mut rng);
    let y = gen_noise(n_r, 1.0, &mut rng);
    let f = method.factorize_raw(&h, &y)?;
    let measured_mul = if include_ytilde {
        f.ledger.mul_count()
    } else {
        f.ledger.mul_count_without_ytilde()
    };
    Ok(ComplexityReport {
        method,
        n_r,
        n_t,
        formula_mul,
        measured_mul,
        include_ytilde,
        relative_gap: relative_gap(formula_mul, measured_mul),
    })
}

/// One report per `(size, method)`, sizes outermost.
pub fn complexity_table(
    sizes: &[(usize, usize)],
    methods: &[QrdMethod],
    include_ytilde: bool,
    seed: u64,
) -> Result<Vec<ComplexityReport>, ComplexityError> {
    let mut rows = Vec::with_capacity(sizes.len() * methods.len());
    for &(n_r, n_t) in sizes {
        for &m in methods {
            rows.push(reconcile_with(m, n_r, n_t, seed, include_ytilde)?);
        }
    }
    Ok(rows)
}

pub const COMPLEXITY_CSV_HEADER: &str = "n_r,n_t,method,formula_mul,measured_mul,include_ytilde,relative_gap";

pub fn complexity_csv(rows: &[ComplexityReport]) -> String {
    let mut out = format!("{COMPLEXITY_CSV_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6}",
            r.n_r, r.n_t, r.method, r.formula_mul, r.measured_mul, r.include_ytilde, r.relative_gap
        )
        .expect("writing to a String cannot fail");
    }
    out
}
