//! Real-multiplication cost accounting.
//!
//! Every metered routine charges the real primitives it executes to a
//! [`Meter`]. The MUL unit weights are fixed: a real product is 1 MUL, a
//! real addition is free (multiply-accumulate), a real division is 16 MUL
//! and a real square root is 32 MUL.
//!
//! Complex compositions used throughout the crate:
//!
//! | operation                         | charge          |
//! |-----------------------------------|-----------------|
//! | complex × complex                 | 4 real_mul      |
//! | complex × real                    | 2 real_mul      |
//! | complex ÷ real                    | 2 real_div      |
//! | `|z|²`                            | 2 real_mul      |
//! | conjugation, negation, addition   | free            |

use num_complex::Complex64;
use std::fmt;

/// Weight of a real division in MUL units.
pub const DIV_WEIGHT: u64 = 16;
/// Weight of a real square root in MUL units.
pub const SQRT_WEIGHT: u64 = 32;

/// Real primitive charged to a meter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealOp {
    Mul,
    Div,
    Sqrt,
}

impl RealOp {
    pub fn weight(self) -> u64 {
        match self {
            RealOp::Mul => 1,
            RealOp::Div => DIV_WEIGHT,
            RealOp::Sqrt => SQRT_WEIGHT,
        }
    }
}

/// Phase of a factorization a charge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Triangularization proper (rotations, reflections, projections).
    Factor,
    /// Explicit formation of the unitary factor.
    QAccumulate,
    /// The `Qᴴ·y` product.
    YTilde,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Factor, Stage::QAccumulate, Stage::YTilde];

    fn index(self) -> usize {
        match self {
            Stage::Factor => 0,
            Stage::QAccumulate => 1,
            Stage::YTilde => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Factor => "factor",
            Stage::QAccumulate => "q_accumulate",
            Stage::YTilde => "ytilde",
        }
    }
}

/// Counts of executed real primitives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub real_mul: u64,
    pub real_div: u64,
    pub real_sqrt: u64,
}

impl OpCounts {
    /// Total cost in MUL units.
    pub fn mul_units(&self) -> u64 {
        self.real_mul + DIV_WEIGHT * self.real_div + SQRT_WEIGHT * self.real_sqrt
    }

    fn add(&mut self, op: RealOp, count: u64) {
        match op {
            RealOp::Mul => self.real_mul += count,
            RealOp::Div => self.real_div += count,
            RealOp::Sqrt => self.real_sqrt += count,
        }
    }
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            real_mul: self.real_mul + rhs.real_mul,
            real_div: self.real_div + rhs.real_div,
            real_sqrt: self.real_sqrt + rhs.real_sqrt,
        }
    }
}

/// Sink for cost charges.
///
/// Numerical routines are generic over the meter so the same arithmetic
/// runs with and without accounting.
pub trait Meter {
    fn charge(&mut self, op: RealOp, count: u64);

    /// Attribute subsequent charges to `stage`.
    fn set_stage(&mut self, _stage: Stage) {}
}

/// Meter that discards every charge.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unmetered;

impl Meter for Unmetered {
    #[inline]
    fn charge(&mut self, _op: RealOp, _count: u64) {}
}

/// Mutable tally of real primitives, split by [`Stage`].
///
/// `mul_count` is accumulated independently of the per-primitive counters
/// so [`CostLedger::audit`] can cross-check the two.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CostLedger {
    mul_count: u64,
    totals: OpCounts,
    stages: [OpCounts; 3],
    current: usize,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total cost in MUL units.
    pub fn mul_count(&self) -> u64 {
        self.mul_count
    }

    pub fn breakdown(&self) -> OpCounts {
        self.totals
    }

    pub fn stage(&self, stage: Stage) -> OpCounts {
        self.stages[stage.index()]
    }

    /// MUL units excluding the `Qᴴ·y` stage.
    pub fn mul_count_without_ytilde(&self) -> u64 {
        self.mul_count - self.stage(Stage::YTilde).mul_units()
    }

    /// Checks the ledger's internal consistency.
    pub fn audit(&self) -> bool {
        let summed = self.stages.iter().fold(OpCounts::default(), |acc, s| acc + *s);
        summed == self.totals && self.totals.mul_units() == self.mul_count
    }

    /// Adds every counter of `other` into `self`.
    pub fn absorb(&mut self, other: &CostLedger) {
        self.mul_count += other.mul_count;
        self.totals = self.totals + other.totals;
        for (mine, theirs) in self.stages.iter_mut().zip(other.stages.iter()) {
            *mine = *mine + *theirs;
        }
    }
}

impl Meter for CostLedger {
    #[inline]
    fn charge(&mut self, op: RealOp, count: u64) {
        self.mul_count += op.weight() * count;
        self.totals.add(op, count);
        self.stages[self.current].add(op, count);
    }

    fn set_stage(&mut self, stage: Stage) {
        self.current = stage.index();
    }
}

impl fmt::Display for CostLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} MUL (real_mul={}, real_div={}, real_sqrt={})",
            self.mul_count, self.totals.real_mul, self.totals.real_div, self.totals.real_sqrt
        )
    }
}

// Metered scalar kernels. These are the only places that charge costs for
// scalar arithmetic; matrix routines are built on them.

/// `a · b`, 4 real_mul.
#[inline]
pub fn cmul<M: Meter>(a: Complex64, b: Complex64, meter: &mut M) -> Complex64 {
    meter.charge(RealOp::Mul, 4);
    a * b
}

/// `conj(a) · b`, 4 real_mul.
#[inline]
pub fn cmul_conj<M: Meter>(a: Complex64, b: Complex64, meter: &mut M) -> Complex64 {
    meter.charge(RealOp::Mul, 4);
    a.conj() * b
}

/// `a · s` for real `s`, 2 real_mul.
#[inline]
pub fn cscale<M: Meter>(a: Complex64, s: f64, meter: &mut M) -> Complex64 {
    meter.charge(RealOp::Mul, 2);
    Complex64::new(a.re * s, a.im * s)
}

/// `a / s` for real `s`, 2 real_div.
#[inline]
pub fn cdiv_real<M: Meter>(a: Complex64, s: f64, meter: &mut M) -> Complex64 {
    meter.charge(RealOp::Div, 2);
    Complex64::new(a.re / s, a.im / s)
}

/// `|a|²`, 2 real_mul.
#[inline]
pub fn abs2<M: Meter>(a: Complex64, meter: &mut M) -> f64 {
    meter.charge(RealOp::Mul, 2);
    a.re * a.re + a.im * a.im
}

#[inline]
pub fn rmul<M: Meter>(a: f64, b: f64, meter: &mut M) -> f64 {
    meter.charge(RealOp::Mul, 1);
    a * b
}

#[inline]
pub fn rdiv<M: Meter>(a: f64, b: f64, meter: &mut M) -> f64 {
    meter.charge(RealOp::Div, 1);
    a / b
}

#[inline]
pub fn rsqrt<M: Meter>(a: f64, meter: &mut M) -> f64 {
    meter.charge(RealOp::Sqrt, 1);
    a.sqrt()
}
