use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

pub const BITS_PER_SYMBOL: usize = 2;

/// Gray-mapped QPSK. Index `k = 2·b₀ + b₁` carries bits `(b₀, b₁)` and maps
/// to `((1 − 2b₀) + (1 − 2b₁)i)/√2`.
pub const QPSK: [Complex64; 4] = [
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub symbol: Complex64,
    pub bits: [u8; 2],
}

impl ConstellationPoint {
    pub fn from_index(k: usize) -> Self {
        ConstellationPoint {
            symbol: QPSK[k],
            bits: demodulate_index(k),
        }
    }
}

/// Nearest QPSK index; a zero component counts as positive.
pub fn quantize_index(z: Complex64) -> usize {
    let b0 = usize::from(z.re < 0.0);
    let b1 = usize::from(z.im < 0.0);
    2 * b0 + b1
}

/// Nearest QPSK point; a zero component counts as positive.
pub fn quantize(z: Complex64) -> ConstellationPoint {
    ConstellationPoint::from_index(quantize_index(z))
}

/// Bits `(b₀, b₁)` carried by index `k`.
pub fn demodulate_index(k: usize) -> [u8; 2] {
    [(k >> 1) as u8 & 1, k as u8 & 1]
}
