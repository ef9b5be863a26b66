#![allow(dead_code)]

use num_complex::Complex64;
use qrdkit::channel::{gen_channel, gen_noise};
use qrdkit::ComplexMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random channel and received vector.
pub fn system(seed: u64, n_r: usize, n_t: usize) -> (ComplexMatrix, Vec<Complex64>) {
    let mut r = rng(seed);
    let h = gen_channel(n_r, n_t, &mut r);
    let y = gen_noise(n_r, 1.0, &mut r);
    (h, y)
}

/// `y = H·x + n` with QPSK `x` drawn from `seed`.
pub fn qpsk_system(seed: u64, n_r: usize, n_t: usize, sigma2: f64) -> (ComplexMatrix, Vec<Complex64>, Vec<usize>) {
    use rand::Rng;
    let mut r = rng(seed);
    let idx: Vec<usize> = (0..n_t).map(|_| r.random_range(0..4)).collect();
    let x: Vec<Complex64> = idx.iter().map(|&k| qrdkit::detect::QPSK[k]).collect();
    let h = gen_channel(n_r, n_t, &mut r);
    let n = gen_noise(n_r, sigma2, &mut r);
    let y = h
        .mat_vec_unmetered(&x)
        .unwrap()
        .iter()
        .zip(&n)
        .map(|(a, b)| a + b)
        .collect();
    (h, y, idx)
}

pub fn shapes(max: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=max).flat_map(move |t| (t..=max).map(move |r| (r, t)))
}
