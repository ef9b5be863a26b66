//! Rayleigh channels, QPSK transmission and the Monte-Carlo BER driver.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`). Trial `t` of a run with
//! seed `s` uses stream `t` of the generator seeded with `s`, so results do
//! not depend on how trials are spread over threads. Gaussian deviates are
//! drawn with the ziggurat method (`rand_distr::StandardNormal`).

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::detect::{
    demodulate_index, detect_ml_capped, detect_mmse, detect_qrdm, detect_sd, detect_sic, detect_zf, quantize_index,
    DetectError, DetectionResult, BITS_PER_SYMBOL, ML_DEFAULT_CAP, QPSK,
};
use crate::linalg::ComplexMatrix;
use crate::qrd::{QrFactorization, QrdMethod};

/// SNR values below this are clamped before conversion.
pub const MIN_SNR_DB: f64 = -100.0;

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.9), stream = trial index; normals by ziggurat (rand_distr 0.5)";
pub const SNR_CONVENTION: &str = "per receive antenna: sigma2 = n_t / 10^(snr_db/10)";
pub const MODULATION: &str = "QPSK Gray, bits (b0,b1) -> ((1-2b0) + (1-2b1)i)/sqrt(2)";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("bit count {0} is odd")]
    OddBitCount(usize),
    #[error("bit value {0} is not 0 or 1")]
    InvalidBit(u8),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid detector spec {spec:?}: {reason}")]
    DetectorSpec { spec: String, reason: String },
}

/// Draws an `n_r × n_t` matrix of i.i.d. `CN(0, 1)` entries (each component
/// `N(0, 0.5)`).
pub fn gen_channel<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> ComplexMatrix {
    let data = gen_noise(n_r * n_t, 1.0, rng);
    ComplexMatrix::from_vec(n_r, n_t, data).expect("dimensions are positive")
}

/// Draws `n` i.i.d. circular Gaussian samples of variance `sigma2`.
pub fn gen_noise<R: Rng + ?Sized>(n: usize, sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    let s = (0.5 * sigma2).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        })
        .collect()
}

/// Maps bit pairs to QPSK symbols.
pub fn modulate_qpsk(bits: &[u8]) -> Result<Vec<Complex64>, ChannelError> {
    if !bits.len().is_multiple_of(BITS_PER_SYMBOL) {
        return Err(ChannelError::OddBitCount(bits.len()));
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(ChannelError::InvalidBit(b));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| QPSK[2 * p[0] as usize + p[1] as usize])
        .collect())
}

/// Hard-decision demodulation (nearest symbol, ties toward positive).
pub fn demodulate_qpsk(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|&s| demodulate_index(quantize_index(s)))
        .collect()
}

/// Noise variance for `snr_db` with `n_t` unit-energy streams over a unit-gain
/// channel. `+∞` dB gives 0.
pub fn snr_to_sigma2(snr_db: f64, n_t: usize) -> f64 {
    let snr_db = if snr_db.is_nan() {
        MIN_SNR_DB
    } else {
        snr_db.max(MIN_SNR_DB)
    };
    n_t as f64 / 10f64.powf(snr_db / 10.0)
}

/// Detector run by [`run_ber`]. Tree detectors use a canonicalized
/// factorization from `engine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorSpec {
    Zf,
    Mmse,
    Sic { engine: QrdMethod },
    Sd { engine: QrdMethod, radius: f64 },
    QrdM { engine: QrdMethod, m: usize },
    Ml { cap: u64 },
}

pub const DEFAULT_ENGINE: QrdMethod = QrdMethod::Rcpgr;

impl DetectorSpec {
    /// Stable label used in CSV output.
    pub fn label(&self) -> String {
        let engine_suffix = |e: QrdMethod| {
            if e == DEFAULT_ENGINE {
                String::new()
            } else {
                format!("@{e}")
            }
        };
        match *self {
            DetectorSpec::Zf => "zf".into(),
            DetectorSpec::Mmse => "mmse".into(),
            DetectorSpec::Sic { engine } => format!("sic{}", engine_suffix(engine)),
            DetectorSpec::Sd { engine, radius } if radius.is_infinite() => format!("sd{}", engine_suffix(engine)),
            DetectorSpec::Sd { engine, radius } => format!("sd:{radius}{}", engine_suffix(engine)),
            DetectorSpec::QrdM { engine, m } => format!("qrdm:{m}{}", engine_suffix(engine)),
            DetectorSpec::Ml { cap } if cap == ML_DEFAULT_CAP => "ml".into(),
            DetectorSpec::Ml { cap } => format!("ml:{cap}"),
        }
    }
}

impl fmt::Display for DetectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Grammar: `name[:param][@engine]`, e.g. `zf`, `sic@gr`, `qrdm:4`,
/// `sd:inf@stgs`, `ml:65536`.
impl FromStr for DetectorSpec {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| ChannelError::DetectorSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (body, engine) = match s.trim().split_once('@') {
            Some((b, e)) => (b, Some(e.parse::<QrdMethod>().map_err(|e| err(&e))?)),
            None => (s.trim(), None),
        };
        let (name, param) = match body.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (body, None),
        };
        let engine_or_default = engine.unwrap_or(DEFAULT_ENGINE);
        let no_engine = |spec: DetectorSpec| {
            if engine.is_some() {
                Err(err("this detector does not use a QR engine"))
            } else {
                Ok(spec)
            }
        };
        let no_param = || {
            if param.is_some() {
                Err(err("unexpected parameter"))
            } else {
                Ok(())
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "zf" => no_param().and_then(|_| no_engine(DetectorSpec::Zf)),
            "mmse" => no_param().and_then(|_| no_engine(DetectorSpec::Mmse)),
            "sic" => no_param().map(|_| DetectorSpec::Sic {
                engine: engine_or_default,
            }),
            "sd" => {
                let radius = match param {
                    None | Some("inf") => f64::INFINITY,
                    Some(p) => p.parse::<f64>().map_err(|_| err("radius must be a number or inf"))?,
                };
                if radius.is_nan() || radius <= 0.0 {
                    return Err(err("radius must be positive"));
                }
                Ok(DetectorSpec::Sd {
                    engine: engine_or_default,
                    radius,
                })
            }
            "qrdm" => {
                let m = param
                    .ok_or_else(|| err("missing beam width, e.g. qrdm:4"))?
                    .parse::<usize>()
                    .map_err(|_| err("beam width must be a positive integer"))?;
                if m == 0 {
                    return Err(err("beam width must be a positive integer"));
                }
                Ok(DetectorSpec::QrdM {
                    engine: engine_or_default,
                    m,
                })
            }
            "ml" => {
                let cap = match param {
                    None => ML_DEFAULT_CAP,
                    Some(p) => p.parse::<u64>().map_err(|_| err("cap must be an integer"))?,
                };
                no_engine(DetectorSpec::Ml { cap })
            }
            _ => Err(err("unknown detector")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db_points: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub detectors: Vec<DetectorSpec>,
}

impl Default for SimConfig {
    /// 4×4 QPSK, 0..20 dB in 2 dB steps, ZF, MMSE, SIC, QRD-M 2/3/4 and ML.
    fn default() -> Self {
        SimConfig {
            n_t: 4,
            n_r: 4,
            snr_db_points: (0..=10).map(|k| 2.0 * k as f64).collect(),
            trials: 10_000,
            seed: 1,
            detectors: vec![
                DetectorSpec::Zf,
                DetectorSpec::Mmse,
                DetectorSpec::Sic { engine: DEFAULT_ENGINE },
                DetectorSpec::QrdM {
                    engine: DEFAULT_ENGINE,
                    m: 2,
                },
                DetectorSpec::QrdM {
                    engine: DEFAULT_ENGINE,
                    m: 3,
                },
                DetectorSpec::QrdM {
                    engine: DEFAULT_ENGINE,
                    m: 4,
                },
                DetectorSpec::Ml { cap: ML_DEFAULT_CAP },
            ],
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.n_t == 0 || self.n_r < self.n_t {
            return Err(ChannelError::Config(format!(
                "need n_r >= n_t >= 1, got n_r = {}, n_t = {}",
                self.n_r, self.n_t
            )));
        }
        if self.trials == 0 {
            return Err(ChannelError::Config("trials must be positive".into()));
        }
        if self.snr_db_points.is_empty() {
            return Err(ChannelError::Config("no SNR points".into()));
        }
        if let Some(s) = self
            .snr_db_points
            .iter()
            .find(|s| s.is_nan() || **s == f64::NEG_INFINITY)
        {
            return Err(ChannelError::Config(format!("invalid SNR point {s}")));
        }
        if self.detectors.is_empty() {
            return Err(ChannelError::Config("no detectors".into()));
        }
        Ok(())
    }

    pub fn bits_per_trial(&self) -> u64 {
        (self.n_t * BITS_PER_SYMBOL) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_simulated: u64,
    pub ber: f64,
    /// Trials where the detector returned an error; all their bits count as
    /// errors.
    pub failures: u64,
}

impl BerPoint {
    /// Binomial standard error of `ber`.
    pub fn std_error(&self) -> f64 {
        if self.bits_simulated == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits_simulated as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub detector: DetectorSpec,
    pub label: String,
    pub points: Vec<BerPoint>,
    /// Why the detector was not run, if it was skipped.
    pub refused: Option<String>,
}

/// Raw counts for one `(detector, snr)` cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    errors: u64,
    failures: u64,
}

fn run_detector(
    spec: &DetectorSpec,
    h: &ComplexMatrix,
    y: &[Complex64],
    sigma2: f64,
    factors: &mut Vec<(QrdMethod, QrFactorization)>,
) -> Result<DetectionResult, DetectError> {
    let qr = |factors: &mut Vec<(QrdMethod, QrFactorization)>, engine: QrdMethod| -> Result<usize, DetectError> {
        if let Some(pos) = factors.iter().position(|(e, _)| *e == engine) {
            return Ok(pos);
        }
        factors.push((engine, engine.factorize_unmetered(h, y)?));
        Ok(factors.len() - 1)
    };
    match *spec {
        DetectorSpec::Zf => detect_zf(h, y),
        DetectorSpec::Mmse => detect_mmse(h, y, sigma2),
        DetectorSpec::Ml { cap } => detect_ml_capped(h, y, cap),
        DetectorSpec::Sic { engine } => {
            let pos = qr(factors, engine)?;
            let f = &factors[pos].1;
            detect_sic(&f.r, &f.y_tilde)
        }
        DetectorSpec::Sd { engine, radius } => {
            let pos = qr(factors, engine)?;
            let f = &factors[pos].1;
            match detect_sd(&f.r, &f.y_tilde, radius) {
                // Restart without a radius, as a receiver would.
                Err(DetectError::EmptySphere { .. }) => detect_sd(&f.r, &f.y_tilde, f64::INFINITY),
                other => other,
            }
        }
        DetectorSpec::QrdM { engine, m } => {
            let pos = qr(factors, engine)?;
            let f = &factors[pos].1;
            detect_qrdm(&f.r, &f.y_tilde, m)
        }
    }
}

/// Tallies of one trial, indexed `[detector][snr]`.
fn run_trial(cfg: &SimConfig, active: &[usize], sigma2: &[f64], trial: u64) -> Vec<Vec<Tally>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let bits: Vec<u8> = (0..cfg.bits_per_trial()).map(|_| rng.random_range(0..2u8)).collect();
    let x = modulate_qpsk(&bits).expect("even bit count");
    let h = gen_channel(cfg.n_r, cfg.n_t, &mut rng);
    let unit_noise = gen_noise(cfg.n_r, 1.0, &mut rng);
    let hx = h.mat_vec_unmetered(&x).expect("shapes agree");

    let mut out = vec![vec![Tally::default(); sigma2.len()]; active.len()];
    for (s, &var) in sigma2.iter().enumerate() {
        let scale = var.sqrt();
        let y: Vec<Complex64> = hx.iter().zip(&unit_noise).map(|(a, n)| a + n * scale).collect();
        let mut factors = Vec::new();
        for (slot, &d) in active.iter().enumerate() {
            let tally = &mut out[slot][s];
            match run_detector(&cfg.detectors[d], &h, &y, var, &mut factors) {
                Ok(res) => {
                    tally.errors += res
                        .indices
                        .iter()
                        .flat_map(|&k| demodulate_index(k))
                        .zip(&bits)
                        .filter(|(a, b)| a != *b)
                        .count() as u64;
                }
                Err(_) => {
                    tally.failures += 1;
                    tally.errors += cfg.bits_per_trial();
                }
            }
        }
    }
    out
}

fn merge(mut a: Vec<Vec<Tally>>, b: Vec<Vec<Tally>>) -> Vec<Vec<Tally>> {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (ta, tb) in ra.iter_mut().zip(rb) {
            ta.errors += tb.errors;
            ta.failures += tb.failures;
        }
    }
    a
}

/// Paired Monte-Carlo BER sweep.
///
/// Each trial draws bits, `H` and a unit-variance noise vector once; every
/// SNR point scales the same noise and every detector sees the same
/// `(H, x, n)`. Counts are integer sums, so the curves do not depend on
/// the thread count. ML curves whose search space exceeds their cap are
/// returned empty with `refused` set.
pub fn run_ber(cfg: &SimConfig) -> Result<Vec<BerCurve>, ChannelError> {
    cfg.validate()?;
    let sigma2: Vec<f64> = cfg.snr_db_points.iter().map(|&s| snr_to_sigma2(s, cfg.n_t)).collect();
    let mut refused = vec![None; cfg.detectors.len()];
    for (d, spec) in cfg.detectors.iter().enumerate() {
        if let DetectorSpec::Ml { cap } = spec {
            let candidates = (QPSK.len() as u128).checked_pow(cfg.n_t as u32).unwrap_or(u128::MAX);
            if candidates > *cap as u128 {
                refused[d] = Some(DetectError::SearchTooLarge { candidates, cap: *cap }.to_string());
            }
        }
    }
    let active: Vec<usize> = (0..cfg.detectors.len()).filter(|&d| refused[d].is_none()).collect();
    let empty = vec![vec![Tally::default(); sigma2.len()]; active.len()];
    let totals = (0..cfg.trials)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |acc, t| merge(acc, run_trial(cfg, &active, &sigma2, t)),
        )
        .reduce(|| empty.clone(), merge);

    let bits_simulated = cfg.trials * cfg.bits_per_trial();
    let curves = cfg
        .detectors
        .iter()
        .enumerate()
        .map(|(d, spec)| {
            let points = match active.iter().position(|&a| a == d) {
                Some(slot) => cfg
                    .snr_db_points
                    .iter()
                    .zip(&totals[slot])
                    .map(|(&snr_db, t)| BerPoint {
                        snr_db,
                        bit_errors: t.errors,
                        bits_simulated,
                        ber: t.errors as f64 / bits_simulated as f64,
                        failures: t.failures,
                    })
                    .collect(),
                None => Vec::new(),
            };
            BerCurve {
                detector: *spec,
                label: spec.label(),
                points,
                refused: refused[d].clone(),
            }
        })
        .collect();
    Ok(curves)
}

pub const BER_CSV_HEADER: &str = "detector,snr_db,trials,bit_errors,ber";

/// Metadata lines (`#`-prefixed) followed by one row per detector and SNR.
pub fn ber_csv(cfg: &SimConfig, curves: &[BerCurve]) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "# seed={}", cfg.seed);
    let _ = writeln!(w, "# n_r={} n_t={}", cfg.n_r, cfg.n_t);
    let _ = writeln!(w, "# trials={}", cfg.trials);
    let _ = writeln!(w, "# modulation={MODULATION}");
    let _ = writeln!(w, "# snr={SNR_CONVENTION}");
    let _ = writeln!(w, "# rng={RNG_NAME}");
    for c in curves {
        if let Some(reason) = &c.refused {
            let _ = writeln!(w, "# refused {}: {reason}", c.label);
        }
    }
    let _ = writeln!(w, "{BER_CSV_HEADER}");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                w,
                "{},{},{},{},{:.9e}",
                c.label, p.snr_db, cfg.trials, p.bit_errors, p.ber
            );
        }
    }
    out
}
