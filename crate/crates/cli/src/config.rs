//! Flat `key = value` configuration for BER runs.
//!
//! ```text
//! # 4x4 QPSK sweep
//! n_t = 4
//! n_r = 4
//! snr_db = 0:2:20        # start:step:stop, or a comma list
//! trials = 100000
//! seed = 7
//! detectors = zf, mmse, sic, qrdm:2, qrdm:3, qrdm:4, ml
//! ```
//!
//! Blank lines and `#` comments are ignored. Missing keys keep their
//! defaults; unknown or repeated keys are errors. Detector specs follow
//! `name[:param][@engine]`.

use qrdkit::channel::{DetectorSpec, SimConfig};

use crate::CliError;

const KEYS: [&str; 6] = ["n_t", "n_r", "snr_db", "trials", "seed", "detectors"];

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("config line {line}: {}", msg.into()))
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>, String> {
    let parse = |s: &str| {
        let s = s.trim();
        match s {
            "inf" | "+inf" => Ok(f64::INFINITY),
            _ => s.parse::<f64>().map_err(|_| format!("invalid SNR value {s:?}")),
        }
    };
    let parts: Vec<&str> = text.split(':').collect();
    let points = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
            if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) || stop < start {
                return Err(format!("invalid SNR range {text:?}"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|k| start + step * k as f64).collect()
        }
        [list] => list.split(',').map(parse).collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("invalid SNR list {text:?}")),
    };
    if points.is_empty() || points.iter().any(|p| p.is_nan()) {
        return Err(format!("invalid SNR list {text:?}"));
    }
    Ok(points)
}

pub fn parse_detectors(text: &str) -> Result<Vec<DetectorSpec>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<DetectorSpec>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_config(text: &str) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::default();
    let mut seen = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected key = value, got {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(bad(line, format!("unknown key {key:?}")));
        }
        if seen.contains(&key) {
            return Err(bad(line, format!("duplicate key {key:?}")));
        }
        seen.push(key);
        let int = |v: &str| {
            v.parse::<u64>()
                .map_err(|_| bad(line, format!("{key} must be a nonnegative integer")))
        };
        match key {
            "n_t" => cfg.n_t = int(value)? as usize,
            "n_r" => cfg.n_r = int(value)? as usize,
            "trials" => cfg.trials = int(value)?,
            "seed" => cfg.seed = int(value)?,
            "snr_db" => cfg.snr_db_points = parse_snr_list(value).map_err(|e| bad(line, e))?,
            "detectors" => cfg.detectors = parse_detectors(value).map_err(|e| bad(line, e))?,
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Inverse of [`parse_config`].
pub fn render_config(cfg: &SimConfig) -> String {
    let snr: Vec<String> = cfg.snr_db_points.iter().map(|s| s.to_string()).collect();
    let det: Vec<String> = cfg.detectors.iter().map(|d| d.label()).collect();
    format!(
        "n_t = {}\nn_r = {}\nsnr_db = {}\ntrials = {}\nseed = {}\ndetectors = {}\n",
        cfg.n_t,
        cfg.n_r,
        snr.join(","),
        cfg.trials,
        cfg.seed,
        det.join(",")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_example() {
        let text = "# sweep\nn_t = 4\nn_r = 4\nsnr_db = 0:2:20 # dB\ntrials = 100000\nseed = 7\n\ndetectors = zf, mmse, sic, qrdm:2, ml\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.snr_db_points.len(), 11);
        assert_eq!(cfg.snr_db_points[10], 20.0);
        assert_eq!(cfg.trials, 100_000);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.detectors.len(), 5);
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn defaults_and_lists() {
        assert_eq!(parse_config("").unwrap(), SimConfig::default());
        assert_eq!(parse_snr_list("1, 5.5,inf").unwrap(), vec![1.0, 5.5, f64::INFINITY]);
        assert_eq!(parse_snr_list("0:5:12").unwrap(), vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn errors() {
        for bad in [
            "n_t 4",
            "colour = red",
            "n_t = 4\nn_t = 4",
            "trials = -3",
            "snr_db = 10:0:20",
            "snr_db = 20:1:10",
            "snr_db = x",
            "detectors = zf, qrdm",
            "n_t = 5",
            "trials = 0",
        ] {
            assert!(matches!(parse_config(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }
}
