use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qrdkit::linalg::text::{format_matrix, format_vector, parse_matrix};
use qrdkit::ComplexMatrix;

fn qrdkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrdkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn write_matrix(dir: &Path, name: &str, m: &ComplexMatrix) -> String {
    let p = dir.join(name);
    fs::write(&p, format_matrix(m)).unwrap();
    p.display().to_string()
}

#[test]
fn factorize_identity() {
    let dir = tempfile::tempdir().unwrap();
    let h = write_matrix(dir.path(), "h.txt", &ComplexMatrix::identity(4));
    let out = dir.path().join("out");
    let o = qrdkit(&[
        "factorize",
        "--matrix",
        &h,
        "--method",
        "stgs",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = parse_matrix(&fs::read_to_string(out.join("R.txt")).unwrap()).unwrap();
    assert_eq!(r, ComplexMatrix::identity(4));
    let ledger = fs::read_to_string(out.join("ledger.csv")).unwrap();
    let total = body(&ledger).into_iter().find(|l| l.starts_with("total,")).unwrap();
    assert_ne!(total.rsplit(',').next().unwrap(), "0");
    assert!(out.join("Q.txt").exists());
    assert!(fs::read_to_string(out.join("manifest.txt"))
        .unwrap()
        .contains("# method=stgs"));
}

#[test]
fn factorize_engines_agree_and_rcpgr_needs_y() {
    let dir = tempfile::tempdir().unwrap();
    let m = ComplexMatrix::from_fn(5, 3, |i, j| {
        num_complex::Complex64::new(
            (i * 3 + j) as f64 % 7.0 - 3.0,
            (i + 2 * j) as f64 * 0.5 + if i == j { 4.0 } else { 0.0 },
        )
    });
    let h = write_matrix(dir.path(), "h.txt", &m);
    let y = dir.path().join("y.txt");
    fs::write(&y, format_vector(&[num_complex::Complex64::new(1.0, -1.0); 5])).unwrap();
    let y = y.display().to_string();

    let mut rs = Vec::new();
    for method in ["gr", "hh", "rcpgr"] {
        let out = dir.path().join(method);
        let o = qrdkit(&[
            "factorize",
            "--matrix",
            &h,
            "--y",
            &y,
            "--method",
            method,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        rs.push(parse_matrix(&fs::read_to_string(out.join("R.txt")).unwrap()).unwrap());
    }
    assert!(rs[0].max_abs_diff(&rs[1]).unwrap() <= 1e-9);
    assert!(rs[0].max_abs_diff(&rs[2]).unwrap() <= 1e-9);
    assert!(!dir.path().join("rcpgr/Q.txt").exists());

    let o = qrdkit(&[
        "factorize",
        "--matrix",
        &h,
        "--method",
        "rcpgr",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn factorize_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 2\n1:0 x\n0:0 1:0\n").unwrap();
    assert_eq!(
        qrdkit(&["factorize", "--matrix", bad.to_str().unwrap(), "--out", out])
            .status
            .code(),
        Some(3)
    );

    let singular = write_matrix(
        dir.path(),
        "s.txt",
        &ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]),
    );
    let o = qrdkit(&["factorize", "--matrix", &singular, "--method", "hh", "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank"));

    let wide = write_matrix(dir.path(), "w.txt", &ComplexMatrix::zeros(2, 3));
    assert_eq!(
        qrdkit(&["factorize", "--matrix", &wide, "--out", out]).status.code(),
        Some(2)
    );
    assert_eq!(
        qrdkit(&["factorize", "--matrix", "/no/such/file", "--out", out])
            .status
            .code(),
        Some(5)
    );
    assert_eq!(qrdkit(&["factorize", "--method", "qr"]).status.code(), Some(2));
}

#[test]
fn complexity_command() {
    let o = qrdkit(&["complexity", "--sizes", "8x8", "--methods", "stgs"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = body(&text);
    assert_eq!(rows[1].split(',').nth(3), Some("4480"));

    let o = qrdkit(&["complexity", "--sizes", "2x2..8x8"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(body(&text).len(), 1 + 7 * 5);

    let o = qrdkit(&["complexity", "--sizes", "2x2..8x8", "--methods", "gr,pgr"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = body(&text);
    for pair in rows[1..].chunks(2) {
        let f = |l: &str| l.split(',').nth(3).unwrap().to_string();
        assert_eq!(f(pair[0]), f(pair[1]));
    }

    let o = qrdkit(&[
        "complexity",
        "--sizes",
        "8x8",
        "--methods",
        "stgs",
        "--include-ytilde",
        "false",
    ]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(body(&text)[1], "8,8,stgs,4480,4224,false,0.057143");

    for bad in [["--sizes", "3x4"], ["--sizes", "8by8"], ["--methods", "clgs"]] {
        assert_eq!(qrdkit(&["complexity", bad[0], bad[1]]).status.code(), Some(2));
    }
}

#[test]
fn parallelism_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let traces = dir.path().join("traces");
    let o = qrdkit(&[
        "parallelism",
        "--sizes",
        "2x2..8x8",
        "--pipes",
        "8",
        "--trace-dir",
        traces.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows = body(&text);
    assert!(rows[0].starts_with("n_r,n_t,tasks,rounds,givens_gain"));
    assert!(rows.contains(&"4,4,6,5,0.333333,10,7,0.500000,8,5"));
    assert!(rows[1].starts_with("2,2,1,1,0.000000"));
    let gains: Vec<f64> = rows[1..]
        .iter()
        .map(|r| r.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(gains.windows(2).all(|w| w[1] >= w[0]));
    let trace = fs::read_to_string(traces.join("trace_4x4_p8.csv")).unwrap();
    assert_eq!(body(&trace).len(), 1 + 5 * 8);
    assert!(trace.contains("0,1,idle,idle"));

    assert_eq!(qrdkit(&["parallelism", "--trace-dir", "x"]).status.code(), Some(2));
    assert_eq!(qrdkit(&["parallelism", "--pipes", "0"]).status.code(), Some(2));
}

#[test]
fn ber_noise_free_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(
        &cfg,
        "n_t = 4\nn_r = 4\nsnr_db = inf\ntrials = 200\ndetectors = zf, mmse, sic, sd, qrdm:2, ml\n",
    )
    .unwrap();
    let o = qrdkit(&["ber", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = body(&text);
    assert_eq!(rows.len(), 1 + 6);
    for r in &rows[1..] {
        assert_eq!(r.split(',').nth(3), Some("0"), "{r}");
    }

    fs::write(&cfg, "n_t = 4\nbogus = 1\n").unwrap();
    assert_eq!(
        qrdkit(&["ber", "--config", cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn ber_ml_cap_warns_and_omits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "snr_db = 10\ntrials = 50\ndetectors = zf, ml:100\n").unwrap();
    let o = qrdkit(&["ber", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: ml:100 omitted"));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(body(&text).iter().all(|l| !l.starts_with("ml")));
    assert!(text.contains("# refused ml:100"));
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "snr_db = 4\ntrials = 100\nseed = 9\ndetectors = zf\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = String::from_utf8(qrdkit(&["ber", "--config", c]).stdout).unwrap();
    assert!(from_file.contains("# seed=9"));
    let overridden = String::from_utf8(qrdkit(&["--seed", "10", "ber", "--config", c]).stdout).unwrap();
    assert!(overridden.contains("# seed=10"));
    assert_ne!(body(&from_file), body(&overridden));
}
