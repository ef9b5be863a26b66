//! Command-line front end for `qrdkit`.
//!
//! Subcommands write plain data: matrix text files for `factorize` and
//! `#`-annotated CSV for the rest. Every output carries the manifest of the
//! run that produced it, so a file can be regenerated from its header.
//!
//! Exit codes: 0 success, 2 usage, 3 parse, 4 numeric failure, 5 I/O.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use qrdkit::channel::{ber_csv, run_ber, SimConfig};
use qrdkit::complexity::{complexity_csv, complexity_table, ComplexityError, TABLE_METHODS};
use qrdkit::linalg::text::{format_matrix, format_vector, parse_matrix, parse_vector};
use qrdkit::linalg::Stage;
use qrdkit::schedule::{build_schedule, gain_from_round_sizes, gram_schmidt_round_sizes, simulate_pipes};
use qrdkit::{QrdError, QrdMethod};
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<QrdError> for CliError {
    fn from(e: QrdError) -> Self {
        match e {
            QrdError::Shape { .. } | QrdError::VectorLength { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ComplexityError> for CliError {
    fn from(e: ComplexityError) -> Self {
        match e {
            ComplexityError::Engine(q) => q.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qrdkit",
    version,
    about = "QR decomposition, Givens scheduling and MIMO detection experiments"
)]
pub struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Suppress progress and warnings on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize a matrix file and write canonical R, ỹ, Q and the cost ledger.
    Factorize(FactorizeArgs),
    /// Closed-form versus metered MUL counts.
    Complexity(ComplexityArgs),
    /// Schedule statistics and optional pipe traces.
    Parallelism(ParallelismArgs),
    /// Monte-Carlo BER sweep.
    Ber(BerArgs),
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// Matrix text file holding H.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Vector text file holding y (one column). Required for rcpgr.
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// clgs, stgs, hh, gr, pgr or rcpgr.
    #[arg(long, default_value = "stgs")]
    pub method: QrdMethod,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    /// Comma list of `RxT` sizes or diagonal ranges `AxB..CxD`.
    #[arg(long, default_value = "2x2..8x8")]
    pub sizes: String,
    /// Comma list of methods (stgs, hh, gr, pgr, rcpgr).
    #[arg(long, default_value = "stgs,hh,gr,pgr,rcpgr")]
    pub methods: String,
    /// Count the Qᴴ·y product in the measured column.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub include_ytilde: bool,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParallelismArgs {
    #[arg(long, default_value = "2x2..8x8")]
    pub sizes: String,
    /// Simulate execution on this many pipes.
    #[arg(long)]
    pub pipes: Option<usize>,
    /// Cycles per annihilation task in the pipe simulation.
    #[arg(long, default_value_t = 1)]
    pub task_cost: u64,
    /// Directory for per-size pipe traces (requires --pipes).
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// `key = value` configuration file; defaults to the 4x4 QPSK sweep.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the trial count of the configuration.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Self-description written at the top of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            params: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    /// `#`-prefixed lines.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qrdkit {} {}", self.version, self.command);
        let _ = writeln!(out, "# seed={}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# {k}={v}");
        }
        for o in &self.outputs {
            let _ = writeln!(out, "# output={o}");
        }
        out
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (r, t) = s
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("size {s:?} is not of the form RxT"))?;
    let r = r.trim().parse::<usize>().map_err(|_| format!("bad size {s:?}"))?;
    let t = t.trim().parse::<usize>().map_err(|_| format!("bad size {s:?}"))?;
    if t == 0 || r < t {
        return Err(format!("size {s:?} needs rows >= cols >= 1"));
    }
    Ok((r, t))
}

/// `8x8`, `6x4,8x8`, or the diagonal range `2x2..8x8`.
pub fn parse_sizes(spec: &str) -> Result<Vec<(usize, usize)>, CliError> {
    let mut sizes = Vec::new();
    for item in spec.split(',') {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b) = (
                parse_size(a).map_err(CliError::Usage)?,
                parse_size(b).map_err(CliError::Usage)?,
            );
            if b.0 < a.0 || b.1 < a.1 || b.0 - a.0 != b.1 - a.1 {
                return Err(CliError::Usage(format!(
                    "range {item:?} must grow rows and cols together"
                )));
            }
            sizes.extend((0..=b.0 - a.0).map(|k| (a.0 + k, a.1 + k)));
        } else {
            sizes.push(parse_size(item).map_err(CliError::Usage)?);
        }
    }
    Ok(sizes)
}

pub fn parse_methods(spec: &str) -> Result<Vec<QrdMethod>, CliError> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|m| m.trim().parse::<QrdMethod>().map_err(CliError::Usage))
        .collect()
}

fn sizes_label(sizes: &[(usize, usize)]) -> String {
    sizes
        .iter()
        .map(|(r, t)| format!("{r}x{t}"))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_factorize(args: &FactorizeArgs, seed: u64) -> Result<RunManifest, CliError> {
    let h = parse_matrix(&read(&args.matrix)?).map_err(|e| CliError::Parse(e.to_string()))?;
    let y = match &args.y {
        Some(p) => parse_vector(&read(p)?).map_err(|e| CliError::Parse(e.to_string()))?,
        None if args.method == QrdMethod::Rcpgr => {
            return Err(CliError::Usage("rcpgr needs --y: it triangularizes [H y]".into()))
        }
        None => vec![Complex64::new(0.0, 0.0); h.rows()],
    };
    let f = args.method.factorize(&h, &y)?;

    fs::create_dir_all(&args.out).map_err(|source| CliError::Io {
        path: args.out.clone(),
        source,
    })?;
    let mut manifest = RunManifest::new("factorize", seed)
        .param("matrix", args.matrix.display())
        .param(
            "y",
            args.y.as_ref().map_or("zeros".to_string(), |p| p.display().to_string()),
        )
        .param("method", args.method)
        .param("shape", format!("{}x{}", h.rows(), h.cols()));
    let mut files = vec![
        ("R.txt", format_matrix(&f.r)),
        ("ytilde.txt", format_vector(&f.y_tilde)),
    ];
    if let Some(q) = &f.q {
        files.push(("Q.txt", format_matrix(q)));
    }
    let mut ledger = String::from("stage,real_mul,real_div,real_sqrt,mul_units\n");
    for s in Stage::ALL {
        let c = f.ledger.stage(s);
        let _ = writeln!(
            ledger,
            "{},{},{},{},{}",
            s.name(),
            c.real_mul,
            c.real_div,
            c.real_sqrt,
            c.mul_units()
        );
    }
    let b = f.ledger.breakdown();
    let _ = writeln!(
        ledger,
        "total,{},{},{},{}",
        b.real_mul,
        b.real_div,
        b.real_sqrt,
        f.ledger.mul_count()
    );
    files.push(("ledger.csv", ledger));

    manifest.outputs = files.iter().map(|(name, _)| name.to_string()).collect();
    let header = manifest.render();
    for (name, body) in &files {
        write(&args.out.join(name), &format!("{header}{body}"))?;
    }
    write(&args.out.join("manifest.txt"), &header)?;
    Ok(manifest)
}

pub fn cmd_complexity(args: &ComplexityArgs, seed: u64) -> Result<RunManifest, CliError> {
    let sizes = parse_sizes(&args.sizes)?;
    let methods = parse_methods(&args.methods)?;
    if let Some(m) = methods.iter().find(|m| !TABLE_METHODS.contains(m)) {
        return Err(CliError::Usage(format!("no closed-form count for {m}")));
    }
    let rows = complexity_table(&sizes, &methods, args.include_ytilde, seed)?;
    let mut manifest = RunManifest::new("complexity", seed)
        .param("sizes", sizes_label(&sizes))
        .param(
            "methods",
            methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","),
        )
        .param("include_ytilde", args.include_ytilde)
        .param(
            "cost_model",
            "real mul 1, add 0, div 16, sqrt 32; complex mul 4 real mul",
        );
    manifest.outputs = args.out.iter().map(|p| p.display().to_string()).collect();
    emit(
        args.out.as_deref(),
        &format!("{}{}", manifest.render(), complexity_csv(&rows)),
    )?;
    Ok(manifest)
}

pub const PARALLELISM_CSV_HEADER: &str = "n_r,n_t,tasks,rounds,givens_gain,stgs_tasks,stgs_rounds,stgs_gain";

pub fn cmd_parallelism(args: &ParallelismArgs, seed: u64) -> Result<RunManifest, CliError> {
    let sizes = parse_sizes(&args.sizes)?;
    if args.trace_dir.is_some() && args.pipes.is_none() {
        return Err(CliError::Usage("--trace-dir requires --pipes".into()));
    }
    if args.pipes == Some(0) || args.task_cost == 0 {
        return Err(CliError::Usage("--pipes and --task-cost must be positive".into()));
    }
    let mut manifest = RunManifest::new("parallelism", seed)
        .param("sizes", sizes_label(&sizes))
        .param("gain", "tasks in rounds of size >= 2 / all tasks");
    if let Some(p) = args.pipes {
        manifest = manifest.param("pipes", p).param("task_cost", args.task_cost);
    }
    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let mut body = String::from(PARALLELISM_CSV_HEADER);
    if args.pipes.is_some() {
        body.push_str(",pipes,makespan");
    }
    body.push('\n');
    let mut traces = Vec::new();
    for &(r, t) in &sizes {
        let s = build_schedule(r, t).map_err(|e| CliError::Usage(e.to_string()))?;
        let gs = gram_schmidt_round_sizes(t);
        let _ = write!(
            body,
            "{r},{t},{},{},{:.6},{},{},{:.6}",
            s.sequential_steps(),
            s.parallel_steps(),
            s.parallelism_gain(),
            gs.iter().sum::<usize>(),
            gs.len(),
            gain_from_round_sizes(&gs)
        );
        if let Some(p) = args.pipes {
            let trace = simulate_pipes(&s, p, args.task_cost).map_err(|e| CliError::Usage(e.to_string()))?;
            let _ = write!(body, ",{p},{}", trace.makespan);
            if let Some(dir) = &args.trace_dir {
                let path = dir.join(format!("trace_{r}x{t}_p{p}.csv"));
                traces.push((path, trace.to_csv()));
            }
        }
        body.push('\n');
    }
    manifest.outputs = args.out.iter().map(|p| p.display().to_string()).collect();
    manifest
        .outputs
        .extend(traces.iter().map(|(p, _)| p.display().to_string()));
    let header = manifest.render();
    for (path, csv) in &traces {
        write(path, &format!("{header}{csv}"))?;
    }
    emit(args.out.as_deref(), &format!("{header}{body}"))?;
    Ok(manifest)
}

pub fn cmd_ber(args: &BerArgs, seed: u64, seed_given: bool, quiet: bool) -> Result<RunManifest, CliError> {
    let mut cfg = match &args.config {
        Some(p) => config::parse_config(&read(p)?)?,
        None => SimConfig::default(),
    };
    if seed_given {
        cfg.seed = seed;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let run = || run_ber(&cfg).map_err(|e| CliError::Usage(e.to_string()));
    let curves = match args.threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    for c in curves.iter().filter(|c| c.refused.is_some()) {
        if !quiet {
            eprintln!("warning: {} omitted: {}", c.label, c.refused.as_deref().unwrap_or(""));
        }
    }
    let mut manifest =
        RunManifest::new("ber", cfg.seed).param("config", config::render_config(&cfg).trim_end().replace('\n', "; "));
    manifest.outputs = args.out.iter().map(|p| p.display().to_string()).collect();
    let header = manifest.render();
    // The library CSV carries its own metadata; drop lines the manifest already has.
    let csv = ber_csv(&cfg, &curves);
    let body: String = csv
        .lines()
        .filter(|l| !header.lines().any(|h| h == *l))
        .map(|l| format!("{l}\n"))
        .collect();
    emit(args.out.as_deref(), &format!("{header}{body}"))?;
    Ok(manifest)
}

/// Runs a parsed command line. `seed_given` tells whether `--seed` was
/// passed explicitly (it then overrides a config-file seed).
pub fn run(cli: &Cli, seed_given: bool) -> Result<RunManifest, CliError> {
    match &cli.command {
        Command::Factorize(a) => cmd_factorize(a, cli.seed),
        Command::Complexity(a) => cmd_complexity(a, cli.seed),
        Command::Parallelism(a) => cmd_parallelism(a, cli.seed),
        Command::Ber(a) => cmd_ber(a, cli.seed, seed_given, cli.quiet),
    }
}
