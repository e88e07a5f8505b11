//! Command-line front end. [`main_with_args`] returns the process exit code:
//! 0 on success, 1 when a property or orbit check fails, 2 on usage, parse or
//! I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::experiments::{linfty_separation, orbit_path, LinftyIsometry, SeparationWitness};
use crate::homotopy::homotopy_trace;
use crate::interval::{NormExponent, StepFn};
use crate::lamperti::{check_p, SumFn, SumIsometry};
use crate::suites::{self, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lpiso",
    version,
    about = "Isometries of L^p Bochner spaces on step functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded property suites and write a JSON report.
    Verify(VerifyArgs),
    /// Sample t -> h(t, T) F as CSV.
    HomotopyTrace(TraceArgs),
    /// Trace a path between two unit vectors of the same orbit as CSV.
    OrbitPath(OrbitArgs),
    /// Separate two distinct random L^∞ isometries on an indicator.
    LinftyDemo(LinftyArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub suite: Option<String>,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Value-space norm exponent; a number or `inf`.
    #[arg(long)]
    pub q: Option<NormExponent>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// JSON `SumIsometry`.
    #[arg(long)]
    pub isometry: PathBuf,
    /// JSON `SumFn`.
    #[arg(long)]
    pub vector: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Reference time for the `dist_to_h_t0` column.
    #[arg(long, default_value_t = 0.5)]
    pub t0: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// JSON scalar `StepFn`, the end of the path.
    #[arg(long)]
    pub f: PathBuf,
    /// JSON scalar `StepFn`, the start of the path.
    #[arg(long)]
    pub g: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinftyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: exit code plus a message for stderr.
struct Exit(i32, String);

fn usage(msg: impl Into<String>) -> Exit {
    Exit(EXIT_USAGE, msg.into())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(&a),
        Command::HomotopyTrace(a) => cmd_homotopy_trace(&a),
        Command::OrbitPath(a) => cmd_orbit_path(&a),
        Command::LinftyDemo(a) => cmd_linfty_demo(&a),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            eprintln!("lpiso: {msg}");
            code
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Exit> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Exit> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| usage(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

/// Resolves the run configuration from an optional file and overriding flags.
pub fn resolve_config(a: &VerifyArgs) -> Result<RunConfig, String> {
    let mut config = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = &a.suite {
        config.suite = s.clone();
    }
    if let Some(p) = &a.p {
        config.p_list = p.clone();
    }
    if let Some(d) = a.dim {
        config.d = d;
    }
    if let Some(q) = a.q {
        config.q = q;
    }
    if let Some(n) = a.trials {
        config.trials = n;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(o) = &a.out {
        config.out = Some(o.clone());
    }
    config.validate()?;
    Ok(config)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32, Exit> {
    let config = resolve_config(a).map_err(usage)?;
    let mut report = suites::run(&config).map_err(usage)?;
    if !a.no_timestamp {
        report.timestamp = Some(
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        );
    }
    emit(config.out.as_deref(), &to_json(&report))?;
    for s in &report.suites {
        eprintln!(
            "{:<20} {:>5} trials  {:>4} failures  max_error {:.3e}  (tolerance {:.0e})",
            s.name, s.trials, s.failures, s.max_error, s.tolerance
        );
    }
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub const TRACE_HEADER: [&str; 5] = [
    "t",
    "norm_hF",
    "dist_to_h_t0",
    "dist_to_T_action",
    "dist_to_identity_action",
];

fn cmd_homotopy_trace(a: &TraceArgs) -> Result<i32, Exit> {
    check_p(a.p).map_err(|e| usage(e.to_string()))?;
    let op: SumIsometry = read_json(&a.isometry)?;
    let f: SumFn = read_json(&a.vector)?;
    let rows = homotopy_trace(&op, &f, a.p, a.samples, a.t0).map_err(|e| usage(e.to_string()))?;
    let rows = rows
        .iter()
        .map(|r| {
            [
                r.t,
                r.norm_hf,
                r.dist_to_h_t0,
                r.dist_to_t_action,
                r.dist_to_identity_action,
            ]
            .into_iter()
            .map(fmt_float)
            .collect()
        })
        .collect();
    emit(a.out.as_deref(), &csv_bytes(&TRACE_HEADER, rows))?;
    Ok(EXIT_OK)
}

/// SHA-256 of the canonical JSON form of `f`.
pub fn step_digest(f: &StepFn) -> String {
    let json = serde_json::to_vec(f).expect("step functions serialize");
    hex::encode(Sha256::digest(&json))
}

pub const ORBIT_HEADER: [&str; 4] = ["t", "norm", "support_measure", "digest"];

fn cmd_orbit_path(a: &OrbitArgs) -> Result<i32, Exit> {
    check_p(a.p).map_err(|e| usage(e.to_string()))?;
    let f: StepFn = read_json(&a.f)?;
    let g: StepFn = read_json(&a.g)?;
    let path = match orbit_path(&f, &g, a.p, a.samples) {
        Ok(path) => path,
        Err(e @ Error::OrbitMismatch) => return Err(Exit(EXIT_FAILURE, e.to_string())),
        Err(e) => return Err(usage(e.to_string())),
    };
    let n = path.len();
    let rows = path
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let t = if k + 1 == n {
                1.0
            } else {
                k as f64 / (n - 1) as f64
            };
            vec![
                fmt_float(t),
                fmt_float(x.norm_p(a.p, NormExponent::Finite(1.0))),
                fmt_float(x.support_measure()),
                step_digest(x),
            ]
        })
        .collect();
    emit(a.out.as_deref(), &csv_bytes(&ORBIT_HEADER, rows))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct LinftyDemo {
    seed: u64,
    t: LinftyIsometry,
    s: LinftyIsometry,
    witness: Option<SeparationWitness>,
}

fn cmd_linfty_demo(a: &LinftyArgs) -> Result<i32, Exit> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let n = rng.gen_range(1..=5);
    let t = LinftyIsometry::random(&mut rng, n);
    let m = rng.gen_range(2..=5);
    let s = t.compose(&LinftyIsometry::random(&mut rng, m));
    let witness = linfty_separation(&t, &s).map_err(|e| usage(e.to_string()))?;
    let ok = witness.as_ref().is_some_and(|w| w.distance >= 1.0 - 1e-9);
    emit(
        a.out.as_deref(),
        &to_json(&LinftyDemo {
            seed: a.seed,
            t,
            s,
            witness,
        }),
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}
