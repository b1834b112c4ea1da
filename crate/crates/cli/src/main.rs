//! `eisen`: scan for Eisenstein discriminants, check single values, validate
//! against the exact oracle, and evaluate or fit the counting constants.
//!
//! Exit codes: 0 success, 1 validation mismatch, 2 invalid configuration or
//! input, 3 I/O failure, 4 internal error, 130 interrupted scan (resumable).

mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::Ordering;
use std::sync::Arc;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::ConfigFile;
use eisen_core::analysis::{bounds_report, compute_c56, fit_primes, fit_secondary, AnalysisError};
use eisen_core::ideal::QuadField;
use eisen_core::oracle::ORACLE_LIMIT;
use eisen_core::scan::{read_checkpoints, run_scan, Checkpoints, ScanConfig, ScanError, StopControl, DEFAULT_SEGMENT_SIZE};
use eisen_core::store::StoreBackend;
use eisen_core::validate::{validate_range, Fault};
use eisen_core::eisenstein_residue;

#[derive(Parser, Debug)]
#[command(name = "eisen", version, about = "Residues of fundamental units mod 2 and counts of Eisenstein discriminants")]
struct Cli {
    /// key=value file supplying defaults for scan and validate options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan a range of d, writing checkpoint rows and optionally a hit list.
    Scan(ScanArgs),
    /// Compute the residue of the fundamental unit for one d.
    Check {
        d: i64,
    },
    /// Compare the infrastructure with the exact oracle for all d up to a limit.
    Validate(ValidateArgs),
    /// Evaluate C_1, C_5/6 and their ingredients.
    Constants(ConstantsArgs),
    /// Fit the secondary-term models to a checkpoint CSV.
    Fit(FitArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Bloom,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    /// Checkpoint CSV path; `.hits` and `.meta` files are written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "EISEN_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    segment_size: Option<u64>,
    /// Checkpoint every multiple of this value.
    #[arg(long, conflicts_with = "per_decade")]
    stride: Option<u64>,
    /// Checkpoint this many times per decade, log-spaced.
    #[arg(long)]
    per_decade: Option<u32>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Target false-positive rate of the Bloom store.
    #[arg(long)]
    fpr: Option<f64>,
    /// Write the list of Eisenstein d.
    #[arg(long)]
    list: bool,
    /// Continue an interrupted scan with the same configuration.
    #[arg(long)]
    resume: bool,
    /// Stop cleanly once everything below this value is done.
    #[arg(long)]
    stop_at: Option<u64>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long)]
    limit: Option<u64>,
    #[arg(long, env = "EISEN_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    fpr: Option<f64>,
    /// Relabel computed residues to make sure mismatches are reported.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Args, Debug)]
struct ConstantsArgs {
    /// Euler product over primes up to this value.
    #[arg(long, default_value_t = 1_000_000)]
    cutoff: u64,
    /// Also print the bounds on pi_E at this x.
    #[arg(long)]
    at: Option<u64>,
    /// Measured pi_E(x) to compare with the bounds.
    #[arg(long, requires = "at")]
    measured: Option<u64>,
    /// Write key=value summary lines here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    csv: PathBuf,
    /// Ignore rows with x below this.
    #[arg(long)]
    from: Option<u64>,
    /// Ignore rows with x above this.
    #[arg(long)]
    to: Option<u64>,
    /// Also fit the prime subsequence.
    #[arg(long)]
    primes: bool,
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: e.into() }
    }
    fn io(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: 3, error: e.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<ScanError> for Failure {
    fn from(e: ScanError) -> Self {
        let code = match e {
            ScanError::Io { .. } => 3,
            ScanError::Config(_) | ScanError::Malformed { .. } | ScanError::FingerprintMismatch { .. } => 2,
        };
        Failure { code, error: e.into() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::config(e)
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Scan(a) => cmd_scan(a, &file),
        Command::Check { d } => cmd_check(d),
        Command::Validate(a) => cmd_validate(a, &file),
        Command::Constants(a) => cmd_constants(a),
        Command::Fit(a) => cmd_fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

/// Flag, then config file, then default.
fn pick<T: std::str::FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> Result<Option<T>, Failure> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key).map_err(Failure::config),
    }
}

fn backend(flag: Option<Backend>, fpr: Option<f64>, file: &ConfigFile) -> Result<StoreBackend, Failure> {
    let name = match flag {
        Some(Backend::Exact) => "exact".to_string(),
        Some(Backend::Bloom) => "bloom".to_string(),
        None => file.get::<String>("backend").map_err(Failure::config)?.unwrap_or_else(|| "exact".into()),
    };
    let fpr = pick(fpr, file, "fpr")?.unwrap_or(1e-3);
    match name.as_str() {
        "exact" => Ok(StoreBackend::Exact),
        "bloom" if fpr > 0.0 && fpr <= 0.1 => Ok(StoreBackend::Bloom { fpr }),
        "bloom" => Err(Failure::config(anyhow!("fpr must lie in (0, 0.1], got {fpr}"))),
        other => Err(Failure::config(anyhow!("unknown backend `{other}`"))),
    }
}

fn workers(flag: Option<usize>, file: &ConfigFile) -> Result<usize, Failure> {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    Ok(pick(flag, file, "workers")?.unwrap_or(default))
}

fn cmd_scan(a: ScanArgs, file: &ConfigFile) -> Outcome {
    let lo = pick(a.lo, file, "lo")?.unwrap_or(0);
    let hi = pick(a.hi, file, "hi")?.ok_or_else(|| Failure::config(anyhow!("--hi is required")))?;
    let out: PathBuf = pick(a.out, file, "out")?.unwrap_or_else(|| PathBuf::from("checkpoints.csv"));
    let checkpoints = match (a.stride, a.per_decade) {
        (Some(s), _) => Checkpoints::Linear(s),
        (None, Some(n)) => Checkpoints::Log(n),
        (None, None) => match (file.get("stride").map_err(Failure::config)?, file.get("per_decade").map_err(Failure::config)?) {
            (Some(_), Some(_)) => return Err(Failure::config(anyhow!("config sets both stride and per_decade"))),
            (Some(s), None) => Checkpoints::Linear(s),
            (None, Some(n)) => Checkpoints::Log(n),
            (None, None) => Checkpoints::Linear(1_000_000),
        },
    };
    let list = a.list || file.get::<bool>("list").map_err(Failure::config)?.unwrap_or(false);
    let cfg = ScanConfig {
        lo,
        hi,
        workers: workers(a.workers, file)?,
        segment_size: pick(a.segment_size, file, "segment_size")?.unwrap_or(DEFAULT_SEGMENT_SIZE),
        checkpoints,
        backend: backend(a.backend, a.fpr, file)?,
        list,
    };
    cfg.validate()?;

    let stop = Arc::new(StopControl { stop_at: a.stop_at, ..Default::default() });
    let handler_stop = Arc::clone(&stop);
    // A second registration fails only when a handler already exists.
    let _ = ctrlc::set_handler(move || handler_stop.flag.store(true, Ordering::SeqCst));

    let s = run_scan(&cfg, &out, a.resume, &stop)?;
    if s.already_complete {
        println!("scan of [{lo}, {hi}) already complete: pi_D={} pi_E={} pi_E_prime={}", s.counts.pi_d, s.counts.pi_e, s.counts.pi_e_prime);
        return Ok(0);
    }
    let st = &s.stats;
    println!("range [{lo}, {}) of [{lo}, {hi})  {:.1}s", s.progress, s.elapsed);
    println!("pi_D={} pi_E={} pi_E_prime={}", s.counts.pi_d, s.counts.pi_e, s.counts.pi_e_prime);
    println!(
        "examined={} bsgs={} full_walk={} symmetry_fallback={} giant_steps={} giant_cap_hits={} retried={} valuation_events={} bloom_false_positives={}",
        st.examined, st.bsgs, st.full_walks, st.symmetry_fallbacks, st.giant_steps, st.giant_cap_hits, st.retried, st.valuation_events, st.bloom_false_positives
    );
    if !st.unresolved.is_empty() {
        eprintln!("error: {} d could not be classified: {:?}", st.unresolved.len(), st.unresolved);
        return Ok(4);
    }
    if !s.complete {
        eprintln!("interrupted; rerun with --resume to continue");
        return Ok(130);
    }
    Ok(0)
}

/// Trial division by p² for p up to min(√d, 10^7). Returns Some(p) for a
/// square factor, None if none was found, and whether the search was complete.
fn square_factor(d: i64) -> (Option<i64>, bool) {
    let root = d.isqrt();
    let limit = root.min(10_000_000);
    let mut p = 3;
    while p <= limit {
        if d % (p * p) == 0 {
            return (Some(p), true);
        }
        p += 2;
    }
    (None, limit == root)
}

fn cmd_check(d: i64) -> Outcome {
    if d <= 0 || d % 8 != 5 {
        return Err(Failure::config(anyhow!("d must be a positive integer = 5 (mod 8), got {d}")));
    }
    QuadField::new(d).map_err(Failure::config)?;
    match square_factor(d) {
        (Some(p), _) => return Err(Failure::config(anyhow!("{d} is divisible by {p}^2"))),
        (None, false) => eprintln!("warning: no square factor below 10^14 found; assuming {d} is squarefree"),
        (None, true) => {}
    }
    let r = eisenstein_residue(d).map_err(|e| Failure { code: 4, error: e.into() })?;
    println!("d={d}");
    println!("t={}", r.residue.log());
    println!("eisenstein={}", r.eisenstein);
    println!("method={}", r.method);
    println!("baby_steps={}", r.stats.baby_steps);
    println!("giant_steps={}", r.stats.giant_steps);
    println!("regulator={:.6}", r.regulator);
    Ok(0)
}

fn cmd_validate(a: ValidateArgs, file: &ConfigFile) -> Outcome {
    let limit = match a.limit {
        Some(l) => l,
        None => file.get("oracle_limit").map_err(Failure::config)?.unwrap_or(100_000),
    };
    if limit > ORACLE_LIMIT as u64 {
        return Err(Failure::config(anyhow!("limit {limit} exceeds the oracle limit {ORACLE_LIMIT}")));
    }
    let fault = if a.inject_fault { Fault::PermutedResidues } else { Fault::None };
    let rep = validate_range(limit, backend(a.backend, a.fpr, file)?, workers(a.workers, file)?, fault)
        .map_err(|e| Failure { code: 4, error: e.into() })?;
    println!("checked {} d <= {limit}", rep.checked);
    println!("residue mismatches: {}", rep.residue_mismatches.len());
    for m in rep.residue_mismatches.iter().take(20) {
        let got = m.computed.map(|r| r.log().to_string()).unwrap_or_else(|| "failed".into());
        println!("  d={} computed t={got} oracle t={}", m.d, m.expected.log());
    }
    println!("odd-solution equivalence mismatches: {}", rep.lemma_mismatches.len());
    for d in rep.lemma_mismatches.iter().take(20) {
        println!("  d={d}");
    }
    println!("valuation events: {}", rep.stats.valuation_events);
    Ok(if rep.passed() { 0 } else { 1 })
}

fn write_summary(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(anyhow!("{}: {e}", path.display())))
}

fn cmd_constants(a: ConstantsArgs) -> Outcome {
    let r = compute_c56(a.cutoff)?;
    println!("{r}");
    let mut summary = r.summary();
    if let Some(x) = a.at {
        let b = bounds_report(x, a.measured, r.c56);
        println!("{b}");
        summary.push_str(&format!("bounds_x={x}\nbounds_lower={:.3}\nbounds_upper={:.3}\nbounds_upper_stated={:.3}\n", b.lower, b.upper_derived, b.upper_stated));
    }
    if let Some(p) = a.summary {
        write_summary(&p, &summary)?;
    }
    Ok(0)
}

fn cmd_fit(a: FitArgs) -> Outcome {
    let rows = read_checkpoints(&a.csv)?;
    let rows: Vec<_> = rows
        .into_iter()
        .filter(|r| a.from.is_none_or(|f| r.x >= f) && a.to.is_none_or(|t| r.x <= t))
        .collect();
    let fit = fit_secondary(&rows)?;
    println!("{fit}");
    let mut summary = fit.summary();
    if a.primes {
        let pf = fit_primes(&rows)?;
        println!("{pf}");
        summary.push_str(&pf.summary());
    }
    let last = rows.iter().max_by_key(|r| r.x).expect("fit succeeded on nonempty rows");
    let c = compute_c56(100_000)?;
    println!("{}", bounds_report(last.x, Some(last.counts.pi_e), c.c56));
    if let Some(p) = a.summary {
        write_summary(&p, &summary)?;
    }
    Ok(0)
}
