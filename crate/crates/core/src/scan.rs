//! Parallel range scan with checkpoint files and resume.
//!
//! The range is cut into segments of `segment_size` integers. Batches of
//! segments are computed on a worker pool and merged in order by the calling
//! thread, which owns every output file. Data files therefore do not depend
//! on the worker count.
//!
//! Files for an output path `cp.csv`:
//! - `cp.csv`: header `x,pi_D,pi_E,pi_E_prime,elapsed_s`, one row per
//!   checkpoint. Counts cover `lo ≤ d < x`.
//! - `cp.csv.hits` (when listing): `d,method,baby_steps,giant_steps` per
//!   Eisenstein d, no header.
//! - `cp.csv.meta`: `key=value` lines with the config fingerprint and the
//!   position up to which everything has been merged.

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::error::ArithError;
use crate::infrastructure::{eisenstein_residue_with, full_walk_residue, EisensteinResult, Method};
use crate::sieve::{primes_up_to, Segment};
use crate::store::{AnyStore, StoreBackend};

pub const CSV_HEADER: &str = "x,pi_D,pi_E,pi_E_prime,elapsed_s";
pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: malformed checkpoint data: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("checkpoint was written with a different configuration (expected `{expected}`, found `{found}`)")]
    FingerprintMismatch { expected: String, found: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ScanError + '_ {
    move |source| ScanError::Io { path: path.to_path_buf(), source }
}

/// Where checkpoint rows fall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checkpoints {
    /// Every multiple of the stride.
    Linear(u64),
    /// `n` rows per decade at ⌊10^(k + j/n)⌉.
    Log(u32),
}

impl Checkpoints {
    /// Row positions in (lo, hi], always ending with hi.
    pub fn positions(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut xs = Vec::new();
        match *self {
            Checkpoints::Linear(stride) => {
                let mut x = (lo / stride + 1) * stride;
                while x < hi {
                    xs.push(x);
                    x += stride;
                }
            }
            Checkpoints::Log(n) => {
                for k in 0..20u32 {
                    for j in 0..n {
                        let x = (10f64.powf(k as f64 + j as f64 / n as f64)).round() as u64;
                        if x > lo && x < hi && xs.last() != Some(&x) {
                            xs.push(x);
                        }
                    }
                }
            }
        }
        xs.push(hi);
        xs
    }
}

impl fmt::Display for Checkpoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Checkpoints::Linear(s) => write!(f, "linear:{s}"),
            Checkpoints::Log(n) => write!(f, "log:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub lo: u64,
    pub hi: u64,
    pub workers: usize,
    pub segment_size: u64,
    pub checkpoints: Checkpoints,
    pub backend: StoreBackend,
    /// Write the hit list next to the CSV.
    pub list: bool,
}

impl ScanConfig {
    pub fn new(lo: u64, hi: u64) -> Self {
        ScanConfig {
            lo,
            hi,
            workers: 1,
            segment_size: DEFAULT_SEGMENT_SIZE,
            checkpoints: Checkpoints::Linear(1_000_000),
            backend: StoreBackend::Exact,
            list: false,
        }
    }

    pub fn validate(&self) -> Result<(), ScanError> {
        let bad = |m: &str| Err(ScanError::Config(m.to_string()));
        if self.lo >= self.hi {
            return bad("lo must be below hi");
        }
        if self.hi > (i64::MAX as u64) / 4 {
            return bad("hi is too large");
        }
        if self.workers == 0 {
            return bad("workers must be positive");
        }
        if self.segment_size == 0 || !self.segment_size.is_multiple_of(8) {
            return bad("segment size must be a positive multiple of 8");
        }
        match self.checkpoints {
            Checkpoints::Linear(0) => return bad("checkpoint stride must be positive"),
            Checkpoints::Log(0) => return bad("checkpoints per decade must be positive"),
            _ => {}
        }
        if let StoreBackend::Bloom { fpr } = self.backend {
            if !(fpr > 0.0 && fpr <= 0.1) {
                return bad("bloom false-positive rate must lie in (0, 0.1]");
            }
        }
        Ok(())
    }

    /// Everything that affects the data files. The worker count is left out.
    pub fn fingerprint(&self) -> String {
        let backend = match self.backend {
            StoreBackend::Exact => "exact".to_string(),
            StoreBackend::Bloom { fpr } => format!("bloom:{fpr}"),
        };
        format!(
            "lo={};hi={};segment={};checkpoints={};backend={};list={}",
            self.lo, self.hi, self.segment_size, self.checkpoints, backend, self.list
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub pi_d: u64,
    pub pi_e: u64,
    pub pi_e_prime: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.pi_d += o.pi_d;
        self.pi_e += o.pi_e;
        self.pi_e_prime += o.pi_e_prime;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hit {
    pub d: u64,
    pub method: Method,
    pub baby_steps: u32,
    pub giant_steps: u32,
}

impl fmt::Display for Hit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.d, self.method, self.baby_steps, self.giant_steps)
    }
}

/// Diagnostics summed over every d examined in this run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub examined: u64,
    pub bsgs: u64,
    pub full_walks: u64,
    pub symmetry_fallbacks: u64,
    pub giant_steps: u64,
    pub giant_cap_hits: u64,
    /// d whose infrastructure run failed and was retried by a full walk.
    pub retried: u64,
    /// Failures caused by a generator with nonzero 2-adic valuation.
    pub valuation_events: u64,
    pub bloom_false_positives: u64,
    /// d for which the full-walk retry failed too; these are not counted.
    pub unresolved: Vec<u64>,
}

impl ScanStats {
    pub fn merge(&mut self, o: &ScanStats) {
        self.examined += o.examined;
        self.bsgs += o.bsgs;
        self.full_walks += o.full_walks;
        self.symmetry_fallbacks += o.symmetry_fallbacks;
        self.giant_steps += o.giant_steps;
        self.giant_cap_hits += o.giant_cap_hits;
        self.retried += o.retried;
        self.valuation_events += o.valuation_events;
        self.bloom_false_positives += o.bloom_false_positives;
        self.unresolved.extend_from_slice(&o.unresolved);
    }

    fn record(&mut self, r: &EisensteinResult) {
        self.examined += 1;
        match r.method {
            Method::Bsgs => self.bsgs += 1,
            Method::FullWalk => self.full_walks += 1,
            Method::SymmetryFallback => self.symmetry_fallbacks += 1,
        }
        self.giant_steps += r.stats.giant_steps as u64;
        self.giant_cap_hits += r.stats.giant_cap_hit as u64;
    }
}

/// Computes one d, retrying with a full walk if the infrastructure fails.
pub fn classify(d: u64, store: &mut AnyStore, stats: &mut ScanStats) -> Option<EisensteinResult> {
    let r = match eisenstein_residue_with(d as i64, store) {
        Ok(r) => Ok(r),
        Err(e) => {
            stats.retried += 1;
            if matches!(e, ArithError::Valuation { .. }) {
                stats.valuation_events += 1;
            }
            full_walk_residue(d as i64)
        }
    };
    if let AnyStore::Bloom(b) = store {
        stats.bloom_false_positives += std::mem::take(&mut b.false_positives);
    }
    match r {
        Ok(r) => {
            stats.record(&r);
            Some(r)
        }
        Err(_) => {
            stats.unresolved.push(d);
            None
        }
    }
}

struct SegmentResult {
    /// Counts over [seg.lo, x) for each checkpoint x in (seg.lo, seg.hi).
    partial: Vec<(u64, Counts)>,
    total: Counts,
    hits: Vec<Hit>,
    stats: ScanStats,
}

fn scan_segment(lo: u64, hi: u64, primes: &[u64], rows: &[u64], store: &mut AnyStore, list: bool) -> SegmentResult {
    let seg = Segment::sieve(lo, hi, primes);
    let mut inner = rows.iter().copied().filter(|&x| x > lo && x < hi).peekable();
    let mut out = SegmentResult { partial: Vec::new(), total: Counts::default(), hits: Vec::new(), stats: ScanStats::default() };
    for (d, prime) in seg.members() {
        while let Some(&x) = inner.peek() {
            if x > d {
                break;
            }
            out.partial.push((x, out.total));
            inner.next();
        }
        out.total.pi_d += 1;
        let Some(r) = classify(d, store, &mut out.stats) else { continue };
        if r.eisenstein {
            out.total.pi_e += 1;
            out.total.pi_e_prime += prime as u64;
            if list {
                out.hits.push(Hit { d, method: r.method, baby_steps: r.stats.baby_steps, giant_steps: r.stats.giant_steps });
            }
        }
    }
    out.partial.extend(inner.map(|x| (x, out.total)));
    out
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub x: u64,
    pub counts: Counts,
    pub elapsed: f64,
}

impl Checkpoint {
    pub fn to_csv(&self) -> String {
        let c = self.counts;
        format!("{},{},{},{},{:.3}", self.x, c.pi_d, c.pi_e, c.pi_e_prime, self.elapsed)
    }

    pub fn parse(line: &str) -> Option<Checkpoint> {
        let f: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if f.len() != 5 {
            return None;
        }
        let n = |i: usize| f[i].parse::<u64>().ok();
        Some(Checkpoint {
            x: n(0)?,
            counts: Counts { pi_d: n(1)?, pi_e: n(2)?, pi_e_prime: n(3)? },
            elapsed: f[4].parse().ok()?,
        })
    }
}

/// Reads a checkpoint CSV, checking the header and row invariants.
pub fn read_checkpoints(path: &Path) -> Result<Vec<Checkpoint>, ScanError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let malformed = |reason: String| ScanError::Malformed { path: path.to_path_buf(), reason };
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(malformed("missing or wrong header".into()));
    }
    let mut rows: Vec<Checkpoint> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = Checkpoint::parse(line).ok_or_else(|| malformed(format!("bad row {}", i + 2)))?;
        let c = row.counts;
        if c.pi_e > c.pi_d || c.pi_e_prime > c.pi_e {
            return Err(malformed(format!("row {} violates pi_E_prime <= pi_E <= pi_D", i + 2)));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn hits_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".hits");
    PathBuf::from(s)
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Resume state kept next to the CSV.
#[derive(Debug, Clone, PartialEq)]
struct Meta {
    fingerprint: String,
    /// Every d below this has been merged.
    progress: u64,
    counts: Counts,
    elapsed: f64,
    complete: bool,
}

impl Meta {
    fn write(&self, path: &Path) -> Result<(), ScanError> {
        let c = self.counts;
        let text = format!(
            "fingerprint={}\nprogress={}\npi_D={}\npi_E={}\npi_E_prime={}\nelapsed_s={:.3}\ncomplete={}\n",
            self.fingerprint, self.progress, c.pi_d, c.pi_e, c.pi_e_prime, self.elapsed, self.complete
        );
        let tmp = path.with_extension("meta.tmp");
        fs::write(&tmp, text).map_err(io_err(&tmp))?;
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    fn read(path: &Path) -> Result<Meta, ScanError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let malformed = |reason: &str| ScanError::Malformed { path: path.to_path_buf(), reason: reason.to_string() };
        let get = |key: &str| {
            text.lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| malformed(key))
        };
        let num = |key: &str| get(key)?.parse::<u64>().map_err(|_| malformed(key));
        Ok(Meta {
            fingerprint: get("fingerprint")?.to_string(),
            progress: num("progress")?,
            counts: Counts { pi_d: num("pi_D")?, pi_e: num("pi_E")?, pi_e_prime: num("pi_E_prime")? },
            elapsed: get("elapsed_s")?.parse().map_err(|_| malformed("elapsed_s"))?,
            complete: get("complete")? == "true",
        })
    }
}

/// Outcome of [`run_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub counts: Counts,
    /// Every d below this was merged.
    pub progress: u64,
    pub complete: bool,
    /// True when resuming found a finished scan and did nothing.
    pub already_complete: bool,
    pub stats: ScanStats,
    pub elapsed: f64,
}

/// Controls for stopping a scan early.
#[derive(Debug, Default)]
pub struct StopControl {
    /// Set from outside (e.g. a signal handler) to stop after the current batch.
    pub flag: AtomicBool,
    /// Stop once the merged position reaches this value.
    pub stop_at: Option<u64>,
}

/// Keeps complete lines of `path` accepted by `keep`, dropping everything
/// from the first rejected or unterminated line on.
fn truncate_lines(path: &Path, mut keep: impl FnMut(&str) -> bool) -> Result<(), ScanError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = BufReader::new(file);
    let mut len = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(io_err(path))?;
        if n == 0 || !line.ends_with('\n') || !keep(line.trim_end_matches('\n')) {
            break;
        }
        len += n as u64;
    }
    OpenOptions::new().write(true).open(path).and_then(|f| f.set_len(len)).map_err(io_err(path))
}

/// Runs (or resumes) a scan writing to `csv`. Without `resume` existing files
/// are replaced.
pub fn run_scan(cfg: &ScanConfig, csv: &Path, resume: bool, stop: &StopControl) -> Result<ScanSummary, ScanError> {
    cfg.validate()?;
    let meta_file = meta_path(csv);
    let hits_file = hits_path(csv);
    let fingerprint = cfg.fingerprint();

    let mut meta = Meta { fingerprint: fingerprint.clone(), progress: cfg.lo, counts: Counts::default(), elapsed: 0.0, complete: false };
    if resume && meta_file.exists() {
        let found = Meta::read(&meta_file)?;
        if found.fingerprint != fingerprint {
            return Err(ScanError::FingerprintMismatch { expected: fingerprint, found: found.fingerprint });
        }
        meta = found;
        if meta.complete {
            return Ok(ScanSummary {
                counts: meta.counts,
                progress: meta.progress,
                complete: true,
                already_complete: true,
                stats: ScanStats::default(),
                elapsed: meta.elapsed,
            });
        }
        let progress = meta.progress;
        let mut first = true;
        truncate_lines(csv, |l| {
            let header = std::mem::replace(&mut first, false);
            header || Checkpoint::parse(l).is_some_and(|r| r.x <= progress)
        })?;
        if cfg.list {
            if hits_file.exists() {
                truncate_lines(&hits_file, |l| l.split(',').next().and_then(|d| d.parse::<u64>().ok()).is_some_and(|d| d < progress))?;
            } else {
                File::create(&hits_file).map_err(io_err(&hits_file))?;
            }
        }
    } else {
        fs::write(csv, format!("{CSV_HEADER}\n")).map_err(io_err(csv))?;
        if cfg.list {
            File::create(&hits_file).map_err(io_err(&hits_file))?;
        }
        meta.write(&meta_file)?;
    }

    let mut csv_out = BufWriter::new(OpenOptions::new().append(true).open(csv).map_err(io_err(csv))?);
    let mut hits_out = if cfg.list {
        Some(BufWriter::new(OpenOptions::new().append(true).open(&hits_file).map_err(io_err(&hits_file))?))
    } else {
        None
    };

    let rows: Vec<u64> = cfg.checkpoints.positions(cfg.lo, cfg.hi).into_iter().filter(|&x| x > meta.progress).collect();
    let primes = primes_up_to((cfg.hi - 1).isqrt());
    let segments: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut a = meta.progress;
        while a < cfg.hi {
            let b = (a + cfg.segment_size).min(cfg.hi);
            v.push((a, b));
            a = b;
        }
        v
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ScanError::Config(format!("cannot start worker pool: {e}")))?;

    let started = Instant::now();
    let base_elapsed = meta.elapsed;
    let mut stats = ScanStats::default();
    let mut next_row = 0;
    let batch = (cfg.workers * 4).max(1);

    for chunk in segments.chunks(batch) {
        if stop.flag.load(Ordering::SeqCst) || stop.stop_at.is_some_and(|s| meta.progress >= s) {
            break;
        }
        let results: Vec<SegmentResult> = pool.install(|| {
            chunk
                .par_iter()
                .map_init(
                    || cfg.backend.build(),
                    |store, &(lo, hi)| scan_segment(lo, hi, &primes, &rows, store, cfg.list),
                )
                .collect()
        });
        for (&(_, hi), res) in chunk.iter().zip(results) {
            let elapsed = base_elapsed + started.elapsed().as_secs_f64();
            for (x, part) in &res.partial {
                let mut c = meta.counts;
                c += *part;
                writeln!(csv_out, "{}", Checkpoint { x: *x, counts: c, elapsed }.to_csv()).map_err(io_err(csv))?;
                next_row += 1;
            }
            meta.counts += res.total;
            meta.progress = hi;
            if rows.get(next_row) == Some(&hi) {
                writeln!(csv_out, "{}", Checkpoint { x: hi, counts: meta.counts, elapsed }.to_csv()).map_err(io_err(csv))?;
                next_row += 1;
            }
            if let Some(h) = hits_out.as_mut() {
                for hit in &res.hits {
                    writeln!(h, "{hit}").map_err(io_err(&hits_file))?;
                }
            }
            stats.merge(&res.stats);
        }
        csv_out.flush().map_err(io_err(csv))?;
        if let Some(h) = hits_out.as_mut() {
            h.flush().map_err(io_err(&hits_file))?;
        }
        meta.elapsed = base_elapsed + started.elapsed().as_secs_f64();
        meta.complete = meta.progress == cfg.hi;
        meta.write(&meta_file)?;
    }

    Ok(ScanSummary {
        counts: meta.counts,
        progress: meta.progress,
        complete: meta.complete,
        already_complete: false,
        stats,
        elapsed: meta.elapsed,
    })
}

/// Counts over [lo, hi) computed in memory on the current thread.
pub fn count_range(lo: u64, hi: u64, backend: StoreBackend) -> (Counts, ScanStats) {
    let primes = primes_up_to(hi.saturating_sub(1).isqrt());
    let mut store = backend.build();
    let res = scan_segment(lo, hi, &primes, &[], &mut store, false);
    (res.total, res.stats)
}
