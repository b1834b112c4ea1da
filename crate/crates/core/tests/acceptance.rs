//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs at full size, including the scan to 10^8, so expect several minutes
//! on a single core.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use eisen_core::analysis::{c1, compute_c56, fit_secondary, fit_secondary_values, zeta_direct};
use eisen_core::ideal::{ideal_product_plain, Ideal, QuadField, Walker};
use eisen_core::nucomp::{nucomp_choose, CompositionPath};
use eisen_core::oracle::odd_pell_solution_exists;
use eisen_core::residue::reduce_rational;
use eisen_core::scan::{hits_path, read_checkpoints, run_scan, Checkpoints, ScanConfig, ScanStats, StopControl};
use eisen_core::sieve::enumerate_d;
use eisen_core::store::{BloomFilter, StoreBackend};
use eisen_core::validate::{validate_range, Fault};
use eisen_core::{eisenstein_residue, eisenstein_residue_with};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_PI_E: u64 = 3_259_668;
const C56_EXPECTED: f64 = -0.03761;
const C56_TOL: f64 = 5e-5;
const C1_TOL: f64 = 1e-12;
const FIT_WINDOW: (f64, f64) = (-0.035, -0.015);
const SYNTHETIC_C: f64 = -0.024;
const SYNTHETIC_TOL: f64 = 1e-6;
const BLOOM_TARGET: f64 = 1e-3;
const BLOOM_OPS: usize = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// CSV text without the trailing elapsed column.
fn data(csv: &Path) -> String {
    fs::read_to_string(csv).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string() + "\n").collect()
}

fn is_squarefree(d: i64) -> bool {
    let mut p = 2;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn random_d(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    loop {
        let d = rng.random_range(lo..hi) / 8 * 8 + 5;
        if d >= lo && d < hi && QuadField::new(d).is_ok() && is_squarefree(d) {
            return d;
        }
    }
}

/// A reduced ideal from a prime factor of (d − P²)/4, walked a random distance.
fn random_reduced(rng: &mut ChaCha8Rng, field: &QuadField) -> Ideal {
    let r = field.sqrt_floor();
    let p = 2 * rng.random_range(0..=(r - 1) / 2) + 1;
    let n = (field.d() - p * p) / 4;
    let mut f = 3;
    let mut a = n;
    while f * f <= n {
        if n % f == 0 {
            a = f;
            break;
        }
        f += 2;
    }
    let mut w = Walker { ideal: Ideal::new(field, 2 * a, p).unwrap(), ..Walker::unit() };
    w.reduce(field).unwrap();
    for _ in 0..rng.random_range(0..40) {
        w.rho(field).unwrap();
    }
    w.ideal
}

fn oracle_equivalence(stats: &mut ScanStats) -> Outcome {
    let r = validate_range(1_000_000, StoreBackend::Exact, workers(), Fault::None).expect("oracle");
    stats.merge(&r.stats);
    let pass = r.residue_mismatches.is_empty() && r.stats.unresolved.is_empty() && r.checked > 0;
    outcome(
        pass,
        format!(
            "{} d checked, {} residue mismatches, {} unresolved",
            r.checked,
            r.residue_mismatches.len(),
            r.stats.unresolved.len()
        ),
    )
}

fn odd_solution_equivalence() -> Outcome {
    let ds = enumerate_d(0, 100_001);
    let mut bad = Vec::new();
    let mut zero = 0;
    for &d in &ds {
        let r = eisenstein_residue(d as i64).expect("residue");
        zero += r.eisenstein as u64;
        if r.eisenstein == odd_pell_solution_exists(d as i64).expect("oracle") {
            bad.push(d);
        }
    }
    outcome(bad.is_empty(), format!("{} d checked ({zero} with residue 0), mismatches {:?}", ds.len(), bad))
}

fn golden_count(dir: &Path, stats: &mut ScanStats) -> Outcome {
    let mut cfg = ScanConfig::new(0, 100_000_000);
    cfg.workers = workers();
    cfg.checkpoints = Checkpoints::Log(10);
    let s = run_scan(&cfg, &dir.join("golden.csv"), false, &StopControl::default()).expect("scan");
    stats.merge(&s.stats);
    outcome(
        s.complete && s.counts.pi_e == GOLDEN_PI_E && s.stats.unresolved.is_empty(),
        format!(
            "pi_E(10^8) = {} (expected {GOLDEN_PI_E}), pi_D = {}, pi_E_prime = {}, {} workers",
            s.counts.pi_e, s.counts.pi_d, s.counts.pi_e_prime, cfg.workers
        ),
    )
}

fn spot_checks() -> Outcome {
    let members = [1901i64, 7053];
    let others = [5i64, 13, 21, 29];
    let mut wrong = Vec::new();
    for &d in &members {
        if !eisenstein_residue(d).unwrap().eisenstein {
            wrong.push(d);
        }
    }
    for &d in &others {
        if eisenstein_residue(d).unwrap().eisenstein {
            wrong.push(d);
        }
    }
    outcome(wrong.is_empty(), format!("in E: {members:?}, not in E: {others:?}, wrong: {wrong:?}"))
}

fn constants() -> Outcome {
    let rep = compute_c56(1_000_000).expect("constants");
    // independent route for C1 = 1/(18 ζ(2))
    let c1_indep = 1.0 / (18.0 * zeta_direct(2.0, 1_000_000).value);
    let c1_err = (c1() - c1_indep).abs().max((c1() - 1.0 / (3.0 * std::f64::consts::PI.powi(2))).abs());
    let c56_err = (rep.c56 - C56_EXPECTED).abs();
    outcome(
        c56_err <= C56_TOL && c1_err <= C1_TOL,
        format!(
            "C_5/6 = {:.10} (|diff| {:.2e} <= {C56_TOL:.0e}), C1 = {:.15} (|diff| {:.2e} <= {C1_TOL:.0e})",
            rep.c56,
            c56_err,
            c1(),
            c1_err
        ),
    )
}

fn secondary_fit(dir: &Path) -> Outcome {
    let rows = read_checkpoints(&dir.join("golden.csv")).expect("golden scan checkpoints");
    let window: Vec<_> = rows.into_iter().filter(|r| r.x >= 1_000_000 && r.x <= 100_000_000).collect();
    let fit = match fit_secondary(&window) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("fit failed: {e}")),
    };
    let pi2 = std::f64::consts::PI.powi(2);
    let synthetic: Vec<(u64, f64)> = (0..=20)
        .map(|j| {
            let x = 10f64.powf(6.0 + j as f64 / 10.0).round();
            (x as u64, x / (3.0 * pi2) + SYNTHETIC_C * x.powf(5.0 / 6.0))
        })
        .collect();
    let syn = fit_secondary_values(&synthetic).expect("synthetic fit");
    let in_window = fit.c >= FIT_WINDOW.0 && fit.c <= FIT_WINDOW.1;
    let syn_err = (syn.c - SYNTHETIC_C).abs();
    outcome(
        in_window && syn_err <= SYNTHETIC_TOL && fit.x_min <= 1_000_000 && fit.x_max == 100_000_000,
        format!(
            "c = {:.6} over {} rows [{}, {}] (window [{}, {}]), synthetic c = {:.9} (|diff| {:.1e})",
            fit.c, fit.rows, fit.x_min, fit.x_max, FIT_WINDOW.0, FIT_WINDOW.1, syn.c, syn_err
        ),
    )
}

fn path_independence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    let mut paths = [0u64; 3];
    let mut total = 0u64;
    for k in 2..=9u32 {
        let lo = 10i64.pow(k - 1);
        for _ in 0..10_000 {
            total += 1;
            let d = random_d(&mut rng, lo, 10 * lo);
            let field = QuadField::new(d).unwrap();
            let i1 = random_reduced(&mut rng, &field);
            let i2 = if rng.random_range(0..4) == 0 { i1 } else { random_reduced(&mut rng, &field) };
            let c = nucomp_choose(&field, i1, i2).unwrap();
            paths[c.path as usize] += 1;
            let (s, plain) = ideal_product_plain(&field, i1, i2).unwrap();
            let mut a = Walker { ideal: c.ideal, res: -c.gamma_res, logv: -c.gamma_log };
            let mut b = Walker { ideal: plain, res: -reduce_rational(s as i128).unwrap(), logv: -(s as f64).ln() };
            a.reduce(&field).unwrap();
            b.reduce(&field).unwrap();
            // both track generators relative to I1·I2; walk the one behind until it catches up
            let (behind, ahead) = if a.logv <= b.logv { (&mut a, b) } else { (&mut b, a) };
            let mut steps = 0;
            while behind.logv < ahead.logv - 1e-6 && steps < 100_000 {
                behind.rho(&field).unwrap();
                steps += 1;
            }
            let same = behind.ideal.key(&field) == ahead.ideal.key(&field)
                && behind.res == ahead.res
                && (behind.logv - ahead.logv).abs() < 1e-6;
            if !same && mismatches.len() < 5 {
                mismatches.push((d, i1, i2));
            }
        }
    }
    let nontrivial = paths[CompositionPath::Nudupl as usize] + paths[CompositionPath::Nucomp as usize];
    outcome(
        mismatches.is_empty() && nontrivial > 0,
        format!(
            "{total} pairs over d in [10, 10^9), plain/nudupl/nucomp = {}/{}/{}, mismatches {:?}",
            paths[0], paths[1], paths[2], mismatches
        ),
    )
}

fn valuation_invariant(validation: &ScanStats, scan: &ScanStats) -> Outcome {
    let events = validation.valuation_events + scan.valuation_events;
    let giant = validation.giant_steps + scan.giant_steps;
    outcome(
        events == 0 && giant > 0,
        format!(
            "{events} valuation events over {giant} giant steps ({} d, {} retried)",
            validation.examined + scan.examined,
            validation.retried + scan.retried
        ),
    )
}

fn bloom_store() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let capacity = BLOOM_OPS / 2;
    let mut filter = BloomFilter::with_rate(capacity, BLOOM_TARGET);
    let mut inserted: Vec<(i64, i64)> = Vec::with_capacity(capacity);
    let mut false_negatives = 0u64;
    // interleaved inserts and lookups of already inserted keys; even first coordinate marks inserted keys
    for _ in 0..BLOOM_OPS {
        if inserted.len() < capacity && (inserted.is_empty() || rng.random_range(0..2) == 0) {
            let k = (rng.random_range(0..i64::MAX / 4) * 2, rng.random_range(-1i64 << 40..1 << 40));
            filter.insert(k);
            inserted.push(k);
        } else if !filter.contains(inserted[rng.random_range(0..inserted.len())]) {
            false_negatives += 1;
        }
    }
    false_negatives += inserted.iter().filter(|&&k| !filter.contains(k)).count() as u64;
    let probes = BLOOM_OPS as u64;
    let fp = (0..probes).filter(|_| filter.contains((rng.random_range(0..i64::MAX / 4) * 2 + 1, rng.random_range(0..1 << 40)))).count();
    let rate = fp as f64 / probes as f64;

    let mut exact = StoreBackend::Exact.build();
    let mut bloom = StoreBackend::Bloom { fpr: BLOOM_TARGET }.build();
    let ds = enumerate_d(0, 100_001);
    let differ: Vec<u64> = ds
        .iter()
        .copied()
        .filter(|&d| {
            let e = eisenstein_residue_with(d as i64, &mut exact).expect("exact backend");
            let b = eisenstein_residue_with(d as i64, &mut bloom).expect("bloom backend");
            e.residue != b.residue || e.method != b.method || e.regulator.to_bits() != b.regulator.to_bits()
        })
        .collect();
    outcome(
        false_negatives == 0 && rate <= 3.0 * BLOOM_TARGET && differ.is_empty(),
        format!(
            "{false_negatives} false negatives over {BLOOM_OPS} ops, fpr {rate:.2e} (target {BLOOM_TARGET:.0e}, limit {:.0e}), backends differ on {} of {} d",
            3.0 * BLOOM_TARGET,
            differ.len(),
            ds.len()
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let (one, eight, resumed) = (dir.join("w1.csv"), dir.join("w8.csv"), dir.join("resumed.csv"));
    let mut cfg = ScanConfig::new(0, 1_000_000);
    cfg.segment_size = 1 << 16;
    cfg.checkpoints = Checkpoints::Linear(50_000);
    cfg.list = true;
    cfg.workers = 1;
    run_scan(&cfg, &one, false, &StopControl::default()).expect("scan");
    cfg.workers = 8;
    run_scan(&cfg, &eight, false, &StopControl::default()).expect("scan");
    // one worker merges 4 segments per batch, so the stop lands mid-range; resume with 8
    cfg.workers = 1;
    let stop = StopControl { stop_at: Some(500_000), ..Default::default() };
    let part = run_scan(&cfg, &resumed, false, &stop).expect("partial scan");
    cfg.workers = 8;
    let rest = run_scan(&cfg, &resumed, true, &StopControl::default()).expect("resumed scan");
    let hits = |p: &Path| fs::read(hits_path(p)).unwrap();
    let workers_same = data(&one) == data(&eight) && hits(&one) == hits(&eight);
    let resume_same = !part.complete && rest.complete && data(&one) == data(&resumed) && hits(&one) == hits(&resumed);
    outcome(
        workers_same && resume_same,
        format!(
            "1 vs 8 workers identical: {workers_same}; stopped at {} then resumed, identical: {resume_same}",
            part.progress
        ),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut validation_stats = ScanStats::default();
    let mut scan_stats = ScanStats::default();
    let mut failed = 0;
    let mut report = |n: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += !o.pass as u32;
        println!("[{n:>2}] {verdict} {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    };

    report(1, "oracle equivalence, d <= 10^6", &mut || oracle_equivalence(&mut validation_stats));
    report(2, "residue 0 iff no odd solution, d <= 10^5", &mut odd_solution_equivalence);
    report(3, "golden count pi_E(10^8)", &mut || golden_count(dir.path(), &mut scan_stats));
    report(4, "membership spot checks", &mut spot_checks);
    report(5, "constants C_5/6 and C1", &mut constants);
    report(6, "secondary-term fit on [10^6, 10^8]", &mut || secondary_fit(dir.path()));
    report(7, "composition path independence", &mut path_independence);
    report(8, "2-adic unit invariant in runs 1 and 3", &mut || valuation_invariant(&validation_stats, &scan_stats));
    report(9, "bloom store", &mut bloom_store);
    report(10, "determinism and resume", &mut || determinism(dir.path()));

    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
