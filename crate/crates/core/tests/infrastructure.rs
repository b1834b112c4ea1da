//! Infrastructure residues against the exact oracle and against each other.

use eisen_core::infrastructure::{eisenstein_residue, eisenstein_residue_with, full_walk_residue, Method};
use eisen_core::oracle::{pell_fundamental_unit, oracle_residue, QuadInt};
use eisen_core::sieve::enumerate_d;
use eisen_core::store::{BloomFilter, BloomStore, ExactStore};
use eisen_core::UnitResidue;
use num_bigint::BigInt;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frozen constant for the baby-step bound c·d^{1/4} + 10 (largest observed
/// ratio up to 10^11 is about 2.83, at d = 6109).
const BABY_STEP_CONSTANT: f64 = 3.0;

fn small_d() -> Vec<i64> {
    enumerate_d(0, 100_001).into_iter().map(|d| d as i64).collect()
}

#[test]
fn full_walk_matches_oracle() {
    for d in small_d() {
        let walk = full_walk_residue(d).unwrap();
        assert_eq!(walk.residue, oracle_residue(d).unwrap(), "d={d}");
        assert_eq!(walk.stats.baby_steps as usize, pell_fundamental_unit(d).unwrap().period, "d={d}");
    }
}

#[test]
fn regulators_match_exact_unit() {
    for d in small_d() {
        let exact = pell_fundamental_unit(d).unwrap().ln();
        let walk = full_walk_residue(d).unwrap();
        assert!((walk.regulator - exact).abs() < 1e-9 * exact.max(1.0), "d={d}: {} vs {exact}", walk.regulator);
        let bsgs = eisenstein_residue(d).unwrap();
        assert!((bsgs.regulator - exact).abs() < 1e-9 * exact.max(1.0), "d={d}: {} vs {exact}", bsgs.regulator);
    }
}

#[test]
fn bsgs_matches_full_walk() {
    let mut methods = [0usize; 3];
    for d in small_d() {
        let b = eisenstein_residue(d).unwrap();
        methods[b.method as usize] += 1;
        assert_eq!(b.residue, full_walk_residue(d).unwrap().residue, "d={d}");
        assert_eq!(b.eisenstein, b.residue.is_one());
    }
    assert!(methods.iter().all(|&n| n > 0), "{methods:?}");
}

#[test]
fn backends_agree() {
    let mut bloom = BloomStore::new(1e-3);
    let mut exact = ExactStore::new();
    for d in small_d() {
        let a = eisenstein_residue_with(d, &mut exact).unwrap();
        let b = eisenstein_residue_with(d, &mut bloom).unwrap();
        assert_eq!(a, b, "d={d}");
    }
}

#[test]
fn predicate_is_orientation_free() {
    // ε, ε⁻¹ = N(ε)·ε' and −ε have residues t, −t, t; t = 0 is fixed by all.
    for d in small_d().into_iter().step_by(7) {
        let u = pell_fundamental_unit(d).unwrap();
        let eps = QuadInt::from_halfint(&u.g, &u.b);
        let inv = eps.conjugate().scale(&BigInt::from(u.norm));
        let neg = eps.scale(&BigInt::from(-1));
        // units have valuation 0, so the residue is read off the parities
        let r = |q: &QuadInt| UnitResidue::from_parities(q.x.bit(0), q.y.bit(0)).expect("unit is odd");
        let t = r(&eps);
        assert_eq!(r(&inv), -t);
        assert_eq!(r(&neg), t);
        let flag = eisenstein_residue(d).unwrap().eisenstein;
        assert_eq!(flag, r(&inv).is_one());
        assert_eq!(flag, r(&neg).is_one());
        assert_eq!(eps.mul(&inv, d), QuadInt::new(1, 0), "ε·ε⁻¹ = 1 for d={d}");
    }
}

#[test]
fn baby_steps_are_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ds: Vec<i64> = small_d().into_iter().step_by(3).collect();
    for decade in 6..=11u32 {
        let lo = 10u64.pow(decade);
        for _ in 0..10 {
            let start = rng.random_range(lo..10 * lo);
            ds.extend(enumerate_d(start, start + 2000).into_iter().map(|d| d as i64));
        }
    }
    for d in ds {
        let r = eisenstein_residue(d).unwrap();
        let bound = BABY_STEP_CONSTANT * (d as f64).powf(0.25) + 10.0;
        assert!((r.stats.baby_steps as f64) <= bound, "d={d}: {} > {bound}", r.stats.baby_steps);
        assert!(!r.stats.giant_cap_hit, "d={d}");
    }
}

#[test]
fn large_d_uses_giant_steps_and_agrees_with_full_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bsgs = 0;
    for _ in 0..30 {
        let start = rng.random_range(1_000_000_000u64..2_000_000_000);
        for d in enumerate_d(start, start + 400) {
            let r = eisenstein_residue(d as i64).unwrap();
            bsgs += (r.method == Method::Bsgs) as usize;
            assert_eq!(r.residue, full_walk_residue(d as i64).unwrap().residue, "d={d}");
        }
    }
    assert!(bsgs > 100);
}

#[test]
fn spot_values() {
    for d in [1901, 7053] {
        assert!(eisenstein_residue(d).unwrap().eisenstein, "d={d}");
    }
    for d in [5, 13, 21, 29] {
        let r = eisenstein_residue(d).unwrap();
        assert!(!r.eisenstein, "d={d}");
        assert_eq!(r.residue, oracle_residue(d).unwrap());
    }
    assert_eq!(eisenstein_residue(13).unwrap().residue, UnitResidue::new(2));
}

#[test]
fn bloom_filter_statistics() {
    let target = 1e-3;
    let n = 500_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut filter = BloomFilter::with_rate(n, target);
    let keys: Vec<(i64, i64)> = (0..n).map(|_| (rng.random_range(0..i64::MAX / 4) * 2, rng.random_range(-1i64 << 40..1 << 40))).collect();
    for &k in &keys {
        filter.insert(k);
    }
    assert!(keys.iter().all(|&k| filter.contains(k)), "false negative");
    // odd first coordinate: never inserted
    let fp = (0..n).filter(|_| filter.contains((rng.random_range(0..i64::MAX / 4) * 2 + 1, rng.random_range(0..1 << 40)))).count();
    let rate = fp as f64 / n as f64;
    assert!(rate <= 3.0 * target, "false-positive rate {rate}");
}
