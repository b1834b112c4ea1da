//! Residue of the fundamental unit by baby-step giant-step infrastructure.
//!
//! Baby steps walk the cycle of reduced principal ideals from O_K with ρ,
//! storing every ideal's key with its generator's residue and log until the
//! log passes d^{1/4}. Giant steps repeatedly compose the last baby ideal μ₁
//! with the previous giant ideal and reduce. When a giant ideal is found in
//! the store, the quotient of the two generators is ε_d, so its residue is the
//! difference of the tracked residues.
//!
//! Every giant step advances by about log μ₁. Before each lookup the baby
//! window is extended until it is longer than that step, so the first giant
//! ideal past the regulator always lands on a stored key.

use std::fmt;

use crate::error::ArithError;
use crate::ideal::{QuadField, Walker};
use crate::nucomp::nucomp_choose;
use crate::residue::UnitResidue;
use crate::store::{BabyStepStore, ExactStore, Key, StoreEntry};

/// A match whose logs differ by less than this is the giant walk revisiting
/// the baby window, not a full period. Regulators exceed ln((1+√5)/2) ≈ 0.48.
const SELF_MATCH_LOG: f64 = 0.1;

/// Slack for comparing accumulated logs.
const LOG_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bsgs,
    FullWalk,
    SymmetryFallback,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bsgs => "bsgs",
            Method::FullWalk => "full_walk",
            Method::SymmetryFallback => "symmetry_fallback",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Stats {
    pub baby_steps: u32,
    pub giant_steps: u32,
    pub store_len: u32,
    /// Baby steps taken after the initial window to cover a long giant step.
    pub window_extensions: u32,
    /// Set when the giant-step cap forced a full walk.
    pub giant_cap_hit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EisensteinResult {
    pub d: i64,
    pub residue: UnitResidue,
    pub eisenstein: bool,
    pub method: Method,
    /// ln ε_d as accumulated in floating point.
    pub regulator: f64,
    pub stats: Stats,
}

impl EisensteinResult {
    fn new(d: i64, residue: UnitResidue, method: Method, regulator: f64, stats: Stats) -> Self {
        EisensteinResult { d, residue, eisenstein: residue.is_one(), method, regulator, stats }
    }
}

/// Giant steps allowed before falling back to a full walk: 20·(d^{1/4} + 10).
pub fn giant_step_cap(field: &QuadField) -> u32 {
    (20.0 * ((field.d() as f64).powf(0.25) + 10.0)) as u32
}

fn require_unit(w: &Walker, context: &'static str) -> Result<(), ArithError> {
    if w.res.v != 0 {
        return Err(ArithError::Valuation { v: w.res.v, context });
    }
    Ok(())
}

/// Walks the whole principal cycle from O_K. Exact, one period of work.
pub fn full_walk_residue(d: i64) -> Result<EisensteinResult, ArithError> {
    let field = QuadField::new(d)?;
    full_walk(&field, Method::FullWalk, Stats::default())
}

fn full_walk(field: &QuadField, method: Method, mut stats: Stats) -> Result<EisensteinResult, ArithError> {
    let start = Walker::unit().ideal.key(field);
    let mut w = Walker::unit();
    loop {
        w.rho(field)?;
        require_unit(&w, "full walk")?;
        stats.baby_steps += 1;
        if w.ideal.key(field) == start {
            return Ok(EisensteinResult::new(field.d(), w.res.r, method, w.logv, stats));
        }
    }
}

/// Residue of ε_d using the exact hash-map store.
pub fn eisenstein_residue(d: i64) -> Result<EisensteinResult, ArithError> {
    eisenstein_residue_with(d, &mut ExactStore::new())
}

enum BabyOutcome {
    Continue,
    /// The walk came back to O_K: the period is complete.
    Closed,
    /// Consecutive Q or P repeated: the cycle is symmetric here.
    Symmetric,
}

struct BabyWalk<'a, S: BabyStepStore> {
    field: &'a QuadField,
    store: &'a mut S,
    walker: Walker,
    start: Key,
    steps: u32,
}

impl<S: BabyStepStore> BabyWalk<'_, S> {
    fn step(&mut self) -> Result<BabyOutcome, ArithError> {
        let prev = self.walker.ideal;
        self.walker.rho(self.field)?;
        self.steps += 1;
        require_unit(&self.walker, "baby step")?;
        let key = self.walker.ideal.key(self.field);
        if key == self.start {
            return Ok(BabyOutcome::Closed);
        }
        self.store.insert(key, StoreEntry { res: self.walker.res.r, logv: self.walker.logv });
        let cur = self.walker.ideal;
        if cur.q == prev.q || cur.p == prev.p {
            return Ok(BabyOutcome::Symmetric);
        }
        Ok(BabyOutcome::Continue)
    }
}

/// Residue of ε_d by baby-step giant-step infrastructure. `d` must be
/// squarefree and ≡ 5 (mod 8); squarefreeness is not checked.
pub fn eisenstein_residue_with<S: BabyStepStore>(d: i64, store: &mut S) -> Result<EisensteinResult, ArithError> {
    let field = QuadField::new(d)?;
    let threshold = (d as f64).powf(0.25);
    store.reset(3 * threshold as usize + 16);

    let start = Walker::unit();
    let start_key = start.ideal.key(&field);
    store.insert(start_key, StoreEntry { res: start.res.r, logv: start.logv });

    let mut baby = BabyWalk { field: &field, store, walker: start, start: start_key, steps: 0 };
    let mut stats = Stats::default();

    macro_rules! baby_step {
        () => {
            match baby.step()? {
                BabyOutcome::Continue => {}
                BabyOutcome::Closed => {
                    stats.baby_steps = baby.steps;
                    stats.store_len = baby.store.len() as u32;
                    let w = baby.walker;
                    return Ok(EisensteinResult::new(d, w.res.r, Method::FullWalk, w.logv, stats));
                }
                BabyOutcome::Symmetric => {
                    stats.baby_steps = baby.steps;
                    stats.store_len = baby.store.len() as u32;
                    return full_walk(&field, Method::SymmetryFallback, stats);
                }
            }
        };
    }

    while baby.walker.logv < threshold {
        baby_step!();
    }
    let mu1 = baby.walker;
    for _ in 0..2 {
        baby_step!();
    }
    let initial_steps = baby.steps;

    let cap = giant_step_cap(&field);
    let mut giant = mu1;
    loop {
        if stats.giant_steps == cap {
            stats.giant_cap_hit = true;
            stats.baby_steps = baby.steps;
            stats.store_len = baby.store.len() as u32;
            return full_walk(&field, Method::FullWalk, stats);
        }
        let comp = nucomp_choose(&field, mu1.ideal, giant.ideal)?;
        let mut next = Walker {
            ideal: comp.ideal,
            res: mu1.res + giant.res - comp.gamma_res,
            logv: mu1.logv + giant.logv - comp.gamma_log,
        };
        next.reduce(&field)?;
        require_unit(&next, "giant step")?;
        stats.giant_steps += 1;

        let advance = next.logv - giant.logv;
        while baby.walker.logv <= advance + LOG_TOLERANCE {
            baby_step!();
        }
        stats.window_extensions = baby.steps - initial_steps;

        if let Some(entry) = baby.store.lookup(next.ideal.key(&field)) {
            let regulator = next.logv - entry.logv;
            if regulator > SELF_MATCH_LOG {
                stats.baby_steps = baby.steps;
                stats.store_len = baby.store.len() as u32;
                return Ok(EisensteinResult::new(d, next.res.r - entry.res, Method::Bsgs, regulator, stats));
            }
        }
        giant = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::BloomStore;

    #[test]
    fn small_examples() {
        let r = eisenstein_residue(5).unwrap();
        assert_eq!((r.residue, r.eisenstein), (UnitResidue::OMEGA, false));
        let r = eisenstein_residue(21).unwrap();
        assert_eq!((r.residue, r.eisenstein), (UnitResidue::OMEGA, false));
        assert!(eisenstein_residue(1901).unwrap().eisenstein);
        assert!(eisenstein_residue(7053).unwrap().eisenstein);
    }

    #[test]
    fn full_walk_examples() {
        let r = full_walk_residue(5).unwrap();
        assert_eq!((r.residue, r.stats.baby_steps), (UnitResidue::OMEGA, 1));
        let r = full_walk_residue(21).unwrap();
        assert_eq!((r.residue, r.stats.baby_steps), (UnitResidue::OMEGA, 2));
    }

    #[test]
    fn rejects_bad_d() {
        assert!(eisenstein_residue(45 + 1).is_err());
        assert!(full_walk_residue(16).is_err());
    }

    #[test]
    fn large_d_uses_giant_steps() {
        // d ≈ 10^9 has a long period, so the answer comes from a giant step
        let mut seen_bsgs = false;
        for d in (1_000_000_005i64..1_000_002_000).step_by(8) {
            let r = eisenstein_residue(d).unwrap();
            seen_bsgs |= r.method == Method::Bsgs;
            let b = eisenstein_residue_with(d, &mut BloomStore::new(1e-3)).unwrap();
            assert_eq!(r.residue, b.residue);
        }
        assert!(seen_bsgs);
    }
}
