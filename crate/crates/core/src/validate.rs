//! Cross-checks of the infrastructure against the exact oracle.

use rayon::prelude::*;

use crate::oracle::{odd_pell_solution_exists, oracle_residue, OracleError, ORACLE_LIMIT};
use crate::residue::UnitResidue;
use crate::scan::{classify, ScanStats};
use crate::sieve::enumerate_d;
use crate::store::StoreBackend;

/// Deliberate corruption for checking that the harness notices errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Relabels every computed residue t as t + 1.
    PermutedResidues,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mismatch {
    pub d: u64,
    pub computed: Option<UnitResidue>,
    pub expected: UnitResidue,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub limit: u64,
    pub checked: u64,
    /// Infrastructure residue differs from the oracle.
    pub residue_mismatches: Vec<Mismatch>,
    /// Oracle residue is 0 exactly when no odd solution of x² − dy² = 4
    /// exists; d listed here break that equivalence.
    pub lemma_mismatches: Vec<u64>,
    pub stats: ScanStats,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.residue_mismatches.is_empty() && self.lemma_mismatches.is_empty() && self.stats.unresolved.is_empty()
    }
}

/// Compares the infrastructure with the oracle for every d ∈ D with d ≤ `limit`.
pub fn validate_range(limit: u64, backend: StoreBackend, workers: usize, fault: Fault) -> Result<ValidationReport, OracleError> {
    if limit > ORACLE_LIMIT as u64 {
        return Err(OracleError::OutOfRange(limit as i64));
    }
    let ds = enumerate_d(0, limit + 1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("worker pool");
    let chunks: Vec<ValidationReport> = pool.install(|| {
        ds.par_chunks(4096)
            .map_init(
                || backend.build(),
                |store, chunk| {
                    let mut rep = ValidationReport::default();
                    for &d in chunk {
                        rep.checked += 1;
                        let expected = oracle_residue(d as i64)?;
                        let computed = classify(d, store, &mut rep.stats).map(|r| match fault {
                            Fault::None => r.residue,
                            Fault::PermutedResidues => r.residue + UnitResidue::OMEGA,
                        });
                        if computed != Some(expected) {
                            rep.residue_mismatches.push(Mismatch { d, computed, expected });
                        }
                        if expected.is_one() == odd_pell_solution_exists(d as i64)? {
                            rep.lemma_mismatches.push(d);
                        }
                    }
                    Ok(rep)
                },
            )
            .collect::<Result<Vec<_>, OracleError>>()
    })?;
    let mut out = ValidationReport { limit, ..Default::default() };
    for c in chunks {
        out.checked += c.checked;
        out.residue_mismatches.extend(c.residue_mismatches);
        out.lemma_mismatches.extend(c.lemma_mismatches);
        out.stats.merge(&c.stats);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_limits() {
        let r = validate_range(0, StoreBackend::Exact, 1, Fault::None).unwrap();
        assert!(r.passed() && r.checked == 0);
        let r = validate_range(5000, StoreBackend::Exact, 2, Fault::None).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.checked, enumerate_d(0, 5001).len() as u64);
        let r = validate_range(5000, StoreBackend::Exact, 1, Fault::PermutedResidues).unwrap();
        assert!(!r.passed());
        assert_eq!(r.residue_mismatches.len() as u64, r.checked);
        assert!(validate_range(ORACLE_LIMIT as u64 + 1, StoreBackend::Exact, 1, Fault::None).is_err());
    }
}
