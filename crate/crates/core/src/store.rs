//! Baby-step dictionary: canonical (Q, P) → (residue, log) of the generator.
//!
//! Two backends. [`ExactStore`] is a hash map. [`BloomStore`] keeps entries in
//! an unsorted list fronted by a Bloom filter, which answers most negative
//! lookups without touching the list; on a positive the list is scanned.

use rustc_hash::FxHashMap;

use crate::residue::UnitResidue;

pub type Key = (i64, i64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreEntry {
    pub res: UnitResidue,
    pub logv: f64,
}

pub trait BabyStepStore {
    /// Empties the store, sizing it for about `expected` entries.
    fn reset(&mut self, expected: usize);
    /// Keeps the first entry when a key is inserted twice.
    fn insert(&mut self, key: Key, entry: StoreEntry);
    fn lookup(&mut self, key: Key) -> Option<StoreEntry>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Default, Clone)]
pub struct ExactStore {
    map: FxHashMap<Key, StoreEntry>,
}

impl ExactStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl BabyStepStore for ExactStore {
    fn reset(&mut self, expected: usize) {
        self.map.clear();
        self.map.reserve(expected);
    }

    fn insert(&mut self, key: Key, entry: StoreEntry) {
        self.map.entry(key).or_insert(entry);
    }

    fn lookup(&mut self, key: Key) -> Option<StoreEntry> {
        self.map.get(&key).copied()
    }

    fn len(&self) -> usize {
        self.map.len()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bit-array set sketch over (Q, P) keys. The k probe positions come from two
/// base hashes combined as h1 + i·h2.
#[derive(Debug, Clone)]
pub struct BloomFilter {
    bits: Vec<u64>,
    m: u64,
    k: u32,
}

impl BloomFilter {
    /// Filter sized for `expected` insertions at false-positive rate `fpr`:
    /// m = ⌈−n ln p / (ln 2)²⌉ bits and k = ⌈(m/n) ln 2⌉ probes.
    pub fn with_rate(expected: usize, fpr: f64) -> Self {
        let (m, k) = Self::parameters(expected, fpr);
        BloomFilter { bits: vec![0; m.div_ceil(64) as usize], m, k }
    }

    pub fn parameters(expected: usize, fpr: f64) -> (u64, u32) {
        let n = expected.max(1) as f64;
        let ln2 = std::f64::consts::LN_2;
        let m = (-n * fpr.ln() / (ln2 * ln2)).ceil().max(64.0) as u64;
        let k = ((m as f64 / n) * ln2).ceil().max(1.0) as u32;
        (m, k)
    }

    pub fn num_bits(&self) -> u64 {
        self.m
    }

    pub fn num_hashes(&self) -> u32 {
        self.k
    }

    pub fn clear(&mut self) {
        self.bits.iter_mut().for_each(|w| *w = 0);
    }

    fn hashes(key: Key) -> (u64, u64) {
        let h1 = splitmix64(key.0 as u64 ^ splitmix64(key.1 as u64).rotate_left(17));
        let h2 = splitmix64(h1 ^ 0x6a09_e667_f3bc_c909) | 1;
        (h1, h2)
    }

    fn probes(&self, key: Key) -> impl Iterator<Item = u64> + '_ {
        let (h1, h2) = Self::hashes(key);
        (0..self.k as u64).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.m)
    }

    pub fn insert(&mut self, key: Key) {
        let (h1, h2) = Self::hashes(key);
        for i in 0..self.k as u64 {
            let bit = h1.wrapping_add(i.wrapping_mul(h2)) % self.m;
            self.bits[(bit / 64) as usize] |= 1 << (bit % 64);
        }
    }

    pub fn contains(&self, key: Key) -> bool {
        self.probes(key).all(|bit| self.bits[(bit / 64) as usize] & (1 << (bit % 64)) != 0)
    }
}

/// Unsorted entry list behind a Bloom filter.
#[derive(Debug, Clone)]
pub struct BloomStore {
    fpr: f64,
    filter: BloomFilter,
    entries: Vec<(Key, StoreEntry)>,
    /// Lookups the filter passed but the list scan refuted.
    pub false_positives: u64,
    pub filter_hits: u64,
}

impl BloomStore {
    pub fn new(fpr: f64) -> Self {
        BloomStore {
            fpr,
            filter: BloomFilter::with_rate(64, fpr),
            entries: Vec::new(),
            false_positives: 0,
            filter_hits: 0,
        }
    }

    pub fn filter(&self) -> &BloomFilter {
        &self.filter
    }
}

impl BabyStepStore for BloomStore {
    fn reset(&mut self, expected: usize) {
        let (m, _) = BloomFilter::parameters(expected, self.fpr);
        if m == self.filter.num_bits() {
            self.filter.clear();
        } else {
            self.filter = BloomFilter::with_rate(expected, self.fpr);
        }
        self.entries.clear();
    }

    fn insert(&mut self, key: Key, entry: StoreEntry) {
        if self.filter.contains(key) && self.entries.iter().any(|(k, _)| *k == key) {
            return;
        }
        self.filter.insert(key);
        self.entries.push((key, entry));
    }

    fn lookup(&mut self, key: Key) -> Option<StoreEntry> {
        if !self.filter.contains(key) {
            return None;
        }
        self.filter_hits += 1;
        let found = self.entries.iter().find(|(k, _)| *k == key).map(|(_, e)| *e);
        if found.is_none() {
            self.false_positives += 1;
        }
        found
    }

    fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Which store backs the baby steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoreBackend {
    Exact,
    Bloom { fpr: f64 },
}

impl StoreBackend {
    pub fn build(self) -> AnyStore {
        match self {
            StoreBackend::Exact => AnyStore::Exact(ExactStore::new()),
            StoreBackend::Bloom { fpr } => AnyStore::Bloom(BloomStore::new(fpr)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StoreBackend::Exact => "exact",
            StoreBackend::Bloom { .. } => "bloom",
        }
    }
}

#[derive(Debug, Clone)]
pub enum AnyStore {
    Exact(ExactStore),
    Bloom(BloomStore),
}

impl BabyStepStore for AnyStore {
    fn reset(&mut self, expected: usize) {
        match self {
            AnyStore::Exact(s) => s.reset(expected),
            AnyStore::Bloom(s) => s.reset(expected),
        }
    }

    fn insert(&mut self, key: Key, entry: StoreEntry) {
        match self {
            AnyStore::Exact(s) => s.insert(key, entry),
            AnyStore::Bloom(s) => s.insert(key, entry),
        }
    }

    fn lookup(&mut self, key: Key) -> Option<StoreEntry> {
        match self {
            AnyStore::Exact(s) => s.lookup(key),
            AnyStore::Bloom(s) => s.lookup(key),
        }
    }

    fn len(&self) -> usize {
        match self {
            AnyStore::Exact(s) => s.len(),
            AnyStore::Bloom(s) => s.len(),
        }
    }
}
