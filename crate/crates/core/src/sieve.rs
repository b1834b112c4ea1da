//! Segmented sieve over d ≡ 5 (mod 8).
//!
//! A segment covers [lo, hi) and holds one slot per d ≡ 5 (mod 8). Slots are
//! cleared for multiples of p² (squarefree flag) and for multiples of p other
//! than p itself (prime flag), for odd primes p ≤ ⌊√(hi−1)⌋. Since d is odd
//! and 4 ∤ d, the prime 2 never needs marking.

/// Primes up to and including `limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// First d ≥ lo with d ≡ 5 (mod 8).
pub fn first_candidate(lo: u64) -> u64 {
    lo + (5 + 8 - lo % 8) % 8
}

/// Inverse of 8 modulo an odd m.
fn inv8(m: u64) -> u64 {
    // 8·x ≡ 1 (mod m); m is odd, so the inverse of 2 is (m+1)/2.
    let half = m.div_ceil(2) % m;
    let h = half as u128;
    ((h * h % m as u128) * h % m as u128) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub lo: u64,
    pub hi: u64,
    /// d of slot 0; slot i is `base + 8i`.
    pub base: u64,
    pub squarefree: Vec<bool>,
    pub prime: Vec<bool>,
}

impl Segment {
    /// Sieves [lo, hi). `primes` must contain every odd prime ≤ ⌊√(hi−1)⌋;
    /// extra larger primes are ignored.
    pub fn sieve(lo: u64, hi: u64, primes: &[u64]) -> Segment {
        assert!(lo < hi, "empty segment");
        let base = first_candidate(lo);
        let len = if base >= hi { 0 } else { ((hi - 1 - base) / 8 + 1) as usize };
        let mut squarefree = vec![true; len];
        let mut prime = vec![true; len];
        let top = hi - 1;
        for &p in primes {
            if p == 2 {
                continue;
            }
            if p * p > top {
                break;
            }
            // slot i holds base + 8i; d ≡ 0 (mod m) ⇔ i ≡ −base·8⁻¹ (mod m)
            for (m, flags, keep_p) in [(p, &mut prime, true), (p * p, &mut squarefree, false)] {
                let first = ((m - base % m) % m) as u128 * inv8(m) as u128 % m as u128;
                let mut i = first as usize;
                let step = m as usize;
                while i < len {
                    if !(keep_p && base + 8 * i as u64 == p) {
                        flags[i] = false;
                    }
                    i += step;
                }
            }
        }
        Segment { lo, hi, base, squarefree, prime }
    }

    pub fn len(&self) -> usize {
        self.squarefree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squarefree.is_empty()
    }

    pub fn d_at(&self, i: usize) -> u64 {
        self.base + 8 * i as u64
    }

    /// Squarefree d in the segment with their prime flags, ascending.
    pub fn members(&self) -> impl Iterator<Item = (u64, bool)> + '_ {
        (0..self.len()).filter(|&i| self.squarefree[i]).map(|i| (self.d_at(i), self.prime[i]))
    }
}

/// Ascending squarefree d ≡ 5 (mod 8) in [lo, hi).
pub fn enumerate_d(lo: u64, hi: u64) -> Vec<u64> {
    if lo >= hi {
        return Vec::new();
    }
    let primes = primes_up_to((hi - 1).isqrt());
    Segment::sieve(lo, hi, &primes).members().map(|(d, _)| d).collect()
}

/// Number of primes ≤ x.
pub fn prime_pi(x: u64) -> u64 {
    primes_up_to(x).len() as u64
}

/// Number of primes below each x in `xs`, by one segmented pass up to the
/// largest x.
pub fn primes_below_each(xs: &[u64]) -> Vec<u64> {
    let Some(&top) = xs.iter().max() else { return Vec::new() };
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by_key(|&i| xs[i]);
    let mut out = vec![0; xs.len()];
    let base = primes_up_to(top.isqrt() + 1);
    const SEG: u64 = 1 << 20;
    let mut next = order.iter().peekable();
    let mut count = 0u64;
    let mut lo = 0u64;
    let mut flags = vec![true; SEG as usize];
    while lo < top {
        let hi = (lo + SEG).min(top);
        let len = (hi - lo) as usize;
        flags[..len].iter_mut().for_each(|f| *f = true);
        for i in lo..hi.min(2) {
            flags[(i - lo) as usize] = false;
        }
        for &p in &base {
            if p * p >= hi {
                break;
            }
            let mut m = (lo.div_ceil(p) * p).max(p * p);
            while m < hi {
                flags[(m - lo) as usize] = false;
                m += p;
            }
        }
        for (off, &is_prime) in flags[..len].iter().enumerate() {
            while let Some(&&i) = next.peek() {
                if xs[i] > lo + off as u64 {
                    break;
                }
                out[i] = count;
                next.next();
            }
            count += is_prime as u64;
        }
        lo = hi;
    }
    for &i in next {
        out[i] = count;
    }
    out
}
