//! Primitive ideals [Q/2, (P+√d)/2] of O_K and the reduction operator ρ.
//!
//! All ideals here have odd norm Q/2 because 2 is inert, so Q ≡ 2 (mod 4) and
//! P is odd. The generator of each principal ideal visited is tracked only
//! through its residue mod 2O_K and the natural log of its absolute value.

use num_integer::{Integer, Roots};

use crate::error::{exact_div, ArithError};
use crate::residue::{reduce_ab, reduce_rational, ValuedResidue};

/// Upper bound on ρ-steps needed to reduce a composed ideal.
const MAX_REDUCTION_STEPS: usize = 10_000;

/// A real quadratic field Q(√d), d ≡ 5 (mod 8), with the roots of d that the
/// arithmetic needs precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadField {
    d: i64,
    sqrt_floor: i64,
    quartic_floor: i64,
    sqrt: f64,
}

impl QuadField {
    /// Squarefreeness is not checked.
    pub fn new(d: i64) -> Result<Self, ArithError> {
        if d <= 0 || d.rem_euclid(8) != 5 {
            return Err(ArithError::InvalidDiscriminant(d));
        }
        let sqrt_floor = d.isqrt();
        if sqrt_floor * sqrt_floor == d {
            return Err(ArithError::InvalidDiscriminant(d));
        }
        Ok(QuadField { d, sqrt_floor, quartic_floor: d.nth_root(4), sqrt: (d as f64).sqrt() })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// ⌊√d⌋
    pub fn sqrt_floor(&self) -> i64 {
        self.sqrt_floor
    }

    /// ⌊d^{1/4}⌋, the partial-reduction bound used by NUCOMP.
    pub fn quartic_floor(&self) -> i64 {
        self.quartic_floor
    }

    pub fn sqrt_f64(&self) -> f64 {
        self.sqrt
    }

    /// ln|A + B√d| without cancellation when A and B√d nearly cancel.
    pub fn ln_abs(&self, a: i128, b: i128) -> f64 {
        let sum = a.unsigned_abs() as f64 + b.unsigned_abs() as f64 * self.sqrt;
        if a.signum() * b.signum() >= 0 {
            return sum.ln();
        }
        // |A + B√d| = |A² − dB²| / (|A| + |B|√d)
        let norm = a
            .checked_mul(a)
            .zip(b.checked_mul(b).and_then(|b2| b2.checked_mul(self.d as i128)))
            .and_then(|(a2, db2)| a2.checked_sub(db2));
        match norm {
            Some(n) => (n.unsigned_abs() as f64).ln() - sum.ln(),
            None => (a as f64 + b as f64 * self.sqrt).abs().ln(),
        }
    }
}

/// The Z-module [Q/2, (P+√d)/2]. P is only meaningful mod Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ideal {
    pub q: i64,
    pub p: i64,
}

impl Ideal {
    /// O_K itself, [1, (1+√d)/2].
    pub const UNIT: Ideal = Ideal { q: 2, p: 1 };

    pub fn new(field: &QuadField, q: i64, p: i64) -> Result<Self, ArithError> {
        let ideal = Ideal { q, p };
        ideal.validate(field)?;
        Ok(ideal)
    }

    /// Checks Q > 0, Q ≡ 2 (mod 4), P odd and d ≡ P² (mod 2Q).
    pub fn validate(&self, field: &QuadField) -> Result<(), ArithError> {
        let (q, p) = (self.q as i128, self.p as i128);
        let ok = q > 0
            && q.rem_euclid(4) == 2
            && p.is_odd()
            && (field.d as i128 - p * p).rem_euclid(2 * q) == 0;
        if ok {
            Ok(())
        } else {
            Err(ArithError::InvalidIdeal { d: field.d, q, p })
        }
    }

    /// Norm of the ideal, Q/2.
    pub fn norm(&self) -> i64 {
        self.q / 2
    }

    /// Representative with ⌊√d⌋ − Q < P ≤ ⌊√d⌋.
    pub fn canonical(&self, field: &QuadField) -> Ideal {
        let s = field.sqrt_floor;
        Ideal { q: self.q, p: s - (s - self.p).rem_euclid(self.q) }
    }

    /// Dictionary key: (Q, P) with P in the canonical window.
    pub fn key(&self, field: &QuadField) -> (i64, i64) {
        let c = self.canonical(field);
        (c.q, c.p)
    }

    /// Whether (P+√d)/Q is a reduced quadratic irrational for the canonical P.
    pub fn is_reduced(&self, field: &QuadField) -> bool {
        let c = self.canonical(field);
        c.q - c.p <= field.sqrt_floor
    }
}

/// One application of ρ: the next ideal together with the residue and log of
/// the multiplier (P' + √d)/Q taking the old generator to the new one.
pub fn rho_step(field: &QuadField, ideal: Ideal) -> Result<(Ideal, ValuedResidue, f64), ArithError> {
    let (q, p) = (ideal.q as i128, ideal.p as i128);
    // ⌊(P + √d)/Q⌋ = ⌊(P + ⌊√d⌋)/Q⌋ for Q > 0 and irrational √d
    let quot = (p + field.sqrt_floor as i128).div_euclid(q);
    let p_next = quot * q - p;
    let q_signed = exact_div(field.d as i128 - p_next * p_next, q, "rho")?;
    let q_next = q_signed.abs();
    let next = Ideal {
        q: i64::try_from(q_next).map_err(|_| ArithError::Overflow("rho"))?,
        p: i64::try_from(p_next).map_err(|_| ArithError::Overflow("rho"))?,
    };
    if cfg!(debug_assertions) {
        next.validate(field)?;
    }
    let res = reduce_ab(p_next, 1)? - reduce_rational(q)?;
    let log = if p_next >= 0 {
        (p_next as f64 + field.sqrt).ln() - (q as f64).ln()
    } else {
        // |P' + √d| = Q·|Q'| / (√d − P')
        (q_next as f64).ln() - (field.sqrt - p_next as f64).ln()
    };
    Ok((next, res, log))
}

/// An ideal together with what is known about its generator θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walker {
    pub ideal: Ideal,
    /// Residue of θ modulo 2O_K.
    pub res: ValuedResidue,
    /// ln|θ|, approximate.
    pub logv: f64,
}

impl Walker {
    /// O_K with generator 1.
    pub fn unit() -> Self {
        Walker { ideal: Ideal::UNIT, res: ValuedResidue::ONE, logv: 0.0 }
    }

    pub fn rho(&mut self, field: &QuadField) -> Result<(), ArithError> {
        let (next, res, log) = rho_step(field, self.ideal)?;
        self.ideal = next;
        self.res += res;
        self.logv += log;
        Ok(())
    }

    /// Applies ρ until the ideal is reduced. Returns the number of steps taken.
    pub fn reduce(&mut self, field: &QuadField) -> Result<usize, ArithError> {
        let mut steps = 0;
        while !self.ideal.is_reduced(field) {
            if steps == MAX_REDUCTION_STEPS {
                return Err(ArithError::ReductionDiverged(steps));
            }
            self.rho(field)?;
            steps += 1;
        }
        Ok(steps)
    }
}

/// Extended gcd with a non-negative gcd: returns (g, x, y) with ax + by = g.
pub(crate) fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Ideal product without reduction: I1·I2 = S·I3 with I3 primitive.
///
/// With a_i = Q_i/2 and s = (P1+P2)/2 the content is S = gcd(a1, a2, s), the
/// norm of I3 is a1·a2/S², and its P solves the composition congruences via a
/// Bézout relation r·a1 + t·a2 + u·s = S.
pub fn ideal_product_plain(field: &QuadField, i1: Ideal, i2: Ideal) -> Result<(i64, Ideal), ArithError> {
    let d = field.d as i128;
    let (a1, p1) = (i1.q as i128 / 2, i1.p as i128);
    let (a2, p2) = (i2.q as i128 / 2, i2.p as i128);
    let s = (p1 + p2) / 2;
    let (g, x1, y1) = xgcd(a1, a2);
    let (e, x2, y2) = xgcd(g, s);
    let (r, t, u) = (x2 * x1, x2 * y1, y2);
    let a3 = a1 * a2 / (e * e);
    let num = r
        .checked_mul(a1 * p2)
        .zip(t.checked_mul(a2 * p1))
        .zip(u.checked_mul((p1 * p2 + d) / 2))
        .and_then(|((x, y), z)| x.checked_add(y)?.checked_add(z))
        .ok_or(ArithError::Overflow("ideal_product_plain"))?;
    let p3 = exact_div(num, e, "ideal_product_plain")?.rem_euclid(2 * a3);
    let q3 = i64::try_from(2 * a3).map_err(|_| ArithError::Overflow("ideal_product_plain"))?;
    let out = Ideal { q: q3, p: p3 as i64 };
    out.validate(field)?;
    Ok((e as i64, out.canonical(field)))
}
