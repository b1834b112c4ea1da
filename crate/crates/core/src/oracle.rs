//! Exact, slow ground truth.
//!
//! The fundamental unit is computed with arbitrary-precision generator
//! tracking along the continued-fraction cycle of (1+√d)/2, independently of
//! the residue machinery. The module also provides exact arithmetic on Z-modules
//! of O_K (Hermite normal form in the basis {1, ω}) used to check ideal
//! products and the γ returned by NUCOMP.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::residue::UnitResidue;

/// Largest d accepted by the exact routines.
pub const ORACLE_LIMIT: i64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("d = {0} is outside the oracle range (d ≡ 5 mod 8, d ≤ {ORACLE_LIMIT})")]
    OutOfRange(i64),
    #[error("inexact division while tracking the generator for d = {0}")]
    InexactDivision(i64),
    #[error("unit for d = {0} lies in 2O_K")]
    EvenUnit(i64),
}

/// ε = (G + B√d)/2 with G² − dB² = ±4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactUnit {
    pub d: i64,
    pub g: BigInt,
    pub b: BigInt,
    /// +1 or −1.
    pub norm: i8,
    /// Length of the cycle of reduced principal ideals.
    pub period: usize,
}

impl ExactUnit {
    /// ln ε, accurate to double precision for any size of ε.
    pub fn ln(&self) -> f64 {
        ln_half_sum(&self.g, &self.b, self.d)
    }
}

/// ln((G + B√d)/2) for G, B > 0.
pub fn ln_half_sum(g: &BigInt, b: &BigInt, d: i64) -> f64 {
    let shift = g.bits().max(b.bits()).saturating_sub(64);
    let gs = (g >> shift).to_f64().unwrap_or(f64::NAN);
    let bs = (b >> shift).to_f64().unwrap_or(f64::NAN);
    (gs + bs * (d as f64).sqrt()).ln() + shift as f64 * std::f64::consts::LN_2 - std::f64::consts::LN_2
}

fn check_range(d: i64) -> Result<(), OracleError> {
    if d <= 0 || d > ORACLE_LIMIT || d.rem_euclid(8) != 5 {
        return Err(OracleError::OutOfRange(d));
    }
    Ok(())
}

/// Walks the cycle of (1+√d)/2 from O_K and returns the exact generator on
/// return to O_K, which is the fundamental unit.
pub fn pell_fundamental_unit(d: i64) -> Result<ExactUnit, OracleError> {
    check_range(d)?;
    let s = d.isqrt() as i128;
    let dd = d as i128;
    let canon = |q: i128, p: i128| s - (s - p).rem_euclid(q);
    let start = (2i128, canon(2, 1));
    let (mut q, mut p) = (2i128, 1i128);
    // θ = (g + b√d)/2, starting from θ = 1
    let mut g = BigInt::from(2);
    let mut b = BigInt::zero();
    let big_d = BigInt::from(d);
    let mut period = 0usize;
    loop {
        let a = (p + s).div_euclid(q);
        let p_next = a * q - p;
        let q_next = (dd - p_next * p_next) / q;
        // θ ← θ·(P' + √d)/Q
        let bp = BigInt::from(p_next);
        let bq = BigInt::from(q);
        let g_num = &g * &bp + &b * &big_d;
        let b_num = &g + &b * &bp;
        let (g_new, rg) = g_num.div_rem(&bq);
        let (b_new, rb) = b_num.div_rem(&bq);
        if !rg.is_zero() || !rb.is_zero() {
            return Err(OracleError::InexactDivision(d));
        }
        g = g_new;
        b = b_new;
        q = q_next.abs();
        p = p_next;
        period += 1;
        if (q, canon(q, p)) == start {
            break;
        }
    }
    if g.is_negative() {
        g = -g;
        b = -b;
    }
    let n4 = &g * &g - &big_d * &b * &b;
    let norm = if n4 == BigInt::from(4) { 1 } else { -1 };
    debug_assert!(norm == 1 || n4 == BigInt::from(-4));
    Ok(ExactUnit { d, g, b, norm, period })
}

/// Class of ε_d in (O_K/2O_K)*.
pub fn oracle_residue(d: i64) -> Result<UnitResidue, OracleError> {
    let unit = pell_fundamental_unit(d)?;
    unit_residue(&unit)
}

/// Class of (G + B√d)/2 = (G−B)/2 + Bω from coordinate parities.
pub fn unit_residue(unit: &ExactUnit) -> Result<UnitResidue, OracleError> {
    let x: BigInt = (&unit.g - &unit.b) / 2;
    UnitResidue::from_parities(x.is_odd(), unit.b.is_odd()).ok_or(OracleError::EvenUnit(unit.d))
}

/// Whether x² − dy² = 4 has a solution in odd integers, decided by scanning
/// the powers ε^k, k = 1..6, written as (x + y√d)/2.
pub fn odd_pell_solution_exists(d: i64) -> Result<bool, OracleError> {
    let unit = pell_fundamental_unit(d)?;
    let big_d = BigInt::from(d);
    let four = BigInt::from(4);
    let (mut x, mut y) = (unit.g.clone(), unit.b.clone());
    for _ in 1..=6 {
        if x.is_odd() && y.is_odd() && &x * &x - &big_d * &y * &y == four {
            return Ok(true);
        }
        // (x + y√d)/2 · (G + B√d)/2
        let nx = (&x * &unit.g + &big_d * &y * &unit.b) / 2;
        let ny = (&x * &unit.b + &y * &unit.g) / 2;
        x = nx;
        y = ny;
    }
    Ok(false)
}

/// x + yω in O_K.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadInt {
    pub x: BigInt,
    pub y: BigInt,
}

impl QuadInt {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        QuadInt { x: x.into(), y: y.into() }
    }

    /// A + B√d = (A − B) + 2Bω.
    pub fn from_ab(a: i128, b: i128) -> Self {
        QuadInt::new(a - b, 2 * b)
    }

    /// (G + B√d)/2 = (G − B)/2 + Bω.
    pub fn from_halfint(g: &BigInt, b: &BigInt) -> Self {
        QuadInt { x: (g - b) / 2, y: b.clone() }
    }

    /// Product using ω² = ω + (d−1)/4.
    pub fn mul(&self, other: &QuadInt, d: i64) -> QuadInt {
        let k = BigInt::from((d - 1) / 4);
        let be = &self.y * &other.y;
        QuadInt {
            x: &self.x * &other.x + &be * k,
            y: &self.x * &other.y + &self.y * &other.x + be,
        }
    }

    /// Galois conjugate: ω ↦ 1 − ω.
    pub fn conjugate(&self) -> QuadInt {
        QuadInt { x: &self.x + &self.y, y: -&self.y }
    }

    pub fn scale(&self, k: &BigInt) -> QuadInt {
        QuadInt { x: &self.x * k, y: &self.y * k }
    }
}

/// Full-rank Z-module Z·a + Z·(b + cω) with a, c > 0 and 0 ≤ b < a.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleHnf {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

/// Hermite normal form of the Z-span of `gens`; `None` if the span is not of
/// rank 2.
pub fn module_hnf(gens: &[QuadInt]) -> Option<ModuleHnf> {
    let mut vecs: Vec<(BigInt, BigInt)> = gens.iter().map(|g| (g.x.clone(), g.y.clone())).collect();
    // Euclid on the ω-coordinates until a single vector carries them all.
    loop {
        let mut nz: Vec<usize> = (0..vecs.len()).filter(|&i| !vecs[i].1.is_zero()).collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by(|&i, &j| vecs[i].1.abs().cmp(&vecs[j].1.abs()));
        let pivot = nz[0];
        let (px, py) = vecs[pivot].clone();
        for &i in &nz[1..] {
            let q = vecs[i].1.div_floor(&py);
            vecs[i].0 -= &q * &px;
            vecs[i].1 -= &q * &py;
        }
    }
    let pivot = vecs.iter().position(|v| !v.1.is_zero())?;
    let (mut b, mut c) = vecs[pivot].clone();
    if c.is_negative() {
        b = -b;
        c = -c;
    }
    let a = vecs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pivot)
        .fold(BigInt::zero(), |acc, (_, v)| acc.gcd(&v.0));
    if a.is_zero() {
        return None;
    }
    let b = b.mod_floor(&a);
    Some(ModuleHnf { a, b, c })
}

/// Z-basis {Q/2, (P+√d)/2} of an ideal.
pub fn ideal_basis(q: i64, p: i64) -> [QuadInt; 2] {
    [QuadInt::new(q / 2, 0), QuadInt::new((p - 1) / 2, 1)]
}

/// Module spanned by all products of basis elements of the two ideals.
pub fn product_module(d: i64, i1: (i64, i64), i2: (i64, i64)) -> ModuleHnf {
    let b1 = ideal_basis(i1.0, i1.1);
    let b2 = ideal_basis(i2.0, i2.1);
    let gens: Vec<QuadInt> = b1.iter().flat_map(|x| b2.iter().map(move |y| x.mul(y, d))).collect();
    module_hnf(&gens).expect("product of ideals has rank 2")
}

/// Module α·I for α ∈ O_K.
pub fn scaled_ideal_module(d: i64, alpha: &QuadInt, ideal: (i64, i64)) -> ModuleHnf {
    let gens: Vec<QuadInt> = ideal_basis(ideal.0, ideal.1).iter().map(|x| alpha.mul(x, d)).collect();
    module_hnf(&gens).expect("nonzero multiple of an ideal has rank 2")
}

/// Writes a module as S·[Q/2, (P+√d)/2] with the ideal primitive, returning
/// (S, Q, P mod Q).
pub fn module_as_ideal(m: &ModuleHnf) -> Option<(i64, i64, i64)> {
    let s = &m.c;
    if !(&m.a % s).is_zero() || !(&m.b % s).is_zero() {
        return None;
    }
    let q: BigInt = (&m.a / s) * 2;
    let p_raw: BigInt = (&m.b / s) * 2 + 1;
    let p = p_raw.mod_floor(&q);
    Some((s.to_i64()?, q.to_i64()?, p.to_i64()?))
}

/// Exact product I1·I2 = S·I3, as (S, Q3, P3 mod Q3).
pub fn ideal_product_exact(d: i64, i1: (i64, i64), i2: (i64, i64)) -> (i64, i64, i64) {
    module_as_ideal(&product_module(d, i1, i2)).expect("product of ideals is an ideal multiple")
}

/// Checks I1·I2 = γ·I3 for γ = (A + B√d)/C by comparing C·I1·I2 with
/// (A + B√d)·I3.
pub fn gamma_relation_holds(d: i64, i1: (i64, i64), i2: (i64, i64), i3: (i64, i64), a: i128, b: i128, c: i128) -> bool {
    let lhs_gens: Vec<QuadInt> = {
        let b1 = ideal_basis(i1.0, i1.1);
        let b2 = ideal_basis(i2.0, i2.1);
        let c = BigInt::from(c);
        b1.iter().flat_map(|x| b2.iter().map(|y| x.mul(y, d).scale(&c))).collect()
    };
    let lhs = module_hnf(&lhs_gens);
    let rhs = Some(scaled_ideal_module(d, &QuadInt::from_ab(a, b), i3));
    lhs.is_some() && lhs == rhs
}
