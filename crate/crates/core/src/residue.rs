//! Residues modulo the inert prime 2O_K.
//!
//! For d ≡ 5 (mod 8) the prime 2 is inert, so O_K/2O_K is the field F_4 with
//! basis {1, ω}, ω = (1+√d)/2, ω² = ω + 1. Its unit group is cyclic of order 3
//! and we record a class by its discrete log with respect to ω:
//!
//! | parity of (x, y) in x + yω | class | log |
//! |----------------------------|-------|-----|
//! | (1, 0)                     | 1     | 0   |
//! | (0, 1)                     | ω     | 1   |
//! | (1, 1)                     | ω + 1 | 2   |
//!
//! Elements of the localization O_{K,2} (and of K* generally) are tracked as
//! a 2-adic valuation plus the log of the unit part, so products and quotients
//! become additions and subtractions.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ResidueError {
    #[error("zero has no residue class")]
    Zero,
    #[error("(G + B√d)/2 is not integral: G and B have different parity")]
    NotIntegral,
}

/// Discrete log in Z/3 of a class in F_4*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct UnitResidue(u8);

impl UnitResidue {
    pub const ONE: UnitResidue = UnitResidue(0);
    pub const OMEGA: UnitResidue = UnitResidue(1);
    pub const OMEGA_PLUS_ONE: UnitResidue = UnitResidue(2);

    /// Residue with log `t mod 3`.
    pub fn new(t: i64) -> Self {
        UnitResidue(t.rem_euclid(3) as u8)
    }

    pub fn log(self) -> u8 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 0
    }

    /// Frobenius x ↦ x², which is also the Galois conjugation on F_4.
    pub fn conjugate(self) -> Self {
        -self
    }

    /// Class of x + yω from the parities of its coordinates.
    ///
    /// Returns `None` when both are even.
    pub fn from_parities(x_odd: bool, y_odd: bool) -> Option<Self> {
        match (x_odd, y_odd) {
            (true, false) => Some(Self::ONE),
            (false, true) => Some(Self::OMEGA),
            (true, true) => Some(Self::OMEGA_PLUS_ONE),
            (false, false) => None,
        }
    }

    /// Coordinates (x mod 2, y mod 2) of the class in the basis {1, ω}.
    pub fn parities(self) -> (u8, u8) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            _ => (1, 1),
        }
    }
}

impl Add for UnitResidue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        UnitResidue((self.0 + rhs.0) % 3)
    }
}

impl Sub for UnitResidue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        UnitResidue((self.0 + 3 - rhs.0) % 3)
    }
}

impl Neg for UnitResidue {
    type Output = Self;
    fn neg(self) -> Self {
        UnitResidue((3 - self.0) % 3)
    }
}

impl AddAssign for UnitResidue {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for UnitResidue {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl fmt::Display for UnitResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A nonzero element of K up to a 2-adic unit congruent to 1: its valuation at
/// 2O_K and the class of its unit part.
///
/// Elements of O_{K,2} have `v >= 0`; the generators tracked by the
/// infrastructure always have `v == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ValuedResidue {
    pub v: i32,
    pub r: UnitResidue,
}

impl ValuedResidue {
    pub const ONE: ValuedResidue = ValuedResidue { v: 0, r: UnitResidue::ONE };

    pub fn new(v: i32, r: UnitResidue) -> Self {
        ValuedResidue { v, r }
    }

    /// Residue of the Galois conjugate.
    pub fn conjugate(self) -> Self {
        ValuedResidue { v: self.v, r: self.r.conjugate() }
    }

    pub fn is_unit(self) -> bool {
        self.v == 0
    }
}

impl Add for ValuedResidue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ValuedResidue { v: self.v + rhs.v, r: self.r + rhs.r }
    }
}

impl Sub for ValuedResidue {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ValuedResidue { v: self.v - rhs.v, r: self.r - rhs.r }
    }
}

impl Neg for ValuedResidue {
    type Output = Self;
    fn neg(self) -> Self {
        ValuedResidue { v: -self.v, r: -self.r }
    }
}

impl AddAssign for ValuedResidue {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ValuedResidue {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl fmt::Display for ValuedResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(v={}, t={})", self.v, self.r)
    }
}

/// Residue of x + yω.
pub fn reduce_coords(x: i128, y: i128) -> Result<ValuedResidue, ResidueError> {
    if x == 0 && y == 0 {
        return Err(ResidueError::Zero);
    }
    // (x | y) has the common 2-power of x and y as its lowest set bit.
    let v = (x | y).trailing_zeros();
    let (x, y) = (x >> v, y >> v);
    let r = UnitResidue::from_parities(x & 1 == 1, y & 1 == 1).expect("odd after stripping");
    Ok(ValuedResidue { v: v as i32, r })
}

/// Residue of A + B√d, using √d = 2ω − 1.
pub fn reduce_ab(a: i128, b: i128) -> Result<ValuedResidue, ResidueError> {
    reduce_coords(a - b, 2 * b)
}

/// Residue of (G + B√d)/2.
pub fn reduce_halfint(g: i128, b: i128) -> Result<ValuedResidue, ResidueError> {
    if (g - b) & 1 != 0 {
        return Err(ResidueError::NotIntegral);
    }
    reduce_coords((g - b) / 2, b)
}

/// Residue of a rational integer. Every odd integer is 1 in F_4.
pub fn reduce_rational(n: i128) -> Result<ValuedResidue, ResidueError> {
    if n == 0 {
        return Err(ResidueError::Zero);
    }
    Ok(ValuedResidue { v: n.trailing_zeros() as i32, r: UnitResidue::ONE })
}
