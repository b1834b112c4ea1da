//! Composition of binary quadratic forms with interleaved partial reduction.
//!
//! `nucomp` and `nudupl` follow the hybrid Jacobson–van der Poorten variant
//! step for step, returning alongside the near-reduced form φ3 the element
//! γ = (A + B√d)/C with φ3 = (1/γ)·φ1·φ2. `nucomp_choose` converts ideals to
//! forms, picks the composition method and converts the result back.

use crate::error::{exact_div, ArithError};
use crate::ideal::{ideal_product_plain, xgcd, Ideal, QuadField};
use crate::residue::{reduce_ab, reduce_rational, ValuedResidue};

/// Ideals [Q/2, (P+√d)/2] with Q at most this are composed by the plain
/// product; NUCOMP and NUDUPL produce oversized intermediates on them.
pub const PLAIN_PRODUCT_BOUND: i64 = 50;

/// Binary quadratic form u·x² + v·xy + w·y².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Form {
    pub u: i128,
    pub v: i128,
    pub w: i128,
}

impl Form {
    pub fn discriminant(&self) -> Option<i128> {
        self.v.checked_mul(self.v)?.checked_sub(self.u.checked_mul(self.w)?.checked_mul(4)?)
    }

    /// Form (Q/2, −P, (P² − d)/(2Q)) attached to the ideal [Q/2, (P+√d)/2].
    pub fn from_ideal(field: &QuadField, ideal: Ideal) -> Result<Form, ArithError> {
        let (q, p) = (ideal.q as i128, ideal.p as i128);
        let w = exact_div(p * p - field.d() as i128, 2 * q, "form_from_ideal")?;
        Ok(Form { u: q / 2, v: -p, w })
    }
}

/// γ = (A + B√d)/C.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gamma {
    pub a: i128,
    pub b: i128,
    pub c: i128,
}

impl Gamma {
    pub fn rational(n: i128) -> Gamma {
        Gamma { a: n, b: 0, c: 1 }
    }

    pub fn residue(&self) -> Result<ValuedResidue, ArithError> {
        Ok(reduce_ab(self.a, self.b)? - reduce_rational(self.c)?)
    }

    /// ln|γ|
    pub fn ln_abs(&self, field: &QuadField) -> f64 {
        field.ln_abs(self.a, self.b) - (self.c.unsigned_abs() as f64).ln()
    }
}

/// Partial extended Euclid shared by NUCOMP and NUDUPL: runs the remainder
/// sequence on (b_x, b_y) until |b_y| ≤ L or b_x = 0, returning
/// (b_x, b_y, x, y, z) after the odd-z sign fix.
fn partial_euclid(mut bx: i128, mut by: i128, bound: i128) -> (i128, i128, i128, i128, u32) {
    let (mut x, mut y, mut z) = (1i128, 0i128, 0u32);
    while by.abs() > bound && bx != 0 {
        let q = by.div_euclid(bx);
        let t = by.rem_euclid(bx);
        by = bx;
        bx = t;
        let t = y - q * x;
        y = x;
        x = t;
        z += 1;
    }
    if z % 2 == 1 {
        by = -by;
        y = -y;
    }
    (bx, by, x, y, z)
}

fn check_discriminant(field: &QuadField, f: &Form, context: &'static str) -> Result<(), ArithError> {
    match f.discriminant() {
        Some(disc) if disc == field.d() as i128 => Ok(()),
        Some(_) => Err(ArithError::DiscriminantMismatch { context }),
        None => Err(ArithError::Overflow(context)),
    }
}

fn gamma_from(g: i128, x: i128, y: i128, u3: i128, v3: i128) -> Gamma {
    let t = 2 * u3;
    Gamma { a: g * (x * t + y * v3), b: g * y, c: t }
}

/// NUCOMP: composes two distinct forms of discriminant d.
pub fn nucomp(field: &QuadField, f1: Form, f2: Form) -> Result<(Form, Gamma), ArithError> {
    let bound = field.quartic_floor() as i128;
    let (f1, f2) = if f1.w < f2.w { (f2, f1) } else { (f1, f2) };
    let Form { u: u1, v: v1, w: w1 } = f1;
    let Form { u: u2, v: v2, w: w2 } = f2;

    let s = exact_div(v1 + v2, 2, "nucomp s")?;
    let m = v2 - s;
    // b·u2 + c·u1 = F
    let (f, b, c) = xgcd(u2, u1);
    let (g, big_bx, big_by, cy, dy);
    if s % f == 0 {
        g = f;
        big_bx = m * b;
        big_by = u1 / g;
        cy = u2 / g;
        dy = s / g;
    } else {
        let (gg, _x, y) = xgcd(f, s);
        g = gg;
        let h = f / g;
        big_by = u1 / g;
        cy = u2 / g;
        dy = s / g;
        let l = (y * (b * w1 + c * w2)).rem_euclid(h);
        big_bx = exact_div(b * m + l * big_by, h, "nucomp B_x")?;
    }

    let (bx, by, x, y, z) = partial_euclid(big_bx.rem_euclid(big_by), big_by, bound);
    let (ax, ay) = (g * x, g * y);

    let (u3, v3, w3);
    if z != 0 {
        let cx = exact_div(cy * bx - m * x, big_by, "nucomp c_x")?;
        let q1 = by * cx;
        let q2 = q1 + m;
        let dx = exact_div(dy * bx - w2 * x, big_by, "nucomp d_x")?;
        let q3 = y * dx;
        let q4 = q3 + dy;
        let dyy = exact_div(q4, x, "nucomp d_y")?;
        let cyy = if bx != 0 {
            exact_div(q2, bx, "nucomp c_y")?
        } else {
            exact_div(cx * dyy - w1, dx, "nucomp c_y")?
        };
        u3 = by * cyy - ay * dyy;
        w3 = bx * cx - ax * dx;
        v3 = g * (q3 + q4) - q1 - q2;
    } else {
        let q1 = cy * bx;
        let cx = exact_div(q1 - m, big_by, "nucomp c_x")?;
        let dx = exact_div(bx * dy - w2, big_by, "nucomp d_x")?;
        u3 = by * cy;
        w3 = bx * cx - g * dx;
        v3 = v2 - 2 * q1;
    }
    let out = Form { u: u3, v: v3, w: w3 };
    check_discriminant(field, &out, "nucomp")?;
    Ok((out, gamma_from(g, x, y, u3, v3)))
}

/// NUDUPL: composes a form with itself.
pub fn nudupl(field: &QuadField, f: Form) -> Result<(Form, Gamma), ArithError> {
    let bound = field.quartic_floor() as i128;
    let Form { u, v, w } = f;
    // x·u + y·v = G
    let (g, _x, y) = xgcd(u, v);
    let big_by = u / g;
    let dy = v / g;
    let big_bx = (y * w).rem_euclid(big_by);

    let (bx, by, x, y, z) = partial_euclid(big_bx, big_by, bound);
    let (ax, ay) = (g * x, g * y);

    let (u3, v3, w3);
    if z == 0 {
        let dx = exact_div(bx * dy - w, big_by, "nudupl d_x")?;
        let uu = by * by;
        let ww = bx * bx;
        v3 = v - (bx + by) * (bx + by) + uu + ww;
        u3 = uu;
        w3 = ww - g * dx;
    } else {
        let dx = exact_div(bx * dy - w * x, big_by, "nudupl d_x")?;
        let q1 = dx * y;
        let dyy = q1 + dy;
        let vv = g * (dyy + q1);
        let dyy = exact_div(dyy, x, "nudupl d_y")?;
        let uu = by * by;
        let ww = bx * bx;
        v3 = vv - (bx + by) * (bx + by) + uu + ww;
        u3 = uu - ay * dyy;
        w3 = ww - ax * dx;
    }
    let out = Form { u: u3, v: v3, w: w3 };
    check_discriminant(field, &out, "nudupl")?;
    Ok((out, gamma_from(g, x, y, u3, v3)))
}

/// Which composition `nucomp_choose` used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositionPath {
    Plain,
    Nudupl,
    Nucomp,
}

/// Result of composing two ideals: I = (1/γ)·I1·I2, I primitive but not
/// necessarily reduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composition {
    pub ideal: Ideal,
    pub gamma: Gamma,
    pub gamma_res: ValuedResidue,
    pub gamma_log: f64,
    pub path: CompositionPath,
}

/// Composes two ideals, choosing the plain product when either Q is at
/// most [`PLAIN_PRODUCT_BOUND`], NUDUPL for equal ideals and NUCOMP otherwise.
pub fn nucomp_choose(field: &QuadField, i1: Ideal, i2: Ideal) -> Result<Composition, ArithError> {
    let i1 = Ideal { q: i1.q.abs(), p: i1.p.rem_euclid(i1.q.abs()) };
    let i2 = Ideal { q: i2.q.abs(), p: i2.p.rem_euclid(i2.q.abs()) };

    if i1.q <= PLAIN_PRODUCT_BOUND || i2.q <= PLAIN_PRODUCT_BOUND {
        let (s, ideal) = ideal_product_plain(field, i1, i2)?;
        let gamma = Gamma::rational(s as i128);
        return Ok(Composition {
            ideal,
            gamma,
            gamma_res: gamma.residue()?,
            gamma_log: (s as f64).ln(),
            path: CompositionPath::Plain,
        });
    }

    let f1 = Form::from_ideal(field, i1)?;
    let (form, gamma, path) = if i1 == i2 {
        let (form, gamma) = nudupl(field, f1)?;
        (form, gamma, CompositionPath::Nudupl)
    } else {
        let f2 = Form::from_ideal(field, i2)?;
        let (form, gamma) = nucomp(field, f1, f2)?;
        (form, gamma, CompositionPath::Nucomp)
    };
    let q = (2 * form.u).abs();
    let ideal = Ideal {
        q: i64::try_from(q).map_err(|_| ArithError::Overflow("nucomp_choose"))?,
        p: i64::try_from((-form.v).rem_euclid(q)).map_err(|_| ArithError::Overflow("nucomp_choose"))?,
    };
    ideal.validate(field)?;
    Ok(Composition { ideal, gamma, gamma_res: gamma.residue()?, gamma_log: gamma.ln_abs(field), path })
}
