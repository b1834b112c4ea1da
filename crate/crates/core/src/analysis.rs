//! Analytic constants of the counting function and fits of the models
//!
//!   π_E(x) ≈ x/(3π²) + c·x^{5/6}
//!   π_{E∩P}(x) ≈ π(x)/12 + c_p·∫₂^x dt/(t^{1/6} log t)
//!
//! to scanned checkpoints.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::scan::Checkpoint;
use crate::sieve::{primes_below_each, primes_up_to};

/// Secondary coefficient of the count of cubic-field related terms, used as a
/// given constant.
pub const C_STAR_56: f64 = -0.0386;

/// Smallest prime cutoff accepted for the Euler product.
pub const MIN_PRIME_CUTOFF: u64 = 100_000;

/// Largest accepted bound on |log(limit / partial product)|.
pub const MAX_TAIL: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("prime cutoff {0} is below the minimum {MIN_PRIME_CUTOFF}")]
    CutoffTooSmall(u64),
    #[error("Euler product tail bound {tail:e} at cutoff {cutoff} exceeds {MAX_TAIL:e}; use a larger cutoff")]
    TailTooLarge { cutoff: u64, tail: f64 },
    #[error("degenerate fit input: {0}")]
    Degenerate(String),
}

pub fn c1() -> f64 {
    1.0 / (3.0 * PI * PI)
}

/// η(s) = Σ (−1)^k (k+1)^{−s} summed with the Cohen–Villegas–Zagier
/// acceleration of order `n`.
pub fn eta_accelerated(s: f64, n: u32) -> f64 {
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    let nf = n as f64;
    for k in 0..n {
        let kf = k as f64;
        c = b - c;
        sum += c * (kf + 1.0).powf(-s);
        b = (kf + nf) * (kf - nf) * b / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceleratedZeta {
    pub value: f64,
    /// Acceleration order used.
    pub order: u32,
    /// |ζ_order − ζ_{order−1}|.
    pub last_change: f64,
}

/// ζ(s) for 0 < s < 1 from η(s) = (1 − 2^{1−s}) ζ(s), raising the
/// acceleration order until two consecutive orders agree to 1e-13.
pub fn zeta_via_eta(s: f64) -> AcceleratedZeta {
    let factor = 1.0 - 2f64.powf(1.0 - s);
    let mut prev = eta_accelerated(s, 4) / factor;
    for order in 5..=60 {
        let value = eta_accelerated(s, order) / factor;
        let last_change = (value - prev).abs();
        if last_change < 1e-13 {
            return AcceleratedZeta { value, order, last_change };
        }
        prev = value;
    }
    unreachable!("alternating series acceleration failed to converge")
}

/// ζ(s), s > 1, from a partial sum and its tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaBracket {
    /// Partial sum plus Euler–Maclaurin tail.
    pub value: f64,
    /// Partial sum plus ∫_{N+1}^∞ t^{−s} dt.
    pub lower: f64,
    /// Partial sum plus ∫_N^∞ t^{−s} dt.
    pub upper: f64,
    pub terms: u64,
}

pub fn zeta_direct(s: f64, terms: u64) -> ZetaBracket {
    let n = terms as f64;
    // sum small terms last
    let partial: f64 = (1..=terms).rev().map(|k| (k as f64).powf(-s)).sum();
    let integral_from = |a: f64| a.powf(1.0 - s) / (s - 1.0);
    let before_n = partial - n.powf(-s);
    let em = integral_from(n) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    ZetaBracket {
        value: before_n + em,
        lower: partial + integral_from(n + 1.0),
        upper: partial + integral_from(n),
        terms,
    }
}

/// ln Γ(z) for z > 0 by the Stirling series after shifting z above 20.
pub fn ln_gamma_stirling(z: f64) -> f64 {
    let mut shift = 0.0;
    let mut w = z;
    while w < 20.0 {
        shift += w.ln();
        w += 1.0;
    }
    let w2 = w * w;
    let series = 1.0 / (12.0 * w) - 1.0 / (360.0 * w * w2) + 1.0 / (1260.0 * w * w2 * w2) - 1.0 / (1680.0 * w * w2 * w2 * w2);
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Euler factor at 2.
pub fn k2() -> f64 {
    (1.0 - 2f64.powf(-2.0 / 3.0)) / (6.0 * (1.0 - 2f64.powf(-5.0 / 3.0)))
}

/// Euler factor at an odd prime p.
pub fn k_p(p: u64) -> f64 {
    let p = p as f64;
    let t = p.powf(-1.0 / 3.0);
    1.0 - (1.0 + t) / (p * p) * (1.0 - t) / ((1.0 - p.powf(-5.0 / 3.0)) * (1.0 + 1.0 / p))
}

/// Bound on Σ_{p > cutoff} |log K_p|.
///
/// For odd p, 0 < 1 − K_p < 1/p², so |log K_p| ≤ x/(1−x) with x = 1/p².
/// Summing over odd n > N: Σ 1/n² ≤ 1/(2(N−1)).
pub fn euler_tail_bound(cutoff: u64) -> f64 {
    let n = cutoff as f64;
    let x = 1.0 / (n * n);
    (1.0 / (1.0 - x)) / (2.0 * (n - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProduct {
    pub cutoff: u64,
    /// K_2 · ∏_{3 ≤ p ≤ cutoff} K_p.
    pub partial: f64,
    /// Bound on |log(limit/partial)|. The factors are below 1, so the limit
    /// lies in [partial·e^{−tail}, partial].
    pub tail: f64,
}

impl EulerProduct {
    pub fn lower(&self) -> f64 {
        self.partial * (-self.tail).exp()
    }
}

pub fn euler_product(cutoff: u64) -> EulerProduct {
    let log_sum: f64 = primes_up_to(cutoff).iter().filter(|&&p| p > 2).map(|&p| k_p(p).ln()).rev().sum();
    EulerProduct { cutoff, partial: k2() * log_sum.exp(), tail: euler_tail_bound(cutoff) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantReport {
    pub c1: f64,
    pub c56: f64,
    /// C_{5/6} evaluated at the two ends of the Euler-product bracket.
    pub c56_bracket: (f64, f64),
    pub c56_star: f64,
    pub zeta13: AcceleratedZeta,
    pub zeta53: ZetaBracket,
    pub gamma23: f64,
    /// Γ(2/3) from the Stirling series, for comparison.
    pub gamma23_check: f64,
    pub k2: f64,
    pub product: EulerProduct,
}

impl ConstantReport {
    /// C_{5/6} − 2C*_{5/6}, the lower-bound coefficient.
    pub fn lower_bound_coefficient(&self) -> f64 {
        self.c56 - 2.0 * self.c56_star
    }
}

/// C_{5/6} = 4^{11/6} ζ(1/3) / (5 Γ(2/3)³ ζ(5/3)) · ∏_p K_p.
pub fn compute_c56(prime_cutoff: u64) -> Result<ConstantReport, AnalysisError> {
    if prime_cutoff < MIN_PRIME_CUTOFF {
        return Err(AnalysisError::CutoffTooSmall(prime_cutoff));
    }
    let tail = euler_tail_bound(prime_cutoff);
    if tail > MAX_TAIL {
        return Err(AnalysisError::TailTooLarge { cutoff: prime_cutoff, tail });
    }
    let zeta13 = zeta_via_eta(1.0 / 3.0);
    let zeta53 = zeta_direct(5.0 / 3.0, 1_000_000);
    let gamma23 = statrs::function::gamma::gamma(2.0 / 3.0);
    let gamma23_check = ln_gamma_stirling(2.0 / 3.0).exp();
    let product = euler_product(prime_cutoff);
    let prefactor = 4f64.powf(11.0 / 6.0) * zeta13.value / (5.0 * gamma23.powi(3) * zeta53.value);
    let ends = (prefactor * product.partial, prefactor * product.lower());
    Ok(ConstantReport {
        c1: c1(),
        c56: prefactor * product.partial,
        c56_bracket: (ends.0.min(ends.1), ends.0.max(ends.1)),
        c56_star: C_STAR_56,
        zeta13,
        zeta53,
        gamma23,
        gamma23_check,
        k2: k2(),
        product,
    })
}

impl fmt::Display for ConstantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "C1 = 1/(3 pi^2)        = {:.15}", self.c1)?;
        writeln!(f, "zeta(1/3)              = {:.12}  (order {}, last change {:.1e})", self.zeta13.value, self.zeta13.order, self.zeta13.last_change)?;
        writeln!(f, "zeta(5/3)              = {:.12}  in [{:.12}, {:.12}] from {} terms", self.zeta53.value, self.zeta53.lower, self.zeta53.upper, self.zeta53.terms)?;
        writeln!(f, "Gamma(2/3)             = {:.12}  (Stirling {:.12})", self.gamma23, self.gamma23_check)?;
        writeln!(f, "K_2                    = {:.12}", self.k2)?;
        writeln!(f, "prod K_p, p <= {:<8}  = {:.12}  tail |log| <= {:.2e}", self.product.cutoff, self.product.partial, self.product.tail)?;
        writeln!(f, "C_5/6                  = {:.10}  in [{:.10}, {:.10}]", self.c56, self.c56_bracket.0, self.c56_bracket.1)?;
        writeln!(f, "C*_5/6 (given)         = {}", self.c56_star)?;
        write!(f, "C_5/6 - 2 C*_5/6       = {:.6}", self.lower_bound_coefficient())
    }
}

impl ConstantReport {
    /// `key=value` lines.
    pub fn summary(&self) -> String {
        format!(
            "c1={:.15}\nzeta_1_3={:.12}\nzeta_5_3={:.12}\ngamma_2_3={:.12}\nk2={:.12}\nprime_cutoff={}\nprod_kp={:.12}\nprod_kp_tail={:.3e}\nc56={:.10}\nc56_lo={:.10}\nc56_hi={:.10}\nc56_star={}\nlower_bound_coefficient={:.6}\n",
            self.c1,
            self.zeta13.value,
            self.zeta53.value,
            self.gamma23,
            self.k2,
            self.product.cutoff,
            self.product.partial,
            self.product.tail,
            self.c56,
            self.c56_bracket.0,
            self.c56_bracket.1,
            self.c56_star,
            self.lower_bound_coefficient(),
        )
    }
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Nodes and weights of n-point Gauss–Legendre quadrature on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let kf = k as f64;
                        (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                    }
                    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    return (x, 2.0 / ((1.0 - x * x) * dp * dp));
                }
            }
        })
        .collect()
}

/// ∫_a^b dt/(t^{1/6} log t) by adaptive Simpson in t.
pub fn li6_simpson(a: f64, b: f64) -> f64 {
    adaptive_simpson(&|t: f64| t.powf(-1.0 / 6.0) / t.ln(), a, b, 1e-12 * (b - a).max(1.0))
}

/// ∫_a^b dt/(t^{1/6} log t) by composite Gauss–Legendre in u = log t, where
/// the integrand becomes e^{5u/6}/u.
pub fn li6_gauss(a: f64, b: f64) -> f64 {
    let nodes = gauss_legendre(20);
    let (ua, ub) = (a.ln(), b.ln());
    let panels = ((ub - ua) / 0.25).ceil().max(1.0) as usize;
    let h = (ub - ua) / panels as f64;
    (0..panels)
        .map(|k| {
            let (l, r) = (ua + k as f64 * h, ua + (k + 1) as f64 * h);
            let (mid, half) = (0.5 * (l + r), 0.5 * (r - l));
            nodes.iter().map(|&(x, w)| {
                let u = mid + half * x;
                w * half * (5.0 * u / 6.0).exp() / u
            }).sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub c: f64,
    /// √Σ residual².
    pub residual_norm: f64,
    pub x_min: u64,
    pub x_max: u64,
    pub rows: usize,
    /// a in P(d ∈ E | d ∈ D) ≈ 1/3 − a/d^{1/6}, equal to −c·5π²/6.
    pub implied_a: f64,
    /// c recovered by integrating the probability model numerically.
    pub model_c: f64,
}

impl fmt::Display for FitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows {} over [{}, {}]", self.rows, self.x_min, self.x_max)?;
        writeln!(f, "pi_E(x) ~ x/(3 pi^2) + c x^(5/6):  c = {:.6}  (residual norm {:.3})", self.c, self.residual_norm)?;
        write!(f, "P(d in E | d in D) ~ 1/3 - a/d^(1/6):  a = {:.5}  (integrates back to c = {:.6})", self.implied_a, self.model_c)
    }
}

impl FitReport {
    pub fn summary(&self) -> String {
        format!(
            "fit_rows={}\nfit_x_min={}\nfit_x_max={}\nc={:.8}\nresidual_norm={:.6}\nimplied_a={:.6}\nmodel_c={:.8}\n",
            self.rows, self.x_min, self.x_max, self.c, self.residual_norm, self.implied_a, self.model_c
        )
    }
}

/// Sorts by x, drops repeated x and checks there are at least three points
/// spanning two decades.
fn prepare<T: Copy>(mut data: Vec<(u64, T)>) -> Result<Vec<(u64, T)>, AnalysisError> {
    data.sort_by_key(|r| r.0);
    data.dedup_by_key(|r| r.0);
    if data.len() < 3 {
        return Err(AnalysisError::Degenerate(format!("{} distinct checkpoints, need at least 3", data.len())));
    }
    let (lo, hi) = (data[0].0, data[data.len() - 1].0);
    if lo == 0 || hi < lo.saturating_mul(100) {
        return Err(AnalysisError::Degenerate(format!("checkpoints span [{lo}, {hi}], need two decades")));
    }
    Ok(data)
}

/// Least squares through the origin: c = Σyz / Σz².
fn origin_fit(pairs: &[(f64, f64)]) -> (f64, f64) {
    let szz: f64 = pairs.iter().map(|(_, z)| z * z).sum();
    let syz: f64 = pairs.iter().map(|(y, z)| y * z).sum();
    let c = syz / szz;
    let res = pairs.iter().map(|(y, z)| (y - c * z).powi(2)).sum::<f64>().sqrt();
    (c, res)
}

/// Fits π_E(x) − x/(3π²) = c·x^{5/6} to checkpoint rows.
pub fn fit_secondary(rows: &[Checkpoint]) -> Result<FitReport, AnalysisError> {
    fit_secondary_values(&rows.iter().map(|r| (r.x, r.counts.pi_e as f64)).collect::<Vec<_>>())
}

/// Fits π_E(x) − x/(3π²) = c·x^{5/6} to (x, π_E(x)) points. Points are
/// sorted first, so their order does not matter.
pub fn fit_secondary_values(data: &[(u64, f64)]) -> Result<FitReport, AnalysisError> {
    let data = prepare(data.to_vec())?;
    let pairs: Vec<(f64, f64)> = data
        .iter()
        .map(|&(x, pi_e)| {
            let x = x as f64;
            (pi_e - c1() * x, x.powf(5.0 / 6.0))
        })
        .collect();
    let (c, residual_norm) = origin_fit(&pairs);
    let implied_a = -c * 5.0 * PI * PI / 6.0;
    // ∫_0^x (1/3 − a t^{−1/6})/π² dt − x/(3π²) should equal c·x^{5/6}; check
    // at x = 10^6 after substituting t = u⁶.
    let x: f64 = 1e6;
    let integrand = |u: f64| (u.powi(5) / 3.0 - implied_a * u.powi(4)) * 6.0 / (PI * PI);
    let integral = adaptive_simpson(&integrand, 0.0, x.powf(1.0 / 6.0), 1e-9);
    let model_c = (integral - x / (3.0 * PI * PI)) / x.powf(5.0 / 6.0);
    Ok(FitReport {
        c,
        residual_norm,
        x_min: data[0].0,
        x_max: data[data.len() - 1].0,
        rows: data.len(),
        implied_a,
        model_c,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimeFitReport {
    /// c_p in π_{E∩P}(x) ≈ π(x)/12 + c_p·Li₆(x).
    pub c: f64,
    pub residual_norm: f64,
    pub rows: usize,
    /// a_p in P(p ∈ E | p ∈ D prime) ≈ 1/3 − a_p/p^{1/6}; primes ≡ 5 (mod 8)
    /// have density 1/(4 log t), so a_p = −4c_p.
    pub implied_a: f64,
}

impl fmt::Display for PrimeFitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pi_E_prime(x) ~ pi(x)/12 + c int_2^x dt/(t^(1/6) log t):  c = {:.6}  (residual norm {:.3}, {} rows)", self.c, self.residual_norm, self.rows)?;
        write!(f, "P(p in E | p in D prime) ~ 1/3 - a/p^(1/6):  a = {:.5}", self.implied_a)
    }
}

impl PrimeFitReport {
    pub fn summary(&self) -> String {
        format!("prime_fit_rows={}\nprime_c={:.8}\nprime_residual_norm={:.6}\nprime_implied_a={:.6}\n", self.rows, self.c, self.residual_norm, self.implied_a)
    }
}

/// Li₆(x) = ∫₂^x dt/(t^{1/6} log t) at each x (x ≥ 2), integrating between
/// consecutive sorted points.
pub fn li6_many(xs: &[u64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by_key(|&i| xs[i]);
    let mut out = vec![0.0; xs.len()];
    let (mut at, mut acc) = (2.0f64, 0.0);
    for i in order {
        let x = xs[i] as f64;
        if x > at {
            acc += li6_gauss(at, x);
            at = x;
        }
        out[i] = acc;
    }
    out
}

/// Fits π_{E∩P}(x) − π(x)/12 = c·Li₆(x) to checkpoint rows, with π(x)
/// counting primes below x to match the checkpoint convention.
pub fn fit_primes(rows: &[Checkpoint]) -> Result<PrimeFitReport, AnalysisError> {
    let xs: Vec<u64> = rows.iter().map(|r| r.x).collect();
    let pis = primes_below_each(&xs);
    let data: Vec<(u64, (f64, f64))> = rows.iter().zip(pis).map(|(r, pi)| (r.x, (r.counts.pi_e_prime as f64, pi as f64))).collect();
    fit_primes_values(&data)
}

/// Fits to (x, (π_{E∩P}(x), π(x))) points.
pub fn fit_primes_values(data: &[(u64, (f64, f64))]) -> Result<PrimeFitReport, AnalysisError> {
    let data = prepare(data.to_vec())?;
    let xs: Vec<u64> = data.iter().map(|r| r.0.max(2)).collect();
    let li = li6_many(&xs);
    let pairs: Vec<(f64, f64)> = data.iter().zip(&li).map(|(&(_, (pe, pi)), &z)| (pe - pi / 12.0, z)).collect();
    let (c, residual_norm) = origin_fit(&pairs);
    Ok(PrimeFitReport { c, residual_norm, rows: pairs.len(), implied_a: -4.0 * c })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub x: u64,
    pub measured: Option<u64>,
    /// (C_{5/6} − 2C*_{5/6})·x^{5/6}.
    pub lower: f64,
    /// x/(6π²) + C*_{5/6}·x^{5/6}, the upper bound as stated in the
    /// literature.
    pub upper_stated: f64,
    /// x/(2π²) + (C_{5/6} + C*_{5/6})·x^{5/6}, the bound its derivation gives.
    pub upper_derived: f64,
}

impl BoundsReport {
    pub fn within_derived(&self) -> Option<bool> {
        self.measured.map(|m| (m as f64) >= self.lower && (m as f64) <= self.upper_derived)
    }
}

pub fn bounds_report(x: u64, measured: Option<u64>, c56: f64) -> BoundsReport {
    let xf = x as f64;
    let x56 = xf.powf(5.0 / 6.0);
    BoundsReport {
        x,
        measured,
        lower: (c56 - 2.0 * C_STAR_56) * x56,
        upper_stated: xf / (6.0 * PI * PI) + C_STAR_56 * x56,
        upper_derived: xf / (2.0 * PI * PI) + (c56 + C_STAR_56) * x56,
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bounds at x = {} (main terms only, O(x^(2/3+e)) omitted)", self.x)?;
        writeln!(f, "  lower  (C_5/6 - 2C*_5/6) x^(5/6)            = {:.1}", self.lower)?;
        writeln!(f, "  upper  x/(2 pi^2) + (C_5/6 + C*_5/6) x^(5/6) = {:.1}", self.upper_derived)?;
        write!(f, "  stated upper x/(6 pi^2) + C*_5/6 x^(5/6)     = {:.1}  (slope 1/(6 pi^2) = {:.6})", self.upper_stated, 1.0 / (6.0 * PI * PI))?;
        if let Some(m) = self.measured {
            write!(f, "\n  measured pi_E = {m}  between lower and upper: {}", self.within_derived().unwrap_or(false))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::Counts;

    fn row(x: u64, pi_e: u64) -> Checkpoint {
        Checkpoint { x, counts: Counts { pi_d: pi_e * 3, pi_e, pi_e_prime: 0 }, elapsed: 0.0 }
    }

    #[test]
    fn zeta_values() {
        let z = zeta_via_eta(1.0 / 3.0);
        assert!((z.value - (-0.973_360_248_350_782_7)).abs() < 1e-12, "{}", z.value);
        assert!(z.last_change < 1e-10);
        // η(1/2) and ζ(1/2) as a second point
        assert!((zeta_via_eta(0.5).value - (-1.460_354_508_809_586_8)).abs() < 1e-10);
        let b = zeta_direct(5.0 / 3.0, 100_000);
        assert!(b.lower <= b.value && b.value <= b.upper);
        assert!((b.value - 2.123_522_968_86).abs() < 1e-10, "{}", b.value);
        // brackets tighten with more terms
        let b2 = zeta_direct(5.0 / 3.0, 10_000);
        assert!(b2.lower <= b.lower && b.upper <= b2.upper);
    }

    #[test]
    fn gamma_two_thirds() {
        let g = statrs::function::gamma::gamma(2.0 / 3.0);
        assert!((g - 1.354_117_939_426_4).abs() < 1e-12);
        assert!((ln_gamma_stirling(2.0 / 3.0).exp() - g).abs() < 1e-13);
        // reflection: Γ(1/3)Γ(2/3) = 2π/√3
        let refl = (ln_gamma_stirling(1.0 / 3.0) + ln_gamma_stirling(2.0 / 3.0)).exp();
        assert!((refl - 2.0 * PI / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn euler_factors() {
        assert!((k2() - 0.090_03).abs() < 5e-6);
        for p in primes_up_to(10_000).into_iter().skip(1) {
            let gap = 1.0 - k_p(p);
            assert!(gap > 0.0 && gap < 1.0 / (p * p) as f64, "p={p}");
        }
        assert!(euler_tail_bound(200_000) < euler_tail_bound(100_000));
        let a = euler_product(100_000);
        let b = euler_product(200_000);
        assert!(b.partial < a.partial && b.partial >= a.lower());
    }

    #[test]
    fn c56_constant() {
        let r = compute_c56(100_000).unwrap();
        assert!((r.c56 - (-0.03761)).abs() < 5e-5, "{}", r.c56);
        assert!(r.c56_bracket.0 <= r.c56 && r.c56 <= r.c56_bracket.1);
        assert!((r.c1 - 0.033_773_727_880_779).abs() < 1e-14);
        assert!((r.lower_bound_coefficient() - 0.0396).abs() < 1e-4);
        assert_eq!(compute_c56(1000), Err(AnalysisError::CutoffTooSmall(1000)));
    }

    #[test]
    fn quadratures_agree() {
        let s = li6_simpson(2.0, 10.0);
        let g = li6_gauss(2.0, 10.0);
        assert!((s - g).abs() < 1e-8, "{s} {g}");
        let nodes = gauss_legendre(5);
        let w: f64 = nodes.iter().map(|n| n.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
        let x4: f64 = nodes.iter().map(|&(x, w)| w * x.powi(4)).sum();
        assert!((x4 - 0.4).abs() < 1e-14);
    }

    #[test]
    fn secondary_fit_round_trip() {
        let rows: Vec<Checkpoint> = [1e6, 3e6, 1e7, 3e7, 1e8]
            .iter()
            .map(|&x: &f64| {
                let v = x * c1() - 0.024 * x.powf(5.0 / 6.0);
                Checkpoint { x: x as u64, counts: Counts { pi_d: 0, pi_e: v.round() as u64, pi_e_prime: 0 }, elapsed: 0.0 }
            })
            .collect();
        let fit = fit_secondary(&rows).unwrap();
        assert!((fit.c + 0.024).abs() < 1e-6, "{}", fit.c);
        assert!((fit.model_c - fit.c).abs() < 1e-9);
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(fit_secondary(&rev).unwrap(), fit);
        // 0.201 ↔ 0.0244
        assert!((0.201 * 6.0 / (5.0 * PI * PI) - 0.024_44).abs() < 1e-5);
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(fit_secondary(&[row(1000, 10), row(100_000, 1000)]), Err(AnalysisError::Degenerate(_))));
        assert!(matches!(fit_secondary(&[row(1000, 10), row(2000, 20), row(5000, 50)]), Err(AnalysisError::Degenerate(_))));
    }

    #[test]
    fn prime_fit_round_trip() {
        let xs = [100_000u64, 1_000_000, 10_000_000, 30_000_000];
        let li = li6_many(&xs);
        let pis = primes_below_each(&xs);
        let data: Vec<(u64, (f64, f64))> = xs
            .iter()
            .zip(&li)
            .zip(&pis)
            .map(|((&x, &z), &pi)| (x, (pi as f64 / 12.0 - 0.037 * z, pi as f64)))
            .rev()
            .collect();
        let fit = fit_primes_values(&data).unwrap();
        assert!((fit.c + 0.037).abs() < 1e-6, "{}", fit.c);
        assert!((fit.implied_a - 0.148).abs() < 1e-5);
        assert!(fit_primes_values(&data[..2]).is_err());
    }

    #[test]
    fn li6_is_cumulative() {
        let v = li6_many(&[10, 2, 1000]);
        assert_eq!(v[1], 0.0);
        assert!((v[0] - li6_simpson(2.0, 10.0)).abs() < 1e-8);
        assert!((v[2] - li6_simpson(2.0, 1000.0)).abs() < 1e-7);
    }

    #[test]
    fn bounds() {
        let b = bounds_report(1_000_000, Some(30_000), -0.03761);
        assert!((b.lower - 3959.0).abs() < 1.0);
        assert!(b.within_derived().unwrap());
        assert!(b.upper_stated < 30_000.0);
    }
}
