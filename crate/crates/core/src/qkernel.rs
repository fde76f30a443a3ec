//! Scalar kernel: deformed numbers and factorials, the bilateral shifted
//! factorial `(a;p)_n`, the deformed exponential `e_p`, the bilateral series
//! `0psi1`, and exact bookkeeping for integer powers of `q`.
//!
//! Every power of `q` that appears in the algebra is an integer power, so `q`
//! itself is never stored as a complex number. [`QPhase`] keeps the exponent
//! and only [`QPhase::realize`] touches `theta`.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance used by float comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// The deformation pair `(p, q = exp(i theta))` plus the comparison tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub p: f64,
    pub theta: f64,
    pub tolerance: f64,
    /// Set when `p = 1` and `theta = 0`: brackets return their undeformed limits.
    pub classical_limit: bool,
}

impl DeformationParams {
    pub fn new(p: f64, theta: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Argument(format!(
                "p must be a positive finite real, got {p}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::Argument(format!(
                "theta must be finite, got {theta}"
            )));
        }
        Ok(Self {
            p,
            theta,
            tolerance: DEFAULT_TOLERANCE,
            classical_limit: p == 1.0 && theta == 0.0,
        })
    }

    /// `p = q = 1`.
    pub fn classical() -> Self {
        Self {
            p: 1.0,
            theta: 0.0,
            tolerance: DEFAULT_TOLERANCE,
            classical_limit: true,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn q(&self) -> Complex64 {
        QPhase(1).realize(self.theta)
    }

    /// `q^k` realized numerically.
    pub fn q_pow(&self, k: i64) -> Complex64 {
        QPhase(k).realize(self.theta)
    }

    /// `nu = 1/(1-p)`; undefined at `p = 1`.
    pub fn nu(&self) -> Result<f64> {
        if self.p == 1.0 {
            return Err(Error::Domain("nu = 1/(1-p) is undefined at p = 1".into()));
        }
        Ok(1.0 / (1.0 - self.p))
    }

    /// `[x]` in base `p`.
    pub fn bracket(&self, x: f64) -> f64 {
        q_bracket(x, self.p)
    }
}

/// An integer power `q^k` of the unimodular deformation parameter.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct QPhase(pub i64);

impl QPhase {
    pub const ONE: QPhase = QPhase(0);

    pub fn exponent(self) -> i64 {
        self.0
    }

    pub fn realize(self, theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.0 as f64 * theta)
    }

    /// Complex conjugate; `|q| = 1` so this negates the exponent.
    pub fn conj(self) -> QPhase {
        QPhase(-self.0)
    }
}

impl Add for QPhase {
    type Output = QPhase;
    fn add(self, rhs: QPhase) -> QPhase {
        QPhase(self.0 + rhs.0)
    }
}

impl Sub for QPhase {
    type Output = QPhase;
    fn sub(self, rhs: QPhase) -> QPhase {
        QPhase(self.0 - rhs.0)
    }
}

impl Neg for QPhase {
    type Output = QPhase;
    fn neg(self) -> QPhase {
        QPhase(-self.0)
    }
}

impl fmt::Display for QPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q^{}", self.0)
    }
}

/// Real scalars the kernel is generic over: `f64` for float mode and
/// `BigRational` for exact mode.
pub trait Real:
    Clone + fmt::Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync
{
    const EXACT: bool;

    /// Converts a float; exact scalars read its shortest decimal form.
    fn from_f64(x: f64) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Integer power; negative exponents invert.
    fn powi(&self, k: i64) -> Self {
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * self.clone();
        }
        if k < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    /// Equality for exact scalars, relative closeness for floats.
    fn close_to(&self, other: &Self, rel_tol: f64) -> bool;
}

impl Real for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powi(&self, k: i64) -> Self {
        f64::powi(*self, k as i32)
    }

    fn close_to(&self, other: &Self, rel_tol: f64) -> bool {
        (self - other).abs() <= rel_tol * self.abs().max(other.abs()).max(f64::MIN_POSITIVE)
    }
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Argument(format!("{x} has no rational value")));
        }
        rational_from_decimal(&format!("{x}"))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn close_to(&self, other: &Self, _rel_tol: f64) -> bool {
        self == other
    }
}

/// Parses `"0.7"`, `"-1.25e-3"`, `"3/10"` or `"2"` into an exact rational.
pub fn rational_from_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a decimal or rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(idx) => (&s[..idx], s[idx + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    value *= ten.powi(scale as i64);
    Ok(if negative { -value } else { value })
}

/// `[x] = (base^x - 1)/(base - 1)`, with the limit `x` at `base = 1`.
pub fn q_bracket(x: f64, base: f64) -> f64 {
    if base == 1.0 {
        return x;
    }
    (x * base.ln()).exp_m1() / (base - 1.0)
}

/// `[n]! = [n][n-1]...[1]`, `[0]! = 1`.
pub fn q_bracket_factorial(n: i64, base: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::Argument(format!(
            "factorial of negative integer {n}"
        )));
    }
    Ok((1..=n).map(|k| q_bracket(k as f64, base)).product())
}

/// Exact `[n]` for rational base: `1 + p + ... + p^(n-1)`.
pub fn q_bracket_exact<R: Real>(n: u32, base: &R) -> R {
    let mut acc = R::zero();
    let mut power = R::one();
    for _ in 0..n {
        acc = acc + power.clone();
        power = power * base.clone();
    }
    acc
}

/// Shifted factorial `(a;p)_n` for any integer `n`.
///
/// `n >= 0`: `prod_{k=0}^{n-1} (1 - a p^k)`;
/// `n < 0`: `1 / prod_{k=1}^{-n} (1 - a p^{-k})`.
pub fn q_pochhammer(a: f64, p: f64, n: i64) -> Result<f64> {
    q_pochhammer_in(&a, &p, n)
}

pub fn q_pochhammer_in<R: Real>(a: &R, p: &R, n: i64) -> Result<R> {
    if n >= 0 {
        let mut acc = R::one();
        let mut power = R::one();
        for _ in 0..n {
            acc = acc * (R::one() - a.clone() * power.clone());
            power = power * p.clone();
        }
        Ok(acc)
    } else {
        let inv_p = R::one() / p.clone();
        let mut denom = R::one();
        let mut power = R::one();
        for k in 1..=n.unsigned_abs() as i64 {
            power = power * inv_p.clone();
            let factor = R::one() - a.clone() * power.clone();
            if factor.is_zero() {
                return Err(Error::Pole { k: -k });
            }
            denom = denom * factor;
        }
        Ok(R::one() / denom)
    }
}

/// Result of a deformed-exponential evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedExp {
    pub value: Complex64,
    /// Number of series terms summed.
    pub terms: usize,
    /// Upper bound on the modulus of the neglected tail.
    pub tail_bound: f64,
}

/// Radius of convergence of `e_p`: `1/(1-p)` for `p < 1`, infinite otherwise.
pub fn deformed_exp_radius(p: f64) -> f64 {
    if p < 1.0 {
        1.0 / (1.0 - p)
    } else {
        f64::INFINITY
    }
}

/// `e_p(x) = sum_n x^n / [n]!`.
pub fn deformed_exp(x: Complex64, p: f64, tail_tolerance: f64) -> Result<DeformedExp> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("e_p needs p > 0, got {p}")));
    }
    let radius = deformed_exp_radius(p);
    if x.norm() >= radius {
        return Err(Error::Domain(format!(
            "|x| = {} is outside the convergence disc |x| < {radius} of e_p",
            x.norm()
        )));
    }
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut n: u64 = 0;
    const MAX_TERMS: u64 = 1_000_000;
    loop {
        n += 1;
        term = term * x / q_bracket(n as f64, p);
        sum += term;
        // [n] is increasing, so every later ratio is at most |x|/[n+1].
        let ratio = x.norm() / q_bracket((n + 1) as f64, p);
        if term.norm() == 0.0 {
            return Ok(DeformedExp {
                value: sum,
                terms: n as usize + 1,
                tail_bound: 0.0,
            });
        }
        if ratio < 1.0 && term.norm() <= tail_tolerance * sum.norm() {
            let tail_bound = term.norm() * ratio / (1.0 - ratio);
            return Ok(DeformedExp {
                value: sum,
                terms: n as usize + 1,
                tail_bound,
            });
        }
        if n >= MAX_TERMS {
            return Err(Error::NonConvergence(format!(
                "e_p({x}) after {MAX_TERMS} terms"
            )));
        }
    }
}

/// Windowed evaluation of `0psi1(a; p, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilateralSum {
    pub value: f64,
    /// The summation window `[-window, window]`.
    pub window: i64,
    pub lower_boundary_term: f64,
    pub upper_boundary_term: f64,
}

/// `0psi1(a; p, x) = sum_{n in Z} (-1)^n p^{n(n-1)/2} x^n / (a;p)_n`.
///
/// The negative tail has term ratio tending to `a/x`, so the series only
/// converges for `|x| > |a|` (or `a = 0`); outside that region the call fails
/// with a domain error.
pub fn bilateral_psi01(a: f64, p: f64, x: f64, term_tolerance: f64) -> Result<f64> {
    bilateral_psi01_sum(a, p, x, term_tolerance).map(|s| s.value)
}

pub fn bilateral_psi01_sum(a: f64, p: f64, x: f64, term_tolerance: f64) -> Result<BilateralSum> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("0psi1 needs 0 < p < 1, got {p}")));
    }
    if x == 0.0 {
        return Err(Error::Domain("0psi1 is undefined at x = 0".into()));
    }
    if a != 0.0 && x.abs() <= a.abs() {
        return Err(Error::Domain(format!(
            "0psi1 diverges: the negative tail needs |x| > |a| (|x| = {}, |a| = {})",
            x.abs(),
            a.abs()
        )));
    }

    const MAX_WINDOW: i64 = 100_000;
    let mut sum = Neumaier::new(1.0);
    let mut upper = 1.0_f64; // t_n for n = window
    let mut lower = 1.0_f64; // t_n for n = -window
    let mut window = 0_i64;
    loop {
        // t_{n+1} = t_n (-x p^n) / (1 - a p^n)
        let pn = p.powi(window as i32);
        let denom = 1.0 - a * pn;
        if denom == 0.0 {
            return Err(Error::Pole { k: window });
        }
        let next_upper = upper * (-x * pn) / denom;
        // t_{-m-1} = t_{-m} (1 - a p^{-m-1}) / (-x p^{-m-1})
        let pm = p.powi(-(window as i32) - 1);
        let next_lower = lower * (1.0 - a * pm) / (-x * pm);

        let upper_decays = next_upper.abs() < upper.abs() || next_upper == 0.0;
        let lower_decays = next_lower.abs() < lower.abs() || next_lower == 0.0;
        upper = next_upper;
        lower = next_lower;
        window += 1;
        sum.add(upper);
        sum.add(lower);

        let scale = sum.value().abs().max(f64::MIN_POSITIVE);
        if window >= 2
            && upper_decays
            && lower_decays
            && upper.abs() <= term_tolerance * scale
            && lower.abs() <= term_tolerance * scale
        {
            return Ok(BilateralSum {
                value: sum.value(),
                window,
                lower_boundary_term: lower,
                upper_boundary_term: upper,
            });
        }
        if window >= MAX_WINDOW || !sum.value().is_finite() {
            return Err(Error::NonConvergence(format!(
                "0psi1({a}; {p}, {x}) after window {window}"
            )));
        }
    }
}

/// `R(i, j)`: 1 if `i > j`, else 0.
pub fn step_indicator(i: i64, j: i64) -> u8 {
    u8::from(i > j)
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    pub(crate) fn new(initial: f64) -> Self {
        Self {
            sum: initial,
            compensation: 0.0,
        }
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
