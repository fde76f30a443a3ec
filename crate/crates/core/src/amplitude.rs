//! Amplitude arithmetic backends.
//!
//! Every amplitude produced by the ladder operators is a real number times an
//! integer power of `q`. Three backends realize that:
//!
//! * [`FloatBackend`]: `Complex64`, `q` realized from `theta` immediately.
//! * [`GradedBackend`]: Laurent polynomial in `q` with `f64` coefficients, so
//!   `q`-exponents stay exact while the `p`-dependent magnitudes are floats.
//! * [`ExactBackend`]: Laurent polynomial in `q` whose coefficients are sums of
//!   `rational * sqrt(squarefree integer)`; exact for rational `p`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qkernel::{q_bracket, q_bracket_exact, DeformationParams, Real};

/// Arithmetic used by the Fock representation and everything built on it.
pub trait Backend: Clone + fmt::Debug + Send + Sync {
    type Value: Clone + fmt::Debug + PartialEq + Send + Sync;

    /// True when `q` is kept formal (integer exponents never realized).
    const FORMAL_Q: bool;
    /// True when coefficient arithmetic is exact.
    const EXACT: bool;

    fn params(&self) -> &DeformationParams;

    fn zero(&self) -> Self::Value;
    fn integer(&self, k: i64) -> Self::Value;
    fn one(&self) -> Self::Value {
        self.integer(1)
    }
    fn is_zero(&self, v: &Self::Value) -> bool;

    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        self.add(a, &self.neg(b))
    }
    fn conj(&self, a: &Self::Value) -> Self::Value;

    /// `q^k`.
    fn phase(&self, k: i64) -> Self::Value;
    /// `p^k`.
    fn p_power(&self, k: i64) -> Self::Value;
    /// `nu = 1/(1-p)`.
    fn nu(&self) -> Result<Self::Value>;

    /// `[n]`.
    fn bracket(&self, n: u32) -> Self::Value;
    /// `sqrt([n])`.
    fn sqrt_bracket(&self, n: u32) -> Self::Value;
    /// `1/[n]`, `n >= 1`.
    fn inv_bracket(&self, n: u32) -> Self::Value;
    /// `1/sqrt([n])`, `n >= 1`.
    fn inv_sqrt_bracket(&self, n: u32) -> Self::Value;

    /// `1/sqrt([n]!)`.
    fn inv_sqrt_bracket_factorial(&self, n: u32) -> Self::Value {
        (1..=n).fold(self.one(), |acc, k| {
            self.mul(&acc, &self.inv_sqrt_bracket(k))
        })
    }
    /// `1/[n]!`.
    fn inv_bracket_factorial(&self, n: u32) -> Self::Value {
        (1..=n).fold(self.one(), |acc, k| self.mul(&acc, &self.inv_bracket(k)))
    }

    /// Numeric value with `q = exp(i theta)`.
    fn realize(&self, v: &Self::Value) -> Complex64;

    /// Equality: exact for exact backends, `q`-graded closeness for graded
    /// ones, plain closeness for floats.
    fn formal_eq(&self, a: &Self::Value, b: &Self::Value, tol: f64) -> bool;
}

/// Complex double arithmetic.
#[derive(Debug, Clone)]
pub struct FloatBackend {
    params: DeformationParams,
}

impl FloatBackend {
    pub fn new(params: DeformationParams) -> Self {
        Self { params }
    }
}

impl Backend for FloatBackend {
    type Value = Complex64;
    const FORMAL_Q: bool = false;
    const EXACT: bool = false;

    fn params(&self) -> &DeformationParams {
        &self.params
    }
    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn integer(&self, k: i64) -> Complex64 {
        Complex64::new(k as f64, 0.0)
    }
    fn is_zero(&self, v: &Complex64) -> bool {
        v.re == 0.0 && v.im == 0.0
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn conj(&self, a: &Complex64) -> Complex64 {
        a.conj()
    }
    fn phase(&self, k: i64) -> Complex64 {
        self.params.q_pow(k)
    }
    fn p_power(&self, k: i64) -> Complex64 {
        Complex64::new(self.params.p.powi(k as i32), 0.0)
    }
    fn nu(&self) -> Result<Complex64> {
        self.params.nu().map(|nu| Complex64::new(nu, 0.0))
    }
    fn bracket(&self, n: u32) -> Complex64 {
        Complex64::new(q_bracket(n as f64, self.params.p), 0.0)
    }
    fn sqrt_bracket(&self, n: u32) -> Complex64 {
        Complex64::new(q_bracket(n as f64, self.params.p).sqrt(), 0.0)
    }
    fn inv_bracket(&self, n: u32) -> Complex64 {
        Complex64::new(1.0 / q_bracket(n as f64, self.params.p), 0.0)
    }
    fn inv_sqrt_bracket(&self, n: u32) -> Complex64 {
        Complex64::new(1.0 / q_bracket(n as f64, self.params.p).sqrt(), 0.0)
    }
    fn realize(&self, v: &Complex64) -> Complex64 {
        *v
    }
    fn formal_eq(&self, a: &Complex64, b: &Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
    }
}

/// Laurent polynomial in `q` with real float coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QLaurent {
    pub terms: BTreeMap<i64, f64>,
}

impl QLaurent {
    pub fn monomial(q_power: i64, coeff: f64) -> Self {
        let mut terms = BTreeMap::new();
        if coeff != 0.0 {
            terms.insert(q_power, coeff);
        }
        Self { terms }
    }
}

/// Float coefficients, formal `q`.
#[derive(Debug, Clone)]
pub struct GradedBackend {
    params: DeformationParams,
}

impl GradedBackend {
    pub fn new(params: DeformationParams) -> Self {
        Self { params }
    }

    fn real(&self, x: f64) -> QLaurent {
        QLaurent::monomial(0, x)
    }
}

impl Backend for GradedBackend {
    type Value = QLaurent;
    const FORMAL_Q: bool = true;
    const EXACT: bool = false;

    fn params(&self) -> &DeformationParams {
        &self.params
    }
    fn zero(&self) -> QLaurent {
        QLaurent::default()
    }
    fn integer(&self, k: i64) -> QLaurent {
        self.real(k as f64)
    }
    fn is_zero(&self, v: &QLaurent) -> bool {
        v.terms.is_empty()
    }
    fn add(&self, a: &QLaurent, b: &QLaurent) -> QLaurent {
        let mut out = a.clone();
        for (&k, &c) in &b.terms {
            let entry = out.terms.entry(k).or_insert(0.0);
            *entry += c;
            if *entry == 0.0 {
                out.terms.remove(&k);
            }
        }
        out
    }
    fn mul(&self, a: &QLaurent, b: &QLaurent) -> QLaurent {
        let mut out = QLaurent::default();
        for (&ka, &ca) in &a.terms {
            for (&kb, &cb) in &b.terms {
                *out.terms.entry(ka + kb).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }
    fn neg(&self, a: &QLaurent) -> QLaurent {
        QLaurent {
            terms: a.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
    fn conj(&self, a: &QLaurent) -> QLaurent {
        QLaurent {
            terms: a.terms.iter().map(|(&k, &c)| (-k, c)).collect(),
        }
    }
    fn phase(&self, k: i64) -> QLaurent {
        // q is specialized to 1 in the classical limit
        let k = if self.params.classical_limit { 0 } else { k };
        QLaurent::monomial(k, 1.0)
    }
    fn p_power(&self, k: i64) -> QLaurent {
        self.real(self.params.p.powi(k as i32))
    }
    fn nu(&self) -> Result<QLaurent> {
        self.params.nu().map(|nu| self.real(nu))
    }
    fn bracket(&self, n: u32) -> QLaurent {
        self.real(q_bracket(n as f64, self.params.p))
    }
    fn sqrt_bracket(&self, n: u32) -> QLaurent {
        self.real(q_bracket(n as f64, self.params.p).sqrt())
    }
    fn inv_bracket(&self, n: u32) -> QLaurent {
        self.real(1.0 / q_bracket(n as f64, self.params.p))
    }
    fn inv_sqrt_bracket(&self, n: u32) -> QLaurent {
        self.real(1.0 / q_bracket(n as f64, self.params.p).sqrt())
    }
    fn realize(&self, v: &QLaurent) -> Complex64 {
        v.terms
            .iter()
            .map(|(&k, &c)| self.params.q_pow(k) * c)
            .sum()
    }
    fn formal_eq(&self, a: &QLaurent, b: &QLaurent, tol: f64) -> bool {
        let scale = a
            .terms
            .values()
            .chain(b.terms.values())
            .fold(1.0_f64, |m, c| m.max(c.abs()));
        let keys: std::collections::BTreeSet<i64> =
            a.terms.keys().chain(b.terms.keys()).copied().collect();
        keys.into_iter().all(|k| {
            let ca = a.terms.get(&k).copied().unwrap_or(0.0);
            let cb = b.terms.get(&k).copied().unwrap_or(0.0);
            (ca - cb).abs() <= tol * scale
        })
    }
}

/// Squarefree radicand, stored as its sorted prime (or irreducible cofactor) atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Radicand(Vec<BigUint>);

impl Radicand {
    pub fn atoms(&self) -> &[BigUint] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Product of two squarefree radicands: shared atoms pair off into the
    /// returned rational factor.
    fn mul(&self, other: &Radicand) -> (Radicand, BigUint) {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        let mut atoms = Vec::with_capacity(a.len() + b.len());
        let mut square = BigUint::one();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    atoms.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    atoms.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    square *= &a[i];
                    i += 1;
                    j += 1;
                }
            }
        }
        atoms.extend_from_slice(&a[i..]);
        atoms.extend_from_slice(&b[j..]);
        (Radicand(atoms), square)
    }

    fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|a| a.to_f64().unwrap_or(f64::INFINITY))
            .product::<f64>()
            .sqrt()
    }
}

impl fmt::Display for Radicand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let product: BigUint = self.0.iter().product();
        write!(f, "{product}")
    }
}

/// Exact amplitude: `sum_{k, r} c_{k,r} q^k sqrt(r)` with rational `c` and
/// squarefree integer `r`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExactAmp {
    pub terms: BTreeMap<(i64, Radicand), BigRational>,
}

impl ExactAmp {
    pub fn rational(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((0, Radicand::default()), c);
        }
        Self { terms }
    }

    /// `sqrt(r)` for a non-negative rational.
    pub fn sqrt_of(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain(format!(
                "square root of negative rational {r}"
            )));
        }
        if r.is_zero() {
            return Ok(Self::default());
        }
        // sqrt(a/b) = sqrt(a b) / b
        let num = r.numer().magnitude().clone();
        let den = r.denom().magnitude().clone();
        let mut parity: BTreeMap<BigUint, u32> = BTreeMap::new();
        let mut outside = BigUint::one();
        for n in [&num, &den] {
            for (prime, exp) in factorize(n) {
                *parity.entry(prime).or_insert(0) += exp;
            }
        }
        let mut atoms = Vec::new();
        for (prime, exp) in parity {
            outside *= prime.pow(exp / 2);
            if exp % 2 == 1 {
                atoms.push(prime);
            }
        }
        let coeff = BigRational::new(BigInt::from(outside), BigInt::from(den));
        let mut terms = BTreeMap::new();
        terms.insert((0, Radicand(atoms)), coeff);
        Ok(Self { terms })
    }

    fn add(&self, other: &ExactAmp) -> ExactAmp {
        let mut out = self.clone();
        for (key, c) in &other.terms {
            let entry = out
                .terms
                .entry(key.clone())
                .or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(key);
            }
        }
        out
    }

    fn mul(&self, other: &ExactAmp) -> ExactAmp {
        let mut out = ExactAmp::default();
        for ((ka, ra), ca) in &self.terms {
            for ((kb, rb), cb) in &other.terms {
                let (radicand, square) = ra.mul(rb);
                let c = ca * cb * BigRational::from_integer(BigInt::from(square));
                let entry = out
                    .terms
                    .entry((ka + kb, radicand))
                    .or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn realize(&self, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|((k, r), c)| {
                Complex64::from_polar(1.0, *k as f64 * theta) * (Real::to_f64(c) * r.to_f64())
            })
            .sum()
    }
}

/// Trial-division factorization. A cofactor left after the divisor budget is
/// kept as a single atom (after extracting an exact square root if it has one).
fn factorize(n: &BigUint) -> Vec<(BigUint, u32)> {
    const DIVISOR_BUDGET: u64 = 2_000_000;
    let mut out = Vec::new();
    let mut rest = n.clone();
    if rest.is_zero() {
        return out;
    }
    let mut d: u64 = 2;
    while d <= DIVISOR_BUDGET {
        let dd = BigUint::from(d);
        if &dd * &dd > rest {
            break;
        }
        let mut exp = 0;
        loop {
            let (quot, rem) = rest.div_rem(&dd);
            if !rem.is_zero() {
                break;
            }
            rest = quot;
            exp += 1;
        }
        if exp > 0 {
            out.push((dd, exp));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rest.is_one() {
        let root = rest.sqrt();
        if &root * &root == rest {
            out.push((root, 2));
        } else {
            out.push((rest, 1));
        }
    }
    out
}

/// Exact arithmetic for rational `p`.
#[derive(Debug, Clone)]
pub struct ExactBackend {
    params: DeformationParams,
    p: BigRational,
    sqrt_cache: Arc<Mutex<BTreeMap<u32, ExactAmp>>>,
}

impl ExactBackend {
    pub fn new(p: BigRational, theta: f64) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::Argument(format!("p must be positive, got {p}")));
        }
        let params = DeformationParams::new(Real::to_f64(&p), theta)?;
        Ok(Self {
            params,
            p,
            sqrt_cache: Arc::default(),
        })
    }

    /// Reads `p` as the rational with the same shortest decimal form.
    pub fn from_params(params: &DeformationParams) -> Result<Self> {
        let p = <BigRational as Real>::from_f64(params.p)?;
        let mut backend = Self::new(p, params.theta)?;
        backend.params.tolerance = params.tolerance;
        backend.params.classical_limit = params.classical_limit;
        Ok(backend)
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }

    fn rational_bracket(&self, n: u32) -> BigRational {
        q_bracket_exact(n, &self.p)
    }
}

impl Backend for ExactBackend {
    type Value = ExactAmp;
    const FORMAL_Q: bool = true;
    const EXACT: bool = true;

    fn params(&self) -> &DeformationParams {
        &self.params
    }
    fn zero(&self) -> ExactAmp {
        ExactAmp::default()
    }
    fn integer(&self, k: i64) -> ExactAmp {
        ExactAmp::rational(BigRational::from_integer(BigInt::from(k)))
    }
    fn is_zero(&self, v: &ExactAmp) -> bool {
        v.terms.is_empty()
    }
    fn add(&self, a: &ExactAmp, b: &ExactAmp) -> ExactAmp {
        a.add(b)
    }
    fn mul(&self, a: &ExactAmp, b: &ExactAmp) -> ExactAmp {
        a.mul(b)
    }
    fn neg(&self, a: &ExactAmp) -> ExactAmp {
        ExactAmp {
            terms: a.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
    fn conj(&self, a: &ExactAmp) -> ExactAmp {
        ExactAmp {
            terms: a
                .terms
                .iter()
                .map(|((k, r), c)| ((-k, r.clone()), c.clone()))
                .collect(),
        }
    }
    fn phase(&self, k: i64) -> ExactAmp {
        let k = if self.params.classical_limit { 0 } else { k };
        let mut terms = BTreeMap::new();
        terms.insert((k, Radicand::default()), BigRational::one());
        ExactAmp { terms }
    }
    fn p_power(&self, k: i64) -> ExactAmp {
        ExactAmp::rational(self.p.powi(k))
    }
    fn nu(&self) -> Result<ExactAmp> {
        if self.p.is_one() {
            return Err(Error::Domain("nu = 1/(1-p) is undefined at p = 1".into()));
        }
        Ok(ExactAmp::rational(
            BigRational::one() / (BigRational::one() - &self.p),
        ))
    }
    fn bracket(&self, n: u32) -> ExactAmp {
        ExactAmp::rational(self.rational_bracket(n))
    }
    fn sqrt_bracket(&self, n: u32) -> ExactAmp {
        if let Some(v) = self.sqrt_cache.lock().expect("cache poisoned").get(&n) {
            return v.clone();
        }
        let v = ExactAmp::sqrt_of(&self.rational_bracket(n))
            .expect("brackets are positive for positive p");
        self.sqrt_cache
            .lock()
            .expect("cache poisoned")
            .insert(n, v.clone());
        v
    }
    fn inv_bracket(&self, n: u32) -> ExactAmp {
        ExactAmp::rational(BigRational::one() / self.rational_bracket(n))
    }
    fn inv_sqrt_bracket(&self, n: u32) -> ExactAmp {
        // sqrt([n]) / [n]
        self.sqrt_bracket(n).mul(&self.inv_bracket(n))
    }
    fn realize(&self, v: &ExactAmp) -> Complex64 {
        v.realize(self.params.theta)
    }
    fn formal_eq(&self, a: &ExactAmp, b: &ExactAmp, _tol: f64) -> bool {
        a == b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::rational_from_decimal;

    fn exact(p: &str) -> ExactBackend {
        ExactBackend::new(rational_from_decimal(p).unwrap(), 0.4).unwrap()
    }

    #[test]
    fn sqrt_pairs_back_into_rationals() {
        let b = exact("7/10");
        for n in 1..8 {
            let s = b.sqrt_bracket(n);
            assert_eq!(b.mul(&s, &s), b.bracket(n));
            let inv = b.inv_sqrt_bracket(n);
            assert_eq!(b.mul(&s, &inv), b.one());
        }
    }

    #[test]
    fn sqrt_of_known_values() {
        let eight = ExactAmp::sqrt_of(&BigRational::from_integer(8.into())).unwrap();
        let expected = {
            let mut terms = BTreeMap::new();
            terms.insert(
                (0, Radicand(vec![BigUint::from(2u32)])),
                BigRational::from_integer(2.into()),
            );
            ExactAmp { terms }
        };
        assert_eq!(eight, expected);
        let quarter = ExactAmp::sqrt_of(&rational_from_decimal("1/4").unwrap()).unwrap();
        assert_eq!(
            quarter,
            ExactAmp::rational(rational_from_decimal("1/2").unwrap())
        );
    }

    #[test]
    fn exact_realization_matches_float() {
        let b = exact("3/10");
        let f = FloatBackend::new(*b.params());
        for n in 0..7 {
            let diff = b.realize(&b.sqrt_bracket(n)) - f.sqrt_bracket(n);
            assert!(diff.norm() < 1e-14);
        }
        let v = b.mul(&b.phase(3), &b.sqrt_bracket(5));
        let w = f.mul(&f.phase(3), &f.sqrt_bracket(5));
        assert!((b.realize(&v) - w).norm() < 1e-13);
    }

    #[test]
    fn formal_q_does_not_collapse_at_theta_zero() {
        let b = ExactBackend::new(rational_from_decimal("1/2").unwrap(), 0.0).unwrap();
        let diff = b.sub(&b.phase(1), &b.one());
        assert!(!b.is_zero(&diff));
        assert_eq!(b.realize(&diff).norm(), 0.0);
        let g = GradedBackend::new(*b.params());
        assert!(!g.is_zero(&g.sub(&g.phase(1), &g.one())));
    }

    #[test]
    fn factorization_roundtrip() {
        for n in [
            1u64,
            2,
            12,
            97,
            360,
            1_000_003,
            999_983 * 999_983,
            2u64.pow(40) * 3,
        ] {
            let f = factorize(&BigUint::from(n));
            let back: BigUint = f.iter().map(|(p, e)| p.pow(*e)).product();
            assert_eq!(back, BigUint::from(n));
        }
    }
}
