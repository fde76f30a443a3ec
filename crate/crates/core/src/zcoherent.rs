//! Noncommuting coherent-state parameters and the lowering-operator
//! coherent states.
//!
//! The symbols obey
//!
//! ```text
//! z_i z_j   = q z_j z_i        (i < j)
//! z*_i z*_j = q^-1 z*_j z*_i   (i < j)
//! z*_i z_j  = q z_j z*_i       (i != j)
//! z*_i z_i  = z_i z*_i
//! ```
//!
//! Monomials are stored in the canonical order `z*_n..z*_1 z_n..z_1` (all
//! starred symbols on the left, decreasing index inside each block) with an
//! integer power of `q` collected while reordering. The symbols commute
//! with every mode operator.

use std::cmp::Reverse;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::amplitude::{Backend, QLaurent};
use crate::error::{Error, Result};
use crate::fockspace::{FockSpace, Occupation};
use crate::qkernel::deformed_exp;

/// A generator `z_i` or `z*_i` (1-based mode index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ZSymbol {
    Z(usize),
    ZStar(usize),
}

impl ZSymbol {
    pub fn mode(&self) -> usize {
        match *self {
            Self::Z(i) | Self::ZStar(i) => i,
        }
    }

    /// Position in the canonical order; smaller goes further left.
    fn rank(&self) -> (u8, Reverse<usize>) {
        match *self {
            Self::ZStar(i) => (0, Reverse(i)),
            Self::Z(i) => (1, Reverse(i)),
        }
    }
}

impl fmt::Display for ZSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Z(i) => write!(f, "z{i}"),
            Self::ZStar(i) => write!(f, "z*{i}"),
        }
    }
}

/// `φ` with `XY = q^φ YX`.
pub fn swap_phase(x: ZSymbol, y: ZSymbol) -> i64 {
    use ZSymbol::{ZStar, Z};
    match (x, y) {
        (Z(i), Z(j)) => (j as i64 - i as i64).signum(),
        (ZStar(i), ZStar(j)) => -(j as i64 - i as i64).signum(),
        (ZStar(i), Z(j)) => i64::from(i != j),
        (Z(i), ZStar(j)) => -i64::from(i != j),
    }
}

/// Exponents of a canonically ordered monomial. Negative exponents are
/// allowed (the positive-energy states are Laurent series in `z`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ZKey {
    pub z: Vec<i64>,
    pub z_star: Vec<i64>,
}

impl ZKey {
    pub fn one(n_modes: usize) -> Self {
        Self {
            z: vec![0; n_modes],
            z_star: vec![0; n_modes],
        }
    }

    /// `z_n^{m_n} ... z_1^{m_1}`.
    pub fn from_z_powers(powers: Vec<i64>) -> Self {
        let n = powers.len();
        Self {
            z: powers,
            z_star: vec![0; n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.z.len()
    }

    /// Key and `q`-exponent of `z_i * self`.
    pub fn left_multiply(&self, mode: usize) -> (ZKey, i64) {
        let phase = left_multiply_phase(self, mode);
        let mut key = self.clone();
        key.z[mode - 1] += 1;
        (key, phase)
    }
}

impl fmt::Display for ZKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &e) in self.z_star.iter().enumerate().rev() {
            if e != 0 {
                parts.push(format!("z*{}^{e}", i + 1));
            }
        }
        for (i, &e) in self.z.iter().enumerate().rev() {
            if e != 0 {
                parts.push(format!("z{}^{e}", i + 1));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// `q`-exponent picked up when `z_mode` is moved from the far left of a
/// canonical monomial to its canonical slot.
pub fn left_multiply_phase(key: &ZKey, mode: usize) -> i64 {
    let past_stars: i64 = key
        .z_star
        .iter()
        .enumerate()
        .filter(|&(k, _)| k + 1 != mode)
        .map(|(_, &e)| e)
        .sum();
    let past_higher: i64 = key.z[mode..].iter().sum();
    past_higher - past_stars
}

/// `coeff * q^q_power * (canonical word for key)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZMonomial {
    pub key: ZKey,
    pub q_power: i64,
    pub coeff: Complex64,
}

/// Rewrites `word` into canonical order by adjacent swaps.
pub fn normal_order(word: &[ZSymbol], n_modes: usize) -> Result<ZMonomial> {
    if let Some(bad) = word.iter().find(|s| s.mode() == 0 || s.mode() > n_modes) {
        return Err(Error::Argument(format!(
            "symbol {bad} outside modes 1..={n_modes}"
        )));
    }
    let mut w = word.to_vec();
    let mut q_power = 0;
    // Bubble sort: every swap exchanges an adjacent out-of-order pair.
    for end in (1..w.len()).rev() {
        for k in 0..end {
            if w[k].rank() > w[k + 1].rank() {
                q_power += swap_phase(w[k], w[k + 1]);
                w.swap(k, k + 1);
            }
        }
    }
    let mut key = ZKey::one(n_modes);
    for s in &w {
        match *s {
            ZSymbol::Z(i) => key.z[i - 1] += 1,
            ZSymbol::ZStar(i) => key.z_star[i - 1] += 1,
        }
    }
    Ok(ZMonomial {
        key,
        q_power,
        coeff: Complex64::new(1.0, 0.0),
    })
}

/// Sparse linear combination of canonical monomials with backend coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPolynomial<V> {
    terms: BTreeMap<ZKey, V>,
}

impl<V: Clone> ZPolynomial<V> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial<B: Backend<Value = V>>(backend: &B, key: ZKey, coeff: V) -> Self {
        let mut p = Self::zero();
        p.add_term(backend, key, coeff);
        p
    }

    pub fn terms(&self) -> &BTreeMap<ZKey, V> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff * key`, dropping the term if it cancels.
    pub fn add_term<B: Backend<Value = V>>(&mut self, backend: &B, key: ZKey, coeff: V) {
        let merged = match self.terms.remove(&key) {
            Some(old) => backend.add(&old, &coeff),
            None => coeff,
        };
        if !backend.is_zero(&merged) {
            self.terms.insert(key, merged);
        }
    }

    pub fn add<B: Backend<Value = V>>(&self, backend: &B, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(backend, k.clone(), v.clone());
        }
        out
    }

    pub fn sub<B: Backend<Value = V>>(&self, backend: &B, other: &Self) -> Self {
        self.add(backend, &other.scale(backend, &backend.integer(-1)))
    }

    pub fn scale<B: Backend<Value = V>>(&self, backend: &B, c: &V) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.add_term(backend, k.clone(), backend.mul(c, v));
        }
        out
    }

    /// `z_mode * self`, normal ordered.
    pub fn left_multiply_z<B: Backend<Value = V>>(&self, backend: &B, mode: usize) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            let (key, phase) = k.left_multiply(mode);
            out.add_term(backend, key, backend.mul(&backend.phase(phase), v));
        }
        out
    }

    /// Coefficient-wise comparison through [`Backend::formal_eq`].
    pub fn formal_eq<B: Backend<Value = V>>(&self, backend: &B, other: &Self, tol: f64) -> bool {
        let zero = backend.zero();
        let keys: std::collections::BTreeSet<_> =
            self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().all(|k| {
            let a = self.terms.get(k).unwrap_or(&zero);
            let b = other.terms.get(k).unwrap_or(&zero);
            backend.formal_eq(a, b, tol)
        })
    }
}

/// Occupation-indexed amplitudes with noncommuting-symbol coefficients.
pub type FormalVector<V> = BTreeMap<Occupation, ZPolynomial<V>>;

/// A coherent state `sum_n c_n(z) |n>` in formal form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalCoherentState<V> {
    pub amplitudes: FormalVector<V>,
    /// `r_i = |z_i|^2`.
    pub magnitudes: Vec<f64>,
    /// Overall real factor applied on top of the amplitudes.
    pub normalization: f64,
}

impl<V: Clone> FormalCoherentState<V> {
    /// Same occupations with formally equal polynomials; `tol` only matters
    /// for float coefficients.
    pub fn formally_equal<B: Backend<Value = V>>(
        &self,
        backend: &B,
        other: &Self,
        tol: f64,
    ) -> bool {
        self.amplitudes.len() == other.amplitudes.len()
            && self.amplitudes.iter().all(|(occ, poly)| {
                other
                    .amplitudes
                    .get(occ)
                    .is_some_and(|o| poly.formal_eq(backend, o, tol))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Direct coefficients `z_n^{n_n}..z_1^{n_1} / sqrt([n_1]!..[n_n]!)`.
    Series,
    /// `e_p(z_n a+_n) .. e_p(z_1 a+_1) |0>` expanded by operator application.
    Exponential,
}

/// Which occupations a formal state keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Truncation {
    /// Every occupation inside the space cutoffs.
    PerMode,
    /// Occupations with total number at most `C` (and inside the cutoffs).
    Total(u32),
}

impl Truncation {
    fn keeps<B: Backend>(&self, space: &FockSpace<B>, occ: &Occupation) -> bool {
        space.config().contains(occ)
            && match *self {
                Self::PerMode => true,
                Self::Total(c) => occ.total() <= c,
            }
    }
}

fn check_magnitudes(n_modes: usize, magnitudes: &[f64], p: f64) -> Result<()> {
    if magnitudes.len() != n_modes {
        return Err(Error::Argument(format!(
            "{} magnitudes given for {n_modes} modes",
            magnitudes.len()
        )));
    }
    let radius = crate::qkernel::deformed_exp_radius(p);
    for &r in magnitudes {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Argument(format!(
                "magnitude {r} must be finite and non-negative"
            )));
        }
        if r >= radius {
            return Err(Error::Domain(format!(
                "|z|^2 = {r} is outside the e_p convergence disc |x| < {radius}"
            )));
        }
    }
    Ok(())
}

/// `1/sqrt(e_p(r_1) .. e_p(r_n))`.
pub fn coherent_normalization(p: f64, magnitudes: &[f64]) -> Result<f64> {
    let mut prod = 1.0;
    for &r in magnitudes {
        prod *= deformed_exp(Complex64::new(r, 0.0), p, 1e-17)?.value.re;
    }
    Ok(1.0 / prod.sqrt())
}

/// Builds the lowering-operator coherent state on the retained occupations.
pub fn build_coherent_state<B: Backend>(
    space: &FockSpace<B>,
    magnitudes: &[f64],
    method: Method,
    truncation: Truncation,
) -> Result<FormalCoherentState<B::Value>> {
    let config = space.config();
    let n = config.n_modes;
    check_magnitudes(n, magnitudes, config.params.p)?;
    if let Truncation::Total(c) = truncation {
        if config.cutoff.iter().any(|&k| k < c) {
            return Err(Error::Configuration(format!(
                "total truncation {c} exceeds a per-mode cutoff {:?}",
                config.cutoff
            )));
        }
    }
    let b = space.backend();
    let amplitudes = match method {
        Method::Series => config
            .occupations()
            .into_iter()
            .filter(|occ| truncation.keeps(space, occ))
            .map(|occ| {
                let coeff = (1..=n).fold(b.one(), |acc, mode| {
                    b.mul(&acc, &b.inv_sqrt_bracket_factorial(occ.count(mode)))
                });
                let key = ZKey::from_z_powers(occ.0.iter().map(|&k| k as i64).collect());
                (occ, ZPolynomial::monomial(b, key, coeff))
            })
            .collect(),
        Method::Exponential => {
            let mut state: FormalVector<B::Value> = BTreeMap::new();
            state.insert(
                Occupation::vacuum(n),
                ZPolynomial::monomial(b, ZKey::one(n), b.one()),
            );
            for mode in 1..=n {
                state = apply_deformed_exp(space, mode, &state, truncation);
            }
            state
        }
    };
    Ok(FormalCoherentState {
        amplitudes,
        magnitudes: magnitudes.to_vec(),
        normalization: coherent_normalization(config.params.p, magnitudes)?,
    })
}

/// `e_p(z_mode a+_mode)` applied to a formal vector, truncated.
fn apply_deformed_exp<B: Backend>(
    space: &FockSpace<B>,
    mode: usize,
    v: &FormalVector<B::Value>,
    truncation: Truncation,
) -> FormalVector<B::Value> {
    let b = space.backend();
    let mut out = v.clone();
    let mut term = v.clone();
    let mut k = 0;
    while !term.is_empty() {
        k += 1;
        let mut next: FormalVector<B::Value> = BTreeMap::new();
        let scale = b.inv_bracket(k);
        for (occ, poly) in &term {
            let (target, coeff) = space.creation_coefficient(mode, occ);
            if !truncation.keeps(space, &target) {
                continue;
            }
            let image = poly
                .left_multiply_z(b, mode)
                .scale(b, &b.mul(&coeff, &scale));
            add_into(b, &mut next, target, image);
        }
        for (occ, poly) in &next {
            add_into(b, &mut out, occ.clone(), poly.clone());
        }
        term = next;
    }
    out
}

fn add_into<B: Backend>(
    b: &B,
    v: &mut FormalVector<B::Value>,
    occ: Occupation,
    poly: ZPolynomial<B::Value>,
) {
    let merged = match v.remove(&occ) {
        Some(old) => old.add(b, &poly),
        None => poly,
    };
    if !merged.is_zero() {
        v.insert(occ, merged);
    }
}

/// `a_mode` applied to a formal vector (symbols commute with the operator).
pub fn apply_annihilation_formal<B: Backend>(
    space: &FockSpace<B>,
    mode: usize,
    v: &FormalVector<B::Value>,
) -> FormalVector<B::Value> {
    let b = space.backend();
    let mut out = BTreeMap::new();
    for (occ, poly) in v {
        if let Some((target, coeff)) = space.annihilation_coefficient(mode, occ) {
            add_into(b, &mut out, target, poly.scale(b, &coeff));
        }
    }
    out
}

/// `z_mode` multiplied from the left onto every amplitude.
pub fn left_multiply_formal<B: Backend>(
    space: &FockSpace<B>,
    mode: usize,
    v: &FormalVector<B::Value>,
) -> FormalVector<B::Value> {
    let b = space.backend();
    v.iter()
        .map(|(occ, poly)| (occ.clone(), poly.left_multiply_z(b, mode)))
        .filter(|(_, p)| !p.is_zero())
        .collect()
}

/// Result of comparing `a_i |z>` with `z_i |z>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub mode: usize,
    /// Occupations where both sides are fully determined by the truncation.
    pub interior_size: usize,
    pub max_interior_residual: f64,
    /// All interior coefficients agree under the backend's formal equality.
    pub formally_equal: bool,
    /// Interior occupations where the Fock-side phase `sum_{k>i} m_k`
    /// differs from the reordering phase of `z_i`.
    pub phase_mismatches: usize,
    /// Largest discrepancy on occupations whose raised partner was truncated.
    pub boundary_residue: f64,
    pub pass: bool,
}

fn poly_norm<B: Backend>(b: &B, p: &ZPolynomial<B::Value>) -> f64 {
    p.terms()
        .values()
        .map(|v| b.realize(v).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Checks `a_i |z> = z_i |z>` formally on the interior of the truncation.
pub fn check_lowering_eigenproblem<B: Backend>(
    space: &FockSpace<B>,
    state: &FormalCoherentState<B::Value>,
    mode: usize,
    tolerance: f64,
) -> Result<EigenReport> {
    space.check_mode(mode)?;
    let b = space.backend();
    let lhs = apply_annihilation_formal(space, mode, &state.amplitudes);
    let rhs = left_multiply_formal(space, mode, &state.amplitudes);
    let zero = ZPolynomial::zero();
    let mut report = EigenReport {
        mode,
        interior_size: 0,
        max_interior_residual: 0.0,
        formally_equal: true,
        phase_mismatches: 0,
        boundary_residue: 0.0,
        pass: true,
    };
    for occ in state.amplitudes.keys() {
        let l = lhs.get(occ).unwrap_or(&zero);
        let r = rhs.get(occ).unwrap_or(&zero);
        let residual = poly_norm(b, &l.sub(b, r));
        if state.amplitudes.contains_key(&occ.raised(mode)) {
            report.interior_size += 1;
            report.max_interior_residual = report.max_interior_residual.max(residual);
            report.formally_equal &= l.formal_eq(b, r, tolerance);
            let key = ZKey::from_z_powers(occ.0.iter().map(|&k| k as i64).collect());
            if occ.higher_sum(mode) != left_multiply_phase(&key, mode) {
                report.phase_mismatches += 1;
            }
        } else {
            report.boundary_residue = report.boundary_residue.max(residual);
        }
    }
    report.pass = report.formally_equal && report.phase_mismatches == 0;
    Ok(report)
}

/// `<z|z>` with the contraction `z*_i z_i -> r_i` and distinct monomials
/// orthogonal. Includes the normalization factor.
pub fn self_inner_product<B: Backend>(b: &B, state: &FormalCoherentState<B::Value>) -> f64 {
    let mut acc = crate::qkernel::Neumaier::new(0.0);
    for poly in state.amplitudes.values() {
        for (key, c) in poly.terms() {
            let weight: f64 = key
                .z
                .iter()
                .zip(&key.z_star)
                .zip(&state.magnitudes)
                .map(|((&a, &s), &r)| r.powi((a + s) as i32))
                .product();
            acc.add(b.realize(&b.mul(&b.conj(c), c)).re * weight);
        }
    }
    acc.value() * state.normalization * state.normalization
}

/// Smallest per-mode cutoff whose neglected `e_p(r)` tail is below `tol`
/// relative to the sum.
pub fn suggested_cutoff(p: f64, magnitudes: &[f64], tol: f64) -> Result<u32> {
    let mut worst = 1;
    for &r in magnitudes {
        let e = deformed_exp(Complex64::new(r, 0.0), p, tol)?;
        worst = worst.max(e.terms as u32);
    }
    Ok(worst)
}

/// Serializable view of one amplitude term of a graded-backend state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeRecord {
    pub occupation: Vec<u32>,
    pub z_powers: Vec<i64>,
    pub z_star_powers: Vec<i64>,
    pub q_power: i64,
    pub coefficient: f64,
}

/// One record per (occupation, monomial, power of `q`).
pub fn graded_records(state: &FormalCoherentState<QLaurent>) -> Vec<AmplitudeRecord> {
    let mut out = Vec::new();
    for (occ, poly) in &state.amplitudes {
        for (key, coeff) in poly.terms() {
            for (&q_power, &c) in &coeff.terms {
                out.push(AmplitudeRecord {
                    occupation: occ.0.clone(),
                    z_powers: key.z.clone(),
                    z_star_powers: key.z_star.clone(),
                    q_power,
                    coefficient: c * state.normalization,
                });
            }
        }
    }
    out
}
