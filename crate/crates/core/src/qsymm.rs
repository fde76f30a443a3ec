//! q-symmetric multi-particle states.
//!
//! For a word `w = (i_1..i_N)` over letters `1..n` with letter counts
//! `n_k`, the state is
//!
//! ```text
//! |w>_q = sqrt([n_1]_{p^2}! .. [n_n]_{p^2}! / [N]_{p^2}!) * sum_terms q^A p^B |term>
//! ```
//!
//! where the term set, the `q`-statistic `A` and the scale at which the
//! `p`-statistic enters the normalization identity are fixed by a
//! [`Convention`]. [`resolve_convention`] tests all eight conventions against
//! the exchange rule, unit norm and the permutation-sum identity and reports
//! which survive.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qkernel::{q_bracket_exact, q_bracket_factorial, step_indicator, Real};

/// A word of 1-based letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::Argument("word letters are 1-based".into()));
        }
        Ok(Self(letters))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letter counts `n_1..n_m` with `m` the largest letter.
    pub fn profile(&self) -> Vec<u32> {
        let m = self.0.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0; m];
        for &l in &self.0 {
            counts[l - 1] += 1;
        }
        counts
    }

    pub fn sorted(&self) -> Word {
        let mut v = self.0.clone();
        v.sort_unstable();
        Word(v)
    }

    /// Swaps positions `k` and `k+1` (1-based).
    pub fn swapped(&self, k: usize) -> Result<Word> {
        if k == 0 || k >= self.len() {
            return Err(Error::Argument(format!(
                "transition index {k} outside 1..{} for a word of length {}",
                self.len(),
                self.len()
            )));
        }
        let mut v = self.0.clone();
        v.swap(k - 1, k);
        Ok(Word(v))
    }

    /// The sorted word with the given letter counts.
    pub fn from_profile(profile: &[u32]) -> Word {
        Word(
            profile
                .iter()
                .enumerate()
                .flat_map(|(k, &c)| std::iter::repeat_n(k + 1, c as usize))
                .collect(),
        )
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "|{}>", parts.join(","))
    }
}

/// `R(w)`: pairs `k < l` with `w_k > w_l`.
pub fn inversion_count(seq: &[usize]) -> u64 {
    let mut count = 0;
    for k in 0..seq.len() {
        for l in k + 1..seq.len() {
            count += u64::from(step_indicator(seq[k] as i64, seq[l] as i64));
        }
    }
    count
}

/// `epsilon(i, j)`: 1 if `i > j`, 0 if equal, -1 if `i < j`.
pub fn epsilon(i: usize, j: usize) -> i64 {
    (i as i64 - j as i64).signum()
}

/// Rearranges `seq` into the next lexicographic permutation; false at the last one.
fn next_permutation<T: Ord>(seq: &mut [T]) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let Some(i) = (0..seq.len() - 1).rev().find(|&i| seq[i] < seq[i + 1]) else {
        return false;
    };
    let j = (i + 1..seq.len())
        .rev()
        .find(|&j| seq[j] > seq[i])
        .expect("a successor exists");
    seq.swap(i, j);
    seq[i + 1..].reverse();
    true
}

/// Distinct rearrangements of `w`, lexicographic.
pub fn rearrangements(w: &Word) -> Vec<Word> {
    let mut cur = w.sorted().0;
    let mut out = vec![Word(cur.clone())];
    while next_permutation(&mut cur) {
        out.push(Word(cur.clone()));
    }
    out
}

/// All `N!` position permutations as 0-based index vectors.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    while next_permutation(&mut cur) {
        out.push(cur.clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PermSet {
    /// All `N!` position permutations, repeated words included.
    AllPermutations,
    /// Each distinct rearrangement once.
    DistinctRearrangements,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PhaseSource {
    /// `q^{R(input word)}` for every term.
    InputWordGlobal,
    /// `q^{R(term word)}` per term.
    PerTermWord,
}

/// One reading of the signature and of the normalization identity.
///
/// The amplitude of a term is always `p^B` with `B` the inversion count of
/// the permutation (all permutations) or of the rearranged word (distinct
/// rearrangements). `p_exponent_scale` selects how the identity
/// `sum p^{scale * B} = [N]_{p^2}! / prod [n_k]_{p^2}!` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Convention {
    pub perm_set: PermSet,
    pub p_exponent_scale: u8,
    pub q_phase_source: PhaseSource,
}

impl Convention {
    pub fn all() -> Vec<Convention> {
        let mut out = Vec::new();
        for perm_set in [PermSet::DistinctRearrangements, PermSet::AllPermutations] {
            for p_exponent_scale in [2, 1] {
                for q_phase_source in [PhaseSource::InputWordGlobal, PhaseSource::PerTermWord] {
                    out.push(Convention {
                        perm_set,
                        p_exponent_scale,
                        q_phase_source,
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = match self.perm_set {
            PermSet::AllPermutations => "allPermutations",
            PermSet::DistinctRearrangements => "distinctRearrangements",
        };
        let phase = match self.q_phase_source {
            PhaseSource::InputWordGlobal => "inputWordGlobal",
            PhaseSource::PerTermWord => "perTermWord",
        };
        write!(f, "{set}/scale{}/{phase}", self.p_exponent_scale)
    }
}

/// Integer Laurent polynomial in `q` and `p`: `(q exponent, p exponent) -> coefficient`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LaurentQP {
    pub terms: BTreeMap<(i64, i64), i64>,
}

impl LaurentQP {
    pub fn add_term(&mut self, q_power: i64, p_power: i64, c: i64) {
        let e = self.terms.entry((q_power, p_power)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(q_power, p_power));
        }
    }

    pub fn shift_q(&self, k: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), &c)| ((a + k, b), c))
                .collect(),
        }
    }

    pub fn eval(&self, p: f64, theta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(a, b), &c)| {
                Complex64::from_polar(1.0, a as f64 * theta) * (c as f64 * p.powi(b as i32))
            })
            .sum()
    }

    /// The single `q`-exponent and the `p`-polynomial, if only one `q` power occurs.
    fn split_single_phase(&self) -> Option<(i64, BTreeMap<i64, i64>)> {
        let qs: BTreeSet<i64> = self.terms.keys().map(|k| k.0).collect();
        if qs.len() != 1 {
            return None;
        }
        let q = *qs.iter().next()?;
        Some((q, self.terms.iter().map(|(&(_, b), &c)| (b, c)).collect()))
    }
}

/// `q^A p^B` attached to one term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub q_power: i64,
    pub p_power: i64,
}

/// A term of the defining sum.
#[derive(Debug, Clone, Copy)]
pub enum Term<'a> {
    /// Position permutation `sigma` (0-based), term word `input[sigma[k]]`.
    Permutation(&'a [usize]),
    /// A rearranged word.
    Rearrangement(&'a Word),
}

/// Signature of one term of the state built from `input`.
pub fn signature(input: &Word, term: Term<'_>, convention: &Convention) -> Signature {
    let (word, p_power) = match term {
        Term::Permutation(sigma) => {
            let w: Vec<usize> = sigma.iter().map(|&s| input.0[s]).collect();
            let stat = inversion_count(&sigma.iter().map(|s| s + 1).collect::<Vec<_>>());
            (w, stat)
        }
        Term::Rearrangement(w) => (w.0.clone(), inversion_count(&w.0)),
    };
    let q_power = match convention.q_phase_source {
        PhaseSource::InputWordGlobal => inversion_count(&input.0),
        PhaseSource::PerTermWord => inversion_count(&word),
    };
    Signature {
        q_power: q_power as i64,
        p_power: p_power as i64,
    }
}

/// A q-symmetric state with formal `q` and `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QSymState {
    pub input: Word,
    pub convention: Convention,
    /// Unnormalized amplitudes.
    pub amplitudes: BTreeMap<Word, LaurentQP>,
}

/// `[N]_x! / prod [n_k]_x!` evaluated in floating point.
pub fn multinomial_value(profile: &[u32], x: f64) -> Result<f64> {
    let n: u32 = profile.iter().sum();
    let mut v = q_bracket_factorial(n as i64, x)?;
    for &k in profile {
        v /= q_bracket_factorial(k as i64, x)?;
    }
    Ok(v)
}

fn multinomial_exact(profile: &[u32], x: &BigRational) -> BigRational {
    let fact = |n: u32| (1..=n).fold(BigRational::one(), |acc, k| acc * q_bracket_exact(k, x));
    let n: u32 = profile.iter().sum();
    profile.iter().fold(fact(n), |acc, &k| acc / fact(k))
}

impl QSymState {
    pub fn profile(&self) -> Vec<u32> {
        self.input.profile()
    }

    /// `sqrt(prod [n_k]_{p^2}! / [N]_{p^2}!)`.
    pub fn prefactor(&self, p: f64) -> Result<f64> {
        Ok(multinomial_value(&self.profile(), p * p)?.recip().sqrt())
    }

    pub fn value(&self, word: &Word, p: f64, theta: f64) -> Result<Complex64> {
        let amp = self
            .amplitudes
            .get(word)
            .map(|a| a.eval(p, theta))
            .unwrap_or_default();
        Ok(amp * self.prefactor(p)?)
    }

    pub fn norm_sqr(&self, p: f64, theta: f64) -> Result<f64> {
        let raw: f64 = self
            .amplitudes
            .values()
            .map(|a| a.eval(p, theta).norm_sqr())
            .sum();
        Ok(raw * self.prefactor(p)?.powi(2))
    }

    /// Exact norm at rational `p`; `q` drops out because every word carries
    /// a single power of `q`.
    pub fn exact_norm_sqr(&self, p: &BigRational) -> Result<BigRational> {
        let mut raw = BigRational::zero();
        for (w, amp) in &self.amplitudes {
            let (_, poly) = amp
                .split_single_phase()
                .ok_or_else(|| Error::Consistency(format!("amplitude of {w} mixes powers of q")))?;
            let v = poly.iter().fold(BigRational::zero(), |acc, (&b, &c)| {
                acc + BigRational::from_integer(BigInt::from(c)) * Real::powi(p, b)
            });
            raw += v.clone() * v;
        }
        Ok(raw / multinomial_exact(&self.profile(), &(p * p)))
    }

    pub fn scaled_q(&self, k: i64) -> BTreeMap<Word, LaurentQP> {
        self.amplitudes
            .iter()
            .map(|(w, a)| (w.clone(), a.shift_q(k)))
            .collect()
    }
}

/// Builds `|input>_q` under `convention`.
pub fn build_qsym_state(input: &Word, convention: Convention) -> QSymState {
    let mut amplitudes: BTreeMap<Word, LaurentQP> = BTreeMap::new();
    match convention.perm_set {
        PermSet::DistinctRearrangements => {
            for w in rearrangements(input) {
                let s = signature(input, Term::Rearrangement(&w), &convention);
                amplitudes
                    .entry(w)
                    .or_default()
                    .add_term(s.q_power, s.p_power, 1);
            }
        }
        PermSet::AllPermutations => {
            for sigma in permutations(input.len()) {
                let s = signature(input, Term::Permutation(&sigma), &convention);
                let w = Word(sigma.iter().map(|&k| input.0[k]).collect());
                amplitudes
                    .entry(w)
                    .or_default()
                    .add_term(s.q_power, s.p_power, 1);
            }
        }
    }
    amplitudes.retain(|_, a| !a.terms.is_empty());
    QSymState {
        input: input.clone(),
        convention,
        amplitudes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeReport {
    pub word: Word,
    pub k: usize,
    pub epsilon: i64,
    /// `|w> = q^{eps} |w'>` as Laurent polynomials.
    pub formal_equal: bool,
    /// Largest amplitude difference at the given `(p, theta)`.
    pub max_residual: f64,
    pub norm_before: f64,
    pub norm_after: f64,
    pub pass: bool,
}

/// Checks `|..i_k, i_{k+1}..>_q = q^{eps(i_k, i_{k+1})} |..i_{k+1}, i_k..>_q`.
pub fn exchange_check(
    input: &Word,
    k: usize,
    convention: Convention,
    p: f64,
    theta: f64,
) -> Result<ExchangeReport> {
    let swapped = input.swapped(k)?;
    let eps = epsilon(input.0[k - 1], input.0[k]);
    let a = build_qsym_state(input, convention);
    let b = build_qsym_state(&swapped, convention);
    let formal_equal = a.amplitudes == b.scaled_q(eps);
    let words: BTreeSet<&Word> = a.amplitudes.keys().chain(b.amplitudes.keys()).collect();
    let phase = Complex64::from_polar(1.0, eps as f64 * theta);
    let mut max_residual = 0.0_f64;
    for w in words {
        let d = a.value(w, p, theta)? - phase * b.value(w, p, theta)?;
        max_residual = max_residual.max(d.norm());
    }
    let norm_before = a.norm_sqr(p, theta)?.sqrt();
    let norm_after = b.norm_sqr(p, theta)?.sqrt();
    Ok(ExchangeReport {
        word: input.clone(),
        k,
        epsilon: eps,
        formal_equal,
        max_residual,
        norm_before,
        norm_after,
        pass: formal_equal && max_residual <= 1e-14,
    })
}

/// `P_{k,k+1}`: the state built from the input word with positions `k`, `k+1`
/// swapped. It is its own inverse on input words, so it also realizes
/// `P_{k+1,k}`.
pub fn transition_apply(k: usize, state: &QSymState) -> Result<QSymState> {
    Ok(build_qsym_state(&state.input.swapped(k)?, state.convention))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SortReport {
    pub input: Word,
    pub steps: Vec<usize>,
    /// Sum of the `-epsilon` phases of every transition applied.
    pub accumulated_q_power: i64,
    /// `-R(input)`.
    pub expected_q_power: i64,
    /// The sorted state equals `q^{accumulated} |input>_q` formally.
    pub formal_match: bool,
    pub pass: bool,
}

/// Bubble-sorts the input word with transition operators.
pub fn sort_to_fundamental(input: &Word, convention: Convention) -> Result<SortReport> {
    let start = build_qsym_state(input, convention);
    let mut state = start.clone();
    let mut steps = Vec::new();
    let mut acc = 0;
    loop {
        let w = &state.input.0;
        let Some(k) = (1..w.len()).find(|&k| w[k - 1] > w[k]) else {
            break;
        };
        acc -= epsilon(w[k - 1], w[k]);
        state = transition_apply(k, &state)?;
        steps.push(k);
    }
    let expected = -(inversion_count(&input.0) as i64);
    let formal_match = state.amplitudes == start.scaled_q(acc);
    Ok(SortReport {
        input: input.clone(),
        steps,
        accumulated_q_power: acc,
        expected_q_power: expected,
        formal_match,
        pass: formal_match && acc == expected,
    })
}

/// Integer polynomial `exponent -> coefficient`.
pub type Poly = BTreeMap<i64, i64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&i, &x) in a {
        for (&j, &y) in b {
            *out.entry(i + j).or_insert(0) += x * y;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Gaussian binomial `[n choose k]_x` by the Pascal recurrence
/// `[n, k] = [n-1, k-1] + x^k [n-1, k]`, in the variable `x = p^{step}`.
fn gaussian_binomial(n: u32, k: u32, step: i64) -> Poly {
    let mut row: Vec<Poly> = vec![Poly::from([(0, 1)])];
    for m in 1..=n {
        let mut next = vec![Poly::new(); m as usize + 1];
        for j in 0..=m as usize {
            let mut p = Poly::new();
            if j >= 1 {
                for (&e, &c) in &row[j - 1] {
                    *p.entry(e).or_insert(0) += c;
                }
            }
            if j < row.len() {
                for (&e, &c) in &row[j] {
                    *p.entry(e + step * j as i64).or_insert(0) += c;
                }
            }
            next[j] = p;
        }
        row = next;
    }
    row[k as usize].clone()
}

/// `[N]_{p^2}! / prod [n_k]_{p^2}!` as a polynomial in `p`.
pub fn gaussian_multinomial(profile: &[u32]) -> Poly {
    let mut total = 0;
    let mut out = Poly::from([(0, 1)]);
    for &k in profile {
        total += k;
        out = poly_mul(&out, &gaussian_binomial(total, k, 2));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub profile: Vec<u32>,
    pub convention: Convention,
    /// `sum p^{scale * B}` over the term set.
    pub lhs: Poly,
    pub rhs: Poly,
    pub exact_equal: bool,
    pub lhs_value: f64,
    pub rhs_value: f64,
    pub pass: bool,
}

/// Permutation-sum identity for one letter profile.
pub fn multinomial_identity_check(
    profile: &[u32],
    p: f64,
    convention: Convention,
) -> Result<IdentityReport> {
    let word = Word::from_profile(profile);
    let scale = i64::from(convention.p_exponent_scale);
    let mut lhs = Poly::new();
    match convention.perm_set {
        PermSet::DistinctRearrangements => {
            for w in rearrangements(&word) {
                *lhs.entry(scale * inversion_count(&w.0) as i64).or_insert(0) += 1;
            }
        }
        PermSet::AllPermutations => {
            for sigma in permutations(word.len()) {
                let s = signature(&word, Term::Permutation(&sigma), &convention);
                *lhs.entry(scale * s.p_power).or_insert(0) += 1;
            }
        }
    }
    let rhs = gaussian_multinomial(profile);
    let lhs_value: f64 = lhs.iter().map(|(&e, &c)| c as f64 * p.powi(e as i32)).sum();
    let rhs_value = multinomial_value(profile, p * p)?;
    let exact_equal = lhs == rhs;
    Ok(IdentityReport {
        profile: profile.to_vec(),
        convention,
        lhs,
        rhs,
        exact_equal,
        lhs_value,
        rhs_value,
        pass: exact_equal,
    })
}

/// All words of length `1..=max_len` over letters `1..=alphabet`.
pub fn probe_words(max_len: usize, alphabet: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .into_iter()
            .flat_map(|w: Vec<usize>| {
                (1..=alphabet).map(move |l| {
                    let mut v = w.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned().map(Word));
    }
    out
}

/// Every letter profile with total `1..=max_total` and no zero count.
pub fn probe_profiles(max_total: u32) -> Vec<Vec<u32>> {
    fn compositions(n: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=n {
            for mut rest in compositions(n - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    (1..=max_total).flat_map(compositions).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Requirement {
    Exchange,
    UnitNorm,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub requirement: Requirement,
    pub word: Word,
    pub p: f64,
    pub theta: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionEvidence {
    pub convention: Convention,
    pub pass: bool,
    pub probes: usize,
    pub failures: BTreeMap<String, usize>,
    /// The first few counterexamples per requirement.
    pub counterexamples: Vec<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionReport {
    pub max_len: usize,
    pub alphabet: usize,
    pub grid: Vec<(f64, f64)>,
    pub satisfying: Vec<Convention>,
    pub chosen: Option<Convention>,
    pub evidence: Vec<ConventionEvidence>,
}

/// Grid used when none is given: `p in {0.3, 0.7, 1.5}`, `theta in {0, pi/7}`.
pub fn default_grid() -> Vec<(f64, f64)> {
    let mut g = Vec::new();
    for p in [0.3, 0.7, 1.5] {
        for theta in [0.0, std::f64::consts::PI / 7.0] {
            g.push((p, theta));
        }
    }
    g
}

const KEPT_COUNTEREXAMPLES: usize = 4;

fn record(ev: &mut ConventionEvidence, c: Counterexample) {
    let key = format!("{:?}", c.requirement);
    let n = ev.failures.entry(key).or_insert(0);
    *n += 1;
    if *n <= KEPT_COUNTEREXAMPLES {
        ev.counterexamples.push(c);
    }
    ev.pass = false;
}

/// Tests every convention on every probe word and grid point.
pub fn resolve_convention(
    max_len: usize,
    alphabet: usize,
    grid: &[(f64, f64)],
) -> Result<ResolutionReport> {
    if max_len == 0 || alphabet == 0 || grid.is_empty() {
        return Err(Error::Argument(
            "resolution needs nonempty probe bounds and grid".into(),
        ));
    }
    let words = probe_words(max_len, alphabet);
    let mut evidence = Vec::new();
    for convention in Convention::all() {
        let mut ev = ConventionEvidence {
            convention,
            pass: true,
            probes: 0,
            failures: BTreeMap::new(),
            counterexamples: Vec::new(),
        };
        let mut profiles_seen = BTreeSet::new();
        for w in &words {
            let state = build_qsym_state(w, convention);
            for &(p, theta) in grid {
                ev.probes += 1;
                let norm = state.norm_sqr(p, theta)?;
                if (norm - 1.0).abs() > 1e-12 {
                    record(
                        &mut ev,
                        Counterexample {
                            requirement: Requirement::UnitNorm,
                            word: w.clone(),
                            p,
                            theta,
                            detail: format!("norm^2 = {norm}"),
                        },
                    );
                }
            }
            for k in 1..w.len() {
                ev.probes += 1;
                let (p, theta) = grid[grid.len() - 1];
                let r = exchange_check(w, k, convention, p, theta)?;
                if !r.formal_equal {
                    let worst = grid
                        .iter()
                        .map(|&(p, t)| {
                            exchange_check(w, k, convention, p, t).map(|r| (r.max_residual, p, t))
                        })
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .fold((0.0, p, theta), |a, b| if b.0 > a.0 { b } else { a });
                    record(
                        &mut ev,
                        Counterexample {
                            requirement: Requirement::Exchange,
                            word: w.clone(),
                            p: worst.1,
                            theta: worst.2,
                            detail: format!("swap at {k}: amplitude residual {:.3e}", worst.0),
                        },
                    );
                }
            }
            let mut profile = w.sorted().profile();
            profile.retain(|&c| c > 0);
            if profiles_seen.insert(profile.clone()) {
                for &(p, theta) in grid {
                    ev.probes += 1;
                    let r = multinomial_identity_check(&profile, p, convention)?;
                    if !r.pass {
                        record(
                            &mut ev,
                            Counterexample {
                                requirement: Requirement::Identity,
                                word: Word::from_profile(&profile),
                                p,
                                theta,
                                detail: format!("lhs = {} vs rhs = {}", r.lhs_value, r.rhs_value),
                            },
                        );
                    }
                }
            }
        }
        evidence.push(ev);
    }
    let satisfying: Vec<Convention> = evidence
        .iter()
        .filter(|e| e.pass)
        .map(|e| e.convention)
        .collect();
    Ok(ResolutionReport {
        max_len,
        alphabet,
        grid: grid.to_vec(),
        chosen: satisfying.first().copied(),
        satisfying,
        evidence,
    })
}

impl ResolutionReport {
    /// The chosen convention, or a configuration error carrying the evidence.
    pub fn require(&self) -> Result<Convention> {
        self.chosen.ok_or_else(|| {
            Error::Configuration(format!(
                "no convention satisfies exchange, unit norm and identity: {}",
                serde_json::to_string(&self.evidence).unwrap_or_default()
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RESOLVED: Convention = Convention {
        perm_set: PermSet::DistinctRearrangements,
        p_exponent_scale: 2,
        q_phase_source: PhaseSource::InputWordGlobal,
    };

    fn w(v: &[usize]) -> Word {
        Word(v.to_vec())
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(inversion_count(&[1, 2, 3]), 0);
        assert_eq!(inversion_count(&[3, 1, 2]), 2);
        assert_eq!(inversion_count(&[2, 1, 1]), 2);
    }

    #[test]
    fn signature_examples() {
        let s = signature(&w(&[1, 2, 3]), Term::Permutation(&[0, 1, 2]), &RESOLVED);
        assert_eq!(
            s,
            Signature {
                q_power: 0,
                p_power: 0
            }
        );
        let s = signature(&w(&[1, 2]), Term::Rearrangement(&w(&[2, 1])), &RESOLVED);
        assert_eq!(s.p_power, 1);
        let s = signature(&w(&[2, 1]), Term::Rearrangement(&w(&[1, 2])), &RESOLVED);
        assert_eq!(s.q_power, 1);
    }

    #[test]
    fn counting_enumerations() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(rearrangements(&w(&[1, 1, 2, 2])).len(), 6);
        assert_eq!(rearrangements(&w(&[3, 1, 2])).len(), 6);
    }

    #[test]
    fn two_letter_state() {
        let p: f64 = 0.7;
        let s = build_qsym_state(&w(&[1, 2]), RESOLVED);
        let norm = (1.0 + p * p).sqrt();
        assert!((s.value(&w(&[1, 2]), p, 0.3).unwrap() - 1.0 / norm).norm() < 1e-15);
        assert!((s.value(&w(&[2, 1]), p, 0.3).unwrap() - p / norm).norm() < 1e-15);
        let s = build_qsym_state(&w(&[1, 1]), RESOLVED);
        assert_eq!(s.amplitudes.len(), 1);
        assert!((s.value(&w(&[1, 1]), p, 0.3).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn classical_symmetrizer() {
        let s = build_qsym_state(&w(&[1, 2]), RESOLVED);
        for word in [w(&[1, 2]), w(&[2, 1])] {
            assert!((s.value(&word, 1.0, 0.0).unwrap() - 0.5_f64.sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_example() {
        let r = exchange_check(&w(&[2, 1]), 1, RESOLVED, 0.7, 0.4).unwrap();
        assert_eq!(r.epsilon, 1);
        assert!(r.pass);
        assert!((r.norm_before - 1.0).abs() < 1e-14 && (r.norm_after - 1.0).abs() < 1e-14);
        assert!(
            exchange_check(&w(&[1, 1]), 1, RESOLVED, 0.7, 0.4)
                .unwrap()
                .pass
        );
        // The opposite phase is not a valid reading.
        let a = build_qsym_state(&w(&[2, 1]), RESOLVED);
        let b = build_qsym_state(&w(&[1, 2]), RESOLVED);
        assert_ne!(a.amplitudes, b.scaled_q(-1));
    }

    #[test]
    fn transition_range() {
        let s = build_qsym_state(&w(&[1, 2]), RESOLVED);
        assert!(transition_apply(2, &s).is_err());
        assert!(transition_apply(0, &s).is_err());
    }

    #[test]
    fn identity_examples() {
        let r = multinomial_identity_check(&[1, 1], 0.7, RESOLVED).unwrap();
        assert_eq!(r.lhs, Poly::from([(0, 1), (2, 1)]));
        assert!(r.pass);
        let r = multinomial_identity_check(&[2, 1], 0.7, RESOLVED).unwrap();
        assert_eq!(r.lhs, Poly::from([(0, 1), (2, 1), (4, 1)]));
        assert!(r.pass && (r.lhs_value - r.rhs_value).abs() < 1e-14);
        assert!(
            multinomial_identity_check(&[4], 0.7, RESOLVED)
                .unwrap()
                .pass
        );
        let literal = Convention {
            p_exponent_scale: 1,
            ..RESOLVED
        };
        assert!(
            !multinomial_identity_check(&[1, 1], 0.7, literal)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn gaussian_binomial_small() {
        // [4 choose 2]_x = 1 + x + 2x^2 + x^3 + x^4 with x = p^2.
        assert_eq!(
            gaussian_binomial(4, 2, 2),
            Poly::from([(0, 1), (2, 1), (4, 2), (6, 1), (8, 1)])
        );
    }

    #[test]
    fn exact_norm_is_one() {
        let p = crate::qkernel::rational_from_decimal("0.7").unwrap();
        for word in [w(&[1, 2]), w(&[2, 1, 1, 3]), w(&[3, 3, 1])] {
            assert_eq!(
                build_qsym_state(&word, RESOLVED)
                    .exact_norm_sqr(&p)
                    .unwrap(),
                BigRational::one()
            );
        }
    }

    proptest! {
        #[test]
        fn exchange_and_inverse(letters in prop::collection::vec(1usize..=4, 2..=6), k_seed in 0usize..100) {
            let word = Word(letters);
            let k = 1 + k_seed % (word.len() - 1);
            let r = exchange_check(&word, k, RESOLVED, 0.3, std::f64::consts::PI / 7.0).unwrap();
            prop_assert!(r.pass);
            let s = build_qsym_state(&word, RESOLVED);
            let back = transition_apply(k, &transition_apply(k, &s).unwrap()).unwrap();
            prop_assert_eq!(back, s);
        }

        #[test]
        fn sorting_phase(letters in prop::collection::vec(1usize..=4, 1..=6)) {
            let r = sort_to_fundamental(&Word(letters), RESOLVED).unwrap();
            prop_assert!(r.pass, "{:?}", r);
        }

        #[test]
        fn identity_matches_float(profile in prop::collection::vec(1u32..=3, 1..=3), p in 0.1f64..2.0) {
            let r = multinomial_identity_check(&profile, p, RESOLVED).unwrap();
            prop_assert!(r.pass);
            prop_assert!((r.lhs_value - r.rhs_value).abs() <= 1e-12 * r.rhs_value);
        }
    }

    #[test]
    fn resolution_picks_expected_convention() {
        let report = resolve_convention(4, 3, &default_grid()).unwrap();
        assert_eq!(report.satisfying, vec![RESOLVED]);
        for ev in report.evidence.iter().filter(|e| !e.pass) {
            assert!(!ev.counterexamples.is_empty());
        }
        let find = |c: Convention| report.evidence.iter().find(|e| e.convention == c).unwrap();
        let per_term = find(Convention {
            q_phase_source: PhaseSource::PerTermWord,
            ..RESOLVED
        });
        assert!(per_term
            .counterexamples
            .iter()
            .any(|c| c.requirement == Requirement::Exchange && c.word.len() == 2));
        let all = find(Convention {
            perm_set: PermSet::AllPermutations,
            ..RESOLVED
        });
        assert!(all
            .counterexamples
            .iter()
            .any(|c| c.requirement == Requirement::UnitNorm && c.word == w(&[1, 1])));
        let literal = find(Convention {
            p_exponent_scale: 1,
            ..RESOLVED
        });
        assert!(literal
            .counterexamples
            .iter()
            .any(|c| c.requirement == Requirement::Identity));
    }
}
