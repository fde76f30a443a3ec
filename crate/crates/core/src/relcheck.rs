//! Word evaluation and relation verification.
//!
//! A [`RelationExpr`] is a linear combination of generator words, claimed to
//! equal `c * Id`. [`check_relation`] evaluates it on every basis state of a
//! domain where no creation can cross a cutoff and reports the largest
//! residual norm. The suites instantiate the oscillator relations, their
//! adjoint consequences, the subhamiltonian relations, the deformed `gl(n)`
//! relations for `E_ij = a+_i a_j`, and the undeformed limits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::{Backend, ExactBackend, FloatBackend};
use crate::error::{Error, Result};
use crate::fockspace::{occupations_within, FockSpace, FockVector, ModeConfig, Occupation};
use crate::qkernel::{step_indicator, DeformationParams};

/// One generator. Mode indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorToken {
    A(usize),
    Adag(usize),
    Num(usize),
    Ham(usize),
    /// `E_ij = a+_i a_j`.
    E(usize, usize),
}

impl GeneratorToken {
    fn indices(&self) -> Vec<usize> {
        match *self {
            Self::A(i) | Self::Adag(i) | Self::Num(i) | Self::Ham(i) => vec![i],
            Self::E(i, j) => vec![i, j],
        }
    }

    /// Number of creation operators the token applies.
    pub fn creation_depth(&self) -> u32 {
        match self {
            Self::Adag(_) | Self::E(..) => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for GeneratorToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::A(i) => write!(f, "a_{i}"),
            Self::Adag(i) => write!(f, "a+_{i}"),
            Self::Num(i) => write!(f, "N_{i}"),
            Self::Ham(i) => write!(f, "H_{i}"),
            Self::E(i, j) => write!(f, "E_{i}{j}"),
        }
    }
}

/// `integer * p^p_power * nu^nu_power * q^q_power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Coefficient {
    pub integer: i64,
    pub p_power: i64,
    pub nu_power: i64,
    pub q_power: i64,
}

impl Coefficient {
    pub const ONE: Coefficient = Coefficient {
        integer: 1,
        p_power: 0,
        nu_power: 0,
        q_power: 0,
    };

    pub fn int(k: i64) -> Self {
        Self {
            integer: k,
            ..Self::ONE
        }
    }

    pub fn q(k: i64) -> Self {
        Self {
            q_power: k,
            ..Self::ONE
        }
    }

    pub fn p(k: i64) -> Self {
        Self {
            p_power: k,
            ..Self::ONE
        }
    }

    pub fn nu() -> Self {
        Self {
            nu_power: 1,
            ..Self::ONE
        }
    }

    pub fn realize<B: Backend>(&self, backend: &B) -> Result<B::Value> {
        let mut v = backend.mul(
            &backend.integer(self.integer),
            &backend.p_power(self.p_power),
        );
        v = backend.mul(&v, &backend.phase(self.q_power));
        if self.nu_power != 0 {
            let nu = backend.nu()?;
            for _ in 0..self.nu_power.unsigned_abs() {
                v = backend.mul(&v, &nu);
            }
            if self.nu_power < 0 {
                return Err(Error::Argument(
                    "negative powers of nu are not supported".into(),
                ));
            }
        }
        Ok(v)
    }
}

impl std::ops::Neg for Coefficient {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            integer: -self.integer,
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationTerm {
    pub coefficient: Coefficient,
    pub word: Vec<GeneratorToken>,
}

/// Which basis states a relation is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainPolicy {
    /// Occupations at distance at least `L` from every cutoff, `L` being the
    /// largest creation depth of any word.
    Interior,
    /// All occupations with total number at most `max_total`. Only valid
    /// when every word conserves the total number along its evaluation.
    Sectors { max_total: u32 },
}

/// `sum_t c_t w_t = constant * Id`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationExpr {
    pub label: String,
    /// Human-readable statement of the relation.
    pub source: String,
    pub terms: Vec<RelationTerm>,
    pub constant: Option<Coefficient>,
    pub domain: DomainPolicy,
}

impl RelationExpr {
    pub fn new(label: impl Into<String>, source: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            source: source.into(),
            terms: Vec::new(),
            constant: None,
            domain: DomainPolicy::Interior,
        }
    }

    pub fn term(mut self, coefficient: Coefficient, word: Vec<GeneratorToken>) -> Self {
        self.terms.push(RelationTerm { coefficient, word });
        self
    }

    pub fn equals(mut self, constant: Coefficient) -> Self {
        self.constant = Some(constant);
        self
    }

    pub fn in_sectors(mut self, max_total: u32) -> Self {
        self.domain = DomainPolicy::Sectors { max_total };
        self
    }

    pub fn creation_depth(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.word.iter().map(GeneratorToken::creation_depth).sum())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSet {
    pub p: f64,
    pub theta: f64,
    pub n_modes: usize,
    pub cutoffs: Vec<u32>,
}

impl ParameterSet {
    fn of(config: &ModeConfig) -> Self {
        Self {
            p: config.params.p,
            theta: config.params.theta,
            n_modes: config.n_modes,
            cutoffs: config.cutoff.clone(),
        }
    }
}

/// Outcome of checking one relation instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub label: String,
    pub source: String,
    pub params: ParameterSet,
    pub domain_size: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Exact arithmetic: pass means the residual is formally zero.
    pub exact: bool,
    pub pass: bool,
    pub skipped: bool,
}

impl VerificationReport {
    fn skipped(label: &str, source: &str, config: &ModeConfig) -> Self {
        Self {
            label: label.into(),
            source: source.into(),
            params: ParameterSet::of(config),
            domain_size: 0,
            max_residual: 0.0,
            tolerance: 0.0,
            exact: false,
            pass: true,
            skipped: true,
        }
    }
}

/// Applies `word` to `state`, rightmost token first.
pub fn evaluate_word<B: Backend>(
    space: &FockSpace<B>,
    word: &[GeneratorToken],
    state: &FockVector<B::Value>,
) -> Result<FockVector<B::Value>> {
    for token in word {
        for i in token.indices() {
            space.check_mode(i)?;
        }
    }
    let mut v = state.clone();
    for token in word.iter().rev() {
        v = match *token {
            GeneratorToken::A(i) => space.apply_annihilation(i, &v),
            GeneratorToken::Adag(i) => space.apply_creation(i, &v),
            GeneratorToken::Num(i) => space.apply_number(i, &v),
            GeneratorToken::Ham(i) => space.apply_subhamiltonian(i, &v)?,
            GeneratorToken::E(i, j) => space.apply_creation(i, &space.apply_annihilation(j, &v)),
        };
    }
    Ok(v)
}

fn domain_for<B: Backend>(space: &FockSpace<B>, rel: &RelationExpr) -> Result<Vec<Occupation>> {
    let config = space.config();
    let states = match rel.domain {
        DomainPolicy::Interior => {
            let depth = rel.creation_depth();
            if config.cutoff.iter().any(|&c| c < depth) {
                Vec::new()
            } else {
                let bounds: Vec<u32> = config.cutoff.iter().map(|&c| c - depth).collect();
                occupations_within(&bounds)
            }
        }
        DomainPolicy::Sectors { max_total } => {
            let min_cutoff = config.cutoff.iter().copied().min().unwrap_or(0);
            if max_total > min_cutoff {
                return Err(Error::Configuration(format!(
                    "{}: sector N <= {max_total} does not fit under cutoff {min_cutoff}",
                    rel.label
                )));
            }
            config
                .occupations()
                .into_iter()
                .filter(|o| o.total() <= max_total)
                .collect()
        }
    };
    if states.is_empty() {
        return Err(Error::Configuration(format!(
            "{}: empty interior domain, increase the cutoff above {}",
            rel.label,
            rel.creation_depth()
        )));
    }
    Ok(states)
}

/// `(sum_t c_t w_t - c) v`.
pub fn relation_residual<B: Backend>(
    space: &FockSpace<B>,
    rel: &RelationExpr,
    state: &FockVector<B::Value>,
) -> Result<FockVector<B::Value>> {
    let backend = space.backend();
    let mut acc = space.zero_vector();
    for term in &rel.terms {
        let image = evaluate_word(space, &term.word, state)?;
        acc = space.add(
            &acc,
            &space.scale(&term.coefficient.realize(backend)?, &image),
        );
    }
    if let Some(c) = rel.constant {
        acc = space.sub(&acc, &space.scale(&c.realize(backend)?, state));
    }
    Ok(acc)
}

/// Checks `rel` on its whole domain.
pub fn check_relation<B: Backend>(
    space: &FockSpace<B>,
    rel: &RelationExpr,
    tolerance: f64,
) -> Result<VerificationReport> {
    let domain = domain_for(space, rel)?;
    let mut max_residual = 0.0_f64;
    let mut formally_zero = true;
    for occ in &domain {
        let residual = relation_residual(space, rel, &space.basis_state(occ)?)?;
        if residual.overflow() {
            return Err(Error::Consistency(format!(
                "{}: evaluation on {occ} crossed a cutoff inside its domain",
                rel.label
            )));
        }
        formally_zero &= residual.is_zero();
        max_residual = max_residual.max(space.norm(&residual));
    }
    let pass = if B::EXACT {
        formally_zero
    } else {
        max_residual <= tolerance
    };
    Ok(VerificationReport {
        label: rel.label.clone(),
        source: rel.source.clone(),
        params: ParameterSet::of(space.config()),
        domain_size: domain.len(),
        max_residual,
        tolerance,
        exact: B::EXACT,
        pass,
        skipped: false,
    })
}

/// Named relation suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oscillator,
    Number,
    Subhamiltonian,
    Gl,
    Hermiticity,
    Classical,
    All,
}

impl Suite {
    pub const ALL_NAMES: [&'static str; 7] = [
        "oscillator",
        "number",
        "subhamiltonian",
        "gl",
        "hermiticity",
        "classical",
        "all",
    ];
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "oscillator" => Self::Oscillator,
            "number" => Self::Number,
            "subhamiltonian" => Self::Subhamiltonian,
            "gl" => Self::Gl,
            "hermiticity" => Self::Hermiticity,
            "classical" => Self::Classical,
            "all" => Self::All,
            other => return Err(Error::UnknownSuite(other.into())),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Oscillator => "oscillator",
            Self::Number => "number",
            Self::Subhamiltonian => "subhamiltonian",
            Self::Gl => "gl",
            Self::Hermiticity => "hermiticity",
            Self::Classical => "classical",
            Self::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Float,
    Exact,
}

use GeneratorToken::{Adag, Ham, Num, A, E};

fn delta(i: usize, j: usize) -> i64 {
    i64::from(i == j)
}

/// The oscillator relations, their adjoint consequences, and the
/// number-operator relations.
pub fn oscillator_relations(n: usize, p_is_one: bool) -> Vec<RelationExpr> {
    let one = Coefficient::ONE;
    let mut out = Vec::new();
    for i in 1..=n {
        out.push(
            RelationExpr::new(
                format!("osc.p_commutator[{i}]"),
                format!("a_{i} a+_{i} - p a+_{i} a_{i} = 1"),
            )
            .term(one, vec![A(i), Adag(i)])
            .term(-Coefficient::p(1), vec![Adag(i), A(i)])
            .equals(one),
        );
        out.push(if p_is_one {
            RelationExpr::new(format!("osc.bracket[{i}]"), format!("a+_{i} a_{i} = N_{i}"))
                .term(one, vec![Adag(i), A(i)])
                .term(-one, vec![Num(i)])
        } else {
            RelationExpr::new(
                format!("osc.bracket[{i}]"),
                format!("a+_{i} a_{i} = [N_{i}] = H_{i} + nu"),
            )
            .term(one, vec![Adag(i), A(i)])
            .term(-one, vec![Ham(i)])
            .equals(Coefficient::nu())
        });
        for j in 1..=n {
            let d = delta(i, j);
            out.push(
                RelationExpr::new(
                    format!("osc.number_a[{i},{j}]"),
                    format!("[N_{i}, a_{j}] = -delta_{i}{j} a_{j}"),
                )
                .term(one, vec![Num(i), A(j)])
                .term(-one, vec![A(j), Num(i)])
                .term(Coefficient::int(d), vec![A(j)]),
            );
            out.push(
                RelationExpr::new(
                    format!("osc.number_adag[{i},{j}]"),
                    format!("[N_{i}, a+_{j}] = delta_{i}{j} a+_{j}"),
                )
                .term(one, vec![Num(i), Adag(j)])
                .term(-one, vec![Adag(j), Num(i)])
                .term(Coefficient::int(-d), vec![Adag(j)]),
            );
            if i < j {
                out.push(
                    RelationExpr::new(
                        format!("osc.a_adag[{i},{j}]"),
                        format!("a_{i} a+_{j} = q a+_{j} a_{i}"),
                    )
                    .term(one, vec![A(i), Adag(j)])
                    .term(-Coefficient::q(1), vec![Adag(j), A(i)]),
                );
                out.push(
                    RelationExpr::new(
                        format!("osc.a_a[{i},{j}]"),
                        format!("a_{i} a_{j} = q^-1 a_{j} a_{i}"),
                    )
                    .term(one, vec![A(i), A(j)])
                    .term(-Coefficient::q(-1), vec![A(j), A(i)]),
                );
                out.push(
                    RelationExpr::new(
                        format!("osc.adjoint.a_adag[{j},{i}]"),
                        format!("a_{j} a+_{i} = q^-1 a+_{i} a_{j}"),
                    )
                    .term(one, vec![A(j), Adag(i)])
                    .term(-Coefficient::q(-1), vec![Adag(i), A(j)]),
                );
                out.push(
                    RelationExpr::new(
                        format!("osc.adjoint.adag_adag[{j},{i}]"),
                        format!("a+_{j} a+_{i} = q a+_{i} a+_{j}"),
                    )
                    .term(one, vec![Adag(j), Adag(i)])
                    .term(-Coefficient::q(1), vec![Adag(i), Adag(j)]),
                );
            }
        }
    }
    out
}

/// `H_i a+_j = (delta_ij (p-1) + 1) a+_j H_i`, its adjoint, and `[H_i, H_j] = 0`.
pub fn subhamiltonian_relations(n: usize) -> Vec<RelationExpr> {
    let one = Coefficient::ONE;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let factor = if i == j { Coefficient::p(1) } else { one };
            out.push(
                RelationExpr::new(
                    format!("sub.h_adag[{i},{j}]"),
                    format!("H_{i} a+_{j} = (delta_{i}{j} (p-1) + 1) a+_{j} H_{i}"),
                )
                .term(one, vec![Ham(i), Adag(j)])
                .term(-factor, vec![Adag(j), Ham(i)]),
            );
            out.push(
                RelationExpr::new(
                    format!("sub.a_h[{j},{i}]"),
                    format!("a_{j} H_{i} = (delta_{i}{j} (p-1) + 1) H_{i} a_{j}"),
                )
                .term(one, vec![A(j), Ham(i)])
                .term(-factor, vec![Ham(i), A(j)]),
            );
            if i < j {
                out.push(
                    RelationExpr::new(format!("sub.h_h[{i},{j}]"), format!("[H_{i}, H_{j}] = 0"))
                        .term(one, vec![Ham(i), Ham(j)])
                        .term(-one, vec![Ham(j), Ham(i)]),
                );
            }
        }
    }
    out
}

/// `q`-exponent `e` in `E_ij E_ik = q^e E_ik E_ij` for distinct `i, j, k`.
///
/// This is `-1` for `j < k` and `+1` for `j > k` when `i` lies outside the
/// interval spanned by `j` and `k`. When `i` lies strictly between them the
/// oscillator relations give the opposite sign.
pub fn three_index_exponent(i: usize, j: usize, k: usize) -> i64 {
    let base = if j < k { -1 } else { 1 };
    let between = (j.min(k) < i) && (i < j.max(k));
    if between {
        -base
    } else {
        base
    }
}

/// `q`-exponent of the four-index relation `E_ij E_kl = q^{2(...)} E_kl E_ij`.
pub fn four_index_exponent(i: usize, j: usize, k: usize, l: usize) -> i64 {
    let r = |a: usize, b: usize| i64::from(step_indicator(a as i64, b as i64));
    2 * (r(i, k) + r(j, l) - r(j, k) - r(i, l))
}

fn all_distinct(idx: &[usize]) -> bool {
    idx.iter()
        .enumerate()
        .all(|(a, x)| idx[a + 1..].iter().all(|y| x != y))
}

/// Deformed `gl(n)` relations, checked sector by sector up to `max_total`.
/// The four-index family is returned separately since it needs `n >= 4`.
pub fn gl_relations(n: usize, max_total: u32) -> Vec<RelationExpr> {
    let one = Coefficient::ONE;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i < j {
                out.push(
                    RelationExpr::new(
                        format!("gl.Eii_Ejj[{i},{j}]"),
                        format!("[E_{i}{i}, E_{j}{j}] = 0"),
                    )
                    .term(one, vec![E(i, i), E(j, j)])
                    .term(-one, vec![E(j, j), E(i, i)]),
                );
            }
            if i != j {
                out.push(
                    RelationExpr::new(
                        format!("gl.Eij_Eji[{i},{j}]"),
                        format!("[E_{i}{j}, E_{j}{i}] = E_{i}{i} - E_{j}{j}"),
                    )
                    .term(one, vec![E(i, j), E(j, i)])
                    .term(-one, vec![E(j, i), E(i, j)])
                    .term(-one, vec![E(i, i)])
                    .term(one, vec![E(j, j)]),
                );
                out.push(
                    RelationExpr::new(
                        format!("gl.Eii_Eij[{i},{j}]"),
                        format!("E_{i}{i} E_{i}{j} - p E_{i}{j} E_{i}{i} = E_{i}{j}"),
                    )
                    .term(one, vec![E(i, i), E(i, j)])
                    .term(-Coefficient::p(1), vec![E(i, j), E(i, i)])
                    .term(-one, vec![E(i, j)]),
                );
            }
            for k in 1..=n {
                if !all_distinct(&[i, j, k]) {
                    continue;
                }
                out.push(
                    RelationExpr::new(
                        format!("gl.Eii_Ejk[{i},{j},{k}]"),
                        format!("[E_{i}{i}, E_{j}{k}] = 0"),
                    )
                    .term(one, vec![E(i, i), E(j, k)])
                    .term(-one, vec![E(j, k), E(i, i)]),
                );
                let phase = three_index_exponent(i, j, k);
                out.push(
                    RelationExpr::new(
                        format!("gl.Eij_Eik[{i},{j},{k}]"),
                        format!("E_{i}{j} E_{i}{k} = q^({phase}) E_{i}{k} E_{i}{j}"),
                    )
                    .term(one, vec![E(i, j), E(i, k)])
                    .term(-Coefficient::q(phase), vec![E(i, k), E(i, j)]),
                );
            }
        }
    }
    out.extend(gl_four_index_relations(n, max_total));
    out.into_iter().map(|r| r.in_sectors(max_total)).collect()
}

pub fn gl_four_index_relations(n: usize, max_total: u32) -> Vec<RelationExpr> {
    let one = Coefficient::ONE;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                for l in 1..=n {
                    if !all_distinct(&[i, j, k, l]) {
                        continue;
                    }
                    let e = four_index_exponent(i, j, k, l);
                    out.push(
                        RelationExpr::new(
                            format!("gl.Eij_Ekl[{i},{j},{k},{l}]"),
                            format!("E_{i}{j} E_{k}{l} = q^({e}) E_{k}{l} E_{i}{j}"),
                        )
                        .term(one, vec![E(i, j), E(k, l)])
                        .term(-Coefficient::q(e), vec![E(k, l), E(i, j)])
                        .in_sectors(max_total),
                    );
                }
            }
        }
    }
    out
}

/// Undeformed boson and `gl(n)` relations, valid at `p = q = 1`.
pub fn classical_relations(n: usize, max_total: u32) -> Vec<RelationExpr> {
    let one = Coefficient::ONE;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let mut rel = RelationExpr::new(
                format!("classical.a_adag[{i},{j}]"),
                format!("[a_{i}, a+_{j}] = delta_{i}{j}"),
            )
            .term(one, vec![A(i), Adag(j)])
            .term(-one, vec![Adag(j), A(i)]);
            if i == j {
                rel = rel.equals(one);
            }
            out.push(rel);
            if i < j {
                out.push(
                    RelationExpr::new(
                        format!("classical.a_a[{i},{j}]"),
                        format!("[a_{i}, a_{j}] = 0"),
                    )
                    .term(one, vec![A(i), A(j)])
                    .term(-one, vec![A(j), A(i)]),
                );
                out.push(
                    RelationExpr::new(
                        format!("classical.adag_adag[{i},{j}]"),
                        format!("[a+_{i}, a+_{j}] = 0"),
                    )
                    .term(one, vec![Adag(i), Adag(j)])
                    .term(-one, vec![Adag(j), Adag(i)]),
                );
            }
            for k in 1..=n {
                for l in 1..=n {
                    let mut rel = RelationExpr::new(
                        format!("classical.gl[{i},{j},{k},{l}]"),
                        format!(
                            "[E_{i}{j}, E_{k}{l}] = delta_{j}{k} E_{i}{l} - delta_{i}{l} E_{k}{j}"
                        ),
                    )
                    .term(one, vec![E(i, j), E(k, l)])
                    .term(-one, vec![E(k, l), E(i, j)]);
                    if j == k {
                        rel = rel.term(-one, vec![E(i, l)]);
                    }
                    if i == l {
                        rel = rel.term(one, vec![E(k, j)]);
                    }
                    out.push(rel.in_sectors(max_total));
                }
            }
        }
    }
    out
}

fn check_all<B: Backend>(
    space: &FockSpace<B>,
    relations: &[RelationExpr],
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    relations
        .par_iter()
        .map(|rel| check_relation(space, rel, tolerance))
        .collect()
}

/// `N_i` from the ladder series against the diagonal number operator.
pub fn number_series_reports<B: Backend>(
    space: &FockSpace<B>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let config = space.config();
    (1..=config.n_modes)
        .map(|mode| {
            let mut max_residual = 0.0_f64;
            let mut formally_zero = true;
            let domain = config.occupations();
            for occ in &domain {
                let v = space.basis_state(occ)?;
                let diff = space.sub(
                    &space.number_from_ladder(mode, &v),
                    &space.apply_number(mode, &v),
                );
                formally_zero &= diff.is_zero();
                max_residual = max_residual.max(space.norm(&diff));
            }
            Ok(VerificationReport {
                label: format!("number.series[{mode}]"),
                source: format!("N_{mode} = sum_k (1-p)^k/(1-p^k) (a+_{mode})^k (a_{mode})^k"),
                params: ParameterSet::of(config),
                domain_size: domain.len(),
                max_residual,
                tolerance,
                exact: B::EXACT,
                pass: if B::EXACT {
                    formally_zero
                } else {
                    max_residual <= tolerance
                },
                skipped: false,
            })
        })
        .collect()
}

/// `a+_i a_i - nu` on basis states against `-p^{n_i}/(1-p)`.
pub fn subhamiltonian_eigen_reports<B: Backend>(
    space: &FockSpace<B>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let config = space.config();
    let b = space.backend();
    let nu = b.nu()?;
    (1..=config.n_modes)
        .map(|mode| {
            let mut max_residual = 0.0_f64;
            let mut formally_zero = true;
            let domain = config.occupations();
            for occ in &domain {
                let v = space.basis_state(occ)?;
                let via_ladder = space.sub(
                    &evaluate_word(space, &[Adag(mode), A(mode)], &v)?,
                    &space.scale(&nu, &v),
                );
                let n = occ.count(mode) as i64;
                let expected = b.neg(&b.mul(&b.p_power(n), &nu));
                let diff = space.sub(&via_ladder, &space.scale(&expected, &v));
                formally_zero &= diff.is_zero();
                max_residual = max_residual.max(space.norm(&diff));
            }
            Ok(VerificationReport {
                label: format!("sub.eigenvalue[{mode}]"),
                source: format!("H_{mode} |n> = -p^(n_{mode})/(1-p) |n>"),
                params: ParameterSet::of(config),
                domain_size: domain.len(),
                max_residual,
                tolerance,
                exact: B::EXACT,
                pass: if B::EXACT {
                    formally_zero
                } else {
                    max_residual <= tolerance
                },
                skipped: false,
            })
        })
        .collect()
}

/// `<E_ij v, w> = <v, E_ji w>` over pairs of basis states one step inside the cutoffs.
pub fn hermiticity_reports<B: Backend>(
    space: &FockSpace<B>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let config = space.config();
    let b = space.backend();
    let bounds: Vec<u32> = config.cutoff.iter().map(|c| c - 1).collect();
    let domain = occupations_within(&bounds);
    let basis: Vec<_> = domain
        .iter()
        .map(|o| space.basis_state(o))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 1..=config.n_modes {
        for j in 1..=config.n_modes {
            let images: Vec<_> = basis
                .iter()
                .map(|v| evaluate_word(space, &[E(i, j)], v))
                .collect::<Result<_>>()?;
            let adjoints: Vec<_> = basis
                .iter()
                .map(|w| evaluate_word(space, &[E(j, i)], w))
                .collect::<Result<_>>()?;
            let mut max_residual = 0.0_f64;
            let mut formally_zero = true;
            for (v, ev) in basis.iter().zip(&images) {
                for (w, ew) in basis.iter().zip(&adjoints) {
                    let diff = b.sub(&space.inner_product(ev, w), &space.inner_product(v, ew));
                    formally_zero &= b.is_zero(&diff);
                    max_residual = max_residual.max(b.realize(&diff).norm());
                }
            }
            out.push(VerificationReport {
                label: format!("hermiticity.E[{i},{j}]"),
                source: format!("E_{i}{j}^+ = E_{j}{i}"),
                params: ParameterSet::of(config),
                domain_size: basis.len() * basis.len(),
                max_residual,
                tolerance,
                exact: B::EXACT,
                pass: if B::EXACT {
                    formally_zero
                } else {
                    max_residual <= tolerance
                },
                skipped: false,
            });
        }
    }
    Ok(out)
}

/// Runs a suite on a prepared space (any backend, any ladder signs).
pub fn run_suite_on<B: Backend>(
    suite: Suite,
    space: &FockSpace<B>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let config = space.config();
    let n = config.n_modes;
    let p_is_one = config.params.p == 1.0;
    let max_total = config.cutoff.iter().copied().min().unwrap_or(0);
    let mut reports = match suite {
        Suite::Oscillator => check_all(space, &oscillator_relations(n, p_is_one), tolerance)?,
        Suite::Number => number_series_reports(space, tolerance)?,
        Suite::Subhamiltonian => {
            let mut r = check_all(space, &subhamiltonian_relations(n), tolerance)?;
            r.extend(subhamiltonian_eigen_reports(space, tolerance)?);
            r
        }
        Suite::Gl => {
            let mut relations = gl_relations(n, max_total);
            let mut r = Vec::new();
            if n < 4 {
                relations.retain(|rel| !rel.label.starts_with("gl.Eij_Ekl"));
                r.push(VerificationReport::skipped(
                    "gl.Eij_Ekl",
                    "E_ij E_kl = q^(2(R(i,k)+R(j,l)-R(j,k)-R(i,l))) E_kl E_ij needs four distinct modes",
                    config,
                ));
            }
            r.extend(check_all(space, &relations, tolerance)?);
            r
        }
        Suite::Hermiticity => hermiticity_reports(space, tolerance)?,
        Suite::Classical => {
            return Err(Error::Configuration(
                "the classical suite fixes p = q = 1; use run_suite".into(),
            ))
        }
        Suite::All => {
            let mut r = Vec::new();
            for s in [
                Suite::Oscillator,
                Suite::Number,
                Suite::Gl,
                Suite::Hermiticity,
            ] {
                r.extend(run_suite_on(s, space, tolerance)?);
            }
            if !p_is_one {
                r.extend(run_suite_on(Suite::Subhamiltonian, space, tolerance)?);
            }
            r
        }
    };
    reports.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(reports)
}

fn classical_reports<B: Backend>(
    space: &FockSpace<B>,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let n = space.config().n_modes;
    let max_total = space.config().cutoff.iter().copied().min().unwrap_or(0);
    let mut relations = classical_relations(n, max_total);
    for rel in oscillator_relations(n, true)
        .into_iter()
        .chain(gl_relations(n, max_total))
    {
        relations.push(RelationExpr {
            label: format!("classical.{}", rel.label),
            ..rel
        });
    }
    let mut reports = check_all(space, &relations, tolerance)?;
    reports.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(reports)
}

/// Runs a suite for `config` in float or exact arithmetic. The classical
/// suite replaces the parameters with `p = q = 1`.
pub fn run_suite(
    suite: Suite,
    config: &ModeConfig,
    arithmetic: Arithmetic,
    tolerance: f64,
) -> Result<Vec<VerificationReport>> {
    let classical_config = || ModeConfig {
        params: DeformationParams::classical().with_tolerance(config.params.tolerance),
        ..config.clone()
    };
    let mut reports = match (suite, arithmetic) {
        (Suite::Classical, Arithmetic::Float) => {
            classical_reports(&FockSpace::new(classical_config()), tolerance)?
        }
        (Suite::Classical, Arithmetic::Exact) => {
            classical_reports(&FockSpace::exact(classical_config())?, tolerance)?
        }
        (s, Arithmetic::Float) => run_suite_on(s, &FockSpace::new(config.clone()), tolerance)?,
        (s, Arithmetic::Exact) => run_suite_on(s, &FockSpace::exact(config.clone())?, tolerance)?,
    };
    if suite == Suite::All {
        reports.extend(run_suite(Suite::Classical, config, arithmetic, tolerance)?);
        reports.sort_by(|a, b| a.label.cmp(&b.label));
    }
    Ok(reports)
}

/// Float convenience wrapper used by examples.
pub fn run_float_suite(suite: Suite, config: &ModeConfig) -> Result<Vec<VerificationReport>> {
    run_suite(suite, config, Arithmetic::Float, config.params.tolerance)
}

/// Exact-arithmetic space, re-exported for callers that want to inspect residuals.
pub fn exact_space(config: &ModeConfig) -> Result<FockSpace<ExactBackend>> {
    FockSpace::exact(config.clone())
}

/// Float space.
pub fn float_space(config: &ModeConfig) -> FockSpace<FloatBackend> {
    FockSpace::new(config.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::LadderSigns;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn config(n: usize, cutoff: u32, p: f64, theta: f64) -> ModeConfig {
        ModeConfig::uniform(n, cutoff, DeformationParams::new(p, theta).unwrap()).unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        let space = float_space(&config(2, 3, 0.7, 0.2));
        let v = space.basis_state(&Occupation(vec![1, 2])).unwrap();
        assert_eq!(evaluate_word(&space, &[], &v).unwrap(), v);
    }

    #[test]
    fn word_on_vacuum() {
        let space = float_space(&config(2, 3, 0.7, 0.2));
        let out = evaluate_word(&space, &[A(1), Adag(1)], &space.vacuum()).unwrap();
        let amp = out.get(&Occupation(vec![0, 0])).unwrap();
        assert!((amp - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn word_crossing_cutoff_overflows() {
        let space = float_space(&config(1, 1, 0.7, 0.0));
        let out = evaluate_word(&space, &[Adag(1), Adag(1)], &space.vacuum()).unwrap();
        assert!(out.overflow());
    }

    #[test]
    fn invalid_index_is_argument_error() {
        let space = float_space(&config(2, 3, 0.7, 0.0));
        let err = evaluate_word(&space, &[A(3)], &space.vacuum()).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn p_commutator_float() {
        let space = float_space(&config(2, 6, 0.7, PI / 7.0));
        let rel = RelationExpr::new("r", "a a+ - p a+ a = 1")
            .term(Coefficient::ONE, vec![A(1), Adag(1)])
            .term(-Coefficient::p(1), vec![Adag(1), A(1)])
            .equals(Coefficient::ONE);
        let report = check_relation(&space, &rel, 1e-12).unwrap();
        assert!(report.pass && report.max_residual < 1e-12);
        assert_eq!(report.domain_size, 36);
    }

    #[test]
    fn gl_commutator_exact() {
        let space = exact_space(&config(2, 4, 0.7, PI / 7.0)).unwrap();
        let rel = RelationExpr::new("r", "[E12, E21] = E11 - E22")
            .term(Coefficient::ONE, vec![E(1, 2), E(2, 1)])
            .term(-Coefficient::ONE, vec![E(2, 1), E(1, 2)])
            .term(-Coefficient::ONE, vec![E(1, 1)])
            .term(Coefficient::ONE, vec![E(2, 2)])
            .in_sectors(4);
        let report = check_relation(&space, &rel, 0.0).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn classical_bosons_commute_across_modes() {
        let space = float_space(&config(2, 4, 1.0, 0.0));
        let rel = RelationExpr::new("r", "[a_1, a+_2] = 0")
            .term(Coefficient::ONE, vec![A(1), Adag(2)])
            .term(-Coefficient::ONE, vec![Adag(2), A(1)]);
        assert_eq!(check_relation(&space, &rel, 0.0).unwrap().max_residual, 0.0);
    }

    #[test]
    fn empty_interior_is_configuration_error() {
        let space = float_space(&config(2, 1, 0.7, 0.0));
        let rel = RelationExpr::new("deep", "a+ a+ a+")
            .term(Coefficient::ONE, vec![Adag(1), Adag(1), Adag(2)]);
        assert!(matches!(
            check_relation(&space, &rel, 1e-12),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn oscillator_suite_passes() {
        let reports = run_suite(
            Suite::Oscillator,
            &config(3, 5, 0.7, PI / 3.0),
            Arithmetic::Float,
            1e-10,
        )
        .unwrap();
        assert!(
            reports.iter().all(|r| r.pass),
            "{:#?}",
            reports.iter().find(|r| !r.pass)
        );
        let labels: Vec<_> = reports.iter().map(|r| r.label.clone()).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
    }

    #[test]
    fn gl_suite_passes_exactly() {
        let reports = run_suite(
            Suite::Gl,
            &config(3, 4, 0.3, PI / 7.0),
            Arithmetic::Exact,
            0.0,
        )
        .unwrap();
        assert!(
            reports.iter().all(|r| r.pass),
            "{:#?}",
            reports.iter().find(|r| !r.pass)
        );
        assert!(reports.iter().any(|r| r.skipped));
    }

    #[test]
    fn four_index_relation_at_four_modes() {
        let reports = run_suite(
            Suite::Gl,
            &config(4, 3, 0.7, PI / 7.0),
            Arithmetic::Exact,
            0.0,
        )
        .unwrap();
        let four: Vec<_> = reports
            .iter()
            .filter(|r| r.label.starts_with("gl.Eij_Ekl"))
            .collect();
        assert_eq!(four.len(), 24);
        assert!(
            four.iter().all(|r| r.pass && !r.skipped),
            "{:#?}",
            four.iter().find(|r| !r.pass)
        );
    }

    #[test]
    fn three_index_phase_flips_when_i_is_between() {
        // E_21 E_23 = a+_2 a_1 a+_2 a_3; moving a_1 and a_3 past a+_2 gives
        // q and q^-1, and a_1 a_3 = q^-1 a_3 a_1, so the net phase is q.
        assert_eq!(three_index_exponent(2, 1, 3), 1);
        assert_eq!(three_index_exponent(1, 2, 3), -1);
        assert_eq!(three_index_exponent(3, 1, 2), -1);
        let space = exact_space(&config(3, 3, 0.7, PI / 7.0)).unwrap();
        let naive = RelationExpr::new("r", "E_21 E_23 = q^-1 E_23 E_21")
            .term(Coefficient::ONE, vec![E(2, 1), E(2, 3)])
            .term(-Coefficient::q(-1), vec![E(2, 3), E(2, 1)])
            .in_sectors(3);
        assert!(!check_relation(&space, &naive, 0.0).unwrap().pass);
    }

    #[test]
    fn four_index_exponents() {
        assert_eq!(four_index_exponent(1, 2, 3, 4), 0);
        assert_eq!(four_index_exponent(1, 3, 2, 4), -2);
    }

    #[test]
    fn gl_results_independent_of_cutoff() {
        let small =
            run_suite(Suite::Gl, &config(3, 3, 0.7, 0.9), Arithmetic::Float, 1e-10).unwrap();
        let large = run_suite(
            Suite::Gl,
            &ModeConfig::new(3, vec![5, 6, 7], DeformationParams::new(0.7, 0.9).unwrap()).unwrap(),
            Arithmetic::Float,
            1e-10,
        )
        .unwrap();
        assert!(small.iter().chain(&large).all(|r| r.pass));
    }

    #[test]
    fn mutated_phase_breaks_oscillator_suite() {
        for signs in [
            LadderSigns {
                annihilation: -1,
                creation: -1,
            },
            LadderSigns {
                annihilation: 1,
                creation: 1,
            },
        ] {
            let space = float_space(&config(3, 5, 0.7, PI / 7.0)).with_ladder_signs(signs);
            let reports = run_suite_on(Suite::Oscillator, &space, 1e-10).unwrap();
            let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
            assert!(worst > 0.1, "{signs:?}: {worst}");
        }
    }

    #[test]
    fn unknown_suite() {
        assert_eq!(
            "nope".parse::<Suite>(),
            Err(Error::UnknownSuite("nope".into()))
        );
    }
}
