//! Positive-energy representation on a bilateral lattice and the
//! coherent states that diagonalize the creation operators.
//!
//! A basis state is labelled by integers `m = (m_1..m_n)` and has
//! `H_i = lambda_i p^{m_i} > 0`. With `nu = 1/(1-p)` and `S_i = sum_{k>i} m_k`:
//!
//! ```text
//! a+_i |m> = q^{-S_i} sqrt(lambda_i p^{m_i+1} + nu) |m + e_i>
//! a_i  |m> = q^{ S_i} sqrt(lambda_i p^{m_i}   + nu) |m - e_i>
//! ```
//!
//! The coherent state `|z>_+` sits on labels `m = -n` with amplitude
//! `c(n) z_n^{n_n}..z_1^{n_1}`, where per mode
//! `c(n)^2 = p^{n(n-1)/2} / ((-nu/lambda; p)_n lambda^n)`, `n` ranging over
//! all integers. Its norm is a product of `0psi1` values.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qkernel::{bilateral_psi01_sum, q_pochhammer_in, DeformationParams, Real};
use crate::zcoherent::ZKey;

/// Default threshold on boundary terms of the magnitude series.
pub const DEFAULT_WINDOW_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveEnergyConfig {
    pub params: DeformationParams,
    pub lambdas: Vec<f64>,
    /// `1/(1-p)`.
    pub nu: f64,
    /// Inclusive range `[m_min, m_max]` of every lattice label component.
    pub window: (i64, i64),
}

impl PositiveEnergyConfig {
    pub fn new(params: DeformationParams, lambdas: Vec<f64>, window: (i64, i64)) -> Result<Self> {
        if !(params.p > 0.0 && params.p < 1.0) {
            return Err(Error::Domain(format!(
                "the positive-energy representation needs 0 < p < 1, got {}",
                params.p
            )));
        }
        if lambdas.is_empty() {
            return Err(Error::Argument("at least one mode is required".into()));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::Argument(format!("lambda must be positive, got {l}")));
        }
        if window.0 > window.1 {
            return Err(Error::Argument(format!(
                "empty window [{}, {}]",
                window.0, window.1
            )));
        }
        let nu = params.nu()?;
        Ok(Self {
            params,
            lambdas,
            nu,
            window,
        })
    }

    /// Window `[-w, w]`.
    pub fn symmetric(params: DeformationParams, lambdas: Vec<f64>, w: i64) -> Result<Self> {
        Self::new(params, lambdas, (-w, w))
    }

    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn in_window(&self, label: &LatticeLabel) -> bool {
        label
            .0
            .iter()
            .all(|&m| m >= self.window.0 && m <= self.window.1)
    }

    /// All labels in the window, lexicographic.
    pub fn labels(&self) -> Vec<LatticeLabel> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.n_modes() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (self.window.0..=self.window.1).map(move |m| {
                        let mut v = prefix.clone();
                        v.push(m);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(LatticeLabel).collect()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.n_modes() {
            return Err(Error::Argument(format!(
                "mode index {mode} outside 1..={}",
                self.n_modes()
            )));
        }
        Ok(())
    }
}

/// Exponents `m` of the state `|lambda_1 p^{m_1}, .., lambda_n p^{m_n}>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeLabel(pub Vec<i64>);

impl LatticeLabel {
    /// `sum_{k > mode} m_k`.
    pub fn higher_sum(&self, mode: usize) -> i64 {
        self.0[mode..].iter().sum()
    }

    pub fn shifted(&self, mode: usize, by: i64) -> Self {
        let mut v = self.0.clone();
        v[mode - 1] += by;
        Self(v)
    }
}

impl fmt::Display for LatticeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "|{}>", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatticeVector {
    pub amplitudes: BTreeMap<LatticeLabel, Complex64>,
    /// Set once any component was dropped at the window edge.
    pub window_clipped: bool,
}

impl LatticeVector {
    pub fn basis(label: LatticeLabel) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(label, Complex64::new(1.0, 0.0));
        Self {
            amplitudes,
            window_clipped: false,
        }
    }

    fn accumulate(&mut self, label: LatticeLabel, c: Complex64) {
        let entry = self.amplitudes.entry(label).or_default();
        *entry += c;
    }

    pub fn add_scaled(&self, other: &Self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.window_clipped |= other.window_clipped;
        for (l, a) in &other.amplitudes {
            out.accumulate(l.clone(), a * c);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes
            .values()
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Creation,
    Annihilation,
    Hamiltonian,
}

/// Applies `a+_i`, `a_i` or `H_i` on the lattice.
pub fn apply_positive_ladder(
    config: &PositiveEnergyConfig,
    kind: LadderKind,
    mode: usize,
    v: &LatticeVector,
) -> Result<LatticeVector> {
    config.check_mode(mode)?;
    let p = config.params.p;
    let lambda = config.lambdas[mode - 1];
    let mut out = LatticeVector {
        amplitudes: BTreeMap::new(),
        window_clipped: v.window_clipped,
    };
    for (label, amp) in &v.amplitudes {
        let m = label.0[mode - 1];
        let s = label.higher_sum(mode);
        let (target, coeff) = match kind {
            LadderKind::Creation => (
                label.shifted(mode, 1),
                config.params.q_pow(-s) * (lambda * p.powi((m + 1) as i32) + config.nu).sqrt(),
            ),
            LadderKind::Annihilation => (
                label.shifted(mode, -1),
                config.params.q_pow(s) * (lambda * p.powi(m as i32) + config.nu).sqrt(),
            ),
            LadderKind::Hamiltonian => (
                label.clone(),
                Complex64::new(lambda * p.powi(m as i32), 0.0),
            ),
        };
        if config.in_window(&target) {
            out.accumulate(target, coeff * amp);
        } else {
            out.window_clipped = true;
        }
    }
    Ok(out)
}

/// `c(n)^2` for one mode, from the closed form.
pub fn coefficient_square<R: Real>(p: &R, lambda: &R, nu: &R, n: i64) -> Result<R> {
    let a = R::zero() - nu.clone() / lambda.clone();
    let poch = q_pochhammer_in(&a, p, n)?;
    let gauss = if n % 2 == 0 {
        (n / 2) * (n - 1)
    } else {
        n * ((n - 1) / 2)
    };
    Ok(p.powi(gauss) / (poch * lambda.powi(n)))
}

/// One term `q^{q_power} sqrt(square) Z(key)` of `|z>_+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveTerm<R> {
    pub key: ZKey,
    pub q_power: i64,
    pub square: R,
}

/// `|z>_+` before normalization, on the labels of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveCoherentState<R> {
    pub window: (i64, i64),
    pub terms: BTreeMap<LatticeLabel, PositiveTerm<R>>,
}

/// Builds `|z>_+` over the window in arithmetic `R`. Floats use `p` and
/// `lambda` as given; rationals read them from their decimal form.
pub fn build_positive_coherent<R: Real>(
    config: &PositiveEnergyConfig,
) -> Result<PositiveCoherentState<R>> {
    let p = R::from_f64(config.params.p)?;
    let nu = R::one() / (R::one() - p.clone());
    let mut per_mode = Vec::new();
    for &lambda in &config.lambdas {
        let lambda = R::from_f64(lambda)?;
        let squares: BTreeMap<i64, R> = (-config.window.1..=-config.window.0)
            .map(|n| coefficient_square(&p, &lambda, &nu, n).map(|c| (n, c)))
            .collect::<Result<_>>()?;
        per_mode.push(squares);
    }
    let terms = config
        .labels()
        .into_iter()
        .map(|label| {
            let n: Vec<i64> = label.0.iter().map(|m| -m).collect();
            let square = n
                .iter()
                .zip(&per_mode)
                .fold(R::one(), |acc, (k, sq)| acc * sq[k].clone());
            (
                label,
                PositiveTerm {
                    key: ZKey::from_z_powers(n),
                    q_power: 0,
                    square,
                },
            )
        })
        .collect();
    Ok(PositiveCoherentState {
        window: config.window,
        terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaisingReport {
    pub mode: usize,
    pub interior_size: usize,
    /// Largest relative mismatch of squared magnitudes on the interior.
    pub max_relative_residual: f64,
    pub exact: bool,
    /// Every interior magnitude agrees (exactly for rational arithmetic).
    pub magnitudes_equal: bool,
    pub phase_mismatches: usize,
    /// Largest `c(n)^2 prod r_k^{n_k}` among the `z_i |z>` terms whose
    /// `a+_i` partner lies outside the window.
    pub boundary_residue: f64,
    pub pass: bool,
}

/// Checks `a+_i |z>_+ = z_i |z>_+` label by label.
///
/// On label `m`, the `a+_i` side is `q^{-S_i(m - e_i)} sqrt(lambda p^{m_i} + nu)`
/// times the amplitude at `m - e_i`; the `z_i` side is the amplitude at `m`
/// with `z_i` moved into canonical position.
pub fn check_raising_eigenproblem<R: Real>(
    config: &PositiveEnergyConfig,
    state: &PositiveCoherentState<R>,
    mode: usize,
    magnitudes: &[f64],
    rel_tol: f64,
) -> Result<RaisingReport> {
    config.check_mode(mode)?;
    let p = R::from_f64(config.params.p)?;
    let nu = R::one() / (R::one() - p.clone());
    let lambda = R::from_f64(config.lambdas[mode - 1])?;
    let mut report = RaisingReport {
        mode,
        interior_size: 0,
        max_relative_residual: 0.0,
        exact: R::EXACT,
        magnitudes_equal: true,
        phase_mismatches: 0,
        boundary_residue: 0.0,
        pass: true,
    };
    for (label, term) in &state.terms {
        let source = label.shifted(mode, -1);
        let Some(src) = state.terms.get(&source) else {
            let weight: f64 = term
                .key
                .z
                .iter()
                .zip(magnitudes)
                .map(|(&n, &r)| r.powi(n as i32))
                .product();
            report.boundary_residue = report.boundary_residue.max(term.square.to_f64() * weight);
            continue;
        };
        report.interior_size += 1;
        // a+ side: amplitude at `label - e_i` times the ladder coefficient;
        // it carries the monomial Z(n + e_i) with n = -label.
        let m = source.0[mode - 1];
        let lhs_square = src.square.clone() * (lambda.clone() * p.powi(m + 1) + nu.clone());
        let lhs_phase = src.q_power - source.higher_sum(mode);
        // z side: z_i moved into the canonical monomial of `label`.
        let (rhs_key, shift) = term.key.left_multiply(mode);
        let rhs_phase = term.q_power + shift;
        let rhs_square = term.square.clone();
        if rhs_key != src.key || rhs_phase != lhs_phase {
            report.phase_mismatches += 1;
        }
        let equal = lhs_square.close_to(&rhs_square, rel_tol);
        report.magnitudes_equal &= equal;
        let diff = (lhs_square.to_f64() - rhs_square.to_f64()).abs() / rhs_square.to_f64().abs();
        report.max_relative_residual = report.max_relative_residual.max(diff);
    }
    report.pass = report.magnitudes_equal && report.phase_mismatches == 0;
    Ok(report)
}

/// `C = prod_k 0psi1(-nu/lambda_k; p, -r_k/lambda_k)^{-1/2}`.
pub fn positive_normalization(config: &PositiveEnergyConfig, magnitudes: &[f64]) -> Result<f64> {
    check_magnitudes(config, magnitudes)?;
    let mut prod = 1.0;
    for (&lambda, &r) in config.lambdas.iter().zip(magnitudes) {
        let psi = bilateral_psi01_sum(-config.nu / lambda, config.params.p, -r / lambda, 1e-17)?;
        if !(psi.value > 0.0) {
            return Err(Error::Consistency(format!(
                "0psi1 norm series evaluated to {} (must be positive)",
                psi.value
            )));
        }
        prod *= psi.value;
    }
    Ok(1.0 / prod.sqrt())
}

fn check_magnitudes(config: &PositiveEnergyConfig, magnitudes: &[f64]) -> Result<()> {
    if magnitudes.len() != config.n_modes() {
        return Err(Error::Argument(format!(
            "{} magnitudes given for {} modes",
            magnitudes.len(),
            config.n_modes()
        )));
    }
    for &r in magnitudes {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Argument(format!("|z|^2 must be positive, got {r}")));
        }
        if r <= config.nu {
            return Err(Error::Domain(format!(
                "|z|^2 = {r} must exceed nu = {}; the n -> -infinity tail diverges otherwise",
                config.nu
            )));
        }
    }
    Ok(())
}

/// `sum_label c(n)^2 prod r_k^{n_k}` over the window of `state`.
pub fn direct_magnitude_sum<R: Real>(state: &PositiveCoherentState<R>, magnitudes: &[f64]) -> f64 {
    let mut sum = crate::qkernel::Neumaier::new(0.0);
    for term in state.terms.values() {
        let weight: f64 = term
            .key
            .z
            .iter()
            .zip(magnitudes)
            .map(|(&n, &r)| r.powi(n as i32))
            .product();
        sum.add(term.square.to_f64() * weight);
    }
    sum.value()
}

/// Per-mode magnitude sum `sum_{n=-w}^{w} c(n)^2 r^n` for one mode.
fn mode_series(p: f64, lambda: f64, nu: f64, r: f64, w: i64) -> Result<(f64, f64, f64)> {
    let mut sum = crate::qkernel::Neumaier::new(0.0);
    for n in -w..=w {
        sum.add(coefficient_square(&p, &lambda, &nu, n)? * r.powi(n as i32));
    }
    let low = coefficient_square(&p, &lambda, &nu, -w)? * r.powi(-w as i32);
    let high = coefficient_square(&p, &lambda, &nu, w)? * r.powi(w as i32);
    Ok((sum.value(), low, high))
}

/// Smallest symmetric window whose boundary terms are below `threshold`
/// relative to the per-mode sum, for every mode.
pub fn auto_window(
    params: DeformationParams,
    lambdas: &[f64],
    magnitudes: &[f64],
    threshold: f64,
) -> Result<i64> {
    let probe = PositiveEnergyConfig::symmetric(params, lambdas.to_vec(), 0)?;
    check_magnitudes(&probe, magnitudes)?;
    const MAX_WINDOW: i64 = 2000;
    let mut worst = 1;
    for (&lambda, &r) in lambdas.iter().zip(magnitudes) {
        let mut w = 1;
        loop {
            let (sum, low, high) = mode_series(params.p, lambda, probe.nu, r, w)?;
            if low <= threshold * sum && high <= threshold * sum {
                break;
            }
            w += 1;
            if w > MAX_WINDOW {
                return Err(Error::NonConvergence(format!(
                    "magnitude series for r = {r} still above {threshold} at window {MAX_WINDOW}"
                )));
            }
        }
        worst = worst.max(w);
    }
    Ok(worst)
}

/// Serializable view of one term of `|z>_+`, normalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeRecord {
    pub exponents: Vec<i64>,
    pub z_powers: Vec<i64>,
    pub q_power: i64,
    /// `C c(n)`, the real coefficient in front of the monomial.
    pub coefficient: f64,
}

pub fn lattice_records<R: Real>(
    state: &PositiveCoherentState<R>,
    normalization: f64,
) -> Vec<LatticeRecord> {
    state
        .terms
        .iter()
        .map(|(label, term)| LatticeRecord {
            exponents: label.0.clone(),
            z_powers: term.key.z.clone(),
            q_power: term.q_power,
            coefficient: normalization * term.square.to_f64().sqrt(),
        })
        .collect()
}

/// Exact-arithmetic family; `p` and every `lambda` are read as decimals.
pub fn build_positive_coherent_exact(
    config: &PositiveEnergyConfig,
) -> Result<PositiveCoherentState<BigRational>> {
    build_positive_coherent(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::bilateral_psi01;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(p: f64, theta: f64) -> DeformationParams {
        DeformationParams::new(p, theta).unwrap()
    }

    #[test]
    fn creation_coefficient_example() {
        let c = PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![1.0], 5).unwrap();
        let v = apply_positive_ladder(
            &c,
            LadderKind::Creation,
            1,
            &LatticeVector::basis(LatticeLabel(vec![0])),
        )
        .unwrap();
        let amp = v.amplitudes[&LatticeLabel(vec![1])];
        assert!((amp.re - 2.5_f64.sqrt()).abs() < 1e-15);
        let h = apply_positive_ladder(
            &c,
            LadderKind::Hamiltonian,
            1,
            &LatticeVector::basis(LatticeLabel(vec![0])),
        )
        .unwrap();
        assert_eq!(h.amplitudes[&LatticeLabel(vec![0])].re, 1.0);
    }

    #[test]
    fn rejects_p_at_least_one_and_bad_lambda() {
        assert!(matches!(
            PositiveEnergyConfig::symmetric(params(1.5, 0.0), vec![1.0], 3),
            Err(Error::Domain(_))
        ));
        assert!(PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![0.0], 3).is_err());
    }

    #[test]
    fn window_edge_clips() {
        let c = PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![1.0], 1).unwrap();
        let v = apply_positive_ladder(
            &c,
            LadderKind::Creation,
            1,
            &LatticeVector::basis(LatticeLabel(vec![1])),
        )
        .unwrap();
        assert!(v.window_clipped && v.amplitudes.is_empty());
    }

    proptest! {
        #[test]
        fn ladder_consistency(
            p in 0.05f64..0.95,
            theta in 0.0f64..6.3,
            lambda in 0.1f64..5.0,
            m1 in -6i64..6,
            m2 in -6i64..6,
        ) {
            let c = PositiveEnergyConfig::symmetric(params(p, theta), vec![lambda, 2.0 * lambda], 10).unwrap();
            let label = LatticeLabel(vec![m1, m2]);
            let v = LatticeVector::basis(label.clone());
            for mode in 1..=2 {
                let l = c.lambdas[mode - 1];
                let m = label.0[mode - 1];
                let up = apply_positive_ladder(&c, LadderKind::Creation, mode, &v).unwrap();
                let aad = apply_positive_ladder(&c, LadderKind::Annihilation, mode, &up).unwrap();
                let down = apply_positive_ladder(&c, LadderKind::Annihilation, mode, &v).unwrap();
                let ada = apply_positive_ladder(&c, LadderKind::Creation, mode, &down).unwrap();
                let e1 = l * p.powi((m + 1) as i32) + c.nu;
                let e0 = l * p.powi(m as i32) + c.nu;
                prop_assert!((aad.amplitudes[&label] - e1).norm() <= 1e-12 * e1);
                prop_assert!((ada.amplitudes[&label] - e0).norm() <= 1e-12 * e0);
                let comm = aad.add_scaled(&ada, Complex64::new(-p, 0.0));
                prop_assert!((comm.amplitudes[&label] - 1.0).norm() <= 1e-12 * e1);
                let h = apply_positive_ladder(&c, LadderKind::Hamiltonian, mode, &v).unwrap();
                prop_assert!(h.amplitudes[&label].re > 0.0);
            }
        }
    }

    #[test]
    fn low_order_coefficients() {
        let (p, lambda) = (0.5, 1.3);
        let nu = 2.0;
        assert_eq!(coefficient_square(&p, &lambda, &nu, 0).unwrap(), 1.0);
        let c1 = coefficient_square(&p, &lambda, &nu, 1).unwrap();
        assert!((c1 - 1.0 / ((1.0 + nu / lambda) * lambda)).abs() < 1e-15);
        // Bilateral recursion c(n-1)^2 = c(n)^2 (lambda p^{1-n} + nu), also for n <= 0.
        for n in -8..8 {
            let a = coefficient_square(&p, &lambda, &nu, n).unwrap();
            let b = coefficient_square(&p, &lambda, &nu, n - 1).unwrap();
            assert!((a * (lambda * p.powi(1 - n as i32) + nu) - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn normalization_matches_direct_sum() {
        let p = params(0.5, 0.0);
        let (lambda, r) = (1.0, 20.0);
        let w = auto_window(p, &[lambda], &[r], DEFAULT_WINDOW_THRESHOLD).unwrap();
        let c = PositiveEnergyConfig::symmetric(p, vec![lambda], w.max(30)).unwrap();
        let state = build_positive_coherent::<f64>(&c).unwrap();
        let direct = direct_magnitude_sum(&state, &[r]);
        let psi = bilateral_psi01(-c.nu / lambda, 0.5, -r / lambda, 1e-17).unwrap();
        assert!((direct - psi).abs() <= 1e-8 * psi, "{direct} vs {psi}");
        let norm = positive_normalization(&c, &[r]).unwrap();
        assert!((norm.powi(-2) - psi).abs() <= 1e-12 * psi);
    }

    #[test]
    fn normalization_factorizes() {
        let c = PositiveEnergyConfig::symmetric(params(0.6, 0.3), vec![1.0, 2.0], 30).unwrap();
        let both = positive_normalization(&c, &[30.0, 40.0]).unwrap();
        let c1 = PositiveEnergyConfig::symmetric(params(0.6, 0.3), vec![1.0], 30).unwrap();
        let c2 = PositiveEnergyConfig::symmetric(params(0.6, 0.3), vec![2.0], 30).unwrap();
        let split = positive_normalization(&c1, &[30.0]).unwrap()
            * positive_normalization(&c2, &[40.0]).unwrap();
        assert!((both - split).abs() <= 1e-14 * both);
    }

    #[test]
    fn divergent_magnitude_is_domain_error() {
        let c = PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![1.0], 40).unwrap();
        assert!(matches!(
            positive_normalization(&c, &[0.3]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            auto_window(params(0.5, 0.0), &[1.0], &[2.0], 1e-14),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn raising_eigenproblem_exact_two_modes() {
        let c = PositiveEnergyConfig::symmetric(params(0.5, PI / 7.0), vec![1.0, 1.5], 20).unwrap();
        let state = build_positive_coherent_exact(&c).unwrap();
        for mode in 1..=2 {
            let r = check_raising_eigenproblem(&c, &state, mode, &[20.0, 25.0], 0.0).unwrap();
            assert!(r.pass && r.exact, "{r:?}");
            assert_eq!(r.interior_size, 41 * 40);
            assert_eq!(r.max_relative_residual, 0.0);
        }
    }

    #[test]
    fn boundary_residue_shrinks_with_window() {
        let mut last = f64::INFINITY;
        for w in [6, 8, 10, 12, 14] {
            let c = PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![1.0], w).unwrap();
            let state = build_positive_coherent::<f64>(&c).unwrap();
            let r = check_raising_eigenproblem(&c, &state, 1, &[20.0], 1e-12).unwrap();
            assert!(r.pass);
            assert!(
                r.boundary_residue <= 0.25 * last,
                "{w}: {} vs {last}",
                r.boundary_residue
            );
            last = r.boundary_residue;
        }
    }

    #[test]
    fn corrupted_coefficient_is_caught() {
        let c = PositiveEnergyConfig::symmetric(params(0.5, 0.0), vec![1.0], 5).unwrap();
        let mut state = build_positive_coherent_exact(&c).unwrap();
        let t = state.terms.get_mut(&LatticeLabel(vec![2])).unwrap();
        t.square = t.square.clone() * BigRational::from_integer(2.into());
        let r = check_raising_eigenproblem(&c, &state, 1, &[20.0], 0.0).unwrap();
        assert!(!r.pass);
        state.terms.get_mut(&LatticeLabel(vec![2])).unwrap().q_power = 1;
        assert!(
            check_raising_eigenproblem(&c, &state, 1, &[20.0], 0.0)
                .unwrap()
                .phase_mismatches
                > 0
        );
    }
}
