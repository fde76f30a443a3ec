//! Truncated multimode Fock space carrying the deformed ladder representation
//!
//! ```text
//! a_i  |n> = q^{ sum_{k>i} n_k} sqrt([n_i])   |n - e_i>
//! a+_i |n> = q^{-sum_{k>i} n_k} sqrt([n_i+1]) |n + e_i>
//! ```
//!
//! Mode indices are 1-based throughout the public API. Creation past a
//! mode's cutoff drops the component and sets a sticky overflow flag on the
//! result instead of failing, so relation checks can tell when a truncation
//! artifact could have leaked into a residual.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amplitude::{Backend, ExactBackend, FloatBackend, GradedBackend};
use crate::error::{Error, Result};
use crate::qkernel::DeformationParams;

/// Number of modes, per-mode cutoffs and the deformation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeConfig {
    pub n_modes: usize,
    pub cutoff: Vec<u32>,
    pub params: DeformationParams,
}

impl ModeConfig {
    /// `cutoff` is either one value per mode or a single value for all modes.
    pub fn new(n_modes: usize, cutoff: Vec<u32>, params: DeformationParams) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::Argument("need at least one mode".into()));
        }
        let cutoff = match cutoff.len() {
            1 => vec![cutoff[0]; n_modes],
            len if len == n_modes => cutoff,
            len => {
                return Err(Error::Argument(format!(
                    "got {len} cutoffs for {n_modes} modes"
                )))
            }
        };
        if cutoff.contains(&0) {
            return Err(Error::Argument("every cutoff must be at least 1".into()));
        }
        Ok(Self {
            n_modes,
            cutoff,
            params,
        })
    }

    pub fn uniform(n_modes: usize, cutoff: u32, params: DeformationParams) -> Result<Self> {
        Self::new(n_modes, vec![cutoff], params)
    }

    pub fn contains(&self, occ: &Occupation) -> bool {
        occ.0.len() == self.n_modes && occ.0.iter().zip(&self.cutoff).all(|(n, c)| n <= c)
    }

    /// All in-cutoff occupations in lexicographic order.
    pub fn occupations(&self) -> Vec<Occupation> {
        occupations_within(&self.cutoff)
    }
}

/// All occupations with `counts[i] <= bounds[i]`, lexicographic.
pub fn occupations_within(bounds: &[u32]) -> Vec<Occupation> {
    let mut out = vec![Occupation(Vec::with_capacity(bounds.len()))];
    for &bound in bounds {
        out = out
            .into_iter()
            .flat_map(|occ| {
                (0..=bound).map(move |n| {
                    let mut next = occ.0.clone();
                    next.push(n);
                    Occupation(next)
                })
            })
            .collect();
    }
    out
}

/// Occupation numbers `(n_1, ..., n_n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occupation(pub Vec<u32>);

impl Occupation {
    pub fn vacuum(n_modes: usize) -> Self {
        Self(vec![0; n_modes])
    }

    /// `n_i` for 1-based `mode`.
    pub fn count(&self, mode: usize) -> u32 {
        self.0[mode - 1]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    /// `sum_{k > mode} n_k`, the exponent of the ladder phase.
    pub fn higher_sum(&self, mode: usize) -> i64 {
        self.0[mode..].iter().map(|&n| n as i64).sum()
    }

    pub fn raised(&self, mode: usize) -> Occupation {
        let mut next = self.clone();
        next.0[mode - 1] += 1;
        next
    }

    pub fn lowered(&self, mode: usize) -> Option<Occupation> {
        let mut next = self.clone();
        let slot = &mut next.0[mode - 1];
        *slot = slot.checked_sub(1)?;
        Some(next)
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, n) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Sparse amplitude map over occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector<V> {
    amplitudes: BTreeMap<Occupation, V>,
    overflow: bool,
}

impl<V> FockVector<V> {
    pub fn amplitudes(&self) -> &BTreeMap<Occupation, V> {
        &self.amplitudes
    }

    pub fn get(&self, occ: &Occupation) -> Option<&V> {
        self.amplitudes.get(occ)
    }

    /// Set when some creation crossed a cutoff while producing this vector.
    pub fn overflow(&self) -> bool {
        self.overflow
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }
}

/// Signs multiplying the phase exponent `sum_{k>i} n_k` in the annihilation
/// and creation actions. The representation uses `(+1, -1)`; other values
/// exist for mutation testing of the relation suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderSigns {
    pub annihilation: i64,
    pub creation: i64,
}

impl Default for LadderSigns {
    fn default() -> Self {
        Self {
            annihilation: 1,
            creation: -1,
        }
    }
}

/// A truncated Fock space over a chosen arithmetic backend.
#[derive(Debug, Clone)]
pub struct FockSpace<B: Backend = FloatBackend> {
    config: ModeConfig,
    backend: B,
    signs: LadderSigns,
}

impl FockSpace<FloatBackend> {
    pub fn new(config: ModeConfig) -> Self {
        let backend = FloatBackend::new(config.params);
        Self::with_backend(config, backend)
    }
}

impl FockSpace<GradedBackend> {
    pub fn graded(config: ModeConfig) -> Self {
        let backend = GradedBackend::new(config.params);
        Self::with_backend(config, backend)
    }
}

impl FockSpace<ExactBackend> {
    /// Exact arithmetic; `p` is read as a rational.
    pub fn exact(config: ModeConfig) -> Result<Self> {
        let backend = ExactBackend::from_params(&config.params)?;
        Ok(Self::with_backend(config, backend))
    }
}

impl<B: Backend> FockSpace<B> {
    pub fn with_backend(config: ModeConfig, backend: B) -> Self {
        Self {
            config,
            backend,
            signs: LadderSigns::default(),
        }
    }

    pub fn with_ladder_signs(mut self, signs: LadderSigns) -> Self {
        self.signs = signs;
        self
    }

    pub fn config(&self) -> &ModeConfig {
        &self.config
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn ladder_signs(&self) -> LadderSigns {
        self.signs
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.config.n_modes {
            return Err(Error::Argument(format!(
                "mode index {mode} outside 1..={}",
                self.config.n_modes
            )));
        }
        Ok(())
    }

    fn assert_mode(&self, mode: usize) {
        assert!(
            mode >= 1 && mode <= self.config.n_modes,
            "mode index {mode} outside 1..={}",
            self.config.n_modes
        );
    }

    pub fn zero_vector(&self) -> FockVector<B::Value> {
        FockVector {
            amplitudes: BTreeMap::new(),
            overflow: false,
        }
    }

    /// Builds a vector from raw components, dropping zeros.
    pub fn from_components(
        &self,
        components: impl IntoIterator<Item = (Occupation, B::Value)>,
    ) -> FockVector<B::Value> {
        let mut out = self.zero_vector();
        for (occ, v) in components {
            self.accumulate(&mut out.amplitudes, occ, v);
        }
        out
    }

    fn accumulate(&self, map: &mut BTreeMap<Occupation, B::Value>, occ: Occupation, v: B::Value) {
        if self.backend.is_zero(&v) {
            return;
        }
        match map.get_mut(&occ) {
            Some(existing) => {
                let sum = self.backend.add(existing, &v);
                if self.backend.is_zero(&sum) {
                    map.remove(&occ);
                } else {
                    *existing = sum;
                }
            }
            None => {
                map.insert(occ, v);
            }
        }
    }

    pub fn vacuum(&self) -> FockVector<B::Value> {
        self.from_components([(Occupation::vacuum(self.config.n_modes), self.backend.one())])
    }

    /// The unit ket `|n_1, ..., n_n>`.
    pub fn basis_state(&self, occ: &Occupation) -> Result<FockVector<B::Value>> {
        if !self.config.contains(occ) {
            return Err(Error::Argument(format!(
                "occupation {occ} outside the cutoffs"
            )));
        }
        Ok(self.from_components([(occ.clone(), self.backend.one())]))
    }

    /// `(a+_n)^{n_n} ... (a+_1)^{n_1} |0> / sqrt([n_n]! ... [n_1]!)`, built by
    /// literally applying the creation operators.
    pub fn basis_via_creation(&self, occ: &Occupation) -> Result<FockVector<B::Value>> {
        if !self.config.contains(occ) {
            return Err(Error::Argument(format!(
                "occupation {occ} outside the cutoffs"
            )));
        }
        let mut v = self.vacuum();
        let mut norm = self.backend.one();
        for mode in 1..=self.config.n_modes {
            let n = occ.count(mode);
            for _ in 0..n {
                v = self.apply_creation(mode, &v);
            }
            norm = self
                .backend
                .mul(&norm, &self.backend.inv_sqrt_bracket_factorial(n));
        }
        Ok(self.scale(&norm, &v))
    }

    /// Basis action of `a_i`: target occupation and coefficient, or `None`
    /// when `n_i = 0`.
    pub fn annihilation_coefficient(
        &self,
        mode: usize,
        occ: &Occupation,
    ) -> Option<(Occupation, B::Value)> {
        let n = occ.count(mode);
        let target = occ.lowered(mode)?;
        let phase = self
            .backend
            .phase(self.signs.annihilation * occ.higher_sum(mode));
        Some((
            target,
            self.backend.mul(&phase, &self.backend.sqrt_bracket(n)),
        ))
    }

    /// Basis action of `a+_i`, ignoring the cutoff.
    pub fn creation_coefficient(&self, mode: usize, occ: &Occupation) -> (Occupation, B::Value) {
        let n = occ.count(mode);
        let phase = self
            .backend
            .phase(self.signs.creation * occ.higher_sum(mode));
        (
            occ.raised(mode),
            self.backend.mul(&phase, &self.backend.sqrt_bracket(n + 1)),
        )
    }

    pub fn apply_annihilation(
        &self,
        mode: usize,
        v: &FockVector<B::Value>,
    ) -> FockVector<B::Value> {
        self.assert_mode(mode);
        let mut out = FockVector {
            amplitudes: BTreeMap::new(),
            overflow: v.overflow,
        };
        for (occ, amp) in &v.amplitudes {
            if let Some((target, coeff)) = self.annihilation_coefficient(mode, occ) {
                self.accumulate(&mut out.amplitudes, target, self.backend.mul(&coeff, amp));
            }
        }
        out
    }

    pub fn apply_creation(&self, mode: usize, v: &FockVector<B::Value>) -> FockVector<B::Value> {
        self.assert_mode(mode);
        let mut out = FockVector {
            amplitudes: BTreeMap::new(),
            overflow: v.overflow,
        };
        for (occ, amp) in &v.amplitudes {
            if occ.count(mode) >= self.config.cutoff[mode - 1] {
                out.overflow = true;
                continue;
            }
            let (target, coeff) = self.creation_coefficient(mode, occ);
            self.accumulate(&mut out.amplitudes, target, self.backend.mul(&coeff, amp));
        }
        out
    }

    fn diagonal(
        &self,
        v: &FockVector<B::Value>,
        eigen: impl Fn(&Occupation) -> B::Value,
    ) -> FockVector<B::Value> {
        let mut out = FockVector {
            amplitudes: BTreeMap::new(),
            overflow: v.overflow,
        };
        for (occ, amp) in &v.amplitudes {
            self.accumulate(
                &mut out.amplitudes,
                occ.clone(),
                self.backend.mul(&eigen(occ), amp),
            );
        }
        out
    }

    /// `N_i`.
    pub fn apply_number(&self, mode: usize, v: &FockVector<B::Value>) -> FockVector<B::Value> {
        self.assert_mode(mode);
        self.diagonal(v, |occ| self.backend.integer(occ.count(mode) as i64))
    }

    /// `H_i = a+_i a_i - nu`, diagonal with eigenvalue `[n_i] - nu = -p^{n_i}/(1-p)`.
    pub fn apply_subhamiltonian(
        &self,
        mode: usize,
        v: &FockVector<B::Value>,
    ) -> Result<FockVector<B::Value>> {
        self.check_mode(mode)?;
        let nu = self.backend.nu()?;
        Ok(self.diagonal(v, |occ| {
            self.backend
                .sub(&self.backend.bracket(occ.count(mode)), &nu)
        }))
    }

    /// `N_i = sum_{k>=1} (1-p)^k/(1-p^k) (a+_i)^k a_i^k`, truncated where
    /// `a_i^k` annihilates every component. Uses `(1-p)^k/(1-p^k) =
    /// (1-p)^{k-1}/[k]`, which also covers `p = 1`.
    pub fn number_from_ladder(
        &self,
        mode: usize,
        v: &FockVector<B::Value>,
    ) -> FockVector<B::Value> {
        self.assert_mode(mode);
        let max_k = v
            .amplitudes
            .keys()
            .map(|o| o.count(mode))
            .max()
            .unwrap_or(0);
        let b = &self.backend;
        let one_minus_p = b.sub(&b.one(), &b.p_power(1));
        let mut power = b.one();
        let mut out = self.zero_vector();
        out.overflow = v.overflow;
        let mut lowered = v.clone();
        for k in 1..=max_k {
            lowered = self.apply_annihilation(mode, &lowered);
            let mut raised = lowered.clone();
            for _ in 0..k {
                raised = self.apply_creation(mode, &raised);
            }
            let coeff = b.mul(&power, &b.inv_bracket(k));
            out = self.add(&out, &self.scale(&coeff, &raised));
            power = b.mul(&power, &one_minus_p);
        }
        out
    }

    /// `<v|w>`, conjugate-linear in `v`.
    pub fn inner_product(&self, v: &FockVector<B::Value>, w: &FockVector<B::Value>) -> B::Value {
        let mut acc = self.backend.zero();
        for (occ, a) in &v.amplitudes {
            if let Some(b) = w.amplitudes.get(occ) {
                acc = self
                    .backend
                    .add(&acc, &self.backend.mul(&self.backend.conj(a), b));
            }
        }
        acc
    }

    /// `||v||^2` realized numerically.
    pub fn norm_sqr(&self, v: &FockVector<B::Value>) -> f64 {
        v.amplitudes
            .values()
            .map(|a| self.backend.realize(a).norm_sqr())
            .sum()
    }

    pub fn norm(&self, v: &FockVector<B::Value>) -> f64 {
        // `+ 0.0` turns a -0.0 sum into +0.0
        (self.norm_sqr(v) + 0.0).sqrt()
    }

    pub fn add(&self, v: &FockVector<B::Value>, w: &FockVector<B::Value>) -> FockVector<B::Value> {
        let mut out = v.clone();
        out.overflow |= w.overflow;
        for (occ, amp) in &w.amplitudes {
            self.accumulate(&mut out.amplitudes, occ.clone(), amp.clone());
        }
        out
    }

    pub fn sub(&self, v: &FockVector<B::Value>, w: &FockVector<B::Value>) -> FockVector<B::Value> {
        self.add(v, &self.scale(&self.backend.integer(-1), w))
    }

    pub fn scale(&self, c: &B::Value, v: &FockVector<B::Value>) -> FockVector<B::Value> {
        let mut out = FockVector {
            amplitudes: BTreeMap::new(),
            overflow: v.overflow,
        };
        for (occ, amp) in &v.amplitudes {
            self.accumulate(&mut out.amplitudes, occ.clone(), self.backend.mul(c, amp));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn space(n: usize, cutoff: u32, p: f64, theta: f64) -> FockSpace {
        FockSpace::new(
            ModeConfig::uniform(n, cutoff, DeformationParams::new(p, theta).unwrap()).unwrap(),
        )
    }

    fn occ(v: &[u32]) -> Occupation {
        Occupation(v.to_vec())
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn vacuum_is_annihilated() {
        let s = space(2, 4, 0.7, 0.3);
        let vac = s.vacuum();
        assert_eq!(vac.get(&occ(&[0, 0])), Some(&Complex64::new(1.0, 0.0)));
        assert!(s.apply_annihilation(1, &vac).is_zero());
        assert!(s.apply_number(2, &vac).is_zero());
    }

    #[test]
    fn basis_state_matches_creation_route() {
        let s = space(1, 4, 2.0, 0.0);
        let b2 = s.basis_state(&occ(&[2])).unwrap();
        let twice = s.apply_creation(1, &s.apply_creation(1, &s.vacuum()));
        // [2]! = 3 at p = 2
        assert!(close(
            *twice.get(&occ(&[2])).unwrap(),
            Complex64::new(3f64.sqrt(), 0.0)
        ));
        assert!((s.norm_sqr(&b2) - 1.0).abs() < 1e-12);

        let s = space(3, 4, 0.7, PI / 7.0);
        for o in s.config().occupations() {
            let direct = s.basis_state(&o).unwrap();
            let built = s.basis_via_creation(&o).unwrap();
            assert_eq!(built.len(), 1);
            assert!(
                close(*built.get(&o).unwrap(), *direct.get(&o).unwrap()),
                "{o}"
            );
        }
    }

    #[test]
    fn basis_state_out_of_cutoff() {
        let s = space(2, 3, 0.7, 0.0);
        assert!(matches!(
            s.basis_state(&occ(&[4, 0])),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn annihilation_examples() {
        let s = space(2, 4, 0.7, PI / 7.0);
        let q2 = s.config().params.q_pow(2);
        assert!(s
            .apply_annihilation(1, &s.basis_state(&occ(&[0, 3])).unwrap())
            .is_zero());
        let out = s.apply_annihilation(1, &s.basis_state(&occ(&[1, 2])).unwrap());
        assert!(close(*out.get(&occ(&[0, 2])).unwrap(), q2));

        let single = space(1, 4, 0.7, 0.0);
        let out = single.apply_annihilation(1, &single.basis_state(&occ(&[1])).unwrap());
        assert!(close(
            *out.get(&occ(&[0])).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
    }

    #[test]
    fn creation_examples() {
        let s = space(2, 2, 0.7, PI / 5.0);
        let out = s.apply_creation(1, &s.vacuum());
        assert!(close(
            *out.get(&occ(&[1, 0])).unwrap(),
            Complex64::new(1.0, 0.0)
        ));
        let out = s.apply_creation(1, &s.basis_state(&occ(&[0, 1])).unwrap());
        assert!(close(
            *out.get(&occ(&[1, 1])).unwrap(),
            s.config().params.q_pow(-1)
        ));
        let out = s.apply_creation(2, &s.basis_state(&occ(&[0, 2])).unwrap());
        assert!(out.is_zero());
        assert!(out.overflow());
        // sticky
        assert!(s.apply_annihilation(2, &out).overflow());
    }

    #[test]
    fn number_and_subhamiltonian() {
        let s = space(2, 4, 0.5, 0.0);
        let n = s.apply_number(1, &s.basis_state(&occ(&[2, 0])).unwrap());
        assert!(close(
            *n.get(&occ(&[2, 0])).unwrap(),
            Complex64::new(2.0, 0.0)
        ));
        assert!((s.config().params.nu().unwrap() - 2.0).abs() < 1e-15);
        let h = s.apply_subhamiltonian(1, &s.vacuum()).unwrap();
        assert!(close(
            *h.get(&occ(&[0, 0])).unwrap(),
            Complex64::new(-2.0, 0.0)
        ));
        for o in s.config().occupations() {
            let h = s
                .apply_subhamiltonian(2, &s.basis_state(&o).unwrap())
                .unwrap();
            let expected = -(0.5f64.powi(o.count(2) as i32)) / 0.5;
            assert!((h.get(&o).unwrap().re - expected).abs() < 1e-12);
        }
        let classical = space(1, 3, 1.0, 0.0);
        assert!(matches!(
            classical.apply_subhamiltonian(1, &classical.vacuum()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn number_series_reproduces_number_operator() {
        let s = space(1, 6, 0.5, 0.0);
        assert!(s.number_from_ladder(1, &s.vacuum()).is_zero());
        let three = s.basis_state(&occ(&[3])).unwrap();
        let n = s.number_from_ladder(1, &three);
        assert!(close(*n.get(&occ(&[3])).unwrap(), Complex64::new(3.0, 0.0)));

        let exact = FockSpace::exact(
            ModeConfig::uniform(2, 6, DeformationParams::new(0.7, 0.3).unwrap()).unwrap(),
        )
        .unwrap();
        for o in exact.config().occupations() {
            let v = exact.basis_state(&o).unwrap();
            for mode in 1..=2 {
                assert_eq!(
                    exact.number_from_ladder(mode, &v),
                    exact.apply_number(mode, &v)
                );
            }
        }
        let classical = space(1, 5, 1.0, 0.0);
        let v = classical.basis_state(&occ(&[4])).unwrap();
        assert!(close(
            *classical.number_from_ladder(1, &v).get(&occ(&[4])).unwrap(),
            Complex64::new(4.0, 0.0)
        ));
    }

    #[test]
    fn orthonormal_basis() {
        let s = space(2, 3, 0.7, 0.2);
        let a = s.basis_state(&occ(&[1, 2])).unwrap();
        let b = s.basis_state(&occ(&[2, 1])).unwrap();
        assert!(close(s.inner_product(&a, &a), Complex64::new(1.0, 0.0)));
        assert!(close(s.inner_product(&a, &b), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn coefficient_recursion() {
        // |f_i(n + e_i)|^2 - p |f_i(n)|^2 = 1
        for &p in &[0.3, 0.7, 1.5] {
            let s = space(3, 5, p, PI / 7.0);
            for o in s.config().occupations() {
                for mode in 1..=3 {
                    if o.count(mode) >= 5 {
                        continue;
                    }
                    let f_up = s
                        .annihilation_coefficient(mode, &o.raised(mode))
                        .unwrap()
                        .1
                        .norm_sqr();
                    let f = s
                        .annihilation_coefficient(mode, &o)
                        .map_or(0.0, |(_, c)| c.norm_sqr());
                    assert!((f_up - p * f - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn adag_a_is_bracket() {
        let s = space(2, 4, 1.5, 0.4);
        for o in s.config().occupations() {
            let v = s.basis_state(&o).unwrap();
            let out = s.apply_creation(1, &s.apply_annihilation(1, &v));
            let expected = crate::qkernel::q_bracket(o.count(1) as f64, 1.5);
            let got = out.get(&o).map_or(0.0, |c| c.re);
            assert!((got - expected).abs() < 1e-12);
        }
    }

    fn sparse_vector() -> impl Strategy<Value = Vec<(Vec<u32>, (f64, f64))>> {
        proptest::collection::vec(
            (
                proptest::collection::vec(0u32..4, 3),
                (-1.0f64..1.0, -1.0f64..1.0),
            ),
            1..8,
        )
    }

    proptest! {
        #[test]
        fn creation_is_adjoint_of_annihilation(
            v in sparse_vector(), w in sparse_vector(), mode in 1usize..=3,
            p in 0.2f64..1.8, theta in 0.0f64..3.0,
        ) {
            let s = space(3, 5, p, theta);
            let build = |raw: &[(Vec<u32>, (f64, f64))]| s.from_components(
                raw.iter().map(|(o, (re, im))| (Occupation(o.clone()), Complex64::new(*re, *im))));
            let (v, w) = (build(&v), build(&w));
            let lhs = s.inner_product(&s.apply_creation(mode, &v), &w);
            let rhs = s.inner_product(&v, &s.apply_annihilation(mode, &w));
            prop_assert!((lhs - rhs).norm() < 1e-11);
        }
    }
}
