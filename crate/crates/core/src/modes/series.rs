use std::collections::BTreeMap;
use std::fmt::Debug;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{star_norm, Mode, WeightSequence};

/// Values a Fourier coefficient can take.
pub trait Coefficient: Clone + PartialEq + Debug + Send + Sync {
    fn add_assign(&mut self, other: &Self);
    fn scaled(&self, c: Complex64) -> Self;
    fn conj(&self) -> Self;
    /// `|·|` for scalars, sup over components for vectors.
    fn magnitude(&self) -> f64;
    fn is_zero(&self) -> bool;
    /// Largest componentwise modulus of `self − other`.
    fn distance(&self, other: &Self) -> f64;
}

impl Coefficient for Complex64 {
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn scaled(&self, c: Complex64) -> Self {
        self * c
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

/// Complex vector over the slots of a [`Window`](crate::modes::Window).
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(pub Vec<Complex64>);

impl CVec {
    pub fn zeros(len: usize) -> Self {
        CVec(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Coefficient for CVec {
    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
    fn scaled(&self, c: Complex64) -> Self {
        CVec(self.0.iter().map(|a| a * c).collect())
    }
    fn conj(&self) -> Self {
        CVec(self.0.iter().map(|a| a.conj()).collect())
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.re == 0.0 && a.im == 0.0)
    }
    fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Sparse map `Mode → coefficient`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries<C> {
    terms: BTreeMap<Mode, C>,
    hermitian: bool,
}

pub type ScalarSeries = FourierSeries<Complex64>;
pub type VectorSeries = FourierSeries<CVec>;

impl<C: Coefficient> Default for FourierSeries<C> {
    fn default() -> Self {
        FourierSeries {
            terms: BTreeMap::new(),
            hermitian: false,
        }
    }
}

impl<C: Coefficient> FourierSeries<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (Mode, C)>>(terms: I) -> Self {
        let mut s = Self::new();
        for (m, c) in terms {
            s.accumulate(m, &c);
        }
        s
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    pub fn set_hermitian(&mut self, flag: bool) {
        self.hermitian = flag;
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, nu: &Mode) -> Option<&C> {
        self.terms.get(nu)
    }

    pub fn insert(&mut self, nu: Mode, c: C) {
        self.terms.insert(nu, c);
    }

    pub fn remove(&mut self, nu: &Mode) -> Option<C> {
        self.terms.remove(nu)
    }

    /// Adds `c` to the coefficient at `nu`.
    pub fn accumulate(&mut self, nu: Mode, c: &C) {
        match self.terms.get_mut(&nu) {
            Some(slot) => slot.add_assign(c),
            None => {
                self.terms.insert(nu, c.clone());
            }
        }
    }

    /// Drops coefficients that are exactly zero.
    pub fn prune_zeros(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &C)> {
        self.terms.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Mode> {
        self.terms.keys()
    }

    /// Terms sorted by `|ν|⋆`, then lexicographically.
    pub fn canonical(&self, w: &WeightSequence) -> Vec<(&Mode, &C)> {
        let mut v: Vec<(f64, &Mode, &C)> = self
            .terms
            .iter()
            .map(|(m, c)| (star_norm(m, w), m, c))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        v.into_iter().map(|(_, m, c)| (m, c)).collect()
    }

    /// Largest `|C_{−ν} − conj(C_ν)|` over stored modes (missing mirrors count as zero).
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            let mirror = self.terms.get(&-m);
            let d = match mirror {
                Some(cm) => cm.distance(&c.conj()),
                None => c.magnitude(),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// Largest coefficient magnitude.
    pub fn sup(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.magnitude())
            .fold(0.0, f64::max)
    }

    /// Largest coefficientwise distance; modes missing on one side count as zero.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            let d = match other.terms.get(m) {
                Some(o) => c.distance(o),
                None => c.magnitude(),
            };
            worst = worst.max(d);
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.magnitude());
            }
        }
        worst
    }

    pub fn map<D: Coefficient>(&self, mut f: impl FnMut(&Mode, &C) -> D) -> FourierSeries<D> {
        FourierSeries {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), f(m, c)))
                .collect(),
            hermitian: self.hermitian,
        }
    }
}

/// Weighted norm `Σ_ν |F_ν|_X e^{s|ν|⋆}`, summed in canonical order.
pub fn series_norm<C: Coefficient>(
    f: &FourierSeries<C>,
    s: f64,
    w: &WeightSequence,
) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("series norm needs s ≥ 0, got {s}")));
    }
    let mut acc = 0.0;
    for (m, c) in f.canonical(w) {
        let n = star_norm(m, w);
        if n.is_infinite() {
            return Err(Error::domain(format!("mode {m} has infinite ⋆-norm")));
        }
        acc += c.magnitude() * (s * n).exp();
    }
    Ok(acc)
}

/// Product of two scalar series (convolution of coefficients).
pub fn convolve(a: &ScalarSeries, b: &ScalarSeries) -> ScalarSeries {
    let mut out = ScalarSeries::new();
    for (ma, ca) in a.iter() {
        for (mb, cb) in b.iter() {
            out.accumulate(ma + mb, &(ca * cb));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn norm_examples() {
        let w = fixtures::fix_a_weights();
        let f =
            ScalarSeries::from_terms([(Mode::unit(0), c(0.5, 0.0)), (-Mode::unit(0), c(0.5, 0.0))]);
        assert!((series_norm(&f, 0.0, &w).unwrap() - 1.0).abs() < 1e-15);
        let fa = fixtures::fix_a_potential();
        let expected = 2.0 * (0.5 * 0.5f64.exp() + 0.5 * 1f64.exp());
        assert!((series_norm(&fa, 0.5, &w).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 4.367_00).abs() < 1e-5);
        assert_eq!(series_norm(&ScalarSeries::new(), 0.5, &w).unwrap(), 0.0);
        let bad = ScalarSeries::from_terms([(Mode::unit(5), c(1.0, 0.0))]);
        assert!(series_norm(&bad, 0.5, &w).is_err());
    }

    #[test]
    fn vector_norm_uses_sup() {
        let w = fixtures::fix_a_weights();
        let v = VectorSeries::from_terms([(
            Mode::unit(0),
            CVec(vec![c(0.0, 0.0), c(3.0, 4.0), c(1.0, 0.0)]),
        )]);
        assert!((series_norm(&v, 0.0, &w).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_of_cosines() {
        let cos0 =
            ScalarSeries::from_terms([(Mode::unit(0), c(0.5, 0.0)), (-Mode::unit(0), c(0.5, 0.0))]);
        let sq = convolve(&cos0, &cos0);
        assert_eq!(sq.get(&Mode::zero()), Some(&c(0.5, 0.0)));
        assert_eq!(sq.get(&Mode::from_pairs([(0, 2)])), Some(&c(0.25, 0.0)));
        assert_eq!(sq.hermitian_defect(), 0.0);
    }

    #[test]
    fn canonical_order_by_norm_then_lex() {
        let w = fixtures::fix_a_weights();
        let f = fixtures::fix_a_potential();
        let order: Vec<String> = f.canonical(&w).iter().map(|(m, _)| m.to_string()).collect();
        assert_eq!(order, ["0:-1", "0:1", "0:-1;1:-1", "0:1;1:1"]);
    }
}
