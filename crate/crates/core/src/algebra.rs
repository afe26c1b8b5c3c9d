//! Finitely supported elements of the twisted group algebra ℂ(G, σ).
//!
//! An [`AlgebraElement`] is at the same time the function `f` and its Fourier
//! coefficient sequence `x̂`. Products use the σ-convolution
//! `(ξ ∗_σ η)(k) = Σ_g ξ(g) σ(g, g⁻¹k) η(g⁻¹k)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::groups::{GroupDescriptor, GroupElement};

/// Coefficients with modulus below this are dropped after arithmetic.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// A finitely supported complex function on a group, stored sparsely in
/// canonical element order.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    group: GroupDescriptor,
    terms: BTreeMap<GroupElement, Complex64>,
}

impl AlgebraElement {
    pub fn zero(group: &GroupDescriptor) -> Self {
        AlgebraElement {
            group: *group,
            terms: BTreeMap::new(),
        }
    }

    /// `δ_g`.
    pub fn delta(group: &GroupDescriptor, g: GroupElement) -> Result<Self> {
        Self::from_terms(group, [(g, Complex64::new(1.0, 0.0))])
    }

    /// Characteristic function of a finite set.
    pub fn indicator<'a, I>(group: &GroupDescriptor, set: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        Self::from_terms(
            group,
            set.into_iter().map(|g| (g.clone(), Complex64::new(1.0, 0.0))),
        )
    }

    /// Sum of `c·δ_g` over the given pairs; repeated elements accumulate.
    pub fn from_terms<I>(group: &GroupDescriptor, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (GroupElement, Complex64)>,
    {
        let mut out = BTreeMap::new();
        for (g, c) in terms {
            group.check(&g)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "coefficient {c} at {} is not finite",
                    group.format(&g)
                )));
            }
            *out.entry(g).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        Ok(Self::pruned(*group, out))
    }

    fn pruned(group: GroupDescriptor, mut terms: BTreeMap<GroupElement, Complex64>) -> Self {
        terms.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        AlgebraElement { group, terms }
    }

    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    /// The Fourier coefficient `x̂(g)`.
    pub fn coefficient(&self, g: &GroupElement) -> Complex64 {
        self.terms.get(g).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&GroupElement, &Complex64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl ExactSizeIterator<Item = &GroupElement> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest length `L(g)` over the support, 0 for the zero element.
    pub fn max_length(&self) -> f64 {
        self.support()
            .map(|g| self.group.word_length(g))
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::pruned(
            self.group,
            self.terms.iter().map(|(g, v)| (g.clone(), v * c)).collect(),
        )
    }

    /// Pointwise map of the coefficients, `g ↦ op(g, f(g))`.
    pub fn map<F>(&self, mut op: F) -> Self
    where
        F: FnMut(&GroupElement, Complex64) -> Complex64,
    {
        Self::pruned(
            self.group,
            self.terms
                .iter()
                .map(|(g, v)| (g.clone(), op(g, *v)))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, sign: Complex64) -> Result<Self> {
        same_group(self.group, other.group)?;
        let mut terms = self.terms.clone();
        for (g, c) in &other.terms {
            *terms.entry(g.clone()).or_default() += sign * c;
        }
        Ok(Self::pruned(self.group, terms))
    }

    /// `τ(f) = f(e)`.
    pub fn tau(&self) -> Complex64 {
        self.coefficient(&self.group.identity())
    }

    pub fn norm(&self, kind: &NormKind) -> f64 {
        match kind {
            NormKind::L1 => self.terms.values().map(|c| c.norm()).sum(),
            NormKind::L2 => self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::L2Weighted(kappa) => self
                .terms
                .iter()
                .map(|(g, c)| (c.norm() * kappa.evaluate(g)).powi(2))
                .sum::<f64>()
                .sqrt(),
            NormKind::LInfWeighted(kappa) => self
                .terms
                .iter()
                .map(|(g, c)| c.norm() * kappa.evaluate(g))
                .fold(0.0, f64::max),
        }
    }
}

fn same_group(left: GroupDescriptor, right: GroupDescriptor) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::GroupMismatch { left, right })
    }
}

/// Which norm [`AlgebraElement::norm`] computes.
#[derive(Clone, Debug)]
pub enum NormKind {
    L1,
    L2,
    /// `‖fκ‖₂`.
    L2Weighted(WeightFunction),
    /// `sup |fκ|`.
    LInfWeighted(WeightFunction),
}

/// `ξ ∗_σ η`.
pub fn twisted_convolve(f: &AlgebraElement, h: &AlgebraElement, sigma: &Cocycle) -> Result<AlgebraElement> {
    same_group(f.group, h.group)?;
    same_group(f.group, sigma.group())?;
    let group = f.group;
    let mut out: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
    for (g, a) in &f.terms {
        for (m, b) in &h.terms {
            let k = group.mul(g, m);
            *out.entry(k).or_default() += a * b * sigma.evaluate(g, m);
        }
    }
    Ok(AlgebraElement::pruned(group, out))
}

/// `f*(g) = conj(σ(g, g⁻¹)) · conj(f(g⁻¹))`.
pub fn involution(f: &AlgebraElement, sigma: &Cocycle) -> Result<AlgebraElement> {
    same_group(f.group, sigma.group())?;
    let group = f.group;
    let terms = f
        .terms
        .iter()
        .map(|(h, c)| {
            let g = group.invert(h);
            let phase = sigma.evaluate(&g, h).conj();
            (g, phase * c.conj())
        })
        .collect();
    Ok(AlgebraElement::pruned(group, terms))
}

/// One coefficient in text form: a word in the group syntax and a complex
/// value. Shared by element files, phase tables and multiplier tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub word: String,
    pub re: f64,
    pub im: f64,
}

impl TermEntry {
    pub fn new(group: &GroupDescriptor, g: &GroupElement, z: Complex64) -> Self {
        TermEntry {
            word: group.format(g),
            re: z.re,
            im: z.im,
        }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Serializable weight family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightDescriptor {
    /// `(1 + L)^s`.
    Poly { s: f64 },
    /// `a^L`.
    Exp { a: f64 },
    /// `exp(t L²)`.
    Gauss { t: f64 },
    /// Explicit values (each ≥ 1), 1 elsewhere.
    Custom { entries: Vec<WeightEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub word: String,
    pub value: f64,
}

/// A weight `κ: G → [1, ∞)` on a specific group.
#[derive(Clone, Debug)]
pub struct WeightFunction {
    group: GroupDescriptor,
    descriptor: WeightDescriptor,
    table: FxHashMap<GroupElement, f64>,
}

impl WeightFunction {
    pub fn new(group: &GroupDescriptor, descriptor: &WeightDescriptor) -> Result<Self> {
        let mut table = FxHashMap::default();
        match descriptor {
            WeightDescriptor::Poly { s } if !(s.is_finite() && *s >= 0.0) => {
                return Err(Error::InvalidWeight(format!("exponent s = {s} must be ≥ 0")))
            }
            WeightDescriptor::Exp { a } if !(a.is_finite() && *a >= 1.0) => {
                return Err(Error::InvalidWeight(format!("base a = {a} must be ≥ 1")))
            }
            WeightDescriptor::Gauss { t } if !(t.is_finite() && *t >= 0.0) => {
                return Err(Error::InvalidWeight(format!("rate t = {t} must be ≥ 0")))
            }
            WeightDescriptor::Custom { entries } => {
                for e in entries {
                    if !(e.value.is_finite() && e.value >= 1.0) {
                        return Err(Error::InvalidWeight(format!(
                            "κ({}) = {} is below 1",
                            e.word, e.value
                        )));
                    }
                    table.insert(group.parse(&e.word)?, e.value);
                }
            }
            _ => {}
        }
        Ok(WeightFunction {
            group: *group,
            descriptor: descriptor.clone(),
            table,
        })
    }

    pub fn poly(group: &GroupDescriptor, s: f64) -> Result<Self> {
        Self::new(group, &WeightDescriptor::Poly { s })
    }

    pub fn exp(group: &GroupDescriptor, a: f64) -> Result<Self> {
        Self::new(group, &WeightDescriptor::Exp { a })
    }

    pub fn gauss(group: &GroupDescriptor, t: f64) -> Result<Self> {
        Self::new(group, &WeightDescriptor::Gauss { t })
    }

    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    pub fn descriptor(&self) -> &WeightDescriptor {
        &self.descriptor
    }

    pub fn evaluate(&self, g: &GroupElement) -> f64 {
        match &self.descriptor {
            WeightDescriptor::Custom { .. } => self.table.get(g).copied().unwrap_or(1.0),
            _ => self
                .radial(self.group.word_length(g))
                .expect("built-in weights are radial"),
        }
    }

    /// The weight as a function of `L(g)`, when it depends on nothing else.
    pub fn radial(&self, length: f64) -> Option<f64> {
        match self.descriptor {
            WeightDescriptor::Poly { s } => Some((1.0 + length).powf(s)),
            WeightDescriptor::Exp { a } => Some(a.powf(length)),
            WeightDescriptor::Gauss { t } => Some((t * length * length).exp()),
            WeightDescriptor::Custom { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{enumerate, LengthKind, Region};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z(n: usize) -> GroupDescriptor {
        GroupDescriptor::lattice(n, LengthKind::L1).unwrap()
    }

    fn half_flux() -> Cocycle {
        Cocycle::sigma_theta(&z(2), &[0.0, PI, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn delta_products() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let sigma = crate::cocycles::Cocycle::coboundary(
            &f2,
            crate::cocycles::PhaseFamily::HashedPhase { seed: 5 },
        )
        .unwrap();
        let a = f2.parse("ab").unwrap();
        let b = f2.parse("Ba").unwrap();
        let p = twisted_convolve(
            &AlgebraElement::delta(&f2, a.clone()).unwrap(),
            &AlgebraElement::delta(&f2, b.clone()).unwrap(),
            &sigma,
        )
        .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&f2.parse("aa").unwrap()), sigma.evaluate(&a, &b));
    }

    #[test]
    fn torus_square_cancels_cross_term() {
        let g = z(2);
        let x = AlgebraElement::indicator(
            &g,
            &[GroupElement::lattice(&[1, 0]), GroupElement::lattice(&[0, 1])],
        )
        .unwrap();
        let sq = twisted_convolve(&x, &x, &half_flux()).unwrap();
        // brute-force double sum
        let mut oracle: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        for (p, a) in x.terms() {
            for (q, b) in x.terms() {
                let phase = if *p == GroupElement::lattice(&[1, 0]) && *q == GroupElement::lattice(&[0, 1]) {
                    -1.0
                } else {
                    1.0
                };
                *oracle.entry(g.mul(p, q)).or_default() += a * b * phase;
            }
        }
        assert_eq!(sq.len(), 2);
        for (k, v) in oracle {
            assert!((sq.coefficient(&k) - v).norm() < 1e-15);
        }
        assert!(sq.coefficient(&GroupElement::lattice(&[1, 1])).norm() == 0.0);
    }

    #[test]
    fn right_unit() {
        let g = z(2);
        let f = AlgebraElement::from_terms(
            &g,
            [
                (GroupElement::lattice(&[1, 2]), c(0.5, -1.0)),
                (GroupElement::lattice(&[-3, 0]), c(2.0, 0.25)),
            ],
        )
        .unwrap();
        let e = AlgebraElement::delta(&g, g.identity()).unwrap();
        assert_eq!(twisted_convolve(&f, &e, &half_flux()).unwrap(), f);
        assert_eq!(twisted_convolve(&e, &f, &half_flux()).unwrap(), f);
    }

    #[test]
    fn involution_examples() {
        let g = z(1);
        let sigma = Cocycle::trivial(&g);
        let f = AlgebraElement::from_terms(&g, [(GroupElement::lattice(&[1]), c(2.0, 0.0))]).unwrap();
        let s = involution(&f, &sigma).unwrap();
        assert_eq!(s.coefficient(&GroupElement::lattice(&[-1])), c(2.0, 0.0));

        let t = AlgebraElement::delta(&z(2), GroupElement::lattice(&[1, 1])).unwrap();
        let ts = involution(&t, &half_flux()).unwrap();
        let v = ts.coefficient(&GroupElement::lattice(&[-1, -1]));
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);

        let e = AlgebraElement::delta(&g, g.identity()).unwrap();
        assert_eq!(involution(&e, &sigma).unwrap(), e);
    }

    #[test]
    fn trace_values() {
        let g = GroupDescriptor::heisenberg();
        let e = AlgebraElement::delta(&g, g.identity()).unwrap();
        assert_eq!(e.tau(), c(1.0, 0.0));
        let x = AlgebraElement::delta(&g, GroupElement::heisenberg(1, 0, 0)).unwrap();
        assert_eq!(x.tau(), c(0.0, 0.0));
    }

    #[test]
    fn pruning_and_mismatch() {
        let g = z(1);
        let f = AlgebraElement::from_terms(
            &g,
            [
                (GroupElement::lattice(&[1]), c(1.0, 0.0)),
                (GroupElement::lattice(&[1]), c(-1.0, 0.0)),
                (GroupElement::lattice(&[2]), c(1e-16, 0.0)),
            ],
        )
        .unwrap();
        assert!(f.is_empty());
        assert!(AlgebraElement::delta(&g, GroupElement::lattice(&[1, 1])).is_err());
        let h = AlgebraElement::zero(&z(2));
        assert!(f.add(&h).is_err());
        assert!(twisted_convolve(&f, &h, &Cocycle::trivial(&g)).is_err());
    }

    #[test]
    fn norm_examples() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let s1 = enumerate(&f2, Region::Sphere(1)).unwrap();
        let chi = AlgebraElement::indicator(&f2, s1.iter()).unwrap();
        assert_eq!(chi.norm(&NormKind::L2), 2.0);
        let k = WeightFunction::poly(&f2, 2.0).unwrap();
        assert_eq!(chi.norm(&NormKind::L2Weighted(k.clone())), 8.0);
        assert_eq!(chi.norm(&NormKind::LInfWeighted(k)), 4.0);

        let g = z(1);
        let f = AlgebraElement::indicator(&g, &[GroupElement::lattice(&[1]), GroupElement::lattice(&[-1])])
            .unwrap();
        let k = WeightFunction::exp(&g, 2.0).unwrap();
        assert!((f.norm(&NormKind::L2Weighted(k)) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let d = AlgebraElement::delta(&g, GroupElement::lattice(&[5])).unwrap();
        assert_eq!(d.norm(&NormKind::L1), 1.0);
        assert_eq!(d.norm(&NormKind::L2), 1.0);
    }

    #[test]
    fn weights_are_at_least_one() {
        let g = GroupDescriptor::dihedral();
        for w in [
            WeightFunction::poly(&g, 1.5).unwrap(),
            WeightFunction::exp(&g, 1.2).unwrap(),
            WeightFunction::gauss(&g, 0.3).unwrap(),
        ] {
            assert_eq!(w.evaluate(&g.identity()), 1.0);
            for x in enumerate(&g, Region::Ball(5.0)).unwrap().iter() {
                assert!(w.evaluate(x) >= 1.0);
            }
        }
        assert!(WeightFunction::exp(&g, 0.5).is_err());
        let bad = WeightDescriptor::Custom {
            entries: vec![WeightEntry { word: "s".into(), value: 0.5 }],
        };
        assert!(WeightFunction::new(&g, &bad).is_err());
    }
}
