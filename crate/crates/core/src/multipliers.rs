//! Multipliers `φ: G → ℂ`: the Fejér, Abel–Poisson, polynomial and Gauss
//! families, their action on elements, positive and negative definiteness
//! tests, and certified truncation.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::{BigRational, Rational64};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, TermEntry, WeightFunction};
use crate::error::{Error, Result};
use crate::groups::{enumerate, Ball, GroupDescriptor, GroupElement, LengthKind, Region};

/// Default cap on Gram matrix dimension.
pub const DEFAULT_MAX_DIM: usize = 4000;
/// Default tolerance on extreme Gram eigenvalues.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Serializable multiplier family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplierDescriptor {
    /// `φ(g) = |gF ∩ F| / |F|`.
    Fejer { set: Vec<String> },
    /// `r^{L(g)}`, with the group's length unless another is named.
    AbelPoisson {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<LengthKind>,
    },
    /// `(1 + t L(g))^{-q}`.
    PolyDecay { t: f64, q: u32 },
    /// `r^{|g|₂²}` on lattices.
    Gauss { r: f64 },
    /// `L(g)^p`, the usual negative definite candidates.
    LengthPower {
        power: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<LengthKind>,
    },
    /// `e^{-t ψ(g)}`.
    Exponential { t: f64, psi: Box<MultiplierDescriptor> },
    /// `φ χ_A`.
    Truncated {
        base: Box<MultiplierDescriptor>,
        within: TruncationSet,
    },
    /// Explicit values, zero elsewhere.
    Table { entries: Vec<TermEntry> },
}

/// The set `A` of a truncated multiplier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationSet {
    /// `{g : L(g) ≤ r}`.
    Ball(f64),
    Set(Vec<String>),
}

/// What is known about `supp φ`.
#[derive(Clone, Debug, PartialEq)]
pub enum SupportHint {
    /// Exactly these elements (possibly with a few zero values).
    Finite(Vec<GroupElement>),
    /// Contained in this ball.
    Ball(f64),
    Full,
}

#[derive(Clone, Debug)]
enum Kind {
    Fejer {
        set: FxHashSet<GroupElement>,
        elements: Vec<GroupElement>,
    },
    AbelPoisson {
        r: f64,
        length: GroupDescriptor,
    },
    PolyDecay {
        t: f64,
        q: u32,
    },
    Gauss {
        r: f64,
        squared: GroupDescriptor,
    },
    LengthPower {
        power: f64,
        length: GroupDescriptor,
    },
    Exponential {
        t: f64,
        psi: Box<Multiplier>,
    },
    TruncatedBall {
        base: Box<Multiplier>,
        radius: f64,
    },
    TruncatedSet {
        base: Box<Multiplier>,
        set: FxHashSet<GroupElement>,
    },
    Table(FxHashMap<GroupElement, Complex64>),
}

/// A multiplier compiled for a specific group.
#[derive(Clone, Debug)]
pub struct Multiplier {
    group: GroupDescriptor,
    descriptor: MultiplierDescriptor,
    kind: Kind,
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidMultiplier(format!("{name} = {v} must lie in (0, 1)")))
    }
}

/// Whether two length functions on the same group share their length key.
fn same_key(a: &GroupDescriptor, b: &GroupDescriptor) -> bool {
    let class = |l: LengthKind| match l {
        LengthKind::Word | LengthKind::L1 => 0,
        LengthKind::L2 | LengthKind::L2Squared => 1,
    };
    a.kind() == b.kind() && class(a.length_kind()) == class(b.length_kind())
}

impl Multiplier {
    pub fn new(group: &GroupDescriptor, descriptor: &MultiplierDescriptor) -> Result<Self> {
        let with = |length: &Option<LengthKind>| match length {
            Some(l) => group.with_length(*l),
            None => Ok(*group),
        };
        let kind = match descriptor {
            MultiplierDescriptor::Fejer { set } => {
                let mut elements = set.iter().map(|w| group.parse(w)).collect::<Result<Vec<_>>>()?;
                elements.sort();
                elements.dedup();
                if elements.is_empty() {
                    return Err(Error::InvalidMultiplier("Fejér set is empty".into()));
                }
                Kind::Fejer {
                    set: elements.iter().cloned().collect(),
                    elements,
                }
            }
            MultiplierDescriptor::AbelPoisson { r, length } => {
                open_unit("r", *r)?;
                Kind::AbelPoisson {
                    r: *r,
                    length: with(length)?,
                }
            }
            MultiplierDescriptor::PolyDecay { t, q } => {
                if !(t.is_finite() && *t > 0.0) {
                    return Err(Error::InvalidMultiplier(format!("t = {t} must be positive")));
                }
                Kind::PolyDecay { t: *t, q: *q }
            }
            MultiplierDescriptor::Gauss { r } => {
                open_unit("r", *r)?;
                if !group.is_lattice() {
                    return Err(Error::InvalidMultiplier(format!(
                        "Gauss kernels need a lattice, not {group}"
                    )));
                }
                Kind::Gauss {
                    r: *r,
                    squared: group.with_length(LengthKind::L2Squared)?,
                }
            }
            MultiplierDescriptor::LengthPower { power, length } => {
                if !(power.is_finite() && *power >= 0.0) {
                    return Err(Error::InvalidMultiplier(format!("power {power} must be ≥ 0")));
                }
                Kind::LengthPower {
                    power: *power,
                    length: with(length)?,
                }
            }
            MultiplierDescriptor::Exponential { t, psi } => {
                if !(t.is_finite() && *t >= 0.0) {
                    return Err(Error::InvalidMultiplier(format!("t = {t} must be ≥ 0")));
                }
                Kind::Exponential {
                    t: *t,
                    psi: Box::new(Multiplier::new(group, psi)?),
                }
            }
            MultiplierDescriptor::Truncated { base, within } => {
                let base = Box::new(Multiplier::new(group, base)?);
                match within {
                    TruncationSet::Ball(radius) => {
                        if radius.is_nan() || *radius < 0.0 {
                            return Err(Error::InvalidRadius(*radius));
                        }
                        Kind::TruncatedBall { base, radius: *radius }
                    }
                    TruncationSet::Set(words) => Kind::TruncatedSet {
                        base,
                        set: words.iter().map(|w| group.parse(w)).collect::<Result<_>>()?,
                    },
                }
            }
            MultiplierDescriptor::Table { entries } => {
                let mut table = FxHashMap::default();
                for e in entries {
                    let z = e.value();
                    if !(z.re.is_finite() && z.im.is_finite()) {
                        return Err(Error::InvalidMultiplier(format!("φ({}) is not finite", e.word)));
                    }
                    table.insert(group.parse(&e.word)?, z);
                }
                Kind::Table(table)
            }
        };
        Ok(Multiplier {
            group: *group,
            descriptor: descriptor.clone(),
            kind,
        })
    }

    pub fn fejer(group: &GroupDescriptor, set: &[GroupElement]) -> Result<Self> {
        for g in set {
            group.check(g)?;
        }
        let set = set.iter().map(|g| group.format(g)).collect();
        Self::new(group, &MultiplierDescriptor::Fejer { set })
    }

    pub fn abel_poisson(group: &GroupDescriptor, r: f64) -> Result<Self> {
        Self::new(group, &MultiplierDescriptor::AbelPoisson { r, length: None })
    }

    pub fn poly_decay(group: &GroupDescriptor, t: f64, q: u32) -> Result<Self> {
        Self::new(group, &MultiplierDescriptor::PolyDecay { t, q })
    }

    pub fn gauss(group: &GroupDescriptor, r: f64) -> Result<Self> {
        Self::new(group, &MultiplierDescriptor::Gauss { r })
    }

    pub fn length_power(group: &GroupDescriptor, power: f64) -> Result<Self> {
        Self::new(group, &MultiplierDescriptor::LengthPower { power, length: None })
    }

    pub fn table(group: &GroupDescriptor, values: &[(GroupElement, Complex64)]) -> Result<Self> {
        for (g, _) in values {
            group.check(g)?;
        }
        let entries = values.iter().map(|(g, z)| TermEntry::new(group, g, *z)).collect();
        Self::new(group, &MultiplierDescriptor::Table { entries })
    }

    /// The table multiplier with the coefficients of `f`.
    pub fn from_element(f: &AlgebraElement) -> Result<Self> {
        let values: Vec<_> = f.terms().map(|(g, c)| (g.clone(), *c)).collect();
        Self::table(&f.group(), &values)
    }

    /// Table multipliers as elements, for the element file format.
    pub fn to_element(&self) -> Option<AlgebraElement> {
        match &self.kind {
            Kind::Table(t) => {
                AlgebraElement::from_terms(&self.group, t.iter().map(|(g, z)| (g.clone(), *z))).ok()
            }
            _ => None,
        }
    }

    /// `e^{-tψ}`.
    pub fn exponential(&self, t: f64) -> Result<Self> {
        Self::new(
            &self.group,
            &MultiplierDescriptor::Exponential {
                t,
                psi: Box::new(self.descriptor.clone()),
            },
        )
    }

    /// `φ χ_{Ball(radius)}`.
    pub fn truncated(&self, radius: f64) -> Result<Self> {
        Self::new(
            &self.group,
            &MultiplierDescriptor::Truncated {
                base: Box::new(self.descriptor.clone()),
                within: TruncationSet::Ball(radius),
            },
        )
    }

    /// The table of `φψ` on `set`.
    pub fn product_table(&self, other: &Multiplier, set: &[GroupElement]) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::GroupMismatch {
                left: self.group,
                right: other.group,
            });
        }
        let values: Vec<_> = set
            .iter()
            .map(|g| (g.clone(), self.evaluate(g) * other.evaluate(g)))
            .collect();
        Self::table(&self.group, &values)
    }

    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    pub fn descriptor(&self) -> &MultiplierDescriptor {
        &self.descriptor
    }

    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        let real = |x: f64| Complex64::new(x, 0.0);
        match &self.kind {
            Kind::Fejer { set, elements } => {
                real(fejer_count(&self.group, set, elements, g) as f64 / elements.len() as f64)
            }
            Kind::AbelPoisson { r, length } => real(r.powf(length.word_length(g))),
            Kind::PolyDecay { t, q } => real(poly(*t, *q, self.group.word_length(g))),
            Kind::Gauss { r, squared } => real(r.powf(squared.word_length(g))),
            Kind::LengthPower { power, length } => real(length_power(*power, length.word_length(g))),
            Kind::Exponential { t, psi } => (-*t * psi.evaluate(g)).exp(),
            Kind::TruncatedBall { base, radius } => {
                if self.group.word_length(g) <= *radius {
                    base.evaluate(g)
                } else {
                    Complex64::default()
                }
            }
            Kind::TruncatedSet { base, set } => {
                if set.contains(g) {
                    base.evaluate(g)
                } else {
                    Complex64::default()
                }
            }
            Kind::Table(t) => t.get(g).copied().unwrap_or_default(),
        }
    }

    /// Exact value of a Fejér multiplier.
    pub fn exact(&self, g: &GroupElement) -> Option<Rational64> {
        match &self.kind {
            Kind::Fejer { set, elements } => Some(Rational64::new(
                fejer_count(&self.group, set, elements, g) as i64,
                elements.len() as i64,
            )),
            _ => None,
        }
    }

    pub fn support_hint(&self) -> SupportHint {
        match &self.kind {
            Kind::Fejer { elements, .. } => {
                let mut out: Vec<GroupElement> = elements
                    .iter()
                    .flat_map(|a| elements.iter().map(move |b| (a, b)))
                    .map(|(a, b)| self.group.mul(a, &self.group.invert(b)))
                    .collect();
                self.sort_canonical(&mut out);
                SupportHint::Finite(out)
            }
            Kind::Table(t) => {
                let mut out: Vec<GroupElement> =
                    t.iter().filter(|(_, z)| **z != Complex64::default()).map(|(g, _)| g.clone()).collect();
                self.sort_canonical(&mut out);
                SupportHint::Finite(out)
            }
            Kind::TruncatedBall { base, radius } => match base.support_hint() {
                SupportHint::Finite(v) => SupportHint::Finite(
                    v.into_iter().filter(|g| self.group.word_length(g) <= *radius).collect(),
                ),
                SupportHint::Ball(r) => SupportHint::Ball(r.min(*radius)),
                SupportHint::Full => SupportHint::Ball(*radius),
            },
            Kind::TruncatedSet { base, set } => {
                let mut out: Vec<GroupElement> = match base.support_hint() {
                    SupportHint::Finite(v) => v.into_iter().filter(|g| set.contains(g)).collect(),
                    _ => set.iter().cloned().collect(),
                };
                self.sort_canonical(&mut out);
                SupportHint::Finite(out)
            }
            _ => SupportHint::Full,
        }
    }

    fn sort_canonical(&self, v: &mut Vec<GroupElement>) {
        v.sort_by_cached_key(|g| (self.group.length_key(g), g.clone()));
        v.dedup();
    }

    /// `φ` as a function of the group's length key, when it is one.
    pub fn profile(&self, key: u64) -> Option<Complex64> {
        let real = |x: f64| Some(Complex64::new(x, 0.0));
        let group = &self.group;
        match &self.kind {
            Kind::AbelPoisson { r, length } if same_key(group, length) => real(r.powf(length.key_length(key))),
            Kind::PolyDecay { t, q } => real(poly(*t, *q, group.key_length(key))),
            Kind::Gauss { r, squared } if same_key(group, squared) => real(r.powf(key as f64)),
            Kind::LengthPower { power, length } if same_key(group, length) => {
                real(length_power(*power, length.key_length(key)))
            }
            Kind::Exponential { t, psi } => psi.profile(key).map(|z| (-*t * z).exp()),
            Kind::TruncatedBall { base, radius } => {
                if group.key_length(key) <= *radius {
                    base.profile(key)
                } else {
                    Some(Complex64::default())
                }
            }
            _ => None,
        }
    }
}

fn poly(t: f64, q: u32, length: f64) -> f64 {
    (1.0 + t * length).powi(-(q as i32))
}

fn length_power(power: f64, length: f64) -> f64 {
    if power == 0.0 {
        1.0
    } else {
        length.powf(power)
    }
}

/// `|gF ∩ F|`.
fn fejer_count(group: &GroupDescriptor, set: &FxHashSet<GroupElement>, elements: &[GroupElement], g: &GroupElement) -> usize {
    elements.iter().filter(|f| set.contains(&group.mul(g, f))).count()
}

/// The pointwise product `φ f`, which is `M_φ` on Fourier coefficients.
pub fn apply(phi: &Multiplier, f: &AlgebraElement) -> Result<AlgebraElement> {
    if phi.group != f.group() {
        return Err(Error::GroupMismatch {
            left: phi.group,
            right: f.group(),
        });
    }
    Ok(f.map(|g, c| c * phi.evaluate(g)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefinitenessOptions {
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for DefinitenessOptions {
    fn default() -> Self {
        DefinitenessOptions {
            tol: DEFAULT_TOL,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Outcome of a Gram matrix eigenvalue test.
///
/// For p.d. checks `extreme_eigenvalue` is the minimum eigenvalue and the
/// test passes when it is `≥ -tol` (and the matrix is Hermitian). For n.d.
/// checks it is the maximum eigenvalue on `{c : Σ c_i = 0}` and the test
/// passes when it is `≤ tol`, where `tol` is scaled by the largest entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub kind: Definiteness,
    pub requested_radius: f64,
    pub ball_radius: f64,
    pub matrix_dim: usize,
    pub extreme_eigenvalue: f64,
    pub tol: f64,
    pub hermitian: bool,
    pub pass: bool,
}

/// Ball of the requested radius, shrunk until it has at most `max_dim`
/// elements.
fn gram_ball(group: &GroupDescriptor, radius: f64, max_dim: usize) -> Result<Ball> {
    if radius.is_nan() || radius < 1.0 {
        return Err(Error::InvalidArgument(format!("Gram radius {radius} must be ≥ 1")));
    }
    if max_dim == 0 {
        return Err(Error::InvalidArgument("max_dim must be positive".into()));
    }
    let mut r = radius;
    loop {
        let ball = enumerate(group, Region::Ball(r))?;
        if ball.len() <= max_dim || r < 1.0 {
            if r != radius {
                warn!("Gram ball shrunk from radius {radius} to {r} ({} elements, cap {max_dim})", ball.len());
            }
            return Ok(ball);
        }
        r = (r - 1.0).max(0.0);
    }
}

/// `[φ(s t⁻¹)]_{s,t}` over the ball, assembled by row.
fn gram(phi: &Multiplier, ball: &Ball) -> DMatrix<Complex64> {
    let group = phi.group;
    let inverses: Vec<GroupElement> = ball.iter().map(|t| group.invert(t)).collect();
    let rows: Vec<Vec<Complex64>> = ball
        .elements()
        .par_iter()
        .map(|s| inverses.iter().map(|ti| phi.evaluate(&group.mul(s, ti))).collect())
        .collect();
    let n = ball.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    }
}

fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Positive definiteness of `φ` on `Ball(radius)`.
pub fn pd_check(phi: &Multiplier, radius: f64, opts: &DefinitenessOptions) -> Result<DefinitenessReport> {
    let ball = gram_ball(&phi.group, radius, opts.max_dim)?;
    let m = gram(phi, &ball);
    let hermitian = max_asymmetry(&m) <= opts.tol;
    let min = eigenvalues(&m).into_iter().fold(f64::INFINITY, f64::min);
    Ok(DefinitenessReport {
        kind: Definiteness::PositiveDefinite,
        requested_radius: radius,
        ball_radius: ball.radius(),
        matrix_dim: ball.len(),
        extreme_eigenvalue: min,
        tol: opts.tol,
        hermitian,
        pass: hermitian && min >= -opts.tol,
    })
}

/// Negative definiteness of a real symmetric `ψ` on `Ball(radius)`: the
/// Gram matrix compressed to the complement of the constants is negative
/// semidefinite.
pub fn nd_check(psi: &Multiplier, radius: f64, opts: &DefinitenessOptions) -> Result<DefinitenessReport> {
    let ball = gram_ball(&psi.group, radius, opts.max_dim)?;
    let m = gram(psi, &ball);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if m.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidMultiplier("n.d. test needs a real-valued ψ".into()));
    }
    if max_asymmetry(&m) > 1e-12 * scale {
        return Err(Error::InvalidMultiplier("n.d. test needs ψ(g⁻¹) = ψ(g)".into()));
    }
    let n = ball.len();
    let m = m.map(|z| z.re);
    // P M P with P = I - 11ᵀ/n
    let row: Vec<f64> = (0..n).map(|i| m.row(i).sum() / n as f64).collect();
    let col: Vec<f64> = (0..n).map(|j| m.column(j).sum() / n as f64).collect();
    let total = row.iter().sum::<f64>() / n as f64;
    let projected = DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row[i] - col[j] + total);
    let max = projected
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = opts.tol * scale;
    Ok(DefinitenessReport {
        kind: Definiteness::NegativeDefinite,
        requested_radius: radius,
        ball_radius: ball.radius(),
        matrix_dim: n,
        extreme_eigenvalue: max,
        tol,
        hermitian: true,
        pass: max <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergPoint {
    pub t: f64,
    pub report: DefinitenessReport,
}

/// `ψ` n.d. ⟺ `e^{-tψ}` p.d. for all `t > 0`, tested at the listed `t`.
/// The check is consistent unless `ψ` passes the n.d. test while some
/// `e^{-tψ}` fails the p.d. test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchoenbergReport {
    pub nd: DefinitenessReport,
    pub pd: Vec<SchoenbergPoint>,
    pub consistent: bool,
}

pub fn schoenberg_crosscheck(
    psi: &Multiplier,
    radius: f64,
    ts: &[f64],
    opts: &DefinitenessOptions,
) -> Result<SchoenbergReport> {
    let nd = nd_check(psi, radius, opts)?;
    let pd = ts
        .iter()
        .map(|&t| {
            Ok(SchoenbergPoint {
                t,
                report: pd_check(&psi.exponential(t)?, radius, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let consistent = !(nd.pass && pd.iter().any(|p| !p.report.pass));
    Ok(SchoenbergReport { nd, pd, consistent })
}

/// Result of [`truncate_with_bound`].
#[derive(Clone, Debug)]
pub struct TruncationCertificate {
    /// `φ χ_A` with `A = Ball(radius)`.
    pub multiplier: Multiplier,
    pub radius: f64,
    /// `sup_{g ∉ A} |φ(g) κ(g)|` over the scanned range.
    pub sup_outside: f64,
    /// Bound `C / n` on the multiplier norm of `φ - φ χ_A`; zero when `A`
    /// contains the support of `φ`.
    pub certified_error: f64,
    pub n_target: u64,
    pub decay_constant: f64,
    /// Largest length key examined.
    pub scan_cap: u64,
}

/// Default number of length keys scanned by [`truncate_with_bound`].
pub const DEFAULT_SCAN_CAP: u64 = 10_000;

fn at_most_inverse(v: f64, n: u64) -> bool {
    match BigRational::from_float(v) {
        Some(q) => q <= BigRational::new(BigInt::from(1), BigInt::from(n)),
        None => false,
    }
}

/// The smallest ball `A` with `sup_{g ∉ A} |φ κ| ≤ 1/n`, so that
/// `⫴φ - φχ_A⫴ ≤ C/n` when `C` is a κ-decay constant.
///
/// Finitely supported `φ` are handled element by element. Otherwise `φ`
/// and `κ` must be radial; their product is scanned over the length keys up
/// to `scan_cap` and must be nonincreasing from its last maximum on, which
/// is what carries the bound past the cap. All comparisons with `1/n` are
/// exact.
pub fn truncate_with_bound(
    phi: &Multiplier,
    kappa: &WeightFunction,
    c: f64,
    n_target: u64,
    scan_cap: u64,
) -> Result<TruncationCertificate> {
    if phi.group != kappa.group() {
        return Err(Error::GroupMismatch {
            left: phi.group,
            right: kappa.group(),
        });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("decay constant {c} must be positive")));
    }
    if n_target == 0 {
        return Err(Error::InvalidArgument("n_target must be ≥ 1".into()));
    }
    let group = phi.group;
    let (key, sup, inside) = match phi.support_hint() {
        SupportHint::Finite(support) => {
            let mut shells: BTreeMap<u64, f64> = BTreeMap::new();
            for g in &support {
                let v = phi.evaluate(g).norm() * kappa.evaluate(g);
                let e = shells.entry(group.length_key(g)).or_default();
                *e = e.max(v);
            }
            let key = shells
                .iter()
                .rev()
                .find(|(_, v)| !at_most_inverse(**v, n_target))
                .map_or(0, |(k, _)| *k);
            let sup = shells.range(key + 1..).map(|(_, v)| *v).fold(0.0, f64::max);
            let top = shells.keys().next_back().copied().unwrap_or(0);
            (key, sup, key >= top)
        }
        _ => {
            let values = (0..=scan_cap)
                .map(|k| {
                    let z = phi.profile(k)?.norm();
                    let w = kappa.radial(group.key_length(k))?;
                    // A subnormal φ carries no relative precision; the
                    // product with a huge κ would be noise or NaN.
                    Some(if z < f64::MIN_POSITIVE { 0.0 } else { z * w })
                })
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| {
                    Error::InvalidArgument("truncation needs finite support or radial φ and κ".into())
                })?;
            let threshold = 1.0 / n_target as f64;
            let no_decay = || Error::NoDecay {
                threshold,
                cap: scan_cap,
            };
            if values.iter().any(|v| !v.is_finite()) {
                return Err(no_decay());
            }
            let key = (0..=scan_cap)
                .rev()
                .find(|&k| !at_most_inverse(values[k as usize], n_target))
                .unwrap_or(0);
            if key == scan_cap {
                return Err(no_decay());
            }
            let tail = &values[key as usize + 1..];
            let peak = tail
                .iter()
                .enumerate()
                .fold(0, |best, (i, v)| if *v >= tail[best] { i } else { best });
            if tail[peak..].windows(2).any(|w| w[1] > w[0]) {
                return Err(no_decay());
            }
            (key, tail.iter().copied().fold(0.0, f64::max), false)
        }
    };
    let radius = group.key_length(key);
    Ok(TruncationCertificate {
        multiplier: phi.truncated(radius)?,
        radius,
        sup_outside: sup,
        certified_error: if inside { 0.0 } else { c / n_target as f64 },
        n_target,
        decay_constant: c,
        scan_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupKind;

    fn z1() -> GroupDescriptor {
        GroupDescriptor::lattice(1, LengthKind::L1).unwrap()
    }

    fn k(x: i64) -> GroupElement {
        GroupElement::lattice(&[x])
    }

    fn interval(n: i64) -> Vec<GroupElement> {
        (0..n).map(k).collect()
    }

    #[test]
    fn fejer_values_on_integers() {
        let phi = Multiplier::fejer(&z1(), &interval(5)).unwrap();
        assert_eq!(phi.exact(&k(2)), Some(Rational64::new(3, 5)));
        assert_eq!(phi.evaluate(&k(-2)), Complex64::new(0.6, 0.0));
        assert_eq!(phi.exact(&k(0)), Some(Rational64::new(1, 1)));
        assert_eq!(phi.exact(&k(5)), Some(Rational64::new(0, 1)));
        let SupportHint::Finite(supp) = phi.support_hint() else { panic!() };
        assert_eq!(supp.len(), 9);
    }

    #[test]
    fn fejer_on_square() {
        let z2 = GroupDescriptor::lattice(2, LengthKind::L1).unwrap();
        let set: Vec<_> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|v| GroupElement::lattice(v)).collect();
        let phi = Multiplier::fejer(&z2, &set).unwrap();
        assert_eq!(phi.exact(&GroupElement::lattice(&[1, 1])), Some(Rational64::new(1, 4)));
    }

    #[test]
    fn fejer_support_is_f_f_inverse() {
        let h = GroupDescriptor::heisenberg();
        let set = enumerate(&h, Region::Ball(1.0)).unwrap().elements().to_vec();
        let phi = Multiplier::fejer(&h, &set).unwrap();
        let SupportHint::Finite(supp) = phi.support_hint() else { panic!() };
        for g in enumerate(&h, Region::Ball(3.0)).unwrap().iter() {
            assert_eq!(phi.evaluate(g).re > 0.0, supp.contains(g), "{g:?}");
        }
    }

    #[test]
    fn kernel_formulas() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let a = Multiplier::abel_poisson(&z1(), 0.5).unwrap();
        assert_eq!(a.evaluate(&k(3)).re, 0.125);
        let p = Multiplier::poly_decay(&f2, 1.0, 2).unwrap();
        assert_eq!(p.evaluate(&GroupElement::free_word(&[1])).re, 0.25);
        let z2 = GroupDescriptor::lattice(2, LengthKind::L1).unwrap();
        let g = Multiplier::gauss(&z2, 0.3).unwrap();
        assert!((g.evaluate(&GroupElement::lattice(&[1, 1])).re - 0.09).abs() < 1e-16);
        assert!(Multiplier::gauss(&f2, 0.3).is_err());
        assert!(Multiplier::abel_poisson(&f2, 1.0).is_err());
        for m in [&a, &p, &g] {
            assert_eq!(m.evaluate(&m.group().identity()).re, 1.0);
        }
    }

    #[test]
    fn apply_examples() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let s1 = enumerate(&f2, Region::Sphere(1)).unwrap();
        let chi = AlgebraElement::indicator(&f2, s1.iter()).unwrap();
        let out = apply(&Multiplier::abel_poisson(&f2, 0.7).unwrap(), &chi).unwrap();
        assert_eq!(out, chi.scale(Complex64::new(0.7, 0.0)));

        let fej = Multiplier::fejer(&z1(), &interval(8)).unwrap();
        for x in -10..=10i64 {
            let d = AlgebraElement::delta(&z1(), k(x)).unwrap();
            let expect = (1.0 - x.abs() as f64 / 8.0).max(0.0);
            assert_eq!(apply(&fej, &d).unwrap().coefficient(&k(x)).re, expect);
        }
    }

    #[test]
    fn pd_examples() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let opts = DefinitenessOptions::default();
        let delta = Multiplier::table(&f2, &[(f2.identity(), Complex64::new(1.0, 0.0))]).unwrap();
        let rep = pd_check(&delta, 2.0, &opts).unwrap();
        assert!(rep.pass && (rep.extreme_eigenvalue - 1.0).abs() < 1e-14);

        let s1 = enumerate(&f2, Region::Sphere(1)).unwrap();
        let chi = Multiplier::table(&f2, &s1.iter().map(|g| (g.clone(), Complex64::new(1.0, 0.0))).collect::<Vec<_>>())
            .unwrap();
        assert!(!pd_check(&chi, 2.0, &opts).unwrap().pass);

        let poisson = Multiplier::abel_poisson(&z1(), 0.8).unwrap();
        assert!(pd_check(&poisson, 20.0, &opts).unwrap().pass);
    }

    #[test]
    fn gram_ball_shrinks() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let phi = Multiplier::abel_poisson(&f2, 0.5).unwrap();
        let rep = pd_check(&phi, 6.0, &DefinitenessOptions { max_dim: 200, ..Default::default() }).unwrap();
        assert_eq!(rep.ball_radius, 4.0);
        assert_eq!(rep.matrix_dim, 161);
        assert!(rep.pass);
    }

    #[test]
    fn nd_examples() {
        let opts = DefinitenessOptions::default();
        assert!(nd_check(&Multiplier::length_power(&z1(), 1.0).unwrap(), 20.0, &opts).unwrap().pass);
        let cube = nd_check(&Multiplier::length_power(&z1(), 3.0).unwrap(), 4.0, &opts).unwrap();
        assert!(!cube.pass && cube.extreme_eigenvalue > 100.0);
        let z2 = GroupDescriptor::lattice(2, LengthKind::L2Squared).unwrap();
        assert!(nd_check(&Multiplier::length_power(&z2, 1.0).unwrap(), 8.0, &opts).unwrap().pass);

        let complex = Multiplier::table(&z1(), &[(k(1), Complex64::new(0.0, 1.0))]).unwrap();
        assert!(nd_check(&complex, 2.0, &opts).is_err());
        let lopsided = Multiplier::table(&z1(), &[(k(1), Complex64::new(1.0, 0.0))]).unwrap();
        assert!(nd_check(&lopsided, 2.0, &opts).is_err());
    }

    #[test]
    fn schoenberg_on_cube() {
        let psi = Multiplier::length_power(&z1(), 3.0).unwrap();
        let rep = schoenberg_crosscheck(&psi, 4.0, &[0.1, 1.0, 5.0], &DefinitenessOptions::default()).unwrap();
        assert!(rep.consistent && !rep.nd.pass);
        assert!(!rep.pd[0].report.pass);
    }

    #[test]
    fn truncation_of_free_abel_kernel() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let phi = Multiplier::abel_poisson(&f2, 0.81).unwrap();
        let kappa = WeightFunction::exp(&f2, 1.0 / 0.9).unwrap();
        let cert = truncate_with_bound(&phi, &kappa, 3.0, 10, 1000).unwrap();
        assert_eq!(cert.radius, 21.0);
        assert!(cert.sup_outside <= 0.1);
        assert_eq!(cert.certified_error, 0.3);
        let w: Vec<i8> = [1, 2].repeat(11);
        assert_eq!(cert.multiplier.evaluate(&GroupElement::free_word(&w[..21])), phi.evaluate(&GroupElement::free_word(&w[..21])));
        assert_eq!(cert.multiplier.evaluate(&GroupElement::free_word(&w)), Complex64::default());
    }

    #[test]
    fn truncation_scan_on_integers() {
        let r: f64 = 0.5;
        let phi = Multiplier::abel_poisson(&z1(), r).unwrap();
        let kappa = WeightFunction::poly(&z1(), 2.0).unwrap();
        let cert = truncate_with_bound(&phi, &kappa, 2.0, 100, 1000).unwrap();
        // direct scan oracle
        let last = (0..200).filter(|&j| r.powi(j) * ((1 + j) as f64).powi(2) > 0.01).max().unwrap();
        assert_eq!(cert.radius, last as f64);
        assert_eq!(cert.certified_error, 0.02);
    }

    #[test]
    fn truncation_of_finite_support() {
        let phi = Multiplier::fejer(&z1(), &interval(4)).unwrap();
        let kappa = WeightFunction::poly(&z1(), 0.0).unwrap();
        let cert = truncate_with_bound(&phi, &kappa, 1.0, 100, 10).unwrap();
        assert_eq!(cert.radius, 3.0);
        assert_eq!(cert.certified_error, 0.0);
        let loose = truncate_with_bound(&phi, &kappa, 1.0, 2, 10).unwrap();
        assert_eq!(loose.radius, 1.0);
        assert_eq!(loose.certified_error, 0.5);
    }

    #[test]
    fn growing_product_has_no_decay() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let phi = Multiplier::abel_poisson(&f2, 0.81).unwrap();
        let kappa = WeightFunction::exp(&f2, 1.3).unwrap();
        assert!(matches!(truncate_with_bound(&phi, &kappa, 1.0, 10, 500), Err(Error::NoDecay { .. })));
    }

    #[test]
    fn descriptors_round_trip() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let d = MultiplierDescriptor::Truncated {
            base: Box::new(MultiplierDescriptor::Exponential {
                t: 0.5,
                psi: Box::new(MultiplierDescriptor::LengthPower { power: 1.0, length: None }),
            }),
            within: TruncationSet::Set(vec!["".into(), "a".into()]),
        };
        let json = serde_json::to_string(&d).unwrap();
        let back: MultiplierDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
        let m = Multiplier::new(&f2, &back).unwrap();
        assert_eq!(m.evaluate(&f2.parse("a").unwrap()).re, (-0.5f64).exp());
        assert_eq!(m.evaluate(&f2.parse("b").unwrap()).re, 0.0);
        assert!(matches!(f2.kind(), GroupKind::Free { rank: 2 }));
    }

    #[test]
    fn tables_round_trip_through_elements() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let f = AlgebraElement::from_terms(
            &f2,
            [(f2.parse("ab").unwrap(), Complex64::new(0.1, -2.0)), (f2.identity(), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let m = Multiplier::from_element(&f).unwrap();
        assert_eq!(m.to_element().unwrap(), f);
    }
}
