//! Normalized unit-circle valued 2-cocycles.
//!
//! A cocycle satisfies `σ(g,h)σ(gh,k) = σ(h,k)σ(g,hk)` and
//! `σ(g,e) = σ(e,g) = 1`. The built-ins are the bicharacters
//! `σ_Θ(x,y) = exp(i xᵀΘy)` on ℤ^N (pulled back through the abelianization on
//! the Heisenberg group), coboundaries `∂β(g,h) = β(g)β(h)/β(gh)` and
//! pointwise products of these.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::algebra::TermEntry;
use crate::error::{Error, Result};
use crate::groups::{enumerate, GroupDescriptor, GroupElement, GroupKind, Region};

/// Default seed for every seeded sampler in the crate.
pub const DEFAULT_SEED: u64 = 0x5EED;

const UNIT_TOLERANCE: f64 = 1e-12;
const EXHAUSTIVE_TRIPLES: usize = 1_000_000;
const SAMPLED_TRIPLES: usize = 10_000;

/// Serializable description of a cocycle, independent of the group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleDescriptor {
    Trivial,
    /// Row-major N×N real matrix.
    Theta { theta: Vec<f64> },
    Coboundary { beta: PhaseFamily },
    Product { factors: Vec<CocycleDescriptor> },
}

/// A unit-modulus function β with β(e) = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseFamily {
    /// `β(x) = exp(i xᵀQx)` on ℤ^N, Q row-major.
    QuadraticPhase { q: Vec<f64> },
    /// Pseudo-random phase derived from the canonical form of `g`.
    HashedPhase { seed: u64 },
    /// Explicit values on finitely many elements, 1 elsewhere.
    Table { entries: Vec<TermEntry> },
    /// Pointwise complex conjugate of `base`.
    Conjugate { base: Box<PhaseFamily> },
}


impl PhaseFamily {
    pub fn table(group: &GroupDescriptor, values: &[(GroupElement, Complex64)]) -> Self {
        PhaseFamily::Table {
            entries: values
                .iter()
                .map(|(g, z)| TermEntry::new(group, g, *z))
                .collect(),
        }
    }

    pub fn conjugate(self) -> Self {
        PhaseFamily::Conjugate {
            base: Box::new(self),
        }
    }
}

/// A compiled phase function β on a specific group.
#[derive(Clone, Debug)]
pub enum PhaseFunction {
    Quadratic { dim: usize, q: Vec<f64> },
    Hashed { seed: u64 },
    Table(FxHashMap<GroupElement, Complex64>),
    Conjugate(Box<PhaseFunction>),
}

impl PhaseFunction {
    pub fn new(group: &GroupDescriptor, family: &PhaseFamily) -> Result<Self> {
        Ok(match family {
            PhaseFamily::QuadraticPhase { q } => {
                let GroupKind::IntLattice { dim } = group.kind() else {
                    return Err(Error::InvalidCocycle(
                        "quadratic phases live on lattices".into(),
                    ));
                };
                check_square(q, dim)?;
                PhaseFunction::Quadratic { dim, q: q.clone() }
            }
            PhaseFamily::HashedPhase { seed } => PhaseFunction::Hashed { seed: *seed },
            PhaseFamily::Table { entries } => {
                let mut map = FxHashMap::default();
                for entry in entries {
                    let g = group.parse(&entry.word)?;
                    let z = Complex64::new(entry.re, entry.im);
                    if (z.norm() - 1.0).abs() > UNIT_TOLERANCE {
                        return Err(Error::InvalidCocycle(format!(
                            "β({}) = {z} is not unimodular",
                            entry.word
                        )));
                    }
                    if group.is_identity(&g) && (z - 1.0).norm() > UNIT_TOLERANCE {
                        return Err(Error::InvalidCocycle("β(e) must be 1".into()));
                    }
                    map.insert(g, z);
                }
                PhaseFunction::Table(map)
            }
            PhaseFamily::Conjugate { base } => {
                PhaseFunction::Conjugate(Box::new(PhaseFunction::new(group, base)?))
            }
        })
    }

    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        match self {
            PhaseFunction::Quadratic { dim, q } => {
                let GroupElement::Lattice(x) = g else {
                    panic!("quadratic phase evaluated off the lattice")
                };
                Complex64::cis(bilinear(*dim, q, x, x))
            }
            PhaseFunction::Hashed { seed } => match hash_element(*seed, g) {
                None => Complex64::new(1.0, 0.0),
                Some(h) => Complex64::cis(TAU * ((h >> 11) as f64 / (1u64 << 53) as f64)),
            },
            PhaseFunction::Table(map) => map.get(g).copied().unwrap_or(Complex64::new(1.0, 0.0)),
            PhaseFunction::Conjugate(base) => base.evaluate(g).conj(),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of the canonical form; `None` for the identity.
fn hash_element(seed: u64, g: &GroupElement) -> Option<u64> {
    let mut h = splitmix(seed);
    let mut feed = |x: i64| h = splitmix(h ^ (x as u64));
    let mut identity = true;
    match g {
        GroupElement::Lattice(v) => {
            feed(1);
            for &x in v {
                identity &= x == 0;
                feed(x);
            }
        }
        GroupElement::Free(w) => {
            feed(2);
            identity = w.is_empty();
            for &l in w {
                feed(l as i64);
            }
        }
        GroupElement::Heisenberg(t) => {
            feed(3);
            identity = *t == [0; 3];
            for &x in t {
                feed(x);
            }
        }
        GroupElement::Dihedral { flip, shift } => {
            feed(4);
            identity = !flip && *shift == 0;
            feed(*flip as i64);
            feed(*shift);
        }
    }
    (!identity).then_some(h)
}

fn check_square(m: &[f64], dim: usize) -> Result<()> {
    if m.len() != dim * dim {
        return Err(Error::InvalidCocycle(format!(
            "expected a {dim}×{dim} matrix ({} entries), got {}",
            dim * dim,
            m.len()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidCocycle("matrix entries must be finite".into()));
    }
    Ok(())
}

/// `xᵀ M y` with the integer products formed exactly before weighting.
fn bilinear(dim: usize, m: &[f64], x: &[i64], y: &[i64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..dim {
        if x[i] == 0 {
            continue;
        }
        for j in 0..dim {
            let w = m[i * dim + j];
            if w != 0.0 && y[j] != 0 {
                acc += w * (x[i] * y[j]) as f64;
            }
        }
    }
    acc
}

#[derive(Clone, Debug)]
enum Kernel {
    Trivial,
    Theta { dim: usize, theta: Vec<f64> },
    Coboundary(PhaseFunction),
    Product(Vec<Kernel>),
}

/// A validated cocycle on a given group.
#[derive(Clone, Debug)]
pub struct Cocycle {
    group: GroupDescriptor,
    descriptor: CocycleDescriptor,
    kernel: Kernel,
}

impl Cocycle {
    pub fn trivial(group: &GroupDescriptor) -> Self {
        Cocycle {
            group: *group,
            descriptor: CocycleDescriptor::Trivial,
            kernel: Kernel::Trivial,
        }
    }

    /// `σ_Θ(x,y) = exp(i xᵀΘy)`. On the Heisenberg group Θ is 2×2 and acts on
    /// the abelianized coordinates.
    pub fn sigma_theta(group: &GroupDescriptor, theta: &[f64]) -> Result<Self> {
        Self::new(
            group,
            &CocycleDescriptor::Theta {
                theta: theta.to_vec(),
            },
        )
    }

    /// `∂β(g,h) = β(g)β(h)/β(gh)`.
    pub fn coboundary(group: &GroupDescriptor, beta: PhaseFamily) -> Result<Self> {
        Self::new(group, &CocycleDescriptor::Coboundary { beta })
    }

    /// Pointwise product of cocycles on the same group.
    pub fn product(group: &GroupDescriptor, factors: &[Cocycle]) -> Result<Self> {
        for f in factors {
            if f.group != *group {
                return Err(Error::GroupMismatch {
                    left: *group,
                    right: f.group,
                });
            }
        }
        Ok(Cocycle {
            group: *group,
            descriptor: CocycleDescriptor::Product {
                factors: factors.iter().map(|f| f.descriptor.clone()).collect(),
            },
            kernel: Kernel::Product(factors.iter().map(|f| f.kernel.clone()).collect()),
        })
    }

    pub fn new(group: &GroupDescriptor, descriptor: &CocycleDescriptor) -> Result<Self> {
        Ok(Cocycle {
            group: *group,
            descriptor: descriptor.clone(),
            kernel: compile(group, descriptor)?,
        })
    }

    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    pub fn descriptor(&self) -> &CocycleDescriptor {
        &self.descriptor
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.kernel, Kernel::Trivial)
    }

    /// σ(g, h).
    pub fn evaluate(&self, g: &GroupElement, h: &GroupElement) -> Complex64 {
        eval_kernel(&self.group, &self.kernel, g, h)
    }
}

fn compile(group: &GroupDescriptor, descriptor: &CocycleDescriptor) -> Result<Kernel> {
    Ok(match descriptor {
        CocycleDescriptor::Trivial => Kernel::Trivial,
        CocycleDescriptor::Theta { theta } => {
            let dim = match group.kind() {
                GroupKind::IntLattice { dim } => dim,
                GroupKind::Heisenberg => 2,
                _ => {
                    return Err(Error::InvalidCocycle(format!(
                        "Θ-cocycles are not defined on {group}"
                    )))
                }
            };
            check_square(theta, dim)?;
            // exp(i·0) = 1 exactly, so Θ = 0 is the trivial cocycle
            if theta.iter().all(|&t| t == 0.0) {
                Kernel::Trivial
            } else {
                Kernel::Theta {
                    dim,
                    theta: theta.clone(),
                }
            }
        }
        CocycleDescriptor::Coboundary { beta } => {
            Kernel::Coboundary(PhaseFunction::new(group, beta)?)
        }
        CocycleDescriptor::Product { factors } => Kernel::Product(
            factors
                .iter()
                .map(|f| compile(group, f))
                .collect::<Result<_>>()?,
        ),
    })
}

fn eval_kernel(
    group: &GroupDescriptor,
    kernel: &Kernel,
    g: &GroupElement,
    h: &GroupElement,
) -> Complex64 {
    match kernel {
        Kernel::Trivial => Complex64::new(1.0, 0.0),
        Kernel::Theta { dim, theta } => {
            let phase = match (g, h) {
                (GroupElement::Lattice(x), GroupElement::Lattice(y)) => bilinear(*dim, theta, x, y),
                (GroupElement::Heisenberg(x), GroupElement::Heisenberg(y)) => {
                    bilinear(2, theta, &x[..2], &y[..2])
                }
                _ => panic!("Θ-cocycle evaluated on {g:?}, {h:?}"),
            };
            Complex64::cis(phase)
        }
        Kernel::Coboundary(beta) => {
            let gh = group.mul(g, h);
            beta.evaluate(g) * beta.evaluate(h) * beta.evaluate(&gh).conj()
        }
        Kernel::Product(factors) => factors
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, k| acc * eval_kernel(group, k, g, h)),
    }
}

/// Largest observed violations of the cocycle axioms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleReport {
    pub max_identity_defect: f64,
    pub max_normalization_defect: f64,
    pub max_modulus_defect: f64,
    pub triples_checked: usize,
    pub exhaustive: bool,
}

/// Check the cocycle identity on triples from `Ball(radius)`: every triple when
/// there are at most 10⁶ of them, otherwise 10⁴ seeded samples.
pub fn validate_cocycle(sigma: &Cocycle, radius: u64) -> Result<CocycleReport> {
    validate_with(&sigma.group, radius, |g, h| sigma.evaluate(g, h))
}

/// [`validate_cocycle`] for an arbitrary function on `G × G`.
pub fn validate_with<F>(group: &GroupDescriptor, radius: u64, sigma: F) -> Result<CocycleReport>
where
    F: Fn(&GroupElement, &GroupElement) -> Complex64,
{
    if radius < 1 {
        return Err(Error::InvalidArgument("validation radius must be ≥ 1".into()));
    }
    let ball = enumerate(group, Region::Ball(radius as f64))?;
    let elems = ball.elements();
    let e = group.identity();
    let one = Complex64::new(1.0, 0.0);

    let mut normalization: f64 = 0.0;
    for g in elems {
        normalization = normalization
            .max((sigma(g, &e) - one).norm())
            .max((sigma(&e, g) - one).norm());
    }

    let mut identity: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    let mut check = |g: &GroupElement, h: &GroupElement, k: &GroupElement| {
        let gh = group.mul(g, h);
        let hk = group.mul(h, k);
        let s_gh = sigma(g, h);
        let lhs = s_gh * sigma(&gh, k);
        let rhs = sigma(h, k) * sigma(g, &hk);
        identity = identity.max((lhs - rhs).norm());
        modulus = modulus.max((s_gh.norm() - 1.0).abs());
    };

    let n = elems.len();
    let exhaustive = n.checked_pow(3).is_some_and(|c| c <= EXHAUSTIVE_TRIPLES);
    let triples = if exhaustive {
        for g in elems {
            for h in elems {
                for k in elems {
                    check(g, h, k);
                }
            }
        }
        n * n * n
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        for _ in 0..SAMPLED_TRIPLES {
            let g = &elems[rng.random_range(0..n)];
            let h = &elems[rng.random_range(0..n)];
            let k = &elems[rng.random_range(0..n)];
            check(g, h, k);
        }
        SAMPLED_TRIPLES
    };

    Ok(CocycleReport {
        max_identity_defect: identity,
        max_normalization_defect: normalization,
        max_modulus_defect: modulus,
        triples_checked: triples,
        exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthKind;
    use std::f64::consts::PI;

    fn z(n: usize) -> GroupDescriptor {
        GroupDescriptor::lattice(n, LengthKind::L1).unwrap()
    }

    #[test]
    fn theta_half_flux_values() {
        let sigma = Cocycle::sigma_theta(&z(2), &[0.0, PI, 0.0, 0.0]).unwrap();
        let e1 = GroupElement::lattice(&[1, 0]);
        let e2 = GroupElement::lattice(&[0, 1]);
        let v = sigma.evaluate(&e1, &e2);
        assert!((v - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(sigma.evaluate(&e2, &e1), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_theta_is_trivial() {
        let sigma = Cocycle::sigma_theta(&z(3), &[0.0; 9]).unwrap();
        for g in enumerate(&z(3), Region::Ball(2.0)).unwrap().iter() {
            for h in enumerate(&z(3), Region::Ball(2.0)).unwrap().iter() {
                assert_eq!(sigma.evaluate(g, h), Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn theta_dimension_checked() {
        assert!(Cocycle::sigma_theta(&z(2), &[0.0; 3]).is_err());
        assert!(Cocycle::sigma_theta(&GroupDescriptor::free(2).unwrap(), &[0.0; 4]).is_err());
        assert!(Cocycle::sigma_theta(&GroupDescriptor::heisenberg(), &[0.0, 1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn quadratic_coboundary_value() {
        let sigma = Cocycle::coboundary(&z(1), PhaseFamily::QuadraticPhase { q: vec![1.0] }).unwrap();
        let one = GroupElement::lattice(&[1]);
        let v = sigma.evaluate(&one, &one);
        let expected = Complex64::cis(1.0) * Complex64::cis(1.0) / Complex64::cis(4.0);
        assert!((v - expected).norm() < 1e-15);
        assert!((v - Complex64::cis(-2.0)).norm() < 1e-15);
    }

    #[test]
    fn trivial_phase_gives_trivial_values() {
        let sigma = Cocycle::coboundary(&z(2), PhaseFamily::Table { entries: vec![] }).unwrap();
        let r = validate_cocycle(&sigma, 2).unwrap();
        assert_eq!(r.max_identity_defect, 0.0);
        assert_eq!(r.max_normalization_defect, 0.0);
    }

    #[test]
    fn table_phase_rejects_non_unit_values() {
        let bad = PhaseFamily::Table {
            entries: vec![TermEntry {
                word: "a".into(),
                re: 2.0,
                im: 0.0,
            }],
        };
        assert!(Cocycle::coboundary(&GroupDescriptor::free(2).unwrap(), bad).is_err());
        let bad_identity = PhaseFamily::Table {
            entries: vec![TermEntry {
                word: "".into(),
                re: 0.0,
                im: 1.0,
            }],
        };
        assert!(Cocycle::coboundary(&GroupDescriptor::free(2).unwrap(), bad_identity).is_err());
    }

    #[test]
    fn arbitrary_table_on_free_ball_is_a_cocycle() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let ball = enumerate(&f2, Region::Ball(3.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let values: Vec<_> = ball
            .iter()
            .filter(|g| !f2.is_identity(g))
            .map(|g| (g.clone(), Complex64::cis(rng.random_range(0.0..TAU))))
            .collect();
        let sigma = Cocycle::coboundary(&f2, PhaseFamily::table(&f2, &values)).unwrap();
        let r = validate_cocycle(&sigma, 3).unwrap();
        assert!(r.max_identity_defect <= 1e-12, "{r:?}");
        assert!(r.max_normalization_defect <= 1e-12);
    }

    #[test]
    fn builtins_satisfy_axioms_on_ball_four() {
        let theta3 = [0.0, 0.7, -1.3, 0.2, 0.0, 2.9, 0.4, -0.5, 0.0];
        let cases = vec![
            Cocycle::trivial(&GroupDescriptor::free(2).unwrap()),
            Cocycle::sigma_theta(&z(2), &[0.0, PI, 0.0, 0.0]).unwrap(),
            Cocycle::sigma_theta(&z(3), &theta3).unwrap(),
            Cocycle::sigma_theta(&GroupDescriptor::heisenberg(), &[0.3, 1.1, -0.4, 0.0]).unwrap(),
            Cocycle::coboundary(&GroupDescriptor::dihedral(), PhaseFamily::HashedPhase { seed: 3 }).unwrap(),
            Cocycle::coboundary(&GroupDescriptor::heisenberg(), PhaseFamily::HashedPhase { seed: 4 }).unwrap(),
            Cocycle::coboundary(&z(2), PhaseFamily::QuadraticPhase { q: vec![0.3, 0.1, -0.2, 1.7] }).unwrap(),
        ];
        for sigma in cases {
            let r = validate_cocycle(&sigma, 4).unwrap();
            assert!(r.max_identity_defect <= 1e-12, "{:?}: {r:?}", sigma.descriptor());
            assert!(r.max_normalization_defect <= 1e-12);
            assert!(r.max_modulus_defect <= 1e-12);
        }
    }

    #[test]
    fn theta_is_a_bicharacter() {
        let sigma = Cocycle::sigma_theta(&z(2), &[0.4, 2.2, -0.9, 1.3]).unwrap();
        let ball = enumerate(&z(2), Region::Ball(3.0)).unwrap();
        let g = z(2);
        for x in ball.iter() {
            for xp in ball.iter() {
                for y in ball.iter().step_by(3) {
                    let lhs = sigma.evaluate(&g.mul(x, xp), y);
                    let rhs = sigma.evaluate(x, y) * sigma.evaluate(xp, y);
                    assert!((lhs - rhs).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn coboundary_times_conjugate_is_trivial() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let beta = PhaseFamily::HashedPhase { seed: 11 };
        let a = Cocycle::coboundary(&f2, beta.clone()).unwrap();
        let b = Cocycle::coboundary(&f2, beta.conjugate()).unwrap();
        let prod = Cocycle::product(&f2, &[a, b]).unwrap();
        let ball = enumerate(&f2, Region::Ball(3.0)).unwrap();
        for g in ball.iter() {
            for h in ball.iter() {
                assert!((prod.evaluate(g, h) - 1.0).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn fault_injection_is_detected() {
        let sigma = Cocycle::sigma_theta(&z(2), &[0.0, 0.9, 0.0, 0.0]).unwrap();
        let bad_g = GroupElement::lattice(&[1, 1]);
        let bad_h = GroupElement::lattice(&[0, -1]);
        let report = validate_with(&z(2), 3, |g, h| {
            let v = sigma.evaluate(g, h);
            if *g == bad_g && *h == bad_h {
                v + 1e-3
            } else {
                v
            }
        })
        .unwrap();
        assert!(report.exhaustive);
        assert!(report.max_identity_defect >= 1e-3 - 1e-12, "{report:?}");
    }

    #[test]
    fn large_balls_are_sampled() {
        let sigma = Cocycle::trivial(&GroupDescriptor::free(2).unwrap());
        let r = validate_cocycle(&sigma, 4).unwrap();
        assert!(!r.exhaustive);
        assert_eq!(r.triples_checked, SAMPLED_TRIPLES);
        assert_eq!(r.max_identity_defect, 0.0);
    }

    #[test]
    fn descriptor_json_round_trip() {
        let d = CocycleDescriptor::Product {
            factors: vec![
                CocycleDescriptor::Theta { theta: vec![0.0, 0.5, 0.0, 0.0] },
                CocycleDescriptor::Coboundary {
                    beta: PhaseFamily::HashedPhase { seed: 9 }.conjugate(),
                },
            ],
        };
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<CocycleDescriptor>(&text).unwrap(), d);
    }
}
