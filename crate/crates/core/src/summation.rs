//! Følner nets, Fourier summing nets and convergence runs.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::groups::{enumerate, GroupDescriptor, GroupElement, GroupKind, LengthKind, Region};
use crate::multipliers::{apply, Multiplier, MultiplierDescriptor};
use crate::operators::{bracket_norm, NormBracket, SolverOptions};

/// Built-in Følner sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FolnerNet {
    /// `{0, …, n-1}^N` in a lattice.
    Boxes,
    /// `{(a, b, c) : |a|, |b| ≤ n, |c| ≤ n²}`.
    HeisenbergBoxes,
    /// `Ball(n)` in the infinite dihedral group.
    DihedralBalls,
}

impl FolnerNet {
    /// The built-in net for an amenable group.
    pub fn for_group(group: &GroupDescriptor) -> Result<Self> {
        match group.kind() {
            GroupKind::IntLattice { .. } => Ok(FolnerNet::Boxes),
            GroupKind::Heisenberg => Ok(FolnerNet::HeisenbergBoxes),
            GroupKind::InfiniteDihedral => Ok(FolnerNet::DihedralBalls),
            GroupKind::Free { rank: 1 } => Err(Error::InvalidArgument(
                "use the lattice ℤ for the free group of rank 1".into(),
            )),
            GroupKind::Free { .. } => Err(Error::InvalidArgument(format!("{group} is not amenable"))),
        }
    }

    /// `F_n`, for `n ≥ 1`.
    pub fn set(&self, group: &GroupDescriptor, n: u64) -> Result<Vec<GroupElement>> {
        if n == 0 {
            return Err(Error::InvalidArgument("Følner index must be ≥ 1".into()));
        }
        if *self != Self::for_group(group)? {
            return Err(Error::InvalidArgument(format!("{self:?} is not a net on {group}")));
        }
        let side = i64::try_from(n).map_err(|_| Error::InvalidArgument(format!("index {n} too large")))?;
        Ok(match self {
            FolnerNet::Boxes => {
                let GroupKind::IntLattice { dim } = group.kind() else { unreachable!() };
                let count = (n as u128).checked_pow(dim as u32);
                if count.is_none_or(|c| c > crate::groups::MAX_REGION_SIZE as u128) {
                    return Err(Error::RegionTooLarge {
                        size: count.unwrap_or(u128::MAX),
                        cap: crate::groups::MAX_REGION_SIZE,
                    });
                }
                let mut out = vec![vec![]];
                for _ in 0..dim {
                    out = out
                        .into_iter()
                        .flat_map(|v: Vec<i64>| {
                            (0..side).map(move |x| {
                                let mut w = v.clone();
                                w.push(x);
                                w
                            })
                        })
                        .collect();
                }
                out.iter().map(|v| GroupElement::lattice(v)).collect()
            }
            FolnerNet::HeisenbergBoxes => {
                let c = side
                    .checked_mul(side)
                    .ok_or_else(|| Error::InvalidArgument(format!("index {n} too large")))?;
                let size = (2 * n as u128 + 1).pow(2) * (2 * c as u128 + 1);
                if size > crate::groups::MAX_REGION_SIZE as u128 {
                    return Err(Error::RegionTooLarge {
                        size,
                        cap: crate::groups::MAX_REGION_SIZE,
                    });
                }
                let mut out = Vec::with_capacity(size as usize);
                for a in -side..=side {
                    for b in -side..=side {
                        for z in -c..=c {
                            out.push(GroupElement::heisenberg(a, b, z));
                        }
                    }
                }
                out
            }
            FolnerNet::DihedralBalls => enumerate(group, Region::Ball(n as f64))?.elements().to_vec(),
        })
    }
}

/// `|gF △ F| / |F|` exactly.
pub fn folner_defect_exact(group: &GroupDescriptor, set: &[GroupElement], g: &GroupElement) -> Result<Rational64> {
    group.check(g)?;
    let members: rustc_hash::FxHashSet<&GroupElement> = set.iter().collect();
    if members.is_empty() {
        return Err(Error::InvalidArgument("Følner defect of the empty set".into()));
    }
    let kept = members.iter().filter(|f| members.contains(&group.mul(g, f))).count();
    Ok(Rational64::new(2 * (members.len() - kept) as i64, members.len() as i64))
}

/// [`folner_defect_exact`] as a float.
pub fn folner_defect(group: &GroupDescriptor, set: &[GroupElement], g: &GroupElement) -> Result<f64> {
    let q = folner_defect_exact(group, set, g)?;
    Ok(*q.numer() as f64 / *q.denom() as f64)
}

/// A Fourier summing net and its schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "net", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetKind {
    /// Fejér multipliers of the Følner sets `F_n`, `n` increasing.
    Fejer {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        folner: Option<FolnerNet>,
        schedule: Vec<u64>,
    },
    /// `r^L` with `r` increasing to 1.
    Abel {
        schedule: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<LengthKind>,
    },
    /// `(1 + tL)^{-q}` with `t` decreasing to 0.
    Poly { schedule: Vec<f64>, q: u32 },
    /// `r^{|·|₂²}` on lattices, `r` increasing to 1.
    Gauss { schedule: Vec<f64> },
}

impl NetKind {
    pub fn default_fejer() -> Self {
        NetKind::Fejer {
            folner: None,
            schedule: vec![2, 4, 8, 16, 32],
        }
    }

    pub fn default_abel() -> Self {
        NetKind::Abel {
            schedule: vec![0.5, 0.75, 0.9, 0.96, 0.99],
            length: None,
        }
    }

    pub fn default_gauss() -> Self {
        NetKind::Gauss {
            schedule: vec![0.5, 0.75, 0.9, 0.96, 0.99],
        }
    }

    pub fn default_poly() -> Self {
        NetKind::Poly {
            schedule: vec![1.0, 0.5, 0.25, 0.1, 0.04],
            q: 2,
        }
    }
}

/// Materialized members of a summing net.
#[derive(Clone, Debug)]
pub struct SummingNet {
    pub group: GroupDescriptor,
    pub kind: NetKind,
    /// `(index, φ)` in schedule order.
    pub members: Vec<(f64, Multiplier)>,
}

fn strictly<T: PartialOrd>(v: &[T], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[0] < w[1] } else { w[0] > w[1] })
}

pub fn summing_net(group: &GroupDescriptor, kind: &NetKind) -> Result<SummingNet> {
    let bad = |msg: &str| Err(Error::InvalidArgument(format!("invalid schedule: {msg}")));
    let members = match kind {
        NetKind::Fejer { folner, schedule } => {
            if schedule.is_empty() || !strictly(schedule, true) {
                return bad("Fejér indices must increase");
            }
            let net = match folner {
                Some(f) => *f,
                None => FolnerNet::for_group(group)?,
            };
            schedule
                .iter()
                .map(|&n| Ok((n as f64, Multiplier::fejer(group, &net.set(group, n)?)?)))
                .collect::<Result<_>>()?
        }
        NetKind::Abel { schedule, length } => {
            if schedule.is_empty() || !strictly(schedule, true) {
                return bad("Abel radii must increase");
            }
            schedule
                .iter()
                .map(|&r| {
                    let d = MultiplierDescriptor::AbelPoisson { r, length: *length };
                    Ok((r, Multiplier::new(group, &d)?))
                })
                .collect::<Result<_>>()?
        }
        NetKind::Poly { schedule, q } => {
            if schedule.is_empty() || !strictly(schedule, false) {
                return bad("polynomial rates must decrease");
            }
            schedule
                .iter()
                .map(|&t| Ok((t, Multiplier::poly_decay(group, t, *q)?)))
                .collect::<Result<_>>()?
        }
        NetKind::Gauss { schedule } => {
            if schedule.is_empty() || !strictly(schedule, true) {
                return bad("Gauss radii must increase");
            }
            schedule
                .iter()
                .map(|&r| Ok((r, Multiplier::gauss(group, r)?)))
                .collect::<Result<_>>()?
        }
    };
    Ok(SummingNet {
        group: *group,
        kind: kind.clone(),
        members,
    })
}

/// The element being summed: a finitely supported part and a certified
/// bound on the `ℓ¹` norm of everything that was cut off.
#[derive(Clone, Debug)]
pub struct SummationInput {
    pub element: AlgebraElement,
    pub tail_l1: f64,
}

impl From<AlgebraElement> for SummationInput {
    fn from(element: AlgebraElement) -> Self {
        SummationInput { element, tail_l1: 0.0 }
    }
}

/// `‖M_φ(x) - x‖` for one net member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub index: f64,
    /// Bracket for the finitely supported part `(φ - 1) x̂`.
    pub bracket: NormBracket,
    /// Bound for the tail's contribution; 0 for finitely supported inputs.
    pub tail_bound: f64,
}

impl ConvergenceRecord {
    pub fn error_lower(&self) -> f64 {
        (self.bracket.lower - self.tail_bound).max(0.0)
    }

    /// Certified upper bound on the true error.
    pub fn error_upper(&self) -> f64 {
        self.bracket.upper + self.tail_bound
    }
}

/// Bracket `‖π_σ((φ - 1) x)‖` for every member of the net, in schedule
/// order. Members are evaluated in parallel.
///
/// For a truncated input the tail `t` contributes at most
/// `‖(φ - 1) t‖₁ ≤ 2 ‖t‖₁`, since every built-in member has `|φ| ≤ 1`.
pub fn run_summation(
    x: &SummationInput,
    sigma: &Cocycle,
    net: &SummingNet,
    radius: f64,
    opts: &SolverOptions,
) -> Result<Vec<ConvergenceRecord>> {
    if !(x.tail_l1.is_finite() && x.tail_l1 >= 0.0) {
        return Err(Error::InvalidArgument(format!("tail bound {} must be ≥ 0", x.tail_l1)));
    }
    for group in [x.element.group(), sigma.group()] {
        if group != net.group {
            return Err(Error::GroupMismatch {
                left: net.group,
                right: group,
            });
        }
    }
    net.members
        .par_iter()
        .map(|(index, phi)| {
            let d = apply(phi, &x.element)?.sub(&x.element)?;
            Ok(ConvergenceRecord {
                index: *index,
                bracket: bracket_norm(&d, sigma, &[radius], opts)?,
                tail_bound: 2.0 * x.tail_l1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn z(dim: usize) -> GroupDescriptor {
        GroupDescriptor::lattice(dim, LengthKind::L1).unwrap()
    }

    #[test]
    fn box_defects() {
        for n in 1..10u64 {
            let f = FolnerNet::Boxes.set(&z(1), n).unwrap();
            assert_eq!(folner_defect_exact(&z(1), &f, &GroupElement::lattice(&[1])).unwrap(), Rational64::new(2, n as i64));
            let f = FolnerNet::Boxes.set(&z(2), n).unwrap();
            assert_eq!(f.len() as u64, n * n);
            assert_eq!(folner_defect(&z(2), &f, &GroupElement::lattice(&[1, 0])).unwrap(), 2.0 / n as f64);
        }
    }

    /// Symmetric difference counted with sorted vectors, no hashing.
    fn defect_oracle(group: &GroupDescriptor, f: &[GroupElement], g: &GroupElement) -> f64 {
        let mut a = f.to_vec();
        a.sort();
        let mut b: Vec<_> = f.iter().map(|x| group.mul(g, x)).collect();
        b.sort();
        let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
        (2 * (a.len() - common)) as f64 / a.len() as f64
    }

    #[test]
    fn heisenberg_and_dihedral_defects_decrease() {
        for group in [GroupDescriptor::heisenberg(), GroupDescriptor::dihedral()] {
            let net = FolnerNet::for_group(&group).unwrap();
            for g in group.generators() {
                let d: Vec<f64> = (2..=12).map(|n| {
                    let f = net.set(&group, n).unwrap();
                    let v = folner_defect(&group, &f, &g).unwrap();
                    assert_eq!(v, defect_oracle(&group, &f, &g));
                    v
                }).collect();
                assert!(d.windows(2).all(|w| w[1] <= w[0]), "{group} {g:?} {d:?}");
                assert!(d[10] < d[0]);
            }
        }
    }

    #[test]
    fn free_groups_have_no_net() {
        assert!(FolnerNet::for_group(&GroupDescriptor::free(2).unwrap()).is_err());
    }

    #[test]
    fn nets_materialize() {
        let net = summing_net(&z(1), &NetKind::default_fejer()).unwrap();
        for (n, phi) in &net.members {
            let n = *n as i64;
            assert_eq!(phi.evaluate(&GroupElement::lattice(&[n - 1])).re, 1.0 / n as f64);
            assert_eq!(phi.evaluate(&GroupElement::lattice(&[n])).re, 0.0);
        }
        let f2 = GroupDescriptor::free(2).unwrap();
        let abel = summing_net(&f2, &NetKind::Abel { schedule: vec![0.5, 0.9, 0.99], length: None }).unwrap();
        assert_eq!(abel.members.len(), 3);
        let gauss = summing_net(&z(2), &NetKind::default_gauss()).unwrap();
        assert_eq!(gauss.members[0].1.evaluate(&GroupElement::lattice(&[1, 1])).re, 0.25);
        assert!(summing_net(&z(1), &NetKind::Abel { schedule: vec![0.9, 0.5], length: None }).is_err());
        assert!(summing_net(&z(1), &NetKind::Poly { schedule: vec![0.1, 0.5], q: 1 }).is_err());
    }

    #[test]
    fn fejer_on_integers_brackets_two_over_n() {
        let g = z(1);
        let x = AlgebraElement::indicator(&g, &[GroupElement::lattice(&[1]), GroupElement::lattice(&[-1])]).unwrap();
        let net = summing_net(&g, &NetKind::Fejer { folner: None, schedule: vec![2, 4, 8, 16] }).unwrap();
        let recs = run_summation(&x.into(), &Cocycle::trivial(&g), &net, 50.0, &SolverOptions::default()).unwrap();
        for r in &recs {
            let exact = 2.0 / r.index;
            assert!(r.error_lower() <= exact && exact <= r.error_upper(), "{r:?}");
            assert!(r.error_upper() - r.error_lower() <= 0.01);
        }
        assert!(recs.windows(2).all(|w| w[1].error_upper() <= w[0].error_upper()));
    }

    #[test]
    fn abel_on_free_sphere() {
        let f2 = GroupDescriptor::free(2).unwrap();
        let chi = AlgebraElement::indicator(&f2, enumerate(&f2, Region::Sphere(1)).unwrap().iter()).unwrap();
        let net = summing_net(&f2, &NetKind::Abel { schedule: vec![0.5, 0.9], length: None }).unwrap();
        let input = SummationInput { element: chi, tail_l1: 0.25 };
        let recs = run_summation(&input, &Cocycle::trivial(&f2), &net, 4.0, &SolverOptions::default()).unwrap();
        for r in &recs {
            assert!((r.bracket.upper - (1.0 - r.index) * 4.0).abs() < 1e-12);
            assert!(r.bracket.lower <= (1.0 - r.index) * 2.0 * 3f64.sqrt());
            assert_eq!(r.tail_bound, 0.5);
            assert_eq!(r.error_upper(), r.bracket.upper + 0.5);
        }
    }

    #[test]
    fn zero_error_for_the_identity() {
        let g = GroupDescriptor::dihedral();
        let e = AlgebraElement::delta(&g, g.identity()).unwrap().scale(Complex64::new(0.0, 3.0));
        let net = summing_net(&g, &NetKind::default_fejer()).unwrap();
        let recs = run_summation(&e.into(), &Cocycle::trivial(&g), &net, 3.0, &SolverOptions::default()).unwrap();
        assert!(recs.iter().all(|r| r.error_upper() == 0.0));
    }
}
