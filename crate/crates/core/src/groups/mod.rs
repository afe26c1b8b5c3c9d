//! The four built-in finitely generated groups: integer lattices, free groups,
//! the discrete Heisenberg group and the infinite dihedral group.
//!
//! Elements are stored in a canonical form so that equality is structural.
//! All group arithmetic goes through a [`GroupDescriptor`], which also fixes
//! the length function used for balls, weights and kernels.

mod ball;
mod heisenberg;
mod syntax;

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use ball::{enumerate, Ball, Region, MAX_REGION_SIZE};
pub use syntax::WordToken;

/// Which group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupKind {
    /// ℤ^N with coordinate addition.
    IntLattice { dim: usize },
    /// Free group on `rank` generators.
    Free { rank: usize },
    /// Integer upper unitriangular 3×3 matrices.
    Heisenberg,
    /// ⟨s, t | s² = t² = e⟩.
    InfiniteDihedral,
}

/// Length function attached to a group. `L1`, `L2` and `L2Squared` only apply
/// to lattices; on a lattice `Word` coincides with `L1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthKind {
    #[default]
    Word,
    L1,
    L2,
    L2Squared,
}

#[derive(Serialize, Deserialize)]
struct RawDescriptor {
    #[serde(flatten)]
    kind: GroupKind,
    #[serde(default)]
    length: LengthKind,
}

/// A group together with its length function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub struct GroupDescriptor {
    kind: GroupKind,
    length: LengthKind,
}

impl TryFrom<RawDescriptor> for GroupDescriptor {
    type Error = Error;

    fn try_from(raw: RawDescriptor) -> Result<Self> {
        GroupDescriptor::new(raw.kind, raw.length)
    }
}

impl From<GroupDescriptor> for RawDescriptor {
    fn from(d: GroupDescriptor) -> Self {
        RawDescriptor {
            kind: d.kind,
            length: d.length,
        }
    }
}

/// Canonical form of a group element.
///
/// Free words hold signed letters: `i` is the `i`-th generator and `-i` its
/// inverse (`1 ≤ i ≤ 26`). Dihedral elements are `s^flip (ts)^shift`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Lattice(SmallVec<[i64; 4]>),
    Free(SmallVec<[i8; 16]>),
    Heisenberg([i64; 3]),
    Dihedral { flip: bool, shift: i64 },
}

impl GroupDescriptor {
    pub fn new(kind: GroupKind, length: LengthKind) -> Result<Self> {
        match kind {
            GroupKind::IntLattice { dim: 0 } => {
                return Err(Error::InvalidGroup("lattice dimension must be ≥ 1".into()))
            }
            GroupKind::Free { rank } if rank == 0 || rank > 26 => {
                return Err(Error::InvalidGroup(format!(
                    "free rank must lie in 1..=26, got {rank}"
                )))
            }
            GroupKind::IntLattice { .. } => {}
            _ if length != LengthKind::Word => {
                return Err(Error::InvalidGroup(format!(
                    "length {length:?} is only available on lattices"
                )))
            }
            _ => {}
        }
        Ok(GroupDescriptor { kind, length })
    }

    pub fn lattice(dim: usize, length: LengthKind) -> Result<Self> {
        Self::new(GroupKind::IntLattice { dim }, length)
    }

    pub fn free(rank: usize) -> Result<Self> {
        Self::new(GroupKind::Free { rank }, LengthKind::Word)
    }

    pub fn heisenberg() -> Self {
        GroupDescriptor {
            kind: GroupKind::Heisenberg,
            length: LengthKind::Word,
        }
    }

    pub fn dihedral() -> Self {
        GroupDescriptor {
            kind: GroupKind::InfiniteDihedral,
            length: LengthKind::Word,
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn length_kind(&self) -> LengthKind {
        self.length
    }

    /// Same group, different length function (lattices only).
    pub fn with_length(&self, length: LengthKind) -> Result<Self> {
        Self::new(self.kind, length)
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self.kind, GroupKind::IntLattice { .. })
    }

    /// Amenable groups among the built-ins (all but free groups of rank ≥ 2).
    pub fn is_amenable(&self) -> bool {
        !matches!(self.kind, GroupKind::Free { rank } if rank >= 2)
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            GroupKind::IntLattice { dim } => GroupElement::Lattice(SmallVec::from_elem(0, dim)),
            GroupKind::Free { .. } => GroupElement::Free(SmallVec::new()),
            GroupKind::Heisenberg => GroupElement::Heisenberg([0; 3]),
            GroupKind::InfiniteDihedral => GroupElement::Dihedral {
                flip: false,
                shift: 0,
            },
        }
    }

    /// Symmetric generating set `S ∪ S⁻¹` defining the word length.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self.kind {
            GroupKind::IntLattice { dim } => {
                let mut out = Vec::with_capacity(2 * dim);
                for i in 0..dim {
                    for sign in [1, -1] {
                        let mut v = SmallVec::from_elem(0, dim);
                        v[i] = sign;
                        out.push(GroupElement::Lattice(v));
                    }
                }
                out
            }
            GroupKind::Free { rank } => (1..=rank as i8)
                .flat_map(|i| [i, -i])
                .map(|l| GroupElement::Free(SmallVec::from_slice(&[l])))
                .collect(),
            GroupKind::Heisenberg => heisenberg::GENERATORS
                .iter()
                .map(|g| GroupElement::Heisenberg(*g))
                .collect(),
            GroupKind::InfiniteDihedral => vec![dihedral_s(), dihedral_t()],
        }
    }

    /// Whether `g` is a canonical element of this group.
    pub fn contains(&self, g: &GroupElement) -> bool {
        match (self.kind, g) {
            (GroupKind::IntLattice { dim }, GroupElement::Lattice(v)) => v.len() == dim,
            (GroupKind::Free { rank }, GroupElement::Free(w)) => {
                w.iter().all(|&l| l != 0 && (l.unsigned_abs() as usize) <= rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupKind::Heisenberg, GroupElement::Heisenberg(_)) => true,
            (GroupKind::InfiniteDihedral, GroupElement::Dihedral { .. }) => true,
            _ => false,
        }
    }

    pub(crate) fn check(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::ForeignElement {
                element: format!("{g:?}"),
                group: *self,
            })
        }
    }

    /// Checked product `gh`.
    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.mul(g, h))
    }

    /// Product `gh` without membership checks. Both arguments must belong to
    /// this group; mixing variants panics.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        match (g, h) {
            (GroupElement::Lattice(a), GroupElement::Lattice(b)) => {
                GroupElement::Lattice(a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
            }
            (GroupElement::Free(a), GroupElement::Free(b)) => {
                let mut cancel = 0;
                while cancel < a.len() && cancel < b.len() && a[a.len() - 1 - cancel] == -b[cancel]
                {
                    cancel += 1;
                }
                let mut w: SmallVec<[i8; 16]> = SmallVec::with_capacity(a.len() + b.len() - 2 * cancel);
                w.extend_from_slice(&a[..a.len() - cancel]);
                w.extend_from_slice(&b[cancel..]);
                GroupElement::Free(w)
            }
            (GroupElement::Heisenberg(a), GroupElement::Heisenberg(b)) => {
                GroupElement::Heisenberg(heisenberg::mul(a, b))
            }
            (
                GroupElement::Dihedral { flip: e, shift: k },
                GroupElement::Dihedral { flip: f, shift: m },
            ) => GroupElement::Dihedral {
                flip: e ^ f,
                shift: if *f { -k + m } else { k + m },
            },
            _ => panic!("mul: elements {g:?} and {h:?} come from different groups"),
        }
    }

    pub fn invert(&self, g: &GroupElement) -> GroupElement {
        match g {
            GroupElement::Lattice(v) => GroupElement::Lattice(v.iter().map(|x| -x).collect()),
            GroupElement::Free(w) => GroupElement::Free(w.iter().rev().map(|l| -l).collect()),
            GroupElement::Heisenberg(a) => GroupElement::Heisenberg(heisenberg::inv(a)),
            GroupElement::Dihedral { flip, shift } => {
                if *flip {
                    g.clone()
                } else {
                    GroupElement::Dihedral {
                        flip: false,
                        shift: -shift,
                    }
                }
            }
        }
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        match g {
            GroupElement::Lattice(v) => v.iter().all(|&x| x == 0),
            GroupElement::Free(w) => w.is_empty(),
            GroupElement::Heisenberg(a) => *a == [0; 3],
            GroupElement::Dihedral { flip, shift } => !flip && *shift == 0,
        }
    }

    /// Exact integer ordering key for the length: the squared Euclidean norm
    /// for `L2`, the length itself otherwise. Monotone in [`Self::word_length`].
    pub fn length_key(&self, g: &GroupElement) -> u64 {
        match g {
            GroupElement::Lattice(v) => match self.length {
                LengthKind::Word | LengthKind::L1 => v.iter().map(|x| x.unsigned_abs()).sum(),
                LengthKind::L2 | LengthKind::L2Squared => {
                    v.iter().map(|x| x.unsigned_abs() * x.unsigned_abs()).sum()
                }
            },
            GroupElement::Free(w) => w.len() as u64,
            GroupElement::Heisenberg(a) => heisenberg::word_length(a) as u64,
            GroupElement::Dihedral { flip, shift } => dihedral_length(*flip, *shift),
        }
    }

    /// The length `L(g)` for this descriptor's length kind.
    pub fn word_length(&self, g: &GroupElement) -> f64 {
        self.key_length(self.length_key(g))
    }

    /// The length `L` of elements with the given [`Self::length_key`].
    pub fn key_length(&self, key: u64) -> f64 {
        if self.is_lattice() && self.length == LengthKind::L2 {
            (key as f64).sqrt()
        } else {
            key as f64
        }
    }

    /// Whether `L` takes integer values only (so annuli and spheres agree).
    pub fn integer_valued(&self) -> bool {
        !(self.is_lattice() && self.length == LengthKind::L2)
    }

    /// Parse the textual word syntax for this group.
    pub fn parse(&self, word: &str) -> Result<GroupElement> {
        let token = WordToken::parse(word)?;
        self.from_token(&token, word)
    }

    pub fn from_token(&self, token: &WordToken, word: &str) -> Result<GroupElement> {
        syntax::element_from_token(self, token, word)
    }

    /// Canonical textual form, inverse to [`Self::parse`].
    pub fn format(&self, g: &GroupElement) -> String {
        syntax::format_element(g)
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GroupKind::IntLattice { dim } => {
                let l = match self.length {
                    LengthKind::Word | LengthKind::L1 => "l1",
                    LengthKind::L2 => "l2",
                    LengthKind::L2Squared => "l2sq",
                };
                write!(f, "Z^{dim}[{l}]")
            }
            GroupKind::Free { rank } => write!(f, "F_{rank}"),
            GroupKind::Heisenberg => write!(f, "H3(Z)"),
            GroupKind::InfiniteDihedral => write!(f, "D_inf"),
        }
    }
}

impl GroupElement {
    pub fn lattice(coords: &[i64]) -> Self {
        GroupElement::Lattice(SmallVec::from_slice(coords))
    }

    /// Free word from signed letters; reduces adjacent cancellations.
    pub fn free_word(letters: &[i8]) -> Self {
        let mut w: SmallVec<[i8; 16]> = SmallVec::new();
        for &l in letters {
            if w.last() == Some(&-l) {
                w.pop();
            } else {
                w.push(l);
            }
        }
        GroupElement::Free(w)
    }

    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        GroupElement::Heisenberg([a, b, c])
    }
}

pub(crate) fn dihedral_s() -> GroupElement {
    GroupElement::Dihedral {
        flip: true,
        shift: 0,
    }
}

// t = (ts)s = s (ts)^{-1}
pub(crate) fn dihedral_t() -> GroupElement {
    GroupElement::Dihedral {
        flip: true,
        shift: -1,
    }
}

fn dihedral_length(flip: bool, shift: i64) -> u64 {
    let k = shift.unsigned_abs();
    match (flip, shift >= 0) {
        (false, _) => 2 * k,
        (true, true) => 2 * k + 1,
        (true, false) => 2 * k - 1,
    }
}
