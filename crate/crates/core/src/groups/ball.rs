//! Balls, spheres and annuli for the built-in length functions.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::{heisenberg, GroupDescriptor, GroupElement, GroupKind, LengthKind};
use crate::error::{Error, Result};

/// Largest region `enumerate` will materialize.
pub const MAX_REGION_SIZE: usize = 20_000_000;

/// A region described by the length function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `{g : L(g) ≤ r}`
    Ball(f64),
    /// `{g : L(g) = k}`
    Sphere(u64),
    /// `{g : k ≤ L(g) < k + 1}`
    Annulus(u64),
}

/// The elements of a region in canonical order: by length, then by the
/// canonical encoding.
#[derive(Clone, Debug)]
pub struct Ball {
    group: GroupDescriptor,
    region: Region,
    elements: Vec<GroupElement>,
    index: FxHashMap<GroupElement, usize>,
}

impl Ball {
    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    pub fn region(&self) -> Region {
        self.region
    }

    /// Radius for `Ball` regions, the shell index otherwise.
    pub fn radius(&self) -> f64 {
        match self.region {
            Region::Ball(r) => r,
            Region::Sphere(k) | Region::Annulus(k) => k as f64,
        }
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }
}

/// Exact test `s ≤ r²` for a non-negative integer `s` and finite `r ≥ 0`.
pub(crate) fn squared_within(s: u64, r: f64) -> bool {
    if r.is_infinite() {
        return true;
    }
    if r == 0.0 {
        return s == 0;
    }
    // r = m · 2^e exactly
    let bits = r.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let m2 = (m as u128) * (m as u128);
    if e >= 0 {
        // r² = m² · 2^{2e}; anything this large dominates a u64
        if 2 * e >= 22 {
            return true;
        }
        return (s as u128) <= (m2 << (2 * e));
    }
    let shift = (-2 * e) as u32;
    if s == 0 {
        return true;
    }
    // s · 2^shift ≤ m²  with m² < 2^106
    if shift >= 128 || (s as u128).leading_zeros() < shift {
        return false;
    }
    ((s as u128) << shift) <= m2
}

fn integer_floor(r: f64) -> u64 {
    if r >= u64::MAX as f64 {
        u64::MAX
    } else {
        r.floor() as u64
    }
}

fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

struct KeyFilter {
    group: GroupDescriptor,
    region: Region,
}

impl KeyFilter {
    fn accepts(&self, key: u64) -> bool {
        let l2 = self.group.is_lattice() && self.group.length_kind() == LengthKind::L2;
        match (self.region, l2) {
            (Region::Ball(r), true) => squared_within(key, r),
            (Region::Ball(r), false) => key <= integer_floor(r),
            (Region::Sphere(k), true) => key == k.saturating_mul(k),
            (Region::Annulus(k), true) => {
                key >= k.saturating_mul(k) && key < (k + 1).saturating_mul(k + 1)
            }
            (Region::Sphere(k) | Region::Annulus(k), false) => key == k,
        }
    }

    /// Largest value of `L` (rounded down) any element of the region can have.
    fn max_length(&self) -> u64 {
        match self.region {
            Region::Ball(r) => integer_floor(r),
            Region::Sphere(k) | Region::Annulus(k) => k + 1,
        }
    }
}

/// Enumerate a region of the group in canonical order.
pub fn enumerate(group: &GroupDescriptor, region: Region) -> Result<Ball> {
    if let Region::Ball(r) = region {
        if r.is_nan() || r < 0.0 {
            return Err(Error::InvalidRadius(r));
        }
        if r.is_infinite() {
            return Err(Error::RegionTooLarge {
                size: u128::MAX,
                cap: MAX_REGION_SIZE,
            });
        }
    }
    let filter = KeyFilter {
        group: *group,
        region,
    };
    let mut keyed: Vec<(u64, GroupElement)> = match group.kind() {
        GroupKind::IntLattice { dim } => lattice_region(group, dim, &filter)?,
        GroupKind::Free { rank } => free_region(rank, &filter)?,
        GroupKind::Heisenberg => heisenberg_region(&filter)?,
        GroupKind::InfiniteDihedral => dihedral_region(&filter),
    };
    keyed.sort_unstable();
    let elements: Vec<GroupElement> = keyed.into_iter().map(|(_, g)| g).collect();
    let index = elements
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    Ok(Ball {
        group: *group,
        region,
        elements,
        index,
    })
}

fn lattice_region(
    group: &GroupDescriptor,
    dim: usize,
    filter: &KeyFilter,
) -> Result<Vec<(u64, GroupElement)>> {
    let max_len = filter.max_length();
    let bound = match group.length_kind() {
        LengthKind::L2Squared => isqrt(max_len),
        _ => max_len,
    };
    let side = 2 * (bound as u128) + 1;
    let boxed = side.checked_pow(dim as u32).unwrap_or(u128::MAX);
    // the L1 ball is much smaller than its bounding box in high dimension, so
    // only refuse outright when even the box walk is hopeless
    if boxed > (MAX_REGION_SIZE as u128) * 64 {
        return Err(Error::RegionTooLarge {
            size: boxed,
            cap: MAX_REGION_SIZE,
        });
    }
    let b = bound as i64;
    let mut out = Vec::new();
    let mut coords: SmallVec<[i64; 4]> = SmallVec::from_elem(-b, dim);
    loop {
        let g = GroupElement::Lattice(coords.clone());
        let key = group.length_key(&g);
        if filter.accepts(key) {
            out.push((key, g));
            if out.len() > MAX_REGION_SIZE {
                return Err(Error::RegionTooLarge {
                    size: out.len() as u128,
                    cap: MAX_REGION_SIZE,
                });
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(out);
            }
            if coords[i] < b {
                coords[i] += 1;
                break;
            }
            coords[i] = -b;
            i += 1;
        }
    }
}

fn free_region(rank: usize, filter: &KeyFilter) -> Result<Vec<(u64, GroupElement)>> {
    let max_len = filter.max_length();
    let two_n = 2 * rank as u128;
    let mut total: u128 = 1;
    let mut sphere: u128 = 1;
    for len in 1..=max_len {
        sphere = if len == 1 {
            two_n
        } else {
            sphere.saturating_mul(two_n - 1)
        };
        if filter.accepts(len) {
            total = total.saturating_add(sphere);
        }
        if total > MAX_REGION_SIZE as u128 {
            return Err(Error::RegionTooLarge {
                size: total,
                cap: MAX_REGION_SIZE,
            });
        }
    }
    let letters: Vec<i8> = (1..=rank as i8).flat_map(|i| [i, -i]).collect();
    let mut out = Vec::new();
    let mut layer: Vec<SmallVec<[i8; 16]>> = vec![SmallVec::new()];
    for len in 0..=max_len {
        if filter.accepts(len) {
            out.extend(layer.iter().map(|w| (len, GroupElement::Free(w.clone()))));
        }
        if len == max_len {
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for w in &layer {
            for &l in &letters {
                if w.last() != Some(&-l) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

fn heisenberg_region(filter: &KeyFilter) -> Result<Vec<(u64, GroupElement)>> {
    let max_len = filter.max_length();
    let mut out = Vec::new();
    for len in 0..=max_len {
        if !filter.accepts(len) {
            continue;
        }
        let layer = heisenberg::sphere(len as usize);
        if out.len() + layer.len() > MAX_REGION_SIZE {
            return Err(Error::RegionTooLarge {
                size: (out.len() + layer.len()) as u128,
                cap: MAX_REGION_SIZE,
            });
        }
        out.extend(layer.into_iter().map(|g| (len, GroupElement::Heisenberg(g))));
    }
    Ok(out)
}

fn dihedral_region(filter: &KeyFilter) -> Vec<(u64, GroupElement)> {
    let max_len = filter.max_length();
    let mut out = Vec::new();
    for len in 0..=max_len {
        if !filter.accepts(len) {
            continue;
        }
        let m = (len / 2) as i64;
        if len == 0 {
            out.push((0, GroupElement::Dihedral { flip: false, shift: 0 }));
        } else if len % 2 == 0 {
            out.push((len, GroupElement::Dihedral { flip: false, shift: m }));
            out.push((len, GroupElement::Dihedral { flip: false, shift: -m }));
        } else {
            out.push((len, GroupElement::Dihedral { flip: true, shift: m }));
            out.push((len, GroupElement::Dihedral { flip: true, shift: -(m + 1) }));
        }
    }
    out
}
