//! Rectangular compressions `π_σ(f) P_R` as sparse matrices.

use std::sync::Arc;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::algebra::AlgebraElement;
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use smallvec::SmallVec;

use crate::groups::{enumerate, Ball, GroupDescriptor, GroupElement, GroupKind, Region};

/// Anything the singular-value solvers can multiply with.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    /// `x = Aᴴ y`; `x` is overwritten.
    fn apply_adjoint(&self, y: &[Complex64], x: &mut [Complex64]);
}

/// One support element `g`: the partial permutation `Λ_σ(g) P_R` with its
/// phases `σ(g, t)`.
#[derive(Clone, Debug)]
struct Block {
    element: GroupElement,
    rows: Vec<u32>,
    phases: Option<Vec<Complex64>>,
}

/// The matrix of `π_σ(f) P_R` from `ℓ²(Ball(R))` to `ℓ²(G)`.
///
/// Entry `(s, t)` is `f(st⁻¹) σ(st⁻¹, t)`. Only the rows hit by some column
/// are stored: these are the elements of `supp(f)·Ball(R) ⊆ Ball(R + k)`, and
/// dropping the zero rows leaves every norm unchanged. Rows are numbered in
/// order of first appearance, which is deterministic.
#[derive(Clone, Debug)]
pub struct CompressedOperator {
    group: GroupDescriptor,
    cols: Arc<Ball>,
    rows: Vec<GroupElement>,
    blocks: Vec<Block>,
    coefficients: Vec<Complex64>,
}

/// `compress(f, σ, R)`.
pub fn compress(f: &AlgebraElement, sigma: &Cocycle, radius: f64) -> Result<CompressedOperator> {
    let cols = Arc::new(enumerate(&f.group(), Region::Ball(radius))?);
    compress_on(f, sigma, &cols)
}

/// [`compress`] onto an already enumerated column ball.
pub fn compress_on(f: &AlgebraElement, sigma: &Cocycle, cols: &Arc<Ball>) -> Result<CompressedOperator> {
    let support: Vec<GroupElement> = f.support().cloned().collect();
    let mut op = compress_set(&support, sigma, cols)?;
    op.coefficients = f.terms().map(|(_, c)| *c).collect();
    Ok(op)
}

/// Structure of the compression for every `f` supported in `set`; all
/// coefficients start at 1. See [`CompressedOperator::set_coefficients`].
pub fn compress_set(set: &[GroupElement], sigma: &Cocycle, cols: &Arc<Ball>) -> Result<CompressedOperator> {
    let group = cols.group();
    if sigma.group() != group {
        return Err(Error::GroupMismatch {
            left: group,
            right: sigma.group(),
        });
    }
    for g in set {
        group.check(g)?;
    }
    let mut index = RowIndex::new(&group, set, cols);
    let mut origins: Vec<(u32, u32)> = Vec::new();
    let mut blocks = Vec::with_capacity(set.len());
    for (b, g) in set.iter().enumerate() {
        let mut rows = Vec::with_capacity(cols.len());
        for (c, t) in cols.iter().enumerate() {
            let s = group.mul(g, t);
            let (id, fresh) = index.insert(s);
            if fresh {
                origins.push((b as u32, c as u32));
            }
            rows.push(id);
        }
        let phases = (!sigma.is_trivial())
            .then(|| cols.iter().map(|t| sigma.evaluate(g, t)).collect());
        blocks.push(Block {
            element: g.clone(),
            rows,
            phases,
        });
    }
    drop(index);
    let rows = origins
        .into_iter()
        .map(|(b, c)| group.mul(&blocks[b as usize].element, &cols.elements()[c as usize]))
        .collect();
    Ok(CompressedOperator {
        group,
        cols: Arc::clone(cols),
        rows,
        coefficients: vec![Complex64::new(1.0, 0.0); blocks.len()],
        blocks,
    })
}

/// Dense numbering of row elements in order of first appearance.
///
/// When every product `g·t` falls in a known finite range with a cheap exact
/// rank (words up to some length, coordinate boxes) the numbering goes
/// through a flat table; otherwise through a hash map.
enum RowIndex {
    Table { ranker: Ranker, ids: Vec<u32>, len: u32 },
    Hashed(FxHashMap<GroupElement, u32>),
}

/// Largest rank table, in entries, regardless of the number of products.
const TABLE_FLOOR: u128 = 1 << 22;
const TABLE_CAP: u128 = 1 << 27;

impl RowIndex {
    fn new(group: &GroupDescriptor, set: &[GroupElement], cols: &Ball) -> Self {
        let products = (set.len() as u128) * (cols.len() as u128);
        let budget = (16 * products).clamp(TABLE_FLOOR, TABLE_CAP);
        match Ranker::new(group, set, cols.elements()) {
            Some((ranker, size)) if size <= budget => RowIndex::Table {
                ranker,
                ids: vec![0; size as usize],
                len: 0,
            },
            _ => RowIndex::Hashed(FxHashMap::default()),
        }
    }

    fn insert(&mut self, g: GroupElement) -> (u32, bool) {
        match self {
            RowIndex::Table { ranker, ids, len } => {
                let slot = &mut ids[ranker.rank(&g)];
                if *slot == 0 {
                    *len = len.checked_add(1).expect("compression exceeds u32 rows");
                    *slot = *len;
                    (*len - 1, true)
                } else {
                    (*slot - 1, false)
                }
            }
            RowIndex::Hashed(map) => {
                let next = u32::try_from(map.len()).expect("compression exceeds u32 rows");
                let id = *map.entry(g).or_insert(next);
                (id, id == next)
            }
        }
    }
}

/// Exact injective rank of the products `g·t` into `0..size`.
enum Ranker {
    /// Reduced words of length at most some bound, by length then mixed
    /// radix: `2r` choices for the first letter, `2r - 1` after that.
    Words { rank: i8, offsets: Vec<usize> },
    /// Integer coordinates in a box.
    Box { lo: SmallVec<[i64; 4]>, strides: SmallVec<[usize; 4]> },
}

impl Ranker {
    fn new(group: &GroupDescriptor, set: &[GroupElement], cols: &[GroupElement]) -> Option<(Ranker, u128)> {
        if set.is_empty() || cols.is_empty() {
            return None;
        }
        let words = |v: &[GroupElement]| -> usize {
            v.iter().map(|g| if let GroupElement::Free(w) = g { w.len() } else { 0 }).max().unwrap_or(0)
        };
        match group.kind() {
            GroupKind::Free { rank } => {
                let max_len = words(set) + words(cols);
                let r = rank as u128;
                let mut offsets = vec![0usize];
                let mut total: u128 = 1;
                let mut sphere: u128 = 2 * r;
                for _ in 1..=max_len {
                    offsets.push(usize::try_from(total).ok()?);
                    total = total.checked_add(sphere)?;
                    if total > TABLE_CAP {
                        return None;
                    }
                    sphere = sphere.checked_mul(2 * r - 1)?;
                }
                Some((Ranker::Words { rank: i8::try_from(rank).ok()?, offsets }, total))
            }
            _ => {
                let range = |v: &[GroupElement]| -> Option<Vec<(i64, i64)>> {
                    let mut out: Vec<(i64, i64)> = Vec::new();
                    for g in v {
                        let c = coordinates(g);
                        if out.is_empty() {
                            out = c.iter().map(|&x| (x, x)).collect();
                        }
                        for (r, &x) in out.iter_mut().zip(c.iter()) {
                            *r = (r.0.min(x), r.1.max(x));
                        }
                    }
                    Some(out)
                };
                let (s, t) = (range(set)?, range(cols)?);
                let sum = |a: (i64, i64), b: (i64, i64)| Some((a.0.checked_add(b.0)?, a.1.checked_add(b.1)?));
                let bounds: Vec<(i64, i64)> = match group.kind() {
                    GroupKind::IntLattice { .. } => {
                        s.iter().zip(&t).map(|(&a, &b)| sum(a, b)).collect::<Option<_>>()?
                    }
                    GroupKind::Heisenberg => {
                        // c = c_g + c_t + a_g·b_t
                        let corners = [s[0].0, s[0].1]
                            .iter()
                            .flat_map(|&x| [t[1].0, t[1].1].map(|y| x.checked_mul(y)))
                            .collect::<Option<Vec<i64>>>()?;
                        let cross = (*corners.iter().min()?, *corners.iter().max()?);
                        vec![sum(s[0], t[0])?, sum(s[1], t[1])?, sum(sum(s[2], t[2])?, cross)?]
                    }
                    GroupKind::InfiniteDihedral => {
                        // shift = ±k + m
                        let k = s[1].0.checked_abs()?.max(s[1].1.checked_abs()?);
                        vec![(0, 1), sum((-k, k), t[1])?]
                    }
                    GroupKind::Free { .. } => unreachable!(),
                };
                let mut strides = SmallVec::new();
                let mut total: u128 = 1;
                for &(lo, hi) in &bounds {
                    strides.push(usize::try_from(total).ok()?);
                    total = total.checked_mul((i128::from(hi) - i128::from(lo) + 1) as u128)?;
                    if total > TABLE_CAP {
                        return None;
                    }
                }
                let lo = bounds.iter().map(|b| b.0).collect();
                Some((Ranker::Box { lo, strides }, total))
            }
        }
    }

    fn rank(&self, g: &GroupElement) -> usize {
        match (self, g) {
            (Ranker::Words { rank, offsets }, GroupElement::Free(w)) => {
                let code = |l: i8| if l > 0 { (l - 1) as usize } else { (rank - 1 - l) as usize };
                let mut index = 0usize;
                let mut prev: Option<i8> = None;
                for &l in w.iter() {
                    index = match prev {
                        None => code(l),
                        Some(p) => {
                            let (c, banned) = (code(l), code(-p));
                            index * (2 * *rank as usize - 1) + c - usize::from(c > banned)
                        }
                    };
                    prev = Some(l);
                }
                offsets[w.len()] + index
            }
            (Ranker::Box { lo, strides }, g) => coordinates(g)
                .iter()
                .zip(lo.iter().zip(strides.iter()))
                .map(|(&x, (&l, &s))| (x - l) as usize * s)
                .sum(),
            _ => unreachable!("ranker built for another group"),
        }
    }
}

fn coordinates(g: &GroupElement) -> SmallVec<[i64; 4]> {
    match g {
        GroupElement::Lattice(v) => v.clone(),
        GroupElement::Heisenberg(v) => SmallVec::from_slice(v),
        GroupElement::Dihedral { flip, shift } => SmallVec::from_slice(&[i64::from(*flip), *shift]),
        GroupElement::Free(_) => SmallVec::new(),
    }
}

impl CompressedOperator {
    pub fn group(&self) -> GroupDescriptor {
        self.group
    }

    pub fn radius(&self) -> f64 {
        self.cols.radius()
    }

    pub fn columns(&self) -> &Ball {
        &self.cols
    }

    pub fn row_elements(&self) -> &[GroupElement] {
        &self.rows
    }

    /// Support elements in block order.
    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.blocks.iter().map(|b| &b.element)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Replace the coefficient of each support element (block order).
    pub fn set_coefficients(&mut self, coefficients: &[Complex64]) {
        assert_eq!(coefficients.len(), self.blocks.len());
        self.coefficients.copy_from_slice(coefficients);
    }

    pub fn nnz(&self) -> usize {
        self.blocks.len() * self.cols.len()
    }

    /// Entry `(s, t)`, zero when `t ∉ Ball(R)` or `st⁻¹ ∉ supp(f)`.
    pub fn entry(&self, s: &GroupElement, t: &GroupElement) -> Complex64 {
        let Some(col) = self.cols.index_of(t) else {
            return Complex64::new(0.0, 0.0);
        };
        for (b, c) in self.blocks.iter().zip(&self.coefficients) {
            if self.rows[b.rows[col] as usize] == *s {
                return c * b.phases.as_ref().map_or(Complex64::new(1.0, 0.0), |p| p[col]);
            }
        }
        Complex64::new(0.0, 0.0)
    }

    /// Dense row-major copy, for small operators.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.ncols()]; self.nrows()];
        for (b, c) in self.blocks.iter().zip(&self.coefficients) {
            for (t, &r) in b.rows.iter().enumerate() {
                out[r as usize][t] += c * b.phases.as_ref().map_or(Complex64::new(1.0, 0.0), |p| p[t]);
            }
        }
        out
    }

    /// `⟨Λ_σ(g) ξ, η⟩` for the `i`-th support element `g`, with `ξ` on the
    /// columns and `η` on the rows.
    pub fn block_inner(&self, i: usize, xi: &[Complex64], eta: &[Complex64]) -> Complex64 {
        let b = &self.blocks[i];
        let mut acc = Complex64::new(0.0, 0.0);
        match &b.phases {
            None => {
                for (t, &r) in b.rows.iter().enumerate() {
                    acc += xi[t] * eta[r as usize].conj();
                }
            }
            Some(p) => {
                for (t, &r) in b.rows.iter().enumerate() {
                    acc += p[t] * xi[t] * eta[r as usize].conj();
                }
            }
        }
        acc
    }
}

impl LinearOperator for CompressedOperator {
    fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn ncols(&self) -> usize {
        self.cols.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.fill(Complex64::new(0.0, 0.0));
        for (b, &c) in self.blocks.iter().zip(&self.coefficients) {
            match &b.phases {
                None => {
                    for (&r, &xt) in b.rows.iter().zip(x) {
                        y[r as usize] += c * xt;
                    }
                }
                Some(p) => {
                    for ((&r, &xt), &pt) in b.rows.iter().zip(x).zip(p) {
                        y[r as usize] += c * pt * xt;
                    }
                }
            }
        }
    }

    fn apply_adjoint(&self, y: &[Complex64], x: &mut [Complex64]) {
        x.fill(Complex64::new(0.0, 0.0));
        for (b, &c) in self.blocks.iter().zip(&self.coefficients) {
            let cc = c.conj();
            match &b.phases {
                None => {
                    for (&r, xt) in b.rows.iter().zip(x.iter_mut()) {
                        *xt += cc * y[r as usize];
                    }
                }
                Some(p) => {
                    for ((&r, xt), &pt) in b.rows.iter().zip(x.iter_mut()).zip(p) {
                        *xt += cc * pt.conj() * y[r as usize];
                    }
                }
            }
        }
    }
}
