//! Heisenberg group arithmetic and the memoized breadth-first word length.

use std::sync::{OnceLock, RwLock};

use rustc_hash::FxHashMap;

/// x, x⁻¹, y, y⁻¹ as (a, b, c) triples.
pub(super) const GENERATORS: [[i64; 3]; 4] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]];

pub(super) fn mul(g: &[i64; 3], h: &[i64; 3]) -> [i64; 3] {
    [g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1]]
}

pub(super) fn inv(g: &[i64; 3]) -> [i64; 3] {
    [-g[0], -g[1], -g[2] + g[0] * g[1]]
}

struct Bfs {
    dist: FxHashMap<[i64; 3], u32>,
    layers: Vec<Vec<[i64; 3]>>,
}

impl Bfs {
    fn new() -> Self {
        let mut dist = FxHashMap::default();
        dist.insert([0; 3], 0);
        Bfs {
            dist,
            layers: vec![vec![[0; 3]]],
        }
    }

    fn grow(&mut self) {
        let depth = self.layers.len() as u32;
        let mut next = Vec::new();
        for g in self.layers.last().expect("layer 0 always present") {
            for s in &GENERATORS {
                let h = mul(g, s);
                if let std::collections::hash_map::Entry::Vacant(e) = self.dist.entry(h) {
                    e.insert(depth);
                    next.push(h);
                }
            }
        }
        next.sort_unstable();
        self.layers.push(next);
    }
}

fn cache() -> &'static RwLock<Bfs> {
    static CACHE: OnceLock<RwLock<Bfs>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Bfs::new()))
}

/// Word length with respect to {x, y, x⁻¹, y⁻¹}.
pub(super) fn word_length(g: &[i64; 3]) -> u32 {
    if let Some(&d) = cache().read().expect("bfs cache poisoned").dist.get(g) {
        return d;
    }
    let mut bfs = cache().write().expect("bfs cache poisoned");
    loop {
        if let Some(&d) = bfs.dist.get(g) {
            return d;
        }
        bfs.grow();
    }
}

/// Elements of exact word length `len`, sorted.
pub(super) fn sphere(len: usize) -> Vec<[i64; 3]> {
    {
        let bfs = cache().read().expect("bfs cache poisoned");
        if let Some(layer) = bfs.layers.get(len) {
            return layer.clone();
        }
    }
    let mut bfs = cache().write().expect("bfs cache poisoned");
    while bfs.layers.len() <= len {
        bfs.grow();
    }
    bfs.layers[len].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_law() {
        for g in [[1, 2, 3], [-4, 7, -1], [0, 0, 5]] {
            assert_eq!(mul(&g, &inv(&g)), [0; 3]);
            assert_eq!(mul(&inv(&g), &g), [0; 3]);
        }
    }

    #[test]
    fn commutator_has_length_four() {
        // x y x⁻¹ y⁻¹ = z
        let x = GENERATORS[0];
        let y = GENERATORS[2];
        let c = mul(&mul(&mul(&x, &y), &inv(&x)), &inv(&y));
        assert_eq!(c, [0, 0, 1]);
        assert_eq!(word_length(&c), 4);
        assert_eq!(word_length(&[0, 0, 0]), 0);
        assert_eq!(word_length(&[1, 1, 0]), 2);
    }

    #[test]
    fn small_spheres() {
        assert_eq!(sphere(0), vec![[0, 0, 0]]);
        assert_eq!(sphere(1).len(), 4);
        // x², y², x⁻², y⁻², and the eight xy-type products (c ∈ {0, ±1})
        assert_eq!(sphere(2).len(), 12);
    }
}
