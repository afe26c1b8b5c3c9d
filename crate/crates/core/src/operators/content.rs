//! Lower bounds for the Haagerup content
//! `c(E) = sup{‖λ(f)‖ : supp f ⊆ E, ‖f‖₂ = 1}`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::compress::compress_set;
use super::solver::{top_singular, SolverOptions};
use crate::algebra::AlgebraElement;
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::groups::{enumerate, GroupDescriptor, GroupElement, Region};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentOptions {
    pub restarts: usize,
    /// Stop a restart once the objective gains less than this.
    pub stagnation: f64,
    pub max_rounds: usize,
    pub solver: SolverOptions,
}

impl Default for ContentOptions {
    fn default() -> Self {
        ContentOptions {
            restarts: 16,
            stagnation: 1e-9,
            max_rounds: 200,
            solver: SolverOptions::default(),
        }
    }
}

/// `lower ≤ c(E) ≤ upper = |E|^{1/2}`, with a unit-norm witness `f`
/// supported in `E` such that `lower ≤ ‖λ(f)‖`.
#[derive(Clone, Debug)]
pub struct ContentEstimate {
    pub set: Vec<GroupElement>,
    pub lower: f64,
    pub upper: f64,
    pub witness: AlgebraElement,
    pub radius: f64,
    pub restarts: usize,
    pub best_restart: usize,
    pub rounds: usize,
    pub matvecs: usize,
    pub seed: u64,
}

/// Alternating maximization: for fixed `f` take the top singular pair
/// `(ξ, η)` of the compression of `λ(f)` onto `Ball(R)`; for fixed `(ξ, η)`
/// the best `f` is `f(g) ∝ conj⟨λ(g)ξ, η⟩` on `E`. Each step can only raise
/// the objective. The first start is the normalized indicator of `E`, the
/// others are seeded random vectors.
pub fn content_lower(
    group: &GroupDescriptor,
    set: &[GroupElement],
    radius: f64,
    opts: &ContentOptions,
) -> Result<ContentEstimate> {
    let mut set = set.to_vec();
    set.sort_by_key(|g| (group.length_key(g), g.clone()));
    set.dedup();
    if set.is_empty() {
        return Err(Error::InvalidArgument("content of the empty set".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is needed".into()));
    }
    let cols = Arc::new(enumerate(group, Region::Ball(radius))?);
    let mut op = compress_set(&set, &Cocycle::trivial(group), &cols)?;
    let n = set.len();

    let mut best: Option<(f64, Vec<Complex64>, usize)> = None;
    let mut rounds = 0;
    let mut matvecs = 0;
    for restart in 0..opts.restarts {
        let mut f: Vec<Complex64> = if restart == 0 {
            vec![Complex64::new(1.0, 0.0); n]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.solver.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9));
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        normalize(&mut f);
        let mut start: Option<Vec<Complex64>> = None;
        let mut value = f64::NEG_INFINITY;
        let mut current = f.clone();
        for _ in 0..opts.max_rounds {
            rounds += 1;
            op.set_coefficients(&f);
            let (rep, pair) = top_singular(&op, &opts.solver, start.as_deref());
            matvecs += rep.matvecs;
            let gained = rep.value - value;
            if rep.value > value {
                value = rep.value;
                current.clone_from(&f);
            }
            if gained <= opts.stagnation * value.max(1.0) {
                break;
            }
            let mut next: Vec<Complex64> = (0..n)
                .map(|i| op.block_inner(i, &pair.right, &pair.left).conj())
                .collect();
            if !normalize(&mut next) {
                break;
            }
            f = next;
            start = Some(pair.right);
        }
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, current, restart));
        }
    }
    let (lower, f, best_restart) = best.expect("at least one restart");
    let witness = AlgebraElement::from_terms(group, set.iter().cloned().zip(f))?;
    Ok(ContentEstimate {
        upper: (n as f64).sqrt(),
        set,
        lower,
        witness,
        radius,
        restarts: opts.restarts,
        best_restart,
        rounds,
        matvecs,
        seed: opts.solver.seed,
    })
}

fn normalize(v: &mut [Complex64]) -> bool {
    let s = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
        true
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthKind;
    use crate::operators::norm_lower;

    #[test]
    fn singleton_has_content_one() {
        let g = GroupDescriptor::free(2).unwrap();
        let est = content_lower(&g, &[g.identity()], 3.0, &ContentOptions::default()).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-12);
        assert_eq!(est.upper, 1.0);
    }

    #[test]
    fn integer_interval_is_nearly_maximal() {
        let g = GroupDescriptor::lattice(1, LengthKind::L1).unwrap();
        let set: Vec<_> = (0..4).map(|k| GroupElement::lattice(&[k])).collect();
        let opts = ContentOptions {
            restarts: 4,
            ..Default::default()
        };
        let est = content_lower(&g, &set, 60.0, &opts).unwrap();
        assert_eq!(est.upper, 2.0);
        assert!(est.lower >= 1.95 && est.lower <= 2.0, "{}", est.lower);
        let w = &est.witness;
        assert!((w.norm(&crate::algebra::NormKind::L2) - 1.0).abs() < 1e-12);
        let check = norm_lower(w, &Cocycle::trivial(&g), 60.0, &SolverOptions::default()).unwrap();
        assert!(check.value >= est.lower - 1e-9);
    }

    #[test]
    fn restarts_never_lose_the_first_start() {
        let g = GroupDescriptor::free(2).unwrap();
        let set = enumerate(&g, Region::Sphere(1)).unwrap().elements().to_vec();
        let one = content_lower(&g, &set, 4.0, &ContentOptions { restarts: 1, ..Default::default() }).unwrap();
        let many = content_lower(&g, &set, 4.0, &ContentOptions { restarts: 4, ..Default::default() }).unwrap();
        assert!(many.lower >= one.lower);
        assert!(one.lower >= 1.0 && one.lower <= 3f64.sqrt());
    }

    #[test]
    fn empty_set_rejected() {
        let g = GroupDescriptor::dihedral();
        assert!(content_lower(&g, &[], 2.0, &ContentOptions::default()).is_err());
    }
}
