//! Seeded random elements and empirical decay constants.

use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::norm_lower_on;
use super::solver::SolverOptions;
use crate::algebra::{AlgebraElement, NormKind, WeightFunction};
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::groups::{enumerate, Ball, GroupDescriptor, Region};

/// Deterministic generator of finitely supported elements.
///
/// Most samples are sparse: a handful of random elements of `Ball(radius)`
/// with random complex or nonnegative coefficients. About one in eight is
/// radial, a combination of whole spheres, since those are the extremal
/// elements for decay inequalities.
#[derive(Clone, Debug)]
pub struct ElementSampler {
    group: GroupDescriptor,
    ball: Ball,
    radius: u64,
    max_terms: usize,
    seed: u64,
    rng: ChaCha8Rng,
}

impl ElementSampler {
    pub fn new(group: &GroupDescriptor, radius: u64, max_terms: usize, seed: u64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::InvalidArgument("samples need at least one term".into()));
        }
        Ok(ElementSampler {
            group: *group,
            ball: enumerate(group, Region::Ball(radius as f64))?,
            radius,
            max_terms,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&mut self) -> AlgebraElement {
        let rng = &mut self.rng;
        let positive = rng.random_bool(0.5);
        let coefficient = |rng: &mut ChaCha8Rng| {
            if positive {
                Complex64::new(rng.random_range(0.05..1.0), 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        };
        let mut terms = Vec::new();
        if rng.random_ratio(1, 8) {
            let shells = rng.random_range(1..=2);
            for _ in 0..shells {
                let k = rng.random_range(0..=self.radius);
                let c = coefficient(rng);
                terms.extend(
                    self.ball
                        .iter()
                        .filter(|g| self.group.length_key(g) == k)
                        .map(|g| (g.clone(), c)),
                );
            }
        } else {
            let count = rng.random_range(1..=self.max_terms);
            for _ in 0..count {
                let g = self.ball.elements().choose(rng).expect("balls contain e").clone();
                terms.push((g, coefficient(rng)));
            }
        }
        let f = AlgebraElement::from_terms(&self.group, terms).expect("sampled from the group");
        if f.is_empty() {
            AlgebraElement::delta(&self.group, self.group.identity()).expect("identity")
        } else {
            f
        }
    }

    pub fn take(&mut self, count: usize) -> Vec<AlgebraElement> {
        (0..count).map(|_| self.sample()).collect()
    }
}

/// One sample: `‖P π_σ(f) P_R‖` against `‖f‖_{2,κ}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub norm_lower: f64,
    pub weighted_norm: f64,
    pub converged: bool,
}

impl DecaySample {
    pub fn ratio(&self) -> f64 {
        self.norm_lower / self.weighted_norm
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// Largest observed ratio, a lower bound for the κ-decay constant.
    pub lower: f64,
    pub argmax: usize,
    pub radius: f64,
    pub seed: u64,
    pub samples: Vec<DecaySample>,
}

/// Max over the samples of `norm_lower(f, σ, R) / ‖f‖_{2,κ}`.
pub fn decay_constant_lower(
    kappa: &WeightFunction,
    sigma: &Cocycle,
    samples: &[AlgebraElement],
    radius: f64,
    opts: &SolverOptions,
) -> Result<DecayEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let cols = Arc::new(enumerate(&sigma.group(), Region::Ball(radius))?);
    let results: Vec<DecaySample> = samples
        .par_iter()
        .map(|f| {
            let weighted_norm = f.norm(&NormKind::L2Weighted(kappa.clone()));
            if weighted_norm <= 0.0 {
                return Err(Error::InvalidArgument("sample with zero weighted norm".into()));
            }
            let rep = norm_lower_on(f, sigma, &cols, opts)?;
            Ok(DecaySample {
                norm_lower: rep.value,
                weighted_norm,
                converged: rep.converged,
            })
        })
        .collect::<Result<_>>()?;
    let (argmax, lower) = results
        .iter()
        .map(DecaySample::ratio)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, r)| if r > b.1 { (i, r) } else { b });
    Ok(DecayEstimate {
        lower,
        argmax,
        radius,
        seed: opts.seed,
        samples: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthKind;

    #[test]
    fn sampler_is_deterministic_and_bounded() {
        let g = GroupDescriptor::free(2).unwrap();
        let a = ElementSampler::new(&g, 3, 10, 7).unwrap().take(50);
        let b = ElementSampler::new(&g, 3, 10, 7).unwrap().take(50);
        assert_eq!(a, b);
        for f in &a {
            assert!(!f.is_empty());
            assert!(f.max_length() <= 3.0);
        }
        assert!(a.iter().any(|f| f.len() > 10), "some radial samples expected");
    }

    #[test]
    fn identity_ratio_is_one() {
        let g = GroupDescriptor::heisenberg();
        let kappa = WeightFunction::poly(&g, 0.0).unwrap();
        let e = AlgebraElement::delta(&g, g.identity()).unwrap();
        let est = decay_constant_lower(&kappa, &Cocycle::trivial(&g), &[e], 2.0, &SolverOptions::default()).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integer_exponential_weight_below_series_bound() {
        let g = GroupDescriptor::lattice(1, LengthKind::L1).unwrap();
        let kappa = WeightFunction::exp(&g, 2.0).unwrap();
        let samples = ElementSampler::new(&g, 4, 6, 1).unwrap().take(40);
        let est = decay_constant_lower(&kappa, &Cocycle::trivial(&g), &samples, 20.0, &SolverOptions::default())
            .unwrap();
        assert!(est.lower <= (5.0f64 / 3.0).sqrt() + 1e-9, "{}", est.lower);
    }
}
