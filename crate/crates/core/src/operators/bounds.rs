//! Certified lower and upper bounds for `‖π_σ(f)‖`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::compress::compress_on;
use super::solver::{top_singular, SolverKind, SolverOptions, SolverReport};
use crate::algebra::{AlgebraElement, NormKind};
use crate::cocycles::Cocycle;
use crate::error::{Error, Result};
use crate::groups::{enumerate, Ball, GroupDescriptor, GroupKind, LengthKind, Region};

/// `‖P π_σ(f) P_R‖` computed from the compression onto `Ball(R)`.
pub fn norm_lower(f: &AlgebraElement, sigma: &Cocycle, radius: f64, opts: &SolverOptions) -> Result<SolverReport> {
    let cols = Arc::new(enumerate(&f.group(), Region::Ball(radius))?);
    norm_lower_on(f, sigma, &cols, opts)
}

/// [`norm_lower`] with a precomputed column ball.
pub fn norm_lower_on(
    f: &AlgebraElement,
    sigma: &Cocycle,
    cols: &Arc<Ball>,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    let op = compress_on(f, sigma, cols)?;
    Ok(top_singular(&op, opts, None).0)
}

/// Which upper bound to compute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum UpperMethod {
    /// `‖π_σ(f)‖ ≤ ‖f‖₁`.
    L1Bound,
    /// `‖π_σ(f)‖ ≤ Σ_k c_k ‖f χ_{A_k}‖₂` over the annuli `A_k`. Without
    /// explicit constants the built-in ones are used.
    PartitionBound {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constants: Option<Vec<f64>>,
    },
}

/// Built-in annulus constant `c_k`, a bound for the Haagerup content of
/// `A_k = {k ≤ L < k+1}`: `|A_k|^{1/2}` everywhere, improved to `k + 1` on
/// free groups.
pub fn annulus_constant(group: &GroupDescriptor, k: u64) -> Result<f64> {
    let size = annulus_size(group, k)?;
    let trivial = (size as f64).sqrt();
    Ok(match group.kind() {
        GroupKind::Free { .. } => trivial.min((k + 1) as f64),
        _ => trivial,
    })
}

fn annulus_size(group: &GroupDescriptor, k: u64) -> Result<u128> {
    Ok(match group.kind() {
        GroupKind::Free { rank } if k > 0 => {
            let r = rank as u128;
            2 * r * (2 * r - 1).pow((k - 1) as u32)
        }
        GroupKind::InfiniteDihedral => 1 + u128::from(k > 0),
        _ => enumerate(group, Region::Annulus(k))?.len() as u128,
    })
}

/// Index `⌊L(g)⌋` of the annulus containing `g`.
fn annulus_index(group: &GroupDescriptor, key: u64) -> u64 {
    if group.is_lattice() && group.length_kind() == LengthKind::L2 {
        key.isqrt()
    } else {
        key
    }
}

/// Value of an upper bound. Partition bounds report the constants used.
pub fn norm_upper(f: &AlgebraElement, method: &UpperMethod) -> Result<(f64, UpperMethod)> {
    match method {
        UpperMethod::L1Bound => Ok((f.norm(&NormKind::L1), UpperMethod::L1Bound)),
        UpperMethod::PartitionBound { constants } => {
            let group = f.group();
            let mut shells: BTreeMap<u64, f64> = BTreeMap::new();
            for (g, c) in f.terms() {
                *shells.entry(annulus_index(&group, group.length_key(g))).or_default() += c.norm_sqr();
            }
            let top = shells.keys().next_back().copied().unwrap_or(0);
            let used: Vec<f64> = match constants {
                Some(list) => {
                    if !f.is_empty() && list.len() as u64 <= top {
                        return Err(Error::MissingAnnulusConstant(list.len() as u64));
                    }
                    list.clone()
                }
                None => (0..=top)
                    .map(|k| {
                        if shells.contains_key(&k) {
                            annulus_constant(&group, k)
                        } else {
                            Ok(0.0)
                        }
                    })
                    .collect::<Result<_>>()?,
            };
            let value = shells.iter().map(|(&k, s)| used[k as usize] * s.sqrt()).sum();
            Ok((
                value,
                UpperMethod::PartitionBound {
                    constants: Some(used),
                },
            ))
        }
    }
}

/// How the lower end of a bracket was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerProvenance {
    pub solver: SolverKind,
    pub radius: f64,
    pub matvecs: usize,
    pub seed: u64,
    pub tol: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Certified interval for an operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: LowerProvenance,
    pub upper_method: UpperMethod,
}

impl NormBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn converged(&self) -> bool {
        self.lower_method.converged
    }
}

/// Lower bound maximized over a radius schedule, upper bound minimized over
/// the L1 and partition bounds.
pub fn bracket_norm(
    f: &AlgebraElement,
    sigma: &Cocycle,
    schedule: &[f64],
    opts: &SolverOptions,
) -> Result<NormBracket> {
    Ok(bracket_norm_traced(f, sigma, schedule, opts)?.0)
}

/// [`bracket_norm`] together with the solver report for every radius.
pub fn bracket_norm_traced(
    f: &AlgebraElement,
    sigma: &Cocycle,
    schedule: &[f64],
    opts: &SolverOptions,
) -> Result<(NormBracket, Vec<(f64, SolverReport)>)> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty radius schedule".into()));
    }
    let trace = schedule
        .iter()
        .map(|&r| Ok((r, norm_lower(f, sigma, r, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    let (radius, rep) = trace
        .iter()
        .fold(&trace[0], |best, cur| if cur.1.value > best.1.value { cur } else { best })
        .clone();
    let (l1, l1m) = norm_upper(f, &UpperMethod::L1Bound)?;
    let (part, partm) = norm_upper(f, &UpperMethod::PartitionBound { constants: None })?;
    let (upper, upper_method) = if part < l1 { (part, partm) } else { (l1, l1m) };
    let bracket = NormBracket {
        lower: rep.value,
        upper,
        lower_method: LowerProvenance {
            solver: rep.method,
            radius,
            matvecs: rep.matvecs,
            seed: rep.seed,
            tol: opts.tol,
            residual: rep.residual,
            converged: rep.converged,
        },
        upper_method,
    };
    Ok((bracket, trace))
}
