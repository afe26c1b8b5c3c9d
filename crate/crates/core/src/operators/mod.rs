//! Operator-norm brackets, Haagerup content and decay constants computed
//! from finite compressions of `π_σ(f)`.

mod bounds;
mod compress;
mod content;
mod decay;
mod solver;

pub use compress::{compress, compress_on, compress_set, CompressedOperator, LinearOperator};
pub use solver::{top_singular, SingularPair, SolverKind, SolverOptions, SolverReport};
pub use bounds::{
    annulus_constant, bracket_norm, bracket_norm_traced, norm_lower, norm_lower_on, norm_upper, LowerProvenance, NormBracket, UpperMethod,
};
pub use content::{content_lower, ContentEstimate, ContentOptions};
pub use decay::{decay_constant_lower, DecayEstimate, DecaySample, ElementSampler};
