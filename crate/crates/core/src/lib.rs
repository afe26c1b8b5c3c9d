pub mod error;
pub mod algebra;
pub mod cli;
pub mod codec;
pub mod cocycles;
pub mod groups;
pub mod multipliers;
pub mod operators;
pub mod summation;

pub use error::{Error, Result};
