//! Minkowski gauges, geometric constants and certified squeezing-function
//! bounds for complete Reinhardt model domains in `Cⁿ`.

pub mod domains;
mod error;
pub mod gauge;
pub mod geometry;
pub mod harness;
pub mod invariants;
pub mod json;
mod roots;
pub mod squeezing;

pub use error::{Error, Result};
