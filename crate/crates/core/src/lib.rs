//! Linear off-policy temporal-difference prediction: learners, benchmarks,
//! least-squares baselines, error metrics and a deterministic sweep engine.

pub mod baselines;
pub mod domain;
pub mod env;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod learners;

pub use error::{Error, Result};
