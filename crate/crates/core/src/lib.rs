//! Test-score algorithms for stochastic submodular maximization and
//! submodular welfare maximization, with exact oracles for verification.

pub mod adversarial;
pub mod cli;
pub mod error;
pub mod model;
pub mod optimize;
pub mod production;
pub mod sketch;
mod subsets;
pub mod testscores;
pub mod utility;

pub use error::{Error, Result};
pub use subsets::{binomial, combinations};
