//! Shared domain types: performance distributions, the stochastic
//! productivity system (scenario), assignments and the randomness contract.

mod distribution;
pub mod random;
mod rng;
mod scenario;

pub use distribution::{Distribution, ROUNDED_SUM_TOL, STRICT_SUM_TOL};
pub use rng::RngSpec;
pub use scenario::{AgentId, Assignment, ProjectId, Scenario};

/// Mean of a distribution.
pub fn dist_mean(d: &Distribution) -> f64 {
    d.mean()
}

/// Empirical distribution of non-negative samples.
pub fn empirical_distribution(samples: &[f64]) -> crate::Result<Distribution> {
    Distribution::empirical(samples)
}
