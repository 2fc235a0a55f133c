//! Catalogue of symmetric monotone submodular value functions and their
//! structural property checks.

mod checks;
mod value_fn;

pub use checks::{
    bsp_check, diminishing_across_check, value_submodularity_check, BspCheck, CHECK_TOL,
};
pub use value_fn::{ConcaveFn, UnitFn, ValueFunction};

/// `g(x)`.
pub fn evaluate(g: &ValueFunction, x: &[f64]) -> f64 {
    g.evaluate(x)
}

/// `g^{-1}(x)`.
pub fn single_inverse(g: &ValueFunction, x: f64) -> crate::Result<f64> {
    g.single_inverse(x)
}
