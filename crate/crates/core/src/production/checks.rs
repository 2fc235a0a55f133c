use serde::Serialize;

use super::ValueFunction;
use crate::error::{Error, Result};

/// Tolerance shared by the structural property checks.
pub const CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BspCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Balanced-skilled-population inequality for one vector `x` of length `l >= 2`:
///
/// ```text
/// g(g^{-1}(g(x_1..x_{l-1})), x_l) <= g(x_1..x_l)
/// ```
pub fn bsp_check(g: &ValueFunction, x: &[f64]) -> Result<BspCheck> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument("BSP check needs at least two inputs".into()));
    }
    let (head, last) = x.split_at(x.len() - 1);
    let merged = g.single_inverse(g.evaluate(head))?;
    let lhs = g.evaluate(&[merged, last[0]]);
    let rhs = g.evaluate(x);
    Ok(BspCheck {
        holds: lhs <= rhs + CHECK_TOL,
        lhs,
        rhs,
    })
}

/// Whether `x -> g(x, y) - g(x)` is non-increasing along `xgrid`.
pub fn diminishing_across_check(g: &ValueFunction, y: f64, xgrid: &[f64]) -> Result<bool> {
    if xgrid.len() < 2 {
        return Err(Error::InvalidArgument("grid needs at least two points".into()));
    }
    if xgrid.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
        return Err(Error::InvalidArgument("grid must be ascending".into()));
    }
    let marginal = |x: f64| g.evaluate(&[x, y]) - g.evaluate(&[x]);
    Ok(xgrid
        .windows(2)
        .all(|w| marginal(w[1]) <= marginal(w[0]) + CHECK_TOL))
}

/// Lattice inequality `g(x ∨ y) + g(x ∧ y) <= g(x) + g(y)`.
pub fn value_submodularity_check(g: &ValueFunction, x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "vector lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let join: Vec<f64> = x.iter().zip(y).map(|(a, b)| a.max(*b)).collect();
    let meet: Vec<f64> = x.iter().zip(y).map(|(a, b)| a.min(*b)).collect();
    Ok(g.evaluate(&join) + g.evaluate(&meet) <= g.evaluate(x) + g.evaluate(y) + CHECK_TOL)
}
