use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concave, increasing `f` with `f(0) = 0` used by total production.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcaveFn {
    Identity,
    Sqrt,
    Log1p,
    /// `x^p` with `p` in (0, 1].
    Power(f64),
}

impl ConcaveFn {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ConcaveFn::Identity => x,
            ConcaveFn::Sqrt => x.sqrt(),
            ConcaveFn::Log1p => x.ln_1p(),
            ConcaveFn::Power(p) => x.powf(p),
        }
    }

    /// Inverse on the non-negative reals; every member is unbounded above.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            ConcaveFn::Identity => y,
            ConcaveFn::Sqrt => y * y,
            ConcaveFn::Log1p => y.exp_m1(),
            ConcaveFn::Power(p) => y.powf(1.0 / p),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ConcaveFn::Power(p) = *self {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidValueFunction(format!(
                    "power exponent {p} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Increasing `f: R+ -> [0, 1]` with `f(0) = 0` used by success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitFn {
    /// `min(x / scale, 1)`.
    ClampLinear(f64),
    /// `1 - exp(-rate x)`.
    OneMinusExp(f64),
}

impl UnitFn {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            UnitFn::ClampLinear(scale) => (x / scale).min(1.0),
            UnitFn::OneMinusExp(rate) => -(-rate * x).exp_m1(),
        }
    }

    /// `max{y >= 0 : f(y) <= p}`, unbounded once `p` reaches the supremum 1.
    pub fn inverse(&self, p: f64) -> Result<f64> {
        if p >= 1.0 {
            return Err(Error::InverseUnbounded { x: p });
        }
        Ok(match *self {
            UnitFn::ClampLinear(scale) => p * scale,
            UnitFn::OneMinusExp(rate) => -(-p).ln_1p() / rate,
        })
    }

    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            UnitFn::ClampLinear(s) => ("scale", s),
            UnitFn::OneMinusExp(r) => ("rate", r),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidValueFunction(format!("{name} {v} must be positive")));
        }
        Ok(())
    }
}

/// Symmetric monotone value function mapping individual outputs to team output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueFunction {
    /// `f(Σ x_i)`.
    TotalProduction(ConcaveFn),
    /// `max x_i`.
    BestShot,
    /// Sum of the `r` largest inputs.
    TopR(usize),
    /// `(Σ x_i^r)^(1/r)`, submodular for `r >= 1`.
    Ces(f64),
    /// `1 - Π (1 - f(x_i))`.
    SuccessProbability(UnitFn),
}

impl ValueFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ValueFunction::TotalProduction(f) => f.validate(),
            ValueFunction::SuccessProbability(f) => f.validate(),
            ValueFunction::BestShot => Ok(()),
            ValueFunction::TopR(r) if r >= 1 => Ok(()),
            ValueFunction::TopR(r) => Err(Error::InvalidValueFunction(format!("top-r needs r >= 1, got {r}"))),
            ValueFunction::Ces(r) if r.is_finite() && r >= 1.0 => Ok(()),
            ValueFunction::Ces(r) => Err(Error::InvalidValueFunction(format!(
                "CES needs finite r >= 1, got {r}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ValueFunction::TotalProduction(_) => "total",
            ValueFunction::BestShot => "best_shot",
            ValueFunction::TopR(_) => "top_r",
            ValueFunction::Ces(_) => "ces",
            ValueFunction::SuccessProbability(_) => "success_prob",
        }
    }

    /// Whether the catalogue member satisfies the balanced-skilled-population
    /// property. Only top-r with `r >= 2` does not.
    pub fn is_bsp(&self) -> bool {
        !matches!(*self, ValueFunction::TopR(r) if r >= 2)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.evaluate_with(x, &mut Vec::new())
    }

    /// [`ValueFunction::evaluate`] reusing `scratch` for the sorted copy.
    ///
    /// Order-dependent reductions run over the inputs sorted descending, so
    /// the result is bit-identical under permutation and zero padding.
    pub fn evaluate_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        if let ValueFunction::BestShot = self {
            return x.iter().copied().fold(0.0, f64::max);
        }
        scratch.clear();
        scratch.extend_from_slice(x);
        scratch.sort_unstable_by(|a, b| b.total_cmp(a));
        let xs = &scratch[..];
        match *self {
            ValueFunction::BestShot => unreachable!(),
            ValueFunction::TotalProduction(f) => f.apply(xs.iter().sum()),
            ValueFunction::TopR(r) => xs.iter().take(r).sum(),
            ValueFunction::Ces(1.0) => xs.iter().sum(),
            ValueFunction::Ces(r) => xs.iter().map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r),
            ValueFunction::SuccessProbability(f) => {
                1.0 - xs.iter().map(|&v| 1.0 - f.apply(v)).product::<f64>()
            }
        }
    }

    /// `g(y, 0, ..., 0)`.
    pub fn single(&self, y: f64) -> f64 {
        self.evaluate(&[y])
    }

    /// `g^{-1}(x) = max{y >= 0 : g(y, 0, ..., 0) <= x}` in closed form.
    pub fn single_inverse(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidArgument(format!("inverse needs x >= 0, got {x}")));
        }
        match *self {
            ValueFunction::BestShot | ValueFunction::TopR(_) | ValueFunction::Ces(_) => Ok(x),
            ValueFunction::TotalProduction(f) => Ok(f.inverse(x)),
            ValueFunction::SuccessProbability(f) => f.inverse(x),
        }
    }

    /// Generic `g^{-1}` by bisection on `y -> g(y, 0, ..., 0)`.
    ///
    /// The bracket `[0, B]` doubles `B` until `g(B) > x`, then bisects to an
    /// absolute width of `1e-10` and returns the left end.
    pub fn single_inverse_bisection(&self, x: f64) -> Result<f64> {
        const WIDTH: f64 = 1e-10;
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidArgument(format!("inverse needs x >= 0, got {x}")));
        }
        let mut hi = 1.0;
        while self.single(hi) <= x {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::InverseUnbounded { x });
            }
        }
        let mut lo = 0.0;
        while hi - lo > WIDTH {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.single(mid) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

impl fmt::Display for ConcaveFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcaveFn::Identity => write!(f, "identity"),
            ConcaveFn::Sqrt => write!(f, "sqrt"),
            ConcaveFn::Log1p => write!(f, "log1p"),
            ConcaveFn::Power(p) => write!(f, "power:{p}"),
        }
    }
}

impl fmt::Display for UnitFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitFn::ClampLinear(s) => write!(f, "clamp:{s}"),
            UnitFn::OneMinusExp(r) => write!(f, "exp:{r}"),
        }
    }
}

impl fmt::Display for ValueFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueFunction::TotalProduction(c) => write!(f, "total:{c}"),
            ValueFunction::BestShot => write!(f, "best_shot"),
            ValueFunction::TopR(r) => write!(f, "top_r:{r}"),
            ValueFunction::Ces(r) => write!(f, "ces:{r}"),
            ValueFunction::SuccessProbability(u) => write!(f, "success_prob:{u}"),
        }
    }
}

fn parse_num<T: FromStr>(s: &str, tag: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::InvalidValueFunction(format!("bad number {s:?} in {tag:?}")))
}

impl FromStr for ConcaveFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let f = match s.split_once(':') {
            None if s == "identity" => ConcaveFn::Identity,
            None if s == "sqrt" => ConcaveFn::Sqrt,
            None if s == "log1p" => ConcaveFn::Log1p,
            Some(("power", p)) => ConcaveFn::Power(parse_num(p, s)?),
            _ => return Err(Error::InvalidValueFunction(format!("unknown concave fn {s:?}"))),
        };
        f.validate()?;
        Ok(f)
    }
}

impl FromStr for UnitFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let f = match s.split_once(':') {
            Some(("clamp", v)) => UnitFn::ClampLinear(parse_num(v, s)?),
            Some(("exp", v)) => UnitFn::OneMinusExp(parse_num(v, s)?),
            _ => return Err(Error::InvalidValueFunction(format!("unknown unit fn {s:?}"))),
        };
        f.validate()?;
        Ok(f)
    }
}

impl FromStr for ValueFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let g = match s.split_once(':') {
            None if s == "best_shot" => ValueFunction::BestShot,
            Some(("total", rest)) => ValueFunction::TotalProduction(rest.parse()?),
            Some(("top_r", r)) => ValueFunction::TopR(parse_num(r, s)?),
            Some(("ces", r)) => ValueFunction::Ces(parse_num(r, s)?),
            Some(("success_prob", rest)) => ValueFunction::SuccessProbability(rest.parse()?),
            _ => return Err(Error::InvalidValueFunction(format!("unknown value function tag {s:?}"))),
        };
        g.validate()?;
        Ok(g)
    }
}

impl Serialize for ValueFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ValueFunction {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let tag = String::deserialize(de)?;
        tag.parse().map_err(serde::de::Error::custom)
    }
}
