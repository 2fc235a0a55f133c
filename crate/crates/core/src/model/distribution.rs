use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::RngSpec;
use crate::error::{Error, Result};

/// Tolerance on the probability sum accepted by [`Distribution::new`].
pub const STRICT_SUM_TOL: f64 = 1e-12;
/// Tolerance on the probability sum accepted (then renormalized) by
/// [`Distribution::from_rounded`].
pub const ROUNDED_SUM_TOL: f64 = 1e-9;

/// Finite discrete distribution of a non-negative performance value.
///
/// The support is sorted strictly ascending and every atom has positive mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<(f64, f64)>")]
pub struct Distribution {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl From<Distribution> for Vec<(f64, f64)> {
    fn from(d: Distribution) -> Self {
        d.atoms().collect()
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let atoms = Vec::<(f64, f64)>::deserialize(de)?;
        Distribution::from_rounded(atoms).map_err(serde::de::Error::custom)
    }
}

impl Distribution {
    /// Builds a distribution whose probabilities already sum to one within
    /// [`STRICT_SUM_TOL`]. Atoms sharing a value are merged.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(atoms.into_iter().collect(), STRICT_SUM_TOL)
    }

    /// Like [`Distribution::new`] but tolerates rounded input: a sum within
    /// [`ROUNDED_SUM_TOL`] of one is renormalized.
    pub fn from_rounded(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::build(atoms.into_iter().collect(), ROUNDED_SUM_TOL)
    }

    pub fn point(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    /// `high` with probability `p_high`, `low` otherwise. Zero-mass atoms are dropped.
    pub fn two_point(low: f64, high: f64, p_high: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_high) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p_high} outside [0, 1]"
            )));
        }
        let atoms = [(low, 1.0 - p_high), (high, p_high)]
            .into_iter()
            .filter(|&(_, p)| p > 0.0);
        Self::new(atoms)
    }

    /// Relative-frequency distribution of the samples.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let mut sorted = samples.to_vec();
        for &x in &sorted {
            check_value(x)?;
        }
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut values = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        for x in sorted {
            if values.last() == Some(&x) {
                *counts.last_mut().unwrap() += 1;
            } else {
                values.push(x);
                counts.push(1);
            }
        }
        let probs = counts.into_iter().map(|c| c as f64 / n).collect();
        Ok(Self::from_parts(values, probs))
    }

    fn build(mut atoms: Vec<(f64, f64)>, tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        for &(v, p) in &atoms {
            check_value(v)?;
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} must be positive and finite"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            if values.last() == Some(&v) {
                *probs.last_mut().unwrap() += p;
            } else {
                values.push(v);
                probs.push(p);
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, outside 1 ± {tol:e}"
            )));
        }
        if sum != 1.0 && tol > STRICT_SUM_TOL {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self::from_parts(values, probs))
    }

    fn from_parts(values: Vec<f64>, probs: Vec<f64>) -> Self {
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Distribution {
            values,
            probs,
            cumulative,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn is_point_mass(&self) -> bool {
        self.values.len() == 1
    }

    pub fn max_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, p)| v * p).sum()
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else if idx == self.values.len() {
            1.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// P(X < x).
    pub fn cdf_below(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v < x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1].min(1.0)
        }
    }

    /// One draw by inverse CDF.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// `count` i.i.d. draws from stream `stream` of `rng`.
    pub fn sample(&self, rng: &RngSpec, stream: u64, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        let mut gen = rng.stream(stream);
        Ok((0..count).map(|_| self.draw(&mut gen)).collect())
    }
}

fn check_value(v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidDistribution(format!(
            "value {v} must be finite and non-negative"
        )));
    }
    Ok(())
}
