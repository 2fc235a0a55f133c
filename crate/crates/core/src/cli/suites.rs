use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::adversarial::{validate, Generator};
use crate::error::{Error, Result};
use crate::model::random::{full_catalogue, random_distribution, random_vector, standard_single_project};
use crate::model::{RngSpec, Scenario};
use crate::production::{bsp_check, diminishing_across_check, ValueFunction};
use crate::sketch::{verify_goodness_sandwich, verify_strong_sketch_bounds, SandwichReport};
use crate::utility::{submodularity_check, EvalOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Submodularity,
    Bsp,
    Sketch,
    Goodness,
    Adversarial,
}

impl Suite {
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Submodularity => 50,
            Suite::Bsp => 10_000,
            Suite::Sketch | Suite::Goodness => 200,
            Suite::Adversarial => 1,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Submodularity => "submodularity",
            Suite::Bsp => "bsp",
            Suite::Sketch => "sketch",
            Suite::Goodness => "goodness",
            Suite::Adversarial => "adversarial",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "submodularity" => Suite::Submodularity,
            "bsp" => Suite::Bsp,
            "sketch" => Suite::Sketch,
            "goodness" => Suite::Goodness,
            "adversarial" => Suite::Adversarial,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown suite {s:?}; expected submodularity, bsp, sketch, goodness or adversarial"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub pass: bool,
    pub checked: usize,
    pub failures: Vec<Value>,
    pub details: Value,
}

/// Agents in each random instance of the submodularity suite.
pub const SUBMODULARITY_AGENTS: usize = 5;

/// Parameters exercised by the adversarial suite.
pub fn default_generators() -> Vec<Generator> {
    vec![
        Generator::MeanBestshot { k: 8, a: 20.0, p: 0.049 },
        Generator::QuantileLinear { k: 10, a: 1.5, p: 0.11 },
        Generator::CesMean { k: 4, r: 2.0, a: 400.0, eps: 0.01 },
        Generator::QuantileCes { k: 16, r: 2.0, theta: 1.0, a: 1.0, b: 1.0, c: 2.0, n: 64 },
        Generator::WelfareEx1 { r: 4 },
        Generator::WelfareEx2 { r: 4 },
    ]
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize, budget: u64) -> Result<SuiteReport> {
    let spec = RngSpec::new(seed);
    let mut failures = Vec::new();
    let mut checked = 0;
    let details = match suite {
        Suite::Submodularity => {
            let mut min_slack = f64::INFINITY;
            for t in 0..trials {
                let mut rng = spec.stream(t as u64);
                let dists: Vec<_> = (0..SUBMODULARITY_AGENTS)
                    .map(|_| random_distribution(&mut rng, 3))
                    .collect();
                for g in full_catalogue() {
                    let scn = Scenario::single_project(dists.clone(), g, 1)?;
                    let report = submodularity_check(&scn, 0, budget)?;
                    checked += 1;
                    min_slack = min_slack.min(report.min_slack);
                    if !report.ok {
                        failures.push(json!({"trial": t, "value_fn": g, "report": report}));
                    }
                }
            }
            json!({"min_slack": min_slack})
        }
        Suite::Bsp => bsp_details(&spec, trials, &mut checked, &mut failures)?,
        Suite::Sketch | Suite::Goodness => {
            let mut total = SandwichReport::default();
            for t in 0..trials {
                let scn = standard_single_project(seed, t as u64);
                let k = scn.cardinality(0);
                let report = if suite == Suite::Sketch {
                    verify_strong_sketch_bounds(&scn, 0, k, budget)?
                } else {
                    verify_goodness_sandwich(&scn, 0, k, budget)?
                };
                if !report.ok {
                    failures.push(json!({"trial": t, "value_fn": scn.value_fn(0), "witness": report.witness}));
                }
                total.merge(report);
            }
            checked = total.sets_checked;
            json!({
                "sets_checked": total.sets_checked,
                "worst_lower": total.worst_lower,
                "worst_upper": total.worst_upper,
            })
        }
        Suite::Adversarial => {
            let opts = EvalOptions::exact(budget);
            let mut reports = Vec::new();
            for g in default_generators() {
                let report = validate(&g.generate()?, &opts)?;
                checked += report.checks.len();
                if !report.pass {
                    failures.push(json!({"generator": g, "checks": report.checks}));
                }
                reports.push(report);
            }
            json!(reports)
        }
    };
    Ok(SuiteReport {
        suite: suite.to_string(),
        seed,
        trials,
        pass: failures.is_empty(),
        checked,
        failures,
        details,
    })
}

fn bsp_details(spec: &RngSpec, trials: usize, checked: &mut usize, failures: &mut Vec<Value>) -> Result<Value> {
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
    let mut members = Vec::new();
    for (idx, g) in full_catalogue().into_iter().enumerate() {
        let mut rng = spec.stream(idx as u64);
        let (mut held, mut violated, mut skipped) = (0usize, 0usize, 0usize);
        let mut first_violation = None;
        for _ in 0..trials {
            let len = rng.random_range(2..=6);
            let x = random_vector(&mut rng, len, 5.0);
            match bsp_check(&g, &x) {
                Ok(c) if c.holds => held += 1,
                Ok(c) => {
                    violated += 1;
                    first_violation.get_or_insert(json!({"x": x, "lhs": c.lhs, "rhs": c.rhs}));
                }
                Err(Error::InverseUnbounded { .. }) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        *checked += held + violated;
        if g.is_bsp() && violated > 0 {
            failures.push(json!({"value_fn": g, "check": "bsp", "witness": first_violation}));
        }
        let mut diminishing = true;
        for y in [0.0, 0.5, 1.0, 2.0, 4.0] {
            *checked += 1;
            if !diminishing_across_check(&g, y, &grid)? {
                diminishing = false;
                failures.push(json!({"value_fn": g, "check": "diminishing_across", "y": y}));
            }
        }
        members.push(json!({
            "value_fn": g,
            "bsp_expected": g.is_bsp(),
            "held": held,
            "violated": violated,
            "skipped": skipped,
            "first_violation": first_violation,
            "diminishing_across": diminishing,
        }));
    }
    // top-2 on three equal inputs must break the inequality
    let fixture = bsp_check(&ValueFunction::TopR(2), &[1.0, 1.0, 1.0])?;
    *checked += 1;
    if fixture.holds {
        failures.push(json!({"value_fn": "top_r:2", "check": "expected_failure_fixture", "result": fixture}));
    }
    Ok(json!({"members": members, "top_r_fixture": {"x": [1.0, 1.0, 1.0], "lhs": fixture.lhs, "rhs": fixture.rhs, "holds": fixture.holds}}))
}
