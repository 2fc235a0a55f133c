//! Stochastic utility `u_j(S) = E[g_j(X_S)]`.
//!
//! Three evaluators share one contract: exact enumeration of the outcome
//! product space, an exact CDF-product path for best-shot, and Monte Carlo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, Distribution, ProjectId, RngSpec, Scenario};
use crate::production::ValueFunction;

/// Default cap on enumerated outcomes (leaves, subsets or transitions).
pub const DEFAULT_BUDGET: u64 = 10_000_000;
/// Tolerance for submodularity and monotonicity comparisons.
pub const UTILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityMethod {
    Exact,
    ExactBestShot,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityEstimate {
    pub value: f64,
    pub method: UtilityMethod,
    pub samples: u64,
    pub std_error: f64,
}

impl UtilityEstimate {
    pub fn exact(value: f64, method: UtilityMethod) -> Self {
        UtilityEstimate {
            value,
            method,
            samples: 0,
            std_error: 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.method != UtilityMethod::MonteCarlo
    }
}

/// How utilities are evaluated when a caller does not pick a path itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub budget: u64,
    /// Monte Carlo fallback beyond the budget; `None` makes budget overruns errors.
    pub monte_carlo: Option<(RngSpec, u64)>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            budget: DEFAULT_BUDGET,
            monte_carlo: None,
        }
    }
}

impl EvalOptions {
    pub fn exact(budget: u64) -> Self {
        EvalOptions {
            budget,
            monte_carlo: None,
        }
    }
}

fn check_set(scn: &Scenario, j: ProjectId, set: &[AgentId]) -> Result<Vec<AgentId>> {
    scn.check_project(j)?;
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidArgument(format!("agent {} repeated in set", w[0])));
        }
    }
    for &i in &sorted {
        scn.check_agent(i)?;
    }
    Ok(sorted)
}

fn empty_value(scn: &Scenario, j: ProjectId) -> f64 {
    scn.value_fn(j).evaluate(&vec![0.0; scn.n_agents()])
}

/// Number of outcomes in the product space of `dists`, saturating.
pub fn outcome_count<'a>(dists: impl IntoIterator<Item = &'a Distribution>) -> u128 {
    dists
        .into_iter()
        .fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

/// Exact `u_j(S)` by enumerating the outcome product space.
pub fn exact_utility(
    scn: &Scenario,
    j: ProjectId,
    set: &[AgentId],
    budget: u64,
) -> Result<UtilityEstimate> {
    let set = check_set(scn, j, set)?;
    if set.is_empty() {
        return Ok(UtilityEstimate::exact(empty_value(scn, j), UtilityMethod::Exact));
    }
    let dists: Vec<&Distribution> = set.iter().map(|&i| scn.dist(i, j)).collect();
    let required = outcome_count(dists.iter().copied());
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(UtilityEstimate::exact(
        expected_value(scn.value_fn(j), &dists),
        UtilityMethod::Exact,
    ))
}

/// `E[g(X_1, ..., X_k)]` for independent `X_i ~ dists[i]` by full enumeration.
///
/// Separable members of the catalogue fold their per-agent term while
/// descending, so each leaf costs O(1); top-r evaluates `g` at every leaf.
pub fn expected_value(g: &ValueFunction, dists: &[&Distribution]) -> f64 {
    if dists.is_empty() {
        return g.evaluate(&[]);
    }
    match *g {
        ValueFunction::BestShot => fold_enumerate(dists, |v| v, 0.0, f64::max, |a| a),
        ValueFunction::TotalProduction(f) => {
            fold_enumerate(dists, |v| v, 0.0, |a, b| a + b, |a| f.apply(a))
        }
        ValueFunction::Ces(1.0) => fold_enumerate(dists, |v| v, 0.0, |a, b| a + b, |a| a),
        ValueFunction::Ces(r) => {
            fold_enumerate(dists, |v| v.powf(r), 0.0, |a, b| a + b, |a| a.powf(1.0 / r))
        }
        ValueFunction::SuccessProbability(f) => fold_enumerate(
            dists,
            |v| 1.0 - f.apply(v),
            1.0,
            |a, b| a * b,
            |a| 1.0 - a,
        ),
        ValueFunction::TopR(_) => leaf_enumerate(g, dists),
    }
}

fn fold_enumerate(
    dists: &[&Distribution],
    lift: impl Fn(f64) -> f64,
    identity: f64,
    combine: impl Fn(f64, f64) -> f64,
    finish: impl Fn(f64) -> f64,
) -> f64 {
    let k = dists.len();
    let lifted: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| d.values().iter().map(|&v| lift(v)).collect())
        .collect();
    let mut idx = vec![0usize; k];
    let mut acc = vec![identity; k + 1];
    let mut weight = vec![1.0; k + 1];
    let mut depth = 0;
    let mut total = 0.0;
    'leaves: loop {
        while depth < k {
            let a = idx[depth];
            acc[depth + 1] = combine(acc[depth], lifted[depth][a]);
            weight[depth + 1] = weight[depth] * dists[depth].probs()[a];
            depth += 1;
        }
        total += weight[k] * finish(acc[k]);
        loop {
            if depth == 0 {
                break 'leaves;
            }
            depth -= 1;
            idx[depth] += 1;
            if idx[depth] < dists[depth].len() {
                break;
            }
            idx[depth] = 0;
        }
    }
    total
}

fn leaf_enumerate(g: &ValueFunction, dists: &[&Distribution]) -> f64 {
    let k = dists.len();
    let mut idx = vec![0usize; k];
    let mut values = vec![0.0; k];
    let mut weight = vec![1.0; k + 1];
    let mut scratch = Vec::with_capacity(k);
    let mut depth = 0;
    let mut total = 0.0;
    'leaves: loop {
        while depth < k {
            let a = idx[depth];
            values[depth] = dists[depth].values()[a];
            weight[depth + 1] = weight[depth] * dists[depth].probs()[a];
            depth += 1;
        }
        total += weight[k] * g.evaluate_with(&values, &mut scratch);
        loop {
            if depth == 0 {
                break 'leaves;
            }
            depth -= 1;
            idx[depth] += 1;
            if idx[depth] < dists[depth].len() {
                break;
            }
            idx[depth] = 0;
        }
    }
    total
}

/// Exact best-shot utility via `Σ_v v (Π F_i(v) - Π F_i(v-))` over the merged support.
pub fn exact_utility_best_shot(
    scn: &Scenario,
    j: ProjectId,
    set: &[AgentId],
) -> Result<UtilityEstimate> {
    let set = check_set(scn, j, set)?;
    let g = scn.value_fn(j);
    if *g != ValueFunction::BestShot {
        return Err(Error::WrongVariant {
            expected: "best_shot",
            found: g.to_string(),
        });
    }
    let dists: Vec<&Distribution> = set.iter().map(|&i| scn.dist(i, j)).collect();
    Ok(UtilityEstimate::exact(
        expected_max(&dists),
        UtilityMethod::ExactBestShot,
    ))
}

/// `E[max_i X_i]` for independent discrete `X_i` (0 for no variables).
pub fn expected_max(dists: &[&Distribution]) -> f64 {
    let mut support: Vec<f64> = dists.iter().flat_map(|d| d.values().iter().copied()).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    support
        .into_iter()
        .map(|v| {
            let at_most: f64 = dists.iter().map(|d| d.cdf(v)).product();
            let below: f64 = dists.iter().map(|d| d.cdf_below(v)).product();
            v * (at_most - below)
        })
        .sum()
}

/// Monte Carlo estimate of `u_j(S)` from `samples` joint draws on stream 0.
pub fn mc_utility(
    scn: &Scenario,
    j: ProjectId,
    set: &[AgentId],
    rng: &RngSpec,
    samples: u64,
) -> Result<UtilityEstimate> {
    let set = check_set(scn, j, set)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
    }
    let dists: Vec<&Distribution> = set.iter().map(|&i| scn.dist(i, j)).collect();
    let (value, std_error) = mc_expected_value(scn.value_fn(j), &dists, rng, 0, samples);
    Ok(UtilityEstimate {
        value,
        method: UtilityMethod::MonteCarlo,
        samples,
        std_error,
    })
}

/// Sample mean and standard error of `g` over joint draws from `dists`.
pub(crate) fn mc_expected_value(
    g: &ValueFunction,
    dists: &[&Distribution],
    rng: &RngSpec,
    stream: u64,
    samples: u64,
) -> (f64, f64) {
    let mut gen = rng.stream(stream);
    let mut values = vec![0.0; dists.len()];
    let mut scratch = Vec::with_capacity(dists.len());
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for n in 1..=samples {
        for (slot, d) in values.iter_mut().zip(dists) {
            *slot = d.draw(&mut gen);
        }
        let x = g.evaluate_with(&values, &mut scratch);
        let delta = x - mean;
        mean += delta / n as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (samples - 1) as f64;
    (mean, (var / samples as f64).sqrt())
}

/// Evaluates `u_j(S)` with the best available exact path, falling back to
/// Monte Carlo when allowed.
pub fn utility(
    scn: &Scenario,
    j: ProjectId,
    set: &[AgentId],
    opts: &EvalOptions,
) -> Result<UtilityEstimate> {
    scn.check_project(j)?;
    if *scn.value_fn(j) == ValueFunction::BestShot {
        return exact_utility_best_shot(scn, j, set);
    }
    match exact_utility(scn, j, set, opts.budget) {
        Err(Error::BudgetExceeded { .. }) if opts.monte_carlo.is_some() => {
            let (rng, samples) = opts.monte_carlo.unwrap();
            mc_utility(scn, j, set, &rng, samples)
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodularityWitness {
    pub smaller: Vec<AgentId>,
    pub larger: Vec<AgentId>,
    /// `None` for a monotonicity violation.
    pub agent: Option<AgentId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmodularityReport {
    pub ok: bool,
    pub witness: Option<SubmodularityWitness>,
    /// Smallest and largest `(u(S+i) - u(S)) - (u(T+i) - u(T))` over all chains.
    pub min_slack: f64,
    pub max_slack: f64,
}

/// Default cap on agents for [`submodularity_check`].
pub const SUBMODULARITY_MAX_AGENTS: usize = 8;

fn mask_members(mask: usize) -> Vec<AgentId> {
    (0..usize::BITS as usize).filter(|b| mask >> b & 1 == 1).collect()
}

/// Exhaustive diminishing-returns and monotonicity check of `u_j` over all
/// `S ⊆ T` and `i ∉ T`.
pub fn submodularity_check(
    scn: &Scenario,
    j: ProjectId,
    budget: u64,
) -> Result<SubmodularityReport> {
    let n = scn.n_agents();
    if n > SUBMODULARITY_MAX_AGENTS {
        let chains = |n: usize| (n as u128) * 3u128.pow(n as u32);
        return Err(Error::BudgetExceeded {
            required: chains(n),
            budget: chains(SUBMODULARITY_MAX_AGENTS) as u64,
        });
    }
    let full = 1usize << n;
    let u: Vec<f64> = (0..full)
        .map(|mask| exact_utility(scn, j, &mask_members(mask), budget).map(|e| e.value))
        .collect::<Result<_>>()?;
    let mut report = SubmodularityReport {
        ok: true,
        witness: None,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
    };
    for t in 0..full {
        // all submasks s of t, including 0 and t itself
        let mut s = t;
        loop {
            if u[s] > u[t] + UTILITY_TOL && report.ok {
                report.ok = false;
                report.witness = Some(SubmodularityWitness {
                    smaller: mask_members(s),
                    larger: mask_members(t),
                    agent: None,
                });
            }
            for i in (0..n).filter(|i| t >> i & 1 == 0) {
                let bit = 1 << i;
                let slack = (u[s | bit] - u[s]) - (u[t | bit] - u[t]);
                report.min_slack = report.min_slack.min(slack);
                report.max_slack = report.max_slack.max(slack);
                if slack < -UTILITY_TOL && report.ok {
                    report.ok = false;
                    report.witness = Some(SubmodularityWitness {
                        smaller: mask_members(s),
                        larger: mask_members(t),
                        agent: Some(i),
                    });
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & t;
        }
    }
    if !report.min_slack.is_finite() {
        report.min_slack = 0.0;
        report.max_slack = 0.0;
    }
    Ok(report)
}
