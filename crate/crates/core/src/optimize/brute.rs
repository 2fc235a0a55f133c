use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::SelectionResult;
use crate::error::{Error, Result};
use crate::model::{AgentId, Assignment, ProjectId, Scenario};
use crate::production::ValueFunction;
use crate::sketch::{minmax_sketch, strong_sketch};
use crate::subsets::{binomial, combinations};
use crate::testscores::ScoreTable;
use crate::utility::{utility, EvalOptions};

/// Exact maximizer of `u_j(S)` over `|S| = k`, ties to the lexicographically
/// smallest set.
pub fn brute_force_single(
    scn: &Scenario,
    j: ProjectId,
    k: usize,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    scn.check_project(j)?;
    let n = scn.n_agents();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n} agents")));
    }
    let required = binomial(n, k).saturating_mul(per_set_cost(scn, j, k));
    if required > opts.budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: opts.budget,
        });
    }
    let sets: Vec<Vec<AgentId>> = combinations(n, k).collect();
    let values = sets
        .par_iter()
        .map(|s| utility(scn, j, s, opts).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = idx;
        }
    }
    let mut assignment = Assignment::empty(scn.n_projects());
    assignment.sets[j] = sets[best].clone();
    let mut result = SelectionResult::evaluate(scn, assignment, Vec::new(), opts)?;
    result.partial = false;
    Ok(result)
}

/// Outcomes enumerated to evaluate one `k`-set on project `j`, worst case.
fn per_set_cost(scn: &Scenario, j: ProjectId, k: usize) -> u128 {
    let mut sizes: Vec<u128> = scn.agents().map(|i| scn.dist(i, j).len() as u128).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    if *scn.value_fn(j) == ValueFunction::BestShot {
        return sizes.iter().take(k).sum::<u128>().max(1);
    }
    sizes
        .iter()
        .take(k)
        .fold(1u128, |acc, &s| acc.saturating_mul(s))
}

/// Transitions of the exact assignment search: at project `j`, every set of
/// `K_j = k_1 + ... + k_{j-1}` used agents times every `k_j`-set of the rest.
pub fn welfare_dp_transitions(scn: &Scenario) -> u128 {
    let n = scn.n_agents();
    let mut used = 0;
    let mut total: u128 = 0;
    for &k in scn.cardinalities() {
        if used + k > n {
            return u128::MAX;
        }
        total = total.saturating_add(binomial(n, used).saturating_mul(binomial(n - used, k)));
        used += k;
    }
    total
}

/// Per-set objective of an assignment search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetObjective {
    Utility,
    MinSketch,
    MaxSketch,
    StrongSketch,
}

struct AssignmentSearch {
    cards: Vec<usize>,
    n: usize,
    // per project: set mask -> objective
    values: Vec<HashMap<u64, f64>>,
    memo: Vec<HashMap<u64, (f64, u64)>>,
}

impl AssignmentSearch {
    fn solve(&mut self, j: usize, used: u64) -> f64 {
        if j == self.cards.len() {
            return 0.0;
        }
        if let Some(&(v, _)) = self.memo[j].get(&used) {
            return v;
        }
        let free: Vec<usize> = (0..self.n).filter(|&i| used >> i & 1 == 0).collect();
        let mut best = f64::NEG_INFINITY;
        let mut choice = 0;
        for pick in combinations(free.len(), self.cards[j]) {
            let mask = pick.iter().fold(0u64, |m, &p| m | 1 << free[p]);
            let v = self.values[j][&mask] + self.solve(j + 1, used | mask);
            if v > best {
                best = v;
                choice = mask;
            }
        }
        self.memo[j].insert(used, (best, choice));
        best
    }

    fn assignment(&self) -> Assignment {
        let mut used = 0u64;
        let sets = (0..self.cards.len())
            .map(|j| {
                let (_, mask) = self.memo[j][&used];
                used |= mask;
                (0..self.n).filter(|&i| mask >> i & 1 == 1).collect()
            })
            .collect();
        Assignment { sets }
    }
}

/// Exact maximizer of `Σ_j objective_j(S_j)` over disjoint assignments with
/// `|S_j| = k_j`, ties to the lexicographically smallest `(S_1, S_2, ...)`.
///
/// Returns the optimal objective value and its assignment.
pub fn assignment_optimum(
    scn: &Scenario,
    objective: SetObjective,
    table: Option<&ScoreTable>,
    opts: &EvalOptions,
) -> Result<(f64, Assignment)> {
    let n = scn.n_agents();
    if scn.cardinalities().iter().sum::<usize>() > n {
        return Err(Error::InvalidArgument(
            "exact assignment search needs sum of k_j <= n".into(),
        ));
    }
    if n > 63 {
        return Err(Error::BudgetExceeded {
            required: u128::MAX,
            budget: opts.budget,
        });
    }
    let required = welfare_dp_transitions(scn).saturating_add(
        (0..scn.n_projects())
            .map(|j| binomial(n, scn.cardinality(j)))
            .sum::<u128>(),
    );
    if required > opts.budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: opts.budget,
        });
    }
    let table = match objective {
        SetObjective::Utility => None,
        _ => Some(table.ok_or_else(|| {
            Error::InvalidArgument("sketch objectives need a score table".into())
        })?),
    };
    let values = (0..scn.n_projects())
        .map(|j| {
            let k = scn.cardinality(j);
            let sets: Vec<Vec<AgentId>> = combinations(n, k).collect();
            sets.into_par_iter()
                .map(|set| {
                    let v = match objective {
                        SetObjective::Utility => utility(scn, j, &set, opts)?.value,
                        SetObjective::MinSketch => minmax_sketch(table.unwrap(), j, &set, k)?.0,
                        SetObjective::MaxSketch => minmax_sketch(table.unwrap(), j, &set, k)?.1,
                        SetObjective::StrongSketch => strong_sketch(table.unwrap(), j, &set)?.strong,
                    };
                    let mask = set.iter().fold(0u64, |m, &i| m | 1 << i);
                    Ok((mask, v))
                })
                .collect::<Result<HashMap<u64, f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut search = AssignmentSearch {
        cards: scn.cardinalities().to_vec(),
        n,
        values,
        memo: vec![HashMap::new(); scn.n_projects()],
    };
    let best = search.solve(0, 0);
    Ok((best, search.assignment()))
}

/// Exact optimum of the welfare `Σ_j u_j(S_j)` with `|S_j| = k_j`.
pub fn brute_force_welfare(scn: &Scenario, opts: &EvalOptions) -> Result<SelectionResult> {
    let (_, assignment) = assignment_optimum(scn, SetObjective::Utility, None, opts)?;
    SelectionResult::evaluate(scn, assignment, Vec::new(), opts)
}

/// Assignment maximizing `Σ_j min_{i∈S_j} a_{i,j}^{k_j}`, scored by true welfare.
pub fn baseline_min_sketch_welfare(
    scn: &Scenario,
    table: &ScoreTable,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    let (_, assignment) = assignment_optimum(scn, SetObjective::MinSketch, Some(table), opts)?;
    SelectionResult::evaluate(scn, assignment, Vec::new(), opts)
}

/// Assignment maximizing `Σ_j max_{i∈S_j} a_{i,j}^{k_j}`, scored by true welfare.
pub fn baseline_max_sketch_welfare(
    scn: &Scenario,
    table: &ScoreTable,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    let (_, assignment) = assignment_optimum(scn, SetObjective::MaxSketch, Some(table), opts)?;
    SelectionResult::evaluate(scn, assignment, Vec::new(), opts)
}

/// Optimal value of `Σ_j v_j(S_j)` for the harmonic strong sketch, and its assignment.
pub fn max_strong_sketch_welfare(
    scn: &Scenario,
    table: &ScoreTable,
    opts: &EvalOptions,
) -> Result<(f64, Assignment)> {
    assignment_optimum(scn, SetObjective::StrongSketch, Some(table), opts)
}

/// `Σ_j v_j(S_j)` of a given assignment under the harmonic strong sketch.
pub fn strong_sketch_objective(table: &ScoreTable, assignment: &Assignment) -> Result<f64> {
    assignment
        .sets
        .iter()
        .enumerate()
        .map(|(j, set)| strong_sketch(table, j, set).map(|e| e.strong))
        .sum()
}
