//! Test-score greedy selection, greedy project assignment, sketch-objective
//! baselines and exact brute-force oracles.

mod brute;
mod greedy;

use std::f64::consts::E;

use serde::Serialize;

pub use brute::{
    assignment_optimum, baseline_max_sketch_welfare, baseline_min_sketch_welfare,
    brute_force_single, brute_force_welfare, max_strong_sketch_welfare, strong_sketch_objective,
    welfare_dp_transitions, SetObjective,
};
pub use greedy::{greedy_topk, greedy_welfare, TieBreak};

use crate::error::Result;
use crate::model::{AgentId, Assignment, ProjectId, Scenario};
use crate::utility::{utility, EvalOptions, UtilityEstimate};

/// One greedy pick with the score that won it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub agent: AgentId,
    pub project: ProjectId,
    pub marginal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub assignment: Assignment,
    /// `u_j(S_j)` per project.
    pub objectives: Vec<UtilityEstimate>,
    pub total: f64,
    pub score_trace: Vec<TraceStep>,
    pub ratio_vs_opt: Option<f64>,
    /// Some project holds fewer than `k_j` agents.
    pub partial: bool,
}

impl SelectionResult {
    pub(crate) fn evaluate(
        scn: &Scenario,
        assignment: Assignment,
        score_trace: Vec<TraceStep>,
        opts: &EvalOptions,
    ) -> Result<Self> {
        let objectives = assignment
            .sets
            .iter()
            .enumerate()
            .map(|(j, set)| utility(scn, j, set, opts))
            .collect::<Result<Vec<_>>>()?;
        let total = objectives.iter().map(|e| e.value).sum();
        let partial = assignment
            .sets
            .iter()
            .enumerate()
            .any(|(j, set)| set.len() < scn.cardinality(j));
        Ok(SelectionResult {
            assignment,
            objectives,
            total,
            score_trace,
            ratio_vs_opt: None,
            partial,
        })
    }

    /// Agents selected for one project, sorted by id.
    pub fn selected(&self, project: ProjectId) -> Vec<AgentId> {
        let mut s = self.assignment.sets[project].clone();
        s.sort_unstable();
        s
    }
}

/// Approximation factor of the replication-score greedy for one project.
pub fn single_project_bound() -> f64 {
    (1.0 - 1.0 / E) / (5.0 - 1.0 / E)
}

/// Approximation factor of the greedy assignment with `k = max_j k_j`.
pub fn welfare_bound(k: usize) -> f64 {
    1.0 / (24.0 * ((k as f64).ln() + 1.0))
}

/// Tolerance on ratio comparisons against a bound.
pub const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationReport {
    pub ratio: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Which guarantee a method is held to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guarantee {
    SingleProject,
    Welfare { k: usize },
    Custom(f64),
}

impl Guarantee {
    pub fn bound(&self) -> f64 {
        match *self {
            Guarantee::SingleProject => single_project_bound(),
            Guarantee::Welfare { k } => welfare_bound(k),
            Guarantee::Custom(b) => b,
        }
    }
}

/// `method / oracle` against the guarantee; an all-zero oracle gives ratio 1.
pub fn approximation_report(
    method: &SelectionResult,
    oracle: &SelectionResult,
    guarantee: Guarantee,
) -> ApproximationReport {
    let ratio = ratio(method.total, oracle.total);
    let bound = guarantee.bound();
    ApproximationReport {
        ratio,
        bound,
        satisfied: ratio >= bound - RATIO_TOL,
    }
}

/// `value / opt`, or 1 when `opt` is zero.
pub fn ratio(value: f64, opt: f64) -> f64 {
    if opt == 0.0 {
        1.0
    } else {
        value / opt
    }
}
