//! Min/max sketch, the harmonic strong sketch, and exhaustive verifiers for
//! their sandwich bounds.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, ProjectId, Scenario};
use crate::subsets::combinations;
use crate::testscores::{build_score_table_with, ScoreKind, ScoreTable, TableOptions};
use crate::utility::{utility, EvalOptions, UTILITY_TOL};

/// One term `a_{π_r}^r / r` of the strong sketch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SketchTerm {
    pub agent: AgentId,
    pub r: usize,
    pub score: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SketchEval {
    pub lower: f64,
    pub upper: f64,
    pub strong: f64,
    pub pi_order: Vec<AgentId>,
    pub per_term: Vec<SketchTerm>,
}

/// `(min, max)` of `a_{i,j}^k` over `i ∈ S`, with `|S| = k`.
pub fn minmax_sketch(
    table: &ScoreTable,
    j: ProjectId,
    set: &[AgentId],
    k: usize,
) -> Result<(f64, f64)> {
    if set.len() != k || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "min/max sketch needs |S| = k >= 1, got |S| = {}, k = {k}",
            set.len()
        )));
    }
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for &i in set {
        let a = table.get(i, j, k)?;
        lower = lower.min(a);
        upper = upper.max(a);
    }
    Ok((lower, upper))
}

/// Greedy order `π`: `π_r` maximizes `a^r` over the agents not yet placed,
/// ties to the smallest id.
pub fn pi_order(table: &ScoreTable, j: ProjectId, set: &[AgentId]) -> Result<Vec<SketchTerm>> {
    let mut remaining = set.to_vec();
    remaining.sort_unstable();
    remaining.dedup();
    if remaining.len() != set.len() {
        return Err(Error::InvalidArgument("repeated agent in sketch set".into()));
    }
    let mut terms = Vec::with_capacity(set.len());
    for r in 1..=set.len() {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &i) in remaining.iter().enumerate() {
            let a = table.get(i, j, r)?;
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((pos, a));
            }
        }
        let (pos, score) = best.expect("non-empty remaining set");
        let agent = remaining.remove(pos);
        terms.push(SketchTerm {
            agent,
            r,
            score,
            contribution: score / r as f64,
        });
    }
    Ok(terms)
}

/// Harmonic strong sketch `Σ_r a_{π_r}^r / r` over a replication table,
/// truncated to `|S|` terms.
pub fn strong_sketch(table: &ScoreTable, j: ProjectId, set: &[AgentId]) -> Result<SketchEval> {
    if table.kind() != ScoreKind::Replication {
        return Err(Error::InvalidArgument(format!(
            "strong sketch needs replication scores, table holds {}",
            table.kind()
        )));
    }
    if set.is_empty() {
        return Ok(SketchEval {
            lower: 0.0,
            upper: 0.0,
            strong: 0.0,
            pi_order: Vec::new(),
            per_term: Vec::new(),
        });
    }
    let per_term = pi_order(table, j, set)?;
    let (lower, upper) = minmax_sketch(table, j, set, set.len())?;
    Ok(SketchEval {
        lower,
        upper,
        strong: per_term.iter().map(|t| t.contribution).sum(),
        pi_order: per_term.iter().map(|t| t.agent).collect(),
        per_term,
    })
}

/// With `ℓ = argmax_r a_{π_r}^r`: `a_{π_ℓ}^ℓ <= (2/ℓ) Σ_{r<=ℓ} a_{π_r}^r`.
pub fn score_max_bound_holds(eval: &SketchEval) -> bool {
    let Some(peak) = eval
        .per_term
        .iter()
        .max_by(|a, b| a.score.total_cmp(&b.score).then(b.r.cmp(&a.r)))
    else {
        return true;
    };
    let l = peak.r;
    let prefix: f64 = eval.per_term[..l].iter().map(|t| t.score).sum();
    peak.score <= 2.0 / l as f64 * prefix + UTILITY_TOL
}

/// One checked inequality on one set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundWitness {
    pub bound: String,
    pub slack: f64,
    pub witness_set: Vec<AgentId>,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub ok: bool,
    pub sets_checked: usize,
    /// Tightest lower-bound check (smallest slack).
    pub worst_lower: Option<BoundWitness>,
    /// Tightest upper-bound check (smallest slack).
    pub worst_upper: Option<BoundWitness>,
    /// First violated check, if any.
    pub witness: Option<BoundWitness>,
}

impl SandwichReport {
    fn new() -> Self {
        SandwichReport {
            ok: true,
            sets_checked: 0,
            worst_lower: None,
            worst_upper: None,
            witness: None,
        }
    }

    pub fn worst_lower_slack(&self) -> f64 {
        self.worst_lower.as_ref().map_or(f64::INFINITY, |w| w.slack)
    }

    pub fn worst_upper_slack(&self) -> f64 {
        self.worst_upper.as_ref().map_or(f64::INFINITY, |w| w.slack)
    }

    fn record(&mut self, w: BoundWitness, lower: bool) {
        if w.slack < -UTILITY_TOL && self.witness.is_none() {
            self.ok = false;
            self.witness = Some(w.clone());
        }
        let slot = if lower { &mut self.worst_lower } else { &mut self.worst_upper };
        if slot.as_ref().is_none_or(|cur| w.slack < cur.slack) {
            *slot = Some(w);
        }
    }

    /// Folds another report into this one.
    pub fn merge(&mut self, other: SandwichReport) {
        self.sets_checked += other.sets_checked;
        for (w, lower) in [(other.worst_lower, true), (other.worst_upper, false)] {
            if let Some(w) = w {
                let slot = if lower { &mut self.worst_lower } else { &mut self.worst_upper };
                if slot.as_ref().is_none_or(|cur| w.slack < cur.slack) {
                    *slot = Some(w);
                }
            }
        }
        if !other.ok && self.ok {
            self.ok = false;
            self.witness = other.witness;
        }
    }
}

impl Default for SandwichReport {
    fn default() -> Self {
        Self::new()
    }
}

fn exact_replication_table(scn: &Scenario, k: usize, budget: u64) -> Result<ScoreTable> {
    build_score_table_with(
        scn,
        ScoreKind::Replication,
        k,
        &TableOptions {
            budget,
            monte_carlo: None,
        },
    )
}

/// Checks `v(S) / (2(ln t + 1)) <= u(S) <= 6 v(S)` for every non-empty `S`
/// with `t = |S| <= k`, where `v` is the `t`-term strong sketch.
pub fn verify_strong_sketch_bounds(
    scn: &Scenario,
    j: ProjectId,
    k: usize,
    budget: u64,
) -> Result<SandwichReport> {
    let table = exact_replication_table(scn, k, budget)?;
    let opts = EvalOptions::exact(budget);
    let mut report = SandwichReport::new();
    for t in 1..=k.min(scn.n_agents()) {
        let factor = 2.0 * ((t as f64).ln() + 1.0);
        for set in combinations(scn.n_agents(), t) {
            let u = utility(scn, j, &set, &opts)?.value;
            let v = strong_sketch(&table, j, &set)?.strong;
            report.sets_checked += 1;
            report.record(
                BoundWitness {
                    bound: format!("v/(2(ln {t}+1)) <= u"),
                    slack: u - v / factor,
                    witness_set: set.clone(),
                    u,
                    v,
                },
                true,
            );
            report.record(
                BoundWitness {
                    bound: "u <= 6v".into(),
                    slack: 6.0 * v - u,
                    witness_set: set,
                    u,
                    v,
                },
                false,
            );
        }
    }
    Ok(report)
}

/// Checks `p · min_{i∈S} a_i^k <= u(S) <= q · max_{i∈S} a_i^k` for every
/// `|S| = k`, with scores read from `table`.
pub fn verify_score_sandwich(
    scn: &Scenario,
    j: ProjectId,
    k: usize,
    table: &ScoreTable,
    p: f64,
    q: f64,
    budget: u64,
) -> Result<SandwichReport> {
    let opts = EvalOptions::exact(budget);
    let mut report = SandwichReport::new();
    for set in combinations(scn.n_agents(), k) {
        let u = utility(scn, j, &set, &opts)?.value;
        let (lower, upper) = minmax_sketch(table, j, &set, k)?;
        report.sets_checked += 1;
        report.record(
            BoundWitness {
                bound: format!("{p} * min a^k <= u"),
                slack: u - p * lower,
                witness_set: set.clone(),
                u,
                v: lower,
            },
            true,
        );
        report.record(
            BoundWitness {
                bound: format!("u <= {q} * max a^k"),
                slack: q * upper - u,
                witness_set: set,
                u,
                v: upper,
            },
            false,
        );
    }
    Ok(report)
}

/// Lower factor of the replication-score sandwich.
pub const GOODNESS_LOWER: f64 = 1.0 - 1.0 / E;
/// Upper factor of the replication-score sandwich.
pub const GOODNESS_UPPER: f64 = 4.0;

/// Checks `(1 - 1/e) · min a^k <= u(S) <= 4 · max a^k` over all `|S| = k`
/// with exact replication scores.
pub fn verify_goodness_sandwich(
    scn: &Scenario,
    j: ProjectId,
    k: usize,
    budget: u64,
) -> Result<SandwichReport> {
    let table = exact_replication_table(scn, k, budget)?;
    verify_score_sandwich(scn, j, k, &table, GOODNESS_LOWER, GOODNESS_UPPER, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;
    use crate::production::ValueFunction;
    use crate::testscores::build_score_table;
    use crate::utility::DEFAULT_BUDGET;

    fn points(values: &[f64], g: ValueFunction, k: usize) -> Scenario {
        let ds = values.iter().map(|&v| Distribution::point(v).unwrap()).collect();
        Scenario::single_project(ds, g, k).unwrap()
    }

    #[test]
    fn minmax_examples() {
        let t = ScoreTable::from_scores(ScoreKind::Mean, vec![vec![vec![1.0; 3]], vec![vec![3.0; 3]], vec![vec![7.0; 3]]]).unwrap();
        assert_eq!(minmax_sketch(&t, 0, &[0, 1, 2], 3).unwrap(), (1.0, 7.0));
        assert_eq!(minmax_sketch(&t, 0, &[1], 1).unwrap(), (3.0, 3.0));
        assert!(minmax_sketch(&t, 0, &[0, 1], 3).is_err());
    }

    #[test]
    fn harmonic_identical_agents() {
        let k = 5;
        let s = points(&vec![1.0; k], ValueFunction::BestShot, k);
        let t = build_score_table(&s, ScoreKind::Replication, k).unwrap();
        let e = strong_sketch(&t, 0, &(0..k).collect::<Vec<_>>()).unwrap();
        let h: f64 = (1..=k).map(|r| 1.0 / r as f64).sum();
        assert!((e.strong - h).abs() < 1e-15);
        assert_eq!(e.pi_order, vec![0, 1, 2, 3, 4]);
        assert_eq!(e.lower, e.upper);
    }

    #[test]
    fn two_point_masses() {
        let s = points(&[1.0, 2.0], ValueFunction::BestShot, 2);
        let t = build_score_table(&s, ScoreKind::Replication, 2).unwrap();
        let e = strong_sketch(&t, 0, &[0, 1]).unwrap();
        assert_eq!(e.pi_order, vec![1, 0]);
        assert_eq!(e.strong, 2.5);
        assert_eq!(strong_sketch(&t, 0, &[1, 0]).unwrap(), e);
        assert_eq!(strong_sketch(&t, 0, &[0]).unwrap().strong, 1.0);
        assert!(score_max_bound_holds(&e));
    }

    #[test]
    fn strong_sketch_needs_replication() {
        let s = points(&[1.0], ValueFunction::BestShot, 1);
        let t = build_score_table(&s, ScoreKind::Mean, 1).unwrap();
        assert!(strong_sketch(&t, 0, &[0]).is_err());
    }

    #[test]
    fn verifiers_on_identical_agents() {
        let s = points(&[1.0; 4], ValueFunction::BestShot, 4);
        let r = verify_strong_sketch_bounds(&s, 0, 4, DEFAULT_BUDGET).unwrap();
        assert!(r.ok);
        assert_eq!(r.sets_checked, 15);
        let g = verify_goodness_sandwich(&s, 0, 4, DEFAULT_BUDGET).unwrap();
        assert!(g.ok);
        assert!((g.worst_lower_slack() - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn single_agent_sketch_bound() {
        let d = Distribution::new([(0.0, 0.4), (3.0, 0.6)]).unwrap();
        let s = Scenario::single_project(vec![d], ValueFunction::Ces(2.0), 1).unwrap();
        let r = verify_strong_sketch_bounds(&s, 0, 1, DEFAULT_BUDGET).unwrap();
        assert!(r.ok);
        let w = r.worst_lower.unwrap();
        assert!((w.u - w.v).abs() < 1e-15);
    }
}
