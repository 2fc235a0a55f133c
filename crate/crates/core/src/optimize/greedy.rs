use rand::Rng;

use super::{SelectionResult, TraceStep};
use crate::error::{Error, Result};
use crate::model::{AgentId, Assignment, ProjectId, RngSpec, Scenario};
use crate::testscores::{ScoreKind, ScoreTable};
use crate::utility::EvalOptions;

/// Tie rule for [`greedy_welfare`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TieBreak {
    /// Smallest agent id, then smallest project id.
    #[default]
    Lexicographic,
    /// Uniform among exactly tied pairs, drawn from stream 0 of the given seed.
    Random(RngSpec),
}

/// The `k` agents with the largest `a_{i,j}^k`, ties to the smallest id.
pub fn greedy_topk(
    scn: &Scenario,
    j: ProjectId,
    k: usize,
    table: &ScoreTable,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    scn.check_project(j)?;
    if k == 0 || k > scn.n_agents() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} outside 1..={} agents",
            scn.n_agents()
        )));
    }
    // mean and quantile scores do not depend on the team size
    let r = if table.kind() == ScoreKind::Replication { k } else { 1 };
    let mut ranked: Vec<(AgentId, f64)> = scn
        .agents()
        .map(|i| table.get(i, j, r).map(|a| (i, a)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    ranked.truncate(k);
    let mut assignment = Assignment::empty(scn.n_projects());
    let trace = ranked
        .iter()
        .enumerate()
        .map(|(step, &(agent, score))| {
            assignment.sets[j].push(agent);
            TraceStep {
                step,
                agent,
                project: j,
                marginal: score,
            }
        })
        .collect();
    let mut result = SelectionResult::evaluate(scn, assignment, trace, opts)?;
    // exactly k agents were requested, whatever the scenario's own k_j
    result.partial = false;
    Ok(result)
}

/// Greedy project assignment: repeatedly assign the free agent and open
/// project maximizing `a_{i,j}^{|S_j|+1} / (|S_j| + 1)`, closing projects
/// once they hold `k_j` agents.
pub fn greedy_welfare(
    scn: &Scenario,
    table: &ScoreTable,
    tie: TieBreak,
    opts: &EvalOptions,
) -> Result<SelectionResult> {
    let (n, m) = (scn.n_agents(), scn.n_projects());
    if table.n_agents() != n || table.n_projects() != m {
        return Err(Error::InvalidArgument("score table does not match scenario".into()));
    }
    let mut rng = match tie {
        TieBreak::Random(spec) => Some(spec.stream(0)),
        TieBreak::Lexicographic => None,
    };
    let mut free = vec![true; n];
    let mut open: Vec<bool> = (0..m).map(|j| scn.cardinality(j) > 0).collect();
    let mut assignment = Assignment::empty(m);
    let mut trace = Vec::new();
    let mut ties: Vec<(AgentId, ProjectId)> = Vec::new();
    while free.iter().any(|&f| f) && open.iter().any(|&o| o) {
        let mut best = f64::NEG_INFINITY;
        ties.clear();
        for i in (0..n).filter(|&i| free[i]) {
            for j in (0..m).filter(|&j| open[j]) {
                let r = assignment.sets[j].len() + 1;
                let marginal = table.get(i, j, r)? / r as f64;
                if marginal > best {
                    best = marginal;
                    ties.clear();
                    ties.push((i, j));
                } else if marginal == best {
                    ties.push((i, j));
                }
            }
        }
        let (i, j) = match rng.as_mut() {
            Some(g) => ties[g.random_range(0..ties.len())],
            None => ties[0],
        };
        free[i] = false;
        assignment.sets[j].push(i);
        if assignment.sets[j].len() >= scn.cardinality(j) {
            open[j] = false;
        }
        trace.push(TraceStep {
            step: trace.len(),
            agent: i,
            project: j,
            marginal: best,
        });
    }
    SelectionResult::evaluate(scn, assignment, trace, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;
    use crate::production::ValueFunction;
    use crate::testscores::build_score_table;

    fn points(values: &[f64], k: usize) -> Scenario {
        let ds = values.iter().map(|&v| Distribution::point(v).unwrap()).collect();
        Scenario::single_project(ds, ValueFunction::Ces(1.0), k).unwrap()
    }

    #[test]
    fn topk_ties_and_full_set() {
        let s = points(&[1.0, 3.0, 3.0, 2.0], 2);
        let t = build_score_table(&s, ScoreKind::Mean, 2).unwrap();
        let r = greedy_topk(&s, 0, 2, &t, &EvalOptions::default()).unwrap();
        assert_eq!(r.assignment.sets[0], vec![1, 2]);
        assert_eq!(r.total, 6.0);
        let all = greedy_topk(&s, 0, 4, &t, &EvalOptions::default()).unwrap();
        assert_eq!(all.selected(0), vec![0, 1, 2, 3]);
        assert!(greedy_topk(&s, 0, 5, &t, &EvalOptions::default()).is_err());
    }

    #[test]
    fn welfare_single_project_follows_table() {
        let s = points(&[1.0, 3.0, 2.0], 2);
        let t = build_score_table(&s, ScoreKind::Replication, 2).unwrap();
        let r = greedy_welfare(&s, &t, TieBreak::Lexicographic, &EvalOptions::default()).unwrap();
        assert_eq!(r.assignment.sets[0], vec![1, 2]);
        assert_eq!(r.score_trace.len(), 2);
        assert!(!r.partial);
    }

    #[test]
    fn random_ties_are_seeded() {
        let s = points(&[1.0; 6], 3);
        let t = build_score_table(&s, ScoreKind::Replication, 3).unwrap();
        let run = |seed| {
            greedy_welfare(&s, &t, TieBreak::Random(RngSpec::new(seed)), &EvalOptions::default())
                .unwrap()
                .assignment
        };
        assert_eq!(run(1), run(1));
        let lex = greedy_welfare(&s, &t, TieBreak::Lexicographic, &EvalOptions::default()).unwrap();
        assert_eq!(lex.assignment.sets[0], vec![0, 1, 2]);
    }

    #[test]
    fn relaxed_fills_partially() {
        let ds = vec![vec![Distribution::point(1.0).unwrap(); 2]; 3];
        let s = Scenario::relaxed(ds, vec![ValueFunction::BestShot; 2], vec![2, 2]).unwrap();
        let t = build_score_table(&s, ScoreKind::Replication, 2).unwrap();
        let r = greedy_welfare(&s, &t, TieBreak::Lexicographic, &EvalOptions::default()).unwrap();
        assert_eq!(r.assignment.assigned(), 3);
        assert!(r.partial);
    }
}
