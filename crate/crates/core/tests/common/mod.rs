//! Naive oracles written independently of the library's evaluators: plain
//! cartesian-product enumeration and exhaustive search.

#![allow(dead_code)]

use std::collections::HashMap;

use proptest::prelude::*;
use testscore::model::{Distribution, Scenario};
use testscore::production::ValueFunction;

/// `E[g(X_1..X_n)]` by walking every outcome tuple.
pub fn naive_expectation(g: &ValueFunction, dists: &[&Distribution]) -> f64 {
    fn walk(g: &ValueFunction, dists: &[&Distribution], x: &mut Vec<f64>, p: f64) -> f64 {
        if x.len() == dists.len() {
            return p * g.evaluate(x);
        }
        let d = dists[x.len()];
        let mut total = 0.0;
        for (v, q) in d.values().iter().zip(d.probs()) {
            x.push(*v);
            total += walk(g, dists, x, p * q);
            x.pop();
        }
        total
    }
    if dists.is_empty() {
        return g.evaluate(&[]);
    }
    walk(g, dists, &mut Vec::with_capacity(dists.len()), 1.0)
}

pub fn naive_utility(scn: &Scenario, j: usize, set: &[usize]) -> f64 {
    let dists: Vec<&Distribution> = set.iter().map(|&i| scn.dist(i, j)).collect();
    naive_expectation(scn.value_fn(j), &dists)
}

/// `E[g(k independent copies of d)]` over all `|support|^k` ordered tuples.
pub fn naive_replication(g: &ValueFunction, d: &Distribution, k: usize) -> f64 {
    naive_expectation(g, &vec![d; k])
}

/// Average of the top `mass` of probability, splitting the boundary atom.
pub fn naive_tail_average(d: &Distribution, mass: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = d.values().iter().copied().zip(d.probs().iter().copied()).collect();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut left, mut acc) = (mass, 0.0);
    for (v, p) in atoms {
        let take = p.min(left);
        acc += v * take;
        left -= take;
        if left <= 0.0 {
            break;
        }
    }
    acc / mass
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Largest `u_j(S)` over `|S| = k`.
pub fn naive_best_subset(scn: &Scenario, j: usize, k: usize) -> f64 {
    subsets(scn.n_agents(), k)
        .iter()
        .map(|s| naive_utility(scn, j, s))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest welfare over assignments with `|S_j| = k_j`, by giving every
/// agent each project or none in turn.
pub fn naive_best_assignment(scn: &Scenario) -> f64 {
    struct Search<'a> {
        scn: &'a Scenario,
        cache: HashMap<(usize, u64), f64>,
        sets: Vec<Vec<usize>>,
        best: f64,
    }
    impl Search<'_> {
        fn value(&mut self, j: usize) -> f64 {
            let mask = self.sets[j].iter().fold(0u64, |m, &i| m | 1 << i);
            if let Some(&v) = self.cache.get(&(j, mask)) {
                return v;
            }
            let v = naive_utility(self.scn, j, &self.sets[j]);
            self.cache.insert((j, mask), v);
            v
        }

        fn go(&mut self, agent: usize) {
            let m = self.scn.n_projects();
            if agent == self.scn.n_agents() {
                if (0..m).all(|j| self.sets[j].len() == self.scn.cardinality(j)) {
                    let total: f64 = (0..m).map(|j| self.value(j)).sum();
                    self.best = self.best.max(total);
                }
                return;
            }
            self.go(agent + 1);
            for j in 0..m {
                if self.sets[j].len() < self.scn.cardinality(j) {
                    self.sets[j].push(agent);
                    self.go(agent + 1);
                    self.sets[j].pop();
                }
            }
        }
    }
    let mut s = Search {
        scn,
        cache: HashMap::new(),
        sets: vec![Vec::new(); scn.n_projects()],
        best: f64::NEG_INFINITY,
    };
    s.go(0);
    s.best
}

/// `Σ_r a^r_{π_r} / r` where `π_r` is the remaining agent with the largest
/// `a^r`, ties to the smaller id.
pub fn naive_strong_sketch(score: impl Fn(usize, usize) -> f64, set: &[usize]) -> f64 {
    let mut left: Vec<usize> = set.to_vec();
    left.sort_unstable();
    let mut v = 0.0;
    for r in 1..=set.len() {
        let (pos, best) = left
            .iter()
            .enumerate()
            .map(|(p, &i)| (p, score(i, r)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        v += best / r as f64;
        left.remove(pos);
    }
    v
}

pub fn point(v: f64) -> Distribution {
    Distribution::point(v).unwrap()
}

/// Distribution with up to three atoms on a 1/8 grid in `[0, 5]`.
pub fn distribution() -> impl Strategy<Value = Distribution> {
    prop::collection::vec((0u32..=40, 1u32..=20), 1..=3).prop_map(|atoms| {
        let mut seen = Vec::new();
        let atoms: Vec<(f64, f64)> = atoms
            .into_iter()
            .filter(|a| {
                let fresh = !seen.contains(&a.0);
                seen.push(a.0);
                fresh
            })
            .map(|(v, w)| (v as f64 / 8.0, w as f64))
            .collect();
        let kept: f64 = atoms.iter().map(|a| a.1).sum();
        Distribution::new(atoms.into_iter().map(|(v, w)| (v, w / kept))).unwrap()
    })
}
