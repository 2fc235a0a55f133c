//! Mean, quantile and replication test scores, and the cached table
//! `a_{i,j}^r` for `r = 1..max_r`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AgentId, Distribution, ProjectId, RngSpec, Scenario};
use crate::production::ValueFunction;
use crate::utility::{mc_expected_value, UtilityEstimate, UtilityMethod, DEFAULT_BUDGET};

/// Which test score a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ScoreKind {
    Mean,
    /// Tail average above the given quantile level in `[0, 1)`.
    Quantile(f64),
    Replication,
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreKind::Mean => write!(f, "mean"),
            ScoreKind::Quantile(level) => write!(f, "quantile:{level}"),
            ScoreKind::Replication => write!(f, "replication"),
        }
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(ScoreKind::Mean),
            "replication" => Ok(ScoreKind::Replication),
            _ => {
                let level = s
                    .strip_prefix("quantile:")
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "unknown score kind {s:?} (mean | quantile:<level> | replication)"
                        ))
                    })?;
                check_level(level)?;
                Ok(ScoreKind::Quantile(level))
            }
        }
    }
}

impl From<ScoreKind> for String {
    fn from(k: ScoreKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for ScoreKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {level} outside [0, 1)"
        )));
    }
    Ok(())
}

/// `E[X]`.
pub fn mean_score(d: &Distribution) -> f64 {
    d.mean()
}

/// Average of the top `1 - level` probability mass, splitting atoms
/// fractionally: `(1/(1-level)) ∫_level^1 Q(u) du`.
pub fn quantile_score(d: &Distribution, level: f64) -> Result<f64> {
    check_level(level)?;
    if level == 0.0 {
        return Ok(d.mean());
    }
    Ok(tail_average(d, 1.0 - level))
}

/// The quantile level `1 - θ/k` used for team size `k`.
pub fn quantile_level_for(theta: f64, k: usize) -> f64 {
    1.0 - theta / k as f64
}

/// Average of the top `mass` of probability, `mass` in `(0, 1]`.
///
/// Taking the tail mass directly avoids the rounding in `1 - (1 - mass)`.
pub fn tail_average(d: &Distribution, mass: f64) -> f64 {
    let values = d.values();
    let probs = d.probs();
    let top = values.len() - 1;
    if probs[top] >= mass {
        return values[top];
    }
    let mut remaining = mass;
    let mut acc = 0.0;
    for (v, p) in values.iter().zip(probs).rev() {
        let take = p.min(remaining);
        acc += v * take;
        remaining -= take;
        if remaining <= 0.0 {
            break;
        }
    }
    acc / mass
}

/// How replication scores are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplicationMode {
    Exact { budget: u64 },
    MonteCarlo { rng: RngSpec, samples: u64 },
}

/// `E[g(X^(1), ..., X^(k))]` over `k` independent copies of `X ~ d`.
pub fn replication_score(
    g: &ValueFunction,
    d: &Distribution,
    k: usize,
    mode: ReplicationMode,
) -> Result<f64> {
    replication_estimate(g, d, k, mode).map(|e| e.value)
}

/// [`replication_score`] with its method and standard error.
pub fn replication_estimate(
    g: &ValueFunction,
    d: &Distribution,
    k: usize,
    mode: ReplicationMode,
) -> Result<UtilityEstimate> {
    if k == 0 {
        return Err(Error::InvalidArgument("replication needs k >= 1".into()));
    }
    match mode {
        ReplicationMode::Exact { .. } if *g == ValueFunction::BestShot => Ok(
            UtilityEstimate::exact(replicated_max(d, k), UtilityMethod::ExactBestShot),
        ),
        ReplicationMode::Exact { budget } => {
            let required = multiset_count(k, d.len());
            if required > budget as u128 {
                return Err(Error::BudgetExceeded { required, budget });
            }
            Ok(UtilityEstimate::exact(
                multiset_expectation(g, d, k),
                UtilityMethod::Exact,
            ))
        }
        ReplicationMode::MonteCarlo { rng, samples } => {
            if samples < 2 {
                return Err(Error::InvalidArgument("Monte Carlo needs at least 2 samples".into()));
            }
            let copies = vec![d; k];
            let (value, std_error) = mc_expected_value(g, &copies, &rng, 0, samples);
            Ok(UtilityEstimate {
                value,
                method: UtilityMethod::MonteCarlo,
                samples,
                std_error,
            })
        }
    }
}

/// `Σ_v v (F(v)^k - F(v-)^k)`.
fn replicated_max(d: &Distribution, k: usize) -> f64 {
    let k = k as i32;
    let mut below = 0.0f64;
    let mut total = 0.0;
    for (v, p) in d.atoms() {
        let at_most = (below + p).min(1.0);
        total += v * (at_most.powi(k) - below.powi(k));
        below = at_most;
    }
    total
}

/// Number of multisets of size `k` over `s` symbols, `C(k+s-1, s-1)`, saturating.
pub fn multiset_count(k: usize, s: usize) -> u128 {
    let (n, r) = ((k + s - 1) as u128, (s - 1).min(k) as u128);
    let mut c: u128 = 1;
    for i in 0..r {
        c = match c.checked_mul(n - i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

fn multiset_expectation(g: &ValueFunction, d: &Distribution, k: usize) -> f64 {
    // binom[a][b] = C(a, b)
    let mut binom = vec![vec![0.0f64; k + 1]; k + 1];
    for a in 0..=k {
        binom[a][0] = 1.0;
        for b in 1..=a {
            binom[a][b] = binom[a - 1][b - 1] + if b < a { binom[a - 1][b] } else { 0.0 };
        }
    }
    let mut walk = MultisetWalk {
        g,
        values: d.values(),
        probs: d.probs(),
        binom: &binom,
        buf: Vec::with_capacity(k),
        scratch: Vec::with_capacity(k),
        total: 0.0,
    };
    walk.visit(0, k, 1.0);
    walk.total
}

struct MultisetWalk<'a> {
    g: &'a ValueFunction,
    values: &'a [f64],
    probs: &'a [f64],
    binom: &'a [Vec<f64>],
    buf: Vec<f64>,
    scratch: Vec<f64>,
    total: f64,
}

impl MultisetWalk<'_> {
    /// Distributes `remaining` copies over atoms `atom..`.
    fn visit(&mut self, atom: usize, remaining: usize, weight: f64) {
        if atom + 1 == self.values.len() {
            let w = weight * self.probs[atom].powi(remaining as i32);
            let len = self.buf.len();
            self.buf.resize(len + remaining, self.values[atom]);
            self.total += w * self.g.evaluate_with(&self.buf, &mut self.scratch);
            self.buf.truncate(len);
            return;
        }
        let p = self.probs[atom];
        let mut pc = 1.0;
        for c in 0..=remaining {
            let w = weight * self.binom[remaining][c] * pc;
            let len = self.buf.len();
            self.buf.resize(len + c, self.values[atom]);
            self.visit(atom + 1, remaining - c, w);
            self.buf.truncate(len);
            pc *= p;
        }
    }
}

/// Per-entry provenance of a table score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreEntry {
    pub score: f64,
    pub method: UtilityMethod,
    pub std_error: f64,
}

/// Cached scores `a_{i,j}^r` for every agent, project and `r = 1..max_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    n: usize,
    m: usize,
    max_r: usize,
    kind: ScoreKind,
    // [(i * m + j) * max_r + r - 1]
    entries: Vec<ScoreEntry>,
}

/// Evaluation settings for [`build_score_table_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub budget: u64,
    /// Seed for Monte Carlo entries beyond the budget; `None` makes them errors.
    pub monte_carlo: Option<RngSpec>,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            budget: DEFAULT_BUDGET,
            monte_carlo: Some(RngSpec::new(0)),
        }
    }
}

/// Target relative standard error for Monte Carlo table entries.
pub const MC_RELATIVE_ERROR: f64 = 1e-3;
const MC_INITIAL_SAMPLES: u64 = 1 << 14;
const MC_MAX_SAMPLES: u64 = 1 << 24;

impl ScoreTable {
    /// Table from explicit scores laid out as `scores[i][j][r - 1]`.
    pub fn from_scores(kind: ScoreKind, scores: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = scores.len();
        let m = scores.first().map_or(0, Vec::len);
        let max_r = scores.first().and_then(|row| row.first()).map_or(0, Vec::len);
        if n == 0 || m == 0 || max_r == 0 {
            return Err(Error::InvalidArgument("empty score table".into()));
        }
        let mut entries = Vec::with_capacity(n * m * max_r);
        for row in scores {
            if row.len() != m {
                return Err(Error::InvalidArgument("ragged score table".into()));
            }
            for cell in row {
                if cell.len() != max_r {
                    return Err(Error::InvalidArgument("ragged score table".into()));
                }
                entries.extend(cell.into_iter().map(|score| ScoreEntry {
                    score,
                    method: UtilityMethod::Exact,
                    std_error: 0.0,
                }));
            }
        }
        Ok(ScoreTable {
            n,
            m,
            max_r,
            kind,
            entries,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn n_projects(&self) -> usize {
        self.m
    }

    pub fn max_r(&self) -> usize {
        self.max_r
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    fn index(&self, agent: AgentId, project: ProjectId, r: usize) -> Result<usize> {
        if agent >= self.n || project >= self.m || r == 0 || r > self.max_r {
            return Err(Error::MissingScore { agent, project, r });
        }
        Ok((agent * self.m + project) * self.max_r + r - 1)
    }

    /// `a_{agent,project}^r`.
    pub fn get(&self, agent: AgentId, project: ProjectId, r: usize) -> Result<f64> {
        Ok(self.entries[self.index(agent, project, r)?].score)
    }

    pub fn entry(&self, agent: AgentId, project: ProjectId, r: usize) -> Result<ScoreEntry> {
        Ok(self.entries[self.index(agent, project, r)?])
    }

    /// True when every entry was computed exactly.
    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.std_error == 0.0)
    }

    /// Copy with every score multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ScoreTable {
        let mut t = self.clone();
        for e in &mut t.entries {
            e.score *= factor;
            e.std_error *= factor;
        }
        t
    }

    /// Writes `agent,project,r,score,method,std_error` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("writing score table: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["agent", "project", "r", "score", "method", "std_error"])
            .map_err(io)?;
        for i in 0..self.n {
            for j in 0..self.m {
                for r in 1..=self.max_r {
                    let e = self.entry(i, j, r)?;
                    let method = match e.method {
                        UtilityMethod::Exact => "exact",
                        UtilityMethod::ExactBestShot => "exact_best_shot",
                        UtilityMethod::MonteCarlo => "monte_carlo",
                    };
                    w.write_record([
                        i.to_string(),
                        j.to_string(),
                        r.to_string(),
                        e.score.to_string(),
                        method.to_string(),
                        e.std_error.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        w.flush()
            .map_err(|e| Error::InvalidArgument(format!("writing score table: {e}")))
    }
}

/// [`build_score_table_with`] under [`TableOptions::default`].
pub fn build_score_table(scn: &Scenario, kind: ScoreKind, max_r: usize) -> Result<ScoreTable> {
    build_score_table_with(scn, kind, max_r, &TableOptions::default())
}

/// Fills `a_{i,j}^r` for every agent, project and `r = 1..max_r`.
///
/// Replication entries beyond the exact budget fall back to Monte Carlo,
/// sampling until the standard error is within [`MC_RELATIVE_ERROR`] of the
/// value or a sample cap is reached.
pub fn build_score_table_with(
    scn: &Scenario,
    kind: ScoreKind,
    max_r: usize,
    opts: &TableOptions,
) -> Result<ScoreTable> {
    if max_r == 0 || max_r > scn.max_cardinality() {
        return Err(Error::InvalidArgument(format!(
            "max_r = {max_r} outside 1..={}",
            scn.max_cardinality()
        )));
    }
    if let ScoreKind::Quantile(level) = kind {
        check_level(level)?;
    }
    let (n, m) = (scn.n_agents(), scn.n_projects());
    let entries = (0..n * m * max_r)
        .into_par_iter()
        .map(|idx| {
            let r = idx % max_r + 1;
            let cell = idx / max_r;
            let (i, j) = (cell / m, cell % m);
            let d = scn.dist(i, j);
            let exact = |score| ScoreEntry {
                score,
                method: UtilityMethod::Exact,
                std_error: 0.0,
            };
            let entry = match kind {
                ScoreKind::Mean => Ok(exact(mean_score(d))),
                ScoreKind::Quantile(level) => quantile_score(d, level).map(exact),
                ScoreKind::Replication => replication_entry(scn.value_fn(j), d, r, opts, idx as u64),
            };
            entry.map_err(|e| Error::ScoreEntry {
                agent: i,
                project: j,
                r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScoreTable {
        n,
        m,
        max_r,
        kind,
        entries,
    })
}

fn replication_entry(
    g: &ValueFunction,
    d: &Distribution,
    r: usize,
    opts: &TableOptions,
    stream: u64,
) -> Result<ScoreEntry> {
    let est = match replication_estimate(g, d, r, ReplicationMode::Exact { budget: opts.budget }) {
        Err(Error::BudgetExceeded { .. }) if opts.monte_carlo.is_some() => {
            let rng = opts.monte_carlo.unwrap().derive(stream);
            let mut samples = MC_INITIAL_SAMPLES;
            loop {
                let est = replication_estimate(g, d, r, ReplicationMode::MonteCarlo { rng, samples })?;
                if est.std_error <= MC_RELATIVE_ERROR * est.value || samples >= MC_MAX_SAMPLES {
                    break est;
                }
                samples *= 4;
            }
        }
        other => other?,
    };
    Ok(ScoreEntry {
        score: est.value,
        method: est.method,
        std_error: est.std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXACT: ReplicationMode = ReplicationMode::Exact { budget: DEFAULT_BUDGET };

    fn coin(v: f64) -> Distribution {
        Distribution::new([(0.0, 0.5), (v, 0.5)]).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_score(&Distribution::point(1.0).unwrap()), 1.0);
        assert_eq!(mean_score(&coin(2.0)), 1.0);
        let d = Distribution::two_point(0.0, 3.0, 0.2).unwrap();
        assert!((mean_score(&d) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn quantile_examples() {
        let d = coin(2.0);
        assert_eq!(quantile_score(&d, 0.0).unwrap(), mean_score(&d));
        assert_eq!(quantile_score(&d, 0.75).unwrap(), 2.0);
        assert_eq!(quantile_score(&d, 0.5).unwrap(), 2.0);
        assert!((quantile_score(&d, 0.25).unwrap() - 2.0 * 0.5 / 0.75).abs() < 1e-15);
        let k = 10;
        let risky = Distribution::two_point(0.0, 1.5, 0.11).unwrap();
        assert_eq!(quantile_score(&risky, 1.0 - 1.0 / k as f64).unwrap(), 1.5);
        assert!(quantile_score(&d, 1.0).is_err());
        assert!(quantile_score(&d, -0.1).is_err());
    }

    #[test]
    fn tail_mass_equal_to_top_atom() {
        let d = Distribution::two_point(0.0, 2.0, 1.0 / 16.0).unwrap();
        assert_eq!(tail_average(&d, 1.0 / 16.0), 2.0);
    }

    #[test]
    fn replication_examples() {
        let pm = Distribution::point(3.0).unwrap();
        for k in 1..6 {
            assert_eq!(replication_score(&ValueFunction::BestShot, &pm, k, EXACT).unwrap(), 3.0);
        }
        assert_eq!(replication_score(&ValueFunction::BestShot, &coin(2.0), 2, EXACT).unwrap(), 1.5);
        let d = Distribution::new([(1.0, 0.2), (2.0, 0.3), (5.0, 0.5)]).unwrap();
        for k in 1..8 {
            let s = replication_score(&ValueFunction::Ces(1.0), &d, k, EXACT).unwrap();
            assert!((s - k as f64 * d.mean()).abs() < 1e-12);
        }
        let a = Distribution::point(2.0).unwrap();
        let s = replication_score(&ValueFunction::Ces(2.0), &a, 9, EXACT).unwrap();
        assert!((s - 6.0).abs() < 1e-12);
    }

    #[test]
    fn multiset_path_matches_product_enumeration() {
        let d = Distribution::new([(0.0, 0.3), (1.0, 0.5), (4.0, 0.2)]).unwrap();
        for g in [ValueFunction::TopR(2), ValueFunction::Ces(1.5), ValueFunction::BestShot] {
            for k in 1..=5 {
                let copies = vec![&d; k];
                let oracle = crate::utility::expected_value(&g, &copies);
                let s = replication_score(&g, &d, k, ReplicationMode::Exact { budget: 1000 }).unwrap();
                assert!((s - oracle).abs() < 1e-12, "{g} k={k}: {s} vs {oracle}");
            }
        }
    }

    #[test]
    fn multiset_budget() {
        assert_eq!(multiset_count(3, 1), 1);
        assert_eq!(multiset_count(2, 3), 6);
        assert_eq!(multiset_count(30, 3), 496);
        let d = Distribution::new([(0.0, 0.5), (1.0, 0.25), (2.0, 0.25)]).unwrap();
        assert_eq!(
            replication_score(&ValueFunction::Ces(2.0), &d, 2, ReplicationMode::Exact { budget: 5 }),
            Err(Error::BudgetExceeded { required: 6, budget: 5 })
        );
    }

    #[test]
    fn replication_monte_carlo_is_deterministic() {
        let mode = ReplicationMode::MonteCarlo { rng: RngSpec::new(4), samples: 50_000 };
        let g = ValueFunction::Ces(2.0);
        let a = replication_estimate(&g, &coin(2.0), 3, mode).unwrap();
        let b = replication_estimate(&g, &coin(2.0), 3, mode).unwrap();
        assert_eq!(a, b);
        let exact = replication_score(&g, &coin(2.0), 3, EXACT).unwrap();
        assert!((a.value - exact).abs() <= 4.0 * a.std_error);
    }

    #[test]
    fn table_shapes() {
        let s = Scenario::single_project(vec![coin(2.0), coin(4.0)], ValueFunction::BestShot, 2).unwrap();
        let t = build_score_table(&s, ScoreKind::Replication, 2).unwrap();
        for i in 0..2 {
            for r in 1..=2 {
                let direct = replication_score(&ValueFunction::BestShot, s.dist(i, 0), r, EXACT).unwrap();
                assert_eq!(t.get(i, 0, r).unwrap(), direct);
            }
        }
        let mean = build_score_table(&s, ScoreKind::Mean, 2).unwrap();
        assert_eq!(mean.get(1, 0, 1).unwrap(), mean.get(1, 0, 2).unwrap());
        assert!(matches!(t.get(0, 0, 3), Err(Error::MissingScore { .. })));
        assert!(build_score_table(&s, ScoreKind::Mean, 3).is_err());
    }

    #[test]
    fn table_falls_back_to_monte_carlo() {
        let d = Distribution::new([(0.0, 0.5), (1.0, 0.25), (2.0, 0.25)]).unwrap();
        let s = Scenario::single_project(vec![d; 2], ValueFunction::Ces(2.0), 2).unwrap();
        let opts = TableOptions { budget: 3, monte_carlo: Some(RngSpec::new(1)) };
        let t = build_score_table_with(&s, ScoreKind::Replication, 2, &opts).unwrap();
        let e = t.entry(0, 0, 2).unwrap();
        assert_eq!(e.method, UtilityMethod::MonteCarlo);
        assert!(e.std_error <= MC_RELATIVE_ERROR * e.score);
        assert_eq!(t.entry(0, 0, 1).unwrap().method, UtilityMethod::Exact);
        let strict = TableOptions { budget: 3, monte_carlo: None };
        let err = build_score_table_with(&s, ScoreKind::Replication, 2, &strict).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn kind_tags_round_trip() {
        for k in [ScoreKind::Mean, ScoreKind::Replication, ScoreKind::Quantile(0.75)] {
            assert_eq!(k.to_string().parse::<ScoreKind>().unwrap(), k);
        }
        assert!("quantile:1".parse::<ScoreKind>().is_err());
        assert!("median".parse::<ScoreKind>().is_err());
    }

    #[test]
    fn csv_export() {
        let s = Scenario::single_project(vec![coin(2.0)], ValueFunction::BestShot, 1).unwrap();
        let t = build_score_table(&s, ScoreKind::Mean, 1).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "agent,project,r,score,method,std_error\n0,0,1,1,exact,0\n");
    }
}
