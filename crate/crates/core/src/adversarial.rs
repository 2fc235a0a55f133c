//! Worst-case constructions for the score-based algorithms, each paired with
//! the quantities it is expected to exhibit.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentId, Distribution, Scenario};
use crate::optimize::{
    baseline_max_sketch_welfare, baseline_min_sketch_welfare, brute_force_single,
    brute_force_welfare, greedy_topk, greedy_welfare, ratio, TieBreak,
};
use crate::production::{ConcaveFn, ValueFunction};
use crate::testscores::{
    build_score_table_with, quantile_level_for, replication_score, tail_average, ReplicationMode,
    ScoreKind, ScoreTable, TableOptions,
};
use crate::utility::{exact_utility, EvalOptions};

/// Relative tolerance for validating expected quantities.
pub const EXPECTATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectation {
    pub value: f64,
    pub relation: Relation,
}

impl Expectation {
    pub fn equal(value: f64) -> Self {
        Expectation { value, relation: Relation::Equal }
    }

    pub fn at_most(value: f64) -> Self {
        Expectation { value, relation: Relation::AtMost }
    }

    pub fn at_least(value: f64) -> Self {
        Expectation { value, relation: Relation::AtLeast }
    }

    /// Whether `measured` meets the expectation within [`EXPECTATION_TOL`] relative.
    pub fn holds(&self, measured: f64) -> bool {
        let slack = EXPECTATION_TOL * self.value.abs().max(1e-9);
        match self.relation {
            Relation::Equal => (measured - self.value).abs() <= slack,
            Relation::AtMost => measured <= self.value + slack,
            Relation::AtLeast => measured >= self.value - slack,
        }
    }
}

/// A named construction with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Generator {
    /// Best-shot team where mean scores prefer safe agents over long shots.
    MeanBestshot { k: usize, a: f64, p: f64 },
    /// Additive team where quantile scores prefer long shots over safe agents.
    QuantileLinear { k: usize, a: f64, p: f64 },
    /// CES team on which mean scores reach their worst-case guarantee.
    CesMean { k: usize, r: f64, a: f64, eps: f64 },
    /// Four-family CES instance on which quantile scores fail for small `r`.
    QuantileCes { k: usize, r: f64, theta: f64, a: f64, b: f64, c: f64, n: usize },
    /// `r` best-shot projects where the min sketch stacks every heavy agent together.
    WelfareEx1 { r: usize },
    /// Additive project plus scaled best-shot singletons where the max sketch spreads agents.
    WelfareEx2 { r: usize },
}

/// Margin by which the deterministic agents of `ces_mean` beat the mean of the risky ones.
pub const DEFAULT_EPS: f64 = 0.01;

/// Generator names accepted by [`Generator::from_params`].
pub const GENERATOR_NAMES: [&str; 6] = [
    "mean_bestshot",
    "quantile_linear",
    "ces_mean",
    "quantile_ces",
    "welfare_ex1",
    "welfare_ex2",
];

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::MeanBestshot { .. } => "mean_bestshot",
            Generator::QuantileLinear { .. } => "quantile_linear",
            Generator::CesMean { .. } => "ces_mean",
            Generator::QuantileCes { .. } => "quantile_ces",
            Generator::WelfareEx1 { .. } => "welfare_ex1",
            Generator::WelfareEx2 { .. } => "welfare_ex2",
        }
    }

    /// Parameter names of a generator. All are required except `eps`,
    /// which defaults to [`DEFAULT_EPS`].
    pub fn param_names(name: &str) -> Option<&'static [&'static str]> {
        Some(match name {
            "mean_bestshot" | "quantile_linear" => &["k", "a", "p"],
            "ces_mean" => &["k", "r", "a", "eps"],
            "quantile_ces" => &["k", "r", "theta", "a", "b", "c", "n"],
            "welfare_ex1" | "welfare_ex2" => &["r"],
            _ => return None,
        })
    }

    /// Builds a generator from a name and its parameters.
    pub fn from_params(name: &str, params: &BTreeMap<String, f64>) -> Result<Generator> {
        let names = Self::param_names(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown generator {name:?}; available: {}",
                GENERATOR_NAMES.join(", ")
            ))
        })?;
        let get = |key: &str| -> Result<f64> {
            params
                .get(key)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("{name} needs --{key}")))
        };
        let count = |key: &str| -> Result<usize> {
            let v = get(key)?;
            if v < 0.0 || v.fract() != 0.0 || v > 1e9 {
                return Err(Error::InvalidArgument(format!("--{key} must be a non-negative integer")));
            }
            Ok(v as usize)
        };
        for key in params.keys() {
            if !names.contains(&key.as_str()) {
                return Err(Error::InvalidArgument(format!("{name} does not take --{key}")));
            }
        }
        Ok(match name {
            "mean_bestshot" => Generator::MeanBestshot { k: count("k")?, a: get("a")?, p: get("p")? },
            "quantile_linear" => Generator::QuantileLinear { k: count("k")?, a: get("a")?, p: get("p")? },
            "ces_mean" => Generator::CesMean {
                k: count("k")?,
                r: get("r")?,
                a: get("a")?,
                eps: params.get("eps").copied().unwrap_or(DEFAULT_EPS),
            },
            "quantile_ces" => Generator::QuantileCes {
                k: count("k")?,
                r: get("r")?,
                theta: get("theta")?,
                a: get("a")?,
                b: get("b")?,
                c: get("c")?,
                n: count("n")?,
            },
            "welfare_ex1" => Generator::WelfareEx1 { r: count("r")? },
            _ => Generator::WelfareEx2 { r: count("r")? },
        })
    }

    pub fn generate(&self) -> Result<AdversarialInstance> {
        match *self {
            Generator::MeanBestshot { k, a, p } => gen_mean_fails_bestshot(k, a, p),
            Generator::QuantileLinear { k, a, p } => gen_quantile_fails_linear(k, a, p),
            Generator::CesMean { k, r, a, eps } => gen_ces_mean_tightness(k, r, a, eps),
            Generator::QuantileCes { k, r, theta, a, b, c, n } => gen_quantile_ces(k, r, theta, a, b, c, n),
            Generator::WelfareEx1 { r } => gen_welfare_example1(r),
            Generator::WelfareEx2 { r } => gen_welfare_example2(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialInstance {
    pub generator: Generator,
    pub scenario: Scenario,
    /// Quantities the artifact's evaluators must reproduce.
    pub expected: BTreeMap<String, Expectation>,
    /// Analytic limits recorded for reference only; not measurable at finite size.
    pub reference: BTreeMap<String, f64>,
    pub description: &'static str,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn point(v: f64) -> Distribution {
    Distribution::point(v).expect("non-negative finite value")
}

fn expect(pairs: impl IntoIterator<Item = (&'static str, Expectation)>) -> BTreeMap<String, Expectation> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `k` deterministic value-1 agents (ids `0..k`) and `k` risky agents
/// `{0 w.p. 1-p, a w.p. p}` (ids `k..2k`) under best-shot with cardinality `k`.
pub fn gen_mean_fails_bestshot(k: usize, a: f64, p: f64) -> Result<AdversarialInstance> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(invalid("risky value a must exceed 1"));
    }
    if !((0.0..1.0).contains(&p) && a * p < 1.0) {
        return Err(invalid("need 0 <= p < 1 and a p < 1"));
    }
    let risky = Distribution::two_point(0.0, a, p)?;
    let mut dists = vec![point(1.0); k];
    dists.extend(std::iter::repeat_n(risky, k));
    let scenario = Scenario::single_project(dists, ValueFunction::BestShot, k)?;
    let q = 1.0 - p;
    let all_risky = a * (1.0 - q.powi(k as i32));
    // one safe agent as a floor plus k-1 long shots
    let opt = a * (1.0 - q.powi(k as i32 - 1)) + q.powi(k as i32 - 1);
    let mut expected = expect([
        ("mean_greedy", Expectation::equal(1.0)),
        ("opt", Expectation::equal(opt)),
        ("replication_greedy", Expectation::equal(if all_risky > 1.0 { all_risky } else { 1.0 })),
    ]);
    if p > 0.0 {
        expected.insert(
            "mean_greedy_ratio".into(),
            Expectation::at_most(1.0 / all_risky),
        );
    } else {
        expected.insert("mean_greedy_ratio".into(), Expectation::equal(1.0));
    }
    Ok(AdversarialInstance {
        generator: Generator::MeanBestshot { k, a, p },
        scenario,
        expected,
        reference: BTreeMap::new(),
        description: "best-shot team: mean scores pick safe agents and lose the long shots",
    })
}

/// `k` deterministic value-1 agents (ids `0..k`) and `k` risky agents
/// `{0 w.p. 1-p, a w.p. p}` (ids `k..2k`), additive utility, cardinality `k`,
/// quantile level `1 - 1/k`.
pub fn gen_quantile_fails_linear(k: usize, a: f64, p: f64) -> Result<AdversarialInstance> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(invalid("risky value a must exceed 1"));
    }
    if !(p > 1.0 / k as f64 && p <= 1.0) {
        return Err(invalid("need 1/k < p <= 1"));
    }
    let risky = Distribution::two_point(0.0, a, p)?;
    let mut dists = vec![point(1.0); k];
    dists.extend(std::iter::repeat_n(risky, k));
    let scenario = Scenario::single_project(dists, ValueFunction::Ces(1.0), k)?;
    let kf = k as f64;
    let best_mean = (a * p).max(1.0);
    Ok(AdversarialInstance {
        generator: Generator::QuantileLinear { k, a, p },
        scenario,
        expected: expect([
            ("quantile_score_risky", Expectation::equal(a)),
            ("quantile_score_deterministic", Expectation::equal(1.0)),
            ("quantile_greedy", Expectation::equal(kf * a * p)),
            ("opt", Expectation::equal(kf * best_mean)),
            ("quantile_greedy_ratio", Expectation::equal(a * p / best_mean)),
            ("mean_greedy_ratio", Expectation::equal(1.0)),
        ]),
        reference: BTreeMap::new(),
        description: "additive team: quantile scores pick long shots over safe agents",
    })
}

/// `k` point masses `1 + eps` (set M, ids `0..k`) and `k` agents
/// `{a w.p. 1/a, 0 otherwise}` (set R, ids `k..2k`) under CES `r`.
pub fn gen_ces_mean_tightness(k: usize, r: f64, a: f64, eps: f64) -> Result<AdversarialInstance> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid("CES needs finite r >= 1"));
    }
    if !(a >= 1.0 && a.is_finite()) {
        return Err(invalid("a must be at least 1"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps must be positive"));
    }
    let risky = Distribution::two_point(0.0, a, 1.0 / a)?;
    let mut dists = vec![point(1.0 + eps); k];
    dists.extend(std::iter::repeat_n(risky, k));
    let scenario = Scenario::single_project(dists, ValueFunction::Ces(r), k)?;
    let kf = k as f64;
    let u_m = kf.powf(1.0 / r) * (1.0 + eps);
    let x = kf / a;
    Ok(AdversarialInstance {
        generator: Generator::CesMean { k, r, a, eps },
        scenario,
        expected: expect([
            ("u_m", Expectation::equal(u_m)),
            ("mean_greedy", Expectation::equal(u_m)),
            ("u_r", Expectation::at_least(a * (1.0 - (-x).exp()))),
            ("mean_greedy_ratio", Expectation::at_least(kf.powf(1.0 / r - 1.0))),
            (
                "mean_greedy_ratio_upper",
                Expectation::at_most((1.0 + eps) * kf.powf(1.0 / r - 1.0) * x / -(-x).exp_m1()),
            ),
        ]),
        reference: BTreeMap::new(),
        description: "CES team on which mean scores meet their worst-case guarantee",
    })
}

/// Four agent families under CES `r` with cardinality `k` and quantile tail
/// mass `θ/k`: point masses `a` (ids `0..k`), `{bθn/k w.p. 1/n}` (ids `k..2k`),
/// `{c w.p. θ/k}` (ids `2k..3k`) and zeros (ids `3k..n`).
pub fn gen_quantile_ces(
    k: usize,
    r: f64,
    theta: f64,
    a: f64,
    b: f64,
    c: f64,
    n: usize,
) -> Result<AdversarialInstance> {
    if k == 0 || n < 3 * k {
        return Err(invalid("need k >= 1 and n >= 3k"));
    }
    if !(r >= 1.0 && r.is_finite()) {
        return Err(invalid("CES needs finite r >= 1"));
    }
    let kf = k as f64;
    let nf = n as f64;
    if !(theta > 0.0 && theta < kf) {
        return Err(invalid("need 0 < theta < k"));
    }
    if [a, b, c].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("a, b, c must be non-negative"));
    }
    let mass = theta / kf;
    let fam2 = Distribution::two_point(0.0, b * theta * nf / kf, 1.0 / nf)?;
    let fam3 = Distribution::two_point(0.0, c, mass)?;
    let mut dists = vec![point(a); k];
    dists.extend(std::iter::repeat_n(fam2.clone(), k));
    dists.extend(std::iter::repeat_n(fam3, k));
    dists.extend(std::iter::repeat_n(point(0.0), n - 3 * k));
    let scenario = Scenario::single_project(dists, ValueFunction::Ces(r), k)?;
    let fam2_quantile = tail_average(&fam2, mass);
    let mut expected = expect([
        ("quantile_score_family1", Expectation::equal(a)),
        ("quantile_score_family2", Expectation::equal(fam2_quantile)),
        ("quantile_score_family3", Expectation::equal(c)),
        ("replication_score_family1", Expectation::equal(a * kf.powf(1.0 / r))),
        ("replication_score_family3", Expectation::at_most(c * theta.powf(1.0 / r))),
        ("u_family1", Expectation::equal(a * kf.powf(1.0 / r))),
    ]);
    if c > a && c > fam2_quantile {
        expected.insert("quantile_greedy_selects_family3".into(), Expectation::equal(1.0));
        if a > 0.0 {
            expected.insert(
                "quantile_greedy_over_family1".into(),
                Expectation::at_most(c / a * mass.powf(1.0 / r)),
            );
        }
    }
    let mut reference = BTreeMap::new();
    reference.insert("quantile_score_family2_limit".into(), b);
    reference.insert("replication_score_family2_limit".into(), b * theta);
    Ok(AdversarialInstance {
        generator: Generator::QuantileCes { k, r, theta, a, b, c, n },
        scenario,
        expected,
        reference,
        description: "four-family CES instance on which quantile scores pick a weak team",
    })
}

/// `r²` agents, `r` best-shot projects with `k_j = r`; agents `0..r` are
/// deterministic value 1, the rest are zero.
pub fn gen_welfare_example1(r: usize) -> Result<AdversarialInstance> {
    if r < 2 {
        return Err(invalid("r must be at least 2"));
    }
    let dists = (0..r * r)
        .map(|i| vec![point(if i < r { 1.0 } else { 0.0 }); r])
        .collect();
    let scenario = Scenario::new(dists, vec![ValueFunction::BestShot; r], vec![r; r])?;
    let rf = r as f64;
    Ok(AdversarialInstance {
        generator: Generator::WelfareEx1 { r },
        scenario,
        expected: expect([
            ("opt", Expectation::equal(rf)),
            ("greedy_welfare", Expectation::equal(rf)),
            ("min_sketch_baseline", Expectation::equal(1.0)),
        ]),
        reference: BTreeMap::new(),
        description: "best-shot projects: the min sketch puts every heavy agent on one project",
    })
}

/// `2r` agents and `r + 1` projects: project 0 adds outputs with `k_0 = r`;
/// projects `1..=r` take one agent each and pay `max x / √r`, realized by
/// scaling those performances by `1/√r` under best-shot. Agent 0 has value
/// `√r`, agents `1..r` value 1, the rest zero.
pub fn gen_welfare_example2(r: usize) -> Result<AdversarialInstance> {
    if r < 2 {
        return Err(invalid("r must be at least 2"));
    }
    let rf = r as f64;
    let root = rf.sqrt();
    let dists = (0..2 * r)
        .map(|i| {
            let v = match i {
                0 => root,
                i if i < r => 1.0,
                _ => 0.0,
            };
            let mut row = vec![point(v)];
            row.extend(std::iter::repeat_n(point(v / root), r));
            row
        })
        .collect();
    let mut gs = vec![ValueFunction::TotalProduction(ConcaveFn::Identity)];
    gs.extend(std::iter::repeat_n(ValueFunction::BestShot, r));
    let mut ks = vec![r];
    ks.extend(std::iter::repeat_n(1, r));
    let scenario = Scenario::new(dists, gs, ks)?;
    let opt = root + rf - 1.0;
    let mut reference = BTreeMap::new();
    reference.insert("max_sketch_baseline_asymptotic".into(), 2.0 * root);
    Ok(AdversarialInstance {
        generator: Generator::WelfareEx2 { r },
        scenario,
        expected: expect([
            ("opt", Expectation::equal(opt)),
            ("greedy_welfare", Expectation::equal(opt)),
            // heavy agent alone on the additive project, medium agents on singletons
            ("max_sketch_baseline", Expectation::equal(root + (rf - 1.0) / root)),
        ]),
        reference,
        description: "additive project plus scaled singletons: the max sketch spreads the medium agents",
    })
}

fn exact_table(scn: &Scenario, kind: ScoreKind, max_r: usize, opts: &EvalOptions) -> Result<ScoreTable> {
    build_score_table_with(
        scn,
        kind,
        max_r,
        &TableOptions {
            budget: opts.budget,
            monte_carlo: None,
        },
    )
}

/// Evaluates every quantity an instance makes claims about, with the
/// artifact's own exact evaluators.
pub fn measure(inst: &AdversarialInstance, opts: &EvalOptions) -> Result<BTreeMap<String, f64>> {
    let scn = &inst.scenario;
    let mut out = BTreeMap::new();
    let mut put = |key: &str, v: f64| {
        out.insert(key.to_string(), v);
    };
    match inst.generator {
        Generator::MeanBestshot { k, .. } => {
            let mean = greedy_topk(scn, 0, k, &exact_table(scn, ScoreKind::Mean, k, opts)?, opts)?;
            let rep = greedy_topk(scn, 0, k, &exact_table(scn, ScoreKind::Replication, k, opts)?, opts)?;
            let opt = brute_force_single(scn, 0, k, opts)?;
            put("mean_greedy", mean.total);
            put("replication_greedy", rep.total);
            put("opt", opt.total);
            put("mean_greedy_ratio", ratio(mean.total, opt.total));
            put("replication_greedy_ratio", ratio(rep.total, opt.total));
        }
        Generator::QuantileLinear { k, .. } => {
            let level = quantile_level_for(1.0, k);
            let qt = exact_table(scn, ScoreKind::Quantile(level), k, opts)?;
            let q = greedy_topk(scn, 0, k, &qt, opts)?;
            // additive utility: the top-k means are optimal
            let mean = greedy_topk(scn, 0, k, &exact_table(scn, ScoreKind::Mean, k, opts)?, opts)?;
            put("quantile_score_deterministic", qt.get(0, 0, k)?);
            put("quantile_score_risky", qt.get(k, 0, k)?);
            put("quantile_greedy", q.total);
            put("opt", mean.total);
            put("quantile_greedy_ratio", ratio(q.total, mean.total));
            put("mean_greedy_ratio", 1.0);
        }
        Generator::CesMean { k, .. } => {
            let m: Vec<AgentId> = (0..k).collect();
            let r: Vec<AgentId> = (k..2 * k).collect();
            let mean = greedy_topk(scn, 0, k, &exact_table(scn, ScoreKind::Mean, k, opts)?, opts)?;
            let opt = brute_force_single(scn, 0, k, opts)?;
            let ratio = ratio(mean.total, opt.total);
            put("u_m", exact_utility(scn, 0, &m, opts.budget)?.value);
            put("u_r", exact_utility(scn, 0, &r, opts.budget)?.value);
            put("mean_greedy", mean.total);
            put("opt", opt.total);
            put("mean_greedy_ratio", ratio);
            put("mean_greedy_ratio_upper", ratio);
        }
        Generator::QuantileCes { k, theta, .. } => {
            let level = quantile_level_for(theta, k);
            let qt = exact_table(scn, ScoreKind::Quantile(level), k, opts)?;
            let g = scn.value_fn(0);
            let mode = ReplicationMode::Exact { budget: opts.budget };
            for (fam, first) in [(1, 0), (2, k), (3, 2 * k)] {
                put(&format!("quantile_score_family{fam}"), qt.get(first, 0, k)?);
                put(
                    &format!("replication_score_family{fam}"),
                    replication_score(g, scn.dist(first, 0), k, mode)?,
                );
            }
            let fam1: Vec<AgentId> = (0..k).collect();
            let fam3: Vec<AgentId> = (2 * k..3 * k).collect();
            let u1 = exact_utility(scn, 0, &fam1, opts.budget)?.value;
            let q = greedy_topk(scn, 0, k, &qt, opts)?;
            put("u_family1", u1);
            put("quantile_greedy", q.total);
            put("quantile_greedy_selects_family3", f64::from(u8::from(q.selected(0) == fam3)));
            put("quantile_greedy_over_family1", ratio(q.total, u1));
        }
        Generator::WelfareEx1 { r } => {
            let t = exact_table(scn, ScoreKind::Replication, r, opts)?;
            put("greedy_welfare", greedy_welfare(scn, &t, TieBreak::Lexicographic, opts)?.total);
            put("opt", brute_force_welfare(scn, opts)?.total);
            put("min_sketch_baseline", baseline_min_sketch_welfare(scn, &t, opts)?.total);
        }
        Generator::WelfareEx2 { r } => {
            let t = exact_table(scn, ScoreKind::Replication, r, opts)?;
            put("greedy_welfare", greedy_welfare(scn, &t, TieBreak::Lexicographic, opts)?.total);
            put("opt", brute_force_welfare(scn, opts)?.total);
            put("max_sketch_baseline", baseline_max_sketch_welfare(scn, &t, opts)?.total);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub quantity: String,
    pub expected: f64,
    pub relation: Relation,
    pub measured: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub generator: Generator,
    pub description: &'static str,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
    pub measured: BTreeMap<String, f64>,
    pub reference: BTreeMap<String, f64>,
}

/// Measures the instance and compares each expected quantity.
pub fn validate(inst: &AdversarialInstance, opts: &EvalOptions) -> Result<ValidationReport> {
    let measured = measure(inst, opts)?;
    let checks: Vec<CheckOutcome> = inst
        .expected
        .iter()
        .map(|(key, exp)| {
            let m = measured.get(key).copied().unwrap_or(f64::NAN);
            CheckOutcome {
                quantity: key.clone(),
                expected: exp.value,
                relation: exp.relation,
                measured: m,
                pass: exp.holds(m),
            }
        })
        .collect();
    Ok(ValidationReport {
        generator: inst.generator,
        description: inst.description,
        pass: checks.iter().all(|c| c.pass),
        checks,
        measured,
        reference: inst.reference.clone(),
    })
}

/// Random single-project CES instance for the quantile-score sandwich:
/// `n = k + 1` agents with supports of at most two values.
pub fn random_quantile_ces_instance(seed: u64, index: u64, k: usize, r: f64) -> Result<Scenario> {
    let mut rng = crate::model::RngSpec::new(seed).stream(index);
    let dists = (0..=k)
        .map(|_| crate::model::random::random_distribution(&mut rng, 2))
        .collect();
    Scenario::single_project(dists, ValueFunction::Ces(r), k)
}

/// Lower factor of the quantile-score sandwich for CES with large `r`.
pub const QUANTILE_SANDWICH_LOWER: f64 = 1.0 - 1.0 / E;

/// Upper factor `1 + k^(1/r)` of the quantile-score sandwich.
pub fn quantile_sandwich_upper(k: usize, r: f64) -> f64 {
    1.0 + (k as f64).powf(1.0 / r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expectation_relations() {
        assert!(Expectation::equal(2.0).holds(2.0 + 1e-7));
        assert!(!Expectation::equal(2.0).holds(2.01));
        assert!(Expectation::at_most(1.0).holds(0.5));
        assert!(!Expectation::at_least(1.0).holds(0.5));
    }

    #[test]
    fn parameter_validation() {
        assert!(gen_mean_fails_bestshot(4, 10.0, 0.2).is_err());
        assert!(gen_quantile_fails_linear(10, 1.5, 0.05).is_err());
        assert!(gen_quantile_ces(4, 2.0, 1.0, 1.0, 1.0, 2.0, 11).is_err());
        assert!(gen_welfare_example1(1).is_err());
        assert!(gen_ces_mean_tightness(4, 0.5, 400.0, 0.01).is_err());
    }

    #[test]
    fn from_params_round_trip() {
        let params: BTreeMap<String, f64> = [("r".to_string(), 3.0)].into();
        let g = Generator::from_params("welfare_ex1", &params).unwrap();
        assert_eq!(g, Generator::WelfareEx1 { r: 3 });
        assert!(Generator::from_params("nope", &params).is_err());
        assert!(Generator::from_params("ces_mean", &params).is_err());
    }

    #[test]
    fn small_instances_validate() {
        let opts = EvalOptions::default();
        for g in [
            Generator::MeanBestshot { k: 4, a: 10.0, p: 0.09 },
            Generator::QuantileLinear { k: 5, a: 1.5, p: 0.3 },
            Generator::CesMean { k: 3, r: 2.0, a: 50.0, eps: 0.01 },
            Generator::QuantileCes { k: 4, r: 2.0, theta: 1.0, a: 1.0, b: 1.0, c: 2.0, n: 16 },
            Generator::WelfareEx1 { r: 2 },
            Generator::WelfareEx2 { r: 2 },
        ] {
            let report = validate(&g.generate().unwrap(), &opts).unwrap();
            assert!(report.pass, "{report:#?}");
        }
    }
}
