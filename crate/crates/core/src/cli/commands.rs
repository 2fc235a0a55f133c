use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::ratings::{ratings_scenario, read_ratings};
use super::scenario_file::ScenarioFile;
use super::suites::{run_suite, Suite};
use super::{
    budget_from_env, AssignArgs, CheckArgs, CliError, Command, ExperimentArgs, IngestArgs,
    SelectArgs, WorstcaseArgs,
};
use crate::adversarial::{validate, Generator, GENERATOR_NAMES};
use crate::error::{Error, Result};
use crate::model::{ProjectId, RngSpec, Scenario};
use crate::optimize::{
    approximation_report, brute_force_single, brute_force_welfare, greedy_topk, greedy_welfare,
    ratio, Guarantee, TieBreak,
};
use crate::production::ValueFunction;
use crate::testscores::{build_score_table_with, ScoreKind, TableOptions};
use crate::utility::EvalOptions;

/// Monte Carlo samples for objectives too large to enumerate.
const OBJECTIVE_SAMPLES: u64 = 1 << 20;

pub(super) fn dispatch(command: Command) -> std::result::Result<(), CliError> {
    match command {
        Command::Select(a) => select(a),
        Command::Assign(a) => assign(a),
        Command::Check(a) => check(a),
        Command::Ingest(a) => ingest(a),
        Command::Experiment(a) => experiment(a),
        Command::Worstcase(a) => worstcase(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = File::create(path)
                .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
            f.write_all(text.as_bytes())
                .and_then(|_| f.write_all(b"\n"))
                .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::validation(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn eval_options(budget: u64, seed: u64) -> EvalOptions {
    EvalOptions {
        budget,
        monte_carlo: Some((RngSpec::new(seed).derive(1), OBJECTIVE_SAMPLES)),
    }
}

fn table_options(budget: u64, seed: u64) -> TableOptions {
    TableOptions {
        budget,
        monte_carlo: Some(RngSpec::new(seed)),
    }
}

fn resolve_project(file: &ScenarioFile, project: &str) -> std::result::Result<ProjectId, CliError> {
    if let Some(j) = file.projects.iter().position(|p| p.name == project) {
        return Ok(j);
    }
    match project.parse::<usize>() {
        Ok(j) if j < file.projects.len() => Ok(j),
        _ => Err(CliError::validation(format!("no project {project:?} in scenario"))),
    }
}

/// Project `j` alone with team size `k`.
fn single_project_view(scn: &Scenario, j: ProjectId, k: usize) -> Result<Scenario> {
    let dists = scn.agents().map(|i| scn.dist(i, j).clone()).collect();
    Scenario::single_project(dists, *scn.value_fn(j), k)
}

/// The guarantee a score kind carries on a value function, if any.
fn select_guarantee(kind: ScoreKind, g: &ValueFunction, k: usize) -> Option<Guarantee> {
    match (kind, g) {
        (ScoreKind::Replication, g) if g.is_bsp() => Some(Guarantee::SingleProject),
        (ScoreKind::Mean, ValueFunction::Ces(r)) => Some(Guarantee::Custom((k as f64).powf(1.0 / r - 1.0))),
        _ => None,
    }
}

fn select(args: SelectArgs) -> std::result::Result<(), CliError> {
    let budget = budget_from_env()?;
    let kind: ScoreKind = args
        .scores
        .parse()
        .map_err(|e: Error| CliError::usage(e.to_string()))?;
    let file = ScenarioFile::read(&args.scenario)?;
    let scn = file.to_scenario()?;
    let j = resolve_project(&file, &args.project)?;
    let k = args.k.unwrap_or(scn.cardinality(j));
    if k == 0 || k > scn.n_agents() {
        return Err(CliError::validation(format!(
            "k = {k} outside 1..={} agents",
            scn.n_agents()
        )));
    }
    let view = single_project_view(&scn, j, k)?;
    let max_r = if kind == ScoreKind::Replication { k } else { 1 };
    let table = build_score_table_with(&view, kind, max_r, &table_options(budget, args.seed))?;
    let mut result = greedy_topk(&view, 0, k, &table, &eval_options(budget, args.seed))?;
    let mut report = json!({
        "project": file.projects[j].name,
        "value_fn": view.value_fn(0),
        "k": k,
        "scores": kind.to_string(),
        "scores_exact": table.is_exact(),
        "selected": result.selected(0).iter().map(|&i| &file.agents[i]).collect::<Vec<_>>(),
    });
    if args.oracle {
        let oracle = brute_force_single(&view, 0, k, &EvalOptions::exact(budget))?;
        let r = ratio(result.total, oracle.total);
        result.ratio_vs_opt = Some(r);
        report["ratio"] = json!(r);
        if let Some(guarantee) = select_guarantee(kind, view.value_fn(0), k) {
            let approx = approximation_report(&result, &oracle, guarantee);
            report["bound"] = json!(approx.bound);
            report["satisfied"] = json!(approx.satisfied);
        }
        report["oracle"] = json!(oracle);
    }
    report["result"] = json!(result);
    emit(args.out.as_deref(), &to_json(&report))
}

fn assign(args: AssignArgs) -> std::result::Result<(), CliError> {
    let budget = budget_from_env()?;
    let file = ScenarioFile::read(&args.scenario)?;
    let scn = file.to_scenario()?;
    let table = build_score_table_with(
        &scn,
        ScoreKind::Replication,
        scn.max_cardinality(),
        &table_options(budget, args.seed),
    )?;
    let tie = match args.random_ties {
        Some(seed) => TieBreak::Random(RngSpec::new(seed)),
        None => TieBreak::Lexicographic,
    };
    let mut result = greedy_welfare(&scn, &table, tie, &eval_options(budget, args.seed))?;
    let names: BTreeMap<&str, Vec<&str>> = file
        .projects
        .iter()
        .enumerate()
        .map(|(j, p)| {
            (
                p.name.as_str(),
                result.assignment.sets[j].iter().map(|&i| file.agents[i].as_str()).collect(),
            )
        })
        .collect();
    let mut report = json!({
        "assignment": names,
        "welfare": result.total,
        "scores_exact": table.is_exact(),
    });
    if args.oracle {
        let oracle = brute_force_welfare(&scn, &EvalOptions::exact(budget))?;
        let approx = approximation_report(
            &result,
            &oracle,
            Guarantee::Welfare { k: scn.max_cardinality() },
        );
        result.ratio_vs_opt = Some(approx.ratio);
        report["ratio"] = json!(approx.ratio);
        report["bound"] = json!(approx.bound);
        report["satisfied"] = json!(approx.satisfied);
        report["oracle"] = json!(oracle);
    }
    report["result"] = json!(result);
    emit(args.out.as_deref(), &to_json(&report))
}

fn check(args: CheckArgs) -> std::result::Result<(), CliError> {
    let budget = budget_from_env()?;
    let suite: Suite = args
        .suite
        .parse()
        .map_err(|e: Error| CliError::usage(e.to_string()))?;
    let trials = args.trials.unwrap_or(suite.default_trials());
    let report = run_suite(suite, args.seed, trials, budget)?;
    emit(args.out.as_deref(), &to_json(&report))?;
    if report.pass {
        eprintln!("{suite}: PASS ({} checks)", report.checked);
        Ok(())
    } else {
        Err(CliError::property(format!(
            "{suite}: {} failure(s)\n{}",
            report.failures.len(),
            to_json(&report.failures)
        )))
    }
}

fn ingest(args: IngestArgs) -> std::result::Result<(), CliError> {
    let input = File::open(&args.ratings)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", args.ratings.display())))?;
    let ratings = read_ratings(input)?;
    let file = ratings_scenario(&ratings, args.min_solutions, args.k)?;
    eprintln!(
        "kept {} of {} coders with at least {} ratings ({} rows)",
        file.agents.len(),
        ratings.by_coder.len(),
        args.min_solutions,
        ratings.rows
    );
    emit(args.out.as_deref(), &file.to_json())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub k: usize,
    pub trial: usize,
    pub greedy: f64,
    pub opt: f64,
    pub ratio: f64,
}

/// For every `k` and trial: sample `n` agents without replacement from
/// stream `trial` of `seed`, select by replication scores and compare with
/// the exact optimum. Rows are ordered by `k`, then trial.
pub fn experiment_rows(
    scn: &Scenario,
    project: ProjectId,
    n: usize,
    ks: &[usize],
    trials: usize,
    seed: u64,
    budget: u64,
) -> Result<Vec<ExperimentRow>> {
    let total = scn.n_agents();
    if n == 0 || n > total {
        return Err(Error::InvalidArgument(format!("n = {n} outside 1..={total} agents")));
    }
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let spec = RngSpec::new(seed);
    let opts = EvalOptions::exact(budget);
    let jobs: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..trials).map(move |t| (k, t)))
        .collect();
    jobs.par_iter()
        .map(|&(k, trial)| {
            let mut rng = spec.stream(trial as u64);
            let mut sample = rand::seq::index::sample(&mut rng, total, n).into_vec();
            sample.sort_unstable();
            let dists = sample.iter().map(|&i| scn.dist(i, project).clone()).collect();
            let sub = Scenario::single_project(dists, *scn.value_fn(project), k)?;
            let table = build_score_table_with(
                &sub,
                ScoreKind::Replication,
                k,
                &TableOptions { budget, monte_carlo: None },
            )?;
            let greedy = greedy_topk(&sub, 0, k, &table, &opts)?.total;
            let opt = brute_force_single(&sub, 0, k, &opts)?.total;
            Ok(ExperimentRow { k, trial, greedy, opt, ratio: ratio(greedy, opt) })
        })
        .collect()
}

fn experiment(args: ExperimentArgs) -> std::result::Result<(), CliError> {
    let budget = budget_from_env()?;
    let file = ScenarioFile::read(&args.scenario)?;
    let scn = file.to_scenario()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be positive"));
        }
        builder = builder.num_threads(jobs);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| experiment_rows(&scn, 0, args.n, &args.k, args.trials, args.seed, budget))?;
    let mut csv = String::from("k,trial,greedy,opt,ratio\n");
    for &k in &args.k {
        let group: Vec<&ExperimentRow> = rows.iter().filter(|r| r.k == k).collect();
        for r in &group {
            csv.push_str(&format!("{},{},{},{},{}\n", r.k, r.trial, r.greedy, r.opt, r.ratio));
        }
        let count = group.len().max(1) as f64;
        let mean = |f: fn(&ExperimentRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / count;
        let min_ratio = group.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let mean_ratio = mean(|r| r.ratio);
        csv.push_str(&format!(
            "{k},mean,{},{},{}\n",
            mean(|r| r.greedy),
            mean(|r| r.opt),
            mean_ratio
        ));
        csv.push_str(&format!("{k},min,,,{min_ratio}\n"));
        eprintln!("k = {k}: mean ratio {mean_ratio:.4}, min ratio {min_ratio:.4} over {} trials", group.len());
    }
    match args.out.as_deref() {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn worstcase(args: WorstcaseArgs) -> std::result::Result<(), CliError> {
    if Generator::param_names(&args.name).is_none() {
        return Err(CliError::usage(format!(
            "unknown generator {:?}; available generators: {}",
            args.name,
            GENERATOR_NAMES.join(", ")
        )));
    }
    let params: BTreeMap<String, f64> = [
        ("k", args.k),
        ("a", args.a),
        ("p", args.p),
        ("r", args.r),
        ("eps", args.eps),
        ("theta", args.theta),
        ("b", args.b),
        ("c", args.c),
        ("n", args.n),
    ]
    .into_iter()
    .filter_map(|(key, v)| v.map(|v| (key.to_string(), v)))
    .collect();
    let generator = Generator::from_params(&args.name, &params).map_err(|e| {
        CliError::usage(format!(
            "{e}\nusage: testscore worstcase {} {}",
            args.name,
            Generator::param_names(&args.name)
                .unwrap_or(&[])
                .iter()
                .map(|p| format!("--{p} <value>"))
                .collect::<Vec<_>>()
                .join(" ")
        ))
    })?;
    let instance = generator.generate()?;
    let scenario_file = ScenarioFile::from_scenario(&instance.scenario, None, None);
    let mut report = json!({
        "generator": generator,
        "description": instance.description,
        "expected": instance.expected,
        "reference": instance.reference,
    });
    match args.out.as_deref() {
        Some(path) => emit(Some(path), &scenario_file.to_json())?,
        None => report["scenario"] = json!(scenario_file),
    }
    let mut pass = true;
    if args.run {
        let validation = validate(&instance, &EvalOptions::exact(budget_from_env()?))?;
        pass = validation.pass;
        report["validation"] = json!(validation);
    }
    emit(None, &to_json(&report))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::property(format!("{}: expected quantities not reproduced", generator.name())))
    }
}
