use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use testscore::cli::ScenarioFile;
use testscore::model::random::standard_single_project;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_testscore"));
    cmd.env_remove("TESTSCORE_BUDGET");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Loads a shipped schema with its file references inlined.
fn schema(name: &str) -> jsonschema::Validator {
    fn load(name: &str) -> Value {
        let text = fs::read_to_string(repo_file("schemas").join(name)).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        inline(&mut v);
        v
    }
    fn inline(v: &mut Value) {
        match v {
            Value::Object(map) => {
                if let Some(Value::String(target)) = map.get("$ref") {
                    if target.ends_with(".schema.json") {
                        let mut sub = load(target);
                        sub.as_object_mut().unwrap().remove("$schema");
                        *v = sub;
                        return;
                    }
                }
                map.values_mut().for_each(inline);
            }
            Value::Array(items) => items.iter_mut().for_each(inline),
            _ => {}
        }
    }
    jsonschema::validator_for(&load(name)).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let v = schema(schema_name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn write_scenario(dir: &TempDir, name: &str, file: &ScenarioFile) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, file.to_json()).unwrap();
    path
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["select", "--help"])), 0);
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
}

#[test]
fn select_on_bundled_ces_file_beats_half() {
    let path = repo_file("data/ces_tightness.json");
    let out = run(&["select", path_str(&path), "--k", "4", "--oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_valid("select_report.schema.json", &report);
    assert!(report["ratio"].as_f64().unwrap() >= 0.5, "{report}");
    assert_eq!(report["selected"].as_array().unwrap().len(), 4);
}

#[test]
fn select_rejects_k_above_n() {
    let path = repo_file("data/ces_tightness.json");
    let out = run(&["select", path_str(&path), "--k", "9"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn select_replication_meets_constant_bound() {
    let dir = TempDir::new().unwrap();
    for idx in 0..10 {
        let scn = standard_single_project(3, idx);
        let path = write_scenario(&dir, &format!("s{idx}.json"), &ScenarioFile::from_scenario(&scn, None, None));
        let out = run(&["select", path_str(&path), "--scores", "replication", "--oracle"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        assert_valid("select_report.schema.json", &report);
        assert!(report["ratio"].as_f64().unwrap() >= 0.1364, "{report}");
        assert_eq!(report["satisfied"], Value::Bool(true));
    }
}

#[test]
fn select_accepts_mean_and_quantile_scores() {
    let path = repo_file("data/ces_tightness.json");
    for scores in ["mean", "quantile:0.5"] {
        let out = run(&["select", path_str(&path), "--scores", scores]);
        assert_eq!(code(&out), 0, "{scores}: {}", String::from_utf8_lossy(&out.stderr));
        assert_valid("select_report.schema.json", &stdout_json(&out));
    }
    assert_eq!(code(&run(&["select", path_str(&path), "--scores", "median"])), 1);
}

#[test]
fn assign_on_exported_welfare_example() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ex1.json");
    let out = run(&["worstcase", "welfare_ex1", "--r", "3", "--out", path_str(&path)]);
    assert_eq!(code(&out), 0);
    let exported: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_valid("scenario.schema.json", &exported);

    let out = run(&["assign", path_str(&path), "--oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_valid("assign_report.schema.json", &report);
    assert!((report["welfare"].as_f64().unwrap() - 3.0).abs() < 1e-9, "{report}");
    assert!((report["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{report}");

    let a = run(&["assign", path_str(&path), "--random-ties", "7"]);
    let b = run(&["assign", path_str(&path), "--random-ties", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn assign_rejects_oversubscribed_projects() {
    let dir = TempDir::new().unwrap();
    let scn = standard_single_project(3, 0);
    let mut file = ScenarioFile::from_scenario(&scn, None, None);
    file.projects[0].k = file.agents.len() + 1;
    let path = write_scenario(&dir, "over.json", &file);
    assert_eq!(code(&run(&["assign", path_str(&path)])), 2);
}

#[test]
fn malformed_scenario_files_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"agents": ["a"], "projects": [], "distributions": [], "extra": 1}"#).unwrap();
    assert_eq!(code(&run(&["select", path_str(&bad)])), 2);
    fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&run(&["select", path_str(&bad)])), 2);
    assert_eq!(code(&run(&["select", path_str(&dir.path().join("missing.json"))])), 2);
}

#[test]
fn check_suites_pass() {
    for (suite, trials) in [("submodularity", "5"), ("bsp", "200"), ("sketch", "20"), ("goodness", "20"), ("adversarial", "1")] {
        let out = run(&["check", "--suite", suite, "--seed", "3", "--trials", trials]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stdout));
        let report = stdout_json(&out);
        assert_valid("check_report.schema.json", &report);
        assert_eq!(report["pass"], Value::Bool(true));
    }
    assert_eq!(code(&run(&["check", "--suite", "everything"])), 1);
}

#[test]
fn budget_override_exits_three() {
    let path = repo_file("data/ces_tightness.json");
    let out = bin()
        .args(["select", path_str(&path), "--k", "4", "--oracle"])
        .env("TESTSCORE_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ingest_reports_line_numbers() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(&path, "coder_id,task_id,rating\nc1,t1,80\nc1,t2,oops\n").unwrap();
    let out = run(&["ingest", path_str(&path)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&path, "coder_id,task_id,rating\nc1,t1,80\nc1,t2,150\n").unwrap();
    let out = run(&["ingest", path_str(&path)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(&path, "").unwrap();
    assert_eq!(code(&run(&["ingest", path_str(&path)])), 2);
}

#[test]
fn ingest_constant_coder_is_a_point_mass() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.csv");
    let mut text = String::from("coder_id,task_id,rating\n");
    for t in 0..3 {
        text.push_str(&format!("same,t{t},82.5\nmixed,t{t},{}\n", 80 + t));
    }
    fs::write(&path, text).unwrap();
    let out = run(&["ingest", path_str(&path), "--min-solutions", "3", "--k", "5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let file = stdout_json(&out);
    assert_valid("scenario.schema.json", &file);
    assert_eq!(file["projects"][0]["k"], 2);
    let same = file["distributions"].as_array().unwrap().iter().find(|d| d["agent"] == "same").unwrap();
    assert_eq!(same["support"], serde_json::json!([[82.5, 1.0]]));
}

#[test]
fn experiment_is_reproducible_and_exact_at_full_k() {
    let dir = TempDir::new().unwrap();
    let scenario = dir.path().join("s.json");
    let out = run(&["ingest", path_str(&repo_file("data/sample_ratings.csv")), "--out", path_str(&scenario)]);
    assert_eq!(code(&out), 0);

    let csv = |name: &str, extra: &[&str]| {
        let p = dir.path().join(name);
        let mut args = vec!["experiment", path_str(&scenario), "--n", "5", "--trials", "4", "--seed", "9", "--out"];
        args.push(path_str(&p));
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(p).unwrap()
    };
    let first = csv("a.csv", &["--k", "2,5", "--jobs", "1"]);
    let second = csv("b.csv", &["--k", "2,5", "--jobs", "3"]);
    assert_eq!(first, second);
    assert_eq!(first.lines().next(), Some("k,trial,greedy,opt,ratio"));
    for line in first.lines().skip(1).filter(|l| l.starts_with("5,")) {
        let ratio: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((ratio - 1.0).abs() < 1e-12, "{line}");
    }
    assert_eq!(code(&run(&["experiment", path_str(&scenario), "--n", "5", "--k", "6"])), 2);
}

#[test]
fn worstcase_argument_errors_exit_one() {
    let out = run(&["worstcase", "nonexistent"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean_bestshot"));
    let out = run(&["worstcase", "mean_bestshot", "--k", "4", "--a", "3"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--p"));
}

#[test]
fn worstcase_reports_validate() {
    let cases: [&[&str]; 6] = [
        &["mean_bestshot", "--k", "4", "--a", "3", "--p", "0.2"],
        &["quantile_linear", "--k", "4", "--a", "3", "--p", "0.5"],
        &["ces_mean", "--k", "4", "--r", "2", "--a", "50"],
        &["quantile_ces", "--k", "4", "--r", "2", "--theta", "1", "--a", "1", "--b", "2", "--c", "3", "--n", "12"],
        &["welfare_ex1", "--r", "3"],
        &["welfare_ex2", "--r", "4"],
    ];
    for case in cases {
        let mut args = vec!["worstcase"];
        args.extend_from_slice(case);
        args.push("--run");
        let out = run(&args);
        let report = stdout_json(&out);
        assert_valid("worstcase_report.schema.json", &report);
        assert_valid("scenario.schema.json", &report["scenario"]);
        assert_eq!(report["validation"]["pass"], Value::Bool(true), "{case:?}: {report}");
        assert_eq!(code(&out), 0, "{case:?}");
    }
}
