use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const FAST: &str = r#"
[cv]
outer_folds = 5
inner_folds = 3
n_models = [5]
sample_fractions = [0.9]
alphas = [0.5]
lambdas = [0.05]

[simulate]
outer_folds = 5
inner_folds = 3
n_models = [5]
sample_fractions = [0.9]
alphas = [0.5]
lambdas = [0.05]
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cascade-uq"));
    c.env_remove("CASCADE_UQ_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let w = Workspace { dir: tempfile::tempdir().unwrap() };
        fs::write(w.path("fast.toml"), FAST).unwrap();
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn cohort(&self, name: &str, n: usize, seed: u64) -> PathBuf {
        let p = self.path(name);
        let o = run(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", s(&p)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        p
    }

    fn cv(&self, data: &Path, out: &str, extra: &[&str]) -> Output {
        let out = self.path(out);
        let config = self.path("fast.toml");
        let mut args = vec!["--config", s(&config), "cv", "--data", s(data), "--out", s(&out)];
        args.extend_from_slice(extra);
        run(&args)
    }
}

#[test]
fn gen_writes_requested_rows_deterministically() {
    let w = Workspace::new();
    let a = w.cohort("a.csv", 40, 9);
    let b = w.cohort("b.csv", 40, 9);
    let c = w.cohort("c.csv", 40, 10);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 41);
    assert_eq!(text, fs::read_to_string(b).unwrap());
    assert_ne!(text, fs::read_to_string(c).unwrap());
    assert!(text.lines().next().unwrap().contains("lvef"));
}

#[test]
fn cv_writes_parseable_reports_and_is_reproducible() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 120, 2);
    let o = w.cv(&data, "one", &["--seed", "1", "--svg"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "performance.csv", "comparisons.csv", "hyperparameters.csv", "predictions.csv", "roc/pooled_roc.svg"] {
        assert!(w.path("one").join(f).exists(), "{f} missing");
    }
    let json = fs::read_to_string(w.path("one/report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);
    let perf = fs::read_to_string(w.path("one/performance.csv")).unwrap();
    assert_eq!(perf.lines().next().unwrap(), "model,metric,mean,sd");
    let predictions = fs::read_to_string(w.path("one/predictions.csv")).unwrap();
    assert_eq!(predictions.lines().count(), 121);

    assert_eq!(code(&w.cv(&data, "two", &["--seed", "1"])), 0);
    assert_eq!(json, fs::read_to_string(w.path("two/report.json")).unwrap());
    assert_eq!(code(&w.cv(&data, "three", &["--seed", "2"])), 0);
    assert_ne!(json, fs::read_to_string(w.path("three/report.json")).unwrap());
}

#[test]
fn flags_override_the_config_file() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 100, 3);
    assert_eq!(code(&w.cv(&data, "out", &["--outer-folds", "3"])), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(w.path("out/report.json")).unwrap()).unwrap();
    assert_eq!(report["folds"].as_array().unwrap().len(), 3);
    assert_eq!(report["config"]["inner_folds"], 3);
}

#[test]
fn jobs_setting_does_not_change_results() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 100, 4);
    assert_eq!(code(&w.cv(&data, "one", &["--jobs", "1"])), 0);
    let config = w.path("fast.toml");
    let out = w.path("two");
    let o = bin()
        .env("CASCADE_UQ_JOBS", "2")
        .args(["--config", s(&config), "cv", "--data", s(&data), "--out", s(&out)])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(w.path("one/report.json")).unwrap(), fs::read(w.path("two/report.json")).unwrap());
}

#[test]
fn missing_imaging_columns_exit_with_usage_error() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 60, 5);
    let text = fs::read_to_string(&data).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let drop = header.iter().position(|h| *h == "srs").unwrap();
    let trimmed: String = text
        .lines()
        .map(|l| {
            let cells: Vec<&str> = l.split(',').enumerate().filter(|(i, _)| *i != drop).map(|(_, c)| c).collect();
            cells.join(",") + "\n"
        })
        .collect();
    let bad = w.path("bad.csv");
    fs::write(&bad, trimmed).unwrap();
    let o = w.cv(&bad, "out", &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!w.path("out/report.json").exists());
}

#[test]
fn invalid_invocations_exit_with_two() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 60, 6);
    let out = w.path("x");
    assert_eq!(code(&run(&["gen", "--n", "0", "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["cv", "--data", "/nonexistent.csv", "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["--jobs", "0", "summary", "--data", s(&data), "--out", s(&out)])), 2);
    assert_eq!(
        code(&run(&["simulate", "--data", s(&data), "--out", s(&out), "--fractions", "0.5,1.5"])),
        2
    );
    fs::write(w.path("bad.toml"), "[cv]\nouter_fold = 3\n").unwrap();
    let bad = w.path("bad.toml");
    assert_eq!(code(&run(&["--config", s(&bad), "cv", "--data", s(&data), "--out", s(&out)])), 2);
    fs::write(w.path("bad2.toml"), "[cv]\nrepeats = 3\n").unwrap();
    let bad = w.path("bad2.toml");
    assert_eq!(code(&run(&["--config", s(&bad), "cv", "--data", s(&data), "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["importance", "--report", "/nonexistent.json", "--method", "coefficient", "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn simulate_writes_one_row_per_run() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 120, 7);
    let config = w.path("fast.toml");
    let out = w.path("sim");
    let o = run(&[
        "--config", s(&config), "simulate", "--data", s(&data), "--out", s(&out), "--fractions", "0.5,1.0", "--repeats", "2",
        "--svg",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("sample_size_summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(summary.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let auc_rows: Vec<_> = rows.iter().filter(|r| &r[1] == "multi_stage" && &r[2] == "auc").collect();
    assert_eq!(auc_rows.len(), 2);
    assert!(auc_rows.iter().all(|r| &r[5] == "10"));
    assert!(out.join("simulation.json").exists() && out.join("sample_size_auc.svg").exists());
}

#[test]
fn summary_and_importance_commands() {
    let w = Workspace::new();
    let data = w.cohort("cohort.csv", 100, 8);
    let table = w.path("summary.csv");
    assert_eq!(code(&run(&["summary", "--data", s(&data), "--out", s(&table)])), 0);
    assert!(fs::read_to_string(&table).unwrap().lines().count() > 40);

    assert_eq!(code(&w.cv(&data, "cv", &[])), 0);
    let report = w.path("cv/report.json");
    let coef = w.path("coef.csv");
    let o = run(&["importance", "--report", s(&report), "--method", "coefficient", "--out", s(&coef)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&coef).unwrap();
    assert!(text.starts_with("feature,method,fold_1"));
    assert_eq!(text.lines().count(), 44);

    let perm = w.path("perm.csv");
    let o = run(&[
        "importance", "--report", s(&report), "--data", s(&data), "--method", "permutation", "--model", "multi_stage",
        "--repeats", "2", "--out", s(&perm),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&perm).unwrap().lines().count(), 44);
    let o = run(&["importance", "--report", s(&report), "--method", "permutation", "--out", s(&perm)]);
    assert_eq!(code(&o), 2);
}
