use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn qru(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qru")).args(args).output().expect("spawn qru")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn with_data(n: usize) -> Self {
        let w = Self::new();
        let out = qru(&["gen-data", "--out", &w.arg("d.csv"), "--n", &n.to_string(), "--seed", "42"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        w
    }

    fn files(&self) -> Vec<String> {
        let mut v: Vec<String> = fs::read_dir(self.dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    }
}

fn lines(p: &Path) -> Vec<String> {
    fs::read_to_string(p).unwrap().lines().map(str::to_string).collect()
}

fn manifest(p: &Path) -> serde_json::Value {
    let mut name = p.as_os_str().to_owned();
    name.push(".manifest.json");
    serde_json::from_str(&fs::read_to_string(PathBuf::from(name)).unwrap()).unwrap()
}

#[test]
fn gen_data_writes_header_and_rows() {
    let w = Work::with_data(500);
    let l = lines(&w.path("d.csv"));
    assert_eq!(l.len(), 1501);
    assert_eq!(l[0], "label,ecal_energy,shower_length,hcal_std");
    let m = manifest(&w.path("d.csv"));
    assert_eq!(m["command"], "gen-data");
    assert_eq!(m["seed"], 42);
    assert!(!m["version"].as_str().unwrap().is_empty());
    assert!(m["finished"].is_string());
}

#[test]
fn train_writes_one_curve_row_per_epoch() {
    let w = Work::with_data(40);
    fs::write(w.path("c.toml"), "depth = 2\nepochs = 7\nloss.kind = \"huber\"\nschedule = \"step\"\n").unwrap();
    let out = qru(&["train", "--config", &w.arg("c.toml"), "--data", &w.arg("d.csv"), "--out", &w.arg("r.json"), "--curves", &w.arg("c.csv")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&w.path("c.csv"));
    assert_eq!(l[0], "epoch,train_loss,test_loss,train_acc,test_acc");
    assert_eq!(l.len(), 8);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(w.path("r.json")).unwrap()).unwrap();
    assert_eq!(rep["config"]["depth"], 2);
    assert_eq!(rep["final_params"].as_array().unwrap().len(), 2 * 3 * 3);
    let last_acc: f64 = l[7].split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(rep["final_test_acc"].as_f64().unwrap(), last_acc);
    let m = manifest(&w.path("r.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_row_count_is_values_times_repeats() {
    let w = Work::with_data(20);
    let out = qru(&[
        "sweep", "--data", &w.arg("d.csv"), "--dim", "lr", "--values", "0.05,0.005,0.0005", "--dim2", "optimizer",
        "--values2", "sgd,adam", "--repeats", "2", "--out", &w.arg("s.csv"), "--threads", "2", "--seed", "5",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&w.path("s.csv"));
    assert_eq!(l.len(), 1 + 3 * 2 * 2);
    assert!(l[0].starts_with("dim,value,dim2,value2,repeat,seed,"));
    assert!(l[1].starts_with("lr,0.05,optimizer,sgd,0,5,"));
    assert!(l[2].starts_with("lr,0.05,optimizer,sgd,1,6,"));
    let times = manifest(&w.path("s.csv"))["summary"]["wall_time_s"].as_array().unwrap().len();
    assert_eq!(times, 12);
}

#[test]
fn every_sweep_dimension_parses() {
    let w = Work::with_data(10);
    let cases = [
        ("depth", "1,2"),
        ("lr", "0.01"),
        ("batch_size", "1,4"),
        ("optimizer", "nadam,adadelta"),
        ("loss", "l1,huber"),
        ("normalization", "pm-pi,0-2pi,0:pi"),
        ("scheme", "xyx,zxz,xyz"),
        ("ppi", "1,2,3,4,5"),
    ];
    fs::write(w.path("c.toml"), "epochs = 1\n").unwrap();
    for (dim, values) in cases {
        let out_path = w.arg(&format!("{dim}.csv"));
        let out = qru(&["sweep", "--config", &w.arg("c.toml"), "--data", &w.arg("d.csv"), "--dim", dim, "--values", values, "--out", &out_path]);
        assert_eq!(code(&out), 0, "{dim}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(lines(Path::new(&out_path)).len(), 1 + values.split(',').count());
    }
}

#[test]
fn variability_summary_matches_rows() {
    let w = Work::with_data(20);
    let out = qru(&["variability", "--data", &w.arg("d.csv"), "--runs", "4", "--std", "0.2", "--out", &w.arg("v.csv")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&w.path("v.csv"));
    assert_eq!(l.len(), 1 + 4 + 2);
    let col = |row: &str, c: usize| -> f64 { row.split(',').nth(c).unwrap().parse().unwrap() };
    // test accuracy is column 5, test loss column 3
    for c in [3, 5] {
        let xs: Vec<f64> = l[1..5].iter().map(|r| col(r, c)).collect();
        let mean = xs.iter().sum::<f64>() / 4.0;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!(l[5].starts_with("mean,,"));
        assert!((col(&l[5], c) - mean).abs() < 1e-12);
        assert!((col(&l[6], c) - sd).abs() < 1e-12);
    }
}

#[test]
fn identical_seeds_have_zero_spread() {
    let w = Work::with_data(15);
    let out = qru(&["variability", "--data", &w.arg("d.csv"), "--runs", "2", "--fixed-seed", "--out", &w.arg("v.csv")]);
    assert_eq!(code(&out), 0);
    let l = lines(&w.path("v.csv"));
    assert_eq!(l[4], "std,,0,0,0,0,0");
}

#[test]
fn hpo_histories() {
    let w = Work::with_data(15);
    let out = qru(&["bayes", "--data", &w.arg("d.csv"), "--n-calls", "5", "--n-initial", "2", "--epochs", "1", "--with-normalization", "--out", &w.arg("b.csv")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&w.path("b.csv"));
    assert_eq!(l.len(), 6);
    assert_eq!(l[0], "trial,depth,lr,loss,optimizer,norm_lo,norm_hi,budget,objective,best_so_far");

    let out = qru(&["hyperband", "--data", &w.arg("d.csv"), "--max-budget", "9", "--eta", "3", "--out", &w.arg("h.csv")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&w.path("h.csv"));
    // brackets (9,1)→3→1, (5,3)→1, (3,9): 13 + 6 + 3 evaluations
    assert_eq!(l.len(), 1 + 22);
    let budgets: Vec<usize> = l[1..].iter().map(|r| r.split(',').nth(7).unwrap().parse().unwrap()).collect();
    assert!(budgets.iter().all(|&b| (1..=9).contains(&b)));
}

#[test]
fn analyze_tables() {
    let w = Work::new();
    let run = |args: &[&str]| {
        let out = qru(args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["analyze", "--kind", "curve", "--points", "11", "--out", &w.arg("c.csv")]);
    assert_eq!(lines(&w.path("c.csv")).len(), 12);
    run(&["analyze", "--kind", "spectrum", "--unit-scaling", "--depth", "2", "--out", &w.arg("s.csv")]);
    assert_eq!(lines(&w.path("s.csv"))[0], "freq,cos,sin");
    assert_eq!(lines(&w.path("s.csv")).len(), 4);
    let resid = manifest(&w.path("s.csv"))["summary"]["residual_rms"].as_f64().unwrap();
    assert!(resid < 1e-8);
    run(&["analyze", "--kind", "expressibility", "--depths", "1,2", "--pairs", "200", "--out", &w.arg("e.csv")]);
    assert_eq!(lines(&w.path("e.csv")).len(), 3);
    run(&["analyze", "--kind", "evenness", "--draws", "5", "--lo", "-pi", "--hi", "pi", "--out", &w.arg("g.csv")]);
    assert_eq!(lines(&w.path("g.csv")).len(), 6);
}

#[test]
fn usage_errors_exit_1_and_write_nothing() {
    let w = Work::with_data(10);
    let before = w.files();
    fs::write(w.path("bad.toml"), "dept = 3\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["train".into(), "--data".into(), w.arg("d.csv"), "--out".into(), w.arg("r.json"), "--bogus".into()],
        vec!["train".into(), "--config".into(), w.arg("bad.toml"), "--data".into(), w.arg("d.csv"), "--out".into(), w.arg("r.json")],
        vec!["sweep".into(), "--data".into(), w.arg("d.csv"), "--dim".into(), "depth".into(), "--values".into(), "1,x".into(), "--out".into(), w.arg("s.csv")],
        vec!["sweep".into(), "--data".into(), w.arg("d.csv"), "--dim".into(), "width".into(), "--values".into(), "1".into(), "--out".into(), w.arg("s.csv")],
        vec!["variability".into(), "--data".into(), w.arg("d.csv"), "--runs".into(), "1".into(), "--out".into(), w.arg("v.csv")],
        vec!["bayes".into(), "--data".into(), w.arg("d.csv"), "--n-calls".into(), "3".into(), "--n-initial".into(), "3".into(), "--out".into(), w.arg("b.csv")],
        vec!["analyze".into(), "--kind".into(), "spectrum".into(), "--points".into(), "3".into(), "--out".into(), w.arg("a.csv")],
        vec!["train".into(), "--data".into(), w.arg("d.csv"), "--out".into(), w.arg("missing/r.json")],
        vec!["frobnicate".into()],
    ];
    for args in &cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = qru(&refs);
        assert_eq!(code(&out), 1, "{refs:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let mut expected = before;
    expected.push("bad.toml".into());
    expected.sort();
    assert_eq!(w.files(), expected);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&qru(&["--help"])), 0);
    assert_eq!(code(&qru(&["--version"])), 0);
    assert_eq!(code(&qru(&["sweep", "--help"])), 0);
}

#[test]
fn data_errors_exit_2() {
    let w = Work::new();
    fs::write(w.path("bad.csv"), "label,ecal_energy,shower_length,hcal_std\n0,1,2,3\n7,1,2,3\n").unwrap();
    let out = qru(&["train", "--data", &w.arg("bad.csv"), "--out", &w.arg("r.json")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    let out = qru(&["train", "--data", &w.arg("none.csv"), "--out", &w.arg("r.json")]);
    assert_eq!(code(&out), 2);
    assert!(!w.path("r.json").exists());
}

#[test]
fn numeric_failure_exits_3() {
    let w = Work::with_data(10);
    fs::write(w.path("c.toml"), "init.value = 1e200\nscheme.ppi = 5\n").unwrap();
    let out = qru(&["train", "--config", &w.arg("c.toml"), "--data", &w.arg("d.csv"), "--out", &w.arg("r.json"), "--curves", &w.arg("c.csv")]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!w.path("r.json").exists() && !w.path("c.csv").exists());
    assert!(manifest(&w.path("r.json"))["finished"].is_null());
}
