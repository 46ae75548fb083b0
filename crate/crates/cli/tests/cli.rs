use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rpdag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpdag"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn network(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "networks", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn copy_csv(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("copy.csv");
    let mut text = String::from("x,y\n");
    for i in 0..1000 {
        let v = (i * 7919) % 13 % 2;
        text.push_str(&format!("{v},{v}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn learn_copy_variable_gives_one_link() {
    let dir = TempDir::new().unwrap();
    let data = copy_csv(&dir);
    let (out, report) = (dir.path().join("net.json"), dir.path().join("report.json"));
    let o = rpdag(&[
        "learn",
        "--data",
        s(&data),
        "--out",
        s(&out),
        "--report",
        s(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let net = read_json(&out);
    assert_eq!(net["edges"]["links"].as_array().unwrap().len(), 1);
    assert!(net["edges"]["arcs"].as_array().unwrap().is_empty());
    let r = read_json(&report);
    assert_eq!(r["search"]["iterations"], 1);
    assert_eq!(r["evaluation"]["edge_count"], 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("BDeu"));
}

#[test]
fn dag_space_output_has_no_links() {
    let dir = TempDir::new().unwrap();
    let data = copy_csv(&dir);
    let out = dir.path().join("net.json");
    let o = rpdag(&[
        "learn",
        "--data",
        s(&data),
        "--out",
        s(&out),
        "--space",
        "dag",
        "--strategy",
        "tabu",
    ]);
    assert!(o.status.success());
    let net = read_json(&out);
    assert!(net["edges"]["links"]
        .as_array()
        .is_none_or(|l| l.is_empty()));
    assert_eq!(net["edges"]["arcs"].as_array().unwrap().len(), 1);
}

#[test]
fn missing_output_directory_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let data = copy_csv(&dir);
    let out = dir.path().join("absent").join("net.json");
    let report = dir.path().join("report.json");
    let o = rpdag(&[
        "learn",
        "--data",
        s(&data),
        "--out",
        s(&out),
        "--report",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!report.exists() && !out.exists());
}

#[test]
fn exit_codes_for_usage_and_data_errors() {
    assert_eq!(rpdag(&["learn", "--bogus"]).status.code(), Some(1));
    assert_eq!(rpdag(&["census", "--n", "6"]).status.code(), Some(1));
    assert_eq!(
        rpdag(&["learn", "--data", "x.csv", "--out", "o.json", "--space", "cpdag"])
            .status
            .code(),
        Some(1)
    );
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n3\n").unwrap();
    let out = dir.path().join("o.json");
    assert_eq!(
        rpdag(&["learn", "--data", s(&bad), "--out", s(&out)])
            .status
            .code(),
        Some(2)
    );
    assert!(!out.exists());
    assert!(rpdag(&["--help"]).status.success());
}

#[test]
fn sample_score_and_compare_round_trip() {
    let dir = TempDir::new().unwrap();
    let gold = network("five_node.json");
    let csv = dir.path().join("d.csv");
    let o = rpdag(&[
        "sample",
        "--net",
        &gold,
        "--n",
        "20000",
        "--seed",
        "7",
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap().lines().count(),
        20001
    );

    let learned = dir.path().join("learned.json");
    let o = rpdag(&[
        "learn",
        "--data",
        s(&csv),
        "--out",
        s(&learned),
        "--gold",
        &gold,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let report = dir.path().join("cmp.json");
    let o = rpdag(&[
        "compare",
        "--net",
        s(&learned),
        "--gold",
        &gold,
        "--report",
        s(&report),
    ]);
    assert!(o.status.success());
    assert_eq!(read_json(&report)["total"], 0);

    let score_report = dir.path().join("score.json");
    let o = rpdag(&[
        "score",
        "--data",
        s(&csv),
        "--net",
        &gold,
        "--report",
        s(&score_report),
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("BIC") && stdout.contains("KL"));
    assert_eq!(read_json(&score_report)["edge_count"], 3);
}

#[test]
fn learn_is_deterministic_apart_from_time() {
    let dir = TempDir::new().unwrap();
    let gold = network("eight_node.json");
    let mut reports = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("n{k}.json"));
        let report = dir.path().join(format!("r{k}.json"));
        let o = rpdag(&[
            "learn",
            "--net",
            &gold,
            "--n",
            "1500",
            "--seed",
            "4",
            "--out",
            s(&out),
            "--report",
            s(&report),
            "--strategy",
            "tabu",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut r = read_json(&report);
        r["search"]["wall_time_seconds"] = Value::Null;
        r["output"] = Value::Null;
        reports.push((r, std::fs::read_to_string(&out).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0].0["search"]["iterations"], 56);
}

#[test]
fn several_seeds_run_concurrently() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("net.json");
    let report = dir.path().join("r.json");
    let o = rpdag(&[
        "learn",
        "--net",
        &network("collider.json"),
        "--n",
        "5000",
        "--seeds",
        "1,2,3",
        "--out",
        s(&out),
        "--report",
        s(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in 1..=3 {
        assert!(dir.path().join(format!("net.seed{seed}.json")).exists());
    }
    let r = read_json(&report);
    assert_eq!(r.as_array().unwrap().len(), 3);
    assert_eq!(r[1]["seed"], 2);
}

#[test]
fn census_reports_counts() {
    let o = rpdag(&["census", "--n", "4"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("dags           543"), "{stdout}");
    assert!(stdout.contains("classes        185"));
}
