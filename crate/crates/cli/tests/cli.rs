use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ballotree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballotree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn build_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("omega.t");
    let out = out.to_str().unwrap();
    let r = ballotree(&["build", "omega", "--k", "3", "--out", out]);
    assert!(r.status.success(), "{}", stderr(&r));
    let stats = ballotree(&["stats", out]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&stats)).unwrap();
    assert_eq!(v["leaves"], "150");

    let r = ballotree(&["build", "baseline", "--n", "8"]);
    assert_eq!(stdout(&r), "(((0 1) (2 3)) ((4 5) (6 7)))\n");

    let leaf = write(dir.path(), "leaf.t", "5\n");
    let v: serde_json::Value = serde_json::from_str(&stdout(&ballotree(&["stats", &leaf]))).unwrap();
    assert_eq!(v, serde_json::json!({"leaves": "1", "depth": 0, "dag_nodes": 1}));
}

#[test]
fn build_psi_uses_shared_form_above_threshold() {
    let r = ballotree(&["build", "psi", "--n", "8", "--threshold", "100"]);
    assert!(r.status.success());
    assert!(stdout(&r).starts_with("(def @0 "));
    let r = ballotree(&["build", "psi", "--n", "4"]);
    assert!(!stdout(&r).contains("def"));
}

#[test]
fn eval_examples() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.t", "(0 1)\n");
    let cw = write(dir.path(), "cw.txt", "n=3\n101\n");
    let r = ballotree(&["eval", &m, &cw]);
    assert_eq!(stdout(&r), "0\n");

    let add = dir.path().join("add.t");
    ballotree(&["build", "add", "--out", add.to_str().unwrap()]);
    let add = add.to_str().unwrap();
    let r = ballotree(&["eval", add, &cw, "--bind", "X=1", "--bind", "Y=2"]);
    assert_eq!(stdout(&r), "0\n");
    let r = ballotree(&["eval", add, "--direction", "ccw", "--bind", "X=2", "Y=2"]);
    assert_eq!(stdout(&r), "1\n");

    let r = ballotree(&["eval", add, &cw, "--bind", "X=1"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("unbound"));
}

#[test]
fn format_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.t", "(0 1");
    let r = ballotree(&["stats", &bad]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("1:5"), "{}", stderr(&r));

    let tree = write(dir.path(), "t.t", "(0 1)");
    let short = write(dir.path(), "short.txt", "n=3\n10\n");
    assert_eq!(ballotree(&["eval", &tree, &short]).status.code(), Some(2));
    assert_eq!(ballotree(&["build", "nope"]).status.code(), Some(2));
    assert_eq!(ballotree(&["build", "baseline"]).status.code(), Some(2));
    assert_eq!(ballotree(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn compile_table_and_diagnostics() {
    let r = ballotree(&["compile", "x*y", "--table"]);
    assert!(r.status.success());
    let text = stdout(&r);
    let rows: Vec<serde_json::Value> = text
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 18);
    for row in rows {
        let x = row["inputs"][0][1].as_u64().unwrap();
        let y = row["inputs"][1][1].as_u64().unwrap();
        assert_eq!(row["output"].as_u64().unwrap(), x * y % 3);
    }

    let r = ballotree(&["compile", "x + * y"]);
    assert_eq!(r.status.code(), Some(2));
    let err = stderr(&r);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines[0], "x + * y");
    assert_eq!(lines[1].find('^'), Some(4));

    let r = ballotree(&["compile", "x + y", "--vars", "x"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn verify_reports_and_exit_codes() {
    let r = ballotree(&["verify", "gates", "--samples", "20", "--json"]);
    assert!(r.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(v["schema"], "ballotree.report/v1");
    assert_eq!(v["passed"], true);

    let r = ballotree(&["verify", "manipulator", "--n", "4", "--variant", "virtual"]);
    assert!(r.status.success(), "{}", stdout(&r));
    assert!(stdout(&r).starts_with("PASS manipulator (48 cases"));

    let r = ballotree(&["verify", "manipulator", "--n", "4"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("witness"));

    let r = ballotree(&["verify", "guarantee", "--k", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(v["observed"]["min_outdegree"], 2);
    assert_eq!(v["cases"], 64);
}

#[test]
fn verify_is_reproducible_across_jobs() {
    let strip = |out: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        v
    };
    let args = |jobs: &'static str| {
        [
            "verify", "guarantee", "--k", "3", "--mode", "sampled", "--samples", "50000",
            "--seed", "7", "--json", "--jobs", jobs,
        ]
    };
    assert_eq!(strip(ballotree(&args("1"))), strip(ballotree(&args("3"))));
}

#[test]
fn exhaustive_limit_env() {
    let r = ballotree(&["verify", "baseline", "--n", "16", "--mode", "exhaustive"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("BALLOTREE_EXHAUSTIVE_LIMIT"));
    let r = Command::new(env!("CARGO_BIN_EXE_ballotree"))
        .args(["verify", "baseline", "--n", "2", "--mode", "exhaustive"])
        .env("BALLOTREE_EXHAUSTIVE_LIMIT", "1")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
}
