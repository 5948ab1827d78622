use std::path::Path;
use std::process::{Command, Output};

fn msmcts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msmcts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_plan_validate() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let plan = dir.path().join("plan.json");
    let svg = dir.path().join("plan.svg");

    let out = msmcts(&["gen", "--seed", "4", "--objects", "5", "--out", s(&scene)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = msmcts(&["plan", s(&scene), "--seed", "1", "--out", s(&plan), "--svg", s(&svg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    for key in ["actions", "steps", "total_displacement", "wall_time"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    let out = msmcts(&["validate", s(&scene), s(&plan)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "valid");
}

#[test]
fn tampered_plan_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let plan = dir.path().join("plan.json");
    assert!(msmcts(&["gen", "--seed", "9", "--objects", "3", "--out", s(&scene)]).status.success());
    assert!(msmcts(&["plan", s(&scene), "--out", s(&plan)]).status.success());

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    v["actions"].as_array_mut().unwrap().pop();
    std::fs::write(&plan, v.to_string()).unwrap();
    let out = msmcts(&["validate", s(&scene), s(&plan)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_writes_metrics_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bench");
    let out = msmcts(&["bench", "--difficulty", "easy", "--cases", "3", "--seed", "2", "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("level,cases,success_rate,mean_steps,std_steps,mean_dist,std_dist,mean_time_s"));
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("easy,3,"));
    let jsonl = std::fs::read_to_string(out_dir.join("cases.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 3);
}

#[test]
fn bad_input_exits_with_two() {
    let out = msmcts(&["validate", "/nonexistent/scene.json", "/nonexistent/plan.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = msmcts(&["bench", "--difficulty", "extreme"]);
    assert!(!out.status.success());
}
