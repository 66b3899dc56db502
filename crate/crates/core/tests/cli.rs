use std::path::Path;
use std::process::{Command, Output};

fn viewpoints(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viewpoints")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = viewpoints(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    viewpoints(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_a_log_by_hand_and_query_it() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("kb.jsonl");
    let l = s(&log);
    ok(&["init", l]);
    assert_eq!(ok(&["add-resource", "--log", l, "--kind", "agent", "--agency", "human", "--id", "ann"]), "ann\n");
    assert_eq!(ok(&["add-resource", "--log", l, "--kind", "document"]), "res-2\n");
    ok(&["add-resource", "--log", l, "--kind", "topic", "--id", "rivers", "--label", "Rivers"]);
    assert_eq!(
        ok(&["add-viewpoint", "--log", l, "--emitter", "ann", "--r2", "res-2", "--r3", "rivers",
            "--paradigm", "logic", "--polarity", "positive", "--at", "1"]),
        "vp-1\n"
    );
    assert_eq!(
        ok(&["feedback", "--log", l, "--agent", "ann", "--document", "res-2", "--topic", "rivers",
            "--polarity", "positive", "--at", "2"]),
        "vp-2\nvp-3\n"
    );
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 6);

    assert_eq!(
        ok(&["query", "paths", "--log", l, "--source", "ann", "--target", "rivers"]),
        "ann,res-2,rivers length 1.500000\n"
    );
    assert_eq!(
        ok(&["query", "near", "--log", l, "--origin", "ann", "--kind", "topic", "--k", "1"]),
        "rivers 1.500000\n"
    );
    let dot = ok(&["map", "export", "--log", l, "--format", "dot"]);
    assert!(dot.starts_with("graph knowledge_map {\n"));
    assert!(dot.contains("\"rivers\" [label=\"Rivers\"];"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("apple.jsonl");
    let l = s(&log);
    assert_eq!(code(&["scenario", "run", "--write-log", l]), 0);
    assert_eq!(code(&["query", "paths", "--log", l, "--source", "B", "--target", "B"]), 2);
    assert_eq!(code(&["query", "paths", "--log", l, "--source", "B"]), 2);
    assert_eq!(code(&["query", "paths", "--log", l, "--source", "B", "--target", "ghost"]), 1);
    assert_eq!(code(&["query", "near", "--log", l, "--origin", "B", "--k", "0"]), 1);
    assert_eq!(
        code(&["add-viewpoint", "--log", l, "--emitter", "B", "--r2", "B", "--r3", "B",
            "--paradigm", "feel", "--polarity", "positive", "--at", "9"]),
        1
    );
    assert_eq!(
        code(&["query", "paths", "--log", l, "--source", "B", "--target", "apple",
            "--perspective", "{\"half_life\": 0}"]),
        1
    );

    let script = dir.path().join("bad.json");
    std::fs::write(
        &script,
        r#"{"steps": [{"actions": [
            {"type": "resource", "id": "x", "kind": "topic"},
            {"type": "resource", "id": "y", "kind": "topic"},
            {"type": "assert_paths", "perspective": "neutral", "source": "x", "target": "y",
             "expect_paths": [["x", "y"]]}
        ]}]}"#,
    )
    .unwrap();
    let out = viewpoints(&["scenario", "run", "--script", s(&script)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("0/1 steps passing\n"));
}

#[test]
fn queries_are_repeatable_and_perspectives_load_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("apple.jsonl");
    let l = s(&log);
    ok(&["scenario", "run", "--write-log", l]);
    let persp = dir.path().join("no-self.json");
    std::fs::write(&persp, r#"{"exclude_emitters": ["B"]}"#).unwrap();
    let args = ["query", "paths", "--log", l, "--source", "B", "--target", "apple", "--perspective", s(&persp)];
    let first = ok(&args);
    assert_eq!(
        first,
        "B,A,D1,apple length 2.500000\nB,A,D2,apple length 2.500000\nB,C,D3,apple length 2.500000\n"
    );
    assert_eq!(ok(&args), first);
    let inline = ok(&["query", "paths", "--log", l, "--source", "B", "--target", "apple",
        "--perspective", r#"{"exclude_emitters":["B"]}"#]);
    assert_eq!(inline, first);
    assert_eq!(ok(&["query", "paths", "--log", l, "--source", "B", "--target", "ITS"]), "unreachable\n");
    assert_eq!(code(&["query", "paths", "--log", l, "--source", "B", "--target", "D3", "--now", "1"]), 1);
    let hood = ok(&["query", "neighborhood", "--log", l, "--origin", "B", "--radius", "1"]);
    assert!(hood.starts_with("node B 0.000000\nnode A 1.000000\n"), "{hood}");
    assert!(hood.contains("edge A B 1.000000\n"));
}

#[test]
fn scenario_json_report() {
    let out = ok(&["scenario", "run", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed_steps"], 5);
    assert_eq!(v["total_steps"], 5);
}

#[test]
fn simulate_writes_metrics_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("m.jsonl");
    let events = dir.path().join("e.jsonl");
    ok(&["simulate", "--config", "default", "--out", s(&metrics), "--events", s(&events)]);
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&metrics)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0]["round"], 1);
    assert!(lines.iter().all(|m| m.get("synchronization").is_some() && m.get("viewpoints_appended").is_some()));
    let replayed = ok(&["query", "near", "--log", s(&events), "--origin", "L1", "--kind", "document", "--k", "2"]);
    assert_eq!(replayed.lines().count(), 2);
    assert_eq!(code(&["simulate", "--config", "/nonexistent.json"]), 1);
}

#[test]
fn step_three_log_gives_a_single_path() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("step3.jsonl");
    let graph = viewpoints::session::graph_through(&viewpoints::session::apple_script(), 3).unwrap();
    viewpoints::io::write_log(&graph, std::fs::File::create(&log).unwrap()).unwrap();
    assert_eq!(
        ok(&["query", "paths", "--log", s(&log), "--perspective", "neutral", "--source", "B", "--target", "apple"]),
        "B,D1,apple length 1.333333\n"
    );
}
