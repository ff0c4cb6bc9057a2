use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use ssc_core::{Task, TaskCanonicalizer};

fn ssc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssc"))
        .args(args)
        .env_remove("SSC_API_KEY")
        .env_remove("SSC_ENDPOINT")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const GI_A: &str = r#"{"node goals": [{"name": "tv", "state": "ON"}, {"name": "lamp", "state": "OFF"}],
 "edge goals": [{"from_name": "cup", "relation": "ON", "to_name": "table"}], "action goals": []}"#;
const GI_B: &str = r#"```json
{'action goals': [], 'edge goals': [{'to_name': 'table', 'relation': 'ON', 'from_name': 'cup'}],
 'node goals': [{'state': 'OFF', 'name': 'lamp'}, {'name': 'tv', 'state': 'ON'}]}
```"#;

#[test]
fn canon_ignores_order_and_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let a = ssc(&["canon", "--task", "gi", &write(dir.path(), "a.json", GI_A)]);
    let b = ssc(&["canon", "--task", "gi", &write(dir.path(), "b.json", GI_B)]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let bad = r#"{"node goals": [{"name": "tv", "state": "FLYING"}], "edge goals": [], "action goals": [{"action": "TELEPORT"}]}"#;
    for (text, code) in [(GI_A, 0), (bad, 1), ("not json", 1)] {
        let out = ssc(&["validate", "--task", "gi", &write(dir.path(), "x.json", text)]);
        assert_eq!(out.status.code(), Some(code), "{text}");
        let want = TaskCanonicalizer::new(Task::GoalInterpretation).violations(text).len();
        assert_eq!(stdout_json(&out), json!({"valid": want == 0, "violations": want}));
        let stderr_lines = String::from_utf8_lossy(&out.stderr).lines().filter(|l| l.starts_with('{')).count();
        assert_eq!(stderr_lines, want);
    }
}

const PUT: &str = "(:action put :parameters (?o - object) :precondition (and (grabbable ?o) (clean ?o)) :effect (dirty ?o))";
const PUT_SWAPPED: &str = "(:action put :parameters (?o - object) :precondition (and (clean ?o) (grabbable ?o)) :effect (dirty ?o))";
const PUT_OTHER: &str = "(:action put :parameters (?o - object) :precondition (grabbable ?o) :effect (clean ?o))";

#[test]
fn vote_picks_the_majority_class() {
    let dir = tempfile::tempdir().unwrap();
    let pool = [
        json!({"instance_id": "t1", "task": "tm"}),
        json!({"index": 0, "text": PUT_OTHER}),
        json!({"index": 1, "text": PUT}),
        json!({"index": 2, "text": PUT_OTHER}),
        json!({"index": 3, "text": PUT_SWAPPED}),
        json!({"index": 4, "text": PUT}),
    ]
    .iter()
    .map(|v| v.to_string() + "\n")
    .collect::<String>();
    let path = write(dir.path(), "t1.jsonl", &pool);
    let out = ssc(&["vote", "--task", "tm", "--pool", &path]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_json(&out);
    assert_eq!(r["selected"]["index"], 1);
    assert_eq!(r["degraded"], false);
    let votes: Vec<u64> = r["tally"]["classes"].as_array().unwrap().iter().map(|c| c["votes"].as_u64().unwrap()).collect();
    assert_eq!(votes, [2, 3]);
}

#[test]
fn vote_with_no_valid_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let pool = "{\"instance_id\": \"t\", \"task\": \"tm\"}\n{\"index\": 0, \"text\": \"(:action\"}\n";
    let path = write(dir.path(), "t.jsonl", pool);
    let out = ssc(&["vote", "--task", "tm", "--pool", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["selected"], Value::Null);
    let out = ssc(&["vote", "--task", "tm", "--pool", &path, "--all-invalid-policy", "return-first-raw"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["degraded"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ssc(&["canon", "--task", "gi", "--bogus", "x"]).status.code(), Some(2));
    assert_eq!(ssc(&["canon", "--task", "nope", "x"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(ssc(&["canon", "--task", "gi", missing.to_str().unwrap()]).status.code(), Some(3));
    let inst = json!({
        "instance_id": "tm-1", "task": "tm", "gold": PUT,
        "prompt_fields": {"problem_file": "(define)", "action_handlers": "(:action put)"}
    });
    let inst = write(dir.path(), "tm-1.json", &inst.to_string());
    let out_pool = dir.path().join("out.jsonl");
    let out = ssc(&["sample", "--task", "tm", "--instance", &inst, "--out", out_pool.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("SSC_API_KEY"));
}

/// A chat-completions stand-in that answers every request with `reply`.
fn stub_endpoint(reply: &'static str) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let text = json!({"choices": [{"message": {"content": reply}}]}).to_string();
                let msg = format!(
                    "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{text}",
                    text.len()
                );
                let _ = stream.write_all(msg.as_bytes());
            });
        }
    });
    format!("http://{addr}/v1")
}

#[test]
fn sample_writes_a_pool() {
    let dir = tempfile::tempdir().unwrap();
    let inst = json!({
        "instance_id": "tm-1", "task": "tm", "gold": PUT,
        "prompt_fields": {"problem_file": "(define)", "action_handlers": "(:action put)"}
    });
    let inst = write(dir.path(), "tm-1.json", &inst.to_string());
    let out_pool = dir.path().join("out.jsonl");
    let out = Command::new(env!("CARGO_BIN_EXE_ssc"))
        .args(["sample", "--task", "tm", "--instance", &inst, "--n", "3", "--out", out_pool.to_str().unwrap()])
        .args(["--endpoint", &stub_endpoint(PUT)])
        .env("SSC_API_KEY", "k")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pool = ssc_core::sources::load_pool(&out_pool).unwrap();
    assert_eq!(pool.candidates, [PUT; 3]);
    assert_eq!(pool.instance_id, "tm-1");
}

#[test]
fn exec_reports_goals() {
    let dir = tempfile::tempdir().unwrap();
    let inst = json!({
        "instance_id": "as-1", "task": "as",
        "scene": {
            "nodes": [
                {"id": 1, "name": "character"},
                {"id": 2, "name": "tv", "states": ["OFF", "PLUGGED_IN"], "properties": ["HAS_SWITCH", "HAS_PLUG"]}
            ],
            "edges": [], "character_id": 1
        },
        "goals": {"node": [{"object": 2, "state": "ON"}]},
        "gold": {"WALK": ["tv", "2"], "SWITCHON": ["tv", "2"]}
    });
    let inst = write(dir.path(), "as-1.json", &inst.to_string());
    let good = write(dir.path(), "good.json", r#"{"WALK": ["tv", "2"], "SWITCHON": ["tv", "2"]}"#);
    let out = ssc(&["exec", "--instance", &inst, "--program", &good]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["goal_report"]["tsr"], true);
    let far = write(dir.path(), "far.json", r#"{"SWITCHON": ["tv", "2"]}"#);
    let r = stdout_json(&ssc(&["exec", "--instance", &inst, "--program", &far]));
    assert_eq!(r["goal_report"]["esr"], false);
    assert_eq!(r["steps"][0]["outcome"]["reason"], "proximity_violation");
    let fake = write(dir.path(), "fake.json", r#"{"FLY": ["tv", "2"]}"#);
    assert_eq!(ssc(&["exec", "--instance", &inst, "--program", &fake]).status.code(), Some(1));
}

#[test]
fn synth_corrupt_eval_round() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let out = ssc(&["synth", "--task", "tm", "--n", "6", "--seed", "4", "--out", root]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["counts"]["transition_modeling"], 6);
    let pools = format!("{root}/pools");
    let bad = format!("{root}/bad");
    let out = ssc(&["corrupt", "--pool", &pools, "--rate", "0.5", "--seed", "1", "--kinds", "truncate", "--out", &bad]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = format!("{root}/report.csv");
    let out = ssc(&["eval", "--task", "tm", "--instances", &format!("{root}/instances"), "--pools", &bad, "--report", &csv]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert!(report["transition_modeling"]["ssc"]["svr"].as_f64().unwrap() >= report["transition_modeling"]["greedy"]["svr"].as_f64().unwrap());
    assert!(fs::read_to_string(&csv).unwrap().starts_with("task,mode,metric,value\n"));
    // A missing pool is a dataset error.
    fs::remove_file(format!("{bad}/tm-0003.jsonl")).unwrap();
    let out = ssc(&["eval", "--task", "tm", "--instances", &format!("{root}/instances"), "--pools", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["transition_modeling"]["ssc"]["partial"], 1.0);
}
