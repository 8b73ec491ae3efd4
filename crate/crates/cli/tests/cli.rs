use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use clap::Parser;
use cmaoe_cli::commands::{Cli, Command as Sub, DEFAULT_PORT};
use serde_json::Value;

fn cmaoe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmaoe")).args(args).current_dir(dir).env_remove("CMAOE_PORT").output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cmaoe(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixture_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--domain", "kp", "--fixture", "kp-micro", "-o", "i.json"]);
    ok(d, &["solve", "i.json", "-o", "s.json"]);
    let solution = json_file(&d.join("s.json"));
    assert_eq!(solution["status"], "Optimal");
    assert_eq!(solution["objective"], 7);

    let questions: Value = serde_json::from_str(&ok(d, &["questions", "i.json", "s.json"])).unwrap();
    assert_eq!(questions.as_array().unwrap().len(), 1);
    assert_eq!(questions[0]["variable"], "x[Alice][bed]");

    let text = ok(d, &["ask", "i.json", "s.json", "--var", "x[Alice][bed]", "--variant", "c", "-o", "e.json"]);
    assert!(text.starts_with("Total utility would decrease by 2"), "{text}");
    let e = json_file(&d.join("e.json"));
    assert_eq!(e["variant"], "c");
    assert_eq!(e["explanation"]["length"], 2);

    ok(d, &["ask", "i.json", "s.json", "--var", "x[Alice][bed]", "--alpha", "2", "--beta", "1/3", "-o", "w.json"]);
    assert_eq!(json_file(&d.join("w.json"))["weights"]["beta"], "1/3");
}

#[test]
fn generated_instances_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = ok(d, &["gen", "--domain", "wsp", "--seed", "5", "--agents", "4", "--tables", "2"]);
    let b = ok(d, &["gen", "--domain", "wsp", "--seed", "5", "--agents", "4", "--tables", "2"]);
    assert_eq!(a, b);
    let inst: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(inst["agents"].as_array().unwrap().len(), 4);
    assert_eq!(inst["pairs"].as_array().unwrap().len(), 6);
}

#[test]
fn solve_accepts_raw_models() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = serde_json::json!({
        "sense": "min",
        "agents": ["A"],
        "variables": [
            {"name": "a", "kind": "binary", "lb": 0, "ub": 1, "solution": true, "agents": ["A"]},
            {"name": "b", "kind": "binary", "lb": 0, "ub": 1, "solution": true, "agents": ["A"]}
        ],
        "constraints": [{"terms": [["a", 1], ["b", 1]], "rel": ">=", "rhs": 1}],
        "objective": [["a", 3], ["b", "5/2"]]
    });
    std::fs::write(d.join("m.json"), model.to_string()).unwrap();
    let report: Value = serde_json::from_str(&ok(d, &["solve", "m.json"])).unwrap();
    assert_eq!(report["objective"], "5/2");
    assert_eq!(report["assignment"]["b"], 1);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--domain", "kp", "--fixture", "kp-micro", "-o", "i.json"]);
    ok(d, &["solve", "i.json", "-o", "s.json"]);
    let out = cmaoe(d, &["ask", "i.json", "s.json", "--var", "x[Zoe][yacht]"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown variable"));
    let out = cmaoe(d, &["solve", "missing.json"]);
    assert!(!out.status.success());
    let out = cmaoe(d, &["ask", "i.json", "s.json", "--var", "x[Alice][bed]", "--alpha", "1"]);
    assert!(!out.status.success(), "alpha without beta is rejected");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = r#"{"instances_per_size": 1, "questions_per_instance": 2, "sizes": [{"agents": 3, "tasks": 4}], "seed": 9}"#;
    std::fs::write(d.join("c.json"), config).unwrap();
    ok(d, &["bench", "--domain", "tap", "--config", "c.json", "--out", "r.csv"]);
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("domain,size,instance_seed,question_id,variant,status,t_solve_s,t_explain_s,q_original,q_hypothetical,subopt_ratio,expl_length")
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.starts_with("tap,4,9,")));
}

#[test]
fn port_flag_and_environment() {
    let cli = Cli::try_parse_from(["cmaoe", "serve", "--port", "9000"]).unwrap();
    let Sub::Serve(args) = cli.command else { panic!("serve expected") };
    assert_eq!(args.port(None).unwrap(), 9000);
    assert_eq!(args.port(Some("9100")).unwrap(), 9100);
    assert!(args.port(Some("http")).is_err());
    let Sub::Serve(bare) = Cli::try_parse_from(["cmaoe", "serve"]).unwrap().command else { panic!() };
    assert_eq!(bare.port(None).unwrap(), DEFAULT_PORT);
}

#[test]
fn serve_answers_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_cmaoe"))
        .args(["serve", "--port", "1", "--data-dir"])
        .arg(dir.path())
        .env("CMAOE_PORT", "0")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_string();

    let body = r#"{"domain": "kp", "fixture": "kp-micro"}"#;
    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(
        stream,
        "POST /sessions HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 201"), "{response}");
    assert!(response.contains("\"objective\":7"));
}
