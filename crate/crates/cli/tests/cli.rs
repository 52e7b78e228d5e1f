use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const BIN: &str = env!("CARGO_BIN_EXE_concept-qa");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn run(data: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--data-dir")
        .arg(data)
        .args(args)
        .env_remove("CONCEPT_QA_DATA_DIR")
        .env_remove("CONCEPT_QA_CONFIG")
        .output()
        .unwrap()
}

fn ok(output: Output) -> String {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

fn imported() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let network = fixture("force_pressure.json");
    let out = ok(run(dir.path(), &["import", network.to_str().unwrap()]));
    assert_eq!(out.trim(), "force-and-pressure version 1");
    dir
}

#[test]
fn export_reproduces_the_imported_document() {
    let dir = imported();
    let out = ok(run(dir.path(), &["export", "force-and-pressure"]));
    assert_eq!(out, std::fs::read_to_string(fixture("force_pressure.json")).unwrap());
}

#[test]
fn ask_answers_and_files_tickets() {
    let dir = imported();
    let out = ok(run(dir.path(), &["ask", "force-and-pressure", "What is pressure?"]));
    let answer: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(answer["status"], "answered");
    assert_eq!(answer["confidence"], 1.0);

    let out = ok(run(dir.path(), &["ask", "force-and-pressure", "What is buoyancy?"]));
    let pending: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(pending["status"], "pending");
    assert_eq!(pending["kind"]["type"], "no_entity");

    let out = ok(run(dir.path(), &["tickets", "force-and-pressure"]));
    let tickets: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(tickets[0]["question"], "What is buoyancy?");
}

#[test]
fn eval_prints_a_table_and_writes_a_report() {
    let dir = imported();
    let report = dir.path().join("report.json");
    let questions = fixture("paraphrases.jsonl");
    let out = ok(run(
        dir.path(),
        &[
            "eval",
            "force-and-pressure",
            "--questions",
            questions.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ],
    ));
    assert!(out.starts_with("category"));
    assert!(out.lines().any(|l| l.starts_with("overall")));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["overall"]["asked"], 20);
}

#[test]
fn errors_exit_nonzero() {
    let dir = imported();
    let output = run(dir.path(), &["export", "light"]);
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("light"));
    let output = run(dir.path(), &["import", "/nonexistent/network.json"]);
    assert!(!output.status.success());
}

#[test]
fn config_file_sets_data_dir_and_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("qa.toml");
    let wordnet = fixture("wordnet");
    std::fs::write(
        &config,
        format!(
            "tau = 0.99\ndata_dir = \"store\"\nwordnet_dir = {:?}\n",
            wordnet.to_str().unwrap()
        ),
    )
    .unwrap();
    let base = |args: &[&str]| {
        Command::new(BIN)
            .arg("--config")
            .arg(&config)
            .args(args)
            .env_remove("CONCEPT_QA_DATA_DIR")
            .output()
            .unwrap()
    };
    ok(base(&["import", fixture("force_pressure.json").to_str().unwrap()]));
    assert!(dir.path().join("store/force-and-pressure.network.json").is_file());
    // A near-miss that passes the default threshold falls short of 0.99.
    let out = ok(base(&["ask", "force-and-pressure", "What is air pressure?"]));
    let result: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(result["kind"]["type"], "low_confidence", "{result}");
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn serve_answers_over_http() {
    let dir = imported();
    let port = free_port();
    let addr = format!("127.0.0.1:{port}");
    let mut child = Command::new(BIN)
        .arg("--data-dir")
        .arg(dir.path())
        .args(["serve", "--addr", &addr])
        .env_remove("CONCEPT_QA_TOKEN")
        .spawn()
        .unwrap();
    let started = Instant::now();
    let mut stream = loop {
        match TcpStream::connect(&addr) {
            Ok(s) => break s,
            Err(_) if started.elapsed() < Duration::from_secs(10) => std::thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                child.kill().unwrap();
                panic!("server did not start: {e}");
            }
        }
    };
    write!(
        stream,
        "GET /v1/networks HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("force-and-pressure"));
}
