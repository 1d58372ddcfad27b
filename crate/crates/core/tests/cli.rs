use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nilsoliton::doc::{BracketDocument, Document};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilsoliton"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn run_in(dir: &Path, args: &[&str], threads: Option<&str>) -> Output {
    let mut c = bin();
    c.current_dir(dir).args(args);
    if let Some(t) = threads {
        c.env(nilsoliton::cli::THREADS_ENV, t);
    }
    c.output().expect("binary runs")
}

#[test]
fn fixture_batch_matches_golden_report() {
    let dir = fixture("");
    let o = run_in(&dir, &["batch", "manifest.json"], Some("4"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let golden = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/fixtures_batch.txt")).unwrap();
    assert_eq!(stdout(&o), golden);
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let dir = fixture("");
    let args = ["--format", "structured", "batch", "manifest.json"];
    let a = run_in(&dir, &args, Some("1"));
    let b = run_in(&dir, &args, Some("3"));
    let c = run_in(&dir, &args, None);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["items"].as_array().unwrap().len(), 32);
}

#[test]
fn analyze_reports() {
    let o = run(&["analyze", fixture("mu1_prime.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("soliton: Einstein, eigenvalue type (1<16<17<18<19<20<21; 1,1,1,1,1,1,1)"));
    let o = run(&["analyze", fixture("heisenberg.json").to_str().unwrap()]);
    assert!(stdout(&o).contains("verdict: Einstein, F = 3\n"));
}

#[test]
fn parse_errors_exit_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"kind\": \"bracket\",\n \"dim\": 3,\n \"entries\": [ {\"i\": 1, \"j\": 2 ,, ] }").unwrap();
    let o = run(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("parse error at line 3"), "{}", stdout(&o));
    let o = run(&["analyze", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn non_lie_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("mu2.json");
    let d = Document::Bracket(BracketDocument::from_bracket(&nilsoliton::catalog::mu2(), Some("mu2")));
    fs::write(&p, d.to_json()).unwrap();
    let o = run(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("validation: Jacobi fails"));
}

#[test]
fn flow_writes_csv_and_reports_evidence() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let o = run(&["flow", fixture("flow_degenerating.json").to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("proper degeneration: derived dim 5\u{2192}4"), "{text}");
    assert!(text.contains("(1,2,7) 1.9"), "{text}");
    let data = fs::read_to_string(&csv).unwrap();
    let mut lines = data.lines();
    assert_eq!(lines.next(), Some("t,F,grad_norm,mu_1_2_7,mu_1_3_8,mu_1_4_9,mu_2_5_10,mu_2_6_11"));
    assert!(lines.all(|l| l.split(',').count() == 8));

    let o = run(&["flow", fixture("heisenberg.json").to_str().unwrap()]);
    assert!(stdout(&o).contains("flow: already critical"));
}

#[test]
fn flow_time_limit_is_reported_as_failure() {
    let o = run(&["flow", fixture("flow_degenerating.json").to_str().unwrap(), "--max-time", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("flow: not converged by t = 10"));
}

#[test]
fn graph_verbs() {
    let o = run(&["graph", "weighting", "--grst", "2", "1", "1"]);
    assert!(stdout(&o).contains("weighting (integer): (-1,15,15,18,8,14), nu = 67"));
    let o = run(&["graph", "positivity", "--grst", "0", "0", "3"]);
    assert!(stdout(&o).contains("positivity: not positive (zero weight)"));
    let o = run(&["graph", "positivity", fixture("path3.txt").to_str().unwrap()]);
    assert!(stdout(&o).contains("positivity: positive\n"));
    let o = run(&["graph", "grst", "--grst", "1", "1", "1"]);
    assert!(stdout(&o).contains("closed form: positive"));
    let o = run(&["graph", "witness", "--grst", "4", "1", "0"]);
    assert!(stdout(&o).contains("witness: G(4,1,0) on central edge 1-2"));
    assert_ne!(run(&["graph", "weighting"]).status.code(), Some(0));
}

#[test]
fn graph_soliton_emits_a_document_that_round_trips() {
    let o = run(&["--format", "structured", "graph", "soliton", fixture("star4.txt").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mut doc = v["items"][0]["sections"][0]["document"].clone();
    doc["kind"] = "bracket".into();
    let parsed = Document::parse(&doc.to_string()).unwrap();
    let Document::Bracket(b) = &parsed else { panic!() };
    assert!(b.entries.iter().all(|e| e.c.text.as_deref() == Some("sqrt(1/6)")));
    assert_eq!(Document::parse(&parsed.to_json()).unwrap(), parsed);
}

#[test]
fn batch_collects_item_errors_in_order() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("heisenberg.json"), dir.path().join("h.json")).unwrap();
    let manifest = r#"{"kind":"manifest","items":[
        {"path":"h.json","task":"analyze"},
        {"path":"nope.json","task":"analyze"},
        {"grst":[2,2,0],"task":"positivity"}]}"#;
    fs::write(dir.path().join("m.json"), manifest).unwrap();
    let o = run(&["--format", "structured", "batch", dir.path().join("m.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let items = v["items"].as_array().unwrap();
    let codes: Vec<i64> = items.iter().map(|i| i["exit_code"].as_i64().unwrap()).collect();
    assert_eq!(codes, [0, 1, 0]);
    assert_eq!(items[1]["input"], "nope.json");

    fs::write(dir.path().join("empty.json"), r#"{"kind":"manifest","items":[]}"#).unwrap();
    let o = run(&["batch", dir.path().join("empty.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}
