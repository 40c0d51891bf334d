use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const C5: &str = "vertex a\nvertex b\nvertex c\nvertex d\nvertex e\nedge a b\nedge b c\nedge c d\nedge d e\nedge e a\n";
const EDGE: &str = "vertex x\nvertex y\nedge x y\n";

fn raag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raag"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn graph(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn classify_a_c_is_elliptic() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let out = raag(&["--format", "json", "classify", "-g", &g, "a c"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["kind"], "elliptic");
    let out = raag(&["--format", "json", "classify", "-g", &g, "a b c d"]);
    assert_eq!(json(&out)["kind"], "loxodromic");
}

#[test]
fn stability_certificate_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let cert = dir.path().join("cert.json");
    let out = raag(&[
        "--format",
        "json",
        "stability",
        "-g",
        &g,
        "--gen",
        "a b c d",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["verdict"], "stable");
    assert_eq!(report["certificate"]["evidence"]["type"], "pure_complex");

    let out = raag(&["verify-cert", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let text = std::fs::read_to_string(&cert).unwrap();
    let tampered = text.replacen("\"simple_cycles\": ", "\"simple_cycles\": 1", 1);
    std::fs::write(&cert, tampered).unwrap();
    let out = raag(&["verify-cert", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn not_stable_comes_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let gens = graph(dir.path(), "gens.txt", "# two generators\na c\nb\n");
    let out = raag(&["--format", "json", "stability", "-g", &g, "--gens", &gens]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["verdict"], "not_stable");
    assert_eq!(
        report["certificate"]["evidence"]["type"],
        "elliptic_witness"
    );
}

#[test]
fn morse_on_a_vertex_runs_out_of_budget() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let out = raag(&["morse", "-g", &g, "--gen", "a", "--budget", "10000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn morse_finite_index_route() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "edge.txt", EDGE);
    let cert = dir.path().join("m.json");
    let out = raag(&[
        "--format",
        "json",
        "morse",
        "-g",
        &g,
        "--gen",
        "x x",
        "--gen",
        "y y y",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["route"]["index"], 6);
    assert_eq!(
        raag(&["verify-cert", cert.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn cosets_checkpoint_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "edge.txt", EDGE);
    let ck = dir.path().join("ck.json");
    let csv = dir.path().join("t.csv");
    let out = raag(&[
        "cosets",
        "-g",
        &g,
        "--gen",
        "x x",
        "--gen",
        "y y y",
        "--budget",
        "2",
        "--checkpoint",
        ck.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = raag(&[
        "--format",
        "json",
        "cosets",
        "-g",
        &g,
        "--gen",
        "x x",
        "--gen",
        "y y y",
        "--resume",
        ck.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["index"], 6);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().next(), Some("coset,generator,image"));
    assert_eq!(table.lines().count(), 1 + 6 * 4);
}

#[test]
fn saturated_complex_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let out = raag(&[
        "--format", "json", "complex", "saturate", "-g", &g, "--gen", "a b c d",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let complex = json(&out)["complex"].as_str().unwrap().to_string();
    let path = graph(dir.path(), "k.txt", &complex);
    let out = raag(&["--format", "json", "complex", "verify", "-g", &g, &path]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["scan"]["pure"], true);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    assert_eq!(raag(&["classify", "-g", &g, "a z"]).status.code(), Some(2));
    let bad = graph(dir.path(), "bad.txt", "vertex a\nedge a q\n");
    assert_eq!(raag(&["check-graph", "-g", &bad]).status.code(), Some(2));
    assert_eq!(raag(&["stability", "-g", &g]).status.code(), Some(2));
    let path = graph(
        dir.path(),
        "p4.txt",
        "vertex p\nvertex q\nvertex r\nedge p q\nedge q r\n",
    );
    assert_eq!(raag(&["check-graph", "-g", &path]).status.code(), Some(2));
}

#[test]
fn probe_reports_failures_for_a_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph(dir.path(), "c5.txt", C5);
    let out = raag(&[
        "--format",
        "json",
        "probe",
        "-g",
        &g,
        "--gen",
        "a",
        "--delta",
        "1",
        "--lambda-max",
        "2",
        "--epsilon-max",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["heuristic"], true);
    assert_eq!(r["pairs"].as_array().unwrap().len(), 4);
    assert!(r["first_pass"].is_null());
}
