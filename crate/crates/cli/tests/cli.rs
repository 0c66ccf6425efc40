use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincarekit")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn free_group_growth_as_csv() {
    let out = run(&["growth", "--group", "free:2", "--rmax", "8", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("radius,value"));
    for (r, line) in lines.enumerate() {
        let want = 2 * 3u64.pow(r as u32) - 1;
        assert_eq!(line, format!("{r},{want}"));
    }
}

#[test]
fn cayley_hyperbolic_bound_value() {
    let args = ["bound", "--kind", "cayley-hyperbolic", "--sigma", "1", "--delta", "0", "--H", "0", "--c", "1"];
    let out = run(&[&args[..], &["--C", "1", "--nur", "41", "--R", "10"]].concat());
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    let value = doc["values"][0]["value"].as_f64().unwrap();
    assert!((value - 246.0).abs() < 1e-9, "{value}");
}

#[test]
fn bound_outside_regime_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("f.csv");
    fs::write(&profile, "radius,value\n0,1\n100000,5\n").unwrap();
    let f = profile.to_str().unwrap();
    let base = ["bound", "--kind", "main", "--C", "1", "--L", "1", "--f", f, "--R", "10"];
    assert_eq!(code(&run(&base)), 3);
    let out = run(&[&base[..], &["--override"]].concat());
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["values"][0]["in_regime"], false);
    let inside = run(&["bound", "--kind", "main", "--C", "1", "--L", "1", "--f", f, "--R", "25"]);
    let value = json(&inside)["values"][0]["value"].as_f64().unwrap();
    assert!((value - 10000.0).abs() < 1e-8);
}

#[test]
fn random_suite_has_no_violations() {
    let out = run(&[
        "verify",
        "--bound",
        "graph-strong",
        "--suite",
        "random",
        "--n",
        "40",
        "--seed",
        "7",
        "--sigma",
        "1,2,3",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["violations"], 0);
    assert_eq!(doc["graphs"], 40);
    assert!(doc["asserted"].as_u64().unwrap() > 0);
}

#[test]
fn graph_files_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("p3.json");
    let doc = r#"{"vertices":[{"id":0,"measure":1},{"id":1,"measure":2},{"id":2,"measure":1}],"edges":[[0,1],[1,2]]}"#;
    fs::write(&json_path, doc).unwrap();
    let out = run(&["ball", "--graph", json_path.to_str().unwrap(), "--center", "0", "--R", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["measure"], 3.0);

    let edges = dir.path().join("p3.csv");
    let measure = dir.path().join("m.csv");
    fs::write(&edges, "u,v\n0,1\n1,2\n").unwrap();
    fs::write(&measure, "id,measure\n0,1\n1,2\n2,1\n").unwrap();
    let args = ["--graph", edges.to_str().unwrap(), "--measure", measure.to_str().unwrap()];
    let out = run(&[&["constant"], &args[..], &["--center", "1", "--R", "1", "--seed", "1"]].concat());
    assert_eq!(code(&out), 0);
    // σ = 2 on P3 weighted (1, 2, 1) around the middle vertex
    let cell = &json(&out)["cells"][0];
    let optimal = cell["optimal"].as_f64().unwrap();
    assert!(cell["empirical"].as_f64().unwrap() <= optimal * (1.0 + 1e-9));
}

#[test]
fn cover_of_figure_eight_matches_free_group() {
    let out = run(&["cover", "--generate", "figure-eight", "--R", "6"]);
    assert_eq!(code(&out), 0);
    let sizes: Vec<u64> = json(&out)["ball_sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let want: Vec<u64> = (0..=6).map(|r| 2 * 3u64.pow(r) - 1).collect();
    assert_eq!(sizes, want);
}

#[test]
fn exit_codes() {
    // randomized command without a seed
    assert_eq!(code(&run(&["constant", "--generate", "cycle:6", "--R", "2"])), 3);
    // element budget
    assert_eq!(code(&run(&["growth", "--group", "free:2", "--rmax", "20", "--max-vertices", "100"])), 4);
    // missing file
    assert_eq!(code(&run(&["ball", "--graph", "/nonexistent/g.json", "--R", "1"])), 3);
    // unknown flag
    assert_eq!(code(&run(&["growth", "--bogus"])), 3);
    // degenerate host
    assert_eq!(code(&run(&["pipeline", "--generate", "path:1", "--seed", "1"])), 3);
    // unused bound parameter
    assert_eq!(code(&run(&["bound", "--kind", "graph-strong", "--H", "1", "--R", "1"])), 3);
}

#[test]
fn degenerate_pipeline_still_writes_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("partial.json");
    let out = run(&["pipeline", "--generate", "path:1", "--seed", "1", "-o", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["host"]["vertices"], 1);
    assert!(doc["summary"].is_null());
}

fn pipeline_to(path: &Path, threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poincarekit"))
        .args(["pipeline", "--generate", "grid:8x8", "--sigma", "1,2", "--seed", "5", "-o", path.to_str().unwrap()])
        .env("POINCAREKIT_THREADS", threads)
        .output()
        .unwrap()
}

#[test]
fn pipeline_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&pipeline_to(&a, "1")), 0);
    assert_eq!(code(&pipeline_to(&b, "2")), 0);
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    let doc: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["summary"]["regime_reachable"], false);
    assert_eq!(doc["summary"]["lemma_violations"], 0);
}

#[test]
fn net_checks_pass_on_a_grid() {
    let out = run(&["net", "--generate", "grid:12x12", "--epsilon", "2", "--L", "1,2,3", "--radii", "1,2,3"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["violations"], 0);
    assert_eq!(doc["multiplicity"].as_array().unwrap().len(), 3);
}

#[test]
fn delta_of_the_four_cycle() {
    let out = run(&["delta", "--generate", "cycle:4"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["delta"], 1.0);
    assert_eq!(doc["exact"], true);
}
