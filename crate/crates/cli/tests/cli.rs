use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().expect("workspace root")
}

fn stt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stt"))
        .args(args)
        .current_dir(root())
        .env("STT_PRELUDE", root().join("corpus/manifest.txt"))
        .output()
        .expect("run stt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_shapes_succeeds() {
    let o = stt(&["check", "corpus/shapes.stt"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn check_reports_boundary_violation() {
    let o = stt(&["check", "corpus/neg/boundary-mismatch.stt"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with("error corpus/neg/boundary-mismatch.stt:"), "{err}");
    assert!(lines[0].contains("BoundaryViolation"), "{err}");
}

#[test]
fn check_json_diagnostics() {
    let ok = stt(&["check", "--json", "corpus/hom.stt"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(ok.stderr.is_empty());

    let bad = stt(&["check", "--json", "corpus/neg/unbound-name.stt"]);
    assert_eq!(bad.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stderr(&bad).trim()).expect("json diagnostic");
    assert_eq!(v["category"], "UnboundName");
    assert!(v["line"].as_u64().is_some_and(|l| l >= 1));
}

#[test]
fn parse_errors_exit_two() {
    let o = stt(&["check", "corpus/neg/parse-error.stt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ParseError"));
}

#[test]
fn tope_valid_and_invalid() {
    let o = stt(&["tope", "--vars", "t,s", "--hyp", "s <= t /\\ t === 0", "--goal", "s === 0", "--oracle", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "VALID\nAGREE\n");

    let o = stt(&["tope", "--vars", "t,s", "--hyp", "TOP", "--goal", "s <= t"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "INVALID\n");
}

#[test]
fn tope_accepts_named_shapes() {
    let o = stt(&["tope", "--vars", "t,s", "--hyp", "Lambda21 <t, s>", "--goal", "Delta2 <t, s>"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "VALID\n");
}

#[test]
fn distinct_endpoints_flag() {
    let args = ["tope", "--hyp", "0 === 1", "--goal", "BOT"];
    assert_eq!(stdout(&stt(&args)), "VALID\n");
    let mut weak = args.to_vec();
    weak.push("--no-distinct-endpoints");
    assert_eq!(stdout(&stt(&weak)), "INVALID\n");
}

#[test]
fn normalize_in_file_scope() {
    let o = stt(&["normalize", "corpus/golden/compute.stt", "fg 1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "yg\n");
}

#[test]
fn pushout_product_of_vertex_and_boundary() {
    let o = stt(&["pushout-product", "t | t === 0 |- TOP", "s | s === 0 \\/ s === 1 |- TOP"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "t, s | (t === 0 /\\ TOP) \\/ (TOP /\\ (s === 0 \\/ s === 1)) |- TOP /\\ TOP\n");
}

#[test]
fn pushout_product_rejects_non_inclusion() {
    let o = stt(&["pushout-product", "t | TOP |- t === 0", "s | s === 0 |- TOP"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(stt(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(stt(&["tope", "--hyp", "TOP"]).status.code(), Some(3));
    assert_eq!(stt(&["--help"]).status.code(), Some(0));
    assert_eq!(stt(&["check", "does/not/exist.stt"]).status.code(), Some(3));
}

#[test]
fn corpus_run_reports_every_entry() {
    let o = stt(&["corpus", "run"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("golden/compute.stt"));
    assert!(out.contains("neg/duplicate.stt"));
}
