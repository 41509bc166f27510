use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use stabex_core::category::AdditiveCategory;
use stabex_core::instances::FreeModules;
use stabex_core::matrix::Matrix;

fn stabex(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stabex"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("STABEX_THREADS", n.to_string()),
        None => cmd.env_remove("STABEX_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = stabex(args, None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect();
    std::fs::read_to_string(path).unwrap()
}

fn jsonl(s: &str) -> Vec<Value> {
    s.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn classification_matches_the_golden_corpus_for_any_thread_count() {
    let expected = golden("classify_zmod6_bound1.jsonl");
    let args = ["classify", "--instance", "zmod:6", "--bound", "1"];
    for threads in [None, Some(1), Some(4), Some(1)] {
        let out = stabex(&args, threads);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "threads {threads:?}");
    }
}

#[test]
fn corpus_header_echoes_the_configuration() {
    let lines = jsonl(&golden("classify_zmod6_bound1.jsonl"));
    let header = &lines[0];
    assert_eq!(header["schema"], "stabex.corpus/1");
    assert_eq!(header["config"]["instance"], "zmod:6");
    assert_eq!(header["config"]["bound"], 1);
    assert_eq!(header["config"]["seed"], 0);
    assert_eq!(header["records"], lines.len() - 1);
    for r in &lines[1..] {
        assert_eq!(r["instance"], "zmod:6");
        assert!(r["witness"].is_null() || r["verdict"] == "not-stable");
    }
}

#[test]
fn bound_zero_classifies_the_zero_sequence() {
    let lines = jsonl(&ok(&["classify", "--instance", "zmod:6", "--bound", "0"]));
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["verdict"], "stable");
    assert_eq!(lines[1]["d"]["payload"], Value::Array(vec![]));
}

/// Every pair over a field is stable, and every cokernel has a section found
/// by enumeration.
#[test]
fn field_pairs_are_stable_and_split() {
    let cat = FreeModules::over(2).unwrap();
    let lines = jsonl(&ok(&["classify", "--instance", "zmod:2", "--bound", "2"]));
    assert!(lines.len() > 10);
    for r in &lines[1..] {
        assert_eq!(r["verdict"], "stable");
        let (b, c) = (r["d"]["dom"].as_u64().unwrap() as usize, r["d"]["cod"].as_u64().unwrap() as usize);
        let entries: Vec<i64> = r["d"]["payload"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap()).collect();
        let d = Matrix::from_vec(cat.ring_spec(), c, b, entries).unwrap();
        let one = cat.identity(&c);
        assert!(cat.enumerate_homs(&c, &b).unwrap().iter().any(|s| d.mul(s).unwrap() == one));
    }
}

#[test]
fn malformed_descriptor_is_a_usage_error_with_a_position() {
    let out = stabex(&["axioms", "--instance", "zmod:", "--bound", "1"], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("position 5"), "{err}");
    assert!(out.stdout.is_empty());

    let out = stabex(&["classify", "--instance", "pairs:4", "--bound", "1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = stabex(&["classify", "--instance", "zmod:6"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = stabex(&["karoubi", "--instance", "pairs:2", "--bound", "1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = stabex(&["chain", "--instance", "zmod:2", "--bound", "1", "--sample", "2"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = stabex(&["classify", "--instance", "zmod:2", "--bound", "1"], Some(0));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn axiom_suites_pass() {
    let r: Value =
        serde_json::from_str(&ok(&["axioms", "--instance", "pairs:2", "--bound", "2", "--class", "split"])).unwrap();
    assert_eq!(r["schema"], "stabex.report/1");
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["class"], "split");
    assert_eq!(r["payload"]["axioms"].as_array().unwrap().len(), 8);

    let r: Value = serde_json::from_str(&ok(&[
        "axioms",
        "--instance",
        "zmod:6",
        "--bound",
        "2",
        "--oracle-bound",
        "1",
        "--class",
        "stable",
    ]))
    .unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["oracle_bound"], 1);
}

#[test]
fn karoubi_report_agrees_and_lists_the_missing_summands() {
    let r: Value = serde_json::from_str(&ok(&["karoubi", "--instance", "zmod:6", "--bound", "2"])).unwrap();
    let p = &r["payload"];
    assert_eq!(r["passed"], true);
    assert_eq!(p["transfer"]["agreements"], p["transfer"]["cokernels"]);
    assert!(p["transfer"]["cokernels"].as_u64().unwrap() > 0);
    let outside: Vec<&str> =
        p["census"]["outside"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert!(outside.contains(&"(R,3)"));
    assert!(outside.contains(&"(R,4)"));
    assert_eq!(p["unsplit_idempotents"], 0);
    assert_eq!(p["fully_faithful"]["mismatches"], 0);
    assert!(p["closure_violation"].is_string());
}

#[test]
fn chain_report_over_pairs_agrees() {
    let r: Value =
        serde_json::from_str(&ok(&["chain", "--instance", "pairs:2", "--degrees", "2", "--bound", "2"])).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["payload"]["agreements"], r["payload"]["cases"]);
    assert_eq!(r["payload"]["length"], 2);
}

#[test]
fn length_one_spectra_reproduce_the_base_classification() {
    let s: Value =
        serde_json::from_str(&ok(&["spectra", "--instance", "zmod:6", "--length", "1", "--bound", "1"])).unwrap();
    let base = jsonl(&ok(&["classify", "--instance", "zmod:6", "--bound", "1"]));
    let records = s["payload"]["records"].as_array().unwrap();
    assert_eq!(records.len(), base.len() - 1);
    for (r, b) in records.iter().zip(&base[1..]) {
        assert_eq!(r["i"][0], b["i"]);
        assert_eq!(r["d"][0], b["d"]);
        assert_eq!(r["diagram"], b["verdict"]);
        assert_eq!(r["index"], b["index"]);
    }
}

#[test]
fn persisted_spectrum_report_is_reproduced() {
    let out = ok(&["spectra", "--instance", "zmod:6", "--length", "2", "--bound", "1"]);
    assert_eq!(out, golden("spectra_zmod6_length2_bound1.json"));
}

#[test]
fn sampling_is_seeded_and_echoed() {
    let args = ["classify", "--instance", "zmod:6", "--bound", "2", "--oracle-bound", "1", "--sample", "5", "--seed", "11"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let lines = jsonl(&a);
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0]["config"]["seed"], 11);
    assert_eq!(lines[0]["config"]["sample"], 5);
    let idx: Vec<u64> = lines[1..].iter().map(|r| r["index"].as_u64().unwrap()).collect();
    assert!(idx.windows(2).all(|w| w[0] < w[1]));
    let other = ok(&["classify", "--instance", "zmod:6", "--bound", "2", "--oracle-bound", "1", "--sample", "5", "--seed", "12"]);
    assert_ne!(a, other);
}

#[test]
fn out_writes_the_file_and_keeps_stdout_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corpus.jsonl");
    let out = stabex(&["classify", "--instance", "zmod:6", "--bound", "1", "--out", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), golden("classify_zmod6_bound1.jsonl"));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("pass: "));
}
