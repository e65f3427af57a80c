use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

const QUATERNION: &str = "p = 2\norders = 16 16 16 2 2 1\n";
const WILD: &str = "p = 3\norders = 3 3 3 3 1\n";
const TAME: &str = "p = 5\norders = 4 4 1\n";
const UNRAMIFIED: &str = "p = 5\norders = 2 1\n";

/// Writes `contents` to a fresh temporary file, removed on drop.
struct TempFile(PathBuf);

impl TempFile {
    fn new(contents: &str) -> Self {
        static NEXT: AtomicUsize = AtomicUsize::new(0);
        let n = NEXT.fetch_add(1, Ordering::Relaxed);
        let path = std::env::temp_dir().join(format!("herbrand-cli-{}-{n}.ext", std::process::id()));
        std::fs::write(&path, contents).unwrap();
        TempFile(path)
    }

    fn path(&self) -> &str {
        self.0.to_str().unwrap()
    }
}

impl Drop for TempFile {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.0);
    }
}

fn herbrand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_herbrand")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn frac(num: &str, den: &str) -> Value {
    serde_json::json!({ "num": num, "den": den })
}

#[test]
fn info_reports_quaternion_invariants() {
    let f = TempFile::new(QUATERNION);
    let v = json(&herbrand(&["info", f.path(), "--format", "json"]));
    assert_eq!(v["e"], frac("16", "1"));
    assert_eq!(v["largest_break"], frac("3", "1"));
    assert_eq!(v["a"], frac("17", "16"));
    assert_eq!(v["classification"], "wild");
}

#[test]
fn info_tame_and_unramified() {
    let f = TempFile::new(TAME);
    let v = json(&herbrand(&["info", f.path(), "--format", "json"]));
    assert_eq!(v["a"], frac("0", "1"));
    assert_eq!(v["classification"], "tame");

    let f = TempFile::new(UNRAMIFIED);
    let v = json(&herbrand(&["info", f.path(), "--format", "json"]));
    assert_eq!(v["largest_break"], frac("-1", "1"));
    assert_eq!(v["classification"], "unramified");
}

#[test]
fn phi_and_inverse() {
    let f = TempFile::new(QUATERNION);
    let v = json(&herbrand(&["phi", f.path(), "--at", "3,0", "--format", "json"]));
    assert_eq!(v["values"][0]["value"], frac("5", "4"));
    assert_eq!(v["values"][1]["value"], frac("0", "1"));
    let v = json(&herbrand(&["phi", f.path(), "--at", "5/4", "--inverse", "--format", "json"]));
    assert_eq!(v["function"], "psi");
    assert_eq!(v["values"][0]["value"], frac("3", "1"));
}

#[test]
fn depth_reports() {
    let f = TempFile::new(WILD);
    let v = json(&herbrand(&["depth", f.path(), "--chi", "2", "--format", "json"]));
    assert_eq!(v["lambda_depth"], frac("10", "3"));
    assert_eq!(v["ratio"], frac("5", "3"));

    let f = TempFile::new(TAME);
    let v = json(&herbrand(&["depth", f.path(), "--chi", "5", "--format", "json"]));
    assert_eq!(v["lambda_depth"], frac("5", "1"));
    let v = json(&herbrand(&["depth", f.path(), "--chi", "0", "--format", "json"]));
    assert_eq!(v["lambda_depth"], frac("0", "1"));
    assert!(v["ratio"].is_null());
}

#[test]
fn decimal_rendering_is_opt_in() {
    let f = TempFile::new(QUATERNION);
    let plain = stdout(&herbrand(&["depth", f.path(), "--chi", "1"]));
    assert!(plain.contains("33/16"), "{plain}");
    let rounded = stdout(&herbrand(&["depth", f.path(), "--chi", "1", "--decimal", "3"]));
    assert!(rounded.contains("2.063"), "{rounded}");
}

#[test]
fn sweep_wild_tail_and_tame() {
    let f = TempFile::new(WILD);
    let out = herbrand(&["sweep", f.path(), "--from", "1", "--to", "100", "--step", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    let rows: Vec<Vec<String>> =
        csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 100);
    // a = 4/3, b/e = 2/3: every row is in the tail.
    assert_eq!(rows[99][2], "76/75");
    let ratios: Vec<(i64, i64)> = rows
        .iter()
        .map(|r| {
            let (n, d) = r[2].split_once('/').unwrap_or((&r[2], "1"));
            (n.parse().unwrap(), d.parse().unwrap())
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[0].0 * w[1].1 > w[1].0 * w[0].1));

    let f = TempFile::new(TAME);
    let csv = stdout(&herbrand(&["sweep", f.path(), "--from", "1/2", "--to", "5", "--step", "1/2"]));
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2) == Some("1")));
}

#[test]
fn sweep_edges() {
    let f = TempFile::new(QUATERNION);
    let out = herbrand(&["sweep", f.path(), "--from", "5", "--to", "1", "--step", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "chi_depth,lambda_depth,ratio,gap\n");

    let csv = stdout(&herbrand(&["sweep", f.path(), "--from", "0", "--to", "1", "--step", "1/3"]));
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[1], "0,0,,0");
    assert_eq!(rows.len(), 5);
    // `to` is excluded when it is not on the grid.
    let csv = stdout(&herbrand(&["sweep", f.path(), "--from", "0", "--to", "1", "--step", "2/5"]));
    assert_eq!(csv.lines().last().unwrap().split(',').next(), Some("4/5"));
}

#[test]
fn check_passes_and_skips() {
    let f = TempFile::new(QUATERNION);
    let out = herbrand(&["check", f.path()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("FAIL"));

    let f = TempFile::new(UNRAMIFIED);
    let v = json(&herbrand(&["check", f.path(), "--format", "json"]));
    let skipped = v["checks"].as_array().unwrap().iter().filter(|c| c["outcome"] == "skipped").count();
    assert!(skipped >= 1);
    assert_eq!(v["all_pass"], true);
}

#[test]
fn check_flags_corrupted_expectation() {
    let f = TempFile::new("family = artin_schreier\nparam p = 3\nparam m = 2\nexpect a = 5/3\n");
    let out = herbrand(&["check", f.path()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL  catalog a"), "{text}");
    assert!(text.contains("expected 5/3, computed 4/3"), "{text}");
}

#[test]
fn catalog_commands() {
    let list = stdout(&herbrand(&["catalog", "list"]));
    assert_eq!(list.lines().count(), 5);

    let v = json(&herbrand(&["catalog", "show", "quaternion_serre", "--format", "json"]));
    assert_eq!(v["expected"]["a"]["value"], frac("17", "16"));
    assert_eq!(v["orders"].as_array().unwrap().len(), 6);
    assert!(!v["notes"].as_array().unwrap().is_empty());

    let v = json(&herbrand(&["catalog", "verify", "artin_schreier", "--params", "p=5,m=7", "--format", "json"]));
    assert_eq!(v["all_match"], true);
    assert_eq!(v["entries"][0]["entry"], "artin_schreier(m=7, p=5)");
}

#[test]
fn exit_codes() {
    let f = TempFile::new(QUATERNION);
    // usage errors
    assert_eq!(herbrand(&["info", f.path(), "--format", "csv"]).status.code(), Some(2));
    assert_eq!(herbrand(&["sweep", f.path(), "--from", "0", "--to", "1", "--step", "0"]).status.code(), Some(2));
    assert_eq!(herbrand(&["depth", f.path(), "--chi", "-1"]).status.code(), Some(2));
    assert_eq!(herbrand(&["phi", f.path(), "--at", "x"]).status.code(), Some(2));
    assert_eq!(herbrand(&["catalog", "show", "nope"]).status.code(), Some(2));
    assert_eq!(herbrand(&["bogus"]).status.code(), Some(2));
    // parse and validation errors
    let bad = TempFile::new("p = 2\norders = 16 16 16 2 2 1\nwhat = 3\n");
    let out = herbrand(&["info", bad.path()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:1:"));
    let invalid = TempFile::new("p = 3\norders = 6 6 1\n");
    assert_eq!(herbrand(&["info", invalid.path()]).status.code(), Some(3));
    assert_eq!(herbrand(&["info", "/nonexistent/file.ext"]).status.code(), Some(3));
}

#[test]
fn lenient_mode_accepts_order_only_filtrations() {
    let f = TempFile::new("p = 3\norders = 6 6 1\n");
    assert_eq!(herbrand(&["info", f.path()]).status.code(), Some(3));
    assert_eq!(herbrand(&["info", f.path(), "--lenient"]).status.code(), Some(0));
}

#[test]
fn json_input_is_detected() {
    let f = TempFile::new(r#"{"kind": "orders", "residue_char": 2, "orders": [16, 16, 16, 2, 2, 1]}"#);
    let v = json(&herbrand(&["info", f.path(), "--format", "json"]));
    assert_eq!(v["a"], frac("17", "16"));
}
