//! End-to-end tests of the `pdfm` binary: exit codes, output formats,
//! seed handling, and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pdfm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdfm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn pdfm_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdfm"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

/// Writes the square family and the three-diagram flat family.
struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        write(&root.join("red.json"), r#"{"points": [[1.0, 4.0], [3.0, 6.0]]}"#);
        write(&root.join("black.json"), r#"{"points": [[1.0, 6.0], [3.0, 4.0]]}"#);
        let sq = root.join("square");
        fs::create_dir(&sq).unwrap();
        fs::copy(root.join("red.json"), sq.join("red.json")).unwrap();
        fs::copy(root.join("black.json"), sq.join("black.json")).unwrap();
        let flat = root.join("flat");
        fs::create_dir(&flat).unwrap();
        write(&flat.join("a.json"), r#"{"points": [[0.0, 10.0]]}"#);
        write(&flat.join("b.json"), r#"{"points": [[1.0, 10.0]]}"#);
        write(&flat.join("c.json"), r#"{"points": [[0.0, 11.0]]}"#);
        Fixture { dir }
    }

    fn path(&self, rel: &str) -> String {
        self.dir.path().join(rel).display().to_string()
    }
}

#[test]
fn dist_of_a_diagram_with_itself_prints_zero() {
    let fx = Fixture::new();
    let out = pdfm(&["dist", &fx.path("red.json"), &fx.path("red.json")]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn dist_prints_the_distance_and_json_carries_the_matching() {
    let fx = Fixture::new();
    let out = pdfm(&["dist", &fx.path("red.json"), &fx.path("black.json")]);
    assert!(out.status.success());
    let printed: f64 = stdout(&out).trim().parse().unwrap();
    assert!((printed - 8.0_f64.sqrt()).abs() < 1e-12);

    let out = pdfm(&["dist", &fx.path("red.json"), &fx.path("black.json"), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["cost"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert!((v["distance"].as_f64().unwrap().powi(2) - 8.0).abs() < 1e-12);
    assert_eq!(v["matching"]["pairs"].as_array().unwrap().len(), 2);
    assert!(v["manifest"]["input_digests"].as_array().unwrap().len() == 2);
    assert!(v["manifest"]["timestamp"].is_string());
}

#[test]
fn dist_oracle_counts_tied_optima_and_writes_the_matching_file() {
    let fx = Fixture::new();
    let matching_path = fx.path("matching.json");
    let out = pdfm(&[
        "dist",
        &fx.path("red.json"),
        &fx.path("black.json"),
        "--oracle",
        "--matching",
        &matching_path,
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("optima: 2"));
    let v: Value = serde_json::from_str(&fs::read_to_string(&matching_path).unwrap()).unwrap();
    assert!((v["cost"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert!(v["manifest"]["tool_version"].is_string());
}

#[test]
fn flatness_square_reports_not_flat_with_exit_zero() {
    let fx = Fixture::new();
    let out = pdfm(&["flatness", &fx.path("square")]);
    assert!(out.status.success(), "exit: {:?}", out.status);
    assert!(stdout(&out).contains("flat: false"));
}

#[test]
fn flatness_emits_a_grouping_that_variance_accepts() {
    let fx = Fixture::new();
    let g_path = fx.path("g.json");
    let out = pdfm(&["flatness", &fx.path("flat"), "--emit-grouping", &g_path]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("flat: true"));
    assert!(stdout(&out).contains("witness lambda:"));

    let out = pdfm(&["variance", &g_path, "--diagrams", &fx.path("flat"), "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let variance = v["variance"].as_f64().unwrap();
    assert!((variance - 4.0 / 9.0).abs() < 1e-12);
    assert!(
        (v["definitional"].as_f64().unwrap() - v["closed_form"].as_f64().unwrap()).abs() < 1e-9
    );
}

#[test]
fn mean_turner_and_brute_agree_and_out_file_holds_the_certificate() {
    let fx = Fixture::new();
    let out_path = fx.path("mean.json");
    let out = pdfm(&["mean", &fx.path("flat"), "--out", &out_path]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("certified unique: true"));

    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    for key in ["mean", "grouping", "variance", "certificate", "manifest"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["certificate"]["flat"], Value::Bool(true));
    let mean_pts = v["mean"]["points"].as_array().unwrap();
    assert_eq!(mean_pts.len(), 1);
    assert!((mean_pts[0][0].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);

    let out = pdfm(&["mean", &fx.path("flat"), "--algorithm", "brute", "--json"]);
    assert!(out.status.success());
    let b: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(b["optima_count"], 1);
    assert_eq!(b["mean"]["points"], v["mean"]["points"]);
}

#[test]
fn mean_random_init_requires_or_generates_a_seed() {
    let fx = Fixture::new();
    // Explicit seed: reproducible, nothing auto-generated on stderr.
    let a = pdfm(&["mean", &fx.path("flat"), "--init", "random", "--seed", "7"]);
    assert!(a.status.success());
    assert!(!stderr(&a).contains("seed:"));
    // No seed: one is generated and printed.
    let b = pdfm(&["mean", &fx.path("flat"), "--init", "random"]);
    assert!(b.status.success());
    assert!(stderr(&b).contains("seed:"));
}

#[test]
fn brute_mean_refuses_beyond_the_cap_with_exit_one() {
    let fx = Fixture::new();
    let big = fx.dir.path().join("big");
    fs::create_dir(&big).unwrap();
    // Two diagrams with six points each: 12 pooled points, over the cap.
    let coords: Vec<String> = (0..6).map(|i| format!("[{i}.0, {}.5]", i + 20)).collect();
    let body = format!("{{\"points\": [{}]}}", coords.join(", "));
    write(&big.join("a.json"), &body);
    let coords: Vec<String> = (0..6).map(|i| format!("[{i}.25, {}.75]", i + 20)).collect();
    let body = format!("{{\"points\": [{}]}}", coords.join(", "));
    write(&big.join("b.json"), &body);

    let out = pdfm(&["mean", &big.display().to_string(), "--algorithm", "brute"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("PDFM_BRUTE_CAP"), "stderr: {}", stderr(&out));

    // Raising the cap through the environment lets the same run through.
    let out = pdfm_env(
        &["mean", &big.display().to_string(), "--algorithm", "brute"],
        "PDFM_BRUTE_CAP",
        "12",
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
}

#[test]
fn converge_is_byte_identical_for_equal_seeds() {
    let fx = Fixture::new();
    let r1 = fx.path("r1.csv");
    let r2 = fx.path("r2.csv");
    for path in [&r1, &r2] {
        let out = pdfm(&[
            "converge",
            &fx.path("flat"),
            "--B",
            "1,2,4",
            "--trials",
            "100",
            "--seed",
            "42",
            "--out",
            path,
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let c1 = fs::read(&r1).unwrap();
    let c2 = fs::read(&r2).unwrap();
    assert_eq!(c1, c2);
    let text = String::from_utf8(c1).unwrap();
    assert!(text.starts_with("B,trials,estimate,std_error,bound,seed\n"));
    assert_eq!(text.lines().count(), 4);
    // Manifest sidecar sits next to the CSV.
    let sidecar = fx.path("r1.manifest.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(v["seed"], 42);
}

#[test]
fn converge_without_seed_generates_and_prints_one() {
    let fx = Fixture::new();
    let out = pdfm(&["converge", &fx.path("flat"), "--B", "1,2", "--trials", "10"]);
    assert!(out.status.success());
    let err = stderr(&out);
    assert!(err.contains("seed:"), "stderr: {err}");
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    // The printed seed appears in the CSV rows.
    let body = stdout(&out);
    for line in body.lines().skip(1) {
        assert!(line.ends_with(&format!(",{seed}")), "line: {line}");
    }
}

#[test]
fn converge_json_reports_the_rate_fit() {
    let fx = Fixture::new();
    let out = pdfm(&[
        "converge",
        &fx.path("flat"),
        "--B",
        "1,2,4,8",
        "--trials",
        "200",
        "--seed",
        "11",
        "--json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
    let slope = v["rate"]["slope"].as_f64().unwrap();
    assert!(slope < -0.5, "slope {slope}");
    assert_eq!(v["manifest"]["seed"], 11);
}

#[test]
fn hugging_and_barycheck_emit_lhs_rhs_residual() {
    let fx = Fixture::new();
    let weights = fx.path("w.json");
    write(Path::new(&weights), "[0.5, 0.25, 0.25]");
    let out = pdfm(&["hugging", &fx.path("flat"), "--y", &weights, "--json"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["residual"].as_f64().unwrap().abs() < 1e-9);
    assert!((v["lhs"].as_f64().unwrap() - v["rhs"].as_f64().unwrap()).abs() < 1e-9);
    for k in v["kappa"].as_array().unwrap() {
        assert!((k.as_f64().unwrap() - 1.0).abs() < 1e-9);
    }

    // Candidate = the certified mean: the barycenter sum vanishes.
    let mean_path = fx.path("mean_only.json");
    let out = pdfm(&["mean", &fx.path("flat"), "--json"]);
    let m: Value = serde_json::from_str(&stdout(&out)).unwrap();
    write(Path::new(&mean_path), &m["mean"].to_string());
    let out = pdfm(&["barycheck", &fx.path("flat"), "--candidate", &mean_path, "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["lhs"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["rhs"].as_f64().unwrap(), 0.0);

    // Candidate = a family member: strictly positive.
    let out = pdfm(&[
        "barycheck",
        &fx.path("flat"),
        "--candidate",
        &fx.path("flat/a.json"),
        "--json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["residual"].as_f64().unwrap() > 1e-6);
}

#[test]
fn oracle_handles_both_pair_and_directory_forms() {
    let fx = Fixture::new();
    let out = pdfm(&["oracle", &fx.path("red.json"), &fx.path("black.json")]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("optima: 2"));

    let out = pdfm(&["oracle", &fx.path("square"), "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["optima_count"], 2);
    assert!((v["variance"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    // One path that is not a directory is a validation error.
    let out = pdfm(&["oracle", &fx.path("red.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let out = pdfm(&["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stderr(&out).is_empty());

    let out = pdfm(&["dist"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pdfm(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_one() {
    let fx = Fixture::new();
    // Missing file.
    let out = pdfm(&["dist", &fx.path("missing.json"), &fx.path("red.json")]);
    assert_eq!(out.status.code(), Some(1));
    // Malformed diagram: death below birth.
    let bad = fx.path("bad.json");
    write(Path::new(&bad), r#"{"points": [[5.0, 1.0]]}"#);
    let out = pdfm(&["dist", &bad, &fx.path("red.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stderr(&out).is_empty());
    // Empty directory.
    let empty = fx.dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = pdfm(&["mean", &empty.display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
}
