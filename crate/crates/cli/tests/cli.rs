//! End-to-end runs of the binary against the shipped corpus.

use std::path::PathBuf;
use std::process::Command;

fn corpus(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name);
    root.to_string_lossy().into_owned()
}

fn ksw(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ksw"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn transfer_on_corpus_space() {
    let (code, stdout, _) = ksw(&["transfer", "--space", &corpus("space_sqrt2_rank3.json")]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("PASS transfer/dim"));
}

#[test]
fn classify_corpus_period() {
    let (code, stdout, _) = ksw(&["classify", "--period", &corpus("period_rank3.json")]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("classify"));
}

#[test]
fn invalid_period_exits_two() {
    let (code, _, stderr) = ksw(&[
        "classify",
        "--period",
        &corpus("invalid/bad_isotropy.json"),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("omega"));
}

#[test]
fn malformed_json_exits_two() {
    let dir = std::env::temp_dir().join("ksw_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let (code, _, stderr) = ksw(&["classify", "--period", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("malformed"));
}

#[test]
fn check_suite_deterministic_reports() {
    let run = || {
        let (code, stdout, _) = ksw(&[
            "check",
            "--suite",
            "scalars",
            "--seed",
            "0",
            "--format",
            "json",
        ]);
        assert_eq!(code, 0, "{}", stdout);
        stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "reports must be byte-identical for equal seeds");
}

#[test]
fn norm_subcommand_on_module() {
    let (code, stdout, _) = ksw(&["norm", "--module", &corpus("module_sqrt2_rank2.json")]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("norm/dimension-law"));
}

#[test]
fn so4_split_check() {
    let (code, stdout, _) = ksw(&[
        "so4",
        "--space",
        &corpus("space_det_form_q.json"),
        "--check",
        "split",
    ]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("PASS so4/ideals"));
}

#[test]
fn rep_doubling_check() {
    let (code, stdout, _) = ksw(&[
        "rep",
        "--check",
        "doubling",
        "--in",
        &corpus("space_rank2_q.json"),
    ]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("PASS rep/doubling-iso"));
}

#[test]
fn ks_with_verify_and_double() {
    let (code, stdout, _) = ksw(&[
        "ks",
        "--period",
        &corpus("period_rank3.json"),
        "--verify-u",
        "--double",
    ]);
    assert_eq!(code, 0, "{}", stdout);
    assert!(stdout.contains("PASS ks/verify-u"));
    assert!(stdout.contains("PASS ks/double"));
}
