mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn neuroterm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neuroterm"))
        .args(args)
        .current_dir(cwd)
        .env_remove("NEUROTERM_SOLVER")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn suite(name: &str) -> String {
    common::suite_file(name).to_string_lossy().into_owned()
}

#[test]
fn help_and_version() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&neuroterm(&["--help"], dir.path())), 0);
    assert_eq!(code(&neuroterm(&["--version"], dir.path())), 0);
    assert_eq!(code(&neuroterm(&["analyze", "--help"], dir.path())), 0);
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&neuroterm(&[], dir.path())), 6);
    assert_eq!(code(&neuroterm(&["analyze"], dir.path())), 6);
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown"), "--strategy", "sobol"], dir.path())), 6);
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown"), "--lr", "-1"], dir.path())), 6);
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown"), "--samples", "0"], dir.path())), 6);
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = neuroterm(&["analyze", "no_such_file.nt"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_file.nt"));
}

#[test]
fn parse_error_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.nt"), "fn f(x){\n  while x > 0 { }\n}\n").unwrap();
    let o = neuroterm(&["analyze", "bad.nt"], dir.path());
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_solver_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = neuroterm(&["analyze", &suite("countdown"), "--solver", "definitely-not-a-solver-binary"], dir.path());
    assert_eq!(code(&o), 5);
    assert!(!String::from_utf8_lossy(&o.stdout).contains("TERMINATING"));
}

#[test]
fn loop_free_needs_no_solver() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("flat.nt"), "fn f(x){ var y = x + 1; if (y > 0) { x = 0; } }").unwrap();
    let o = neuroterm(&["analyze", "flat.nt", "--solver", "definitely-not-a-solver-binary"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("TERMINATING\n"));
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = neuroterm(&["bench", "."], dir.path());
    assert_eq!(code(&o), 0);
}

#[test]
fn config_file_is_read_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("neuroterm.cfg"), "solver = definitely-not-a-solver-binary\n").unwrap();
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown")], dir.path())), 5);
    fs::write(dir.path().join("neuroterm.cfg"), "hidden = lots\n").unwrap();
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown")], dir.path())), 6);
    fs::write(dir.path().join("other.cfg"), "colour = blue\n").unwrap();
    assert_eq!(code(&neuroterm(&["--config", "other.cfg", "analyze", &suite("countdown")], dir.path())), 6);
}

#[test]
fn analyze_and_check_round_trip() {
    if !common::z3_available() {
        eprintln!("skipped: z3 not found");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = neuroterm(
        &["analyze", &suite("countdown"), "--dump-model", "model.txt", "--dump-cfg", "--out", "vc"],
        dir.path(),
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(code(&o), 0, "{stdout}");
    assert!(stdout.starts_with("TERMINATING\n"));
    assert!(dir.path().join("vc/vc_0.smt2").is_file());
    assert!(dir.path().join("vc/vc_bounded.smt2").is_file());
    let dot = fs::read_to_string(dir.path().join("vc/cfg.dot")).unwrap();
    assert!(dot.contains(" -> "));
    let model = fs::read_to_string(dir.path().join("model.txt")).unwrap();
    assert!(model.starts_with("1 1 5 "), "{model}");

    let o = neuroterm(&["check", &suite("countdown"), "--model", "model.txt"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    // A certificate for another program does not fit.
    let o = neuroterm(&["check", &suite("sor_two_phase"), "--model", "model.txt"], dir.path());
    assert_eq!(code(&o), 6);
    // Increasing programs are rejected.
    fs::write(dir.path().join("up.nt"), "fn up(x){ while (x > 0) { x = x + 1; } }").unwrap();
    let o = neuroterm(&["check", "up.nt", "--model", "model.txt"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn default_out_directory() {
    if !common::z3_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&neuroterm(&["analyze", &suite("countdown")], dir.path())), 0);
    assert!(dir.path().join("out/vc_0.smt2").is_file());
}

#[test]
fn limit_example_is_not_terminating_without_proof() {
    if !common::z3_available() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let o = neuroterm(&["analyze", &suite("insufficient_data")], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("UNKNOWN\n"));
}
