//! End-to-end tests of the compiled binary: session files, the gallery
//! shortcut, exit codes, and report determinism across processes.

use std::io::Write;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homascend"))
}

fn write_session(contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir();
    let path = dir.join(format!(
        "homascend-cli-test-{}-{}.hma",
        std::process::id(),
        contents.len()
    ));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

const SESSION: &str = "\
field q = rationals
field qi = extend q by t^2+1
algebra R = quotient q [X,Y] rels [] trunc 2
map phi = tensor_extension qi R as S
module N = present S cols 1 rels [[X + t*Y]]
cmd dagger phi
cmd flat phi
cmd extended phi N
";

#[test]
fn run_subcommand_produces_json_report() {
    let path = write_session(SESSION);
    let out = binary()
        .args([
            "run",
            path.to_str().unwrap(),
            "--format",
            "json",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["seed"], 5);
    assert_eq!(report["entries"][2]["result"]["extended"], false);
    std::fs::remove_file(path).ok();
}

#[test]
fn reports_are_identical_across_processes() {
    let path = write_session(SESSION);
    let run = || {
        binary()
            .args([
                "run",
                path.to_str().unwrap(),
                "--format",
                "json",
                "--seed",
                "9",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run(), run());
    std::fs::remove_file(path).ok();
}

#[test]
fn gallery_shortcut_works() {
    let out = binary()
        .args(["gallery", "2.11", "n=2", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let dims = &report["entries"][0]["result"]["GorensteinResidue"]["ext_dims_from_zero"];
    assert_eq!(dims[0], 1);
    assert_eq!(dims[1], 0);
}

#[test]
fn parse_errors_exit_with_code_two() {
    let path = write_session("algebra broken =\n");
    let out = binary()
        .args(["run", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse error"), "stderr was: {err}");
    std::fs::remove_file(path).ok();
}

#[test]
fn usage_without_arguments_exits_two() {
    let out = binary().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output() {
    let path = write_session(SESSION);
    let run = |threads: &str| {
        binary()
            .args(["run", path.to_str().unwrap(), "--format", "json"])
            .env("HOMASCEND_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
    std::fs::remove_file(path).ok();
}

#[test]
fn json_report_round_trips() {
    let path = write_session(SESSION);
    let out = binary()
        .args(["run", path.to_str().unwrap(), "--format", "json"])
        .output()
        .unwrap();
    let v1: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reserialized = serde_json::to_string(&v1).unwrap();
    let v2: serde_json::Value = serde_json::from_str(&reserialized).unwrap();
    assert_eq!(v1, v2);
    std::fs::remove_file(path).ok();
}

#[test]
fn bundled_sessions_run_clean() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap();
    for name in [
        "sessions/coefficient_extension.hma",
        "sessions/surjection_ascent.hma",
        "sessions/pid_completion.hma",
    ] {
        let path = root.join(name);
        let out = binary()
            .args(["run", path.to_str().unwrap(), "--format", "json"])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{name} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["incomplete"], false, "{name} incomplete");
    }
}

#[test]
fn timeout_flags_incomplete_and_exits_three() {
    let path = write_session(SESSION);
    let out = binary()
        .args([
            "run",
            path.to_str().unwrap(),
            "--format",
            "json",
            "--timeout",
            "0",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["incomplete"], true);
    std::fs::remove_file(path).ok();
}
