//! Golden-file conformance for the `freenc` binary.
//!
//! Each directory under `tests/golden` holds `args` (one argument per line)
//! and optionally `stdin`; the expected `stdout`, `stderr` and exit `code`
//! sit next to them. Run with `UPDATE_GOLDEN=1` to rewrite the expectations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

struct Outcome {
    stdout: String,
    stderr: String,
    code: i32,
}

fn run_case(dir: &Path) -> Outcome {
    let args: Vec<String> = fs::read_to_string(dir.join("args"))
        .expect("every case has args")
        .lines()
        .map(str::to_string)
        .collect();
    let mut child = Command::new(env!("CARGO_BIN_EXE_freenc"))
        .args(&args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    let input = fs::read(dir.join("stdin")).unwrap_or_default();
    child.stdin.take().unwrap().write_all(&input).unwrap();
    let out = child.wait_with_output().unwrap();
    Outcome {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().expect("exited normally"),
    }
}

fn cases() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.join("args").exists())
        .collect();
    dirs.sort();
    dirs
}

#[test]
fn golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    let all = cases();
    assert!(!all.is_empty());
    for dir in &all {
        let got = run_case(dir);
        if update {
            fs::write(dir.join("stdout"), &got.stdout).unwrap();
            fs::write(dir.join("stderr"), &got.stderr).unwrap();
            fs::write(dir.join("code"), format!("{}\n", got.code)).unwrap();
            continue;
        }
        let read = |name: &str| fs::read_to_string(dir.join(name)).unwrap_or_default();
        let code: i32 = read("code").trim().parse().expect("expected code recorded");
        let name = dir.file_name().unwrap().to_string_lossy();
        if got.code != code {
            failures.push(format!("{name}: exit code {} != {code}\n{}", got.code, got.stderr));
        } else if got.stdout != read("stdout") {
            failures.push(format!("{name}: stdout differs\n{}", got.stdout));
        } else if got.stderr != read("stderr") {
            failures.push(format!("{name}: stderr differs\n{}", got.stderr));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}

/// The outputs are deterministic, including the seeded commands.
#[test]
fn repeated_runs_agree() {
    for dir in cases().iter().filter(|d| d.to_string_lossy().contains("identity") || d.to_string_lossy().contains("rho_m")) {
        let (a, b) = (run_case(dir), run_case(dir));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.code, b.code);
    }
}

#[test]
fn documented_exit_codes_are_covered() {
    let codes: Vec<i32> = cases()
        .iter()
        .map(|d| fs::read_to_string(d.join("code")).unwrap().trim().parse().unwrap())
        .collect();
    for code in 0..=3 {
        assert!(codes.contains(&code), "no golden case exits with {code}");
    }
}
