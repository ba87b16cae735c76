use std::process::Command;

fn exprk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_exprk")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn verify_passes_for_catalog_methods() {
    let (code, stdout, _) = exprk(&["verify", "expRK4s6", "expRK5s10"]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(stdout.matches("all claims verified").count(), 2);
}

#[test]
fn verify_detects_corrupted_weight() {
    let (code, stdout, _) = exprk(&["verify", "--corrupt", "expRK4s6"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL"));
}

#[test]
fn unknown_names_are_usage_errors() {
    assert_eq!(exprk(&["verify", "expRK9s1"]).0, 2);
    assert_eq!(exprk(&["work-table", "nope"]).0, 2);
    assert_eq!(exprk(&["run", "--problem", "nope"]).0, 2);
    assert_eq!(exprk(&["frobnicate"]).0, 2);
}

#[test]
fn work_table_lists_batches() {
    let (code, stdout, _) = exprk(&["work-table", "expRK4s6", "expRK5s8"]);
    assert_eq!(code, 0);
    let fields = |m: &str| -> Vec<String> {
        stdout.lines().find(|l| l.starts_with(m)).unwrap().split_whitespace().take(3).map(String::from).collect()
    };
    assert_eq!(fields("expRK4s6"), ["expRK4s6", "6", "4"]);
    assert_eq!(fields("expRK5s8"), ["expRK5s8", "8", "11"]);
}

#[test]
fn small_run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    let (code, stdout, stderr) = exprk(&[
        "run",
        "--preset",
        "example1",
        "--size",
        "31",
        "--methods",
        "expRK4s6,expRK5s10",
        "--steps",
        "4,8,16",
        "--dense-oracle",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}\n{stderr}");
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,N,error,seconds,engine_calls"));
    assert_eq!(lines.count(), 6);
    assert!(out.join("convergence.svg").exists());
    assert!(out.join("convergence.gp").exists());
}

#[test]
fn cache_build_list_clear() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let (code, stdout, stderr) =
        exprk(&["cache", "--dir", d, "build", "--problem", "nls1d", "--size", "16", "--tfinal", "0.1", "--finest", "8"]);
    assert_eq!(code, 0, "{stdout}\n{stderr}");
    let (code, stdout, _) = exprk(&["cache", "--dir", d, "list"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("1 entries"), "{stdout}");
    let (code, stdout, _) = exprk(&["cache", "--dir", d, "clear"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("removed 1"));
}

#[test]
fn unwritable_output_is_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let (code, _, stderr) = exprk(&[
        "run",
        "--preset",
        "example1",
        "--size",
        "15",
        "--methods",
        "expRK4s6",
        "--steps",
        "2,4",
        "--dense-oracle",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{stderr}");
}
