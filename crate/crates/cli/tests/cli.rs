//! End-to-end checks of the installed binary: output shape and exit codes.

use std::process::Command;

fn bspsort() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bspsort"))
}

#[test]
fn sort_success_prints_table() {
    let out = bspsort()
        .args([
            "sort", "--algo", "pr4", "--n", "10000", "--p", "4", "--seed", "42", "--reps", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PR4"));
    assert!(stdout.contains("10000"));
    assert!(!stdout.contains('\r'), "output must be LF-only");
}

#[test]
fn csv_format_has_schema_header() {
    let out = bspsort()
        .args([
            "sort",
            "--algo",
            "gsd",
            "--n",
            "4096",
            "--p",
            "4",
            "--seed",
            "7",
            "--reps",
            "1",
            "--format",
            "csv",
            "--dist",
            "duplicates-heavy",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with(
        "algo,n,p,rep,seed,wall_seconds,speedup,predicted_speedup,verified,max_bucket\n"
    ));
    let records = bspsort_cli::parse_csv(&stdout).unwrap();
    assert_eq!(records.len(), 1);
    assert!(records[0].verified);
}

#[test]
fn config_errors_exit_2() {
    // Network sort on a non-power-of-two team.
    let out = bspsort()
        .args([
            "sort", "--algo", "btn", "--n", "1000", "--p", "3", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Serial baseline on a team.
    let out = bspsort()
        .args([
            "sort", "--algo", "sr4", "--n", "1000", "--p", "4", "--seed", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // Unknown algorithm is a usage error.
    let out = bspsort()
        .args([
            "sort",
            "--algo",
            "quicksort",
            "--n",
            "10",
            "--p",
            "1",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    let out = bspsort()
        .args(["model", "--algo", "btn", "--n", "1000", "--p", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn n_aliases_accepted() {
    let out = bspsort()
        .args(["model", "--algo", "pr4", "--n", "8M", "--p", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("n=8192000"), "{stdout}");
}

#[test]
fn model_prints_term_breakdown() {
    let out = bspsort()
        .args(["model", "--algo", "pr4", "--n", "1000000", "--p", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("slow-memory"));
    assert!(stdout.contains("counter-exchange"));
    assert!(stdout.contains("22040960.0"), "{stdout}");
    assert!(stdout.contains("speedup-vs-sr4"));
}

#[test]
fn warmup_flag_recorded_in_run_banner() {
    let out = bspsort()
        .args([
            "sort", "--algo", "oet", "--n", "1000", "--p", "2", "--seed", "3", "--reps", "1",
            "--warmup", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("warmup=2"), "{stderr}");
}
