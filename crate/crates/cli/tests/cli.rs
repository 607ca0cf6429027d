//! End-to-end checks of the binary: exit codes, output files, and
//! worker-count reproducibility through the environment variable.

use std::path::Path;
use std::process::{Command, Output};

fn rmtlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmtlab"))
}

fn run(args: &[&str]) -> Output {
    rmtlab().args(args).output().expect("binary runs")
}

#[test]
fn usage_error_exits_one() {
    let out = run(&["identity", "--n", "4"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_trials_is_a_usage_error() {
    let out = run(&[
        "identity", "--n", "4", "--l", "4", "--N", "10", "--trials", "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn io_error_exits_three() {
    let out = run(&[
        "weingarten",
        "table",
        "--k",
        "2",
        "--m",
        "6",
        "--out",
        "/nonexistent-dir/wg.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_check_exits_two() {
    let out = run(&[
        "identity", "--n", "4", "--l", "4", "--N", "10", "--trials", "200", "--seed", "1",
        "--check", "ks<=0.000001",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("check FAILED"), "stdout: {stdout}");
}

#[test]
fn passing_check_exits_zero() {
    let out = run(&[
        "identity", "--n", "4", "--l", "4", "--N", "10", "--trials", "200", "--seed", "1",
        "--check", "ks<=1.0",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn weingarten_table_dump_has_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wg.csv");
    let out = run(&[
        "weingarten",
        "table",
        "--k",
        "2",
        "--m",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "matching_a,matching_b,loops,reduced_coset_type,value"
    );
    assert_eq!(text.lines().count(), 1 + 9);
    assert!(text.contains("(1,2)(3,4),(1,2)(3,4),2,(),0.029166666666666667"));
    assert!(text.contains("(1,2)(3,4),(1,3)(2,4),1,(1),-0.004166666666666667"));
}

#[test]
fn clt_runs_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("cfg.json");
    let out_path = dir.path().join("out.jsonl");
    std::fs::write(
        &config_path,
        format!(
            r#"{{"kind":"clt","n":3,"N":20,"truncations":2,"trials":100,"master_seed":5,
                "output_path":"{}"}}"#,
            out_path.display()
        ),
    )
    .unwrap();
    let out = run(&[
        "clt",
        "--config",
        config_path.to_str().unwrap(),
        "--check",
        "ks<=0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out_path.exists());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("cfg.json");
    std::fs::write(&config_path, "{not json").unwrap();
    let out = run(&["clt", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tails_reports_bounds() {
    let out = run(&[
        "tails", "--alpha", "2", "--beta", "2", "--trials", "2000", "--eps", "0.1,0.2",
        "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("bound[0.1]"), "stdout: {stdout}");
    assert!(stdout.contains("empirical[0.2]"), "stdout: {stdout}");
}

#[test]
fn lyapunov_modes_run() {
    for mode in ["qr-accumulate", "svd-rescale"] {
        let out = run(&[
            "lyapunov", "--n", "3", "--l", "2", "--N", "50", "--trials", "20", "--mode", mode,
            "--seed", "2",
        ]);
        assert_eq!(out.status.code(), Some(0), "mode {mode}");
    }
    let out = run(&[
        "lyapunov", "--n", "3", "--l", "2", "--N", "50", "--trials", "20", "--mode", "bogus",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

fn run_with_workers(workers: &str, out_path: &Path, seed: &str) -> Output {
    rmtlab()
        .env("RMTLAB_WORKERS", workers)
        .args([
            "lyapunov", "--n", "4", "--l", "4", "--N", "100", "--trials", "200",
            "--seed", seed, "--out",
        ])
        .arg(out_path)
        .output()
        .expect("binary runs")
}

#[test]
fn per_trial_csv_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path_one = dir.path().join("w1.csv");
    let path_four = dir.path().join("w4.csv");
    assert_eq!(run_with_workers("1", &path_one, "42").status.code(), Some(0));
    assert_eq!(run_with_workers("4", &path_four, "42").status.code(), Some(0));
    let one = std::fs::read(&path_one).unwrap();
    let four = std::fs::read(&path_four).unwrap();
    assert!(!one.is_empty());
    assert_eq!(one, four);
}
