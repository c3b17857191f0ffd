use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_supersinglet"));
    c.env_remove("SUPERSINGLET_OUT_DIR");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn twice(args: &[&str]) -> Vec<u8> {
    let a = run(args);
    let b = run(args);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout, "output differs between runs of {args:?}");
    assert!(!a.stdout.is_empty());
    a.stdout
}

#[test]
fn subcommands_are_deterministic() {
    twice(&["verify-state", "--n-max", "4", "--directions", "10", "--samples", "3000", "--seed", "3"]);
    twice(&["corr-sweep", "--n-max", "4", "--angles", "5", "--seed", "8"]);
    twice(&["bell-table", "--grid", "12", "--large-n", "40", "--no-brute-force", "--format", "pretty"]);
    twice(&["detect-calibration", "--n", "4", "--trials", "300", "--k-max", "2", "--runs", "20", "--seed", "1"]);
    let path = config("secret_sharing_cheater.toml");
    twice(&["run-scenario", path.to_str().unwrap(), "--seed", "77"]);
}

#[test]
fn sequential_flag_changes_nothing() {
    let args = ["corr-sweep", "--n-max", "4", "--angles", "4", "--seed", "2"];
    let par = run(&args).stdout;
    let mut seq_args = vec!["--sequential"];
    seq_args.extend(args);
    assert_eq!(par, run(&seq_args).stdout);
}

#[test]
fn omitted_seed_is_printed() {
    let out = run(&["corr-sweep", "--n-max", "3", "--angles", "2", "--m", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: "));
}

#[test]
fn bundled_scenarios_exit_by_outcome() {
    let code = |name: &str| run(&["run-scenario", config(name).to_str().unwrap()]).status.code();
    assert_eq!(code("strangers_n5.toml"), Some(0));
    assert_eq!(code("secret_sharing_cheater.toml"), Some(2));
    assert_eq!(code("liar_dishonest_B.toml"), Some(5));
}

#[test]
fn strangers_transcript_ends_with_bijections() {
    let out = run(&["run-scenario", config("strangers_n5.toml").to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let verdicts: Vec<&str> = text.lines().filter(|l| l.contains("\"mapping")).collect();
    assert_eq!(verdicts.len(), 20);
    assert!(verdicts.iter().all(|l| l.contains("\"verdict\":\"bijective\"")));
    assert!(text.lines().last().unwrap().starts_with("{\"summary\""));
}

#[test]
fn config_errors_exit_4_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "scenario = \"strangers\"\nn = 3\nrounds = -4\n").unwrap();
    let out = run(&["run-scenario", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&bad, "scenario = \"strangers\"\nn = 3\nrounds = 10\nlength = 9\n").unwrap();
    assert_eq!(run(&["run-scenario", bad.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn intercepted_run_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("eve.toml");
    fs::write(&cfg, "scenario = \"strangers\"\nn = 3\nrounds = 100\nseed = 1\n[adversary]\nkind = \"intercept-resend\"\npolar = 0.8\n").unwrap();
    let out = run(&["run-scenario", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupted_state_fails_verification() {
    let args = ["verify-state", "--n-min", "3", "--n-max", "3", "--directions", "5", "--samples", "2000", "--seed", "1"];
    assert_eq!(run(&args).status.code(), Some(0));
    let mut corrupt = args.to_vec();
    corrupt.push("--corrupt-amplitude");
    assert_eq!(run(&corrupt).status.code(), Some(3));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("SUPERSINGLET_OUT_DIR", dir.path())
        .args(["corr-sweep", "--n-max", "3", "--angles", "3", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(dir.path().join("corr_sweep.csv")).unwrap();
    assert!(csv.starts_with("n,m,theta,closed_form,brute_force,abs_diff\n"));
}
