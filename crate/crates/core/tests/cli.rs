use std::process::{Command, Output};

use qubit_bandit::cli::OutputRecordSet;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubit-bandit"))
        .args(args)
        .env_remove("QUBIT_BANDIT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn single_run_writes_csv_to_stdout() {
    let out = run(&[
        "single", "--p1", "0.8", "--p2", "0.2", "--c", "0.1", "--horizon", "20", "--trials", "2",
        "--seed", "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body[0],
        "trial,step,p0_before,measured_bit,chosen_machine,reward,update_direction,update_magnitude,p0_after"
    );
    assert_eq!(body.len(), 1 + 40);
    assert!(text.contains("# seed = 3"));
    assert!(text.contains("#! summary.mean_regret = "));
}

#[test]
fn invalid_probability_is_a_one_line_error() {
    let out = run(&["single", "--p1", "1.5"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error["), "{err}");
    assert!(err.contains("p1"), "{err}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn usage_errors_fail_cleanly() {
    for args in [
        &["bogus"][..],
        &["single", "--horizon", "abc"],
        &["ghz", "--n", "4", "--constants", "0.01,0.02"],
        &["ghz", "--n", "4", "--constants", "0.02"],
    ] {
        let out = run(args);
        assert!(!out.status.success(), "{args:?}");
        let err = stderr(&out);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error["), "{args:?}: {err}");
    }
}

#[test]
fn help_succeeds() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ghz"));
}

#[test]
fn qrng_prints_bits_and_tests() {
    let out = run(&["qrng", "--count", "2000", "--p0", "0.5", "--seed", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let bits = lines.next().unwrap();
    assert_eq!(bits.len(), 2000);
    assert!(bits.chars().all(|c| c == '0' || c == '1'));
    assert!(text.contains("# frequency_test:"));
    assert!(text.contains("# chi_square_pairs_test:"));
}

#[test]
fn replay_from_emitted_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let out = run(&[
        "ghz", "--n", "5", "--constants", "0.05,0.03,0.01", "--p1", "0.7", "--p2", "0.3",
        "--horizon", "50", "--trials", "3", "--seed", "18446744073709551615", "--out",
        first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let original = std::fs::read(&first).unwrap();

    let replay = dir.path().join("replay.csv");
    let out = run(&[
        "ghz", "--config", first.to_str().unwrap(), "--out", replay.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read(&replay).unwrap(), original);

    let json = dir.path().join("first.json");
    let out = run(&[
        "ghz", "--config", first.to_str().unwrap(), "--format", "json", "--out",
        json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let set = OutputRecordSet::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(set.metadata.root_seed, u64::MAX);
    assert_eq!(set.rows.len(), 150);

    let from_json = dir.path().join("from_json.csv");
    let out = run(&[
        "ghz", "--config", json.to_str().unwrap(), "--out", from_json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(std::fs::read(&from_json).unwrap(), original);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qubit-bandit"))
        .args(["duo-conflict", "--horizon", "10", "--seed", "9", "--format", "json"])
        .env("QUBIT_BANDIT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("duo_conflict_seed9.json").exists());
}

#[test]
fn config_scenario_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("single.toml");
    std::fs::write(&path, "scenario = \"single_agent\"\nhorizon = 5\n").unwrap();
    let out = run(&["coop", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("error["));
}
