use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mbnoma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbnoma"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn header(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().next().unwrap_or_default().to_string()
}

#[test]
fn headers_are_exact() {
    let cases = [
        (
            vec!["sweep-antennas", "--trials", "2", "--ratio", "5"],
            "m1,m2,noma_sum_mean,noma_sum_stderr,tdma_sum_mean,tdma_sum_stderr,noma_asymptotic,tdma_asymptotic,superiority_threshold,feasible_fraction",
        ),
        (
            vec!["sweep-power", "--trials", "2"],
            "pmax_dbm,noma_sum_mean,baseline_sum_mean,tdma_sum_mean,predicted_gain",
        ),
        (vec!["beampattern"], "angle_deg,split_mag_db,full_mag_db"),
    ];
    for (args, expected) in cases {
        let out = mbnoma(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(header(&out), expected);
    }
}

#[test]
fn snapshot_commands_run() {
    let rates = mbnoma(&["rates", "--trials", "3", "--seed", "9"]);
    assert!(rates.status.success());
    assert_eq!(String::from_utf8_lossy(&rates.stdout).lines().count(), 4);
    let eff = mbnoma(&["effective", "--trials", "3", "--seed", "9"]);
    assert!(eff.status.success());
    // two users per drop
    assert_eq!(String::from_utf8_lossy(&eff.stdout).lines().count(), 7);
}

fn run_to(dir: &Path, name: &str, extra: &[&str]) -> (Vec<u8>, String) {
    let path = dir.join(name);
    let path_str = path.to_str().unwrap();
    let mut args = vec!["sweep-antennas", "--seed", "42", "--trials", "40", "--ratio", "10", "--out", path_str];
    args.extend_from_slice(extra);
    let out = mbnoma(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let meta = fs::read_to_string(format!("{path_str}.meta")).unwrap();
    (fs::read(&path).unwrap(), meta)
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (one, meta) = run_to(dir.path(), "one.csv", &["--threads", "1"]);
    let (eight, _) = run_to(dir.path(), "eight.csv", &["--threads", "8"]);
    assert_eq!(one, eight);
    assert!(meta.contains("seed = 42"));
    assert!(meta.contains("gain_ratio = 10"));
}

#[test]
fn meta_sidecar_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (first, _) = run_to(dir.path(), "a.csv", &[]);
    let meta = dir.path().join("a.csv.meta");
    let again = dir.path().join("b.csv");
    let out = mbnoma(&[
        "sweep-antennas",
        "--config",
        meta.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first, fs::read(again).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "no_such_key = 1\n").unwrap();
    let out = mbnoma(&["rates", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("missing.cfg");
    assert_eq!(mbnoma(&["rates", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(mbnoma(&["rates", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(mbnoma(&["sweep-antennas", "--bogus"]).status.code(), Some(2));
}

#[test]
fn infeasible_specs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("three.cfg");
    fs::write(&cfg, "num_users = 3\n").unwrap();
    let out = mbnoma(&["sweep-antennas", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(out.status.code(), Some(3));

    fs::write(&cfg, "m1_values = 0,64\n").unwrap();
    let out = mbnoma(&["sweep-antennas", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(out.status.code(), Some(3));
}
