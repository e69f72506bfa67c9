use std::fs;
use std::path::Path;
use std::process::Command;

use pme_mixer::cli::{run_experiment, ExperimentConfig, ExperimentKind};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pme-mixer"));
    c.env_remove("PME_MIXER_THREADS");
    c
}

fn run(args: &[&str], dir: &Path, config: Option<&str>) -> (i32, String, String) {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn weight_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&["weight"], dir.path(), Some("emit = [\"csv\", \"json\", \"svg\"]\n"));
    assert_eq!(code, 0, "{stdout}");
    let out = dir.path().join("out");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("verdicts.json")).unwrap()).unwrap();
    let hash = json["config_hash"].as_str().unwrap();
    assert_eq!(json["experiment"], "weight");
    assert!(json["verdicts"].as_array().unwrap().iter().all(|v| v["pass"] == true));

    let csv = fs::read_to_string(out.join("weight.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# config_hash={hash}"));
    assert_eq!(lines.next().unwrap(), "x,value");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 99);
    // w(x) = x(1 - x)/2 at the nodes x = i/100
    for (i, r) in rows.iter().enumerate() {
        let x = (i + 1) as f64 / 100.0;
        assert!((r[0] - x).abs() < 1e-15);
        assert!((r[1] - 0.5 * x * (1.0 - x)).abs() < 1e-14);
    }
    assert!(fs::read_to_string(out.join("weight.svg")).unwrap().contains(hash));
}

#[test]
fn lemmas_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&["lemmas"], dir.path(), Some("[analysis]\nlemma_pairs = 20000\n"));
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS lower_bound_m2"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn identical_data_give_zero_distance_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = "[domain]\nN = 40\n[solver]\ndt = 1e-3\nt_end = 0.5\nrecord_every = 50\n\
                [ensemble]\nmembers = 4\n[initial.xi_tilde]\nshape = \"bump\"\namplitude = 2.0\n";
    let (code, stdout, _) = run(&["contract"], dir.path(), Some(text));
    assert_eq!(code, 0, "{stdout}");
    let csv = fs::read_to_string(dir.path().join("out/distance_0_1.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&cols[1..], &[0.0, 0.0]);
    }
}

#[test]
fn configuration_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(&["simulate"], dir.path(), Some("[solver]\ntimestep = 0.1\n"));
    assert_eq!(code, 2);
    assert!(stderr.contains("timestep"), "{stderr}");
    let (code, _, _) = run(&["simulate"], dir.path(), Some("experiment = \"weight\"\n"));
    assert_eq!(code, 2);
    let (code, _, _) = run(&["simulate"], dir.path(), Some("[noise]\nfamily = \"pink\"\n"));
    assert_eq!(code, 2);
    let mut cmd = bin();
    let out = cmd.args(["simulate", "--config", "/nonexistent/cfg.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    // a calibration constant far below the discretization error
    let (code, stdout, _) = run(&["entropy"], dir.path(), Some("[analysis]\nc_cal = 1e-4\n"));
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("FAIL entropy_forward"));
    assert!(dir.path().join("out/verdicts.json").exists());
}

#[test]
fn rejected_ensemble_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) = run(&["simulate"], dir.path(), Some("[noise]\namplitude = 400.0\n"));
    assert_eq!(code, 3, "{stderr}");
    assert!(stderr.contains("ensemble rejected"));
}

#[test]
fn seed_flag_and_thread_env_var() {
    let text = "[domain]\nN = 30\n[solver]\ndt = 1e-3\nt_end = 0.2\nrecord_every = 20\n[ensemble]\nmembers = 6\n";
    let read = |dir: &Path| fs::read(dir.join("out/distance_0_1.csv")).unwrap();
    let a = tempfile::tempdir().unwrap();
    assert_eq!(run(&["simulate", "--seed", "5", "--threads", "1"], a.path(), Some(text)).0, 0);
    let b = tempfile::tempdir().unwrap();
    fs::write(b.path().join("config.toml"), text).unwrap();
    let status = bin()
        .args(["simulate", "--seed", "5", "--config"])
        .arg(b.path().join("config.toml"))
        .arg("--out")
        .arg(b.path().join("out"))
        .env("PME_MIXER_THREADS", "3")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(a.path()), read(b.path()));
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(&["simulate", "--seed", "6"], c.path(), Some(text)).0, 0);
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn library_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["weight"], dir.path(), None).0, 0);
    let report = run_experiment(&ExperimentConfig::defaults(ExperimentKind::Weight), 1).unwrap();
    let from_bin = fs::read_to_string(dir.path().join("out/verdicts.json")).unwrap();
    assert_eq!(report.to_json(), from_bin);
}
