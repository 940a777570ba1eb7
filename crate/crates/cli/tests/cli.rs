use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../presets")
        .join(name)
}

fn cocs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cocs"))
        .args(args)
        .output()
        .expect("binary runs")
}

const FAST: [&str; 6] = [
    "--set",
    "network.num_clients=8",
    "--set",
    "run.horizon=15",
    "--set",
    "network.mc_samples=50",
];

fn run_into(out: &Path, extra: &[&str]) -> Output {
    let config = preset("mnist_scale.toml");
    let mut args = vec![
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ];
    args.extend(FAST);
    args.extend(extra);
    cocs(&args)
}

fn csv_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    names
}

#[test]
fn run_writes_one_csv_per_policy_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--seeds", "1..5", "--jobs", "2"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(csv_files(dir.path()).len(), 25);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_into(&a, &["--seeds", "2,3"]).status.success());
    assert!(run_into(&b, &["--seeds", "2,3", "--jobs", "3"])
        .status
        .success());
    let names = csv_files(&a);
    assert_eq!(names, csv_files(&b));
    for name in names
        .iter()
        .chain(std::iter::once(&"summary.json".to_string()))
    {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn unknown_override_exits_with_two_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(dir.path(), &["--set", "network.warp_factor=9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("network.warp_factor"));
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = cocs(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run_into(dir.path(), &["--seeds", "9..1"]);
    assert_eq!(out.status.code(), Some(2));

    let config = preset("mnist_scale.toml");
    let out = cocs(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--axis",
        "budget",
        "--values",
        "",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = preset("mnist_scale.toml");
    let mut args = vec![
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--axis",
        "tau_dead",
        "--values",
        "2,4,8",
        "--seeds",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
        "--quiet",
    ];
    args.extend(FAST);
    let out = cocs(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("sweep_summary.json").exists());
    for v in ["2", "4", "8"] {
        assert!(dir
            .path()
            .join(format!("tau_dead={v}"))
            .join("summary.json")
            .exists());
    }

    let report = cocs(&["report", dir.path().join("tau_dead=4").to_str().unwrap()]);
    assert!(report.status.success());
    let text = String::from_utf8_lossy(&report.stdout);
    for policy in ["oracle", "cocs", "cucb", "linucb", "random"] {
        assert!(text.contains(policy), "{text}");
    }
}

#[test]
fn report_rejects_corrupted_summaries() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        cocs(&["report", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    fs::write(dir.path().join("summary.json"), "{\"name\": ").unwrap();
    assert_eq!(
        cocs(&["report", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
