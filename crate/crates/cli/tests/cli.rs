use std::fs;
use std::path::Path;
use std::process::Command as Process;

use gmfg_cli::{parse_config, run_experiment, Command, ConfigError};

const SMALL: &str = r#"
environment = "cyber"
seed = 7

[cyber]
horizon = 8

[discretization]
classes = 4

[omd]
iterations = 6
eval_every = 2

[sweep]
betas = [0.5]
ns = [5, 10]
samples = 3

[simulate]
n = 12

[graph_stats]
n = 200

[cutnorm]
grid = 8
restarts = 2
"#;

fn config_in(dir: &Path, extra: &str) -> gmfg_cli::ExperimentConfig {
    let mut cfg = parse_config(&format!("{SMALL}{extra}")).unwrap();
    cfg.out_dir = dir.to_path_buf();
    cfg
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn negative_gamma_is_a_range_error() {
    let err = parse_config("[omd]\ngamma = -1.0\n").unwrap_err();
    assert!(matches!(err, ConfigError::Invalid { field: "omd.gamma", .. }), "{err}");
    assert!(err.to_string().contains("out of range"));
}

#[test]
fn unknown_environment_lists_valid_names() {
    let err = parse_config("environment = \"ocean\"\n").unwrap_err().to_string();
    for name in ["cyber", "hetero_cyber", "beach"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn empty_size_list_is_rejected() {
    let err = parse_config("[sweep]\nns = []\n").unwrap_err();
    assert!(matches!(err, ConfigError::Invalid { field: "sweep.ns", .. }), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(parse_config("[omd]\ngama = 1.0\n").is_err());
    assert!(parse_config("[beach]\nnum_positions = 10\nwind = 2\n").is_err());
}

#[test]
fn solve_writes_headed_csvs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "");
    let files = run_experiment(&cfg, Command::Solve).unwrap();
    let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
    assert_eq!(names, ["trace.csv", "policy.csv", "meanfield.csv", "manifest.csv"]);

    let header = format!("# config_hash={} seed=7", cfg.hash());
    for name in &names {
        assert_eq!(read(dir.path(), name).lines().next().unwrap(), header, "{name}");
    }
    let trace = read(dir.path(), "trace.csv");
    let iterations: Vec<&str> = trace.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(iterations, ["0", "2", "4", "6"]);
    // 4 classes x 8 steps x 4 states x 2 actions
    assert_eq!(read(dir.path(), "policy.csv").lines().count(), 2 + 4 * 8 * 4 * 2);
    assert_eq!(read(dir.path(), "meanfield.csv").lines().count(), 2 + 4 * 9 * 4);
    let manifest = read(dir.path(), "manifest.csv");
    let listed: Vec<String> = ["trace.csv", "policy.csv", "meanfield.csv"]
        .iter()
        .map(|f| format!("{f},{}", cfg.hash()))
        .collect();
    assert_eq!(manifest.lines().skip(2).collect::<Vec<_>>(), listed);
    assert_eq!(manifest.lines().nth(1), Some("file,config_hash"));
}

#[test]
fn reruns_are_byte_identical() {
    for command in [
        Command::Solve,
        Command::Simulate,
        Command::Sweep,
        Command::GraphStats,
        Command::CutNorm,
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = run_experiment(&config_in(a.path(), ""), command).unwrap();
        let fb = run_experiment(&config_in(b.path(), ""), command).unwrap();
        assert_eq!(fa.len(), fb.len());
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(
                fs::read(x).unwrap(),
                fs::read(y).unwrap(),
                "{command:?} {}",
                x.display()
            );
        }
    }
}

#[test]
fn graph_stats_degree_histogram_covers_every_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "");
    run_experiment(&cfg, Command::GraphStats).unwrap();
    let degrees = read(dir.path(), "degrees.csv");
    let mut lines = degrees.lines().skip(1);
    assert_eq!(lines.next(), Some("degree,count"));
    let total: usize = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 200);
}

#[test]
fn sweep_rows_follow_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), "");
    run_experiment(&cfg, Command::Sweep).unwrap();
    let sweep = read(dir.path(), "sweep.csv");
    let rows: Vec<Vec<&str>> = sweep.lines().skip(2).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][..3], ["0.5", "5", "3"]);
    assert_eq!(&rows[1][..3], ["0.5", "10", "3"]);
}

#[test]
fn seed_changes_sampled_outputs_and_header() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ca = config_in(a.path(), "");
    let mut cb = config_in(b.path(), "");
    cb.seed = 8;
    run_experiment(&ca, Command::GraphStats).unwrap();
    run_experiment(&cb, Command::GraphStats).unwrap();
    assert_ne!(ca.hash(), cb.hash());
    assert_ne!(read(a.path(), "degrees.csv"), read(b.path(), "degrees.csv"));
}

#[test]
fn binary_runs_each_environment() {
    let dir = tempfile::tempdir().unwrap();
    for env in ["cyber", "hetero_cyber", "beach"] {
        let config = dir.path().join(format!("{env}.toml"));
        let horizon = format!("[{env}]\nhorizon = 5\n");
        fs::write(
            &config,
            format!("environment = \"{env}\"\n[omd]\niterations = 3\n{horizon}"),
        )
        .unwrap();
        let out = dir.path().join(env);
        let status = Process::new(env!("CARGO_BIN_EXE_gmfg"))
            .args(["solve", "--threads", "2", "--seed", "3", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        assert!(read(&out, "trace.csv").starts_with("# config_hash="));
    }
}

#[test]
fn binary_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[omd]\ngamma = -1.0\n").unwrap();
    let output = Process::new(env!("CARGO_BIN_EXE_gmfg"))
        .args(["solve", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("omd.gamma"));
}
