use std::path::Path;
use std::process::{Command, Output};

use tsaction::io::{read_summary, write_path, write_tensor, RunMeta};
use tsaction_core::action::{PathField, PathGrid};
use tsaction_core::phase_model::CouplingTensor;
use tsaction_core::Complex64;

fn tsaction(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsaction"))
        .args(args)
        .current_dir(dir)
        .env_remove("TSACTION_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_GRID: &str = r#"{"grid": {"n": 8, "dtau": 0.002, "tau_max": 0.1, "checkpoint_count": 3}, "trajectories": 24}"#;

#[test]
fn squeeze_without_pseudo_time_reports_initial_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsaction(
        &["run", "--preset", "squeeze", "--trajectories", "64", "--tau-max", "0", "--out", "out"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_summary(&dir.path().join("out/squeeze_summary.csv")).unwrap();
    assert_eq!(rows.len(), 34 * 2);
    assert!(rows.iter().all(|r| r.tau == 0.0 && r.n_traj == 64));
    // Flat initial path: each component keeps its sampled boundary value.
    let x: Vec<_> = rows.iter().filter(|r| r.component == 0).collect();
    assert!(x.iter().all(|r| r.variance == x[0].variance));
    for name in ["squeeze_x_line.csv", "squeeze_y_surface.csv", "squeeze_x_tau.csv", "squeeze_meta.json"] {
        assert!(dir.path().join("out").join(name).exists(), "{name}");
    }
}

#[test]
fn meta_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.json"), SMALL_GRID).unwrap();
    let o = tsaction(&["run", "--preset", "wiener", "--config", "small.json", "--out", "a"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let meta: RunMeta =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/wiener_meta.json")).unwrap()).unwrap();
    assert_eq!(meta.trajectories, 24);
    assert_eq!(meta.config.grid.n, 8);
    let mut echo = meta.config.clone();
    echo.out = None;
    std::fs::write(dir.path().join("echo.json"), serde_json::to_string(&echo).unwrap()).unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_tsaction"))
        .args(["run", "--config", "echo.json", "--threads", "2"])
        .current_dir(dir.path())
        .env("TSACTION_OUT", "b")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = std::fs::read(dir.path().join("a/wiener_summary.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/wiener_summary.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn snapshots_are_written_on_request() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.json"), SMALL_GRID).unwrap();
    let o = tsaction(
        &["run", "--preset", "squeeze", "--config", "small.json", "--trajectories", "2", "--snapshots", "--out", "."],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("squeeze_snapshots.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trajectory,tau,t,component,value"));
    assert_eq!(lines.count(), 2 * 3 * 9 * 2);
}

#[test]
fn freefield_writes_the_mean_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsaction(&["run", "--preset", "freefield", "--out", "."], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("freefield_path.csv")).unwrap();
    assert!(text.starts_with("t,component,mean,variance,reference"));
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').filter_map(|c| c.parse().ok()).collect();
        let (mean, var, reference) = (cols[1], cols[2], cols[3]);
        assert_eq!(var, 0.0);
        assert!((mean - reference).abs() < 1e-9);
    }
}

#[test]
fn invalid_tensor_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CouplingTensor::from_terms(1, [([1, 0, 1, 1], Complex64::new(0.0, 1.0))]).unwrap();
    write_tensor(&dir.path().join("bad.json"), &bad).unwrap();
    let o = tsaction(&["validate", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hermiticity violation at (1,0,1,1)"), "{}", stderr(&o));

    write_tensor(&dir.path().join("good.json"), &CouplingTensor::squeezing(0.5)).unwrap();
    let o = tsaction(&["validate", "good.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("constant diffusion"));
}

#[test]
fn custom_tensor_runs() {
    let dir = tempfile::tempdir().unwrap();
    write_tensor(&dir.path().join("sq.json"), &CouplingTensor::squeezing(1.0)).unwrap();
    std::fs::write(dir.path().join("small.json"), SMALL_GRID).unwrap();
    let o = tsaction(
        &["run", "--preset", "custom", "--tensor", "sq.json", "--config", "small.json", "--out", "."],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("custom_x_line.csv").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("typo.json"), r#"{"trajectoris": 5}"#).unwrap();
    let o = tsaction(&["run", "--config", "typo.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));

    let o = tsaction(&["run", "--preset", "custom"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = tsaction(&["run", "--preset", "nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("unstable.json"),
        r#"{"grid": {"dtau": 0.5, "tau_max": 50.0}, "trajectories": 2}"#,
    )
    .unwrap();
    let o = tsaction(&["run", "--preset", "wiener", "--config", "unstable.json"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("warning") && err.contains("diverged"), "{err}");
}

#[test]
fn action_of_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let grid = PathGrid::new(0.0, 1.0, 20).unwrap();
    let path = PathField::from_fn(grid, 2, |t| vec![0.5 * (-t).exp(), 0.3 * (t - 1.0).exp()]).unwrap();
    write_path(&dir.path().join("p.csv"), &path, &["x".into(), "y".into()]).unwrap();
    let o = tsaction(&["action", "p.csv", "--scheme", "i"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["scheme"], "I");
    assert_eq!(v["steps"], 20);
    assert!(v["total"].as_f64().unwrap().is_finite());

    let o = tsaction(&["action", "p.csv", "--preset", "freefield"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("deterministic"));
}
