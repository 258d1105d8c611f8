use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fairstrat::harness::results::{ResultsFile, SCHEMA_VERSION};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn fairstrat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairstrat")).args(args).output().unwrap()
}

fn small_config(dir: &Path, algorithm: &str) -> PathBuf {
    let path = dir.join(format!("{algorithm}.toml"));
    let spec = root().join("specs/synthetic/gaussians.toml");
    std::fs::write(
        &path,
        format!(
            "algorithm = \"{algorithm}\"\ntaus = [0.5]\nfractions = [1.0, 0.5, 0.25]\niterations = 60\n\
             estimate_iterations = 20\npareto_points = 3\ntrials = 2\n[dataset]\nspec = {:?}\n",
            spec
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_writes_a_readable_results_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "alg2");
    let out = dir.path().join("out");
    let o = fairstrat(&["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = ResultsFile::from_json_file(&out.join("results.json")).unwrap();
    assert_eq!(file.schema_version, SCHEMA_VERSION);
    assert_eq!(file.records.len(), 2);
    assert!(file.records.iter().all(|r| r.error.is_none() && r.wall_ms == 0));
    let table = std::fs::read_to_string(out.join("max_group_vs_tau.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    let json = std::fs::read_to_string(out.join("results.json")).unwrap();
    let reparsed: ResultsFile = serde_json::from_str(&json).unwrap();
    assert_eq!(reparsed, file);
}

#[test]
fn pareto_marks_a_frontier() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path(), "alg3");
    let out = dir.path().join("out");
    let o = fairstrat(&["pareto", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let file = ResultsFile::from_json_file(&out.join("results.json")).unwrap();
    assert!(file.pareto);
    assert_eq!(file.aggregates.len(), 3);
    assert!(file.aggregates.iter().any(|a| a.on_frontier == Some(true)));
    let pareto = std::fs::read_to_string(out.join("pareto.csv")).unwrap();
    assert_eq!(pareto.lines().count(), 4);
}

#[test]
fn gen_synth_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("margin.csv");
    let spec = root().join("specs/synthetic/margin.toml");
    let o = fairstrat(&["gen-synth", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().next(), Some("x0,group,label"));
    assert_eq!(text.lines().count(), 801);
}

#[test]
fn inspect_reports_synthetic_sizes() {
    let spec = root().join("specs/synthetic/gaussians.toml");
    let o = fairstrat(&["inspect", spec.to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("[240, 120, 60]"), "{stdout}");
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "algorithm = \"nope\"\n").unwrap();
    let o = fairstrat(&["run", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
