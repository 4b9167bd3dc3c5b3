//! End-to-end runs of the `geopers` binary through its public interface.

use std::path::Path;
use std::process::{Command, Output};

fn geopers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geopers"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(path: &Path, body: &str) {
    std::fs::write(path, body).unwrap();
}

#[test]
fn sample_persist_maxpers_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let diag = dir.path().join("diag.csv");

    let out = geopers(&[
        "sample",
        "--n",
        "30",
        "--d",
        "2",
        "--seed",
        "11",
        "--out",
        cloud.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("30 points"));

    let out = geopers(&[
        "persist",
        "--cloud",
        cloud.to_str().unwrap(),
        "--flavor",
        "rips",
        "--out",
        diag.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = geopers(&[
        "maxpers",
        "--diagram",
        diag.to_str().unwrap(),
        "--n",
        "30",
        "--k",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pi_max:"), "{text}");
    assert!(text.contains("delta_k:"), "{text}");
}

#[test]
fn sample_rejects_a_fractional_count() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let out = geopers(&[
        "sample",
        "--n",
        "12.5",
        "--d",
        "2",
        "--out",
        cloud.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("positive integer"));
}

#[test]
fn poisson_sampling_draws_a_random_count() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let out = geopers(&[
        "sample",
        "--n",
        "12.5",
        "--d",
        "2",
        "--seed",
        "3",
        "--poisson",
        "--out",
        cloud.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(cloud.exists());
}

#[test]
fn lowerbound_certifies_its_own_ratio() {
    let out = geopers(&["lowerbound", "--d", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("guaranteed_ratio:"), "{text}");
    assert!(text.contains("pi_max:"), "{text}");
}

#[test]
fn experiment_writes_all_artifacts_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let config = dir.path().join("exp.cfg");
    write_config(
        &config,
        &format!(
            "n_grid = 40, 80\n\
             d = 2\n\
             k_list = 1\n\
             flavor = cech\n\
             trials_per_n = 2\n\
             root_seed = 7\n\
             r_max_multiplier = 1.5\n\
             output = {}\n",
            records.display()
        ),
    );

    let out = geopers(&["experiment", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(records.exists());
    assert!(dir.path().join("records_summary.csv").exists());
    assert!(dir.path().join("records.svg").exists());
    assert!(stdout(&out).contains("fit: slope"));

    let first = std::fs::read(&records).unwrap();
    let out = geopers(&["experiment", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(first, std::fs::read(&records).unwrap());
}

#[test]
fn fit_reads_a_records_file() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let config = dir.path().join("exp.cfg");
    write_config(
        &config,
        &format!(
            "n_grid = 40\nd = 2\nk_list = 1\ntrials_per_n = 3\nroot_seed = 1\noutput = {}\n",
            records.display()
        ),
    );
    let out = geopers(&["experiment", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = geopers(&["fit", "--records", records.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("slope"));
}

#[test]
fn torus_compare_succeeds_once_coverage_is_reachable() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let config = dir.path().join("tc.cfg");
    write_config(
        &config,
        &format!(
            "n_grid = 300\n\
             d = 2\n\
             k_list = 1\n\
             flavor = rips\n\
             trials_per_n = 2\n\
             root_seed = 5\n\
             r_max_multiplier = 1.0\n\
             output = {}\n",
            records.display()
        ),
    );
    let out = geopers(&["torus-compare", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("records_compare.csv").exists());
    let text = stdout(&out);
    assert!(text.contains("clean-torus-trials 2/2"), "{text}");
}

#[test]
fn torus_compare_reports_unreachable_grids_with_exit_three() {
    // at n = 60 the torus cannot be covered inside the wrap-around radius
    // cap, so every torus trial must exhaust its retries
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let config = dir.path().join("tc.cfg");
    write_config(
        &config,
        &format!(
            "n_grid = 60\nd = 2\nk_list = 1\nflavor = rips\ntrials_per_n = 2\nroot_seed = 5\noutput = {}\n",
            records.display()
        ),
    );
    let out = geopers(&["torus-compare", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let body = std::fs::read_to_string(&records).unwrap();
    assert!(body.contains("truncation-exhausted"), "{body}");
}

#[test]
fn missing_input_files_exit_with_two() {
    let out = geopers(&["fit", "--records", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(2));

    let out = geopers(&["experiment", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    write_config(&config, "n_grid = 10\nmystery = 3\n");
    let out = geopers(&["experiment", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown key"));
}
