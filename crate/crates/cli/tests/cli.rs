use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

const TOY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/bank.tsv");

fn dkpca(args: &[&str]) -> Output {
    dkpca_env(args, &[])
}

fn dkpca_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dkpca"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("DKPCA_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_to(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let out = dir.path().join(name);
    let mut args = vec!["run", "--dataset", TOY, "--out", out.to_str().unwrap()];
    if !extra.contains(&"--repeats") {
        args.extend(["--repeats", "3"]);
    }
    args.extend_from_slice(extra);
    let result = dkpca(&args);
    assert!(result.status.success(), "{}", stderr(&result));
    fs::read_to_string(out).unwrap()
}

/// Columns from `ratio` through `f1_macro`.
fn metric_columns(csv: &str) -> Vec<String> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').skip(2).take(5).collect::<Vec<_>>().join(","))
        .collect()
}

#[test]
fn run_writes_report() {
    let dir = TempDir::new().unwrap();
    let csv = run_to(&dir, "report.csv", &[]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "dataset,kernel,ratio,repeat,accuracy,f1_micro,f1_macro,fingerprint");
    assert_eq!(lines.len(), 1 + 3 * 4);
    assert!(lines[1].starts_with("bank,diffusion,0.0500,0,"));
    assert!(lines[4].starts_with("bank,diffusion,0.0500,mean,"));
    assert!(lines[12].starts_with("bank,diffusion,0.3000,mean,"));
}

#[test]
fn run_prints_csv_without_out() {
    let out = dkpca(&["run", "--dataset", TOY, "--repeats", "2", "--ratios", "0.5"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("accuracy"));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn zero_lambda_matches_linear() {
    let dir = TempDir::new().unwrap();
    let diffusion = run_to(&dir, "d.csv", &["--kernel", "diffusion", "--lambda", "0", "--steps", "3"]);
    let linear = run_to(&dir, "l.csv", &["--kernel", "linear"]);
    assert_eq!(metric_columns(&diffusion), metric_columns(&linear));
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = run_to(&dir, "a.csv", &["--seed", "7"]);
    let b = run_to(&dir, "b.csv", &["--seed", "7"]);
    assert_eq!(a, b);
    let c = run_to(&dir, "c.csv", &["--seed", "8"]);
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let args = ["run", "--dataset", TOY, "--repeats", "4", "--out", out.to_str().unwrap()];
        let result = dkpca_env(&args, &[("DKPCA_THREADS", threads)]);
        assert!(result.status.success(), "{}", stderr(&result));
        fs::read(out).unwrap()
    };
    assert_eq!(run("1", "serial.csv"), run("3", "pooled.csv"));
}

#[test]
fn missing_dataset_is_a_dataset_error() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.csv");
    let result = dkpca(&["run", "--dataset", "no/such/file.tsv", "--out", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    assert!(stderr(&result).contains("no/such/file.tsv"));
    assert!(!out.exists());
}

#[test]
fn empty_dataset_is_a_dataset_error() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    let result = dkpca(&["spectrum", "--dataset", empty.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "# toy run\ndataset = {}\nkernel = linear\nratios = 0.3\nrepeats = 2\nk = 1\n",
            TOY
        ),
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let result = dkpca(&["run", "--config", conf.to_str().unwrap(), "--k", "3", "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", stderr(&result));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("bank,linear,0.3000,0,"));

    let flagged = run_to(&dir, "f.csv", &["--kernel", "linear", "--ratios", "0.3", "--repeats", "2", "--k", "3"]);
    assert_eq!(csv, flagged);
}

#[test]
fn config_errors_name_the_key() {
    let dir = TempDir::new().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, format!("dataset = {}\nlambda = plenty\n", TOY)).unwrap();
    let result = dkpca(&["run", "--config", conf.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("`lambda`"));

    fs::write(&conf, format!("dataset = {}\nlamda = 0.1\n", TOY)).unwrap();
    let result = dkpca(&["run", "--config", conf.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("`lamda`"));
}

#[test]
fn inconsistent_kernel_parameters_are_rejected() {
    let result = dkpca(&["run", "--dataset", TOY, "--kernel", "linear", "--sigma", "2"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("`sigma`"));
}

#[test]
fn spectrum_has_one_row_per_document() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("spectrum.csv");
    let result = dkpca(&["spectrum", "--dataset", TOY, "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", stderr(&result));
    let csv = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue,cumulative_ratio");
    assert_eq!(lines.len(), 1 + 160);
    assert!(lines[1].starts_with("1,"));
    assert!(lines[160].ends_with(",1.000000"));
}

#[test]
fn sweep_covers_the_grid() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--dataset",
        TOY,
        "--ratios",
        "0.3",
        "--repeats",
        "2",
        "--grid-lambda",
        "0,0.0039",
        "--grid-steps",
        "2,3",
        "--out",
        out.to_str().unwrap(),
    ];
    let result = dkpca(&args);
    assert!(result.status.success(), "{}", stderr(&result));
    let csv = fs::read_to_string(out).unwrap();
    let means: Vec<&str> = csv.lines().filter(|l| l.contains(",mean,")).collect();
    assert_eq!(means.len(), 4);
    let fingerprints: std::collections::BTreeSet<&str> = means.iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(fingerprints.len(), 4);
}

#[test]
fn sweep_over_k_reuses_one_embedding() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("k.csv");
    let args = [
        "sweep", "--dataset", TOY, "--ratios", "0.5", "--repeats", "1", "--grid-k", "1..10",
        "--grid-dim", "2,5", "--out", out.to_str().unwrap(),
    ];
    let result = dkpca(&args);
    assert!(result.status.success(), "{}", stderr(&result));
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().filter(|l| l.contains(",mean,")).count(), 20);
}

#[test]
fn empty_grid_is_rejected() {
    let args = ["sweep", "--dataset", TOY, "--grid-lambda", ""];
    let result = dkpca(&args);
    assert_eq!(result.status.code(), Some(2));
    assert!(stderr(&result).contains("grid-lambda"));
    let result = dkpca(&["sweep", "--dataset", TOY]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn kernel_cache_round_trips() {
    let dir = TempDir::new().unwrap();
    let cache = dir.path().join("cache");
    let first = run_to(&dir, "a.csv", &["--kernel-cache", cache.to_str().unwrap()]);
    let files: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(files.len(), 1);
    let second = run_to(&dir, "b.csv", &["--kernel-cache", cache.to_str().unwrap()]);
    assert_eq!(first, second);
    assert_eq!(first, run_to(&dir, "c.csv", &[]));
    run_to(&dir, "d.csv", &["--kernel-cache", cache.to_str().unwrap(), "--lambda", "0.01"]);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 2);
}

#[test]
fn stratified_and_threshold_options_run() {
    let dir = TempDir::new().unwrap();
    let csv = run_to(&dir, "s.csv", &["--stratified", "--dim-threshold", "0.9", "--kernel", "rbf", "--rbf-unsquared"]);
    assert!(csv.lines().nth(1).unwrap().starts_with("bank,rbf,"));
}
