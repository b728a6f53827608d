use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn turing_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turing-lab"))
        .current_dir(dir)
        .args(args)
        .env_remove("TURING_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_benchmark() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["analyze", "--model", "linear", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("turing unstable: true"));
    assert!(text.contains("witness q2: {1}"));
    assert!(text.contains("lambda_max: 0.25260"));
    assert!(text.contains("omega_max: {(1)}"));
    let csv = fs::read_to_string(tmp.path().join("a/dispersion.csv")).unwrap();
    assert!(csv.starts_with("k,re_plus,re_minus,im,class\n"));
    assert_eq!(csv.lines().count(), 402);
    assert!(tmp.path().join("a/modes.csv").exists());
    assert_eq!(fs::read_to_string(tmp.path().join("a/analysis.txt")).unwrap(), text);
}

#[test]
fn analyze_two_dimensional_benchmark() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[model]\nname = \"linear\"\n[analysis]\ndim = 2\n");
    let o = turing_lab(tmp.path(), &["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("omega_max: {(0,1), (1,0)}"), "{}", stdout(&o));
}

#[test]
fn equal_diffusivities_is_a_clean_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[model]\nname = \"linear\"\nparams = { d1 = 1.0, d2 = 1.0 }\n");
    let o = turing_lab(tmp.path(), &["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("equal diffusivities"), "{}", stderr(&o));
}

#[test]
fn schnakenberg_report_is_generated() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[model]\nname = \"schnakenberg\"\nparams = { a = 0.1, b = 0.9, d1 = 1.0, d2 = 40.0 }\n",
    );
    let o = turing_lab(tmp.path(), &["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("turing unstable: "));
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["analyze"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.name"));

    let cfg = write_config(tmp.path(), "[model]\nname = \"linear\"\n\n[simulation]\nsteps = 3\n");
    let o = turing_lab(tmp.path(), &["analyze", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("steps") && err.contains("line 5"), "{err}");

    let o = turing_lab(tmp.path(), &["analyze", "--model", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown model"));

    let o = turing_lab(tmp.path(), &["verify", "--model", "cubic", "--grid-n", "48"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("simulation.n"));
}

#[test]
fn scan_sweep_matches_witness_sets() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[model]\nname = \"linear\"\n[scan.params]\nd1 = [0.5, 1.0]\nd2 = [20.0, 40.0]\n",
    );
    let o = turing_lab(tmp.path(), &["scan", "--config", &cfg, "--out", "s"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("s/scan.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d1,d2,rest_stable,turing_unstable,lambda_max,omega_max_count,status");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0.5,20,true,true,0.2526"));
    assert_eq!(lines[4], "1,40,true,false,,0,ok");
}

#[test]
fn scan_single_point_agrees_with_analyze() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[model]\nname = \"cubic\"\n[scan.params]\nd2 = [20.0]\n");
    let o = turing_lab(tmp.path(), &["scan", "--config", &cfg, "--out", "s"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("s/scan.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let lambda: f64 = row[3].parse().unwrap();

    let o = turing_lab(tmp.path(), &["analyze", "--config", &cfg, "--out", "a"]);
    let line = stdout(&o).lines().find(|l| l.starts_with("lambda_max:")).unwrap().to_string();
    let reported: f64 = line["lambda_max:".len()..].trim().parse().unwrap();
    assert_eq!(lambda, reported);
}

#[test]
fn empty_scan_grid_writes_header_only() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["scan", "--model", "linear", "--out", "s"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(tmp.path().join("s/scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn simulate_to_time_zero_keeps_initial_snapshot_only() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["simulate", "--model", "cubic", "--t-end", "0", "--out", "sim"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let files: Vec<String> = fs::read_dir(tmp.path().join("sim"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".turf"))
        .collect();
    assert_eq!(files, vec!["snapshot_0000000.turf".to_string()]);
    let diag = fs::read_to_string(tmp.path().join("sim/diagnostics.csv")).unwrap();
    assert_eq!(diag.lines().count(), 2);
}

#[test]
fn leaving_the_validity_radius_exits_two() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["simulate", "--model", "linear", "--t-end", "60", "--out", "sim"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("validity radius"));
}

#[test]
fn verify_benchmark_passes() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["verify", "--model", "cubic", "--out", "v"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let summary = fs::read_to_string(tmp.path().join("v/summary.txt")).unwrap();
    assert_eq!(summary.matches("[PASS]").count(), 3, "{summary}");
    let csv = fs::read_to_string(tmp.path().join("v/deviation.csv")).unwrap();
    assert!(csv.starts_with("delta,t,dev,bound,ratio,l2,h2\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 201);
}

#[test]
fn verify_with_one_delta_fails_acceptance() {
    let tmp = TempDir::new().unwrap();
    let o = turing_lab(tmp.path(), &["verify", "--model", "cubic", "--delta", "1e-3", "--out", "v"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("[FAIL] deviation scaling"));
}

#[test]
fn fixed_seed_gives_identical_files() {
    let tmp = TempDir::new().unwrap();
    for out in ["r1", "r2"] {
        let o = turing_lab(tmp.path(), &["verify", "--model", "cubic", "--seed", "11", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["deviation.csv", "deviation_linear.csv", "deviation_pure.csv", "summary.txt"] {
        let a = fs::read(tmp.path().join("r1").join(name)).unwrap();
        let b = fs::read(tmp.path().join("r2").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
    let o = turing_lab(tmp.path(), &["verify", "--model", "cubic", "--seed", "12", "--out", "r3"]);
    assert_eq!(o.status.code(), Some(0));
    let a = fs::read(tmp.path().join("r1/deviation.csv")).unwrap();
    let c = fs::read(tmp.path().join("r3/deviation.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn thread_cap_is_read_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_turing-lab"))
            .current_dir(tmp.path())
            .args(["analyze", "--model", "linear"])
            .env("TURING_LAB_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    let bad = run("zero");
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("TURING_LAB_THREADS"));
}
