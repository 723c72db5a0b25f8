use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn heom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heom"))
        .args(args)
        .env_remove("HEOM_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_value(out: &str, key: &str) -> f64 {
    let line = out
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no {key} in {out}"));
    line[key.len()..].trim().parse().unwrap()
}

/// Short, shallow propagation flags.
const QUICK: [&str; 6] = ["--t-max", "50", "--stride", "5", "--level", "2"];

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["simulate", "--out", out];
    args.extend(QUICK);
    args.extend(extra);
    heom(&args)
}

#[test]
fn simulate_writes_files_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = simulate(
        &run,
        &[
            "--model", "fmo8", "--lambda", "40", "--gamma", "25", "--temp", "310", "--site", "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!((summary_value(&s, "Lambda") - 2.19).abs() < 0.01, "{s}");
    assert!((summary_value(&s, "ln(gamma/lambda)") - (25f64 / 40.0).ln()).abs() < 1e-3);
    assert!(s.contains("final populations"));
    assert!(s.contains("max E"));
    assert!(s.contains("final L_rho"));
    assert!(!s.contains("unitary limit"));
    for f in ["trajectory.txt", "measures.txt", "config.toml"] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    let traj = fs::read_to_string(run.join("trajectory.txt")).unwrap();
    assert!(traj.starts_with("# heom-trajectory v1"));
    assert!(traj.contains("# rows = 11"));
}

#[test]
fn unitary_limit_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--lambda", "0", "--dt", "0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("unitary limit"));
}

#[test]
fn rejected_states_keep_the_trajectory() {
    // RK4 at dt = 1 fs leaves a pure state slightly non-positive.
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--lambda", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("smaller --dt"), "{}", stderr(&o));
    assert!(stdout(&o).contains("unitary limit"));
    assert!(dir.path().join("trajectory.txt").exists());
    assert!(!dir.path().join("measures.txt").exists());
}

#[test]
fn invalid_site_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--site", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("site 9"));
    assert_eq!(heom(&["simulate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(heom(&["--help"]).status.code(), Some(0));
}

#[test]
fn divergence_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = heom(&[
        "simulate", "--out", out, "--dt", "200", "--t-max", "20000", "--stride", "200", "--level",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "lambda = 0.0\ngamma = 50.0\ndt = 0.25\nt_max = 20.0\nstride = 10.0\nlevel = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = heom(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("unitary limit"));
    let o = heom(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!stdout(&o).contains("unitary limit"));
    let written = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("lambda = 30.0"));
    assert!(written.contains("gamma = 50.0"));
}

#[test]
fn converge_without_bath_has_one_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = heom(&[
        "converge", "--out", out, "--lambda", "0", "--dt", "0.25", "--t-max", "50", "--stride",
        "5", "--level", "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ladder = fs::read_to_string(dir.path().join("ladder.txt")).unwrap();
    let rows: Vec<&str> = ladder.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0], "2 0 0");
}

#[test]
fn exhausted_convergence_budget_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = heom(&[
        "converge",
        "--out",
        out,
        "--lambda",
        "200",
        "--gamma",
        "25",
        "--temp",
        "490",
        "--t-max",
        "100",
        "--stride",
        "10",
        "--level",
        "1",
        "--max-level",
        "2",
        "--tol",
        "1e-6",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("last delta"));
}

fn write_manifest(dir: &Path, lambdas: &str) -> std::path::PathBuf {
    let path = dir.join("manifest.txt");
    let o = heom(&[
        "manifest",
        "--out",
        path.to_str().unwrap(),
        "--lambda-grid",
        lambdas,
        "--gamma-grid",
        "100",
        "--temp-grid",
        "310",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

fn aggregate_rows(dir: &Path) -> Vec<String> {
    fs::read_to_string(dir.join("aggregate.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn one_point_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), "40");
    let out = dir.path().join("sweep");
    let o = heom(&[
        "sweep",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--t-max",
        "100",
        "--stride",
        "10",
        "--level",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = aggregate_rows(&out);
    assert_eq!(rows.len(), 2);
    for col in [
        "E_0.1ps",
        "E_0.5ps",
        "E_1ps",
        "E_2ps",
        "L_rho_0.1ps",
        "L_rho_2ps",
        "ln_Lambda",
    ] {
        assert!(
            rows[0].split_whitespace().any(|c| c == col),
            "{col} missing"
        );
    }
    assert!(rows[1].starts_with("l40_g100_t310 "));
    assert!(out.join("runs/l40_g100_t310/measures.txt").exists());
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn sweep_isolates_failures_and_ignores_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    // λ = 2000 is far outside what L = 3 and dt = 4 fs can resolve.
    let manifest = write_manifest(dir.path(), "10,2000,40");
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let o = heom(&[
            "sweep",
            "--manifest",
            manifest.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--t-max",
            "400",
            "--dt",
            "4",
            "--stride",
            "100",
            "--level",
            "3",
            "--workers",
            workers,
            "--measures-only",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (stdout(&o), out)
    };
    let (s1, out1) = run("1", "a");
    let (_, out2) = run("3", "b");
    let rows = aggregate_rows(&out1);
    assert!(s1.contains("2 of 3 runs succeeded"), "{s1}");
    let ids: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(ids, ["l10_g100_t310", "l40_g100_t310"]);
    let failures = fs::read_to_string(out1.join("failures.txt")).unwrap();
    assert_eq!(failures.lines().count(), 2);
    assert!(failures
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("l2000_g100_t310 "));
    assert!(!out1.join("runs/l10_g100_t310/trajectory.txt").exists());
    assert_eq!(rows, aggregate_rows(&out2));
}

#[test]
fn measure_reproduces_simulate_and_takes_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert!(simulate(&run, &[]).status.success());
    let traj = run.join("trajectory.txt");

    let same = dir.path().join("same.txt");
    let o = heom(&[
        "measure",
        traj.to_str().unwrap(),
        "--out",
        same.to_str().unwrap(),
        "--model",
        "fmo8",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(&same).unwrap(),
        fs::read_to_string(run.join("measures.txt")).unwrap()
    );

    let custom = dir.path().join("custom.txt");
    let o = heom(&[
        "measure",
        traj.to_str().unwrap(),
        "--out",
        custom.to_str().unwrap(),
        "--pairs",
        "3,4",
        "3,7",
        "2,3",
        "--snapshot",
        "50",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&custom).unwrap();
    assert!(text.contains("C_3_4 C_3_7 C_2_3"));
    assert!(stdout(&o).contains("# threshold = 0.005"));

    let bad = heom(&["measure", traj.to_str().unwrap(), "--pairs", "1,9"]);
    assert_eq!(bad.status.code(), Some(1));
    let missing = heom(&["measure", "/nonexistent/trajectory.txt"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn validate_reports_and_exit_codes() {
    let o = heom(&["validate", "--only", "1,2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(
        s.contains("criterion  1 PASS") && s.contains("157.17"),
        "{s}"
    );
    assert!(
        s.contains("L(I/8) = 1; L(J/8) = 8; L(|1><1|) = 0.125"),
        "{s}"
    );
    assert_eq!(heom(&["validate", "--only", "42"]).status.code(), Some(1));
}
