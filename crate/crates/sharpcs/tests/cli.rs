//! End-to-end tests of the command-line surface: file formats, exit codes,
//! determinism, and the config round-trip.

use std::fs;
use std::path::Path;
use std::sync::Mutex;

use sharpcs::cli::{cond_report, run, RunConfig};

/// Tests that run `experiment` read the SHARPCS_THREADS environment
/// variable, and one test mutates it; serialize them.
static ENV_LOCK: Mutex<()> = Mutex::new(());

fn env_guard() -> std::sync::MutexGuard<'static, ()> {
    ENV_LOCK.lock().unwrap_or_else(|e| e.into_inner())
}
use sharpcs::conditioning::PowerMethodParams;
use sharpcs::experiments::{gen_instance, ExperimentConfig};
use sharpcs::linalg::{min_l1_oracle, norm1, norm2, RngSeed};
use sharpcs::report::check_well_formed_xml;
use sharpcs::restart::{RestartMode, RestartPlan};

fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

fn write_instance_files(dir: &Path, p: usize, n: usize, k: usize, seed: u64) -> (String, String, String, Vec<f64>) {
    let inst = gen_instance(p, n, k, 0.0, RngSeed(seed)).unwrap();
    let a_path = dir.join("A.txt");
    let b_path = dir.join("b.txt");
    let x_path = dir.join("x0.txt");
    let mut a_text = format!("{} {}\n", inst.a.rows, inst.a.cols);
    for i in 0..inst.a.rows {
        let row: Vec<String> = inst.a.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        a_text.push_str(&row.join(" "));
        a_text.push('\n');
    }
    fs::write(&a_path, a_text).unwrap();
    let mut b_text = format!("{}\n", inst.b_clean.len());
    for v in &inst.b_clean {
        b_text.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(&b_path, b_text).unwrap();
    let mut x_text = format!("{}\n", inst.x0.len());
    for v in &inst.x0 {
        x_text.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(&x_path, x_text).unwrap();
    (
        a_path.to_str().unwrap().to_string(),
        b_path.to_str().unwrap().to_string(),
        x_path.to_str().unwrap().to_string(),
        inst.x0,
    )
}

fn read_solution(dir: &Path) -> Vec<f64> {
    let text = fs::read_to_string(dir.join("solution.txt")).unwrap();
    let mut lines = text.lines();
    let n: usize = lines.next().unwrap().trim().parse().unwrap();
    let vals: Vec<f64> = lines.take(n).map(|l| l.trim().parse().unwrap()).collect();
    assert_eq!(vals.len(), n);
    vals
}

#[test]
fn help_exits_zero_and_unknown_command_fails() {
    assert_eq!(run(&args(&["--help"])), 0);
    assert_eq!(run(&args(&["help"])), 0);
    assert_eq!(run(&args(&["frobnicate"])), 1);
    assert_eq!(run(&[]), 1);
}

#[test]
fn solve_recovers_tiny_instance() {
    let dir = tempfile::tempdir().unwrap();
    let (a_path, b_path, _, _) = write_instance_files(dir.path(), 12, 7, 2, 420);
    let out = dir.path().join("out");
    let code = run(&args(&[
        "solve",
        "--matrix",
        &a_path,
        "--obs",
        &b_path,
        "--restart",
        "fixed:t=100,tau=80",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "expected convergence (stall stop)");
    let x = read_solution(&out);

    // feasibility against the original system
    let a = sharpcs::cli::read_matrix_file(&a_path).unwrap();
    let b = sharpcs::cli::read_vector_file(&b_path).unwrap();
    let ax = a.mul_vec(&x);
    let resid: Vec<f64> = ax.iter().zip(&b).map(|(u, v)| u - v).collect();
    assert!(norm2(&resid) <= 1e-10, "residual {}", norm2(&resid));

    // l1 value matches the oracle on this tiny instance
    let oracle = min_l1_oracle(&a, &b).unwrap();
    assert!((norm1(&x) - oracle.value).abs() <= 1e-6);

    // trace file exists with the expected header
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,l1,f_mu,residual,restart"));
}

#[test]
fn solve_budget_exhaustion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (a_path, b_path, _, _) = write_instance_files(dir.path(), 12, 7, 2, 421);
    let out = dir.path().join("out");
    let code = run(&args(&[
        "solve",
        "--matrix",
        &a_path,
        "--obs",
        &b_path,
        "--restart",
        "fixed:t=5,tau=1",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 2);
    // best iterate still written
    assert!(out.join("solution.txt").exists());
}

#[test]
fn solve_missing_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&args(&[
        "solve",
        "--matrix",
        dir.path().join("nope.txt").to_str().unwrap(),
        "--obs",
        dir.path().join("nope2.txt").to_str().unwrap(),
    ]));
    assert_eq!(code, 1);
}

#[test]
fn solve_ball_mode_needs_delta() {
    let dir = tempfile::tempdir().unwrap();
    let (a_path, b_path, _, _) = write_instance_files(dir.path(), 12, 7, 2, 422);
    let code = run(&args(&["solve", "--matrix", &a_path, "--obs", &b_path, "--mode", "ball"]));
    assert_eq!(code, 1);
    let out = dir.path().join("ball_out");
    let code = run(&args(&[
        "solve",
        "--matrix",
        &a_path,
        "--obs",
        &b_path,
        "--mode",
        "ball",
        "--delta",
        "0.01",
        "--restart",
        "fixed:t=50,tau=100",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let x = read_solution(&out);
    let a = sharpcs::cli::read_matrix_file(&a_path).unwrap();
    let b = sharpcs::cli::read_vector_file(&b_path).unwrap();
    let ax = a.mul_vec(&x);
    let resid: Vec<f64> = ax.iter().zip(&b).map(|(u, v)| u - v).collect();
    assert!(norm2(&resid) <= 0.01 + 1e-10);
}

#[test]
fn cond_reports_identity_and_failure_regimes() {
    let dir = tempfile::tempdir().unwrap();
    // identity matrix, e1 signal
    fs::write(dir.path().join("I.txt"), "3 3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    fs::write(dir.path().join("e1.txt"), "3\n1\n0\n0\n").unwrap();
    let report = cond_report(
        dir.path().join("I.txt").to_str().unwrap(),
        dir.path().join("e1.txt").to_str().unwrap(),
        1,
    )
    .unwrap();
    let c = report["c_lower"].as_f64().unwrap();
    assert!(c >= 1.0 - 1e-9, "c_lower {c}");
    assert_eq!(report["infeasible"], serde_json::json!(false));

    // deterministic across repeated runs with the same seed
    let again = cond_report(
        dir.path().join("I.txt").to_str().unwrap(),
        dir.path().join("e1.txt").to_str().unwrap(),
        1,
    )
    .unwrap();
    assert_eq!(report, again);

    // underdetermined failure regime: sparsity above the measurement count
    let inst = gen_instance(10, 2, 4, 0.0, RngSeed(5)).unwrap();
    let mut a_text = format!("{} {}\n", inst.a.rows, inst.a.cols);
    for i in 0..inst.a.rows {
        let row: Vec<String> = inst.a.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        a_text.push_str(&row.join(" "));
        a_text.push('\n');
    }
    fs::write(dir.path().join("A2.txt"), a_text).unwrap();
    let mut x_text = format!("{}\n", inst.x0.len());
    for v in &inst.x0 {
        x_text.push_str(&format!("{v:.16e}\n"));
    }
    fs::write(dir.path().join("x2.txt"), x_text).unwrap();
    let report = cond_report(
        dir.path().join("A2.txt").to_str().unwrap(),
        dir.path().join("x2.txt").to_str().unwrap(),
        1,
    )
    .unwrap();
    assert_eq!(report["infeasible"], serde_json::json!(true));

    // zero signal is a usage error (exit 1 through the command)
    fs::write(dir.path().join("z.txt"), "3\n0\n0\n0\n").unwrap();
    let code = run(&args(&[
        "cond",
        "--matrix",
        dir.path().join("I.txt").to_str().unwrap(),
        "--signal",
        dir.path().join("z.txt").to_str().unwrap(),
    ]));
    assert_eq!(code, 1);
}

fn small_config() -> RunConfig {
    RunConfig {
        kind: sharpcs::cli::ExperimentKind::ConditionSweep,
        experiment: ExperimentConfig {
            p: 20,
            k: 2,
            n_values: vec![8, 14],
            delta: 1e-2,
            trials_per_n: 3,
            master_seed: 9,
            plan: RestartPlan { t: 40, tau: 20, mode: RestartMode::Fixed, mu_halving: true },
            power: PowerMethodParams { restarts: 2, ..Default::default() },
            cond_subsample: 3,
            mu0: None,
        },
        out_dir: String::new(),
    }
}

fn strip_volatile(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() == 13 {
                fields[..12].join(",")
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<String>>()
        .join("\n")
}

#[test]
fn experiment_and_report_pipeline() {
    let _guard = env_guard();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.out_dir = dir.path().join("run1").to_str().unwrap().to_string();
    let cfg_path = dir.path().join("c.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let code = run(&args(&["experiment", "--config", cfg_path.to_str().unwrap(), "--threads", "2"]));
    assert_eq!(code, 0);
    let trials1 = dir.path().join("run1").join("trials.csv");
    assert!(trials1.exists());
    assert!(dir.path().join("run1").join("summary.csv").exists());

    // identical rerun into another directory: byte-identical modulo the
    // timestamp line and wall-clock column
    let code = run(&args(&[
        "experiment",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run2").to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let trials2 = dir.path().join("run2").join("trials.csv");
    assert_eq!(strip_volatile(&trials1), strip_volatile(&trials2));

    // a different seed changes the records
    let code = run(&args(&[
        "experiment",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out-dir",
        dir.path().join("run3").to_str().unwrap(),
        "--seed",
        "77",
    ]));
    assert_eq!(code, 0);
    assert_ne!(strip_volatile(&trials1), strip_volatile(&dir.path().join("run3").join("trials.csv")));

    // report renders four well-formed SVGs from the trials CSV
    let plots = dir.path().join("plots");
    let code = run(&args(&[
        "report",
        "--input",
        trials1.to_str().unwrap(),
        "--out-dir",
        plots.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    for name in ["error.svg", "probability.svg", "iterations.svg", "condition.svg"] {
        let svg = fs::read_to_string(plots.join(name)).unwrap();
        check_well_formed_xml(&svg).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(svg.contains("<polyline"));
    }

    // schema mismatch is a usage error naming the offending column
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "seed,p,n,k,delta,wrong,exact,iters,mu_hat,c_lower,kappa,infeasible_flag,wall_ms\n").unwrap();
    let code = run(&args(&["report", "--input", bad.to_str().unwrap(), "--out-dir", plots.to_str().unwrap()]));
    assert_eq!(code, 1);
}

#[test]
fn experiment_rejects_empty_range_and_unknown_keys() {
    let _guard = env_guard();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.experiment.n_values.clear();
    cfg.out_dir = dir.path().join("out").to_str().unwrap().to_string();
    let cfg_path = dir.path().join("empty.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    assert_eq!(run(&args(&["experiment", "--config", cfg_path.to_str().unwrap()])), 1);
    assert!(!dir.path().join("out").exists(), "no partial outputs on usage errors");

    let bogus = dir.path().join("bogus.json");
    fs::write(&bogus, r#"{"kind":"condition-sweep","surprise":1}"#).unwrap();
    assert_eq!(run(&args(&["experiment", "--config", bogus.to_str().unwrap()])), 1);
}

#[test]
fn invalid_flags_exit_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let code = run(&args(&[
        "experiment",
        "--bogus-flag",
        "1",
        "--out-dir",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 1);
    assert!(!out.exists());
}

#[test]
fn threads_env_var_is_honored_and_overridden() {
    let _guard = env_guard();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.out_dir = dir.path().join("env_run").to_str().unwrap().to_string();
    let cfg_path = dir.path().join("c.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    std::env::set_var("SHARPCS_THREADS", "2");
    assert_eq!(run(&args(&["experiment", "--config", cfg_path.to_str().unwrap()])), 0);
    assert!(dir.path().join("env_run").join("trials.csv").exists());

    // a bad value is a usage error, but --threads overrides it
    std::env::set_var("SHARPCS_THREADS", "not-a-number");
    assert_eq!(run(&args(&["experiment", "--config", cfg_path.to_str().unwrap()])), 1);
    assert_eq!(
        run(&args(&[
            "experiment",
            "--config",
            cfg_path.to_str().unwrap(),
            "--out-dir",
            dir.path().join("flag_run").to_str().unwrap(),
            "--threads",
            "1",
        ])),
        0
    );
    std::env::remove_var("SHARPCS_THREADS");
}

#[test]
fn defaults_config_round_trip() {
    let _guard = env_guard();
    // `defaults` output parses back to the default config, and running with
    // it matches running with no config at all.
    let text = serde_json::to_string_pretty(&RunConfig::default()).unwrap();
    let parsed: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.experiment.p, RunConfig::default().experiment.p);
    assert_eq!(parsed.experiment.master_seed, RunConfig::default().experiment.master_seed);
    assert_eq!(run(&args(&["defaults"])), 0);

    // equality of behavior on a small config: write the default, shrink it,
    // and check config-file and in-memory runs agree
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.out_dir = dir.path().join("a").to_str().unwrap().to_string();
    let cfg_path = dir.path().join("c.json");
    fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    assert_eq!(run(&args(&["experiment", "--config", cfg_path.to_str().unwrap()])), 0);

    let (records, _) = sharpcs::experiments::run_condition_sweep(&cfg.experiment).unwrap();
    let read_back = sharpcs::experiments::read_trials_csv(&dir.path().join("a").join("trials.csv")).unwrap();
    assert_eq!(records.len(), read_back.len());
    for (a, b) in records.iter().zip(&read_back) {
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.err_l2, b.err_l2);
        assert_eq!(a.iters, b.iters);
        assert_eq!(a.mu_hat, b.mu_hat);
    }
}
