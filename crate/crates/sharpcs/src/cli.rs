//! Command-line entry points: instance solving, condition estimation,
//! experiment execution, and SVG report rendering.
//!
//! Exit-code contract: 0 success, 1 usage or input error, 2 inner-iteration
//! budget exhausted (best iterate still written). Every command is
//! deterministic given `--seed`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conditioning::{condition_estimate, PowerMethodParams};
use crate::error::Error;
use crate::experiments::{
    read_trials_csv, run_condition_sweep, run_restart_comparison, summarize, write_finals_csv,
    write_gap_csv, write_summary_csv, write_trials_csv, ExperimentConfig,
};
use crate::linalg::{classical_condition_number, DenseMatrix, RngSeed};
use crate::report::{line_plot, Series};
use crate::restart::{restart_solve, RestartPlan};
use crate::smooth::{default_start, FeasibleSet};
use crate::Result;

pub const USAGE: &str = "\
sharpcs - l1 recovery with sharpness-driven restarts and condition estimates

USAGE:
  sharpcs <command> [flags]

COMMANDS:
  solve       Solve one recovery problem from matrix/observation files
  cond        Estimate the cone-restricted condition number of an instance
  experiment  Run a seeded experiment sweep and write CSVs
  report      Render SVG plots from a trials CSV
  defaults    Print the default experiment configuration as JSON
  help        Show this message

FLAGS (per command):
  solve:      --matrix FILE --obs FILE [--mode equality|ball] [--delta D]
              [--restart fixed:t=T,tau=R | grid:t0=T,tau=R] [--mu0 M]
              [--out-dir DIR] [--seed S]
  cond:       --matrix FILE --signal FILE [--seed S]
  experiment: [--config FILE] [--out-dir DIR] [--threads N] [--seed S]
  report:     --input trials.csv [--out-dir DIR]

  The worker count defaults to the SHARPCS_THREADS environment variable;
  --threads overrides it.

FILES:
  matrix: first line 'n p', then n*p whitespace-separated values (row-major)
  vector: first line 'n', then n values

EXIT CODES:
  0 success / converged, 1 usage or input error, 2 budget exhausted
";

/// Top-level experiment configuration file: experiment kind, parameters, and
/// output location. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub experiment: ExperimentConfig,
    pub out_dir: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ConditionSweep,
    RestartComparison,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: ExperimentKind::ConditionSweep,
            experiment: ExperimentConfig::default(),
            out_dir: "runs".to_string(),
        }
    }
}

/// Dispatch a full argument list (without the binary name) to a command and
/// return the process exit code.
pub fn run(args: &[String]) -> i32 {
    if args.iter().any(|a| a == "--help" || a == "-h") {
        println!("{USAGE}");
        return 0;
    }
    let Some(command) = args.first() else {
        eprintln!("{USAGE}");
        return 1;
    };
    let rest = &args[1..];
    let result = match command.as_str() {
        "solve" => cmd_solve(rest),
        "cond" => cmd_cond(rest),
        "experiment" => cmd_experiment(rest),
        "report" => cmd_report(rest),
        "defaults" => cmd_defaults(rest),
        "help" => {
            println!("{USAGE}");
            Ok(0)
        }
        other => {
            eprintln!("unknown command '{other}'\n\n{USAGE}");
            return 1;
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// flag parsing

struct Flags {
    values: Vec<(String, String)>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> Result<Flags> {
        let mut values = Vec::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let Some(name) = arg.strip_prefix("--") else {
                return Err(Error::invalid(format!("unexpected argument '{arg}'")));
            };
            let (key, value) = if let Some((k, v)) = name.split_once('=') {
                (k.to_string(), v.to_string())
            } else {
                let v = it
                    .next()
                    .ok_or_else(|| Error::invalid(format!("missing value for --{name}")))?;
                (name.to_string(), v.clone())
            };
            if !allowed.contains(&key.as_str()) {
                return Err(Error::invalid(format!("unknown flag --{key}")));
            }
            values.push((key, value));
        }
        Ok(Flags { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::invalid(format!("--{key} is required")))
    }

    fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::invalid(format!("cannot parse --{key} value '{v}'"))),
        }
    }
}

fn parse_restart_spec(s: &str) -> Result<RestartPlan> {
    let (mode, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("restart spec '{s}' must look like fixed:t=100,tau=10")))?;
    let mut t = None;
    let mut tau = None;
    for part in rest.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("bad restart spec component '{part}'")))?;
        let value: usize = v
            .parse()
            .map_err(|_| Error::invalid(format!("bad number '{v}' in restart spec")))?;
        match k {
            "t" | "t0" => t = Some(value),
            "tau" => tau = Some(value),
            other => return Err(Error::invalid(format!("unknown restart spec key '{other}'"))),
        }
    }
    let t = t.ok_or_else(|| Error::invalid("restart spec needs t".to_string()))?;
    let tau = tau.ok_or_else(|| Error::invalid("restart spec needs tau".to_string()))?;
    let plan = match mode {
        "fixed" => RestartPlan::fixed(t, tau),
        "grid" => RestartPlan::grid(t, tau),
        other => return Err(Error::invalid(format!("unknown restart mode '{other}'"))),
    };
    plan.validate()?;
    Ok(plan)
}

// ---------------------------------------------------------------------------
// text matrix / vector files

fn tokens_with_positions(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut start: Option<usize> = None;
        for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    out.push((lineno + 1, s + 1, &line[s..i]));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
    }
    out
}

fn parse_number<T: std::str::FromStr>(
    path: &str,
    tok: Option<&(usize, usize, &str)>,
    what: &str,
) -> Result<T> {
    match tok {
        None => Err(Error::Parse(format!("{path}: unexpected end of file, expected {what}"))),
        Some((line, col, s)) => s.parse::<T>().map_err(|_| {
            Error::Parse(format!("{path}:{line}:{col}: expected {what}, found '{s}'"))
        }),
    }
}

/// Dense matrix text format: first line "n p", then n*p whitespace-separated
/// values in row-major order.
pub fn read_matrix_file(path: &str) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    let toks = tokens_with_positions(&text);
    let mut it = toks.iter();
    let n: usize = parse_number(path, it.next(), "row count")?;
    let p: usize = parse_number(path, it.next(), "column count")?;
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n * p {
        data.push(parse_number::<f64>(path, it.next(), "a matrix entry")?);
    }
    if let Some((line, col, s)) = it.next() {
        return Err(Error::Parse(format!(
            "{path}:{line}:{col}: trailing token '{s}' after {n}x{p} entries"
        )));
    }
    DenseMatrix::new(n, p, data)
}

/// Vector text format: first line "n", then n values.
pub fn read_vector_file(path: &str) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let toks = tokens_with_positions(&text);
    let mut it = toks.iter();
    let n: usize = parse_number(path, it.next(), "length")?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        data.push(parse_number::<f64>(path, it.next(), "a vector entry")?);
    }
    if let Some((line, col, s)) = it.next() {
        return Err(Error::Parse(format!("{path}:{line}:{col}: trailing token '{s}'")));
    }
    Ok(data)
}

pub fn write_vector_file(path: &Path, v: &[f64]) -> Result<()> {
    let mut out = format!("{}\n", v.len());
    for x in v {
        out.push_str(&format!("{x:.16e}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// commands

fn cmd_solve(args: &[String]) -> Result<i32> {
    let flags = Flags::parse(
        args,
        &["matrix", "obs", "mode", "delta", "restart", "mu0", "out-dir", "seed"],
    )?;
    let mode = flags.get("mode").unwrap_or("equality");
    if mode != "equality" && mode != "ball" {
        return Err(Error::invalid(format!("--mode must be equality or ball, got '{mode}'")));
    }
    let delta: f64 = flags.get_parsed("delta")?.unwrap_or(0.0);
    if mode == "ball" && !(delta > 0.0) {
        return Err(Error::invalid("ball mode needs --delta > 0".to_string()));
    }
    let plan = match flags.get("restart") {
        Some(spec) => parse_restart_spec(spec)?,
        None => RestartPlan::grid(50, 40),
    };
    let out_dir = PathBuf::from(flags.get("out-dir").unwrap_or("."));

    let a_raw = read_matrix_file(flags.require("matrix")?)?;
    let b_raw = read_vector_file(flags.require("obs")?)?;
    if b_raw.len() != a_raw.rows {
        return Err(Error::invalid(format!(
            "observation length {} does not match matrix rows {}",
            b_raw.len(),
            a_raw.rows
        )));
    }

    // Solve on the row-orthonormalized system; the transform preserves the
    // equality feasible set exactly and sets the ball radius scale to delta.
    let (q, transform) = crate::linalg::row_orthonormalize(&a_raw)?;
    let b = transform.mul_vec(&b_raw);
    let f = match mode {
        "equality" => FeasibleSet::equality(q, b)?,
        _ => {
            let snorm = crate::linalg::spectral_norm(&q);
            FeasibleSet::ball(q, b, delta * snorm)?
        }
    };
    let y0 = default_start(&f);
    let mu0 = flags
        .get_parsed::<f64>("mu0")?
        .unwrap_or_else(|| crate::experiments::auto_mu0(&y0));
    let (x, trace) = restart_solve(&f, &y0, &plan, mu0)?;

    fs::create_dir_all(&out_dir)?;
    write_vector_file(&out_dir.join("solution.txt"), &x)?;
    let mut csv = String::from("iter,l1,f_mu,residual,restart\n");
    let mut restart_idx = 0usize;
    let mut bounds = trace.restart_bounds.iter().peekable();
    for i in 0..trace.len() {
        while let Some(&&b) = bounds.peek() {
            if b <= i {
                restart_idx += 1;
                bounds.next();
            } else {
                break;
            }
        }
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{}\n",
            i + 1,
            trace.l1[i],
            trace.f_mu[i],
            trace.residual[i],
            restart_idx
        ));
    }
    fs::write(out_dir.join("trace.csv"), csv)?;

    Ok(if trace.stalled { 0 } else { 2 })
}

/// Build the JSON report printed by `cond`: the condition estimate, the
/// classical condition number, and every parameter that went into the run.
pub fn cond_report(matrix_path: &str, signal_path: &str, seed: u64) -> Result<serde_json::Value> {
    let a = read_matrix_file(matrix_path)?;
    let x0 = read_vector_file(signal_path)?;
    if x0.len() != a.cols {
        return Err(Error::invalid(format!(
            "signal length {} does not match matrix columns {}",
            x0.len(),
            a.cols
        )));
    }
    let params = PowerMethodParams::for_matrix(&a);
    let est = condition_estimate(&a, &x0, &params, RngSeed(seed))?;
    let kappa = classical_condition_number(&a).ok();

    let json_f64 = |v: f64| -> serde_json::Value {
        if v.is_finite() {
            serde_json::json!(v)
        } else {
            serde_json::Value::Null
        }
    };
    Ok(serde_json::json!({
        "mu_hat": json_f64(est.mu_hat),
        "c_lower": json_f64(est.c_lower),
        "kappa": kappa.map(json_f64).unwrap_or(serde_json::Value::Null),
        "spectral_norm": json_f64(est.spectral_norm),
        "converged": est.converged,
        "infeasible": est.infeasible,
        "power_iters": est.power_iters,
        "init_runs": est.init_runs,
        "seed": seed,
        "params": {
            "eps1": params.eps1,
            "eps2": params.eps2,
            "gamma": params.gamma,
            "max_iters": params.max_iters,
            "tol": params.tol,
            "restarts": params.restarts,
            "power_iters": params.power_iters,
            "inner_starts": params.inner_starts,
        },
    }))
}

fn cmd_cond(args: &[String]) -> Result<i32> {
    let flags = Flags::parse(args, &["matrix", "signal", "seed"])?;
    let matrix = flags.require("matrix")?;
    let signal = flags.require("signal")?;
    let seed: u64 = flags.get_parsed("seed")?.unwrap_or(0);
    let out = cond_report(matrix, signal, seed)?;
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(0)
}

fn worker_threads(flags: &Flags) -> Result<Option<usize>> {
    if let Some(t) = flags.get_parsed::<usize>("threads")? {
        return Ok(Some(t.max(1)));
    }
    match std::env::var("SHARPCS_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .map(|t| Some(t.max(1)))
            .map_err(|_| Error::invalid(format!("cannot parse SHARPCS_THREADS value '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn cmd_experiment(args: &[String]) -> Result<i32> {
    let flags = Flags::parse(args, &["config", "out-dir", "threads", "seed"])?;
    let mut cfg: RunConfig = match flags.get("config") {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{path}: {e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = flags.get_parsed::<u64>("seed")? {
        cfg.experiment.master_seed = seed;
    }
    if let Some(dir) = flags.get("out-dir") {
        cfg.out_dir = dir.to_string();
    }
    cfg.experiment.validate()?;
    let threads = worker_threads(&flags)?;

    let out_dir = PathBuf::from(&cfg.out_dir);
    match cfg.kind {
        ExperimentKind::ConditionSweep => {
            let run = || run_condition_sweep(&cfg.experiment);
            let (records, summary) = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Internal(e.to_string()))?
                    .install(run),
                None => run(),
            }?;
            fs::create_dir_all(&out_dir)?;
            write_trials_csv(&out_dir.join("trials.csv"), &records)?;
            write_summary_csv(&out_dir.join("summary.csv"), &summary)?;
            let violations = crate::experiments::error_bound_violations(&records);
            println!(
                "wrote {} trials across {} n-values to {} (error-bound violations: {violations})",
                records.len(),
                summary.len(),
                out_dir.display()
            );
        }
        ExperimentKind::RestartComparison => {
            let run = || run_restart_comparison(&cfg.experiment);
            let comparison = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Internal(e.to_string()))?
                    .install(run),
                None => run(),
            }?;
            fs::create_dir_all(&out_dir)?;
            write_gap_csv(&out_dir.join("restart_gaps.csv"), &comparison)?;
            write_finals_csv(&out_dir.join("restart_finals.csv"), &comparison)?;
            println!(
                "wrote {} trace rows / {} cell results to {}",
                comparison.rows.len(),
                comparison.finals.len(),
                out_dir.display()
            );
        }
    }
    Ok(0)
}

fn cmd_report(args: &[String]) -> Result<i32> {
    let flags = Flags::parse(args, &["input", "out-dir"])?;
    let input = flags.require("input")?;
    let out_dir = PathBuf::from(flags.get("out-dir").unwrap_or("."));
    let records = read_trials_csv(Path::new(input))?;
    if records.is_empty() {
        return Err(Error::Parse(format!("{input}: no records")));
    }
    let summary = summarize(&records);
    let xs: Vec<f64> = summary.iter().map(|r| r.n as f64).collect();

    let blue = "#1f77b4";
    let red = "#d62728";
    let plots = [
        (
            "error.svg",
            line_plot(
                "recovery error",
                "n",
                "mean ||x - x0||_2",
                &xs,
                &[Series::new("mean", summary.iter().map(|r| r.mean_err).collect(), blue)],
                true,
            ),
        ),
        (
            "probability.svg",
            line_plot(
                "exact recovery probability",
                "n",
                "P(exact)",
                &xs,
                &[Series::new("mean", summary.iter().map(|r| r.prob_exact).collect(), blue)],
                false,
            ),
        ),
        (
            "iterations.svg",
            line_plot(
                "iterations to tolerance",
                "n",
                "geometric mean iterations",
                &xs,
                &[Series::new("gmean", summary.iter().map(|r| r.gmean_iters).collect(), blue)],
                true,
            ),
        ),
        (
            "condition.svg",
            line_plot(
                "condition number lower bound",
                "n",
                "C lower bound",
                &xs,
                &[
                    Series::new("gmean", summary.iter().map(|r| r.gmean_clower).collect(), blue),
                    Series::new("p10", summary.iter().map(|r| r.p10_clower).collect(), red),
                    Series::new("p90", summary.iter().map(|r| r.p90_clower).collect(), red),
                ],
                true,
            ),
        ),
    ];
    fs::create_dir_all(&out_dir)?;
    for (name, svg) in plots {
        fs::write(out_dir.join(name), svg)?;
    }
    println!("wrote 4 plots to {}", out_dir.display());
    Ok(0)
}

fn cmd_defaults(args: &[String]) -> Result<i32> {
    Flags::parse(args, &[])?;
    println!("{}", serde_json::to_string_pretty(&RunConfig::default()).expect("json"));
    Ok(0)
}
