//! Seeded experiment harness: instance generation, restart comparisons,
//! condition sweeps, summaries, and CSV persistence.
//!
//! Every trial derives its own seed from the master seed, so runs are
//! deterministic and trials parallelize freely. Records are sorted by
//! (n, trial index) before any aggregation or output.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditioning::{condition_estimate, PowerMethodParams};
use crate::error::Error;
use crate::linalg::{
    classical_condition_number, gaussian_matrix, norm1, norm2, norm_inf, row_orthonormalize,
    spectral_norm, DenseMatrix, RngSeed,
};
use crate::restart::{restart_solve, RestartMode, RestartPlan};
use crate::rng::{derive_seed, Rng};
use crate::smooth::{default_start, FeasibleSet};
use crate::Result;

/// Exact-recovery threshold on the l2 error of the noiseless solve.
pub const EXACT_RECOVERY_TOL: f64 = 1e-5;
/// A trial's iterations-to-tolerance counts inner iterations until the true
/// l1 gap falls below this.
pub const GAP_TOL: f64 = 1e-6;

/// Configuration of one experiment sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Ambient dimension.
    pub p: usize,
    /// Signal sparsity.
    pub k: usize,
    /// Measurement counts to sweep.
    pub n_values: Vec<usize>,
    /// Noise level for the ball-constrained solve.
    pub delta: f64,
    pub trials_per_n: usize,
    pub master_seed: u64,
    /// Restart plan per solve; its t * tau is the inner-iteration budget.
    pub plan: RestartPlan,
    /// Condition-estimation parameters.
    pub power: PowerMethodParams,
    /// Condition estimates are computed for the first `cond_subsample`
    /// trials of each n (they dominate the runtime).
    pub cond_subsample: usize,
    /// Initial smoothing level; `None` picks 0.1 * ||A^T b||_inf per trial.
    pub mu0: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: 100,
            k: 5,
            n_values: (1..=12).map(|i| 5 * i).collect(),
            delta: 1e-2,
            trials_per_n: 20,
            master_seed: 1,
            // fixed smoothing level for the measurement run; the polish and
            // noisy stages use the halving schedule internally
            plan: RestartPlan { t: 50, tau: 400, mode: RestartMode::Fixed, mu_halving: false },
            power: PowerMethodParams::default(),
            cond_subsample: 20,
            mu0: Some(3e-5),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.k == 0 || self.k > self.p {
            return Err(Error::invalid(format!("need 1 <= k <= p, got k = {}, p = {}", self.k, self.p)));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("n_values must be nonempty".to_string()));
        }
        if self.n_values.iter().any(|&n| n == 0 || n > self.p) {
            return Err(Error::invalid("every n must lie in [1, p]".to_string()));
        }
        if self.trials_per_n == 0 {
            return Err(Error::invalid("trials_per_n must be at least 1".to_string()));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::invalid("delta must be nonnegative".to_string()));
        }
        self.plan.validate()?;
        self.power.validate()
    }
}

/// One generated sensing instance. The stored matrix has orthonormal rows;
/// observations are generated against it directly.
#[derive(Debug, Clone)]
pub struct SensingInstance {
    pub seed: u64,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    /// Row-orthonormal sensing matrix.
    pub a: DenseMatrix,
    /// Noisy observations A x0 + w with ||w||_2 = delta ||A||_2.
    pub b: Vec<f64>,
    /// Clean observations A x0.
    pub b_clean: Vec<f64>,
    /// Ground-truth signal, exactly k-sparse with unit l2 norm.
    pub x0: Vec<f64>,
    /// Classical condition number of the raw Gaussian matrix.
    pub kappa: f64,
    /// Spectral norm of the stored matrix (1 up to rounding).
    pub snorm: f64,
}

/// Generate a seeded instance: Gaussian sensing matrix (rows orthonormalized),
/// uniformly random size-k support with Gaussian entries rescaled to unit l2
/// norm, and Gaussian noise rescaled to ||w||_2 = delta ||A||_2.
///
/// Sub-seeds are split deterministically: the signal stream depends only on
/// (seed, p, k), so sweeping n keeps the signal fixed, and the matrix stream
/// fills row-major, so larger n extends the same matrix with new rows.
pub fn gen_instance(p: usize, n: usize, k: usize, delta: f64, seed: RngSeed) -> Result<SensingInstance> {
    if k > p {
        return Err(Error::invalid(format!("sparsity k = {k} exceeds dimension p = {p}")));
    }
    if k == 0 || n == 0 || n > p {
        return Err(Error::invalid(format!("need k >= 1 and 1 <= n <= p, got k = {k}, n = {n}, p = {p}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative".to_string()));
    }
    let mut sig_rng = Rng::new(derive_seed(seed.0, 1));
    let support = sig_rng.subset(p, k);
    let mut x0 = vec![0.0; p];
    for &i in &support {
        x0[i] = sig_rng.normal();
    }
    let xnorm = norm2(&x0);
    for v in x0.iter_mut() {
        *v /= xnorm;
    }

    let raw = gaussian_matrix(RngSeed(derive_seed(seed.0, 2)), n, p)?;
    let kappa = classical_condition_number(&raw)?;
    let (a, _) = row_orthonormalize(&raw)?;
    let snorm = spectral_norm(&a);

    let b_clean = a.mul_vec(&x0);
    let b = if delta > 0.0 {
        let mut noise_rng = Rng::new(derive_seed(seed.0, 3));
        let mut w = noise_rng.normal_vec(n);
        let target = delta * snorm;
        let wn = norm2(&w);
        for v in w.iter_mut() {
            *v *= target / wn;
        }
        b_clean.iter().zip(&w).map(|(u, v)| u + v).collect()
    } else {
        b_clean.clone()
    };

    Ok(SensingInstance { seed: seed.0, p, n, k, delta, a, b, b_clean, x0, kappa, snorm })
}

/// Default smoothing level when none is configured.
pub fn auto_mu0(y0: &[f64]) -> f64 {
    (0.1 * norm_inf(y0)).max(1e-12)
}

/// One experiment trial.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub seed: u64,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    /// l2 recovery error of the noisy solve (noiseless when delta = 0).
    pub err_l2: f64,
    /// l2 error of the noiseless solve; not serialized.
    pub err_noiseless: f64,
    /// Exact recovery: noiseless error below 1e-5.
    pub exact: bool,
    /// Inner iterations until the true l1 gap fell below 1e-6.
    pub iters: usize,
    pub mu_hat: Option<f64>,
    /// Condition lower bound; absent when flagged infeasible or not computed.
    pub c_lower: Option<f64>,
    pub kappa: Option<f64>,
    pub infeasible: Option<bool>,
    pub wall_ms: f64,
}

/// Per-n aggregates of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub mean_err: f64,
    pub prob_exact: f64,
    pub gmean_iters: f64,
    /// Geometric mean of the condition lower bound over non-flagged
    /// estimates; 0 when no estimate is available for this n.
    pub gmean_clower: f64,
    pub p10_clower: f64,
    pub p90_clower: f64,
    /// Number of estimates excluded as infeasible.
    pub excluded: usize,
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d)
}

/// Inner iterations until the trace's l1 value is within `GAP_TOL` of the
/// reference; the full length when it never is.
fn iterations_to_tolerance(l1_trace: &[f64], reference: f64) -> usize {
    for (i, &v) in l1_trace.iter().enumerate() {
        if v - reference <= GAP_TOL {
            return i + 1;
        }
    }
    l1_trace.len()
}

fn run_single_trial(cfg: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialRecord> {
    let seed = derive_seed(cfg.master_seed, ((n as u64) << 24) | trial as u64);
    let inst = gen_instance(cfg.p, n, cfg.k, cfg.delta, RngSeed(seed))?;
    let start = Instant::now();

    // Noiseless measurement run under the configured plan: this is the run
    // the iteration count is read from. A smoothing-continuation polish then
    // removes the remaining smoothing bias so the exact-recovery flag
    // reflects the problem, not the measurement schedule.
    let f_eq = FeasibleSet::equality(inst.a.clone(), inst.b_clean.clone())?;
    let y0 = default_start(&f_eq);
    let mu0 = cfg.mu0.unwrap_or_else(|| auto_mu0(&y0));
    let (x_eq, trace) = restart_solve(&f_eq, &y0, &cfg.plan, mu0)?;
    let polish_plan = RestartPlan::fixed(cfg.plan.t.max(50), 40);
    let (x_tight, _) = restart_solve(&f_eq, &x_eq, &polish_plan, mu0)?;
    let err_noiseless = l2_dist(&x_tight, &inst.x0);
    let exact = err_noiseless < EXACT_RECOVERY_TOL;
    let reference = norm1(&x_tight).min(norm1(&inst.x0));
    let iters = iterations_to_tolerance(&trace.l1, reference);

    // noisy solve for the error column, always at tight tolerance
    let err_l2 = if cfg.delta > 0.0 {
        let eps = cfg.delta * inst.snorm;
        let f_ball = FeasibleSet::ball(inst.a.clone(), inst.b.clone(), eps)?;
        let y0b = default_start(&f_ball);
        let (x_ball, _) = restart_solve(&f_ball, &y0b, &polish_plan, mu0)?;
        l2_dist(&x_ball, &inst.x0)
    } else {
        err_noiseless
    };

    let (mu_hat, c_lower, kappa, infeasible) = if trial < cfg.cond_subsample {
        let est = condition_estimate(&inst.a, &inst.x0, &cfg.power, RngSeed(derive_seed(seed, 7)))?;
        let c = if est.infeasible { None } else { Some(est.c_lower) };
        (Some(est.mu_hat), c, Some(inst.kappa), Some(est.infeasible))
    } else {
        (None, None, None, None)
    };

    Ok(TrialRecord {
        seed,
        p: cfg.p,
        n,
        k: cfg.k,
        delta: cfg.delta,
        err_l2,
        err_noiseless,
        exact,
        iters,
        mu_hat,
        c_lower,
        kappa,
        infeasible,
        wall_ms: start.elapsed().as_secs_f64() * 1000.0,
    })
}

/// Condition sweep: for every n and trial, solve the noisy and noiseless
/// problems at tight tolerance, estimate the condition number on the
/// configured subsample, and aggregate per-n summaries.
pub fn run_condition_sweep(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, Vec<SummaryRow>)> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials_per_n).map(move |j| (n, j)))
        .collect();
    let mut results: Vec<((usize, usize), Result<TrialRecord>)> = jobs
        .into_par_iter()
        .map(|(n, j)| ((n, j), run_single_trial(cfg, n, j)))
        .collect();
    results.sort_by_key(|((n, j), _)| (*n, *j));
    let mut records = Vec::with_capacity(results.len());
    for (_, r) in results {
        records.push(r?);
    }
    let summary = summarize(&records);
    Ok((records, summary))
}

/// Per-n summary: arithmetic mean for errors and probabilities, geometric
/// mean for iteration counts and condition numbers (excluding flagged
/// estimates, with the exclusion count reported), and nearest-rank 10th/90th
/// percentiles of the condition lower bound.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
        if group.is_empty() {
            continue;
        }
        let count = group.len() as f64;
        let mean_err = group.iter().map(|r| r.err_l2).sum::<f64>() / count;
        let prob_exact = group.iter().filter(|r| r.exact).count() as f64 / count;
        let gmean_iters = geometric_mean(group.iter().map(|r| r.iters.max(1) as f64));
        let mut cond: Vec<f64> = group
            .iter()
            .filter(|r| r.infeasible == Some(false))
            .filter_map(|r| r.c_lower)
            .collect();
        cond.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let excluded = group.iter().filter(|r| r.infeasible == Some(true)).count();
        let (gmean_clower, p10, p90) = if cond.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            (
                geometric_mean(cond.iter().copied()),
                nearest_rank(&cond, 0.10),
                nearest_rank(&cond, 0.90),
            )
        };
        rows.push(SummaryRow {
            n,
            mean_err,
            prob_exact,
            gmean_iters,
            gmean_clower,
            p10_clower: p10,
            p90_clower: p90,
            excluded,
        });
    }
    rows
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    match vals.len() {
        0 => 0.0,
        1 => vals[0],
        n => (vals.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / n as f64).exp(),
    }
}

/// Nearest-rank percentile of an ascending-sorted slice: the ceil(q N)-th
/// smallest value.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// One point of a gap-versus-iteration curve.
#[derive(Debug, Clone)]
pub struct GapTraceRow {
    pub seed: u64,
    pub n: usize,
    pub cell: String,
    pub t: usize,
    pub tau: usize,
    pub iter: usize,
    pub gap: f64,
}

/// Final gap of one (seed, n, cell) run.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub seed: u64,
    pub n: usize,
    pub cell: String,
    pub t: usize,
    pub tau: usize,
    pub final_gap: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RestartComparison {
    pub rows: Vec<GapTraceRow>,
    pub finals: Vec<CellResult>,
}

/// Restart-versus-plain comparison on the noiseless problem: for each n in
/// the sweep and each trial, run a plain solve (one restart with the whole
/// budget) and restarted cells t in {t0, 2 t0, ...} at the same total budget,
/// recording gap-versus-iteration traces against ||x0||_1.
///
/// Trial seeds here depend on the trial index only, so when the sweep varies
/// the measurement count the signal stays fixed and the sensing matrix is
/// extended row by row (a nested design).
pub fn run_restart_comparison(cfg: &ExperimentConfig) -> Result<RestartComparison> {
    cfg.validate()?;
    let budget = cfg.plan.budget();
    let mut cells: Vec<(String, usize, usize)> = vec![("plain".to_string(), budget, 1)];
    let mut t = cfg.plan.t;
    while t < budget {
        let tau = budget / t;
        if tau >= 2 {
            cells.push((format!("t{t}"), t, tau));
        }
        t *= 2;
    }

    let jobs: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.trials_per_n).map(move |j| (n, j)))
        .collect();
    let mut results: Vec<((usize, usize), Result<RestartComparison>)> = jobs
        .into_par_iter()
        .map(|(n, j)| {
            let run = || -> Result<RestartComparison> {
                let seed = derive_seed(cfg.master_seed, 0xC0FFEE ^ j as u64);
                let inst = gen_instance(cfg.p, n, cfg.k, 0.0, RngSeed(seed))?;
                let f = FeasibleSet::equality(inst.a.clone(), inst.b_clean.clone())?;
                let y0 = default_start(&f);
                let mu0 = cfg.mu0.unwrap_or_else(|| auto_mu0(&y0));
                let reference = norm1(&inst.x0);
                let mut out = RestartComparison::default();
                for (name, t, tau) in &cells {
                    let plan = RestartPlan::fixed(*t, *tau);
                    let (y, trace) = restart_solve(&f, &y0, &plan, mu0)?;
                    for (i, &l1) in trace.l1.iter().enumerate() {
                        out.rows.push(GapTraceRow {
                            seed,
                            n,
                            cell: name.clone(),
                            t: *t,
                            tau: *tau,
                            iter: i + 1,
                            gap: l1 - reference,
                        });
                    }
                    out.finals.push(CellResult {
                        seed,
                        n,
                        cell: name.clone(),
                        t: *t,
                        tau: *tau,
                        final_gap: norm1(&y) - reference,
                    });
                }
                Ok(out)
            };
            ((n, j), run())
        })
        .collect();
    results.sort_by_key(|((n, j), _)| (*n, *j));
    let mut merged = RestartComparison::default();
    for (_, r) in results {
        let part = r?;
        merged.rows.extend(part.rows);
        merged.finals.extend(part.finals);
    }
    Ok(merged)
}

/// Audit of the noise error bound over sweep records: counts trials whose
/// recovery error exceeds 1.05 * 2 delta ||A||_2 / mu_hat among noisy trials
/// with a feasible condition estimate (sweep matrices are row-orthonormal,
/// so ||A||_2 = 1). Expected to be zero.
pub fn error_bound_violations(records: &[TrialRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.delta > 0.0 && r.infeasible == Some(false))
        .filter(|r| match r.mu_hat {
            Some(mu) if mu > 0.0 => r.err_l2 > 1.05 * 2.0 * r.delta / mu,
            _ => false,
        })
        .count()
}

// ---------------------------------------------------------------------------
// statistics helpers

/// Least-squares line fit: returns (slope, intercept, r_squared).
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &id in &idx[i..=j] {
            out[id] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    let (slope, _, r2) = linear_regression(&rx, &ry);
    slope.signum() * r2.sqrt()
}

// ---------------------------------------------------------------------------
// CSV I/O

pub const TRIAL_HEADER: &str =
    "seed,p,n,k,delta,err_l2,exact,iters,mu_hat,c_lower,kappa,infeasible_flag,wall_ms";
pub const SUMMARY_HEADER: &str =
    "n,mean_err,prob_exact,gmean_iters,gmean_clower,p10_clower,p90_clower,excluded";
pub const GAP_HEADER: &str = "seed,n,cell,t,tau,iter,gap";

/// Full-precision float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn timestamp_line() -> String {
    let ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    format!("# generated_unix_ms {ms}")
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&timestamp_line());
    out.push('\n');
    out.push_str(TRIAL_HEADER);
    out.push('\n');
    for r in records {
        let infeasible = match r.infeasible {
            None => String::new(),
            Some(true) => "1".to_string(),
            Some(false) => "0".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.seed,
            r.p,
            r.n,
            r.k,
            fmt_f64(r.delta),
            fmt_f64(r.err_l2),
            u8::from(r.exact),
            r.iters,
            opt_f64(r.mu_hat),
            opt_f64(r.c_lower),
            opt_f64(r.kappa),
            infeasible,
            fmt_f64(r.wall_ms),
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, col: &str, line: usize) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::Parse(format!("line {line}: column '{col}': cannot parse '{s}'")))
}

fn parse_opt_f64(s: &str, col: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field::<f64>(s, col, line).map(Some)
    }
}

fn check_header(found: &str, expected: &str) -> Result<()> {
    if found == expected {
        return Ok(());
    }
    let fcols: Vec<&str> = found.split(',').collect();
    let ecols: Vec<&str> = expected.split(',').collect();
    for (i, e) in ecols.iter().enumerate() {
        match fcols.get(i) {
            Some(f) if f == e => continue,
            Some(f) => {
                return Err(Error::Parse(format!(
                    "header column {} is '{f}', expected '{e}'",
                    i + 1
                )))
            }
            None => return Err(Error::Parse(format!("missing header column '{e}'"))),
        }
    }
    Err(Error::Parse(format!("unexpected extra header columns beyond '{expected}'")))
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".to_string()))?;
    check_header(header, TRIAL_HEADER)?;
    let mut records = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(Error::Parse(format!(
                "line {}: expected 13 fields, found {}",
                lineno + 1,
                f.len()
            )));
        }
        let ln = lineno + 1;
        let err_l2: f64 = parse_field(f[5], "err_l2", ln)?;
        records.push(TrialRecord {
            seed: parse_field(f[0], "seed", ln)?,
            p: parse_field(f[1], "p", ln)?,
            n: parse_field(f[2], "n", ln)?,
            k: parse_field(f[3], "k", ln)?,
            delta: parse_field(f[4], "delta", ln)?,
            err_l2,
            err_noiseless: f64::NAN,
            exact: parse_field::<u8>(f[6], "exact", ln)? != 0,
            iters: parse_field(f[7], "iters", ln)?,
            mu_hat: parse_opt_f64(f[8], "mu_hat", ln)?,
            c_lower: parse_opt_f64(f[9], "c_lower", ln)?,
            kappa: parse_opt_f64(f[10], "kappa", ln)?,
            infeasible: match f[11] {
                "" => None,
                "0" => Some(false),
                "1" => Some(true),
                other => {
                    return Err(Error::Parse(format!(
                        "line {ln}: column 'infeasible_flag': cannot parse '{other}'"
                    )))
                }
            },
            wall_ms: parse_field(f[12], "wall_ms", ln)?,
        });
    }
    Ok(records)
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&timestamp_line());
    out.push('\n');
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            fmt_f64(r.mean_err),
            fmt_f64(r.prob_exact),
            fmt_f64(r.gmean_iters),
            fmt_f64(r.gmean_clower),
            fmt_f64(r.p10_clower),
            fmt_f64(r.p90_clower),
            r.excluded,
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty CSV".to_string()))?;
    check_header(header, SUMMARY_HEADER)?;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        let ln = lineno + 1;
        if f.len() != 8 {
            return Err(Error::Parse(format!("line {ln}: expected 8 fields, found {}", f.len())));
        }
        rows.push(SummaryRow {
            n: parse_field(f[0], "n", ln)?,
            mean_err: parse_field(f[1], "mean_err", ln)?,
            prob_exact: parse_field(f[2], "prob_exact", ln)?,
            gmean_iters: parse_field(f[3], "gmean_iters", ln)?,
            gmean_clower: parse_field(f[4], "gmean_clower", ln)?,
            p10_clower: parse_field(f[5], "p10_clower", ln)?,
            p90_clower: parse_field(f[6], "p90_clower", ln)?,
            excluded: parse_field(f[7], "excluded", ln)?,
        });
    }
    Ok(rows)
}

pub fn write_gap_csv(path: &Path, comparison: &RestartComparison) -> Result<()> {
    let mut out = String::new();
    out.push_str(&timestamp_line());
    out.push('\n');
    out.push_str(GAP_HEADER);
    out.push('\n');
    for r in &comparison.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.seed,
            r.n,
            r.cell,
            r.t,
            r.tau,
            r.iter,
            fmt_f64(r.gap)
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_finals_csv(path: &Path, comparison: &RestartComparison) -> Result<()> {
    let mut out = String::new();
    out.push_str(&timestamp_line());
    out.push('\n');
    out.push_str("seed,n,cell,t,tau,final_gap\n");
    for r in &comparison.finals {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.seed,
            r.n,
            r.cell,
            r.t,
            r.tau,
            fmt_f64(r.final_gap)
        ));
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_construction_contracts() {
        let inst = gen_instance(30, 12, 4, 0.0, RngSeed(9)).unwrap();
        assert!((norm2(&inst.x0) - 1.0).abs() <= 1e-12);
        assert_eq!(inst.x0.iter().filter(|&&x| x != 0.0).count(), 4);
        // delta = 0: observations are exactly A x0
        assert_eq!(inst.b, inst.b_clean);
        // determinism
        let again = gen_instance(30, 12, 4, 0.0, RngSeed(9)).unwrap();
        assert_eq!(inst.a.data, again.a.data);
        assert_eq!(inst.b, again.b);
        assert_eq!(inst.x0, again.x0);
    }

    #[test]
    fn instance_noise_scaling() {
        let inst = gen_instance(30, 12, 4, 1e-2, RngSeed(5)).unwrap();
        let w: Vec<f64> = inst.b.iter().zip(&inst.b_clean).map(|(a, b)| a - b).collect();
        assert!((norm2(&w) - 1e-2 * inst.snorm).abs() <= 1e-14);
    }

    #[test]
    fn instance_signal_fixed_across_n() {
        let i1 = gen_instance(30, 10, 4, 0.0, RngSeed(3)).unwrap();
        let i2 = gen_instance(30, 20, 4, 0.0, RngSeed(3)).unwrap();
        assert_eq!(i1.x0, i2.x0);
    }

    #[test]
    fn instance_rejects_bad_dims() {
        assert!(gen_instance(10, 5, 11, 0.0, RngSeed(1)).is_err());
        assert!(gen_instance(10, 11, 2, 0.0, RngSeed(1)).is_err());
    }

    #[test]
    fn summarize_single_record() {
        let r = TrialRecord {
            seed: 1,
            p: 10,
            n: 5,
            k: 2,
            delta: 0.0,
            err_l2: 0.5,
            err_noiseless: 0.5,
            exact: false,
            iters: 7,
            mu_hat: Some(0.3),
            c_lower: Some(3.0),
            kappa: Some(2.0),
            infeasible: Some(false),
            wall_ms: 1.0,
        };
        let rows = summarize(&[r]);
        assert_eq!(rows.len(), 1);
        let s = &rows[0];
        assert_eq!(s.mean_err, 0.5);
        assert_eq!(s.prob_exact, 0.0);
        assert!((s.gmean_iters - 7.0).abs() < 1e-12);
        assert_eq!(s.gmean_clower, 3.0);
        assert_eq!(s.p10_clower, 3.0);
        assert_eq!(s.p90_clower, 3.0);
        assert_eq!(s.excluded, 0);
    }

    #[test]
    fn geometric_mean_pair() {
        assert!((geometric_mean([1.0, 100.0].into_iter()) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_rank_rule() {
        let sorted: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        assert_eq!(nearest_rank(&sorted, 0.10), 2.0);
        assert_eq!(nearest_rank(&sorted, 0.90), 18.0);
    }

    #[test]
    fn spearman_signs() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert!((spearman(&xs, &ys) - 1.0).abs() < 1e-12);
        let yneg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((spearman(&xs, &yneg) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_regression_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (slope, intercept, r2) = linear_regression(&xs, &ys);
        assert!((slope + 2.0).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trial_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        let records = vec![
            TrialRecord {
                seed: 11,
                p: 10,
                n: 5,
                k: 2,
                delta: 0.01,
                err_l2: 1.234567890123456e-3,
                err_noiseless: 0.0,
                exact: true,
                iters: 321,
                mu_hat: Some(0.25),
                c_lower: Some(4.0),
                kappa: Some(2.5),
                infeasible: Some(false),
                wall_ms: 12.5,
            },
            TrialRecord {
                seed: 12,
                p: 10,
                n: 5,
                k: 2,
                delta: 0.01,
                err_l2: 0.7,
                err_noiseless: 0.0,
                exact: false,
                iters: 4000,
                mu_hat: None,
                c_lower: None,
                kappa: None,
                infeasible: None,
                wall_ms: 3.25,
            },
        ];
        write_trials_csv(&path, &records).unwrap();
        let back = read_trials_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].seed, 11);
        assert_eq!(back[0].err_l2, records[0].err_l2);
        assert_eq!(back[0].c_lower, Some(4.0));
        assert!(back[0].exact);
        assert_eq!(back[1].mu_hat, None);
        assert_eq!(back[1].infeasible, None);
    }

    #[test]
    fn csv_schema_mismatch_names_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "seed,p,n,k,delta,err,exact\n").unwrap();
        match read_trials_csv(&path) {
            Err(Error::Parse(msg)) => assert!(msg.contains("err_l2"), "message was: {msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn error_bound_audit_counts_zero_on_clean_sweep() {
        let cfg = ExperimentConfig {
            p: 24,
            k: 2,
            n_values: vec![14, 20],
            delta: 1e-2,
            trials_per_n: 4,
            master_seed: 6,
            plan: RestartPlan::fixed(40, 40),
            power: PowerMethodParams::default(),
            cond_subsample: 4,
            mu0: None,
        };
        let (records, _) = run_condition_sweep(&cfg).unwrap();
        assert!(records.iter().any(|r| r.infeasible == Some(false)));
        assert_eq!(error_bound_violations(&records), 0);
    }

    #[test]
    fn tiny_sweep_smoke() {
        let cfg = ExperimentConfig {
            p: 24,
            k: 2,
            n_values: vec![8, 16],
            delta: 1e-2,
            trials_per_n: 3,
            master_seed: 4,
            plan: RestartPlan::fixed(40, 20),
            power: PowerMethodParams { restarts: 2, ..Default::default() },
            cond_subsample: 2,
            mu0: None,
        };
        let (records, summary) = run_condition_sweep(&cfg).unwrap();
        assert_eq!(records.len(), 6);
        assert_eq!(summary.len(), 2);
        // exact flag consistent with the noiseless error
        for r in &records {
            assert_eq!(r.exact, r.err_noiseless < EXACT_RECOVERY_TOL);
            assert!(r.err_l2.is_finite());
        }
        // more measurements recover better on this easy split
        assert!(summary[1].prob_exact >= summary[0].prob_exact);
    }
}
