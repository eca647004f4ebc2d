//! Desk-scale phase transition sweep: recovery probability, iteration
//! counts, and condition estimates as the number of measurements grows, with
//! CSV and SVG outputs written to ./runs/phase_transition.
//!
//! This is a shrunk version of the default `sharpcs experiment` sweep so it
//! finishes in well under a minute.
//!
//! Run: cargo run --release -p sharpcs --example phase_transition

use sharpcs::conditioning::PowerMethodParams;
use sharpcs::experiments::{
    run_condition_sweep, spearman, write_summary_csv, write_trials_csv, ExperimentConfig,
};
use sharpcs::report::{line_plot, Series};
use sharpcs::restart::{RestartMode, RestartPlan};

fn main() {
    let cfg = ExperimentConfig {
        p: 60,
        k: 3,
        n_values: (1..=10).map(|i| 4 * i).collect(),
        delta: 1e-2,
        trials_per_n: 10,
        master_seed: 2,
        plan: RestartPlan { t: 50, tau: 200, mode: RestartMode::Fixed, mu_halving: false },
        power: PowerMethodParams::default(),
        cond_subsample: 10,
        mu0: Some(3e-5),
    };
    let (records, summary) = run_condition_sweep(&cfg).unwrap();

    println!("{:>4}  {:>10}  {:>12}  {:>12}  {:>8}", "n", "P(exact)", "gmean iters", "gmean C", "excl");
    for s in &summary {
        println!(
            "{:>4}  {:>10.2}  {:>12.1}  {:>12.3}  {:>8}",
            s.n, s.prob_exact, s.gmean_iters, s.gmean_clower, s.excluded
        );
    }
    let mut iters = Vec::new();
    let mut conds = Vec::new();
    for r in &records {
        if let (Some(c), Some(false)) = (r.c_lower, r.infeasible) {
            iters.push(r.iters as f64);
            conds.push(c);
        }
    }
    println!("\nSpearman(iterations, condition) = {:.3} over {} trials", spearman(&iters, &conds), iters.len());

    let dir = std::path::Path::new("runs/phase_transition");
    std::fs::create_dir_all(dir).unwrap();
    write_trials_csv(&dir.join("trials.csv"), &records).unwrap();
    write_summary_csv(&dir.join("summary.csv"), &summary).unwrap();
    let xs: Vec<f64> = summary.iter().map(|r| r.n as f64).collect();
    let plots = [
        ("probability.svg", "exact recovery probability", false,
         vec![Series::new("mean", summary.iter().map(|r| r.prob_exact).collect::<Vec<f64>>(), "#1f77b4")]),
        ("condition.svg", "condition number lower bound", true,
         vec![
            Series::new("gmean", summary.iter().map(|r| r.gmean_clower).collect::<Vec<f64>>(), "#1f77b4"),
            Series::new("p10", summary.iter().map(|r| r.p10_clower).collect::<Vec<f64>>(), "#d62728"),
            Series::new("p90", summary.iter().map(|r| r.p90_clower).collect::<Vec<f64>>(), "#d62728"),
         ]),
    ];
    for (name, title, log_y, series) in plots {
        let svg = line_plot(title, "n", title, &xs, &series, log_y);
        std::fs::write(dir.join(name), svg).unwrap();
    }
    println!("wrote trials.csv, summary.csv and plots to {}", dir.display());
}
