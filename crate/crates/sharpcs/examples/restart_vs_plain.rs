//! Restarting versus running the solver straight through, at the same total
//! budget of inner iterations. With a sharp optimum the restarted scheme
//! converges linearly while the plain run is stuck at its smoothing floor.
//!
//! Run: cargo run --release -p sharpcs --example restart_vs_plain

use sharpcs::conditioning::PowerMethodParams;
use sharpcs::experiments::{run_restart_comparison, ExperimentConfig};
use sharpcs::restart::RestartPlan;

fn main() {
    let cfg = ExperimentConfig {
        p: 200,
        k: 20,
        n_values: vec![120],
        delta: 0.0,
        trials_per_n: 5,
        master_seed: 33,
        plan: RestartPlan::fixed(50, 20), // budget 1000, cells t = 50, 100, ...
        power: PowerMethodParams::default(),
        cond_subsample: 0,
        mu0: Some(0.1),
    };
    println!(
        "p = {}, n = {}, k = {}, budget {} inner iterations\n",
        cfg.p,
        cfg.n_values[0],
        cfg.k,
        cfg.plan.budget()
    );
    let comparison = run_restart_comparison(&cfg).unwrap();

    let mut seeds: Vec<u64> = comparison.finals.iter().map(|f| f.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    println!("{:>20}  {:>12}  {:>12}  {:>10}  {:>12}", "seed", "plain gap", "best gap", "best cell", "speedup");
    for &seed in &seeds {
        let plain = comparison
            .finals
            .iter()
            .find(|f| f.seed == seed && f.cell == "plain")
            .unwrap();
        let best = comparison
            .finals
            .iter()
            .filter(|f| f.seed == seed && f.cell != "plain")
            .min_by(|a, b| a.final_gap.partial_cmp(&b.final_gap).unwrap())
            .unwrap();
        println!(
            "{seed:>20}  {:>12.3e}  {:>12.3e}  {:>10}  {:>12.1e}",
            plain.final_gap,
            best.final_gap,
            best.cell,
            plain.final_gap / best.final_gap.max(1e-300)
        );
    }
    println!("\n(t = inner iterations per restart; the grid sweeps t at a fixed budget)");
}
