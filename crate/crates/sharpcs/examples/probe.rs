use sharpcs::experiments::*;
use sharpcs::conditioning::PowerMethodParams;
use sharpcs::restart::{RestartPlan, RestartMode};

fn main() {
    let t0 = std::time::Instant::now();
    let cfg = ExperimentConfig {
        p: 100, k: 5, n_values: (1..=12).map(|i| 5 * i).collect(), delta: 1e-2,
        trials_per_n: 8, master_seed: 1,
        plan: RestartPlan { t: 50, tau: 400, mode: RestartMode::Fixed, mu_halving: false },
        power: PowerMethodParams::default(),
        cond_subsample: 8, mu0: Some(3e-5),
    };
    let (records, summary) = run_condition_sweep(&cfg).unwrap();
    for s in &summary {
        println!("n {:>3}: prob {:.2} gmean_iters {:>8.1} gmean_C {:>10.3} excl {}", s.n, s.prob_exact, s.gmean_iters, s.gmean_clower, s.excluded);
    }
    let mut iters = Vec::new(); let mut conds = Vec::new();
    for r in &records {
        if let (Some(c), Some(false)) = (r.c_lower, r.infeasible) {
            iters.push(r.iters as f64); conds.push(c);
        }
    }
    println!("spearman {:.3} over {} pairs", spearman(&iters, &conds), iters.len());
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
