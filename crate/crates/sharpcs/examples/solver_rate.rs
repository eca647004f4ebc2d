//! Smoothed-solver rate check on a tiny instance: run the accelerated
//! method with the optimal smoothing level and compare the achieved l1 gap
//! against the 3 sqrt(p) ||x0 - x*||_2 / t bound, using the brute-force
//! min-l1 oracle as ground truth.
//!
//! Run: cargo run --release -p sharpcs --example solver_rate

use sharpcs::experiments::gen_instance;
use sharpcs::linalg::{min_l1_oracle, norm1, norm2, RngSeed};
use sharpcs::smooth::{default_start, nesterov_solve, FeasibleSet};

fn main() {
    let (p, n, k) = (10, 6, 2);
    let t = 2000;
    println!("accelerated solver rate on (p, n, k) = ({p}, {n}, {k}), t = {t} iterations\n");
    println!("{:>4}  {:>12}  {:>12}  {:>8}", "seed", "gap", "bound", "ratio");
    for seed in 0..10u64 {
        let inst = gen_instance(p, n, k, 0.0, RngSeed(4200 + seed)).unwrap();
        let oracle = min_l1_oracle(&inst.a, &inst.b_clean).unwrap();
        let f = FeasibleSet::equality(inst.a.clone(), inst.b_clean.clone()).unwrap();
        let x0 = default_start(&f);
        let dist = norm2(
            &x0.iter().zip(&oracle.x).map(|(a, b)| a - b).collect::<Vec<f64>>(),
        );
        // the level that balances the acceleration term and the smoothing bias
        let mu = 2.0f64.sqrt() * dist / (t as f64 * (p as f64).sqrt());
        let (xt, _) = nesterov_solve(&x0, t, mu, &f).unwrap();
        let gap = norm1(&xt) - oracle.value;
        let bound = 3.0 * (p as f64).sqrt() * dist / t as f64;
        println!("{seed:>4}  {gap:>12.3e}  {bound:>12.3e}  {:>8.3}", gap / bound);
    }
    println!("\nevery ratio below 1 means the bound holds with margin");
}
