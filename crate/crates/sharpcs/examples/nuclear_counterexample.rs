//! The nuclear norm is not strictly decomposable, and its support-dominated
//! cone D_P is strictly larger than the union of tangent cones C_P: the 2x2
//! off-diagonal flip U lies in D_P (both projections vanish) yet increases
//! the nuclear norm at every rank-one diagonal point, so it is a descent
//! direction nowhere. For the l1 norm the two cones coincide, which the
//! example verifies by constructing the tangent witness x = -Pz.
//!
//! Run: cargo run --release -p sharpcs --example nuclear_counterexample

use sharpcs::conditioning::{cone_membership, TangentConeL1};
use sharpcs::linalg::DenseMatrix;
use sharpcs::rng::Rng;
use sharpcs::structures::{dp_membership, L1Structure, NuclearStructure, SparsityStructure};

fn main() {
    // nuclear side: U in D_P, never a descent direction
    let s = NuclearStructure::new(2, 2);
    let p = s.axis_projector(&[0], &[0]);
    let u = DenseMatrix::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    println!("nuclear norm, Q = diag(1, 0), U = off-diagonal flip:");
    println!("  ||P U||_*    = {:.3e}", s.norm(&s.apply_p(&p, &u)));
    println!("  ||Pbar U||_* = {:.3e}", s.norm(&s.apply_pbar(&p, &u)));
    println!("  U in D_P     = {}", dp_membership(&s, &p, &u));
    let mut worst_increase = f64::INFINITY;
    let mut x = -10.0;
    while x <= 10.0 {
        let xm = DenseMatrix::new(2, 2, vec![x, 0.0, 0.0, 0.0]).unwrap();
        let shifted = s.combine(1.0, &xm, 1.0, &u);
        worst_increase = worst_increase.min(s.norm(&shifted) - s.norm(&xm));
        x += 0.01;
    }
    println!("  min over the grid of ||X + U||_* - ||X||_* = {worst_increase:.6} (> 0: never a descent direction)\n");

    // l1 side: strict decomposability gives the witness x = -Pz
    let l1 = L1Structure::new(8);
    let mut rng = Rng::new(61);
    let mut verified = 0;
    for _ in 0..1000 {
        let support = rng.subset(8, 2);
        let proj = l1.projector(support.clone());
        let mut z = rng.normal_vec(8);
        let off = l1.norm(&l1.apply_pbar(&proj, &z));
        let on = l1.norm(&l1.apply_p(&proj, &z));
        if on <= 1e-9 {
            continue;
        }
        // scale the on-support block so z lands inside D_P
        let factor = (off + 0.1) / on + 1.0;
        for &i in &support {
            z[i] *= factor;
        }
        assert!(dp_membership(&l1, &proj, &z));
        let witness: Vec<f64> = l1.apply_p(&proj, &z).iter().map(|v| -v).collect();
        let cone = TangentConeL1::from_signal(&witness).unwrap();
        assert!(cone_membership(&z, &cone));
        verified += 1;
    }
    println!("l1 norm: {verified} random D_P members all admitted a tangent-cone witness");
}
