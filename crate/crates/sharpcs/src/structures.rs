//! Sparsity structures: a norm together with a weighted family of projectors
//! (P, Pbar, nu) that defines k-sparsity abstractly. Ships the l1 instance
//! (coordinate projectors, strictly decomposable) and a small-matrix nuclear
//! instance (left/right orthogonal projector pairs, not decomposable), which
//! is exactly the pair needed to separate the cones C_P and D_P.
//!
//! Both shipped instances have self-adjoint projectors, so the adjoints in
//! the dual-norm condition are applied as the maps themselves.

use crate::linalg::{norm1, norm2, norm_inf, DenseMatrix};
use crate::rng::Rng;

const EXACT_TOL: f64 = 1e-12;

/// A sparsity structure on some Euclidean space of elements.
pub trait SparsityStructure {
    type Elem: Clone;
    type Projector: Clone;

    fn norm(&self, w: &Self::Elem) -> f64;
    fn dual_norm(&self, f: &Self::Elem) -> f64;
    fn apply_p(&self, p: &Self::Projector, w: &Self::Elem) -> Self::Elem;
    fn apply_pbar(&self, p: &Self::Projector, w: &Self::Elem) -> Self::Elem;
    /// Weight nu(P) of a projector.
    fn weight(&self, p: &Self::Projector) -> usize;
    /// Enumerated projector family up to the given weight (small instances).
    fn projectors(&self, max_weight: usize) -> Vec<Self::Projector>;
    /// a x + b y
    fn combine(&self, a: f64, x: &Self::Elem, b: f64, y: &Self::Elem) -> Self::Elem;
    /// True iff some P with nu(P) <= k fixes w exactly (tolerance 1e-12).
    fn is_k_sparse(&self, w: &Self::Elem, k: usize) -> bool;
}

/// Membership in D_P = { z : ||Pbar z|| <= ||P z|| } with 1e-12 slack.
pub fn dp_membership<S: SparsityStructure>(s: &S, p: &S::Projector, z: &S::Elem) -> bool {
    s.norm(&s.apply_pbar(p, z)) <= s.norm(&s.apply_p(p, z)) + EXACT_TOL
}

/// Decomposability statement ||u|| >= ||Pu|| + ||Pbar u||: returns both sides
/// and whether the inequality holds with 1e-12 slack. For the l1 instance the
/// two sides are equal.
pub fn decomposability_check<S: SparsityStructure>(
    s: &S,
    p: &S::Projector,
    u: &S::Elem,
) -> (f64, f64, bool) {
    let lhs = s.norm(u);
    let rhs = s.norm(&s.apply_p(p, u)) + s.norm(&s.apply_pbar(p, u));
    (lhs, rhs, lhs >= rhs - EXACT_TOL)
}

/// Dual-norm condition ||P* f + Pbar* g||_* <= max(||f||_*, ||g||_*), with
/// 1e-12 slack. Projectors here are self-adjoint.
pub fn dual_condition_check<S: SparsityStructure>(
    s: &S,
    p: &S::Projector,
    f: &S::Elem,
    g: &S::Elem,
) -> bool {
    let mixed = s.combine(1.0, &s.apply_p(p, f), 1.0, &s.apply_pbar(p, g));
    s.dual_norm(&mixed) <= s.dual_norm(f).max(s.dual_norm(g)) + EXACT_TOL
}

// ---------------------------------------------------------------------------
// l1 instance

/// l1 sparsity structure on R^p: coordinate-subspace projectors with
/// Pbar = I - P and nu(P) = |support|. Strictly decomposable.
#[derive(Debug, Clone)]
pub struct L1Structure {
    pub p: usize,
}

/// Coordinate projector: keeps the listed indices, zeroes the rest.
#[derive(Debug, Clone)]
pub struct L1Projector {
    pub support: Vec<usize>,
}

impl L1Structure {
    pub fn new(p: usize) -> Self {
        L1Structure { p }
    }

    pub fn projector(&self, support: Vec<usize>) -> L1Projector {
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        L1Projector { support }
    }
}

impl SparsityStructure for L1Structure {
    type Elem = Vec<f64>;
    type Projector = L1Projector;

    fn norm(&self, w: &Vec<f64>) -> f64 {
        norm1(w)
    }

    fn dual_norm(&self, f: &Vec<f64>) -> f64 {
        norm_inf(f)
    }

    fn apply_p(&self, p: &L1Projector, w: &Vec<f64>) -> Vec<f64> {
        let mut out = vec![0.0; w.len()];
        for &i in &p.support {
            out[i] = w[i];
        }
        out
    }

    fn apply_pbar(&self, p: &L1Projector, w: &Vec<f64>) -> Vec<f64> {
        let mut out = w.clone();
        for &i in &p.support {
            out[i] = 0.0;
        }
        out
    }

    fn weight(&self, p: &L1Projector) -> usize {
        p.support.len()
    }

    fn projectors(&self, max_weight: usize) -> Vec<L1Projector> {
        assert!(self.p <= 14, "support enumeration is limited to p <= 14");
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << self.p) {
            if (mask.count_ones() as usize) <= max_weight {
                let support = (0..self.p).filter(|&i| mask & (1 << i) != 0).collect();
                out.push(L1Projector { support });
            }
        }
        out
    }

    fn combine(&self, a: f64, x: &Vec<f64>, b: f64, y: &Vec<f64>) -> Vec<f64> {
        x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect()
    }

    fn is_k_sparse(&self, w: &Vec<f64>, k: usize) -> bool {
        w.iter().filter(|x| x.abs() > EXACT_TOL).count() <= k
    }
}

// ---------------------------------------------------------------------------
// nuclear instance

/// Nuclear-norm sparsity structure on small matrices (dimensions <= 6):
/// projectors X -> P_left X P_right with orthogonal P_left, P_right, and
/// Pbar: X -> (I - P_left) X (I - P_right). k-sparse means rank <= k.
#[derive(Debug, Clone)]
pub struct NuclearStructure {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone)]
pub struct NuclearProjector {
    pub left: DenseMatrix,
    pub right: DenseMatrix,
    pub rank_left: usize,
    pub rank_right: usize,
}

impl NuclearStructure {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1 && rows <= 6 && cols <= 6, "nuclear instance is small-scale only");
        NuclearStructure { rows, cols }
    }

    /// Axis-aligned projector pair from row / column index subsets.
    pub fn axis_projector(&self, left_rows: &[usize], right_cols: &[usize]) -> NuclearProjector {
        let left = DenseMatrix::from_fn(self.rows, self.rows, |i, j| {
            if i == j && left_rows.contains(&i) {
                1.0
            } else {
                0.0
            }
        });
        let right = DenseMatrix::from_fn(self.cols, self.cols, |i, j| {
            if i == j && right_cols.contains(&i) {
                1.0
            } else {
                0.0
            }
        });
        NuclearProjector {
            left,
            right,
            rank_left: left_rows.len(),
            rank_right: right_cols.len(),
        }
    }

    fn random_orthogonal_projector(rng: &mut Rng, dim: usize, rank: usize) -> DenseMatrix {
        // P = U U^T for U with orthonormal columns, from QR of a Gaussian.
        let g = DenseMatrix::from_fn(dim, rank, |_, _| rng.normal());
        let qr = crate::linalg::householder_qr(&g);
        let u = DenseMatrix::from_fn(dim, rank, |i, j| qr.q.get(i, j));
        u.mul_mat(&u.transpose())
    }

    fn eye_minus(m: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(m.rows, m.cols, |i, j| {
            let e = if i == j { 1.0 } else { 0.0 };
            e - m.get(i, j)
        })
    }
}

/// Singular values of a small matrix by one-sided Jacobi, descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let work = if a.rows >= a.cols { a.clone() } else { a.transpose() };
    let m = work.rows;
    let n = work.cols;
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| work.get(i, j)).collect()).collect();
    for _ in 0..60 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let aii: f64 = cols[i].iter().map(|x| x * x).sum();
                let ajj: f64 = cols[j].iter().map(|x| x * x).sum();
                let aij: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                off = off.max(aij.abs());
                if aij.abs() <= 1e-15 * (aii * ajj).sqrt().max(1e-300) {
                    continue;
                }
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let vi = cols[i][r];
                    let vj = cols[j][r];
                    cols[i][r] = c * vi - s * vj;
                    cols[j][r] = s * vi + c * vj;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

fn nuclear_norm(m: &DenseMatrix) -> f64 {
    // 2x2 symmetric matrices have a closed form from the eigenvalues.
    if m.rows == 2 && m.cols == 2 && (m.get(0, 1) - m.get(1, 0)).abs() <= 1e-14 * m.max_abs().max(1.0) {
        let tr = m.get(0, 0) + m.get(1, 1);
        let det = m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0);
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let l1 = 0.5 * (tr + disc);
        let l2 = 0.5 * (tr - disc);
        return l1.abs() + l2.abs();
    }
    singular_values(m).iter().sum()
}

impl SparsityStructure for NuclearStructure {
    type Elem = DenseMatrix;
    type Projector = NuclearProjector;

    fn norm(&self, w: &DenseMatrix) -> f64 {
        nuclear_norm(w)
    }

    fn dual_norm(&self, f: &DenseMatrix) -> f64 {
        singular_values(f).first().copied().unwrap_or(0.0)
    }

    fn apply_p(&self, p: &NuclearProjector, w: &DenseMatrix) -> DenseMatrix {
        p.left.mul_mat(w).mul_mat(&p.right)
    }

    fn apply_pbar(&self, p: &NuclearProjector, w: &DenseMatrix) -> DenseMatrix {
        let li = Self::eye_minus(&p.left);
        let ri = Self::eye_minus(&p.right);
        li.mul_mat(w).mul_mat(&ri)
    }

    fn weight(&self, p: &NuclearProjector) -> usize {
        p.rank_left.max(p.rank_right)
    }

    fn projectors(&self, max_weight: usize) -> Vec<NuclearProjector> {
        let mut out = Vec::new();
        // axis-aligned pairs
        for lmask in 0u32..(1u32 << self.rows) {
            for rmask in 0u32..(1u32 << self.cols) {
                let rl = lmask.count_ones() as usize;
                let rr = rmask.count_ones() as usize;
                if rl.max(rr) > max_weight {
                    continue;
                }
                let lrows: Vec<usize> = (0..self.rows).filter(|&i| lmask & (1 << i) != 0).collect();
                let rcols: Vec<usize> = (0..self.cols).filter(|&i| rmask & (1 << i) != 0).collect();
                out.push(self.axis_projector(&lrows, &rcols));
            }
        }
        // 100 random orthogonal pairs at admissible ranks
        let mut rng = Rng::new(0x9C_0DE ^ ((self.rows as u64) << 8) ^ self.cols as u64);
        let cap = max_weight.max(1);
        for _ in 0..100 {
            let rl = 1 + (rng.next_u64() as usize) % cap.min(self.rows);
            let rr = 1 + (rng.next_u64() as usize) % cap.min(self.cols);
            if rl.max(rr) > max_weight {
                continue;
            }
            let left = Self::random_orthogonal_projector(&mut rng, self.rows, rl);
            let right = Self::random_orthogonal_projector(&mut rng, self.cols, rr);
            out.push(NuclearProjector { left, right, rank_left: rl, rank_right: rr });
        }
        out
    }

    fn combine(&self, a: f64, x: &DenseMatrix, b: f64, y: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            rows: x.rows,
            cols: x.cols,
            data: x.data.iter().zip(&y.data).map(|(xi, yi)| a * xi + b * yi).collect(),
        }
    }

    fn is_k_sparse(&self, w: &DenseMatrix, k: usize) -> bool {
        singular_values(w).iter().filter(|&&s| s > 1e-10).count() <= k
    }
}
