//! Dense real linear algebra and random instance generation.
//!
//! Everything here is plain `f64` row-major storage with Householder QR as
//! the single factorization; no BLAS/LAPACK. Problem sizes are desk scale
//! (p up to a few hundred), where this is both fast enough and easy to audit.

use crate::error::Error;
use crate::rng::Rng;
use crate::Result;

pub use crate::rng::RngSeed;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite".to_string()));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut s = 0.0;
            for j in 0..self.cols {
                s += row[j] * x[j];
            }
            y[i] = s;
        }
        y
    }

    /// y = A^T x
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                y[j] += row[j] * xi;
            }
        }
        y
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Submatrix keeping the given columns, in order.
    pub fn select_cols(&self, cols: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + jj] = self.get(i, j);
            }
        }
        out
    }
}

// Small vector helpers shared across the crate.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Generate an n x p matrix of i.i.d. standard normal draws, deterministic in
/// the seed. Rows are filled in order, so for fixed (seed, p) a taller matrix
/// extends a shorter one row by row.
pub fn gaussian_matrix(seed: RngSeed, n: usize, p: usize) -> Result<DenseMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::invalid(format!("gaussian_matrix dimensions must be positive, got {n}x{p}")));
    }
    let mut rng = Rng::from_seed(seed);
    Ok(DenseMatrix { rows: n, cols: p, data: rng.normal_vec(n * p) })
}

/// Householder QR factorization A = Q R with Q square orthogonal (rows x rows)
/// and R upper trapezoidal, normalized so the leading diagonal of R is >= 0.
pub(crate) struct Qr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

pub(crate) fn householder_qr(a: &DenseMatrix) -> Qr {
    let m = a.rows;
    let n = a.cols;
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut v = vec![0.0; m];

    for j in 0..n.min(m) {
        let mut norm2 = 0.0;
        for i in j..m {
            let x = r.get(i, j);
            norm2 += x * x;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let rjj = r.get(j, j);
        let alpha = if rjj >= 0.0 { -norm } else { norm };
        v[j] = rjj - alpha;
        for i in (j + 1)..m {
            v[i] = r.get(i, j);
        }
        let vnorm2: f64 = v[j..m].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R <- H R on the trailing block
        for col in j..n {
            let mut s = 0.0;
            for i in j..m {
                s += v[i] * r.get(i, col);
            }
            let f = 2.0 * s / vnorm2;
            for i in j..m {
                let val = r.get(i, col) - f * v[i];
                r.set(i, col, val);
            }
        }
        // Q <- Q H
        for row in 0..m {
            let mut s = 0.0;
            for i in j..m {
                s += q.get(row, i) * v[i];
            }
            let f = 2.0 * s / vnorm2;
            for i in j..m {
                let val = q.get(row, i) - f * v[i];
                q.set(row, i, val);
            }
        }
    }
    // Clean subdiagonal rounding and fix signs so diag(R) >= 0.
    for j in 0..n.min(m) {
        for i in (j + 1)..m {
            r.set(i, j, 0.0);
        }
        if r.get(j, j) < 0.0 {
            for col in j..n {
                let val = -r.get(j, col);
                r.set(j, col, val);
            }
            for row in 0..m {
                let val = -q.get(row, j);
                q.set(row, j, val);
            }
        }
    }
    Qr { q, r }
}

/// Forward substitution for a lower-triangular system L x = b.
pub(crate) fn solve_lower(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l.get(i, j) * x[j];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Back substitution for an upper-triangular system R x = b.
pub(crate) fn solve_upper(r: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = r.rows;
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= r.get(i, j) * x[j];
        }
        x[i] = s / r.get(i, i);
    }
    x
}

/// Orthonormalize the rows of A: returns (Q, T) with Q T-transformed from A,
/// Q Q^T = I to within 1e-12 in max norm, Q = T A, and T invertible n x n.
/// Row span is preserved, so {x : Ax = b} = {x : Qx = Tb}.
pub fn row_orthonormalize(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = a.rows;
    let p = a.cols;
    if n > p {
        return Err(Error::invalid(format!("row_orthonormalize needs n <= p, got {n}x{p}")));
    }
    let qr = householder_qr(&a.transpose()); // A^T = Q_full R, so A = R^T Q_full^T
    let anorm = spectral_norm(a);
    for j in 0..n {
        if qr.r.get(j, j).abs() <= 1e-10 * anorm {
            return Err(Error::RankDeficient(format!(
                "row {j}: pivot {:.3e} below 1e-10 * ||A||_2 = {:.3e}",
                qr.r.get(j, j).abs(),
                1e-10 * anorm
            )));
        }
    }
    // Q rows = first n columns of Q_full, transposed.
    let q_rows = DenseMatrix::from_fn(n, p, |i, j| qr.q.get(j, i));
    // T = R^{-T}: solve R^T t_i = e_i column by column (R^T is lower-triangular).
    let rt = DenseMatrix::from_fn(n, n, |i, j| qr.r.get(j, i));
    let mut transform = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let col = solve_lower(&rt, &e);
        for (row, val) in col.iter().enumerate() {
            transform.set(row, i, *val);
        }
    }
    Ok((q_rows, transform))
}

/// Largest singular value via power iteration on A^T A, with Rayleigh
/// quotient estimates. Zero matrices return 0.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.data.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut rng = Rng::new(0x5EED_0001 ^ ((a.rows as u64) << 32) ^ a.cols as u64);
    let mut v = rng.unit_vector(a.cols);
    let mut sigma = 0.0f64;
    for _ in 0..20_000 {
        let w = a.mul_vec(&v);
        let s = norm2(&w);
        let u = a.tr_mul_vec(&w);
        let un = norm2(&u);
        if un == 0.0 {
            // v is in the nullspace: restart from a fresh direction
            v = rng.unit_vector(a.cols);
            continue;
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / un;
        }
        if (s - sigma).abs() <= 1e-14 * s.max(1e-300) {
            return s;
        }
        sigma = s;
    }
    sigma
}

/// Orthonormal basis of the nullspace of A, as a p x (p - n) matrix Z with
/// A Z ~ 0 and Z^T Z = I. Requires n < p and full row rank.
pub fn nullspace_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows;
    let p = a.cols;
    if n >= p {
        return Err(Error::invalid(format!("nullspace_basis needs n < p, got {n}x{p}")));
    }
    let qr = householder_qr(&a.transpose());
    let anorm = spectral_norm(a);
    for j in 0..n {
        if qr.r.get(j, j).abs() <= 1e-10 * anorm {
            return Err(Error::RankDeficient(format!(
                "row {j}: pivot {:.3e} below 1e-10 * ||A||_2",
                qr.r.get(j, j).abs()
            )));
        }
    }
    Ok(DenseMatrix::from_fn(p, p - n, |i, j| qr.q.get(i, n + j)))
}

/// Result of the brute-force min-l1 oracle.
#[derive(Debug, Clone)]
pub struct MinL1Solution {
    pub x: Vec<f64>,
    pub value: f64,
    /// True when two distinct basic solutions tie within 1e-9 in l1 value.
    pub ambiguous: bool,
}

/// Exact minimizer of ||x||_1 subject to A x = b on tiny instances (p <= 14),
/// by enumerating all column supports of size <= n, solving each subsystem in
/// the least-squares sense, keeping the exactly feasible candidates, and
/// returning the l1-smallest.
pub fn min_l1_oracle(a: &DenseMatrix, b: &[f64]) -> Result<MinL1Solution> {
    let n = a.rows;
    let p = a.cols;
    if p > 14 {
        return Err(Error::Unsupported(format!("min_l1_oracle is limited to p <= 14, got p = {p}")));
    }
    if b.len() != n {
        return Err(Error::invalid(format!("observation length {} != n = {n}", b.len())));
    }
    let bnorm = norm2(b);
    let feas_tol = 1e-9 * bnorm;
    let max_support = n.min(p);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut ambiguous = false;

    for mask in 0u32..(1u32 << p) {
        let m = mask.count_ones() as usize;
        if m > max_support {
            continue;
        }
        let support: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) != 0).collect();
        let candidate = if m == 0 {
            vec![0.0; p]
        } else {
            let a_s = a.select_cols(&support);
            let qr = householder_qr(&a_s);
            // Skip numerically rank-deficient supports (non-generic instances).
            let scale = a_s.max_abs().max(1e-300);
            if (0..m).any(|j| qr.r.get(j, j).abs() <= 1e-12 * scale * (n as f64)) {
                continue;
            }
            let qtb = qr.q.tr_mul_vec(b);
            let r_top = DenseMatrix::from_fn(m, m, |i, j| qr.r.get(i, j));
            let xs = solve_upper(&r_top, &qtb[..m]);
            let mut x = vec![0.0; p];
            for (jj, &j) in support.iter().enumerate() {
                x[j] = xs[jj];
            }
            x
        };
        let residual = {
            let ax = a.mul_vec(&candidate);
            let diff: Vec<f64> = ax.iter().zip(b).map(|(u, v)| u - v).collect();
            norm2(&diff)
        };
        if residual > feas_tol {
            continue;
        }
        let value = norm1(&candidate);
        match &best {
            None => best = Some((candidate, value)),
            Some((bx, bv)) => {
                if value < bv - 1e-9 {
                    best = Some((candidate, value));
                    ambiguous = false;
                } else if (value - bv).abs() <= 1e-9 {
                    let distinct = candidate
                        .iter()
                        .zip(bx)
                        .any(|(u, v)| (u - v).abs() > 1e-9);
                    if distinct {
                        ambiguous = true;
                    }
                }
            }
        }
    }

    match best {
        Some((x, value)) => Ok(MinL1Solution { x, value, ambiguous }),
        None => Err(Error::Infeasible("no feasible basic solution found".to_string())),
    }
}

/// Classical condition number sigma_max / sigma_min over the row space of A
/// (full row rank required). Computed from the triangular factor of A^T.
pub fn classical_condition_number(a: &DenseMatrix) -> Result<f64> {
    let n = a.rows;
    if n > a.cols {
        return Err(Error::invalid("classical_condition_number needs n <= p".to_string()));
    }
    let qr = householder_qr(&a.transpose());
    let anorm = spectral_norm(a);
    for j in 0..n {
        if qr.r.get(j, j).abs() <= 1e-10 * anorm {
            return Err(Error::RankDeficient("rank-deficient rows".to_string()));
        }
    }
    // Singular values of A equal those of the n x n factor R.
    let r_top = DenseMatrix::from_fn(n, n, |i, j| qr.r.get(i, j));
    let smax = spectral_norm(&r_top);
    // sigma_min(R) = 1 / sigma_max(R^{-1}); build R^{-1} by back substitution.
    let mut rinv = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let col = solve_upper(&r_top, &e);
        for (row, val) in col.iter().enumerate() {
            rinv.set(row, i, *val);
        }
    }
    Ok(smax * spectral_norm(&rinv))
}
