//! Huber-smoothed l1 objective and the accelerated projected-gradient method
//! used inside the restart scheme.
//!
//! The smoothed objective is f_mu(x) = sum_i h_mu(x_i) with
//! h_mu(x) = x^2 / (2 mu) for |x| <= mu and |x| - mu/2 otherwise. It
//! approximates ||x||_1 uniformly from below up to mu * p / 2 and has a
//! 1/mu-Lipschitz gradient, so the accelerated method runs with step mu.

use crate::error::Error;
use crate::linalg::{norm1, norm2, DenseMatrix};
use crate::Result;

/// Smoothing level mu > 0; the gradient of f_mu is (1/mu)-Lipschitz.
#[derive(Debug, Clone, Copy)]
pub struct SmoothingParams {
    pub mu: f64,
}

impl SmoothingParams {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::invalid(format!("smoothing level mu must be positive, got {mu}")));
        }
        Ok(SmoothingParams { mu })
    }
}

/// Constraint set of the recovery problem: either {x : Ax = b} or the noise
/// ball {x : ||Ax - b||_2 <= epsilon}, with A row-orthonormal (A A^T = I) so
/// both projections are closed-form and exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Equality,
    Ball,
}

#[derive(Debug, Clone)]
pub struct FeasibleSet {
    pub kind: SetKind,
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub epsilon: f64,
}

impl FeasibleSet {
    pub fn equality(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        Self::build(SetKind::Equality, a, b, 0.0)
    }

    pub fn ball(a: DenseMatrix, b: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid(format!("ball radius must be positive, got {epsilon}")));
        }
        Self::build(SetKind::Ball, a, b, epsilon)
    }

    fn build(kind: SetKind, a: DenseMatrix, b: Vec<f64>, epsilon: f64) -> Result<Self> {
        if b.len() != a.rows {
            return Err(Error::invalid(format!(
                "observation length {} does not match row count {}",
                b.len(),
                a.rows
            )));
        }
        // Projections below are exact only under A A^T = I; verify once here.
        let aat = a.mul_mat(&a.transpose());
        for i in 0..a.rows {
            for j in 0..a.rows {
                let e = if i == j { 1.0 } else { 0.0 };
                if (aat.get(i, j) - e).abs() > 1e-10 {
                    return Err(Error::invalid(
                        "rows of A must be orthonormal (A A^T = I within 1e-10); \
                         run row_orthonormalize first"
                            .to_string(),
                    ));
                }
            }
        }
        Ok(FeasibleSet { kind, a, b, epsilon })
    }

    pub fn dim(&self) -> usize {
        self.a.cols
    }

    /// ||Ax - b||_2
    pub fn residual(&self, x: &[f64]) -> f64 {
        let ax = self.a.mul_vec(x);
        let diff: Vec<f64> = ax.iter().zip(&self.b).map(|(u, v)| u - v).collect();
        norm2(&diff)
    }

    /// Constraint violation: residual for equality, distance past the ball
    /// radius otherwise.
    pub fn violation(&self, x: &[f64]) -> f64 {
        match self.kind {
            SetKind::Equality => self.residual(x),
            SetKind::Ball => (self.residual(x) - self.epsilon).max(0.0),
        }
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.violation(x) <= tol
    }
}

/// Per-iteration record of a solver run: true l1 objective, smoothed
/// objective, and feasibility violation, plus restart boundaries when driven
/// by the restart scheme.
#[derive(Debug, Clone, Default)]
pub struct SolverTrace {
    pub l1: Vec<f64>,
    pub f_mu: Vec<f64>,
    pub residual: Vec<f64>,
    /// Iteration indices (into the vectors above) where a restart ended.
    pub restart_bounds: Vec<usize>,
    pub inner_iterations: usize,
    /// True when the driver stopped early because the objective stalled.
    pub stalled: bool,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.l1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.l1.is_empty()
    }

    pub(crate) fn push(&mut self, l1: f64, f_mu: f64, residual: f64) {
        self.l1.push(l1);
        self.f_mu.push(f_mu);
        self.residual.push(residual);
        self.inner_iterations += 1;
    }

    pub(crate) fn extend(&mut self, other: SolverTrace) {
        self.l1.extend(other.l1);
        self.f_mu.extend(other.f_mu);
        self.residual.extend(other.residual);
        self.inner_iterations = self.l1.len();
    }
}

/// Huber value and gradient of f_mu at x. The gradient coordinates are
/// clamp(x_i / mu, -1, 1).
pub fn huber_value_grad(x: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
    let mu = SmoothingParams::new(mu)?.mu;
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(x.len());
    for &xi in x {
        let a = xi.abs();
        if a <= mu {
            value += xi * xi / (2.0 * mu);
            grad.push(xi / mu);
        } else {
            value += a - mu / 2.0;
            grad.push(xi.signum());
        }
    }
    Ok((value, grad))
}

/// Exact Euclidean projection onto the feasible set, assuming A A^T = I.
///
/// Equality: x - A^T (Ax - b). Ball: x unchanged when inside, otherwise the
/// range-space component of Ax is pulled back to the sphere of radius
/// epsilon around b.
pub fn project_feasible(x: &[f64], f: &FeasibleSet) -> Vec<f64> {
    let ax = f.a.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&f.b).map(|(u, v)| u - v).collect();
    match f.kind {
        SetKind::Equality => {
            let corr = f.a.tr_mul_vec(&r);
            x.iter().zip(&corr).map(|(u, c)| u - c).collect()
        }
        SetKind::Ball => {
            let rn = norm2(&r);
            if rn <= f.epsilon {
                return x.to_vec();
            }
            let shrink = 1.0 - f.epsilon / rn;
            let corr = f.a.tr_mul_vec(&r);
            x.iter().zip(&corr).map(|(u, c)| u - shrink * c).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Keep the best-so-far iterate each step (monotone variant). Off by
    /// default; the plain scheme is the reference method.
    pub monotone: bool,
}

/// Run t iterations of the two-sequence accelerated projected-gradient
/// method on f_mu over the feasible set, starting from a feasible x0.
///
/// The gradient step is taken at the extrapolated point with step mu (the
/// inverse Lipschitz constant), every iterate is projected, and the momentum
/// weight follows the classical recursion
/// theta_{k+1} = (1 + sqrt(1 + 4 theta_k^2)) / 2.
pub fn nesterov_solve(
    x0: &[f64],
    t: usize,
    mu: f64,
    f: &FeasibleSet,
) -> Result<(Vec<f64>, SolverTrace)> {
    nesterov_solve_with(x0, t, mu, f, SolveOptions::default())
}

pub fn nesterov_solve_with(
    x0: &[f64],
    t: usize,
    mu: f64,
    f: &FeasibleSet,
    opts: SolveOptions,
) -> Result<(Vec<f64>, SolverTrace)> {
    let mu = SmoothingParams::new(mu)?.mu;
    if x0.len() != f.dim() {
        return Err(Error::invalid(format!(
            "start point length {} does not match dimension {}",
            x0.len(),
            f.dim()
        )));
    }
    if !f.is_feasible(x0, 1e-8) {
        return Err(Error::invalid(format!(
            "start point is infeasible (violation {:.3e}); project it first",
            f.violation(x0)
        )));
    }
    let mut trace = SolverTrace::default();
    if t == 0 {
        return Ok((x0.to_vec(), trace));
    }

    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut theta = 1.0f64;

    for _k in 0..t {
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        // extrapolate, gradient step at the extrapolated point, project
        let y: Vec<f64> = x
            .iter()
            .zip(&x_prev)
            .map(|(xc, xp)| xc + beta * (xc - xp))
            .collect();
        let (_, grad) = huber_value_grad(&y, mu)?;
        let step: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - mu * gi).collect();
        let z = project_feasible(&step, f);

        x_prev = x;
        if opts.monotone {
            let (fz, _) = huber_value_grad(&z, mu)?;
            let (fx, _) = huber_value_grad(&x_prev, mu)?;
            x = if fz <= fx { z } else { x_prev.clone() };
        } else {
            x = z;
        }
        theta = theta_next;

        let (fmu_x, _) = huber_value_grad(&x, mu)?;
        trace.push(norm1(&x), fmu_x, f.violation(&x));
    }
    Ok((x, trace))
}

/// Default starting point for a feasible set: the projection of the origin,
/// which for equality constraints is A^T b.
pub fn default_start(f: &FeasibleSet) -> Vec<f64> {
    project_feasible(&vec![0.0; f.dim()], f)
}
