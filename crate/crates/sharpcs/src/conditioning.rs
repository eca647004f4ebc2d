//! Tangent cones, the projected power method for the cone-restricted minimal
//! singular value, Renegar-style condition estimates, dual certificates, and
//! nullspace-property / restricted-eigenvalue oracles.
//!
//! The central quantity is mu_{x0}(A) = inf { ||Az|| / ||z|| : z in T(x0) },
//! the minimal singular value of A restricted to the tangent cone of the l1
//! ball at x0. It equals the distance of A to the set of matrices for which
//! recovery of x0 fails, and ||A||_2 / mu is a condition number that shows up
//! in both iteration counts and noise-error bounds.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{dot, norm1, norm2, spectral_norm, DenseMatrix};
use crate::rng::{derive_seed, Rng, RngSeed};
use crate::Result;

/// Tangent cone of the l1 norm at a signal with support S and sign vector s:
/// T = { z : ||z_off|| _1 <= -s^T z }, the closed cone of descent directions.
#[derive(Debug, Clone)]
pub struct TangentConeL1 {
    /// Sorted support indices, nonempty.
    pub support: Vec<usize>,
    /// Full-length sign vector: +-1 on the support, 0 elsewhere.
    pub sign: Vec<f64>,
    /// Ambient dimension.
    pub p: usize,
}

const MEMBERSHIP_TOL: f64 = 1e-12;

impl TangentConeL1 {
    pub fn new(p: usize, support: Vec<usize>, signs: &[f64]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("tangent cone needs a nonempty support".to_string()));
        }
        if signs.len() != support.len() {
            return Err(Error::invalid("one sign per support index required".to_string()));
        }
        let mut sign = vec![0.0; p];
        for (&i, &s) in support.iter().zip(signs) {
            if i >= p {
                return Err(Error::invalid(format!("support index {i} out of range for p = {p}")));
            }
            if s != 1.0 && s != -1.0 {
                return Err(Error::invalid(format!("signs must be +-1, got {s}")));
            }
            sign[i] = s;
        }
        let mut support = support;
        support.sort_unstable();
        support.dedup();
        if sign.iter().filter(|&&s| s != 0.0).count() != support.len() {
            return Err(Error::invalid("duplicate support indices".to_string()));
        }
        Ok(TangentConeL1 { support, sign, p })
    }

    /// Cone at the support/sign pattern of a nonzero signal.
    pub fn from_signal(x0: &[f64]) -> Result<Self> {
        let support: Vec<usize> = (0..x0.len()).filter(|&i| x0[i] != 0.0).collect();
        let signs: Vec<f64> = support.iter().map(|&i| x0[i].signum()).collect();
        if support.is_empty() {
            return Err(Error::invalid("signal must be nonzero".to_string()));
        }
        Self::new(x0.len(), support, &signs)
    }

    /// Constraint function g(z) = s^T z + ||z_off||_1; membership is g <= 0.
    pub fn constraint(&self, z: &[f64]) -> f64 {
        let mut g = 0.0;
        for i in 0..self.p {
            if self.sign[i] != 0.0 {
                g += self.sign[i] * z[i];
            } else {
                g += z[i].abs();
            }
        }
        g
    }

    fn prox(&self, z: &[f64], lambda: f64) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.p);
        for i in 0..self.p {
            if self.sign[i] != 0.0 {
                w.push(z[i] - lambda * self.sign[i]);
            } else {
                w.push(soft_threshold(z[i], lambda));
            }
        }
        w
    }
}

#[inline]
fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// True iff z lies in the cone, up to a 1e-12 slack on the constraint.
pub fn cone_membership(z: &[f64], cone: &TangentConeL1) -> bool {
    cone.constraint(z) <= MEMBERSHIP_TOL
}

/// Root-find lambda > 0 with g(prox_lambda(z)) = 0 by bisection. The map is
/// continuous and strictly decreasing, so the bracket always closes.
fn prox_bisect(
    z: &[f64],
    g: impl Fn(&[f64]) -> f64,
    prox: impl Fn(&[f64], f64) -> Vec<f64>,
) -> Result<Vec<f64>> {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut w_hi = prox(z, hi);
    let mut guard = 0;
    while g(&w_hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        w_hi = prox(z, hi);
        guard += 1;
        if guard > 200 {
            return Err(Error::Convergence("prox bisection failed to bracket the root".to_string()));
        }
    }
    let mut w = w_hi;
    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let w_mid = prox(z, mid);
        if g(&w_mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
            w = w_mid;
        }
    }
    if g(&w) > MEMBERSHIP_TOL {
        return Err(Error::Convergence(format!(
            "prox bisection left constraint value {:.3e} above tolerance",
            g(&w)
        )));
    }
    Ok(w)
}

/// Exact Euclidean projection onto the tangent cone, without a QP solver.
///
/// If g(z) <= 0 the point is returned unchanged. Otherwise the projection is
/// prox of lambda* g, which is separable (shift by lambda on the support,
/// soft-threshold off it), with lambda* found by bisecting the monotone map
/// lambda -> g(prox_lambda(z)).
pub fn cone_project(z: &[f64], cone: &TangentConeL1) -> Result<Vec<f64>> {
    if z.len() != cone.p {
        return Err(Error::invalid("dimension mismatch in cone_project".to_string()));
    }
    if cone_membership(z, cone) {
        return Ok(z.to_vec());
    }
    prox_bisect(z, |w| cone.constraint(w), |w, l| cone.prox(w, l))
}

/// Parameters for the condition-number heuristic: smooth-proxy constants for
/// the spherical initialization, penalty multiplier, iteration caps, and the
/// number of random initializations.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerMethodParams {
    /// |x| proxy sharpness in h(x) = sqrt(x^2 + eps1^2) - eps1.
    pub eps1: f64,
    /// max(0, x) proxy sharpness in q(x) = eps2 log(1 + exp(x / eps2)).
    pub eps2: f64,
    /// Penalty multiplier gamma; the default 10 matches 10 ||A||_2^2 for
    /// row-orthonormal matrices. Use `for_matrix` otherwise.
    pub gamma: f64,
    /// Iteration cap for the spherical initialization descent.
    pub max_iters: usize,
    /// Relative objective-change tolerance for the initialization.
    pub tol: f64,
    /// Number of random initializations per estimate.
    pub restarts: usize,
    /// Iteration cap for the projected power method itself.
    pub power_iters: usize,
    /// Random starts screened inside one initialization; the descent keeps
    /// the best penalty objective among them.
    pub inner_starts: usize,
}

impl Default for PowerMethodParams {
    fn default() -> Self {
        PowerMethodParams {
            eps1: 1e-3,
            eps2: 1e-3,
            gamma: 10.0,
            max_iters: 500,
            tol: 1e-9,
            restarts: 5,
            power_iters: 20_000,
            inner_starts: 8,
        }
    }
}

impl PowerMethodParams {
    /// Defaults with the penalty scaled to the matrix: gamma = 10 ||A||_2^2.
    pub fn for_matrix(a: &DenseMatrix) -> Self {
        let s = spectral_norm(a);
        PowerMethodParams { gamma: 10.0 * s * s, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0) || !(self.eps2 > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::invalid("eps1, eps2, gamma must be positive".to_string()));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("at least one initialization is required".to_string()));
        }
        Ok(())
    }
}

fn softplus(x: f64, eps: f64) -> f64 {
    let t = x / eps;
    if t > 30.0 {
        x + eps * (-t).exp().ln_1p()
    } else if t < -30.0 {
        eps * t.exp()
    } else {
        eps * t.exp().ln_1p()
    }
}

fn sigmoid(x: f64, eps: f64) -> f64 {
    let t = x / eps;
    if t > 30.0 {
        1.0
    } else if t < -30.0 {
        t.exp()
    } else {
        1.0 / (1.0 + (-t).exp())
    }
}

/// Spherical initialization for the projected power method: Riemannian
/// gradient descent with backtracking line search on
/// F(z) = ||Az||^2 + gamma * q(s^T z + sum_off h(z_i)), from uniformly
/// random unit starts. Two stabilizers keep the descent out of spurious
/// basins: the proxy sharpness is graduated (softened h and q first, then
/// the configured eps1 / eps2), and `params.inner_starts` seeded starts are
/// screened with the best final objective kept.
pub fn sphere_init(
    a: &DenseMatrix,
    cone: &TangentConeL1,
    params: &PowerMethodParams,
    seed: RngSeed,
) -> Vec<f64> {
    let mut rng = Rng::from_seed(seed);
    let final_objective = |z: &[f64]| -> f64 {
        let az = a.mul_vec(z);
        let mut u = 0.0;
        for i in 0..cone.p {
            if cone.sign[i] != 0.0 {
                u += cone.sign[i] * z[i];
            } else {
                u += (z[i] * z[i] + params.eps1 * params.eps1).sqrt() - params.eps1;
            }
        }
        dot(&az, &az) + params.gamma * softplus(u, params.eps2)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..params.inner_starts.max(1) {
        let mut z = rng.unit_vector(cone.p);
        for scale in [30.0, 5.0, 1.0] {
            z = penalty_descent(a, cone, params, z, params.eps1 * scale, params.eps2 * scale);
        }
        let f = final_objective(&z);
        if best.as_ref().map_or(true, |(fb, _)| f < *fb) {
            best = Some((f, z));
        }
    }
    best.expect("at least one start").1
}

fn penalty_descent(
    a: &DenseMatrix,
    cone: &TangentConeL1,
    params: &PowerMethodParams,
    z0: Vec<f64>,
    eps1: f64,
    eps2: f64,
) -> Vec<f64> {
    let p = cone.p;
    let penalty_arg = |z: &[f64]| -> f64 {
        let mut u = 0.0;
        for i in 0..p {
            if cone.sign[i] != 0.0 {
                u += cone.sign[i] * z[i];
            } else {
                u += (z[i] * z[i] + eps1 * eps1).sqrt() - eps1;
            }
        }
        u
    };
    let objective = |z: &[f64]| -> f64 {
        let az = a.mul_vec(z);
        dot(&az, &az) + params.gamma * softplus(penalty_arg(z), eps2)
    };

    let mut z = z0;
    let mut f_cur = objective(&z);
    let mut best = z.clone();
    let mut f_best = f_cur;

    for _ in 0..params.max_iters {
        // Euclidean gradient
        let az = a.mul_vec(&z);
        let mut grad = a.tr_mul_vec(&az);
        for g in grad.iter_mut() {
            *g *= 2.0;
        }
        let qprime = params.gamma * sigmoid(penalty_arg(&z), eps2);
        for i in 0..p {
            if cone.sign[i] != 0.0 {
                grad[i] += qprime * cone.sign[i];
            } else {
                grad[i] += qprime * z[i] / (z[i] * z[i] + eps1 * eps1).sqrt();
            }
        }
        // Riemannian gradient: remove the radial component
        let radial = dot(&grad, &z);
        for i in 0..p {
            grad[i] -= radial * z[i];
        }
        let gnorm2 = dot(&grad, &grad);
        if gnorm2 <= 1e-30 {
            break;
        }
        // Backtracking with Armijo 1e-4, halving from step 1
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
            let n = norm2(&cand);
            if n > 1e-12 {
                let cand: Vec<f64> = cand.into_iter().map(|c| c / n).collect();
                let f_cand = objective(&cand);
                if f_cand <= f_cur - 1e-4 * step * gnorm2 {
                    let change = (f_cur - f_cand).abs();
                    z = cand;
                    f_cur = f_cand;
                    if f_cur < f_best {
                        f_best = f_cur;
                        best = z.clone();
                    }
                    accepted = true;
                    if change <= params.tol * f_cur.abs().max(1e-300) {
                        return best;
                    }
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    best
}

/// One run of the projected power method on a generic cone projector.
/// Iterates z <- normalize(project((lambda I - A^T A) z)) and returns the
/// final ||Az|| together with the iteration count. ||Az_k|| is checked to be
/// nonincreasing (tolerance 1e-12) from the first in-cone iterate onward.
fn power_iterate(
    a: &DenseMatrix,
    lambda: f64,
    project: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    z0: &[f64],
    max_iters: usize,
) -> Result<(f64, usize)> {
    let mut z = z0.to_vec();
    let mut m_prev: Option<f64> = None;
    let mut iters = 0;
    for _ in 0..max_iters {
        let az = a.mul_vec(&z);
        let ata_z = a.tr_mul_vec(&az);
        let v: Vec<f64> = z.iter().zip(&ata_z).map(|(zi, wi)| lambda * zi - wi).collect();
        if norm2(&v) <= 1e-14 * lambda.max(1e-300) {
            // z is a top eigenvector inside the cone: stationary point.
            return Ok((norm2(&az), iters));
        }
        let projected = project(&v)?;
        let pn = norm2(&projected);
        if pn <= 1e-300 {
            return Err(Error::Convergence(
                "cone projection collapsed to zero; reinitialize".to_string(),
            ));
        }
        z = projected.into_iter().map(|x| x / pn).collect();
        iters += 1;
        let m = norm2(&a.mul_vec(&z));
        // two decades below the infeasibility cutoff: the cone meets the
        // nullspace numerically and further grinding changes nothing
        if m <= 1e-10 * lambda.sqrt() {
            return Ok((m, iters));
        }
        if let Some(prev) = m_prev {
            if m > prev + 1e-12 {
                return Err(Error::Internal(format!(
                    "projected power method increased ||Az|| by {:.3e} at iteration {iters}",
                    m - prev
                )));
            }
            // Tighter than the five-digit target: the change criterion is a
            // Cauchy test, so slow tails need headroom.
            if (m - prev).abs() <= 1e-12 * prev.max(1e-300) {
                return Ok((m, iters));
            }
        }
        m_prev = Some(m);
    }
    let m_final = norm2(&a.mul_vec(&z));
    Ok((m_final, iters))
}

/// Projected power method for the tangent cone: upper bound on mu_{x0}(A).
pub fn projected_power_method(
    a: &DenseMatrix,
    cone: &TangentConeL1,
    z0: &[f64],
    max_iters: usize,
) -> Result<(f64, usize)> {
    let s = spectral_norm(a);
    let lambda = s * s;
    power_iterate(a, lambda, &|v| cone_project(v, cone), z0, max_iters)
}

/// Condition estimate for a signal: the smallest ||Az|| found over several
/// initializations of the projected power method on T(x0).
#[derive(Debug, Clone)]
pub struct ConditionEstimate {
    /// Estimate of mu_{x0}(A); an upper bound by construction.
    pub mu_hat: f64,
    /// Lower bound on the condition number: ||A||_2 / mu_hat.
    pub c_lower: f64,
    /// Total power iterations across initializations.
    pub power_iters: usize,
    /// Number of initializations run.
    pub init_runs: usize,
    /// All runs agreed to five significant digits.
    pub converged: bool,
    /// mu_hat < 1e-8 ||A||_2: the cone meets the nullspace numerically, so
    /// recovery fails and the condition number is reported as infinite.
    pub infeasible: bool,
    /// ||A||_2 used for the ratio.
    pub spectral_norm: f64,
}

/// Estimate mu_{x0}(A) and the condition lower bound C = ||A||_2 / mu by
/// running `params.restarts` spherical initializations of the projected
/// power method on the tangent cone at x0. Per-run seeds are split
/// deterministically from `seed`.
pub fn condition_estimate(
    a: &DenseMatrix,
    x0: &[f64],
    params: &PowerMethodParams,
    seed: RngSeed,
) -> Result<ConditionEstimate> {
    params.validate()?;
    if x0.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("signal must be nonzero".to_string()));
    }
    let cone = TangentConeL1::from_signal(x0)?;
    let snorm = spectral_norm(a);
    let lambda = snorm * snorm;

    let mut values = Vec::with_capacity(params.restarts);
    let mut total_iters = 0;
    for run in 0..params.restarts {
        let mut attempt = 0u64;
        loop {
            let sub = RngSeed(derive_seed(seed.0, (run as u64) + 1000 * attempt));
            let z0 = sphere_init(a, &cone, params, sub);
            match power_iterate(a, lambda, &|v| cone_project(v, &cone), &z0, params.power_iters) {
                Ok((mu, iters)) => {
                    values.push(mu);
                    total_iters += iters;
                    break;
                }
                Err(Error::Convergence(_)) if attempt < 3 => {
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mu_hat = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mu_max = values.iter().cloned().fold(0.0f64, f64::max);
    let infeasible = mu_hat < 1e-8 * snorm;
    let converged = if infeasible {
        values.iter().all(|&v| v < 1e-8 * snorm)
    } else {
        (mu_max - mu_hat) <= 1e-5 * mu_max
    };
    let c_lower = if mu_hat > 0.0 { snorm / mu_hat } else { f64::INFINITY };
    Ok(ConditionEstimate {
        mu_hat,
        c_lower,
        power_iters: total_iters,
        init_runs: params.restarts,
        converged,
        infeasible,
        spectral_norm: snorm,
    })
}

/// Dual certificate for uniqueness of x0 in the equality-constrained problem:
/// take the least-squares candidate u with (A^T u)_S = sign(x0)_S and check
/// that the off-support correlations stay strictly below one.
///
/// Returns (certified, slack) with slack = 1 - ||(A^T u)_off||_inf.
pub fn dual_certificate_check(a: &DenseMatrix, x0: &[f64]) -> Result<(bool, f64)> {
    if x0.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("signal must be nonzero".to_string()));
    }
    let support: Vec<usize> = (0..x0.len()).filter(|&i| x0[i] != 0.0).collect();
    let k = support.len();
    let n = a.rows;
    if k > n {
        return Err(Error::NotCertifiable(format!(
            "support size {k} exceeds row count {n}; A_S cannot have full column rank"
        )));
    }
    let a_s = a.select_cols(&support);
    let qr = crate::linalg::householder_qr(&a_s);
    let scale = a_s.max_abs().max(1e-300);
    for j in 0..k {
        if qr.r.get(j, j).abs() <= 1e-10 * scale * (n as f64).sqrt() {
            return Err(Error::NotCertifiable("A_S is numerically rank-deficient".to_string()));
        }
    }
    let s_s: Vec<f64> = support.iter().map(|&i| x0[i].signum()).collect();
    // minimum-norm u with A_S^T u = s_S: u = Q_thin R^{-T} s_S
    let rt = DenseMatrix::from_fn(k, k, |i, j| qr.r.get(j, i));
    let w = crate::linalg::solve_lower(&rt, &s_s);
    let mut u = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..k {
            s += qr.q.get(i, j) * w[j];
        }
        u[i] = s;
    }
    let corr = a.tr_mul_vec(&u);
    let mut off_max = 0.0f64;
    for i in 0..a.cols {
        if x0[i] == 0.0 {
            off_max = off_max.max(corr[i].abs());
        }
    }
    let slack = 1.0 - off_max;
    Ok((slack > 0.0, slack))
}

/// Lower bound on half the diameter of the l1-ball section by the nullspace,
/// sup { ||x||_2 : Ax = 0, ||x||_1 <= 1 }, via multi-start projected
/// subgradient ascent over the nullspace basis plus 10^4 random samples.
pub fn diameter_estimate(a: &DenseMatrix, restarts: usize, seed: RngSeed) -> Result<f64> {
    if a.rows >= a.cols {
        return Err(Error::invalid("diameter_estimate needs n < p".to_string()));
    }
    let z = crate::linalg::nullspace_basis(a)?;
    let d = z.cols;
    let mut rng = Rng::from_seed(seed);
    // For unit w the ratio ||Zw||_2 / ||Zw||_1 reduces to 1 / ||Zw||_1
    // because the basis has orthonormal columns.
    let ratio = |w: &[f64]| -> f64 {
        let x = z.mul_vec(w);
        let n1 = norm1(&x);
        if n1 <= 1e-300 {
            0.0
        } else {
            norm2(&x) / n1
        }
    };
    let mut best = 0.0f64;
    for _ in 0..restarts.max(1) {
        let mut w = rng.unit_vector(d);
        let mut step = 0.3;
        for _ in 0..500 {
            best = best.max(ratio(&w));
            let x = z.mul_vec(&w);
            let sg: Vec<f64> = x.iter().map(|v| v.signum()).collect();
            let mut g = z.tr_mul_vec(&sg);
            let radial = dot(&g, &w);
            for i in 0..d {
                g[i] -= radial * w[i];
            }
            let gn = norm2(&g);
            if gn <= 1e-14 {
                break;
            }
            let cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi / gn).collect();
            let n = norm2(&cand);
            if n > 1e-12 {
                w = cand.into_iter().map(|c| c / n).collect();
            }
            step *= 0.97;
        }
        best = best.max(ratio(&w));
    }
    for _ in 0..10_000 {
        let w = rng.unit_vector(d);
        best = best.max(ratio(&w));
    }
    Ok(best)
}

/// Exact NSP constant for a one-dimensional nullspace spanned by v:
/// C = 1 / (1 - max_{|T| = k} ||v_T||_1 / ||v||_1), where the maximum keeps
/// the k largest magnitudes.
pub fn exact_nsp_codim1(v: &[f64], k: usize) -> Result<f64> {
    let p = v.len();
    if k >= p {
        return Err(Error::invalid(format!("k = {k} must be below the dimension p = {p}")));
    }
    let total = norm1(v);
    if total <= 0.0 {
        return Err(Error::invalid("nullspace vector must be nonzero".to_string()));
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top: f64 = mags[..k].iter().sum();
    let ratio = top / total;
    if ratio >= 1.0 - 1e-12 {
        return Err(Error::NoNsp(format!(
            "the {k} largest entries carry ratio {ratio:.6} of the l1 mass"
        )));
    }
    Ok(1.0 / (1.0 - ratio))
}

/// Support-dominated cone D_S = { z : ||z_off||_1 <= ||z_S||_1 }, projected
/// by the same prox-bisection idea: soft-threshold off the support, grow
/// magnitudes on it.
struct DominatedCone {
    on_support: Vec<bool>,
}

impl DominatedCone {
    fn new(p: usize, support: &[usize]) -> Self {
        let mut on_support = vec![false; p];
        for &i in support {
            on_support[i] = true;
        }
        DominatedCone { on_support }
    }

    fn constraint(&self, z: &[f64]) -> f64 {
        let mut g = 0.0;
        for (zi, &on) in z.iter().zip(&self.on_support) {
            if on {
                g -= zi.abs();
            } else {
                g += zi.abs();
            }
        }
        g
    }

    fn prox(&self, z: &[f64], lambda: f64) -> Vec<f64> {
        z.iter()
            .zip(&self.on_support)
            .map(|(&zi, &on)| {
                if on {
                    if zi >= 0.0 {
                        zi + lambda
                    } else {
                        zi - lambda
                    }
                } else {
                    soft_threshold(zi, lambda)
                }
            })
            .collect()
    }

    fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if self.constraint(z) <= MEMBERSHIP_TOL {
            return Ok(z.to_vec());
        }
        prox_bisect(z, |w| self.constraint(w), |w, l| self.prox(w, l))
    }
}

fn combinations(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, p: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..p {
            current.push(i);
            rec(i + 1, p, k, current, out);
            current.pop();
        }
    }
    rec(0, p, k, &mut current, &mut out);
    out
}

/// Small-scale restricted-eigenvalue oracle: approximate
/// sigma_k(A) = min over supports S of size k of
/// min { ||Az|| / ||z|| : ||z_off||_1 <= ||z_S||_1 } by running the projected
/// power method per support, cross-validated with `samples` random projected
/// directions per support. Deliberately limited to p <= 14.
pub fn restricted_eigenvalue_oracle(
    a: &DenseMatrix,
    k: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<f64> {
    let p = a.cols;
    if p > 14 {
        return Err(Error::Unsupported(format!(
            "restricted_eigenvalue_oracle enumerates supports and is limited to p <= 14, got {p}"
        )));
    }
    if k >= p {
        return Err(Error::invalid(format!("k = {k} must be below p = {p}")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be at least 1".to_string()));
    }
    if a.data.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let snorm = spectral_norm(a);
    let lambda = snorm * snorm;
    let mut rng = Rng::from_seed(seed);
    let mut sigma = f64::INFINITY;

    for support in combinations(p, k) {
        let cone = DominatedCone::new(p, &support);
        let project = |v: &[f64]| cone.project(v);
        let mut best = f64::INFINITY;
        // a few power-method starts from random projected points
        for _ in 0..3 {
            let z0 = loop {
                let raw = rng.normal_vec(p);
                let proj = cone.project(&raw)?;
                let n = norm2(&proj);
                if n > 1e-12 {
                    break proj.into_iter().map(|x| x / n).collect::<Vec<f64>>();
                }
            };
            if let Ok((mu, _)) = power_iterate(a, lambda, &project, &z0, 2000) {
                best = best.min(mu);
            }
        }
        // random cone directions, with the best one refined by power steps
        let mut best_sample: Option<Vec<f64>> = None;
        let mut best_sample_val = f64::INFINITY;
        for _ in 0..samples {
            let raw = rng.normal_vec(p);
            let proj = cone.project(&raw)?;
            let n = norm2(&proj);
            if n <= 1e-12 {
                continue;
            }
            let unit: Vec<f64> = proj.into_iter().map(|x| x / n).collect();
            let val = norm2(&a.mul_vec(&unit));
            if val < best_sample_val {
                best_sample_val = val;
                best_sample = Some(unit);
            }
        }
        if let Some(z0) = best_sample {
            best = best.min(best_sample_val);
            if let Ok((mu, _)) = power_iterate(a, lambda, &project, &z0, 100) {
                best = best.min(mu);
            }
        }
        sigma = sigma.min(best);
    }
    Ok(sigma)
}
