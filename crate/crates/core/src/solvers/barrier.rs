//! Log-barrier Newton method for smooth convex objectives over polytopes
//! `{x : A x >= b, E x = e}` of small dimension.
//!
//! Equalities are eliminated by working in an orthonormal basis of the null
//! space of `E`. Each barrier stage minimizes `f(x) - mu * sum ln(a_i'x - b_i)`
//! by damped Newton with Armijo backtracking; `mu` shrinks geometrically. A
//! final active-set Newton solve (the polish) removes the `O(mu)` bias of the
//! barrier whenever the KKT conditions of the guessed active set check out.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::solvers::{SolveReport, SolveStatus, KKT_TOL};

/// A twice differentiable convex function with an open domain.
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    /// `+inf` outside the domain.
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
    /// Writes the Hessian into `out` (dense, `dim x dim`).
    fn hessian(&self, x: &[f64], out: &mut DMatrix<f64>);
}

/// Rows `a_i' x (>= or =) b_i`.
#[derive(Debug, Clone, Default)]
pub struct LinearRows {
    pub coeffs: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearRows {
    pub fn push(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    fn slack(&self, i: usize, x: &[f64]) -> f64 {
        dot(&self.coeffs[i], x) - self.rhs[i]
    }
}

#[derive(Debug, Clone)]
pub struct BarrierOptions {
    pub mu_start: f64,
    pub mu_end: f64,
    pub mu_factor: f64,
    pub armijo: f64,
    pub max_newton_per_stage: usize,
    pub newton_tol: f64,
    pub polish: bool,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            mu_start: 1.0,
            mu_end: 1e-10,
            mu_factor: 0.1,
            armijo: 1e-4,
            max_newton_per_stage: 100,
            newton_tol: 1e-26,
            polish: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierOutcome {
    pub x: Vec<f64>,
    pub report: SolveReport,
    /// Objective value at the end of each barrier stage.
    pub stage_objectives: Vec<f64>,
    pub polished: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis (columns) of the null space of the given rows.
fn null_space(rows: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    if rows.is_empty() {
        return DMatrix::identity(n, n);
    }
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for r in rows {
        for i in 0..n {
            if r[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                gram[(i, j)] += r[i] * r[j];
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let scale = eig.eigenvalues.iter().cloned().fold(1.0_f64, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] <= 1e-10 * scale).collect();
    let mut z = DMatrix::<f64>::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        z.set_column(c, &eig.eigenvectors.column(k));
    }
    z
}

/// Solves `H d = -g` for symmetric positive (semi)definite `H`, adding a
/// growing ridge when the Cholesky factorization fails.
fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = h.nrows();
    if n == 0 {
        return Some(DVector::zeros(0));
    }
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0_f64, f64::max).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..n {
            hr[(i, i)] += ridge;
        }
        if let Some(ch) = hr.cholesky() {
            return Some(-ch.solve(g));
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 100.0 };
    }
    None
}

struct Problem<'a, F: SmoothObjective> {
    f: &'a F,
    ineq: &'a LinearRows,
    n: usize,
}

impl<F: SmoothObjective> Problem<'_, F> {
    fn barrier_value(&self, x: &[f64], mu: f64) -> f64 {
        let mut v = self.f.value(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        for i in 0..self.ineq.len() {
            let s = self.ineq.slack(i, x);
            if s <= 0.0 {
                return f64::INFINITY;
            }
            v -= mu * s.ln();
        }
        v
    }

    /// Gradient and Hessian of the barrier function in full coordinates.
    fn barrier_derivatives(&self, x: &[f64], mu: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut g = vec![0.0; n];
        self.f.gradient(x, &mut g);
        let mut h = DMatrix::zeros(n, n);
        self.f.hessian(x, &mut h);
        for i in 0..self.ineq.len() {
            let a = &self.ineq.coeffs[i];
            let s = self.ineq.slack(i, x);
            let w = mu / s;
            let w2 = mu / (s * s);
            for r in 0..n {
                if a[r] == 0.0 {
                    continue;
                }
                g[r] -= w * a[r];
                for c in 0..n {
                    h[(r, c)] += w2 * a[r] * a[c];
                }
            }
        }
        (DVector::from_vec(g), h)
    }

    fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        let mut step = f64::INFINITY;
        for i in 0..self.ineq.len() {
            let rate = dot(&self.ineq.coeffs[i], dx);
            if rate < 0.0 {
                step = step.min(-self.ineq.slack(i, x) / rate);
            }
        }
        step
    }

    /// Damped Newton on the barrier function restricted to `x0 + span(Z)`.
    fn center(&self, x: &mut Vec<f64>, z: &DMatrix<f64>, mu: f64, opts: &BarrierOptions) -> (usize, bool) {
        let mut iters = 0;
        while iters < opts.max_newton_per_stage {
            iters += 1;
            let (g, h) = self.barrier_derivatives(x, mu);
            let gz = z.transpose() * &g;
            let hz = z.transpose() * &h * z;
            let Some(dz) = newton_direction(hz, &gz) else {
                return (iters, false);
            };
            let decrement = -gz.dot(&dz);
            if decrement <= 2.0 * opts.newton_tol || !decrement.is_finite() {
                return (iters, true);
            }
            let dx: Vec<f64> = (z * &dz).iter().copied().collect();
            let mut alpha = (0.99 * self.max_step(x, &dx)).min(1.0);
            if decrement < 1e-12 && alpha == 1.0 {
                // Inside the quadratic-convergence region the decrease is
                // below the resolution of the function values.
                for (xi, di) in x.iter_mut().zip(&dx) {
                    *xi += di;
                }
                if decrement < 1e-20 {
                    return (iters, true);
                }
                continue;
            }
            let phi0 = self.barrier_value(x, mu);
            let mut accepted = false;
            while alpha > 1e-20 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect();
                let phi = self.barrier_value(&trial, mu);
                if phi <= phi0 - opts.armijo * alpha * decrement {
                    *x = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                // No representable decrease left.
                return (iters, true);
            }
        }
        (iters, false)
    }
}

/// Minimizes `f` over `{x : ineq(x) >= 0, eq(x) = 0}` starting from `start`,
/// which must satisfy the equalities and strictly satisfy the inequalities.
pub fn barrier_newton<F: SmoothObjective>(
    f: &F,
    ineq: &LinearRows,
    eq: &LinearRows,
    start: &[f64],
    opts: &BarrierOptions,
) -> Result<BarrierOutcome> {
    let n = f.dim();
    if start.len() != n {
        return Err(Error::InvalidArgument("start point has the wrong dimension".into()));
    }
    for i in 0..ineq.len() {
        if ineq.slack(i, start) <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "start point violates inequality {i} (slack {:.3e})",
                ineq.slack(i, start)
            )));
        }
    }
    if !f.value(start).is_finite() {
        return Err(Error::InvalidArgument("objective is not finite at the start point".into()));
    }
    let problem = Problem { f, ineq, n };
    let z = null_space(&eq.coeffs, n);
    let mut x = start.to_vec();
    let mut stage_objectives = Vec::new();
    let mut iterations = 0;
    let mut mu = opts.mu_start;

    if z.ncols() > 0 {
        loop {
            let (it, _) = problem.center(&mut x, &z, mu, opts);
            iterations += it;
            stage_objectives.push(f.value(&x));
            if mu <= opts.mu_end * (1.0 + 1e-9) {
                break;
            }
            mu = (mu * opts.mu_factor).max(opts.mu_end);
        }
    } else {
        stage_objectives.push(f.value(&x));
        mu = 0.0;
    }

    let barrier_kkt = barrier_kkt_residual(f, ineq, &z, &x, mu);
    let mut outcome = BarrierOutcome {
        report: SolveReport {
            objective: f.value(&x),
            kkt_residual: barrier_kkt,
            iterations,
            status: SolveStatus::Converged,
        },
        x,
        stage_objectives,
        polished: false,
    };

    if opts.polish && z.ncols() > 0 {
        if let Some((xp, kkt, it)) = polish(f, ineq, eq, &outcome.x, mu) {
            // A verified KKT point of a convex program is optimal; the value
            // check only absorbs round-off in pinned coordinates with steep
            // gradients, so it is relative.
            let slack = 1e-9 * (1.0 + outcome.report.objective.abs());
            if kkt <= barrier_kkt.max(KKT_TOL) && f.value(&xp) <= outcome.report.objective + slack {
                outcome.report.objective = f.value(&xp);
                outcome.report.kkt_residual = kkt;
                outcome.report.iterations += it;
                outcome.x = xp;
                outcome.polished = true;
            }
        }
    }

    // An uncentered run is still accepted when the final point verifies.
    if outcome.report.kkt_residual > KKT_TOL {
        outcome.report.status = SolveStatus::MaxIter;
    }
    Ok(outcome)
}

/// Stationarity on the central path with multipliers `mu / s_i`; the
/// complementarity gap is `mu` by construction.
fn barrier_kkt_residual<F: SmoothObjective>(f: &F, ineq: &LinearRows, z: &DMatrix<f64>, x: &[f64], mu: f64) -> f64 {
    let n = x.len();
    let mut g = vec![0.0; n];
    f.gradient(x, &mut g);
    for i in 0..ineq.len() {
        let lam = mu / ineq.slack(i, x);
        for (gr, a) in g.iter_mut().zip(&ineq.coeffs[i]) {
            *gr -= lam * a;
        }
    }
    let r = z.transpose() * DVector::from_vec(g);
    r.amax().max(mu)
}

/// Active-set Newton refinement. Returns the refined point, its KKT residual
/// and the Newton iterations used, or `None` when the guess does not verify.
fn polish<F: SmoothObjective>(
    f: &F,
    ineq: &LinearRows,
    eq: &LinearRows,
    x_barrier: &[f64],
    mu: f64,
) -> Option<(Vec<f64>, f64, usize)> {
    let n = x_barrier.len();
    let mut active: Vec<usize> = (0..ineq.len())
        .filter(|&i| {
            let s = ineq.slack(i, x_barrier);
            s * s <= mu.max(1e-300) * 10.0
        })
        .collect();
    let mut total_iters = 0;

    for _round in 0..4 {
        let mut rows = eq.coeffs.clone();
        let mut rhs = eq.rhs.clone();
        for &i in &active {
            rows.push(ineq.coeffs[i].clone());
            rhs.push(ineq.rhs[i]);
        }
        // Project onto the active affine set.
        let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
        let resid = DVector::from_fn(rows.len(), |r, _| dot(&rows[r], x_barrier) - rhs[r]);
        let aat = &a * a.transpose();
        let y = aat.svd(true, true).solve(&resid, 1e-12).ok()?;
        let shift = a.transpose() * y;
        let mut x: Vec<f64> = x_barrier.iter().zip(shift.iter()).map(|(v, s)| v - s).collect();
        if !f.value(&x).is_finite() {
            return None;
        }

        let z = null_space(&rows, n);
        // Newton on f over x + span(Z).
        let mut converged = z.ncols() == 0;
        for _ in 0..50 {
            if z.ncols() == 0 {
                break;
            }
            total_iters += 1;
            let mut g = vec![0.0; n];
            f.gradient(&x, &mut g);
            let mut h = DMatrix::zeros(n, n);
            f.hessian(&x, &mut h);
            let gz = z.transpose() * DVector::from_vec(g);
            let hz = z.transpose() * h * &z;
            let hz_scale = (0..hz.nrows()).map(|i| hz[(i, i)]).fold(0.0_f64, f64::max);
            let ch = hz.clone().cholesky()?;
            // Reject nearly singular reduced Hessians: the minimizer is not isolated.
            let min_pivot = (0..hz.nrows()).map(|i| ch.l()[(i, i)].powi(2)).fold(f64::INFINITY, f64::min);
            if min_pivot < 1e-10 * hz_scale.max(1e-300) {
                return None;
            }
            let dz = -ch.solve(&gz);
            let dec = -gz.dot(&dz);
            if dec <= 1e-28 || !dec.is_finite() {
                converged = true;
                break;
            }
            let dx: Vec<f64> = (&z * &dz).iter().copied().collect();
            let f0 = f.value(&x);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-12 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + alpha * b).collect();
                let ft = f.value(&trial);
                if ft.is_finite() && ft <= f0 - 1e-4 * alpha * dec + 1e-15 * f0.abs() {
                    x = trial;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }

        // Multipliers: grad f = E' nu + A_act' lambda.
        let mut g = vec![0.0; n];
        f.gradient(&x, &mut g);
        let gv = DVector::from_vec(g.clone());
        let at = a.transpose();
        let mult = at.clone().svd(true, true).solve(&gv, 1e-12).ok()?;
        let stat = (&gv - &at * &mult).amax();
        let n_eq = eq.len();
        let lambdas: Vec<f64> = (0..active.len()).map(|k| mult[n_eq + k]).collect();
        let worst = lambdas
            .iter()
            .enumerate()
            .filter(|(_, &l)| l < -1e-9)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k);
        if let Some(k) = worst {
            active.remove(k);
            continue;
        }
        let primal = (0..ineq.len()).map(|i| (-ineq.slack(i, &x)).max(0.0)).fold(0.0, f64::max);
        if primal > 1e-12 {
            return None;
        }
        let compl = active
            .iter()
            .zip(&lambdas)
            .map(|(&i, l)| (l * ineq.slack(i, &x)).abs())
            .fold(0.0, f64::max);
        let dual = lambdas.iter().map(|l| (-l).max(0.0)).fold(0.0, f64::max);
        let kkt = stat.max(compl).max(dual).max(primal);
        return Some((x, kkt, total_iters));
    }
    None
}
