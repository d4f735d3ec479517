//! Bounded Levenberg-Marquardt for small dense weighted least-squares problems.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::noise::stream_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// Standard uncertainties; infinite along directions the data do not constrain.
    pub sigmas: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Set when JᵀJ is numerically singular at the solution.
    pub ill_conditioned: bool,
    /// Index of the winning start when multi-start was used (0 = the given init).
    pub start_index: usize,
}

impl FitResult {
    /// rss / (n − p), or rss when there are no spare degrees of freedom.
    pub fn reduced_chi2(&self) -> f64 {
        let dof = self.n_points.saturating_sub(self.params.len());
        if dof == 0 {
            self.rss
        } else {
            self.rss / dof as f64
        }
    }

    pub fn get(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.names.iter().position(|n| n == name)?;
        Some((self.params[i], self.sigmas[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n] }
    }

    pub fn non_negative(n: usize) -> Self {
        Self { lower: vec![0.0; n], upper: vec![f64::INFINITY; n] }
    }

    fn clamp(&self, p: &mut [f64]) {
        for (i, v) in p.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        p.iter().enumerate().all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative parameter-step tolerance.
    pub xtol: f64,
    /// Relative cost-decrease tolerance.
    pub ftol: f64,
    /// Largest allowed cosine between the residual vector and any free Jacobian column.
    pub gtol: f64,
    /// Number of perturbed restarts in addition to the given init (0 disables).
    pub multistart: usize,
    pub seed: u64,
    /// Log-normal spread of restart perturbations.
    pub spread: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, xtol: 1e-10, ftol: 1e-12, gtol: 1e-6, multistart: 0, seed: 0, spread: 0.5 }
    }
}

impl LmOptions {
    pub fn with_multistart(mut self, n: usize, seed: u64) -> Self {
        self.multistart = n;
        self.seed = seed;
        self
    }
}

/// A least-squares problem: `model(params)` predicts every observation.
pub struct Problem<'a, F> {
    pub model: F,
    pub y: &'a [f64],
    pub sigma: Option<&'a [f64]>,
    pub names: Vec<String>,
    pub bounds: Bounds,
}

impl<'a, F> Problem<'a, F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    pub fn new(model: F, y: &'a [f64], names: &[&str]) -> Self {
        Self {
            model,
            y,
            sigma: None,
            names: names.iter().map(|s| s.to_string()).collect(),
            bounds: Bounds::unbounded(names.len()),
        }
    }

    pub fn weighted(mut self, sigma: Option<&'a [f64]>) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn bounded(mut self, bounds: Bounds) -> Self {
        self.bounds = bounds;
        self
    }

    fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let pred = (self.model)(p)?;
        if pred.len() != self.y.len() {
            return Err(Error::invalid(format!("model returned {} values for {} points", pred.len(), self.y.len())));
        }
        let r: Vec<f64> = match self.sigma {
            Some(s) => pred.iter().zip(self.y).zip(s).map(|((m, y), s)| (m - y) / s).collect(),
            None => pred.iter().zip(self.y).map(|(m, y)| m - y).collect(),
        };
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("model produced a non-finite value".into()));
        }
        Ok(r)
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes Σ((model − y)/σ)² from `init`, with optional multi-start.
///
/// Restarts multiply each parameter of `init` by exp(spread·ξ) and clamp to
/// the bounds; the lowest final cost wins, ties going to the lowest index.
pub fn solve<F>(problem: &Problem<'_, F>, init: &[f64], opts: &LmOptions) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = problem.y.len();
    let np = init.len();
    if problem.names.len() != np || problem.bounds.lower.len() != np || problem.bounds.upper.len() != np {
        return Err(Error::invalid("parameter names, bounds and init disagree in length"));
    }
    if n < np {
        return Err(Error::invalid(format!("{n} data points cannot determine {np} parameters")));
    }
    if let Some(s) = problem.sigma {
        if s.len() != n || s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("per-point sigma must be positive and match the data length"));
        }
    }
    if problem.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data contain non-finite values"));
    }
    if !problem.bounds.contains(init) {
        return Err(Error::invalid("initial parameters lie outside the bounds"));
    }

    let mut best = run(problem, init, opts)?;
    let mut rng = stream_rng(opts.seed, 0);
    for k in 1..=opts.multistart {
        let mut start: Vec<f64> = init
            .iter()
            .map(|&v| {
                let xi: f64 = StandardNormal.sample(&mut rng);
                v * (opts.spread * xi).exp()
            })
            .collect();
        problem.bounds.clamp(&mut start);
        // a failed restart is simply discarded
        if let Ok(mut fit) = run(problem, &start, opts) {
            if fit.rss < best.rss {
                fit.start_index = k;
                best = fit;
            }
        }
    }
    Ok(best)
}

/// Typical magnitude of each parameter, used for finite-difference steps.
fn scales(init: &[f64], bounds: &Bounds) -> Vec<f64> {
    init.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v != 0.0 {
                v.abs()
            } else {
                let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
                if lo.is_finite() && hi.is_finite() && hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            }
        })
        .collect()
}

fn jacobian<F>(problem: &Problem<'_, F>, p: &[f64], r0: &[f64], scale: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = r0.len();
    let mut jac = DMatrix::zeros(n, p.len());
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = 1e-6 * p[j].abs().max(1e-3 * scale[j]);
        let (lo, hi) = (problem.bounds.lower[j], problem.bounds.upper[j]);
        let col: Vec<f64> = if p[j] - h >= lo && p[j] + h <= hi {
            q[j] = p[j] + h;
            let rp = problem.residuals(&q)?;
            q[j] = p[j] - h;
            let rm = problem.residuals(&q)?;
            rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        } else if p[j] + h <= hi {
            q[j] = p[j] + h;
            let rp = problem.residuals(&q)?;
            rp.iter().zip(r0).map(|(a, b)| (a - b) / h).collect()
        } else {
            q[j] = p[j] - h;
            let rm = problem.residuals(&q)?;
            r0.iter().zip(&rm).map(|(a, b)| (a - b) / h).collect()
        };
        q[j] = p[j];
        for i in 0..n {
            jac[(i, j)] = col[i];
        }
    }
    Ok(jac)
}

/// Cosine test on the projected gradient: parameters pinned at a bound with
/// the gradient pushing outward are excluded.
fn gradient_small(jac: &DMatrix<f64>, r: &[f64], scale: f64, p: &[f64], bounds: &Bounds, gtol: f64) -> bool {
    let rnorm = sum_sq(r).sqrt();
    // residuals at round-off level carry no direction
    if rnorm <= 1e-10 * scale {
        return true;
    }
    let rv = DVector::from_column_slice(r);
    (0..p.len()).all(|j| {
        let col = jac.column(j);
        let g = col.dot(&rv);
        let at_lower = p[j] <= bounds.lower[j] && g > 0.0;
        let at_upper = p[j] >= bounds.upper[j] && g < 0.0;
        let cn = col.norm();
        at_lower || at_upper || cn == 0.0 || g.abs() / (cn * rnorm) <= gtol
    })
}

/// The full Gauss-Newton step from `p` is below `xtol` in every parameter.
/// This catches optima whose residual is so small that the cosine test is
/// dominated by rounding in the Jacobian.
fn newton_step_small(jac: &DMatrix<f64>, r: &[f64], p: &[f64], scale: &[f64], xtol: f64) -> bool {
    let jtj = jac.transpose() * jac;
    let grad = jac.transpose() * DVector::from_column_slice(r);
    let Some(chol) = jtj.cholesky() else {
        return false;
    };
    let delta = chol.solve(&(-grad));
    delta
        .iter()
        .enumerate()
        .all(|(j, d)| d.abs() <= xtol * p[j].abs().max(1e-12 * scale[j]))
}

fn run<F>(problem: &Problem<'_, F>, init: &[f64], opts: &LmOptions) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let np = init.len();
    let scale = scales(init, &problem.bounds);
    let mut p = init.to_vec();
    let mut r = problem.residuals(&p)?;
    let mut cost = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut diag_max = vec![0.0f64; np];
    let mut iterations = 0;
    let mut finished = cost == 0.0;

    while !finished && iterations < opts.max_iter {
        iterations += 1;
        let jac = jacobian(problem, &p, &r, &scale)?;
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * DVector::from_column_slice(&r);
        for j in 0..np {
            diag_max[j] = diag_max[j].max(jtj[(j, j)]);
        }
        let floor = 1e-12 * diag_max.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        loop {
            let mut a = jtj.clone();
            for j in 0..np {
                a[(j, j)] += lambda * diag_max[j].max(floor);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                if lambda > 1e20 {
                    finished = true;
                    break;
                }
                continue;
            };
            let delta = chol.solve(&(-&grad));
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            problem.bounds.clamp(&mut trial);
            let step_rel = trial
                .iter()
                .zip(&p)
                .enumerate()
                .map(|(j, (t, o))| (t - o).abs() / o.abs().max(1e-12 * scale[j]))
                .fold(0.0, f64::max);
            let trial_r = problem.residuals(&trial);
            let trial_cost = trial_r.as_ref().map(|v| sum_sq(v)).unwrap_or(f64::INFINITY);
            if trial_cost < cost {
                let drop = (cost - trial_cost) / cost;
                p = trial;
                r = trial_r.expect("finite cost implies Ok");
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-15);
                if step_rel < opts.xtol || drop < opts.ftol || cost == 0.0 {
                    finished = true;
                }
                break;
            }
            if step_rel < opts.xtol {
                // no representable improvement left
                finished = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                finished = true;
                break;
            }
        }
    }

    let jac = jacobian(problem, &p, &r, &scale)?;
    let data_scale = match problem.sigma {
        Some(s) => problem.y.iter().zip(s).map(|(y, s)| (y / s).powi(2)).sum::<f64>().sqrt(),
        None => sum_sq(problem.y).sqrt(),
    };
    let converged = finished
        && (gradient_small(&jac, &r, data_scale, &p, &problem.bounds, opts.gtol)
            || newton_step_small(&jac, &r, &p, &scale, opts.xtol));
    let n = r.len();
    let dof = n.saturating_sub(np).max(1);
    let s2 = cost / dof as f64;
    let (sigmas, ill_conditioned) = covariance_sigmas(&jac, s2);
    Ok(FitResult {
        names: problem.names.clone(),
        params: p,
        sigmas,
        rss: cost,
        n_points: n,
        converged,
        iterations,
        ill_conditioned,
        start_index: 0,
    })
}

/// sqrt(diag(s²·(JᵀJ)⁻¹)), computed on the column-equilibrated matrix.
fn covariance_sigmas(jac: &DMatrix<f64>, s2: f64) -> (Vec<f64>, bool) {
    let np = jac.ncols();
    let norms: Vec<f64> = (0..np).map(|j| jac.column(j).norm()).collect();
    if norms.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return (vec![f64::INFINITY; np], true);
    }
    let mut scaled = jac.clone();
    for j in 0..np {
        scaled.column_mut(j).scale_mut(1.0 / norms[j]);
    }
    let m = scaled.transpose() * &scaled;
    let eig = SymmetricEigen::new(m);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-14 * max) {
        return (vec![f64::INFINITY; np], true);
    }
    let inv = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v))
        * eig.eigenvectors.transpose();
    let sig = (0..np).map(|j| (s2 * inv[(j, j)]).max(0.0).sqrt() / norms[j]).collect();
    (sig, false)
}

/// Pointwise convenience wrapper: fits y ≈ f(x, p).
pub fn nonlinear_least_squares<M>(
    f: M,
    x: &[f64],
    y: &[f64],
    sigma: Option<&[f64]>,
    names: &[&str],
    init: &[f64],
    bounds: Bounds,
    opts: &LmOptions,
) -> Result<FitResult>
where
    M: Fn(f64, &[f64]) -> f64,
{
    if x.len() != y.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    let model = |p: &[f64]| Ok(x.iter().map(|&xi| f(xi, p)).collect());
    let problem = Problem::new(model, y, names).weighted(sigma).bounded(bounds);
    solve(&problem, init, opts)
}
