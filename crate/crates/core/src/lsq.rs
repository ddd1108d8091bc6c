//! Damped Gauss-Newton (Levenberg-Marquardt) least squares with projected
//! iterates and forward-difference Jacobians.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{PlcError, Result};

/// A residual model `r(theta)` with an optional feasible set.
pub trait Problem {
    fn n_params(&self) -> usize;

    /// Residual vector, or `None` when `theta` cannot be evaluated.
    fn residuals(&self, theta: &[f64]) -> Option<Vec<f64>>;

    /// Maps `theta` back into the feasible set.
    fn project(&self, _theta: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsqOptions {
    pub max_iter: usize,
    /// Stop when an accepted step improves rss by less than this fraction.
    pub rss_rtol: f64,
    /// Stop when the infinity norm of `J^T r` drops below this.
    pub grad_tol: f64,
    /// Relative forward-difference step.
    pub fd_step: f64,
    /// Floor on `|theta_j|` when scaling the difference step.
    pub fd_floor: f64,
    /// Add the second-order geodesic correction to each step.
    pub geodesic_accel: bool,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rss_rtol: 1e-10,
            grad_tol: 1e-8,
            fd_step: 1e-6,
            fd_floor: 1e-3,
            geodesic_accel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    RssTolerance,
    Gradient,
    ZeroResidual,
    /// Damping grew without finding a descent step.
    Stalled,
    MaxIterations,
    /// The starting point could not be evaluated.
    BadStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqReport {
    pub theta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// rss after each accepted step, starting with the initial value.
    pub rss_history: Vec<f64>,
}

impl LsqReport {
    pub fn converged(&self) -> bool {
        !matches!(
            self.termination,
            Termination::MaxIterations | Termination::BadStart
        )
    }
}

pub fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Forward-difference Jacobian of the residuals at `theta`. Falls back to a
/// backward difference when projection blocks the forward step.
pub fn jacobian_fd<P: Problem + ?Sized>(
    problem: &P,
    theta: &[f64],
    r0: &[f64],
    opts: &LsqOptions,
) -> DMatrix<f64> {
    let n = r0.len();
    let p = theta.len();
    let mut jac = DMatrix::zeros(n, p);
    for j in 0..p {
        let h = opts.fd_step * theta[j].abs().max(opts.fd_floor);
        let mut col = None;
        for dir in [1.0, -1.0] {
            let mut t = theta.to_vec();
            t[j] += dir * h;
            problem.project(&mut t);
            let dt = t[j] - theta[j];
            if dt.abs() < 0.5 * h {
                continue;
            }
            // Projection may move other coordinates; only accept clean steps.
            if t.iter()
                .zip(theta)
                .enumerate()
                .any(|(k, (a, b))| k != j && a != b)
            {
                continue;
            }
            if let Some(r) = problem.residuals(&t) {
                col = Some((r, dt));
                break;
            }
        }
        if let Some((r, dt)) = col {
            for i in 0..n {
                jac[(i, j)] = (r[i] - r0[i]) / dt;
            }
        }
    }
    jac
}

/// Minimizes `sum r_i(theta)^2` from `theta0`.
pub fn minimize<P: Problem + ?Sized>(problem: &P, theta0: &[f64], opts: &LsqOptions) -> LsqReport {
    let mut theta = theta0.to_vec();
    problem.project(&mut theta);
    let Some(mut r) = problem.residuals(&theta).filter(|r| r.iter().all(|v| v.is_finite())) else {
        return LsqReport {
            theta,
            residuals: Vec::new(),
            rss: f64::INFINITY,
            iterations: 0,
            termination: Termination::BadStart,
            rss_history: Vec::new(),
        };
    };
    let mut rss = sum_sq(&r);
    let mut history = vec![rss];
    let mut lambda = 1e-3;
    let p = theta.len();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    'outer: for iter in 0..opts.max_iter {
        iterations = iter + 1;
        if rss == 0.0 {
            termination = Termination::ZeroResidual;
            break;
        }
        let jac = jacobian_fd(problem, &theta, &r, opts);
        let rv = DVector::from_column_slice(&r);
        let g = jac.tr_mul(&rv);
        if g.amax() < opts.grad_tol {
            termination = Termination::Gradient;
            break;
        }
        let a = jac.tr_mul(&jac);
        let max_diag = (0..p).map(|j| a[(j, j)]).fold(0.0_f64, f64::max);
        let floor = (1e-12 * max_diag).max(1e-30);

        loop {
            let Some(cand) = constrained_step(problem, &theta, &r, &jac, &a, &g, lambda, floor, opts) else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    termination = Termination::Stalled;
                    break 'outer;
                }
                continue;
            };
            let trial = problem
                .residuals(&cand)
                .filter(|r| r.iter().all(|v| v.is_finite()));
            match trial {
                Some(rn) if sum_sq(&rn) < rss => {
                    let rss_new = sum_sq(&rn);
                    let improvement = (rss - rss_new) / rss;
                    theta = cand;
                    r = rn;
                    rss = rss_new;
                    history.push(rss);
                    lambda = (lambda / 3.0).max(1e-12);
                    if improvement < opts.rss_rtol {
                        termination = Termination::RssTolerance;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    lambda *= 4.0;
                    if lambda > 1e16 {
                        termination = Termination::Stalled;
                        break 'outer;
                    }
                }
            }
        }
    }

    LsqReport {
        theta,
        residuals: r,
        rss,
        iterations,
        termination,
        rss_history: history,
    }
}

/// Damped Gauss-Newton step with geodesic acceleration, followed by
/// projection. Coordinates the projection pins in place are frozen and the
/// step is re-solved without them.
#[allow(clippy::too_many_arguments)]
fn constrained_step<P: Problem + ?Sized>(
    problem: &P,
    theta: &[f64],
    r: &[f64],
    jac: &DMatrix<f64>,
    a: &DMatrix<f64>,
    g: &DVector<f64>,
    lambda: f64,
    floor: f64,
    opts: &LsqOptions,
) -> Option<Vec<f64>> {
    let p = theta.len();
    let mut frozen = vec![false; p];
    loop {
        let mut m = a.clone();
        let mut rhs = -g.clone();
        for j in 0..p {
            m[(j, j)] += lambda * a[(j, j)].max(floor);
            if frozen[j] {
                for k in 0..p {
                    m[(j, k)] = 0.0;
                    m[(k, j)] = 0.0;
                }
                m[(j, j)] = 1.0;
                rhs[j] = 0.0;
            }
        }
        let chol = m.cholesky()?;
        let mut delta = chol.solve(&rhs);
        if opts.geodesic_accel {
            if let Some(acc) = acceleration(problem, theta, r, jac, &chol, &delta, &frozen) {
                let norm = |v: &DVector<f64>| {
                    (0..p)
                        .map(|j| a[(j, j)].max(floor) * v[j] * v[j])
                        .sum::<f64>()
                        .sqrt()
                };
                if 2.0 * norm(&acc) <= 0.75 * norm(&delta) {
                    delta += 0.5 * acc;
                }
            }
        }
        let raw: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + d).collect();
        let mut cand = raw.clone();
        problem.project(&mut cand);
        let mut changed = false;
        for j in 0..p {
            if !frozen[j] && cand[j] == theta[j] && raw[j] != theta[j] {
                frozen[j] = true;
                changed = true;
            }
        }
        if !changed {
            return Some(cand);
        }
    }
}

/// Second-order correction along `delta` from a finite-difference
/// directional second derivative of the residuals.
fn acceleration<P: Problem + ?Sized>(
    problem: &P,
    theta: &[f64],
    r: &[f64],
    jac: &DMatrix<f64>,
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    delta: &DVector<f64>,
    frozen: &[bool],
) -> Option<DVector<f64>> {
    const H: f64 = 0.1;
    let probe: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + H * d).collect();
    let mut projected = probe.clone();
    problem.project(&mut projected);
    if projected != probe {
        return None;
    }
    let rh = problem.residuals(&probe)?;
    let jd = jac * delta;
    let rpp = DVector::from_iterator(
        r.len(),
        (0..r.len()).map(|i| 2.0 / H * ((rh[i] - r[i]) / H - jd[i])),
    );
    let mut rhs = -jac.tr_mul(&rpp);
    for (j, f) in frozen.iter().enumerate() {
        if *f {
            rhs[j] = 0.0;
        }
    }
    let acc = chol.solve(&rhs);
    acc.iter().all(|v| v.is_finite()).then_some(acc)
}

/// Standard errors from the residual Jacobian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub sigma: Vec<f64>,
    /// Parameters with a component in the numerical null space of `J^T J`;
    /// their sigma comes from the pseudo-inverse.
    pub poorly_determined: Vec<bool>,
    /// Residual variance `rss / (n - p)`.
    pub s2: f64,
}

/// `sigma_j = sqrt(s2 [(J^T J)^-1]_jj)` with `s2 = rss / (n - p)`; uses the
/// pseudo-inverse when `J^T J` is singular to `1e-12` relative.
pub fn covariance(jac: &DMatrix<f64>, rss: f64) -> Result<Covariance> {
    let (n, p) = jac.shape();
    if n <= p {
        return Err(PlcError::Underdetermined {
            points: n,
            params: p,
        });
    }
    let s2 = rss / (n - p) as f64;
    let a = jac.tr_mul(jac);
    let eig = SymmetricEigen::new(a);
    let max_ev = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-12 * max_ev;
    let mut pinv = DMatrix::<f64>::zeros(p, p);
    let mut null_weight = vec![0.0; p];
    for k in 0..p {
        let ev = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        if ev > cutoff && ev > 0.0 {
            pinv += (v * v.transpose()) / ev;
        } else {
            for j in 0..p {
                null_weight[j] += v[j] * v[j];
            }
        }
    }
    let sigma = (0..p).map(|j| (s2 * pinv[(j, j)].max(0.0)).sqrt()).collect();
    let poorly_determined = null_weight.iter().map(|w| *w > 1e-6).collect();
    Ok(Covariance {
        sigma,
        poorly_determined,
        s2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// f(t) = theta t
    struct Linear {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl Problem for Linear {
        fn n_params(&self) -> usize {
            1
        }
        fn residuals(&self, th: &[f64]) -> Option<Vec<f64>> {
            Some(self.t.iter().zip(&self.y).map(|(t, y)| th[0] * t - y).collect())
        }
    }

    /// Rosenbrock as a residual problem.
    struct Rosen;
    impl Problem for Rosen {
        fn n_params(&self) -> usize {
            2
        }
        fn residuals(&self, th: &[f64]) -> Option<Vec<f64>> {
            Some(vec![10.0 * (th[1] - th[0] * th[0]), 1.0 - th[0]])
        }
    }

    /// Exponential decay with theta_1 >= 0 enforced by projection.
    struct Decay {
        t: Vec<f64>,
        y: Vec<f64>,
    }
    impl Problem for Decay {
        fn n_params(&self) -> usize {
            2
        }
        fn residuals(&self, th: &[f64]) -> Option<Vec<f64>> {
            Some(
                self.t
                    .iter()
                    .zip(&self.y)
                    .map(|(t, y)| th[0] * (-th[1] * t).exp() - y)
                    .collect(),
            )
        }
        fn project(&self, th: &mut [f64]) {
            th[1] = th[1].max(0.0);
        }
    }

    #[test]
    fn linear_sigma_matches_closed_form() {
        let t: Vec<f64> = (1..=8).map(f64::from).collect();
        let y = vec![2.1, 3.9, 6.2, 7.8, 10.1, 12.2, 13.8, 16.1];
        let prob = Linear { t: t.clone(), y: y.clone() };
        let rep = minimize(&prob, &[1.0], &LsqOptions::default());
        let stt: f64 = t.iter().map(|v| v * v).sum();
        let sty: f64 = t.iter().zip(&y).map(|(a, b)| a * b).sum();
        let theta = sty / stt;
        assert_abs_diff_eq!(rep.theta[0], theta, epsilon = 1e-8);
        let rss: f64 = t.iter().zip(&y).map(|(a, b)| (theta * a - b).powi(2)).sum();
        let sigma = (rss / 7.0 / stt).sqrt();
        let jac = jacobian_fd(&prob, &rep.theta, &rep.residuals, &LsqOptions::default());
        let cov = covariance(&jac, rep.rss).unwrap();
        assert_abs_diff_eq!(cov.sigma[0], sigma, epsilon = 1e-8);
        assert!(!cov.poorly_determined[0]);
    }

    #[test]
    fn solves_rosenbrock() {
        let rep = minimize(&Rosen, &[-1.2, 1.0], &LsqOptions::default());
        assert!(rep.converged());
        assert_abs_diff_eq!(rep.theta[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(rep.theta[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn rss_history_is_monotone() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-0.7 * t).exp()).collect();
        let rep = minimize(&Decay { t, y }, &[0.5, 3.0], &LsqOptions::default());
        assert!(rep.rss_history.windows(2).all(|w| w[1] <= w[0]));
        assert_abs_diff_eq!(rep.theta[1], 0.7, epsilon = 1e-6);
    }

    #[test]
    fn projection_keeps_feasible() {
        // Data decays faster than allowed to grow: optimum on theta_1 >= 0.
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|t| (0.2 * t).exp()).collect();
        let rep = minimize(&Decay { t, y }, &[1.0, 0.5], &LsqOptions::default());
        assert!(rep.theta[1] >= 0.0);
        assert!(rep.converged());
    }

    #[test]
    fn singular_covariance_is_flagged() {
        // Second column is zero: parameter has no influence.
        let jac = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0]);
        let cov = covariance(&jac, 0.3).unwrap();
        assert_eq!(cov.poorly_determined, vec![false, true]);
        assert_eq!(cov.sigma[1], 0.0);
        assert!(covariance(&DMatrix::zeros(2, 2), 0.0).is_err());
    }

    #[test]
    fn zero_residual_gives_zero_sigma() {
        let jac = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert_eq!(covariance(&jac, 0.0).unwrap().sigma, vec![0.0]);
    }
}
