//! Quasi-Newton (BFGS) minimization with backtracking line search.

use nalgebra::{DMatrix, DVector};

/// Outcome of a BFGS run.
#[derive(Debug, Clone)]
pub struct BfgsResult {
    /// Final iterate.
    pub x: DVector<f64>,
    /// Objective value at `x`.
    pub f: f64,
    /// Euclidean norm of the gradient at `x`.
    pub grad_norm: f64,
    /// Number of outer iterations performed.
    pub iterations: usize,
    /// Whether the gradient-norm criterion was met.
    pub converged: bool,
}

/// Minimize `f` (returning value and gradient) from `x0`.
///
/// Runs BFGS on the inverse Hessian with an Armijo backtracking line
/// search. Declares convergence when the gradient's Euclidean norm drops
/// below `gtol`. The Armijo test allows slack of a few ulps of `|f|` so
/// that progress is not blocked by rounding noise once the objective has
/// flattened out near the optimum.
pub fn bfgs_min(
    f: &mut impl FnMut(&DVector<f64>) -> (f64, DVector<f64>),
    x0: DVector<f64>,
    gtol: f64,
    max_iter: usize,
) -> BfgsResult {
    let k = x0.len();
    let mut x = x0;
    let (mut fx, mut grad) = f(&x);
    let mut h_inv = DMatrix::<f64>::identity(k, k);
    let mut iterations = 0;
    while iterations < max_iter {
        let grad_norm = grad.norm();
        if grad_norm <= gtol {
            return BfgsResult { x, f: fx, grad_norm, iterations, converged: true };
        }
        iterations += 1;
        let mut dir = -(&h_inv * &grad);
        let mut slope = dir.dot(&grad);
        if !(slope < 0.0) {
            // The quasi-Newton model lost positive definiteness; restart
            // from a steepest-descent step.
            h_inv = DMatrix::identity(k, k);
            dir = -grad.clone();
            slope = -grad.norm_squared();
        }
        let noise = 64.0 * f64::EPSILON * fx.abs().max(1.0);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let x_new = &x + &dir * step;
            let (f_new, g_new) = f(&x_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope + noise {
                accepted = Some((x_new, f_new, g_new));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No acceptable step in this direction: report where we stand.
            return BfgsResult { x, f: fx, grad_norm, iterations, converged: grad_norm <= gtol };
        };
        let s = &x_new - &x;
        let y = &g_new - &grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            // Standard BFGS inverse update:
            // H <- (I - s y'/sy) H (I - y s'/sy) + s s'/sy
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            h_inv += (sy + yhy) * rho * rho * (&s * s.transpose())
                - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        x = x_new;
        fx = f_new;
        grad = g_new;
    }
    let grad_norm = grad.norm();
    BfgsResult { x, f: fx, grad_norm, iterations, converged: grad_norm <= gtol }
}
