//! Tobit (Type I censored-normal) regression.
//!
//! The latent outcome follows a Normal linear model `y* = xβ + σε` and is
//! observed as `y = max(0, y*)`: zeros are censored draws, positives are
//! observed exactly. Zeros therefore contribute `ln Φ(−xβ/σ)` to the
//! log-likelihood and positives contribute the Normal log-density. The
//! model is fit by BFGS in `(β, ln σ)` — the log parametrization keeps σ
//! positive without constraints — with an analytic gradient, after an
//! internal standardization of the data that is undone exactly afterwards.

use crate::data::Dataset;
use crate::glm::{wls_solve, GlmError};
use crate::num::{bfgs_min, inv_mills, norm_cdf, norm_ln_cdf, norm_pdf};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Errors from Tobit fitting.
#[derive(Debug, Error)]
pub enum TobitError {
    /// Every observation is zero: the likelihood is maximized by pushing
    /// `xβ/σ → −∞` and no finite estimate exists.
    #[error("all observations are censored at zero; the latent mean is unidentified")]
    AllCensored,
    /// The design matrix is rank-deficient.
    #[error(transparent)]
    Design(#[from] GlmError),
    /// The optimizer stalled before reaching the gradient tolerance.
    #[error(
        "did not converge after {iterations} iterations \
         (gradient max-norm {grad_norm:.3e}, standardized scale)"
    )]
    NotConverged { iterations: usize, grad_norm: f64 },
    /// The observed information was not invertible at the optimum.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// A fitted Tobit model.
#[derive(Debug, Clone, Serialize)]
pub struct TobitFit {
    /// Covariate names, aligned with `coefficients`.
    pub names: Vec<String>,
    /// Latent-mean coefficients, in response units.
    pub coefficients: Vec<f64>,
    /// Latent standard deviation, in response units.
    pub sigma: f64,
    /// Observed-information standard errors for `coefficients`.
    pub standard_errors: Vec<f64>,
    /// Observed-information standard error for `sigma` (delta method
    /// from the `ln σ` parametrization).
    pub sigma_se: f64,
    /// Maximized log-likelihood.
    pub log_likelihood: f64,
    /// Gradient max-norm at the optimum, on the standardized scale.
    pub gradient_norm: f64,
    /// BFGS iterations used.
    pub iterations: usize,
    /// Whether the gradient tolerance was met.
    pub converged: bool,
}

/// Gradient max-norm (standardized scale) required at the optimum.
const GRAD_TOL: f64 = 1e-6;

/// Fit a Tobit model by maximum likelihood.
///
/// Covariates (all but the intercept column) are centered and scaled and
/// the response is scaled — never shifted, so the censoring point stays
/// at zero — before optimization; the estimates are mapped back to the
/// original units exactly. Standard errors come from the inverse observed
/// information evaluated on the original scale.
///
/// Censor-free data (all `y > 0`) is accepted: the likelihood then
/// reduces to ordinary Normal regression and the fit matches least
/// squares. All-zero data is rejected as unidentified.
pub fn tobit_fit(data: &Dataset) -> Result<TobitFit, TobitError> {
    let y = data.response();
    let n = data.n();
    let k = data.k();
    if y.iter().all(|&v| v == 0.0) {
        return Err(TobitError::AllCensored);
    }

    // Standardize: x'_j = (x_j − m_j)/s_j for non-intercept columns,
    // y' = y/c. Scaling the response by a positive constant maps
    // max(0, ·) censoring onto itself.
    let mut means = vec![0.0; k];
    let mut scales = vec![1.0; k];
    for j in 1..k {
        let col = data.design().column(j);
        let m = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        means[j] = m;
        // A constant column has no scale; leave it unscaled and let the
        // rank check below report the collinearity.
        scales[j] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let y_var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let c = if y_var.sqrt() > 1e-12 { y_var.sqrt() } else { 1.0 };

    let mut xs = data.design().clone();
    for j in 1..k {
        for i in 0..n {
            xs[(i, j)] = (xs[(i, j)] - means[j]) / scales[j];
        }
    }
    let ys: Vec<f64> = y.iter().map(|v| v / c).collect();

    // OLS start on the standardized data; σ⁰ is the residual SD.
    let zs = DVector::from_column_slice(&ys);
    let (beta0, _) = wls_solve(&xs, &vec![1.0; n], &zs)?;
    let resid = &zs - &xs * &beta0;
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let s0 = (rss / n as f64).sqrt().max(1e-6).ln();
    let mut x0 = DVector::zeros(k + 1);
    x0.rows_mut(0, k).copy_from(&beta0);
    x0[k] = s0;

    let mut objective = |theta: &DVector<f64>| -> (f64, DVector<f64>) {
        let (ll, grad) = loglik_and_grad(&ys, &xs, theta);
        (-ll, -grad)
    };
    let res = bfgs_min(&mut objective, x0, 1e-8, 500);

    // Convergence is judged by the gradient max-norm on the
    // standardized scale; BFGS's Euclidean test is stricter when it
    // passes, but a line-search stall can still leave an acceptable point.
    let (_, grad) = loglik_and_grad(&ys, &xs, &res.x);
    let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    if grad_norm >= GRAD_TOL {
        return Err(TobitError::NotConverged { iterations: res.iterations, grad_norm });
    }

    // Undo the standardization: with x'_j = (x_j − m_j)/s_j and y = c·y',
    // the latent mean c·(β'₀ + Σ β'_j x'_j) rearranges to original-scale
    // coefficients below, and σ = c·σ'.
    let bs = res.x.rows(0, k).clone_owned();
    let sigma_s = res.x[k].exp();
    let mut coefficients = vec![0.0; k];
    coefficients[0] = c * (bs[0] - (1..k).map(|j| bs[j] * means[j] / scales[j]).sum::<f64>());
    for j in 1..k {
        coefficients[j] = c * bs[j] / scales[j];
    }
    let sigma = c * sigma_s;

    // Observed information on the original scale, in (β, ln σ).
    let theta = {
        let mut t = DVector::from_column_slice(&coefficients);
        t = t.insert_row(k, sigma.ln());
        t
    };
    let hess = loglik_hessian(y, data.design(), &theta);
    let info = -hess;
    let cov = info
        .clone()
        .try_inverse()
        .ok_or_else(|| TobitError::Numerical("observed information is singular".into()))?;
    let mut standard_errors = vec![0.0; k];
    for j in 0..k {
        let v = cov[(j, j)];
        if !(v.is_finite() && v > 0.0) {
            return Err(TobitError::Numerical(format!(
                "non-positive variance for coefficient {j}"
            )));
        }
        standard_errors[j] = v.sqrt();
    }
    let v_lnsigma = cov[(k, k)];
    if !(v_lnsigma.is_finite() && v_lnsigma > 0.0) {
        return Err(TobitError::Numerical("non-positive variance for sigma".into()));
    }
    let sigma_se = sigma * v_lnsigma.sqrt();

    let log_likelihood = loglik_and_grad(y, data.design(), &theta).0;

    Ok(TobitFit {
        names: data.names().to_vec(),
        coefficients,
        sigma,
        standard_errors,
        sigma_se,
        log_likelihood,
        gradient_norm: grad_norm,
        iterations: res.iterations,
        converged: true,
    })
}

/// Censored-outcome mean `E[max(0, xβ + σε)] = Φ(xβ/σ)·xβ + σ·φ(xβ/σ)`.
pub fn tobit_predict(fit: &TobitFit, design_row: &[f64]) -> f64 {
    let m: f64 =
        design_row.iter().zip(&fit.coefficients).map(|(x, b)| x * b).sum();
    let z = m / fit.sigma;
    (norm_cdf(z) * m + fit.sigma * norm_pdf(z)).max(0.0)
}

/// Log-likelihood and gradient in `θ = (β, ln σ)`.
///
/// With `e = (y − xβ)/σ` for positives and `a = −xβ/σ` for zeros:
/// `∂ℓ/∂β = Σ₊ e·x/σ − Σ₀ λ(a)·x/σ` and `∂ℓ/∂s = Σ₊ (e² − 1) − Σ₀ a·λ(a)`,
/// where `λ` is the inverse Mills ratio and `s = ln σ`. `theta` holds the
/// `k` coefficients followed by `ln σ`.
pub fn loglik_and_grad(
    y: &[f64],
    design: &DMatrix<f64>,
    theta: &DVector<f64>,
) -> (f64, DVector<f64>) {
    let k = design.ncols();
    let s = theta[k];
    let inv_sigma = (-s).exp();
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_74;

    let mut ll = 0.0;
    let mut grad = DVector::zeros(k + 1);
    for i in 0..y.len() {
        let row = design.row(i);
        let xb: f64 = row.iter().zip(theta.iter()).map(|(x, b)| x * b).sum();
        if y[i] > 0.0 {
            let e = (y[i] - xb) * inv_sigma;
            ll += -HALF_LN_TWO_PI - s - 0.5 * e * e;
            let ge = e * inv_sigma;
            for j in 0..k {
                grad[j] += ge * row[j];
            }
            grad[k] += e * e - 1.0;
        } else {
            let a = -xb * inv_sigma;
            ll += norm_ln_cdf(a);
            let lam = inv_mills(a);
            let gl = lam * inv_sigma;
            for j in 0..k {
                grad[j] -= gl * row[j];
            }
            grad[k] -= a * lam;
        }
    }
    (ll, grad)
}

/// Analytic Hessian of the log-likelihood in `θ = (β, ln σ)`.
///
/// Positives: `H_ββ = −xxᵀ/σ²`, `H_βs = −2e·x/σ`, `H_ss = −2e²`.
/// Zeros, using `λ'(a) = −λ(a)·(a + λ(a))`:
/// `H_ββ = λ'·xxᵀ/σ²`, `H_βs = (a·λ' + λ)·x/σ`, `H_ss = a·λ + a²·λ'`.
fn loglik_hessian(y: &[f64], design: &DMatrix<f64>, theta: &DVector<f64>) -> DMatrix<f64> {
    let k = design.ncols();
    let s = theta[k];
    let inv_sigma = (-s).exp();
    let mut h = DMatrix::zeros(k + 1, k + 1);
    for i in 0..y.len() {
        let row = design.row(i);
        let xb: f64 = row.iter().zip(theta.iter()).map(|(x, b)| x * b).sum();
        let (bb, bs, ss);
        if y[i] > 0.0 {
            let e = (y[i] - xb) * inv_sigma;
            bb = -inv_sigma * inv_sigma;
            bs = -2.0 * e * inv_sigma;
            ss = -2.0 * e * e;
        } else {
            let a = -xb * inv_sigma;
            let lam = inv_mills(a);
            let dlam = -lam * (a + lam);
            bb = dlam * inv_sigma * inv_sigma;
            bs = (a * dlam + lam) * inv_sigma;
            ss = a * lam + a * a * dlam;
        }
        for j in 0..k {
            for l in 0..k {
                h[(j, l)] += bb * row[j] * row[l];
            }
            h[(j, k)] += bs * row[j];
            h[(k, j)] += bs * row[j];
        }
        h[(k, k)] += ss;
    }
    h
}
