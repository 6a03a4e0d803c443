//! Generalized linear model fitting by iteratively reweighted least
//! squares (IRLS), with pluggable family and link.
//!
//! Families: Tweedie at fixed power `p ∈ (1,2)` (variance `V(μ) = μ^p`),
//! Gamma (`V(μ) = μ²`), and Binomial (`V(μ) = μ(1−μ)`). Links: log and
//! logit. The fit solves the quasi-score equations
//! `Σ (yᵢ − μᵢ) xᵢ / (V(μᵢ) g'(μᵢ) φ) = 0`, reports standard errors from
//! the inverse expected Fisher information scaled by the estimated
//! dispersion, and evaluates exact log-likelihoods: the infinite-series
//! density for Tweedie (at the maximum-likelihood dispersion), the Gamma
//! likelihood at its maximum-likelihood shape, and the exact Bernoulli
//! likelihood for the binomial part.

use crate::data::Dataset;
use crate::num::brent_root;
use crate::tweedie;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::{digamma, ln_gamma};
use thiserror::Error;

/// Errors from GLM fitting and evaluation.
#[derive(Debug, Error)]
pub enum GlmError {
    /// The weighted cross-product matrix lost full column rank.
    #[error("singular design: pivot {pivot} of the weighted least-squares factor fell below tolerance")]
    SingularDesign { pivot: usize },
    /// IRLS ran out of iterations before the deviance stabilized.
    #[error("IRLS did not converge after {iterations} iterations (last relative deviance change {last_change:.3e})")]
    NotConverged { iterations: usize, last_change: f64 },
    /// The response violates the family's support.
    #[error("invalid response for the {family} family: {reason}")]
    InvalidResponse { family: String, reason: String },
    /// Offset vector length does not match the data.
    #[error("offset has {got} entries but the data has {expected} rows")]
    OffsetLength { got: usize, expected: usize },
    /// Tweedie power outside (1, 2).
    #[error("tweedie power must lie strictly inside (1, 2), got {0}")]
    InvalidPower(f64),
    /// Dispersion or likelihood evaluation failed.
    #[error("likelihood evaluation failed: {0}")]
    Likelihood(String),
}

impl From<tweedie::TweedieError> for GlmError {
    fn from(e: tweedie::TweedieError) -> Self {
        GlmError::Likelihood(e.to_string())
    }
}

/// Distribution family of the response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Tweedie compound Poisson–Gamma with fixed power `p ∈ (1, 2)`.
    Tweedie {
        /// Power parameter of the variance function `V(μ) = μ^p`.
        p: f64,
    },
    /// Gamma, `V(μ) = μ²`.
    Gamma,
    /// Bernoulli/binomial, `V(μ) = μ(1−μ)`.
    Binomial,
}

/// Link function `g(μ) = η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// `g(μ) = ln μ`.
    Log,
    /// `g(μ) = ln(μ/(1−μ))`.
    Logit,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Tweedie { p } => write!(f, "tweedie(p={p})"),
            Family::Gamma => write!(f, "gamma"),
            Family::Binomial => write!(f, "binomial"),
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Link::Log => write!(f, "log"),
            Link::Logit => write!(f, "logit"),
        }
    }
}

impl Family {
    /// Variance function `V(μ)`.
    fn variance(&self, mu: f64) -> f64 {
        match self {
            Family::Tweedie { p } => mu.powf(*p),
            Family::Gamma => mu * mu,
            Family::Binomial => mu * (1.0 - mu),
        }
    }

    /// Unit deviance `d(y, μ)`; the total deviance `Σ d` drives the IRLS
    /// convergence test.
    fn unit_deviance(&self, y: f64, mu: f64) -> f64 {
        match self {
            Family::Tweedie { p } => {
                // 2[ y(y^{1-p} - μ^{1-p})/(1-p) - (y^{2-p} - μ^{2-p})/(2-p) ]
                let a = if y == 0.0 {
                    0.0
                } else {
                    y * (y.powf(1.0 - p) - mu.powf(1.0 - p)) / (1.0 - p)
                };
                let b = (y.powf(2.0 - p) - mu.powf(2.0 - p)) / (2.0 - p);
                2.0 * (a - b)
            }
            Family::Gamma => 2.0 * ((y - mu) / mu - (y / mu).ln()),
            Family::Binomial => {
                let mut d = 0.0;
                if y > 0.0 {
                    d += y * (y / mu).ln();
                }
                if y < 1.0 {
                    d += (1.0 - y) * ((1.0 - y) / (1.0 - mu)).ln();
                }
                2.0 * d
            }
        }
    }

    /// Starting means that keep the first link evaluation finite.
    fn initial_mu(&self, y: &[f64]) -> Vec<f64> {
        match self {
            // Shift by a fraction of the sample mean so zeros stay off the
            // log link's boundary.
            Family::Tweedie { .. } | Family::Gamma => {
                let ybar = y.iter().sum::<f64>() / y.len() as f64;
                y.iter().map(|&v| v + 0.1 * ybar).collect()
            }
            // The additive-mean shift can exceed 1 for a 0/1 response, so
            // the binomial family uses the classic (y + 1/2)/2 start.
            Family::Binomial => y.iter().map(|&v| (v + 0.5) / 2.0).collect(),
        }
    }

    fn check_response(&self, y: &[f64]) -> Result<(), GlmError> {
        let bad = |reason: &str| {
            Err(GlmError::InvalidResponse { family: self.to_string(), reason: reason.into() })
        };
        match self {
            Family::Tweedie { p } => {
                if !(*p > 1.0 && *p < 2.0) {
                    return Err(GlmError::InvalidPower(*p));
                }
                if y.iter().any(|&v| v < 0.0) {
                    return bad("values must be non-negative");
                }
            }
            Family::Gamma => {
                if y.iter().any(|&v| v <= 0.0) {
                    return bad("values must be strictly positive");
                }
            }
            Family::Binomial => {
                if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                    return bad("values must be 0 or 1");
                }
            }
        }
        Ok(())
    }
}

impl Link {
    /// `η = g(μ)`.
    fn eta(&self, mu: f64) -> f64 {
        match self {
            Link::Log => mu.ln(),
            Link::Logit => (mu / (1.0 - mu)).ln(),
        }
    }

    /// `μ = g⁻¹(η)`, kept strictly inside the family's mean space.
    fn mu(&self, eta: f64) -> f64 {
        match self {
            Link::Log => eta.min(700.0).exp().max(1e-290),
            Link::Logit => {
                let m = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                m.clamp(1e-12, 1.0 - 1e-12)
            }
        }
    }

    /// `g'(μ)`.
    fn dgdmu(&self, mu: f64) -> f64 {
        match self {
            Link::Log => 1.0 / mu,
            Link::Logit => 1.0 / (mu * (1.0 - mu)),
        }
    }
}

/// A converged IRLS fit.
#[derive(Debug, Clone, Serialize)]
pub struct FittedGlm {
    /// Response family.
    pub family: Family,
    /// Link function.
    pub link: Link,
    /// Design column labels (intercept first).
    pub names: Vec<String>,
    /// Coefficient estimates, one per design column.
    pub coefficients: Vec<f64>,
    /// Standard errors from the inverse expected Fisher information,
    /// scaled by `dispersion`.
    pub standard_errors: Vec<f64>,
    /// Pearson dispersion estimate (fixed at 1 for the binomial family).
    pub dispersion: f64,
    /// Maximum-likelihood dispersion where the family defines one: the
    /// series MLE of `φ` for Tweedie, `1/ν̂` at the ML shape `ν̂` for Gamma.
    pub dispersion_mle: Option<f64>,
    /// Exact log-likelihood at the fitted parameters (see module docs).
    pub log_likelihood: f64,
    /// IRLS iterations used.
    pub iterations: usize,
    /// Whether the deviance-change criterion was met.
    pub converged: bool,
}

impl FittedGlm {
    /// Mean prediction for one design row: `g⁻¹(x·β)`.
    pub fn predict_mean(&self, row: &[f64]) -> f64 {
        let eta: f64 = row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum();
        self.link.mu(eta)
    }

    /// Mean predictions for every row of a dataset.
    pub fn fitted_means(&self, data: &Dataset) -> Vec<f64> {
        let eta = data.design() * DVector::from_column_slice(&self.coefficients);
        eta.iter().map(|&e| self.link.mu(e)).collect()
    }
}

/// Solve the weighted least-squares step `min ‖√W(z − Xβ)‖²`.
///
/// Returns the solution and `(XᵀWX)⁻¹` from a column-pivoted QR of `√W·X`.
/// Pivots below `1e-10` of the largest flag a rank-deficient design.
pub(crate) fn wls_solve(
    x: &DMatrix<f64>,
    w: &[f64],
    z: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>), GlmError> {
    let n = x.nrows();
    let k = x.ncols();
    let mut a = x.clone();
    let mut b = z.clone();
    for i in 0..n {
        let s = w[i].sqrt();
        for j in 0..k {
            a[(i, j)] *= s;
        }
        b[i] *= s;
    }
    let qr = a.col_piv_qr();
    let q = qr.q();
    let r: DMatrix<f64> = qr.r();
    let tol = 1e-10 * r[(0, 0)].abs();
    for i in 0..k {
        if !(r[(i, i)].abs() > tol) {
            return Err(GlmError::SingularDesign { pivot: i });
        }
    }
    let qtb = q.transpose() * b;
    let mut coef = r
        .solve_upper_triangular(&qtb)
        .ok_or(GlmError::SingularDesign { pivot: k - 1 })?;
    qr.p().inv_permute_rows(&mut coef);
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(GlmError::SingularDesign { pivot: k - 1 })?;
    let mut xtwx_inv = &r_inv * r_inv.transpose();
    qr.p().inv_permute_rows(&mut xtwx_inv);
    qr.p().inv_permute_columns(&mut xtwx_inv);
    Ok((coef, xtwx_inv))
}

/// Fit a GLM by IRLS.
///
/// Converges when the relative change in total deviance falls below
/// `1e-10` (with R's `0.1 + |deviance|` denominator guard), up to 100
/// iterations; non-convergence is an error carrying the diagnostics. The
/// optional `offset` is added to the linear predictor (`η = Xβ + offset`).
pub fn irls_fit(
    data: &Dataset,
    family: Family,
    link: Link,
    offset: Option<&[f64]>,
) -> Result<FittedGlm, GlmError> {
    let y = data.response();
    let x = data.design();
    let n = data.n();
    let k = data.k();
    family.check_response(y)?;
    if let Some(o) = offset {
        if o.len() != n {
            return Err(GlmError::OffsetLength { got: o.len(), expected: n });
        }
    }
    let off = |i: usize| offset.map_or(0.0, |o| o[i]);

    let mut mu = family.initial_mu(y);
    let mut deviance: f64 = (0..n).map(|i| family.unit_deviance(y[i], mu[i])).sum();
    let mut w = vec![0.0; n];
    let mut z = DVector::zeros(n);
    let mut coef = DVector::zeros(k);
    let mut xtwx_inv = DMatrix::zeros(k, k);
    let mut converged = false;
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    for iter in 1..=100 {
        iterations = iter;
        for i in 0..n {
            let g1 = link.dgdmu(mu[i]);
            w[i] = 1.0 / (family.variance(mu[i]) * g1 * g1);
            z[i] = (link.eta(mu[i]) - off(i)) + (y[i] - mu[i]) * g1;
        }
        let (c, cov) = wls_solve(x, &w, &z)?;
        coef = c;
        xtwx_inv = cov;
        let eta = x * &coef;
        for i in 0..n {
            mu[i] = link.mu(eta[i] + off(i));
        }
        let new_deviance: f64 = (0..n).map(|i| family.unit_deviance(y[i], mu[i])).sum();
        last_change = (new_deviance - deviance).abs() / (0.1 + new_deviance.abs());
        deviance = new_deviance;
        if last_change < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GlmError::NotConverged { iterations, last_change });
    }

    // Pearson dispersion on n - k degrees of freedom; the binomial family
    // keeps its dispersion fixed at 1.
    let pearson = (0..n)
        .map(|i| {
            let r = y[i] - mu[i];
            r * r / family.variance(mu[i])
        })
        .sum::<f64>()
        / (n - k) as f64;
    let dispersion = match family {
        Family::Binomial => 1.0,
        _ => pearson,
    };
    let standard_errors: Vec<f64> =
        (0..k).map(|j| (xtwx_inv[(j, j)] * dispersion).sqrt()).collect();

    let (log_likelihood, dispersion_mle) = match family {
        Family::Binomial => (bernoulli_loglik(y, &mu), None),
        Family::Gamma => {
            let nu = gamma_shape_mle(y, &mu)?;
            (gamma_loglik(y, &mu, nu), Some(1.0 / nu))
        }
        Family::Tweedie { p } => {
            let phi = tweedie::dispersion_mle(y, &mu, p, pearson)?;
            (tweedie::loglik(y, &mu, phi, p), Some(phi))
        }
    };

    Ok(FittedGlm {
        family,
        link,
        names: data.names().to_vec(),
        coefficients: coef.iter().copied().collect(),
        standard_errors,
        dispersion,
        dispersion_mle,
        log_likelihood,
        iterations,
        converged,
    })
}

/// Pearson dispersion `Σ (yᵢ−μ̂ᵢ)²/V(μ̂ᵢ) / (n−k)` of a fit on a dataset.
pub fn pearson_dispersion(fit: &FittedGlm, data: &Dataset) -> f64 {
    let mu = fit.fitted_means(data);
    let y = data.response();
    let k = data.k();
    let ss: f64 = y
        .iter()
        .zip(&mu)
        .map(|(&yi, &mi)| {
            let r = yi - mi;
            r * r / fit.family.variance(mi)
        })
        .sum();
    ss / (data.n() - k) as f64
}

/// Exact log-likelihood of a fit on a dataset (see module docs for the
/// per-family conventions). Equals `fit.log_likelihood` when evaluated on
/// the training data of an offset-free fit.
pub fn model_loglik(fit: &FittedGlm, data: &Dataset) -> Result<f64, GlmError> {
    let mu = fit.fitted_means(data);
    let y = data.response();
    match fit.family {
        Family::Binomial => Ok(bernoulli_loglik(y, &mu)),
        Family::Gamma => {
            let nu = gamma_shape_mle(y, &mu)?;
            Ok(gamma_loglik(y, &mu, nu))
        }
        Family::Tweedie { p } => {
            let phi = match fit.dispersion_mle {
                Some(phi) => phi,
                None => tweedie::dispersion_mle(y, &mu, p, fit.dispersion)?,
            };
            Ok(tweedie::loglik(y, &mu, phi, p))
        }
    }
}

/// Analytic score of the full Tweedie log-likelihood in `β` (log link):
/// `∂ℓ/∂βⱼ = Σᵢ (yᵢ − μᵢ) μᵢ^(1−p) xᵢⱼ / φ`.
///
/// The series normalizer `a(z, φ)` does not depend on `β`, so this equals
/// the quasi-score and is exact for the full likelihood.
pub fn tweedie_beta_score(
    data: &Dataset,
    coefficients: &[f64],
    phi: f64,
    p: f64,
) -> Vec<f64> {
    let x = data.design();
    let y = data.response();
    let eta = x * DVector::from_column_slice(coefficients);
    let mut score = vec![0.0; data.k()];
    for i in 0..data.n() {
        let mu = eta[i].exp();
        let c = (y[i] - mu) * mu.powf(1.0 - p) / phi;
        for (j, s) in score.iter_mut().enumerate() {
            *s += c * x[(i, j)];
        }
    }
    score
}

/// Exact Bernoulli log-likelihood.
pub(crate) fn bernoulli_loglik(y: &[f64], mu: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&yi, &mi)| if yi > 0.0 { mi.ln() } else { (1.0 - mi).ln() })
        .sum()
}

/// Maximum-likelihood Gamma shape given fitted means: solves
/// `ln ν − ψ(ν) = C` with `C = −1 − mean(ln(yᵢ/μᵢ) − yᵢ/μᵢ)`.
///
/// The left side is strictly decreasing from +∞ to 0, and `C > 0` unless
/// the fit is exact, so the root is bracketed on the log scale.
pub(crate) fn gamma_shape_mle(y: &[f64], mu: &[f64]) -> Result<f64, GlmError> {
    let n = y.len() as f64;
    let c = -1.0 - y
        .iter()
        .zip(mu)
        .map(|(&yi, &mi)| (yi / mi).ln() - yi / mi)
        .sum::<f64>()
        / n;
    if c.is_nan() {
        return Err(GlmError::Likelihood(
            "gamma shape equation is undefined (non-positive data or means)".into(),
        ));
    }
    // An exact fit (every μᵢ = yᵢ) drives the ML shape to infinity; clamp
    // the equation's right side so the degenerate case still yields a
    // finite (enormous) shape instead of failing the whole fit.
    let c = c.max(1e-12);
    let mut g = |ln_nu: f64| {
        let nu = ln_nu.exp();
        nu.ln() - digamma(nu) - c
    };
    let mut lo = 0.0;
    let mut g_lo = g(lo);
    let mut steps = 0;
    while g_lo <= 0.0 {
        lo -= 1.0;
        g_lo = g(lo);
        steps += 1;
        if steps > 700 {
            return Err(GlmError::Likelihood("gamma shape bracket ran away low".into()));
        }
    }
    let mut hi = lo + 1.0;
    let mut g_hi = g(hi);
    steps = 0;
    while g_hi >= 0.0 {
        hi += 1.0;
        g_hi = g(hi);
        steps += 1;
        if steps > 700 {
            return Err(GlmError::Likelihood("gamma shape bracket ran away high".into()));
        }
    }
    let root = brent_root(&mut g, lo, hi, g_lo, g_hi, 1e-13, 1e-13, 0.0)
        .ok_or_else(|| GlmError::Likelihood("gamma shape root lost its bracket".into()))?;
    Ok(root.exp())
}

/// Gamma log-likelihood at shape `ν` and means `μᵢ`:
/// `Σ ν ln(ν/μᵢ) + (ν−1) ln yᵢ − ν yᵢ/μᵢ − ln Γ(ν)`.
pub(crate) fn gamma_loglik(y: &[f64], mu: &[f64], nu: f64) -> f64 {
    let lg = ln_gamma(nu);
    y.iter()
        .zip(mu)
        .map(|(&yi, &mi)| nu * (nu / mi).ln() + (nu - 1.0) * yi.ln() - nu * yi / mi - lg)
        .sum()
}
