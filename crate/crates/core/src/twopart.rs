//! Two-part model for semicontinuous outcomes.
//!
//! The outcome process is split in two: a logistic regression decides
//! whether the outcome is positive, and a Gamma GLM with log link models
//! its magnitude conditional on being positive. The unconditional mean is
//! the product of the two parts' predictions, and the log-likelihood of
//! the full model is exactly the sum of the parts' log-likelihoods since
//! they share no parameters.

use crate::data::Dataset;
use crate::glm::{irls_fit, Family, FittedGlm, GlmError, Link};
use thiserror::Error;

/// Errors from two-part fitting.
#[derive(Debug, Error)]
pub enum TwoPartError {
    /// The response has no zeros (nothing for the binary part to model)
    /// or no positives (nothing for the gamma part to fit).
    #[error("response must contain at least one zero and one positive value; {0}")]
    DegenerateResponse(String),
    /// The binary part failed to fit.
    #[error("binary part: {0}")]
    Binary(GlmError),
    /// The positive part failed to fit. Rank loss shows up here when a
    /// covariate is constant on the positive subsample even though it
    /// varies on the full data.
    #[error("positive part (on the {n_positive} positive rows): {source}")]
    Positive { n_positive: usize, source: GlmError },
}

/// A fitted two-part model.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TwoPartFit {
    /// Logistic regression for `Pr(y > 0)`, fit on all rows.
    pub binary_part: FittedGlm,
    /// Gamma log-link GLM for `E[y | y > 0]`, fit on the positive rows.
    pub positive_part: FittedGlm,
    /// `binary_part.log_likelihood + positive_part.log_likelihood`.
    pub combined_loglik: f64,
}

/// Fit both parts of a two-part model with the same covariate set.
pub fn fit_twopart(data: &Dataset) -> Result<TwoPartFit, TwoPartError> {
    let y = data.response();
    let positive_rows: Vec<usize> =
        (0..data.n()).filter(|&i| y[i] > 0.0).collect();
    if positive_rows.is_empty() {
        return Err(TwoPartError::DegenerateResponse("all values are zero".into()));
    }
    if positive_rows.len() == data.n() {
        return Err(TwoPartError::DegenerateResponse(
            "all values are positive (fit a Gamma model directly instead)".into(),
        ));
    }

    let indicator: Vec<f64> =
        y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    let binary_data = data
        .with_response(indicator)
        .expect("indicator response is valid for the existing design");
    let binary_part = irls_fit(&binary_data, Family::Binomial, Link::Logit, None)
        .map_err(TwoPartError::Binary)?;

    let positive_data = data
        .subset(&positive_rows)
        .map_err(|e| TwoPartError::DegenerateResponse(e.to_string()))?;
    let positive_part = irls_fit(&positive_data, Family::Gamma, Link::Log, None)
        .map_err(|source| TwoPartError::Positive {
            n_positive: positive_rows.len(),
            source,
        })?;

    let combined_loglik = binary_part.log_likelihood + positive_part.log_likelihood;
    Ok(TwoPartFit { binary_part, positive_part, combined_loglik })
}

/// Unconditional-mean prediction `p̂ · μ̂⁺`.
///
/// `p̂ = logistic(x·β_bin)` and `μ̂⁺ = exp(x·β_gam)`; the product is
/// strictly positive for finite inputs because both factors are.
pub fn predict_twopart(fit: &TwoPartFit, design_row: &[f64]) -> f64 {
    fit.binary_part.predict_mean(design_row) * fit.positive_part.predict_mean(design_row)
}
