//! Regression models for semicontinuous outcomes.
//!
//! Semicontinuous data — nonnegative, right-skewed, with a point mass at
//! zero — show up wherever a frequency process gates a severity process:
//! annual medical expenditures, insurance claim totals, daily rainfall.
//! This crate fits and compares the three standard single- and two-equation
//! treatments of such outcomes:
//!
//! - a **compound Poisson–Gamma GLM** (Tweedie family with power parameter
//!   `1 < p < 2`), which models the zeros and the positive tail with one
//!   linear predictor ([`tweedie`], [`glm`], [`profile`]);
//! - a **two-part model** — logistic regression for `P(Y > 0)` times a
//!   Gamma GLM for the positive part ([`twopart`]);
//! - a **Tobit** model treating zeros as left-censored draws from a latent
//!   normal ([`tobit`]).
//!
//! The [`eval`] module adds train/test splitting, RMSE, quantile–quantile
//! and mean–variance diagnostics, and report rendering (JSON/CSV/SVG), and
//! [`data`] handles CSV ingestion with a configurable column schema.
//!
//! # Example
//!
//! ```
//! use semicont::tweedie::TweedieParams;
//!
//! // Mean 1, dispersion 1, power 1.5: a compound Poisson-Gamma variable
//! // with P(Z = 0) = exp(-2).
//! let params = TweedieParams::new(1.0, 1.0, 1.5).unwrap();
//! assert!((params.zero_probability() - (-2.0f64).exp()).abs() < 1e-12);
//! let median = params.quantile(0.5).unwrap();
//! assert!((params.cdf(median).unwrap() - 0.5).abs() < 1e-7);
//! ```

pub mod data;
pub mod eval;
pub mod glm;
pub mod num;
pub mod profile;
pub mod tobit;
pub mod tweedie;
pub mod twopart;
