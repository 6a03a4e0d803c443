//! Shared numerical utilities: log-domain accumulation, stable normal
//! tail functions, adaptive quadrature, scalar root finding and
//! maximization, and a dense-matrix BFGS minimizer.

mod bfgs;
mod quad;
mod roots;

pub use bfgs::{bfgs_min, BfgsResult};
pub use quad::adaptive_simpson;
pub use roots::{brent_root, golden_max};

/// Natural log of the sum of exponentials of `xs`, computed without
/// overflow by factoring out the maximum element.
///
/// Returns negative infinity for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        // All -inf (or empty): the sum is zero. +inf propagates as +inf.
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    norm_ln_pdf(x).exp()
}

/// Log of the standard normal density.
pub fn norm_ln_pdf(x: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_74;
    -0.5 * x * x - HALF_LN_TWO_PI
}

/// Standard normal CDF, accurate in both tails via `erfc`.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Log of the standard normal CDF.
///
/// Uses `erfc` directly down to `x = -35` (where `erfc` is still normal)
/// and the asymptotic expansion of the Mills ratio below that, so the
/// result stays finite and accurate for arguments far into the left tail.
pub fn norm_ln_cdf(x: f64) -> f64 {
    if x >= -35.0 {
        (0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        // ln Phi(x) ~ ln phi(x) - ln(-x) + ln(1 - 1/x^2 + 3/x^4 - 15/x^6)
        let r = 1.0 / (x * x);
        norm_ln_pdf(x) - (-x).ln() + (-r * (1.0 - 3.0 * r * (1.0 - 5.0 * r))).ln_1p()
    }
}

/// Inverse Mills ratio `phi(x) / Phi(x)`, stable for large negative `x`
/// (where the naive ratio is 0/0 in floating point).
pub fn inv_mills(x: f64) -> f64 {
    (norm_ln_pdf(x) - norm_ln_cdf(x)).exp()
}
