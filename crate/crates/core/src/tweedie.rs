//! The Tweedie compound Poisson–Gamma distribution for power `1 < p < 2`.
//!
//! A Tweedie variable `Z` with mean `mu`, dispersion `phi`, and power `p`
//! in `(1, 2)` is distributed as a Poisson-count sum of Gamma variables:
//! `M ~ Poisson(lambda)` and `Z = X_1 + ... + X_M` with each
//! `X_i ~ Gamma(alpha, beta)` (shape–scale). The two parametrizations are
//! linked by
//!
//! ```text
//! lambda = mu^(2-p) / (phi * (2-p))
//! alpha  = (2-p) / (p-1)
//! beta   = phi * (p-1) * mu^(p-1)
//! ```
//!
//! which gives `E[Z] = lambda*alpha*beta = mu` and
//! `Var[Z] = lambda*alpha*beta^2*(1+alpha) = phi * mu^p`. The distribution
//! has an atom `P(Z=0) = exp(-lambda)` and a continuous density on the
//! positives whose normalizer is an infinite series; this module evaluates
//! that series in log space ([`TweedieParams::log_density`]), integrates it
//! ([`TweedieParams::cdf`]), inverts it ([`TweedieParams::quantile`]), and
//! samples from the compound representation ([`TweedieParams::sample`]).

use crate::num::{adaptive_simpson, brent_root};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Errors from constructing or evaluating a Tweedie distribution.
#[derive(Debug, Error)]
pub enum TweedieError {
    /// The mean parameter was not a positive finite real.
    #[error("mean mu must be positive and finite, got {0}")]
    InvalidMean(f64),
    /// The dispersion parameter was not a positive finite real.
    #[error("dispersion phi must be positive and finite, got {0}")]
    InvalidDispersion(f64),
    /// The power parameter was outside the open interval (1, 2).
    #[error("power p must lie strictly inside (1, 2), got {0}")]
    InvalidPower(f64),
    /// A density/CDF argument was negative or non-finite.
    #[error("observation value must be non-negative and finite, got {0}")]
    InvalidObservation(f64),
    /// A quantile level was outside the open interval (0, 1).
    #[error("probability level must lie strictly inside (0, 1), got {0}")]
    InvalidLevel(f64),
    /// An iterative evaluation failed to reach its target accuracy.
    #[error("numerical evaluation failed: {0}")]
    Numerical(String),
}

/// Tweedie parameters `(mu, phi, p)` with `p` restricted to `(1, 2)`.
///
/// Immutable after construction; all evaluation methods are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TweedieParams {
    mu: f64,
    phi: f64,
    p: f64,
}

/// The equivalent compound Poisson–Gamma parameters `(lambda, alpha, beta)`.
///
/// `lambda` is the Poisson rate of events, `alpha` the Gamma shape per
/// event, and `beta` the Gamma scale per event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundRepresentation {
    /// Poisson rate of events.
    pub lambda: f64,
    /// Gamma shape per event.
    pub alpha: f64,
    /// Gamma scale per event (same units as the outcome).
    pub beta: f64,
}

impl TweedieParams {
    /// Validate and construct a parameter set.
    pub fn new(mu: f64, phi: f64, p: f64) -> Result<Self, TweedieError> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(TweedieError::InvalidMean(mu));
        }
        if !(phi.is_finite() && phi > 0.0) {
            return Err(TweedieError::InvalidDispersion(phi));
        }
        if !(p > 1.0 && p < 2.0) {
            return Err(TweedieError::InvalidPower(p));
        }
        Ok(TweedieParams { mu, phi, p })
    }

    /// Mean `mu`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Dispersion `phi`.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Power parameter `p`.
    pub fn power(&self) -> f64 {
        self.p
    }

    /// Map `(mu, phi, p)` to the compound representation `(lambda, alpha, beta)`.
    pub fn to_compound(&self) -> CompoundRepresentation {
        let (mu, phi, p) = (self.mu, self.phi, self.p);
        CompoundRepresentation {
            lambda: mu.powf(2.0 - p) / (phi * (2.0 - p)),
            alpha: (2.0 - p) / (p - 1.0),
            beta: phi * (p - 1.0) * mu.powf(p - 1.0),
        }
    }

    /// The point mass at zero, `P(Z = 0) = exp(-lambda)`.
    ///
    /// Underflows gracefully to `0.0` for very large `lambda`.
    pub fn zero_probability(&self) -> f64 {
        (-self.to_compound().lambda).exp()
    }

    /// Log of the density at `z ≥ 0`.
    ///
    /// For `z = 0` this is the log of the point mass, `-lambda`. For
    /// `z > 0` the continuous density
    ///
    /// ```text
    /// f(z) = exp(-lambda)/z * sum_{m>=1} lambda^m/m! * z^(m*alpha) e^(-z/beta) / (beta^(m*alpha) Gamma(m*alpha))
    /// ```
    ///
    /// is evaluated with the series summed in log space around its largest
    /// term (see [`SeriesWorkspace`]). The result is finite for every
    /// representable `z` in the support; `-inf` is returned only when the
    /// density truly underflows the representable range.
    pub fn log_density(&self, z: f64) -> Result<f64, TweedieError> {
        if !z.is_finite() || z < 0.0 {
            return Err(TweedieError::InvalidObservation(z));
        }
        let c = self.to_compound();
        if z == 0.0 {
            return Ok(-c.lambda);
        }
        let mut ws = SeriesWorkspace::new(c.alpha);
        let (logf, _) = log_density_positive(&mut ws, z, c.lambda, c.beta);
        if logf.is_nan() {
            return Err(TweedieError::Numerical(format!(
                "series for log-density did not converge at z = {z}"
            )));
        }
        Ok(logf)
    }

    /// Density at `z ≥ 0` (the atom is reported at `z = 0`).
    pub fn density(&self, z: f64) -> Result<f64, TweedieError> {
        Ok(self.log_density(z)?.exp())
    }

    /// `P(Z ≤ z)`: the zero mass plus adaptive quadrature of the density.
    ///
    /// The value is deliberately not clamped to 1: far in the right tail
    /// it may exceed 1 by the quadrature tolerance (order 1e-10), and
    /// that honest overshoot is what normalization checks measure.
    pub fn cdf(&self, z: f64) -> Result<f64, TweedieError> {
        if !z.is_finite() || z < 0.0 {
            return Err(TweedieError::InvalidObservation(z));
        }
        let c = self.to_compound();
        let p0 = (-c.lambda).exp();
        if z == 0.0 {
            return Ok(p0);
        }
        let mass = self.positive_mass_below(&c, z)?;
        Ok(p0 + mass)
    }

    /// The level-`q` quantile.
    ///
    /// Returns `0` for `q ≤ P(Z = 0)`; otherwise inverts the CDF by
    /// bracketed root-finding to relative accuracy `1e-8`.
    pub fn quantile(&self, q: f64) -> Result<f64, TweedieError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(TweedieError::InvalidLevel(q));
        }
        let c = self.to_compound();
        let p0 = (-c.lambda).exp();
        if q <= p0 {
            return Ok(0.0);
        }
        // Bracket in z by doubling from the mean.
        let mut hi = self.mu;
        let mut cdf_hi = self.cdf(hi)?;
        let mut doublings = 0;
        while cdf_hi < q {
            hi *= 2.0;
            cdf_hi = self.cdf(hi)?;
            doublings += 1;
            if doublings > 200 {
                return Err(TweedieError::Numerical(format!(
                    "failed to bracket quantile at level {q}"
                )));
            }
        }
        // Root-find on the transformed axis t = z^s (s = min(alpha, 1)),
        // where the CDF rises linearly from the atom instead of like
        // z^alpha; this keeps the bracket shrinking quickly even when the
        // quantile is many orders of magnitude below the mean.
        let s = c.alpha.min(1.0);
        let t_hi = hi.powf(s);
        let mut obj = |t: f64| {
            let z = if t <= 0.0 { 0.0 } else { t.powf(1.0 / s) };
            self.cdf(z).map_or(f64::NAN, |v| v - q)
        };
        // The residual tolerance must scale with the level: an absolute
        // cutoff would accept t = 0 outright whenever q itself is below it
        // (deep-left-tail levels), returning 0 instead of inverting.
        let root = brent_root(&mut obj, 0.0, t_hi, p0 - q, cdf_hi - q, 0.0, 1e-8 * s, 1e-12 * q)
            .ok_or_else(|| {
                TweedieError::Numerical(format!("quantile bracket lost at level {q}"))
            })?;
        Ok(root.powf(1.0 / s))
    }

    /// Draw `n` values with a fresh ChaCha8 stream seeded by `seed`.
    ///
    /// Each draw takes `M ~ Poisson(lambda)` and returns the sum of `M`
    /// independent `Gamma(alpha, beta)` variables (zero when `M = 0`).
    /// Deterministic given the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = self.sampler();
        (0..n).map(|_| sampler.draw(&mut rng)).collect()
    }

    /// Reusable sampler for drawing from this distribution with any RNG.
    pub fn sampler(&self) -> TweedieSampler {
        let c = self.to_compound();
        TweedieSampler {
            poisson: Poisson::new(c.lambda).expect("lambda validated positive"),
            gamma: Gamma::new(c.alpha, c.beta).expect("shape and scale validated positive"),
        }
    }

    /// Integral of the continuous density over `(0, z]`.
    ///
    /// Substitutes `u = t^s` with `s = min(alpha, 1)` so that the
    /// integrand is bounded at the origin (the raw density diverges like
    /// t^(alpha-1) when alpha < 1), then applies adaptive Simpson
    /// quadrature on panels anchored at the distribution's bulk so that
    /// no panel can straddle and miss the mass.
    fn positive_mass_below(
        &self,
        c: &CompoundRepresentation,
        z: f64,
    ) -> Result<f64, TweedieError> {
        let s = c.alpha.min(1.0);
        let mut ws = SeriesWorkspace::new(c.alpha);
        let lambda = c.lambda;
        let beta = c.beta;
        let alpha = c.alpha;
        // Value of the transformed integrand at u = 0 (analytic limit of
        // the m = 1 term; higher terms vanish faster).
        let g0 = if alpha < 1.0 {
            (-lambda + lambda.ln() - ln_gamma(alpha) - alpha * beta.ln()).exp() / alpha
        } else if alpha == 1.0 {
            (-lambda).exp() * lambda / beta
        } else {
            0.0
        };
        let mut g = |u: f64| -> f64 {
            if u <= 0.0 {
                return g0;
            }
            let t = u.powf(1.0 / s);
            let (logf, _) = log_density_positive(&mut ws, t, lambda, beta);
            // g(u) = f(t) * dt/du = f(u^(1/s)) * (1/s) * u^(1/s - 1)
            (logf + (1.0 / s - 1.0) * u.ln()).exp() / s
        };
        // Panel knots on the z axis covering the spike near zero and the
        // bulk around the mean, so coarse Simpson passes cannot step over
        // either feature.
        let sd = (self.phi * self.mu.powf(self.p)).sqrt();
        let mut knots: Vec<f64> = [
            self.mu * 1e-6,
            self.mu * 1e-3,
            self.mu * 0.1,
            self.mu * 0.5,
            self.mu,
            self.mu + 2.0 * sd,
            self.mu + 8.0 * sd,
            self.mu + 20.0 * sd,
        ]
        .iter()
        .copied()
        .filter(|&k| k < z)
        .collect();
        knots.push(z);
        let mut total = 0.0;
        let mut lo_u = 0.0;
        for k in knots {
            let hi_u = k.powf(s);
            if hi_u > lo_u {
                total += adaptive_simpson(&mut g, lo_u, hi_u, 2e-12);
                lo_u = hi_u;
            }
        }
        if !total.is_finite() {
            return Err(TweedieError::Numerical(format!(
                "density quadrature failed on (0, {z}]"
            )));
        }
        Ok(total.max(0.0))
    }
}

impl CompoundRepresentation {
    /// Validate and construct a compound parameter set directly.
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Result<Self, TweedieError> {
        for (v, name) in [(lambda, "lambda"), (alpha, "alpha"), (beta, "beta")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TweedieError::Numerical(format!(
                    "compound parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(CompoundRepresentation { lambda, alpha, beta })
    }

    /// Invert the mapping back to `(mu, phi, p)`.
    pub fn to_tweedie(&self) -> Result<TweedieParams, TweedieError> {
        let p = (2.0 + self.alpha) / (1.0 + self.alpha);
        let mu = self.lambda * self.alpha * self.beta;
        let phi = self.beta / ((p - 1.0) * mu.powf(p - 1.0));
        TweedieParams::new(mu, phi, p)
    }
}

/// Reusable compound Poisson–Gamma sampler (see [`TweedieParams::sampler`]).
#[derive(Debug, Clone)]
pub struct TweedieSampler {
    poisson: Poisson<f64>,
    gamma: Gamma<f64>,
}

impl TweedieSampler {
    /// Draw one value: a Poisson count of Gamma summands.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = self.poisson.sample(rng) as u64;
        // The empty float sum is -0.0; return the atom as a plain zero.
        if m == 0 {
            return 0.0;
        }
        (0..m).map(|_| self.gamma.sample(rng)).sum()
    }
}

/// Largest series index cached in the log-Gamma lookup tables.
const TABLE_CAP: usize = 100_000;

/// Series indices above this would stall an `f64` counter (`m + 1 == m`);
/// parameters that extreme are rejected as a numerical failure.
const MAX_INDEX: f64 = 1e15;

/// Scratch state for evaluating the density series at a fixed shape `alpha`.
///
/// Caches `ln Gamma(m + 1)` and `ln Gamma(m * alpha)` so that batch
/// evaluations (log-likelihoods over thousands of observations, CDF
/// quadrature) pay one `ln_gamma` call per distinct index instead of two
/// per series term.
pub(crate) struct SeriesWorkspace {
    alpha: f64,
    ln_fact: Vec<f64>,
    ln_gam_ma: Vec<f64>,
}

impl SeriesWorkspace {
    pub(crate) fn new(alpha: f64) -> Self {
        SeriesWorkspace { alpha, ln_fact: vec![0.0], ln_gam_ma: vec![f64::INFINITY] }
    }

    /// `w_m = m*a - ln Gamma(m+1) - ln Gamma(m*alpha)` for integer `m ≥ 1`.
    #[inline]
    fn w(&mut self, m: f64, a: f64) -> f64 {
        let idx = m as usize;
        if idx < TABLE_CAP {
            while self.ln_fact.len() <= idx {
                let k = self.ln_fact.len() as f64;
                self.ln_fact.push(ln_gamma(k + 1.0));
                self.ln_gam_ma.push(ln_gamma(k * self.alpha));
            }
            m * a - self.ln_fact[idx] - self.ln_gam_ma[idx]
        } else {
            m * a - ln_gamma(m + 1.0) - ln_gamma(m * self.alpha)
        }
    }
}

/// Log-density at `z > 0` plus the posterior mean `E[M | Z = z]` of the
/// latent Poisson count (needed for the dispersion score).
///
/// Writes the density as `exp(-lambda - z/beta - ln z) * sum_m exp(w_m)`
/// with `w_m = m*A - ln Gamma(m+1) - ln Gamma(m*alpha)` and
/// `A = ln lambda + alpha*ln(z/beta)`. The sequence `w_m` is strictly
/// concave in `m`, so the sum is taken outward from the analytic peak
/// index `m* = exp((A - alpha*ln alpha)/(1+alpha))` until terms fall 37
/// log units (a factor ~1e-16) below the running maximum.
///
/// Returns `(NaN, NaN)` if the peak index exceeds [`MAX_INDEX`].
pub(crate) fn log_density_positive(
    ws: &mut SeriesWorkspace,
    z: f64,
    lambda: f64,
    beta: f64,
) -> (f64, f64) {
    let alpha = ws.alpha;
    let base = -lambda - z / beta - z.ln();
    if base == f64::NEG_INFINITY {
        // z/beta overflowed: the density is an exact zero in f64.
        return (f64::NEG_INFINITY, f64::NAN);
    }
    let a = lambda.ln() + alpha * (z.ln() - beta.ln());
    let m_star = ((a - alpha * alpha.ln()) / (1.0 + alpha)).exp();
    if !(m_star < MAX_INDEX) {
        return (f64::NAN, f64::NAN);
    }
    let m0 = m_star.round().max(1.0);
    let w0 = ws.w(m0, a);
    let mut w_max = w0;
    // Accumulate sum and first moment relative to exp(w0); w0 sits within
    // O(1/m*) of the true maximum, so the scaled terms cannot overflow.
    let mut sum = 1.0;
    let mut m_sum = m0;
    let mut m = m0 - 1.0;
    while m >= 1.0 {
        let wm = ws.w(m, a);
        w_max = w_max.max(wm);
        let t = (wm - w0).exp();
        sum += t;
        m_sum += m * t;
        if wm < w_max - 37.0 {
            break;
        }
        m -= 1.0;
    }
    m = m0 + 1.0;
    loop {
        let wm = ws.w(m, a);
        w_max = w_max.max(wm);
        let t = (wm - w0).exp();
        sum += t;
        m_sum += m * t;
        if wm < w_max - 37.0 {
            break;
        }
        m += 1.0;
    }
    (base + w0 + sum.ln(), m_sum / sum)
}

/// Sum of Tweedie log-densities and the dispersion score `dl/dphi`,
/// evaluated over paired observations and means at fixed `(phi, p)`.
///
/// For a zero observation the log-density is `-lambda_i` and its score
/// contribution `lambda_i / phi`; for a positive observation the score is
/// `(lambda_i + z_i/beta_i - (1+alpha) * E[M|z_i]) / phi`, using the
/// latent-count posterior mean from the same series pass that evaluates
/// the density. Returns `(log-likelihood, score)`; NaN log-likelihood
/// signals a series failure.
pub(crate) fn loglik_and_phi_score(
    ws: &mut SeriesWorkspace,
    y: &[f64],
    mu: &[f64],
    phi: f64,
    p: f64,
) -> (f64, f64) {
    debug_assert_eq!(y.len(), mu.len());
    let alpha = (2.0 - p) / (p - 1.0);
    debug_assert!((ws.alpha - alpha).abs() <= 1e-15 * alpha.abs());
    let mut loglik = 0.0;
    let mut score = 0.0;
    for (&z, &m) in y.iter().zip(mu) {
        let lambda = m.powf(2.0 - p) / (phi * (2.0 - p));
        if z == 0.0 {
            loglik += -lambda;
            score += lambda;
        } else {
            let beta = phi * (p - 1.0) * m.powf(p - 1.0);
            let (lf, e_m) = log_density_positive(ws, z, lambda, beta);
            loglik += lf;
            score += lambda + z / beta - (1.0 + alpha) * e_m;
        }
    }
    (loglik, score / phi)
}

/// Maximum-likelihood dispersion at fixed means and power.
///
/// Solves `dl/dphi = 0` in `ln phi` by expanding a bracket around the
/// starting value `phi0` (typically the Pearson estimate) until the score
/// changes sign, then applying Brent's method. The score is positive for
/// small `phi` and negative for large `phi`, so the bracketed root is the
/// interior maximum.
pub(crate) fn dispersion_mle(
    y: &[f64],
    mu: &[f64],
    p: f64,
    phi0: f64,
) -> Result<f64, TweedieError> {
    let alpha = (2.0 - p) / (p - 1.0);
    let mut ws = SeriesWorkspace::new(alpha);
    // d loglik / d ln(phi) = phi * score; same sign as the score.
    let mut g = |ln_phi: f64| -> f64 {
        let phi = ln_phi.exp();
        let (ll, score) = loglik_and_phi_score(&mut ws, y, mu, phi, p);
        if ll.is_nan() {
            f64::NAN
        } else {
            phi * score
        }
    };
    let start = if phi0.is_finite() && phi0 > 0.0 { phi0.ln() } else { 0.0 };
    let mut lo = start;
    let mut g_lo = g(lo);
    let mut steps = 0;
    while g_lo <= 0.0 {
        lo -= 1.0;
        g_lo = g(lo);
        steps += 1;
        if !g_lo.is_finite() || steps > 700 {
            return Err(TweedieError::Numerical(
                "dispersion likelihood has no interior maximum below the start".into(),
            ));
        }
    }
    let mut hi = lo.max(start) + 1.0;
    let mut g_hi = g(hi);
    steps = 0;
    while g_hi >= 0.0 {
        hi += 1.0;
        g_hi = g(hi);
        steps += 1;
        if !g_hi.is_finite() || steps > 700 {
            return Err(TweedieError::Numerical(
                "dispersion likelihood has no interior maximum above the start".into(),
            ));
        }
    }
    let root = brent_root(&mut g, lo, hi, g_lo, g_hi, 1e-12, 1e-12, 0.0)
        .ok_or_else(|| TweedieError::Numerical("dispersion score lost its bracket".into()))?;
    Ok(root.exp())
}

/// Tweedie log-likelihood of `y` given per-observation means at `(phi, p)`.
///
/// Returns NaN if the series evaluation fails for any observation.
pub fn loglik(y: &[f64], mu: &[f64], phi: f64, p: f64) -> f64 {
    let alpha = (2.0 - p) / (p - 1.0);
    let mut ws = SeriesWorkspace::new(alpha);
    loglik_and_phi_score(&mut ws, y, mu, phi, p).0
}
