//! WebAssembly bindings for the browser demo.
//!
//! Three operations back the page in `www/`: a density explorer, a
//! quantile/CDF explorer, and a seeded sampling histogram. Each export
//! takes plain numbers and returns a JSON string (parsed on the JS
//! side), keeping the ABI to scalars and strings.
//!
//! The `*_json` functions hold the logic and are ordinary Rust
//! (testable on any target); the `#[wasm_bindgen]` exports are thin
//! wrappers that only translate errors, because `JsValue` cannot be
//! constructed off-wasm.

use semicont::tweedie::TweedieParams;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn params(mu: f64, phi: f64, p: f64) -> Result<TweedieParams, String> {
    TweedieParams::new(mu, phi, p).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct DensityCurve {
    /// Evaluation points, left to right.
    zs: Vec<f64>,
    /// Continuous density at each point.
    densities: Vec<f64>,
    /// Point mass at exactly zero.
    zero_probability: f64,
    /// Analytic mean and variance.
    mean: f64,
    variance: f64,
    /// Compound representation (Poisson rate, Gamma shape, Gamma scale).
    lambda: f64,
    alpha: f64,
    beta: f64,
}

/// Continuous density over `(0, z_max]` on `n_points` evenly spaced
/// points, plus the zero mass and the analytic moments.
pub fn density_curve_json(
    mu: f64,
    phi: f64,
    p: f64,
    z_max: f64,
    n_points: usize,
) -> Result<String, String> {
    let params = params(mu, phi, p)?;
    if !(z_max.is_finite() && z_max > 0.0) || n_points < 2 || n_points > 4096 {
        return Err("need finite z_max > 0 and 2..=4096 points".into());
    }
    let c = params.to_compound();
    let mut zs = Vec::with_capacity(n_points);
    let mut densities = Vec::with_capacity(n_points);
    for i in 1..=n_points {
        let z = z_max * (i as f64) / (n_points as f64);
        zs.push(z);
        densities.push(params.density(z).map_err(|e| e.to_string())?);
    }
    to_json(&DensityCurve {
        zs,
        densities,
        zero_probability: params.zero_probability(),
        mean: mu,
        variance: phi * mu.powf(p),
        lambda: c.lambda,
        alpha: c.alpha,
        beta: c.beta,
    })
}

#[derive(Serialize)]
struct CdfCurve {
    zs: Vec<f64>,
    cdf: Vec<f64>,
    zero_probability: f64,
    /// The requested level and its quantile (0 when the level falls
    /// inside the zero mass).
    level: f64,
    quantile: f64,
}

/// CDF over `[0, z_max]` plus the level-`q` quantile.
pub fn cdf_curve_json(
    mu: f64,
    phi: f64,
    p: f64,
    z_max: f64,
    n_points: usize,
    level: f64,
) -> Result<String, String> {
    let params = params(mu, phi, p)?;
    if !(z_max.is_finite() && z_max > 0.0) || n_points < 2 || n_points > 1024 {
        return Err("need finite z_max > 0 and 2..=1024 points".into());
    }
    if !(level > 0.0 && level < 1.0) {
        return Err("level must lie strictly between 0 and 1".into());
    }
    let mut zs = Vec::with_capacity(n_points + 1);
    let mut cdf = Vec::with_capacity(n_points + 1);
    for i in 0..=n_points {
        let z = z_max * (i as f64) / (n_points as f64);
        zs.push(z);
        cdf.push(params.cdf(z).map_err(|e| e.to_string())?);
    }
    let quantile = params.quantile(level).map_err(|e| e.to_string())?;
    to_json(&CdfCurve {
        zs,
        cdf,
        zero_probability: params.zero_probability(),
        level,
        quantile,
    })
}

#[derive(Serialize)]
struct Histogram {
    /// Bin edges (`bins + 1` entries) over the positive draws.
    edges: Vec<f64>,
    /// Counts per bin.
    counts: Vec<u32>,
    /// Share of draws exactly zero, and its analytic target.
    zero_fraction: f64,
    expected_zero: f64,
    /// Sample mean and variance of the draws.
    sample_mean: f64,
    sample_variance: f64,
    n: usize,
}

/// Draw `n` seeded values and bin the positive part.
pub fn sample_histogram_json(
    mu: f64,
    phi: f64,
    p: f64,
    n: usize,
    seed: u64,
    bins: usize,
) -> Result<String, String> {
    let params = params(mu, phi, p)?;
    if n == 0 || n > 1_000_000 {
        return Err("need 1..=1000000 draws".into());
    }
    if bins == 0 || bins > 512 {
        return Err("need 1..=512 bins".into());
    }
    let draws = params.sample(n, seed);
    let zeros = draws.iter().filter(|&&v| v == 0.0).count();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    let max = draws.iter().copied().fold(0.0f64, f64::max);
    let hi = if max > 0.0 { max } else { 1.0 };
    let mut counts = vec![0u32; bins];
    for &v in &draws {
        if v > 0.0 {
            let idx = (((v / hi) * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
    }
    let edges: Vec<f64> = (0..=bins).map(|i| hi * (i as f64) / (bins as f64)).collect();
    to_json(&Histogram {
        edges,
        counts,
        zero_fraction: zeros as f64 / n as f64,
        expected_zero: params.zero_probability(),
        sample_mean: mean,
        sample_variance: variance,
        n,
    })
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

/// See [`density_curve_json`].
#[wasm_bindgen]
pub fn density_curve(
    mu: f64,
    phi: f64,
    p: f64,
    z_max: f64,
    n_points: usize,
) -> Result<String, JsValue> {
    density_curve_json(mu, phi, p, z_max, n_points).map_err(js_err)
}

/// See [`cdf_curve_json`].
#[wasm_bindgen]
pub fn cdf_curve(
    mu: f64,
    phi: f64,
    p: f64,
    z_max: f64,
    n_points: usize,
    level: f64,
) -> Result<String, JsValue> {
    cdf_curve_json(mu, phi, p, z_max, n_points, level).map_err(js_err)
}

/// See [`sample_histogram_json`].
#[wasm_bindgen]
pub fn sample_histogram(
    mu: f64,
    phi: f64,
    p: f64,
    n: usize,
    seed: u64,
    bins: usize,
) -> Result<String, JsValue> {
    sample_histogram_json(mu, phi, p, n, seed, bins).map_err(js_err)
}
