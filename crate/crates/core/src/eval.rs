//! Model comparison harness: seeded train/test splits, prediction error,
//! Q–Q tables, mean–variance diagnostics, and report rendering.
//!
//! The harness fits all three model families on a training split, scores
//! them on the held-out rows, and assembles a [`ComparisonReport`] that
//! serializes byte-deterministically: every random choice flows from the
//! single seed in [`SplitSpec`], so a report is reproducible bit-for-bit
//! from `(dataset, seed)`.

use crate::data::Dataset;
use crate::glm::FittedGlm;
use crate::profile::{profile_fit, ProfileError};
use crate::tobit::{tobit_fit, tobit_predict, TobitError, TobitFit};
use crate::tweedie::{TweedieError, TweedieParams, TweedieSampler};
use crate::twopart::{fit_twopart, predict_twopart, TwoPartError, TwoPartFit};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Errors from evaluation and reporting.
#[derive(Debug, Error)]
pub enum EvalError {
    /// Split sizes do not partition the data.
    #[error("split sizes {train_n} + {test_n} must equal the {n} rows and both be ≥ 1")]
    SplitSize { train_n: usize, test_n: usize, n: usize },
    /// Paired vectors of different lengths.
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    /// An operation that needs observations received none.
    #[error("need at least one observation")]
    Empty,
    /// Too few rows to form the requested bins.
    #[error("need at least {need} rows, got {n}")]
    TooFewRows { need: usize, n: usize },
    /// Tweedie power estimation failed.
    #[error("power profile: {0}")]
    Profile(#[from] ProfileError),
    /// Two-part fit failed.
    #[error("two-part fit: {0}")]
    TwoPart(#[from] TwoPartError),
    /// Tobit fit failed.
    #[error("tobit fit: {0}")]
    Tobit(#[from] TobitError),
    /// Conditional-distribution parameters were invalid.
    #[error("conditional distribution: {0}")]
    Distribution(#[from] TweedieError),
    /// Output files could not be written.
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// A seeded train/test partition request.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SplitSpec {
    /// Rows assigned to the training set.
    pub train_n: usize,
    /// Rows assigned to the held-out test set.
    pub test_n: usize,
    /// Seed for the permutation (and for every downstream draw).
    pub seed: u64,
}

/// Split `data` into disjoint, exhaustive train/test sets by a seeded
/// uniform permutation. The same seed always yields the same split.
pub fn split(data: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset), EvalError> {
    let n = data.n();
    if spec.train_n == 0 || spec.test_n == 0 || spec.train_n + spec.test_n != n {
        return Err(EvalError::SplitSize { train_n: spec.train_n, test_n: spec.test_n, n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let train = data
        .subset(&idx[..spec.train_n])
        .expect("permuted indices are in range");
    let test = data
        .subset(&idx[spec.train_n..])
        .expect("permuted indices are in range");
    Ok((train, test))
}

/// Root mean squared error `√(Σ(ŷᵢ − yᵢ)²/n)`.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64, EvalError> {
    if predictions.len() != truths.len() {
        return Err(EvalError::LengthMismatch { a: predictions.len(), b: truths.len() });
    }
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let ss: f64 =
        predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((ss / predictions.len() as f64).sqrt())
}

/// Empirical quantile with linear interpolation between order statistics
/// (the convention spreadsheets and most statistics packages default to).
/// `sorted` must be ascending and nonempty; `q` in [0, 1].
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Default Q–Q probability grid: 0.01 to 0.98 in steps of 0.01. The last
/// percentile is excluded — with a handful of extreme observations it is
/// pure noise and would dominate the plot's scale.
pub fn default_qq_levels() -> Vec<f64> {
    (1..=98).map(|i| i as f64 / 100.0).collect()
}

/// Replicate draws averaged into each model quantile curve.
pub const QQ_REPLICATES: usize = 100;

/// One Q–Q table row.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QqRow {
    /// Probability level in (0, 1).
    pub level: f64,
    /// Empirical quantile of the observed response.
    pub empirical: f64,
    /// Model quantile: the level-`q` empirical quantile of simulated
    /// responses, averaged over [`QQ_REPLICATES`] seeded replicates.
    pub model: f64,
}

/// A fitted model handle that can predict a mean and simulate a response
/// for one design row.
pub enum ConditionalModel<'a> {
    /// Tweedie GLM with fixed power and dispersion.
    Tweedie {
        /// The mean-model fit.
        fit: &'a FittedGlm,
        /// Power parameter.
        p: f64,
        /// Dispersion.
        phi: f64,
    },
    /// Logistic × Gamma two-part model.
    TwoPart(&'a TwoPartFit),
    /// Censored-normal model.
    Tobit(&'a TobitFit),
}

impl ConditionalModel<'_> {
    /// Short lowercase model name used in file names and reports.
    pub fn name(&self) -> &'static str {
        match self {
            ConditionalModel::Tweedie { .. } => "tweedie",
            ConditionalModel::TwoPart(_) => "twopart",
            ConditionalModel::Tobit(_) => "tobit",
        }
    }

    /// Unconditional mean prediction for one design row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        match self {
            ConditionalModel::Tweedie { fit, .. } => fit.predict_mean(row),
            ConditionalModel::TwoPart(fit) => predict_twopart(fit, row),
            ConditionalModel::Tobit(fit) => tobit_predict(fit, row),
        }
    }

    /// Per-observation sampler for the fitted conditional distribution.
    fn observation_sampler(&self, row: &[f64]) -> Result<ObsSampler, EvalError> {
        Ok(match self {
            ConditionalModel::Tweedie { fit, p, phi } => {
                let mu = fit.predict_mean(row);
                ObsSampler::Tweedie(TweedieParams::new(mu, *phi, *p)?.sampler())
            }
            ConditionalModel::TwoPart(fit) => {
                let p = fit.binary_part.predict_mean(row);
                let mu = fit.positive_part.predict_mean(row);
                let nu = 1.0
                    / fit
                        .positive_part
                        .dispersion_mle
                        .expect("gamma fits carry an ML dispersion");
                let gamma = Gamma::new(nu, mu / nu).map_err(|e| {
                    EvalError::Distribution(TweedieError::Numerical(e.to_string()))
                })?;
                ObsSampler::TwoPart { p, gamma }
            }
            ConditionalModel::Tobit(fit) => {
                let xb: f64 =
                    row.iter().zip(&fit.coefficients).map(|(x, b)| x * b).sum();
                ObsSampler::Tobit { xb, sigma: fit.sigma }
            }
        })
    }
}

/// Prepared sampler for one observation's conditional distribution.
enum ObsSampler {
    Tweedie(TweedieSampler),
    TwoPart { p: f64, gamma: Gamma<f64> },
    Tobit { xb: f64, sigma: f64 },
}

impl ObsSampler {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ObsSampler::Tweedie(s) => s.draw(rng),
            ObsSampler::TwoPart { p, gamma } => {
                if rng.random::<f64>() < *p {
                    gamma.sample(rng)
                } else {
                    0.0
                }
            }
            ObsSampler::Tobit { xb, sigma } => {
                let eps: f64 = StandardNormal.sample(rng);
                (xb + sigma * eps).max(0.0)
            }
        }
    }
}

/// Q–Q table comparing observed quantiles against a model's quantiles.
///
/// The model side handles per-observation covariates by simulation: each
/// replicate draws one response per observation from its fitted
/// conditional distribution, takes the empirical quantile curve of those
/// draws, and the curves are averaged over [`QQ_REPLICATES`] replicates.
/// Averaging sorted curves keeps the result nondecreasing in the level.
pub fn qq_table(
    data: &Dataset,
    model: &ConditionalModel,
    levels: &[f64],
    seed: u64,
) -> Result<Vec<QqRow>, EvalError> {
    if data.n() == 0 {
        return Err(EvalError::Empty);
    }
    let mut observed: Vec<f64> = data.response().to_vec();
    observed.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let samplers: Result<Vec<ObsSampler>, EvalError> =
        (0..data.n()).map(|i| model.observation_sampler(&data.row(i))).collect();
    let samplers = samplers?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model_q = vec![0.0; levels.len()];
    let mut draws = vec![0.0; samplers.len()];
    for _ in 0..QQ_REPLICATES {
        for (d, s) in draws.iter_mut().zip(&samplers) {
            *d = s.draw(&mut rng);
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (acc, &q) in model_q.iter_mut().zip(levels) {
            *acc += quantile_type7(&draws, q);
        }
    }

    Ok(levels
        .iter()
        .zip(&model_q)
        .map(|(&level, &sum)| QqRow {
            level,
            empirical: quantile_type7(&observed, level),
            model: sum / QQ_REPLICATES as f64,
        })
        .collect())
}

/// Reference powers drawn on the mean–variance plot.
pub const MEAN_VARIANCE_POWERS: [f64; 4] = [1.0, 1.5, 1.719, 2.0];

/// One 5% quantile bin of observations ordered by fitted mean.
#[derive(Debug, Clone, Serialize)]
pub struct MeanVarianceBin {
    /// Mean of the fitted means in the bin.
    pub mean: f64,
    /// Sample variance of the observed responses in the bin.
    pub variance: f64,
    /// `φ·mean^p` at each of [`MEAN_VARIANCE_POWERS`], for reference.
    pub reference: [f64; 4],
}

/// Mean–variance diagnostic: order observations by fitted mean, cut into
/// 20 bins of 5%, and record each bin's mean fitted value and response
/// variance, together with `φμ^p` reference curves.
pub fn mean_variance_bins(
    data: &Dataset,
    fit: &FittedGlm,
) -> Result<Vec<MeanVarianceBin>, EvalError> {
    let n = data.n();
    if n < 20 {
        return Err(EvalError::TooFewRows { need: 20, n });
    }
    let mu = fit.fitted_means(data);
    let phi = fit.dispersion_mle.unwrap_or(fit.dispersion);
    let mut order: Vec<usize> = (0..n).collect();
    // Stable tie-break on the index keeps the binning deterministic.
    order.sort_by(|&a, &b| mu[a].partial_cmp(&mu[b]).unwrap().then(a.cmp(&b)));

    let y = data.response();
    let mut bins = Vec::with_capacity(20);
    for b in 0..20 {
        let lo = b * n / 20;
        let hi = (b + 1) * n / 20;
        let rows = &order[lo..hi];
        let m = rows.len() as f64;
        let mean_mu = rows.iter().map(|&i| mu[i]).sum::<f64>() / m;
        let mean_y = rows.iter().map(|&i| y[i]).sum::<f64>() / m;
        let var_y = rows.iter().map(|&i| (y[i] - mean_y).powi(2)).sum::<f64>()
            / (m - 1.0).max(1.0);
        let reference =
            MEAN_VARIANCE_POWERS.map(|p| phi * mean_mu.powf(p));
        bins.push(MeanVarianceBin { mean: mean_mu, variance: var_y, reference });
    }
    Ok(bins)
}

/// One model's evaluation entry in a [`ComparisonReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ModelEval {
    /// Model name (`tweedie`, `twopart`, `tobit`).
    pub name: String,
    /// Training-set log-likelihood at the fitted parameters.
    pub log_likelihood: f64,
    /// Dispersion: `φ̂` for Tweedie, the gamma part's `1/ν̂` for the
    /// two-part model, and 1 for Tobit (its scale is reported as sigma).
    pub dispersion: f64,
    /// Test-set root mean squared prediction error.
    pub rmse: f64,
    /// Mean predictions on the test rows, in row order.
    pub predictions: Vec<f64>,
    /// Q–Q table on the test set.
    pub qq: Vec<QqRow>,
}

/// Full output of a three-model comparison run.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// The split that produced the numbers.
    pub spec: SplitSpec,
    /// Profile-estimated Tweedie power.
    pub p_hat: f64,
    /// Tweedie ML dispersion at `p_hat`.
    pub phi_hat: f64,
    /// Per-model evaluations, in the fixed order tweedie, twopart, tobit.
    pub models: Vec<ModelEval>,
    /// Mean–variance bins of the full dataset under the Tweedie fit.
    pub mean_variance: Vec<MeanVarianceBin>,
    /// Observed test responses, in row order.
    pub test_response: Vec<f64>,
    /// Warnings and methodological flags accumulated during the run.
    pub notes: Vec<String>,
}

/// Fit all three models on a seeded training split and evaluate them on
/// the held-out rows.
pub fn compare_models(data: &Dataset, spec: SplitSpec) -> Result<ComparisonReport, EvalError> {
    let (train, test) = split(data, spec)?;

    let profile = profile_fit(&train)?;
    let twopart = fit_twopart(&train)?;
    let tobit = tobit_fit(&train)?;

    let mut notes: Vec<String> = Vec::new();
    notes.extend(profile.warnings.iter().map(|w| format!("tweedie: {w}")));
    notes.push(
        "two-part combined log-likelihood equals the exact sum of its parts; \
         rounded totals reported elsewhere may differ"
            .to_string(),
    );

    let handles = [
        ConditionalModel::Tweedie {
            fit: &profile.fit_at_p_hat,
            p: profile.p_hat,
            phi: profile.phi_hat,
        },
        ConditionalModel::TwoPart(&twopart),
        ConditionalModel::Tobit(&tobit),
    ];
    let logliks = [profile.loglik, twopart.combined_loglik, tobit.log_likelihood];
    let dispersions = [
        profile.phi_hat,
        twopart
            .positive_part
            .dispersion_mle
            .expect("gamma fits carry an ML dispersion"),
        1.0,
    ];

    let levels = default_qq_levels();
    let truths = test.response();
    let mut models = Vec::with_capacity(3);
    for (m, (handle, (ll, disp))) in
        handles.iter().zip(logliks.iter().zip(&dispersions)).enumerate()
    {
        let predictions: Vec<f64> =
            (0..test.n()).map(|i| handle.predict(&test.row(i))).collect();
        let err = rmse(&predictions, truths)?;
        // Distinct, reproducible draw stream per model.
        let qq = qq_table(&test, handle, &levels, spec.seed ^ (m as u64 + 1))?;
        models.push(ModelEval {
            name: handle.name().to_string(),
            log_likelihood: *ll,
            dispersion: *disp,
            rmse: err,
            predictions,
            qq,
        });
    }

    let mean_variance = mean_variance_bins(data, &profile.fit_at_p_hat)?;

    Ok(ComparisonReport {
        spec,
        p_hat: profile.p_hat,
        phi_hat: profile.phi_hat,
        models,
        mean_variance,
        test_response: truths.to_vec(),
        notes,
    })
}

// ---------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------

/// Series colors for the three models, in report order.
const MODEL_COLORS: [&str; 3] = ["#1f77b4", "#2ca02c", "#d62728"];

/// Write `report.json`, per-model `qq_*.csv` and `pred_*.csv`,
/// `meanvar.csv`, and the three SVG figures into `out_dir`.
///
/// Every file is byte-deterministic given the report. Returns the paths
/// written.
pub fn render_report(report: &ComparisonReport, out_dir: &Path) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    written.push(write_file(out_dir, "report.json", json.as_bytes())?);

    for model in &report.models {
        let mut csv = String::from("level,empirical,model\n");
        for row in &model.qq {
            csv.push_str(&format!("{},{},{}\n", row.level, row.empirical, row.model));
        }
        written.push(write_file(out_dir, &format!("qq_{}.csv", model.name), csv.as_bytes())?);

        let mut csv = String::from("truth,prediction\n");
        for (t, p) in report.test_response.iter().zip(&model.predictions) {
            csv.push_str(&format!("{t},{p}\n"));
        }
        written.push(write_file(out_dir, &format!("pred_{}.csv", model.name), csv.as_bytes())?);
    }

    let mut csv = String::from(
        "bin_mean,bin_variance,ref_p1_0,ref_p1_5,ref_p1_719,ref_p2_0\n",
    );
    for bin in &report.mean_variance {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            bin.mean,
            bin.variance,
            bin.reference[0],
            bin.reference[1],
            bin.reference[2],
            bin.reference[3]
        ));
    }
    written.push(write_file(out_dir, "meanvar.csv", csv.as_bytes())?);

    written.push(write_file(out_dir, "fig_qq.svg", fig_qq(report).as_bytes())?);
    written.push(write_file(out_dir, "fig_pred.svg", fig_pred(report).as_bytes())?);
    written.push(write_file(out_dir, "fig_meanvar.svg", fig_meanvar(report).as_bytes())?);
    Ok(written)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, EvalError> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    f.write_all(bytes)?;
    Ok(path)
}

/// Map data coordinates onto a fixed 640×480 canvas with margins.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 52.0;

impl Frame {
    /// Frame over the given ranges, widened when degenerate so that the
    /// axes stay drawable even with no points.
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (0.0, 1.0) };
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (PLOT_W - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        PLOT_H - MARGIN_B
            - (y - self.y0) / (self.y1 - self.y0) * (PLOT_H - MARGIN_T - MARGIN_B)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.3}")
    }
}

/// Shared SVG scaffolding: canvas, axes, ticks, labels, title.
fn svg_open(frame: &Frame, title: &str, xlabel: &str, ylabel: &str) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n\
         <rect width=\"{PLOT_W}\" height=\"{PLOT_H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"15\">{title}</text>\n",
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
    );
    // Axis lines.
    s.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = MARGIN_L,
        r = PLOT_W - MARGIN_R,
        t = MARGIN_T,
        b = PLOT_H - MARGIN_B,
    ));
    // Five ticks per axis.
    for i in 0..=4 {
        let fx = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 4.0;
        let fy = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 4.0;
        let px = frame.px(fx);
        let py = frame.py(fy);
        s.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{b:.1}\" x2=\"{px:.1}\" y2=\"{b2:.1}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            fmt_tick(fx),
            b = PLOT_H - MARGIN_B,
            b2 = PLOT_H - MARGIN_B + 5.0,
            ty = PLOT_H - MARGIN_B + 18.0,
        ));
        s.push_str(&format!(
            "<line x1=\"{l:.1}\" y1=\"{py:.1}\" x2=\"{l2:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{tx:.1}\" y=\"{tyy:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            fmt_tick(fy),
            l = MARGIN_L,
            l2 = MARGIN_L - 5.0,
            tx = MARGIN_L - 8.0,
            tyy = py + 4.0,
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{xlabel}</text>\n",
        (MARGIN_L + PLOT_W - MARGIN_R) / 2.0,
        PLOT_H - 12.0,
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 16 {mid:.1})\">{ylabel}</text>\n",
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        mid = (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
    ));
    s
}

fn svg_legend(s: &mut String, entries: &[(&str, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 16.0 * i as f64;
        s.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{ry:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{tx:.1}\" y=\"{ty:.1}\" font-family=\"sans-serif\" font-size=\"12\">{label}</text>\n",
            x = MARGIN_L + 12.0,
            ry = y - 9.0,
            tx = MARGIN_L + 26.0,
            ty = y,
        ));
    }
}

fn fig_qq(report: &ComparisonReport) -> String {
    let mut hi = f64::NEG_INFINITY;
    for m in &report.models {
        for r in &m.qq {
            hi = hi.max(r.empirical).max(r.model);
        }
    }
    let frame = if hi.is_finite() {
        Frame::new(0.0, hi * 1.05, 0.0, hi * 1.05)
    } else {
        Frame::new(0.0, 1.0, 0.0, 1.0)
    };
    let mut s = svg_open(&frame, "Observed vs model quantiles", "observed quantile", "model quantile");
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999999\" \
         stroke-dasharray=\"4 3\"/>\n",
        frame.px(frame.x0),
        frame.py(frame.x0),
        frame.px(frame.x1.min(frame.y1)),
        frame.py(frame.x1.min(frame.y1)),
    ));
    let mut legend = Vec::new();
    for (m, model) in report.models.iter().enumerate() {
        let color = MODEL_COLORS[m % MODEL_COLORS.len()];
        legend.push((model.name.as_str(), color));
        for r in &model.qq {
            if frame.contains(r.empirical, r.model) {
                s.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{color}\" \
                     fill-opacity=\"0.7\"/>\n",
                    frame.px(r.empirical),
                    frame.py(r.model),
                ));
            }
        }
    }
    svg_legend(&mut s, &legend);
    s.push_str("</svg>\n");
    s
}

fn fig_pred(report: &ComparisonReport) -> String {
    // Axis limit at the 99th percentile of the observed test response:
    // a few extreme rows would otherwise crush the bulk of the plot, so
    // points beyond the limit are dropped.
    let mut sorted = report.test_response.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lim = if sorted.is_empty() { 1.0 } else { quantile_type7(&sorted, 0.99).max(1e-12) };
    let frame = Frame::new(0.0, lim, 0.0, lim);
    let mut s = svg_open(&frame, "Predicted vs observed (test set)", "observed", "predicted");
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999999\" \
         stroke-dasharray=\"4 3\"/>\n",
        frame.px(0.0),
        frame.py(0.0),
        frame.px(lim),
        frame.py(lim),
    ));
    let mut legend = Vec::new();
    for (m, model) in report.models.iter().enumerate() {
        let color = MODEL_COLORS[m % MODEL_COLORS.len()];
        legend.push((model.name.as_str(), color));
        for (t, p) in report.test_response.iter().zip(&model.predictions) {
            if frame.contains(*t, *p) {
                s.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{color}\" \
                     fill-opacity=\"0.55\"/>\n",
                    frame.px(*t),
                    frame.py(*p),
                ));
            }
        }
    }
    svg_legend(&mut s, &legend);
    s.push_str("</svg>\n");
    s
}

fn fig_meanvar(report: &ComparisonReport) -> String {
    // Log–log axes: variance-power relationships appear as straight
    // lines with slope p.
    let pts: Vec<(f64, f64)> = report
        .mean_variance
        .iter()
        .filter(|b| b.mean > 0.0 && b.variance > 0.0)
        .map(|b| (b.mean.ln(), b.variance.ln()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let frame = if x0.is_finite() {
        // Reference lines should stay visible: include their endpoints.
        let phi_ln = (report.phi_hat.max(1e-300)).ln();
        for p in MEAN_VARIANCE_POWERS {
            y0 = y0.min(phi_ln + p * x0);
            y1 = y1.max(phi_ln + p * x1);
        }
        Frame::new(x0 - 0.2, x1 + 0.2, y0 - 0.4, y1 + 0.4)
    } else {
        Frame::new(0.0, 1.0, 0.0, 1.0)
    };
    let mut s = svg_open(
        &frame,
        "Mean-variance by 5% quantile bin (log-log)",
        "log bin mean",
        "log bin variance",
    );
    let phi_ln = (report.phi_hat.max(1e-300)).ln();
    let ref_colors = ["#bbbbbb", "#888888", "#d62728", "#555555"];
    let mut legend = Vec::new();
    for (i, p) in MEAN_VARIANCE_POWERS.iter().enumerate() {
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{}\" \
             stroke-dasharray=\"5 3\"/>\n",
            frame.px(frame.x0),
            frame.py((phi_ln + p * frame.x0).clamp(frame.y0, frame.y1)),
            frame.px(frame.x1),
            frame.py((phi_ln + p * frame.x1).clamp(frame.y0, frame.y1)),
            ref_colors[i],
        ));
    }
    legend.push(("p=1", ref_colors[0]));
    legend.push(("p=1.5", ref_colors[1]));
    legend.push(("p=1.719", ref_colors[2]));
    legend.push(("p=2", ref_colors[3]));
    for (x, y) in pts {
        s.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"#1f77b4\"/>\n",
            frame.px(x),
            frame.py(y),
        ));
    }
    svg_legend(&mut s, &legend);
    s.push_str("</svg>\n");
    s
}
