//! Acceptance suite: one test per numbered criterion, each printing a
//! `PASS criterion N` line (run with `--nocapture` to see them) and
//! failing loudly when a tolerance is missed.
//!
//! Criteria 7 and 8 need the RAND Health Insurance Experiment expenditure
//! extract. They look for it at `$RAND_HIE_CSV`, then `data/rand_hie.csv`
//! relative to the crate root; when absent they print a SKIP line and
//! succeed, and criterion 9's simulated mean–variance check stands in.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semicont::data::{load_csv, summarize, Dataset, SchemaConfig};
use semicont::eval::{
    compare_models, mean_variance_bins, rmse, SplitSpec,
};
use semicont::glm::{irls_fit, tweedie_beta_score, Family, Link};
use semicont::profile::{profile_fit, tweedie_fit_at};
use semicont::tobit::{loglik_and_grad, tobit_fit};
use semicont::tweedie::{loglik, TweedieParams};
use semicont::twopart::fit_twopart;
use statrs::function::gamma::ln_gamma;
use std::time::Instant;

/// Parameter grid shared by criteria 1 and 2: every combination of these
/// means, dispersions, and powers.
const GRID_MU: [f64; 5] = [0.5, 1.0, 5.0, 50.0, 200.0];
const GRID_PHI: [f64; 3] = [0.5, 1.0, 10.0];
const GRID_P: [f64; 4] = [1.1, 1.5, 1.719, 1.9];
/// Observation points per mean, as multiples of the mean.
const GRID_Z_FACTOR: [f64; 5] = [0.01, 0.1, 1.0, 5.0, 20.0];

fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Brute-force compound Poisson–Gamma mixture density via log-sum-exp.
///
/// The criterion names a cap of m ≤ 500, but at the grid's far corner
/// (z = 20·200, p = 1.1, φ = 0.5) the series' dominant index sits near
/// m ≈ 3900, where a 500-term truncation is not an oracle of anything.
/// The sum therefore extends adaptively to 3·m* + 200 terms (never fewer
/// than 500) so that it brackets the peak with room to decay.
fn brute_force_log_density(z: f64, mu: f64, phi: f64, p: f64) -> f64 {
    let lambda = mu.powf(2.0 - p) / (phi * (2.0 - p));
    let alpha = (2.0 - p) / (p - 1.0);
    let beta = phi * (p - 1.0) * mu.powf(p - 1.0);
    let m_star = z.powf(2.0 - p) / (phi * (2.0 - p));
    let m_max = (3.0 * m_star + 200.0).ceil().max(500.0) as usize;
    let terms: Vec<f64> = (1..=m_max)
        .map(|m| {
            let mf = m as f64;
            mf * lambda.ln() - ln_gamma(mf + 1.0) + (mf * alpha - 1.0) * z.ln()
                - mf * alpha * beta.ln()
                - ln_gamma(mf * alpha)
        })
        .collect();
    -lambda - z / beta + logsumexp(&terms)
}

#[test]
fn criterion_1_series_density_matches_the_brute_force_oracle() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for mu in GRID_MU {
        for phi in GRID_PHI {
            for p in GRID_P {
                let params = TweedieParams::new(mu, phi, p).unwrap();
                for f in GRID_Z_FACTOR {
                    let z = f * mu;
                    let series = params.log_density(z).unwrap();
                    let oracle = brute_force_log_density(z, mu, phi, p);
                    let rel = (series - oracle).abs() / oracle.abs().max(1.0);
                    worst = worst.max(rel);
                    assert!(
                        rel <= 1e-8,
                        "log-density mismatch at mu={mu}, phi={phi}, p={p}, z={z}: \
                         series {series} vs oracle {oracle} (rel {rel:.3e})"
                    );
                    checked += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion 1 exceeded its 10 s budget: {elapsed:?}"
    );
    println!(
        "PASS criterion 1: series log-density matches the brute-force oracle to 1e-8 \
         on {checked} grid points (worst {worst:.2e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_2_zero_mass_plus_density_integrates_to_one() {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for mu in GRID_MU {
        for phi in GRID_PHI {
            for p in GRID_P {
                let params = TweedieParams::new(mu, phi, p).unwrap();
                let sd = (phi * mu.powf(p)).sqrt();
                let total = params.cdf(mu + 50.0 * sd).unwrap();
                let err = (total - 1.0).abs();
                worst = worst.max(err);
                assert!(
                    err <= 1e-6,
                    "normalization failure at mu={mu}, phi={phi}, p={p}: \
                     total mass {total} (err {err:.3e})"
                );
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "criterion 2 exceeded its 30 s budget: {elapsed:?}"
    );
    println!(
        "PASS criterion 2: zero mass plus quadrature equals 1 ± 1e-6 on {checked} \
         parameter combinations (worst {worst:.2e}, {elapsed:.2?})"
    );
}

#[test]
fn criterion_3_sampler_moments_at_one_million_draws() {
    let start = Instant::now();
    let params = TweedieParams::new(1.0, 1.0, 1.5).unwrap();
    let n = 1_000_000usize;
    let draws = params.sample(n, 20_250_817);
    let zeros = draws.iter().filter(|&&v| v == 0.0).count() as f64 / n as f64;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var =
        draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);

    assert!(
        (zeros - (-2.0f64).exp()).abs() <= 1e-3,
        "zero fraction {zeros} vs e^-2 = {}",
        (-2.0f64).exp()
    );
    assert!((mean - 1.0).abs() <= 5e-3, "mean {mean}");
    assert!((var - 1.0).abs() <= 1e-2, "variance {var}");
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "criterion 3 exceeded its 10 s budget: {elapsed:?}"
    );
    println!(
        "PASS criterion 3: 10^6 draws at (1, 1, 1.5) give zero fraction {zeros:.4}, \
         mean {mean:.4}, variance {var:.4} ({elapsed:.2?})"
    );
}

/// Simulated Tweedie regression with k = 3 design columns.
fn simulate_regression(
    n: usize,
    beta: &[f64; 3],
    phi: f64,
    p: f64,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n * 3);
    for _ in 0..n {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(0.0..1.0);
        let mu = (beta[0] + beta[1] * x1 + beta[2] * x2).exp();
        let params = TweedieParams::new(mu, phi, p).unwrap();
        y.push(params.sampler().draw(&mut rng));
        rows.extend_from_slice(&[1.0, x1, x2]);
    }
    Dataset::new(
        y,
        DMatrix::from_row_slice(n, 3, &rows),
        vec!["intercept".into(), "x1".into(), "x2".into()],
    )
    .unwrap()
}

#[test]
fn criterion_4_profile_recovers_known_parameters_across_seeds() {
    let start = Instant::now();
    let truth = [0.5, 0.7, -0.4];
    let (phi, p) = (2.0, 1.5);
    let mut successes = 0usize;
    let mut failures: Vec<String> = Vec::new();
    for seed in 0..100u64 {
        let data = simulate_regression(20_000, &truth, phi, p, 1_000 + seed);
        let res = match profile_fit(&data) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("seed {seed}: fit failed: {e}"));
                continue;
            }
        };
        let p_ok = (res.p_hat - p).abs() <= 0.05;
        let beta_ok = (0..3).all(|j| {
            let est = res.fit_at_p_hat.coefficients[j];
            let se = res.fit_at_p_hat.standard_errors[j];
            (est - truth[j]).abs() <= 3.0 * se
        });
        if p_ok && beta_ok {
            successes += 1;
        } else {
            failures.push(format!(
                "seed {seed}: p_hat {:.4}{}, beta {:?}",
                res.p_hat,
                if p_ok { "" } else { " (outside ±0.05)" },
                res.fit_at_p_hat.coefficients,
            ));
        }
    }
    assert!(
        successes >= 95,
        "only {successes}/100 seeds recovered the truth; failures: {failures:#?}"
    );
    println!(
        "PASS criterion 4: p within ±0.05 and every coefficient within 3 SE in \
         {successes}/100 seeded runs ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_5_analytic_gradients_match_finite_differences() {
    let start = Instant::now();
    let data = simulate_regression(200, &[0.4, 0.8, -0.5], 1.5, 1.5, 42);

    // Tweedie: analytic score of the full series likelihood in beta.
    let coefficients = vec![0.3, 0.6, -0.3];
    let (phi, p) = (1.4, 1.5);
    let score = tweedie_beta_score(&data, &coefficients, phi, p);
    let eta = |b: &[f64], i: usize| -> f64 {
        data.row(i).iter().zip(b).map(|(x, c)| x * c).sum()
    };
    let ll_at = |b: &[f64]| -> f64 {
        let mu: Vec<f64> = (0..data.n()).map(|i| eta(b, i).exp()).collect();
        loglik(data.response(), &mu, phi, p)
    };
    for j in 0..3 {
        let h = 1e-6;
        let mut up = coefficients.clone();
        let mut dn = coefficients.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (ll_at(&up) - ll_at(&dn)) / (2.0 * h);
        let rel = (score[j] - fd).abs() / fd.abs().max(1.0);
        assert!(
            rel <= 1e-4,
            "tweedie score[{j}] = {} vs finite difference {fd} (rel {rel:.3e})",
            score[j]
        );
    }

    // Tobit: analytic gradient in (beta, ln sigma) on censored data.
    let censored = {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200;
        let mut y = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n * 3);
        for _ in 0..n {
            let x1: f64 = rng.random_range(-2.0..2.0);
            let x2: f64 = rng.random_range(0.0..1.0);
            let eps: f64 =
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            y.push((0.3 + 0.9 * x1 - 0.7 * x2 + 1.1 * eps).max(0.0));
            rows.extend_from_slice(&[1.0, x1, x2]);
        }
        Dataset::new(
            y,
            DMatrix::from_row_slice(n, 3, &rows),
            vec!["intercept".into(), "x1".into(), "x2".into()],
        )
        .unwrap()
    };
    let theta = nalgebra::DVector::from_column_slice(&[0.2, 0.7, -0.4, 0.1]);
    let (_, grad) = loglik_and_grad(censored.response(), censored.design(), &theta);
    for j in 0..theta.len() {
        let h = 1e-6;
        let mut up = theta.clone();
        let mut dn = theta.clone();
        up[j] += h;
        dn[j] -= h;
        let fu = loglik_and_grad(censored.response(), censored.design(), &up).0;
        let fd_val = loglik_and_grad(censored.response(), censored.design(), &dn).0;
        let fd = (fu - fd_val) / (2.0 * h);
        let rel = (grad[j] - fd).abs() / fd.abs().max(1.0);
        assert!(
            rel <= 1e-4,
            "tobit grad[{j}] = {} vs finite difference {fd} (rel {rel:.3e})",
            grad[j]
        );
    }
    println!(
        "PASS criterion 5: Tweedie and Tobit analytic gradients match central \
         differences to 1e-4 on n=200 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn criterion_6_special_cases_reduce_to_closed_forms() {
    let start = Instant::now();

    // Intercept-only log-link fits: beta0 = log(mean).
    let y = vec![0.0, 0.4, 1.3, 0.0, 2.2, 5.0, 0.9, 0.0, 3.1, 1.7];
    let n = y.len();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let data = Dataset::new(
        y.clone(),
        DMatrix::from_element(n, 1, 1.0),
        vec!["intercept".into()],
    )
    .unwrap();
    for family in [Family::Tweedie { p: 1.5 }, Family::Tweedie { p: 1.719 }] {
        let fit = irls_fit(&data, family, Link::Log, None).unwrap();
        assert!(
            (fit.coefficients[0] - ybar.ln()).abs() <= 1e-10,
            "{family:?}: beta0 {} vs log ybar {}",
            fit.coefficients[0],
            ybar.ln()
        );
    }
    let positives: Vec<f64> = y.iter().copied().filter(|&v| v > 0.0).collect();
    let pos_mean = positives.iter().sum::<f64>() / positives.len() as f64;
    let pos_data = Dataset::new(
        positives.clone(),
        DMatrix::from_element(positives.len(), 1, 1.0),
        vec!["intercept".into()],
    )
    .unwrap();
    let gamma_fit = irls_fit(&pos_data, Family::Gamma, Link::Log, None).unwrap();
    assert!((gamma_fit.coefficients[0] - pos_mean.ln()).abs() <= 1e-10);

    // Tobit without censoring reduces to least squares, sigma^2 to RSS/n.
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 400;
    let mut yy = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let x: f64 = rng.random_range(-1.0..1.0);
        let eps: f64 =
            rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
        yy.push(9.0 + 1.5 * x + 0.6 * eps);
        rows.extend_from_slice(&[1.0, x]);
    }
    let tobit_data = Dataset::new(
        yy,
        DMatrix::from_row_slice(n, 2, &rows),
        vec!["intercept".into(), "x".into()],
    )
    .unwrap();
    assert!(tobit_data.response().iter().all(|&v| v > 0.0));
    let fit = tobit_fit(&tobit_data).unwrap();
    let x = tobit_data.design();
    let yv = nalgebra::DVector::from_column_slice(tobit_data.response());
    let ols = (x.transpose() * x).try_inverse().unwrap() * x.transpose() * &yv;
    for j in 0..2 {
        let rel = (fit.coefficients[j] - ols[j]).abs() / ols[j].abs().max(1e-12);
        assert!(rel <= 1e-6, "tobit coefficient {j} differs from OLS by {rel:.3e}");
    }
    let resid = &yv - x * &ols;
    let s2 = resid.iter().map(|r| r * r).sum::<f64>() / n as f64;
    let rel = (fit.sigma * fit.sigma - s2).abs() / s2;
    assert!(rel <= 1e-6, "tobit sigma^2 differs from RSS/n by {rel:.3e}");

    println!(
        "PASS criterion 6: intercept-only log-link fits return log ybar to 1e-10 and \
         censor-free Tobit matches least squares to 1e-6 ({:.2?})",
        start.elapsed()
    );
}

/// Locate the RAND HIE extract: `$RAND_HIE_CSV`, then `data/rand_hie.csv`.
fn rand_hie_path() -> Option<std::path::PathBuf> {
    if let Ok(p) = std::env::var("RAND_HIE_CSV") {
        let p = std::path::PathBuf::from(p);
        if p.exists() {
            return Some(p);
        }
    }
    let default = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/rand_hie.csv");
    default.exists().then_some(default)
}

/// Response column of the extract, overridable via `$RAND_HIE_RESPONSE`.
fn rand_hie_response() -> String {
    std::env::var("RAND_HIE_RESPONSE").unwrap_or_else(|_| "meddol".to_string())
}

/// Published estimation-table reference values, one row per design column
/// in design order (intercept first): `(tobit est, tobit se, tweedie est,
/// tweedie se, binary est, binary se, gamma est, gamma se)`.
/// Every coefficient must land within min(2% relative, 0.2·SE) of these.
#[rustfmt::skip]
const TABLE1: [(&str, [f64; 8]); 14] = [
    ("intercept", [-212.276, 118.391,  4.253, 0.543, -0.732, 0.405,  4.972, 0.522]),
    ("age",       [   2.274,   1.135,  0.007, 0.005,  0.015, 0.005,  0.004, 0.005]),
    ("disea",     [   6.319,   1.695,  0.015, 0.008,  0.044, 0.008,  0.008, 0.007]),
    ("physlm",    [ 214.712,  34.484,  0.688, 0.150,  0.321, 0.156,  0.664, 0.145]),
    ("logc",      [ -23.994,  17.530, -0.046, 0.079, -0.184, 0.065, -0.016, 0.076]),
    ("idp",       [  -7.057,  34.130,  0.051, 0.155, -0.061, 0.130,  0.057, 0.149]),
    ("lpi",       [  -1.806,   5.612, -0.028, 0.025,  0.005, 0.022, -0.028, 0.024]),
    ("fmde",      [   1.728,  10.453,  0.018, 0.047,  0.007, 0.039,  0.018, 0.045]),
    ("linc",      [  18.113,  11.951,  0.066, 0.055,  0.096, 0.038,  0.032, 0.055]),
    ("lfam",      [ -12.640,  23.245, -0.013, 0.106,  0.054, 0.088, -0.008, 0.101]),
    ("female",    [ 138.240,  26.417,  0.397, 0.120,  0.904, 0.104,  0.270, 0.112]),
    ("black",     [-166.908,  39.181, -0.348, 0.179, -1.040, 0.128, -0.112, 0.174]),
    ("educdec",   [   0.150,   4.556, -0.011, 0.021,  0.044, 0.018, -0.017, 0.019]),
    ("hlthg",     [ -17.324,  25.583, -0.067, 0.116,  0.102, 0.100, -0.082, 0.108]),
];

fn check_coefficient(label: &str, est: f64, reference: f64, se: f64) {
    let tol = (0.02 * reference.abs()).min(0.2 * se);
    assert!(
        (est - reference).abs() <= tol,
        "{label}: estimate {est:.4} vs reference {reference:.4} (tolerance {tol:.4})"
    );
}

#[test]
fn criterion_7_dataset_gated_estimation_matches_published_values() {
    let Some(path) = rand_hie_path() else {
        println!(
            "SKIP criterion 7: RAND HIE extract not present (set RAND_HIE_CSV or \
             provide data/rand_hie.csv); criterion 9 stands in"
        );
        return;
    };
    let start = Instant::now();
    let schema = SchemaConfig::rand_hie(rand_hie_response());
    let data = load_csv(&path, &schema).expect("extract loads");

    let s = summarize(&data);
    assert_eq!(s.n, 3301, "n");
    assert!((s.zero_fraction - 0.181).abs() <= 0.0005, "zero fraction {}", s.zero_fraction);
    assert!((s.mean - 206.80).abs() <= 0.005, "mean {}", s.mean);
    assert!((s.max - 17730.0).abs() <= 0.5, "max {}", s.max);

    let res = profile_fit(&data).expect("profile fit");
    assert!(
        (res.p_hat - 1.719).abs() <= 0.01,
        "p_hat {} vs published 1.719",
        res.p_hat
    );
    let ll_rel = (res.loglik - (-18_874.42)).abs() / 18_874.42;
    assert!(ll_rel <= 0.005, "tweedie log-likelihood {} (rel {ll_rel:.4})", res.loglik);

    let tobit = tobit_fit(&data).expect("tobit fit");
    let tobit_rel = (tobit.log_likelihood - (-21_809.21)).abs() / 21_809.21;
    assert!(
        tobit_rel <= 0.005,
        "tobit log-likelihood {} (rel {tobit_rel:.4})",
        tobit.log_likelihood
    );

    let twopart = fit_twopart(&data).expect("two-part fit");
    let bin_rel = (twopart.binary_part.log_likelihood - (-1_371.20)).abs() / 1_371.20;
    assert!(bin_rel <= 0.005, "binary part {}", twopart.binary_part.log_likelihood);
    let gam_rel =
        (twopart.positive_part.log_likelihood - (-17_225.84)).abs() / 17_225.84;
    assert!(gam_rel <= 0.005, "positive part {}", twopart.positive_part.log_likelihood);

    for (j, (name, row)) in TABLE1.iter().enumerate() {
        assert_eq!(data.names()[j], *name, "design column order");
        let [to_e, to_se, tw_e, tw_se, bi_e, bi_se, ga_e, ga_se] = *row;
        check_coefficient(&format!("tobit {name}"), tobit.coefficients[j], to_e, to_se);
        check_coefficient(
            &format!("tweedie {name}"),
            res.fit_at_p_hat.coefficients[j],
            tw_e,
            tw_se,
        );
        check_coefficient(
            &format!("binary {name}"),
            twopart.binary_part.coefficients[j],
            bi_e,
            bi_se,
        );
        check_coefficient(
            &format!("gamma {name}"),
            twopart.positive_part.coefficients[j],
            ga_e,
            ga_se,
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "criterion 7 exceeded 2 min: {elapsed:?}");
    println!(
        "PASS criterion 7: published summary, power, log-likelihoods, and \
         coefficients reproduced on the extract ({elapsed:.1?})"
    );
}

#[test]
fn criterion_8_dataset_gated_prediction_comparison() {
    let Some(path) = rand_hie_path() else {
        println!(
            "SKIP criterion 8: RAND HIE extract not present (set RAND_HIE_CSV or \
             provide data/rand_hie.csv); criterion 9 stands in"
        );
        return;
    };
    let start = Instant::now();
    let schema = SchemaConfig::rand_hie(rand_hie_response());
    let data = load_csv(&path, &schema).expect("extract loads");

    let mut sums = [0.0f64; 3];
    for seed in 0..20u64 {
        let report =
            compare_models(&data, SplitSpec { train_n: 2801, test_n: 500, seed })
                .expect("comparison runs");
        for (i, m) in report.models.iter().enumerate() {
            sums[i] += m.rmse;
        }
    }
    let avg: Vec<f64> = sums.iter().map(|s| s / 20.0).collect();
    let (tweedie, twopart, tobit) = (avg[0], avg[1], avg[2]);

    let gap = (tweedie - twopart).abs() / tweedie.min(twopart);
    assert!(gap <= 0.02, "tweedie {tweedie:.2} vs twopart {twopart:.2} differ by {gap:.3}");
    assert!(
        tweedie < tobit && twopart < tobit,
        "tobit average {tobit:.2} should exceed tweedie {tweedie:.2} and twopart {twopart:.2}"
    );
    for (avg_rmse, published) in [(tweedie, 467.67), (twopart, 467.71), (tobit, 471.58)] {
        let rel = (avg_rmse - published).abs() / published;
        assert!(rel <= 0.10, "average RMSE {avg_rmse:.2} vs published {published} (rel {rel:.3})");
    }
    println!(
        "PASS criterion 8: 20-split average RMSEs {tweedie:.2} / {twopart:.2} / \
         {tobit:.2} match the published ordering and values ({:.1?})",
        start.elapsed()
    );
}

#[test]
fn criterion_9_simulated_mean_variance_slope() {
    // Stand-in for the dataset-gated checks: on data simulated at
    // p = 1.719 the binned mean–variance relation must recover the power
    // as a log-log slope.
    let start = Instant::now();
    let n = 100_000usize;
    let p = 1.719;
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut y = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let x: f64 = rng.random_range(0.0..3.0);
        let mu = (1.0 + x).exp();
        let params = TweedieParams::new(mu, 1.0, p).unwrap();
        y.push(params.sampler().draw(&mut rng));
        rows.extend_from_slice(&[1.0, x]);
    }
    let data = Dataset::new(
        y,
        DMatrix::from_row_slice(n, 2, &rows),
        vec!["intercept".into(), "x".into()],
    )
    .unwrap();

    let fit = tweedie_fit_at(&data, p, None).unwrap();
    let bins = mean_variance_bins(&data, &fit).unwrap();
    assert_eq!(bins.len(), 20);

    // Least-squares slope of log variance on log mean across the bins.
    let pts: Vec<(f64, f64)> =
        bins.iter().map(|b| (b.mean.ln(), b.variance.ln())).collect();
    let nb = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nb;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nb;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    assert!(
        (slope - p).abs() <= 0.15,
        "mean-variance slope {slope:.4} vs simulated power {p}"
    );

    // The harness's own RMSE plumbing participates: predictions from the
    // fitted means must beat predicting the grand mean.
    let mu = fit.fitted_means(&data);
    let grand = data.response().iter().sum::<f64>() / n as f64;
    let fitted_rmse = rmse(&mu, data.response()).unwrap();
    let constant_rmse = rmse(&vec![grand; n], data.response()).unwrap();
    assert!(fitted_rmse < constant_rmse);

    println!(
        "PASS criterion 9: simulated mean-variance slope {slope:.3} within \
         1.719 ± 0.15 ({:.1?})",
        start.elapsed()
    );
}
