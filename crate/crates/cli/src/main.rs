//! Command-line interface for fitting and comparing semicontinuous
//! outcome models.
//!
//! Subcommands: `fit` (one model on a CSV), `compare` (train/test
//! comparison of all three models), `simulate` (draw from a Tweedie
//! distribution), and `summary` (dataset statistics). Exit codes: 0 on
//! success, 1 for usage errors, 2 for data errors, 3 for numerical
//! failures.

use clap::{Parser, Subcommand, ValueEnum};
use semicont::data::{load_csv, summarize, DataError, SchemaConfig};
use semicont::eval::{compare_models, render_report, EvalError, SplitSpec};
use semicont::glm::{FittedGlm, GlmError};
use semicont::profile::{profile_fit, tweedie_fit_at, ProfileError};
use semicont::tobit::{tobit_fit, TobitError, TobitFit};
use semicont::tweedie::{TweedieError, TweedieParams};
use semicont::twopart::{fit_twopart, TwoPartError};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "semicont",
    version,
    about = "Fit and compare Tweedie, two-part, and Tobit models for \
             zero-inflated continuous outcomes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a CSV dataset and write fit_<model>.json.
    Fit {
        /// Model family to fit.
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Tweedie power: "auto" for profile-likelihood estimation, or a
        /// fixed value in (1, 2). Ignored by the other models.
        #[arg(long, default_value = "auto")]
        power: PowerArg,
        /// Input CSV file (headered, comma-separated, dot decimals).
        #[arg(long)]
        data: PathBuf,
        /// Response column name.
        #[arg(long)]
        response: String,
        /// Comma-separated covariate column names. Defaults to the RAND
        /// HIE expenditure schema; pass an empty string for an
        /// intercept-only model.
        #[arg(long, value_delimiter = ',', default_value = DEFAULT_COVARIATES)]
        covariates: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit all three models on a seeded train/test split and write the
    /// comparison report, tables, and figures.
    Compare {
        /// Input CSV file.
        #[arg(long)]
        data: PathBuf,
        /// Response column name.
        #[arg(long)]
        response: String,
        /// Comma-separated covariate column names (empty string for
        /// intercept-only).
        #[arg(long, value_delimiter = ',', default_value = DEFAULT_COVARIATES)]
        covariates: Vec<String>,
        /// Training rows.
        #[arg(long)]
        train_n: usize,
        /// Held-out test rows (train_n + test_n must equal the data size).
        #[arg(long)]
        test_n: usize,
        /// Seed for the split and every downstream draw.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Draw a seeded Tweedie sample and write it as a one-column CSV.
    Simulate {
        /// Mean of the distribution.
        #[arg(long)]
        mu: f64,
        /// Dispersion.
        #[arg(long)]
        phi: f64,
        /// Power in (1, 2).
        #[arg(long)]
        p: f64,
        /// Number of draws.
        #[arg(long)]
        n: usize,
        /// RNG seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print summary statistics of a dataset's response column.
    Summary {
        /// Input CSV file.
        #[arg(long)]
        data: PathBuf,
        /// Response column name.
        #[arg(long)]
        response: String,
    },
}

const DEFAULT_COVARIATES: &str =
    "age,disea,physlm,logc,idp,lpi,fmde,linc,lfam,female,black,educdec,hlthg";

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Tweedie,
    Twopart,
    Tobit,
}

#[derive(Clone, Copy)]
enum PowerArg {
    Auto,
    Fixed(f64),
}

impl FromStr for PowerArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PowerArg::Auto);
        }
        let p: f64 = s
            .parse()
            .map_err(|_| format!("'{s}' is neither 'auto' nor a number"))?;
        if !(1.0 < p && p < 2.0) {
            return Err(format!("power {p} is outside the open interval (1, 2)"));
        }
        Ok(PowerArg::Fixed(p))
    }
}

/// Failure with the exit code it maps to.
enum CliError {
    /// Exit 2: the input data is unusable or violates a model's
    /// preconditions, or an output path cannot be written.
    Data(String),
    /// Exit 3: a fit or other numerical routine failed.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("write failed: {e}"))
    }
}

impl From<GlmError> for CliError {
    fn from(e: GlmError) -> Self {
        match e {
            GlmError::InvalidResponse { .. } => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::DegenerateResponse(_) => CliError::Data(e.to_string()),
            ProfileError::AllGridPointsFailed(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TwoPartError> for CliError {
    fn from(e: TwoPartError) -> Self {
        match &e {
            TwoPartError::DegenerateResponse(_) => CliError::Data(e.to_string()),
            TwoPartError::Binary(g) | TwoPartError::Positive { source: g, .. } => {
                match g {
                    GlmError::InvalidResponse { .. } => CliError::Data(e.to_string()),
                    _ => CliError::Numerical(e.to_string()),
                }
            }
        }
    }
}

impl From<TobitError> for CliError {
    fn from(e: TobitError) -> Self {
        match e {
            TobitError::AllCensored => CliError::Data(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TweedieError> for CliError {
    fn from(e: TweedieError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Profile(inner) => inner.into(),
            EvalError::TwoPart(inner) => inner.into(),
            EvalError::Tobit(inner) => inner.into(),
            EvalError::SplitSize { .. }
            | EvalError::Empty
            | EvalError::TooFewRows { .. }
            | EvalError::Io(_) => CliError::Data(e.to_string()),
            EvalError::LengthMismatch { .. } | EvalError::Distribution(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

fn main() {
    // clap's own exit code for bad arguments is 2; remap every usage
    // problem to 1 so that 2 stays reserved for data errors.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are "errors" to try_parse but
            // successes to the user.
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit { model, power, data, response, covariates, out } => {
            fit_command(model, power, &data, &response, covariates, &out)
        }
        Command::Compare { data, response, covariates, train_n, test_n, seed, out } => {
            compare_command(&data, &response, covariates, train_n, test_n, seed, &out)
        }
        Command::Simulate { mu, phi, p, n, seed, out } => {
            simulate_command(mu, phi, p, n, seed, &out)
        }
        Command::Summary { data, response } => summary_command(&data, &response),
    }
}

fn load(path: &Path, response: &str, covariates: Vec<String>) -> Result<semicont::data::Dataset, CliError> {
    let covariates: Vec<String> =
        covariates.into_iter().filter(|c| !c.is_empty()).collect();
    let schema = SchemaConfig::new(response, covariates)?;
    Ok(load_csv(path, &schema)?)
}

#[derive(Serialize)]
struct CoefficientOut {
    name: String,
    estimate: f64,
    standard_error: f64,
}

fn coefficient_table(fit: &FittedGlm) -> Vec<CoefficientOut> {
    fit.names
        .iter()
        .zip(fit.coefficients.iter().zip(&fit.standard_errors))
        .map(|(name, (est, se))| CoefficientOut {
            name: name.clone(),
            estimate: *est,
            standard_error: *se,
        })
        .collect()
}

#[derive(Serialize)]
struct ProfilePointOut {
    power: f64,
    log_likelihood: f64,
}

#[derive(Serialize)]
struct TweedieFitOut {
    model: &'static str,
    power: f64,
    power_estimated: bool,
    coefficients: Vec<CoefficientOut>,
    dispersion_pearson: f64,
    dispersion_mle: f64,
    log_likelihood: f64,
    iterations: usize,
    converged: bool,
    profile: Option<Vec<ProfilePointOut>>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct TwoPartFitOut<'a> {
    model: &'static str,
    binary_part: &'a FittedGlm,
    positive_part: &'a FittedGlm,
    combined_log_likelihood: f64,
}

#[derive(Serialize)]
struct TobitFitOut<'a> {
    model: &'static str,
    #[serde(flatten)]
    fit: &'a TobitFit,
}

fn fit_command(
    model: ModelArg,
    power: PowerArg,
    data_path: &Path,
    response: &str,
    covariates: Vec<String>,
    out: &Path,
) -> Result<(), CliError> {
    let data = load(data_path, response, covariates)?;
    std::fs::create_dir_all(out)?;

    let (file_name, json, human) = match model {
        ModelArg::Tweedie => {
            let out_struct = match power {
                PowerArg::Auto => {
                    let res = profile_fit(&data)?;
                    let fit = &res.fit_at_p_hat;
                    TweedieFitOut {
                        model: "tweedie",
                        power: res.p_hat,
                        power_estimated: true,
                        coefficients: coefficient_table(fit),
                        dispersion_pearson: fit.dispersion,
                        dispersion_mle: res.phi_hat,
                        log_likelihood: res.loglik,
                        iterations: fit.iterations,
                        converged: fit.converged,
                        profile: Some(
                            res.p_grid
                                .iter()
                                .zip(&res.loglik_at)
                                .map(|(&power, &log_likelihood)| ProfilePointOut {
                                    power,
                                    log_likelihood,
                                })
                                .collect(),
                        ),
                        warnings: res.warnings,
                    }
                }
                PowerArg::Fixed(p) => {
                    let fit = tweedie_fit_at(&data, p, None)?;
                    TweedieFitOut {
                        model: "tweedie",
                        power: p,
                        power_estimated: false,
                        coefficients: coefficient_table(&fit),
                        dispersion_pearson: fit.dispersion,
                        dispersion_mle: fit
                            .dispersion_mle
                            .expect("fixed-power fit stores its ML dispersion"),
                        log_likelihood: fit.log_likelihood,
                        iterations: fit.iterations,
                        converged: fit.converged,
                        profile: None,
                        warnings: Vec::new(),
                    }
                }
            };
            let mut human = format!(
                "model: tweedie\npower: {:.4} ({})\ndispersion (MLE): {:.6}\n\
                 log-likelihood: {:.4}\n",
                out_struct.power,
                if out_struct.power_estimated {
                    "profile-likelihood estimate"
                } else {
                    "fixed"
                },
                out_struct.dispersion_mle,
                out_struct.log_likelihood,
            );
            push_coefficients(&mut human, &out_struct.coefficients);
            for w in &out_struct.warnings {
                let _ = writeln!(human, "warning: {w}");
            }
            ("fit_tweedie.json", serde_json::to_string_pretty(&out_struct), human)
        }
        ModelArg::Twopart => {
            let fit = fit_twopart(&data)?;
            let out_struct = TwoPartFitOut {
                model: "twopart",
                binary_part: &fit.binary_part,
                positive_part: &fit.positive_part,
                combined_log_likelihood: fit.combined_loglik,
            };
            let mut human = format!(
                "model: twopart\ncombined log-likelihood: {:.4}\n\
                 binary part (logit), log-likelihood {:.4}:\n",
                fit.combined_loglik, fit.binary_part.log_likelihood,
            );
            push_coefficients(&mut human, &coefficient_table(&fit.binary_part));
            let _ = writeln!(
                human,
                "positive part (gamma, log link), log-likelihood {:.4}, dispersion {:.6}:",
                fit.positive_part.log_likelihood,
                fit.positive_part
                    .dispersion_mle
                    .expect("gamma fits carry an ML dispersion"),
            );
            push_coefficients(&mut human, &coefficient_table(&fit.positive_part));
            ("fit_twopart.json", serde_json::to_string_pretty(&out_struct), human)
        }
        ModelArg::Tobit => {
            let fit = tobit_fit(&data)?;
            let out_struct = TobitFitOut { model: "tobit", fit: &fit };
            let mut human = format!(
                "model: tobit\nsigma: {:.6} (SE {:.6})\nlog-likelihood: {:.4}\n",
                fit.sigma, fit.sigma_se, fit.log_likelihood,
            );
            let coefs: Vec<CoefficientOut> = fit
                .names
                .iter()
                .zip(fit.coefficients.iter().zip(&fit.standard_errors))
                .map(|(name, (est, se))| CoefficientOut {
                    name: name.clone(),
                    estimate: *est,
                    standard_error: *se,
                })
                .collect();
            push_coefficients(&mut human, &coefs);
            ("fit_tobit.json", serde_json::to_string_pretty(&out_struct), human)
        }
    };

    let mut json = json.expect("fit results serialize");
    json.push('\n');
    let path = out.join(file_name);
    std::fs::write(&path, json)?;
    print!("{human}");
    println!("wrote {}", path.display());
    Ok(())
}

fn push_coefficients(human: &mut String, coefs: &[CoefficientOut]) {
    let width = coefs.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
    for c in coefs {
        let _ = writeln!(
            human,
            "  {:<width$}  {:>14.6}  (SE {:.6})",
            c.name, c.estimate, c.standard_error,
        );
    }
}

fn compare_command(
    data_path: &Path,
    response: &str,
    covariates: Vec<String>,
    train_n: usize,
    test_n: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let data = load(data_path, response, covariates)?;
    let spec = SplitSpec { train_n, test_n, seed };
    let report = compare_models(&data, spec)?;
    let files = render_report(&report, out)?;

    println!("split: train {train_n} / test {test_n} (seed {seed})");
    println!(
        "tweedie power estimate: p = {:.4}, dispersion = {:.6}",
        report.p_hat, report.phi_hat
    );
    println!(
        "{:<8}  {:>16}  {:>12}  {:>12}",
        "model", "log-likelihood", "dispersion", "test RMSE"
    );
    for m in &report.models {
        println!(
            "{:<8}  {:>16.4}  {:>12.6}  {:>12.4}",
            m.name, m.log_likelihood, m.dispersion, m.rmse
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

fn simulate_command(
    mu: f64,
    phi: f64,
    p: f64,
    n: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let params = TweedieParams::new(mu, phi, p)?;
    let draws = params.sample(n, seed);
    let mut csv = String::with_capacity(n * 8 + 2);
    csv.push_str("y\n");
    for v in &draws {
        let _ = writeln!(csv, "{v}");
    }
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(out, csv)?;
    println!(
        "wrote {n} draws from Tweedie(mu = {mu}, phi = {phi}, p = {p}) to {}",
        out.display()
    );
    Ok(())
}

fn summary_command(data_path: &Path, response: &str) -> Result<(), CliError> {
    let data = load(data_path, response, Vec::new())?;
    let s = summarize(&data);
    println!("n: {}", s.n);
    println!("zero fraction: {:.4}", s.zero_fraction);
    println!("mean: {:.4}", s.mean);
    println!("max: {:.4}", s.max);
    Ok(())
}
