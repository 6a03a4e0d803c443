//! Dataset representation, CSV ingestion with a column schema, and
//! summary statistics.
//!
//! A [`Dataset`] pairs a non-negative response vector with an `n × k`
//! design matrix whose first column is an all-ones intercept. Datasets are
//! loaded from headered CSV files through a [`SchemaConfig`] naming the
//! response and covariate columns; rows with missing or non-numeric cells
//! fail the load (complete-case analysis — values are never imputed).

use nalgebra::DMatrix;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

/// Errors from loading, validating, or writing datasets.
#[derive(Debug, Error)]
pub enum DataError {
    /// Underlying file I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// Malformed CSV (unbalanced quotes, ragged rows, ...).
    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),
    /// The file had a header but no data rows.
    #[error("no data rows in file")]
    Empty,
    /// A schema column was absent from the header.
    #[error("column '{0}' not found in header")]
    MissingColumn(String),
    /// A cell could not be parsed as a number.
    #[error("non-numeric value '{value}' at row {row}, column '{column}'")]
    NonNumeric { row: usize, column: String, value: String },
    /// One or more rows had empty cells in schema columns.
    #[error(
        "missing value at row {row}, column '{column}' ({count} incomplete row(s) in total); \
         rows with missing values are rejected, not imputed"
    )]
    MissingValues { row: usize, column: String, count: usize },
    /// Structural violation (shape, sign, finiteness, intercept column).
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

/// Response vector plus design matrix (first column all-ones intercept).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    response: Vec<f64>,
    design: DMatrix<f64>,
    names: Vec<String>,
}

impl Dataset {
    /// Validate and assemble a dataset.
    ///
    /// Requires: all entries finite, response non-negative, `n > k`, the
    /// first design column identically one, and one name per column.
    pub fn new(
        response: Vec<f64>,
        design: DMatrix<f64>,
        names: Vec<String>,
    ) -> Result<Self, DataError> {
        let n = design.nrows();
        let k = design.ncols();
        if response.len() != n {
            return Err(DataError::Invalid(format!(
                "response has {} entries but design has {} rows",
                response.len(),
                n
            )));
        }
        if names.len() != k {
            return Err(DataError::Invalid(format!(
                "{} column names for {} design columns",
                names.len(),
                k
            )));
        }
        if n <= k {
            return Err(DataError::Invalid(format!(
                "need more observations than design columns (n = {n}, k = {k})"
            )));
        }
        if response.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DataError::Invalid(
                "response entries must be finite and non-negative".into(),
            ));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(DataError::Invalid("design entries must be finite".into()));
        }
        if (0..n).any(|i| design[(i, 0)] != 1.0) {
            return Err(DataError::Invalid(
                "first design column must be an all-ones intercept".into(),
            ));
        }
        Ok(Dataset { response, design, names })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    /// Number of design columns (including the intercept).
    pub fn k(&self) -> usize {
        self.design.ncols()
    }

    /// Response values.
    pub fn response(&self) -> &[f64] {
        &self.response
    }

    /// Design matrix (first column all ones).
    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Column labels (intercept first).
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Copy of design row `i` (length `k`).
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.k()).map(|j| self.design[(i, j)]).collect()
    }

    /// New dataset keeping only the given rows (order preserved).
    pub fn subset(&self, rows: &[usize]) -> Result<Self, DataError> {
        let k = self.k();
        let response: Vec<f64> = rows.iter().map(|&i| self.response[i]).collect();
        let design = DMatrix::from_fn(rows.len(), k, |r, c| self.design[(rows[r], c)]);
        Dataset::new(response, design, self.names.clone())
    }

    /// Same design with a replacement response (e.g. a binary indicator).
    pub fn with_response(&self, response: Vec<f64>) -> Result<Self, DataError> {
        Dataset::new(response, self.design.clone(), self.names.clone())
    }
}

/// Names of the response and covariate columns expected in a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaConfig {
    response_column: String,
    covariate_columns: Vec<String>,
}

impl SchemaConfig {
    /// Schema with an explicit response column and covariate list.
    pub fn new(
        response_column: impl Into<String>,
        covariate_columns: Vec<String>,
    ) -> Result<Self, DataError> {
        let response_column = response_column.into();
        if response_column.is_empty() {
            return Err(DataError::Invalid("response column name is empty".into()));
        }
        // An empty covariate list is allowed: it loads an intercept-only
        // dataset, which every model here accepts.
        if covariate_columns.iter().any(|c| c == &response_column) {
            return Err(DataError::Invalid(format!(
                "response column '{response_column}' also appears among the covariates"
            )));
        }
        Ok(SchemaConfig { response_column, covariate_columns })
    }

    /// The RAND Health Insurance Experiment extract schema: 13 standard
    /// covariates (demographics, health status, and plan variables) with a
    /// caller-supplied expenditure column as the response.
    pub fn rand_hie(response_column: impl Into<String>) -> Self {
        let covariates =
            Self::rand_hie_covariates().iter().map(|s| s.to_string()).collect();
        SchemaConfig::new(response_column, covariates)
            .expect("static covariate list is valid")
    }

    /// Covariate names of the RAND HIE extract.
    pub fn rand_hie_covariates() -> [&'static str; 13] {
        [
            "age", "disea", "physlm", "logc", "idp", "lpi", "fmde", "linc", "lfam",
            "female", "black", "educdec", "hlthg",
        ]
    }

    /// Response column name.
    pub fn response_column(&self) -> &str {
        &self.response_column
    }

    /// Covariate column names in design order.
    pub fn covariate_columns(&self) -> &[String] {
        &self.covariate_columns
    }
}

/// Sample statistics of a dataset's response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatasetSummary {
    /// Number of observations.
    pub n: usize,
    /// Fraction of exactly-zero responses.
    pub zero_fraction: f64,
    /// Sample mean of the response.
    pub mean: f64,
    /// Largest response value.
    pub max: f64,
}

/// Compute the response summary statistics.
pub fn summarize(data: &Dataset) -> DatasetSummary {
    let y = data.response();
    let n = y.len();
    let zeros = y.iter().filter(|&&v| v == 0.0).count();
    DatasetSummary {
        n,
        zero_fraction: zeros as f64 / n as f64,
        mean: y.iter().sum::<f64>() / n as f64,
        max: y.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Load a headered CSV into a [`Dataset`] using the given schema.
///
/// The design matrix gets an all-ones intercept column prepended, followed
/// by the covariates in schema order. Parsing is locale-independent (dot
/// decimal separator). Any empty cell in a schema column fails the load
/// with the location of the first offender and the total count of
/// incomplete rows; any non-numeric cell fails immediately.
pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let response_idx = find(schema.response_column())?;
    let covariate_idx: Vec<usize> = schema
        .covariate_columns()
        .iter()
        .map(|c| find(c))
        .collect::<Result<_, _>>()?;

    let mut response = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let k = covariate_idx.len() + 1;
    let mut first_missing: Option<(usize, String)> = None;
    let mut missing_count = 0usize;
    for (row_number, record) in reader.records().enumerate() {
        let record = record?;
        // 1-based data row index (header excluded), as shown in messages.
        let row = row_number + 1;
        let mut row_missing = false;
        let parse = |col: usize, name: &str| -> Result<Option<f64>, DataError> {
            let raw = record.get(col).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| DataError::NonNumeric {
                row,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let note_missing = |name: &str, fm: &mut Option<(usize, String)>| {
            if fm.is_none() {
                *fm = Some((row, name.to_string()));
            }
        };
        let mut values = Vec::with_capacity(k);
        match parse(response_idx, schema.response_column())? {
            Some(v) => values.push(v),
            None => {
                note_missing(schema.response_column(), &mut first_missing);
                row_missing = true;
            }
        }
        for (&col, name) in covariate_idx.iter().zip(schema.covariate_columns()) {
            match parse(col, name)? {
                Some(v) => values.push(v),
                None => {
                    note_missing(name, &mut first_missing);
                    row_missing = true;
                }
            }
        }
        if row_missing {
            missing_count += 1;
            continue;
        }
        response.push(values[0]);
        rows.push(1.0);
        rows.extend_from_slice(&values[1..]);
    }
    if let Some((row, column)) = first_missing {
        return Err(DataError::MissingValues { row, column, count: missing_count });
    }
    if response.is_empty() {
        return Err(DataError::Empty);
    }
    let n = response.len();
    let design = DMatrix::from_row_slice(n, k, &rows);
    let mut names = Vec::with_capacity(k);
    names.push("intercept".to_string());
    names.extend(schema.covariate_columns().iter().cloned());
    Dataset::new(response, design, names)
}

/// Write a dataset back to CSV (response column first, covariates after;
/// the intercept column is not written).
///
/// Values are printed with Rust's shortest round-trip float formatting, so
/// reloading the file reproduces the dataset exactly.
pub fn write_csv(
    data: &Dataset,
    path: impl AsRef<Path>,
    response_column: &str,
) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header = vec![response_column.to_string()];
    header.extend(data.names().iter().skip(1).cloned());
    writer.write_record(&header)?;
    for i in 0..data.n() {
        let mut record = vec![format!("{}", data.response()[i])];
        for j in 1..data.k() {
            record.push(format!("{}", data.design()[(i, j)]));
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
