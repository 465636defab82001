use std::path::PathBuf;

use thiserror::Error;

use crate::domain::Violation;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid catalog JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("crf needs r > 0 and lifespan >= 1 (got r = {r}, lifespan = {lifespan_yr})")]
    CrfDomain { r: f64, lifespan_yr: f64 },
    #[error("no default parameters for year {0} (known: 2030, 2040, 2050)")]
    UnknownYear(u16),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("line {line}: negative GHI {value}")]
    NegativeGhi { line: usize, value: f64 },
    #[error("line {line}: timestamp does not advance (duplicate or out-of-order hour)")]
    NonMonotonic { line: usize },
    #[error("line {line}: gap in hourly data")]
    Gap { line: usize },
    #[error("year {year} has {rows} rows; expected 8760 or 8784")]
    IncompleteYear { year: i32, rows: usize },
    #[error("annual demand must be positive and finite, got {0}")]
    BadAnnualTotal(f64),
    #[error("variable demand needs a shape")]
    MissingShape,
    #[error("demand shape sums to zero")]
    ZeroShape,
    #[error("demand shape entry {index} is negative or non-finite ({value})")]
    BadShapeEntry { index: usize, value: f64 },
    #[error("demand shape has {0} entries; need at least 8760")]
    ShortShape(usize),
    #[error("reduction {policy} needs {needed} hours but only {available} are available")]
    NotEnoughData {
        policy: String,
        needed: usize,
        available: usize,
    },
    #[error("no weather years supplied")]
    NoWeather,
    #[error("unknown reduction policy `{0}` (expected full_year, seasonal_weeks:K or first_hours:N)")]
    BadPolicy(String),
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error("horizon has {0} steps; need at least 2")]
    HorizonTooShort(usize),
    #[error("scenario {scenario} has series of unequal length")]
    LengthMismatch { scenario: usize },
    #[error("catalog is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidCatalog(Vec<Violation>),
    #[error("block `{block}` already added for index {scenario}")]
    DuplicateBlock { block: &'static str, scenario: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Model(#[from] h2chain_milp::ModelError),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("annual hydrogen demand is zero")]
    ZeroDemand,
    #[error("no electricity is delivered to hydrogen production")]
    ZeroDelivered,
    #[error(transparent)]
    Domain(#[from] DomainError),
}
