use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("expected exactly 2 periods, found {0}")]
    PeriodCount(usize),

    #[error("non-positive output for sector {sector} in period {period}")]
    NonPositiveOutput { sector: String, period: usize },

    #[error("non-positive price for {what} in period {period}")]
    NonPositivePrice { what: String, period: usize },

    #[error("negative intermediate transaction {row} -> {col} in period {period}")]
    NegativeTransaction {
        row: String,
        col: String,
        period: usize,
    },

    #[error("non-positive price passed to a unit cost function")]
    InvalidPrice,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate nest {nest}: share ratio moved ({numerator:e}) but relative price did not")]
    DegenerateNest { nest: usize, numerator: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("too few usable items: {found} (need at least {needed})")]
    TooFewItems { found: usize, needed: usize },

    #[error("capital calibration infeasible: {0}")]
    CalibrationInfeasible(String),

    #[error("{violations} balance residuals exceed tolerance (max relative {max_relative:e})")]
    Unbalanced { violations: usize, max_relative: f64 },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Schema(_) => "schema",
            Error::PeriodCount(_) => "period_count",
            Error::NonPositiveOutput { .. } => "non_positive_output",
            Error::NonPositivePrice { .. } => "non_positive_price",
            Error::NegativeTransaction { .. } => "negative_transaction",
            Error::InvalidPrice => "invalid_price",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegenerateNest { .. } => "degenerate_nest",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Singular(_) => "singular",
            Error::RankDeficient(_) => "rank_deficient",
            Error::TooFewItems { .. } => "too_few_items",
            Error::CalibrationInfeasible(_) => "calibration_infeasible",
            Error::Unbalanced { .. } => "unbalanced",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 2,
            _ => 1,
        }
    }
}
