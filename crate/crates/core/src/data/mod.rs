//! Yield ingestion, term-spread construction, descriptive statistics and the
//! temporal train/test split.

mod dataset;
mod fetch;
mod month;
mod panel;
mod stats;
mod tenor;

pub use dataset::{
    attach_flags, attach_target, compute_spreads, parse_recession_csv, temporal_split, Dataset, MonthRange,
    SpreadFrame, SPREAD_DECIMALS,
};
pub use fetch::{fetch_series, FetchError};
pub use month::{Month, MonthParseError};
pub use panel::{parse_series_csv, parse_yield_csv, ParsedPanel, RejectedMonth, Series, YieldPanel};
pub use stats::{column_stats, descriptive_stats, pearson_correlations, ColumnStats, CorrMatrix, StatsTable};
pub use tenor::{SpreadId, Tenor, TenorUnit};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no column for tenor {0}")]
    MissingTenor(Tenor),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("split error: {0}")]
    Split(String),
    #[error("correlation error: column {0} has zero variance")]
    Correlation(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

impl DataError {
    pub(crate) fn parse(line: usize, message: String) -> Self {
        DataError::Parse { line, message }
    }
}
