use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the analysis and simulation pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("band coverage error: {0}")]
    Coverage(String),
    #[error("degenerate phase: channel {channel} has zero variance")]
    DegeneratePhase { channel: usize },
    #[error("aperiodic fit error: {0}")]
    Fit(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("integration error at step {step}: {reason}")]
    Integration { step: u64, reason: String },
    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("model error: {0}")]
    Model(String),
    #[error("training diverged at epoch {epoch}: {reason}")]
    Training { epoch: usize, reason: String },
    #[error("metric error: {0}")]
    Metric(String),
    #[error("degenerate effect: pooled standard deviation is zero")]
    DegenerateEffect,
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("channel mismatch in {}: expected {expected} channels, found {found}", path.display())]
    ChannelMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("non-numeric cell in {} at row {row}, column {col}: {cell:?}", path.display())]
    NonNumeric {
        path: PathBuf,
        row: usize,
        col: usize,
        cell: String,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Data(_) => "data",
            Error::Numerical(_) => "numerical",
            Error::Normalization(_) => "normalization",
            Error::Coverage(_) => "coverage",
            Error::DegeneratePhase { .. } => "degenerate_phase",
            Error::Fit(_) => "fit",
            Error::Config(_) => "config",
            Error::Statistics(_) => "statistics",
            Error::Integration { .. } => "integration",
            Error::Run { source, .. } => source.kind(),
            Error::Model(_) => "model",
            Error::Training { .. } => "training",
            Error::Metric(_) => "metric",
            Error::DegenerateEffect => "degenerate_effect",
            Error::MissingFile(_) => "missing_file",
            Error::ChannelMismatch { .. } => "channel_mismatch",
            Error::NonNumeric { .. } => "non_numeric",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn in_run(self, run: usize) -> Self {
        Error::Run {
            run,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
