use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
///
/// Each variant falls into one of three coarse classes (see [`ErrorClass`])
/// which the command-line driver maps onto process exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input format: {0}")]
    InputFormat(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("all records filtered out (retention ratio {retention})")]
    AllFiltered { retention: f64 },

    #[error("incompatible merge: {0}")]
    IncompatibleMerge(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("component {component} is empty (effective count {effective_count:e})")]
    EmptyComponent { component: usize, effective_count: f64 },

    #[error("insufficient data: need at least {required}, got {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("unsupported sample size {n}: Shapiro-Wilk requires 3 <= n <= 5000")]
    UnsupportedSampleSize { n: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient sweep: {0}")]
    InsufficientSweep(String),

    #[error("undefined volume fraction: {0}")]
    UndefinedFraction(String),

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    #[error("i/o: {0}")]
    Io(String),
}

/// Coarse grouping of [`Error`] variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
    InsufficientData,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::NumericalDegeneracy(_)
            | Error::EmptyComponent { .. }
            | Error::DegenerateSample(_)
            | Error::NotConverged(_) => ErrorClass::Numerical,
            Error::InsufficientData { .. } | Error::InsufficientSweep(_) => {
                ErrorClass::InsufficientData
            }
            _ => ErrorClass::Input,
        }
    }

    /// Short kebab-case tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InputFormat(_) => "input-format",
            Error::EmptyInput(_) => "empty-input",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::AllFiltered { .. } => "all-filtered",
            Error::IncompatibleMerge(_) => "incompatible-merge",
            Error::NumericalDegeneracy(_) => "numerical-degeneracy",
            Error::EmptyComponent { .. } => "empty-component",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::UnsupportedSampleSize { .. } => "unsupported-size",
            Error::DegenerateSample(_) => "degenerate-sample",
            Error::InsufficientSweep(_) => "insufficient-sweep",
            Error::UndefinedFraction(_) => "undefined-fraction",
            Error::NotConverged(_) => "not-converged",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::InputFormat(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
