use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty word")]
    EmptyWord,
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("relator has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("enumeration of {count} words exceeds cap {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("requested {requested} distinct relators but only {universe} words exist")]
    CountExceedsUniverse { requested: String, universe: String },
    #[error("search budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("statistic never crosses level {level}")]
    NoCrossing { level: f64 },
    #[error("statistic is not monotone along the grid ({inversions} significant inversions)")]
    NonMonotoneTrend { inversions: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
