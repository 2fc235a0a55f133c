use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid value function: {0}")]
    InvalidValueFunction(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inverse unbounded at x = {x}")]
    InverseUnbounded { x: f64 },

    #[error("enumeration budget exceeded: {required} required, budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("wrong value function variant: expected {expected}, found {found}")]
    WrongVariant { expected: &'static str, found: String },

    #[error("missing score for agent {agent}, project {project}, r = {r}")]
    MissingScore {
        agent: usize,
        project: usize,
        r: usize,
    },

    #[error("score ({agent}, {project}, r = {r}): {source}")]
    ScoreEntry {
        agent: usize,
        project: usize,
        r: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by an enumeration budget, including wrapped ones.
    pub fn is_budget(&self) -> bool {
        match self {
            Error::BudgetExceeded { .. } => true,
            Error::ScoreEntry { source, .. } => source.is_budget(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
