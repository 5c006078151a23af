use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shift space: {0}")]
    InvalidShift(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("word of length {len} is shorter than the potential memory {memory}")]
    WordTooShort { len: usize, memory: usize },

    #[error("word {0} is not admissible")]
    InadmissibleWord(String),

    #[error("no uniform specification gap: transition matrix is not primitive")]
    NotPrimitive,

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("need at least 3 values of n to fit a slope, got {0}")]
    TooFewPoints(usize),

    #[error("level set not witnessed at this resolution")]
    LevelNotWitnessed,

    #[error("empty feasible grid at resolution {0}; try a finer grid_resolution")]
    EmptyFeasibleGrid(usize),

    #[error("level set not witnessed at level {level}: no word of length {length} has its average within {delta}")]
    EmptyFamily { level: usize, delta: f64, length: usize },

    #[error("scheme has {leaves} leaves, over the eager budget {budget}; build in lazy mode instead")]
    BudgetExceeded { leaves: f64, budget: usize },

    #[error("alpha = {alpha} lies outside the rotation interval [{min}, {max}]")]
    Infeasible { alpha: f64, min: f64, max: f64 },

    #[error("all {members} ensemble members left the phase space ({escaped} escapes); nothing to average")]
    EmptyEnsemble { members: usize, escaped: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    /// True for errors that describe an empty or unreachable level rather
    /// than malformed input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            Error::LevelNotWitnessed
                | Error::EmptyFeasibleGrid(_)
                | Error::EmptyFamily { .. }
                | Error::Infeasible { .. }
                | Error::NotPrimitive
        )
    }
}
