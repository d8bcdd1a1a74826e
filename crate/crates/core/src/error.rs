use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("population size {n} is not a positive multiple of workplace size {w}")]
    PopulationSize { n: usize, w: usize },

    #[error("seed type {0} requires movers but theta = 0")]
    NoMovers(&'static str),

    #[error("constraint asks for {requested} contacts but only {available} partners are eligible")]
    Constraint { requested: usize, available: usize },

    #[error("exact final-state engine needs a constant infectious period")]
    NonConstantPeriod,

    #[error("exact final-state system too large ({0} operations)")]
    ExactTooLarge(u64),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("root bracketing failed: {0}")]
    Bracketing(String),

    #[error("missing table: {0}")]
    MissingTable(&'static str),

    #[error("invalid population data: {0}")]
    InvalidPopulation(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::Bracketing(_))
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam(_)
                | Error::Config(_)
                | Error::PopulationSize { .. }
                | Error::NoMovers(_)
                | Error::Constraint { .. }
                | Error::NonConstantPeriod
        )
    }
}
