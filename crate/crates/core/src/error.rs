use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    /// A scheduling, antenna or power constraint of a group plan is violated.
    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("SIC ordering error: user {decoder} does not precede user {message}")]
    Ordering { decoder: usize, message: usize },

    /// The SIC antenna condition fails, so the asymptotic rate formulas do not apply.
    #[error("SIC condition violated: {0}")]
    SicCondition(String),

    #[error("time shares must be nonnegative and sum to at most 1 (sum = {0})")]
    ShareSum(f64),

    #[error("config error: {0}")]
    Config(String),
}
