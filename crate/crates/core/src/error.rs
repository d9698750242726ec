use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid exponent vector: {0}")]
    InvalidDVector(String),

    #[error("root bracket did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("domain is not d-balanced for d = {0:?}: membership is not monotone in the scaling parameter")]
    NotDBalanced(Vec<u32>),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("argument {0} lies outside the open unit disk")]
    OutsideDisk(f64),

    #[error("model domain does not satisfy the rule hypothesis: {0}")]
    Hypothesis(String),

    #[error("rejection sampling exhausted {attempts} attempts (acceptance rate {acceptance_rate:.3e})")]
    SamplingExhausted { attempts: u64, acceptance_rate: f64 },

    #[error("gauge cross-check failed: closed form {closed} vs bisection {bisection}")]
    CrossCheck { closed: f64, bisection: f64 },

    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}
