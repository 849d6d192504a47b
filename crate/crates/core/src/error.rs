use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("division by an expression that is identically zero")]
    DivisionByZero,

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("degenerate sampling domain: accepted {accepted} of {attempts} candidate points")]
    DegenerateSampling { accepted: usize, attempts: usize },

    #[error("too many evaluation failures: {skipped} of {total} points skipped")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("objects live on different charts")]
    ChartMismatch,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular")]
    Singular,

    #[error("linear system is inconsistent")]
    Inconsistent,

    #[error("grade error: {0}")]
    Grade(String),

    #[error("expected a polynomial in the chart coordinates: {0}")]
    NotPolynomial(String),

    #[error("precondition `{check}` failed: {detail}")]
    Precondition { check: String, detail: String },

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn precondition(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Precondition {
            check: check.into(),
            detail: detail.into(),
        }
    }
}
