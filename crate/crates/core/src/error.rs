use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unbound symbol `{0}` during evaluation")]
    UnboundSymbol(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: accepted {accepted} of {wanted} after {attempts} attempts")]
    InsufficientSamples {
        accepted: usize,
        wanted: usize,
        attempts: usize,
    },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("chart mismatch: {0}")]
    ChartMismatch(String),

    #[error("distribution rank is not constant: observed ranks {0:?}")]
    NonConstantRank(Vec<usize>),

    #[error("fields not in involution: [{i},{j}] leaves the span (residual {residual:.3e})")]
    NotInInvolution { i: usize, j: usize, residual: f64 },

    #[error("system is already autonomous")]
    AlreadyAutonomous,

    #[error("total derivative of a first-order expression needs a system (second-order jets are not modelled)")]
    OrderOverflow,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("denominator is identically zero")]
    ZeroDenominator,

    #[error("field {0} is not vertical and time-independent")]
    NonVerticalField(usize),

    #[error("no sigma exists for these fields (residual {0:.3e})")]
    NoSolution(f64),

    #[error("field coefficient matrix is rank deficient")]
    RankDeficient,

    #[error("field {0} is not a standard symmetry of the simplified system (residual {1:.3e})")]
    NotStandardSymmetry(usize, f64),

    #[error("structure constants are not constant (spread {0:.3e})")]
    NonConstantStructure(f64),

    #[error("completion did not close within {0} added fields")]
    CompletionOverflow(usize),

    #[error("completion added a field with nonzero projection on the base")]
    NonVerticalCompletion,

    #[error("coordinate change has no inverse")]
    InverseRequired,

    #[error("coordinate change failed validation: {0}")]
    ValidationFailed(String),

    #[error("reduced equation for `{symbol}` depends on complementary coordinates (spread {spread:.3e})")]
    LeakageDetected { symbol: String, spread: f64 },

    #[error("coordinate change does not rectify field {0}")]
    NotRectifying(usize),

    #[error("non-finite state at t = {t}")]
    BlowUp { t: f64 },

    #[error("problem file: {0}")]
    Problem(String),
}

impl Error {
    /// Errors caused by malformed or inconsistent input, as opposed to a
    /// claim that failed verification.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. }
                | Error::UnknownSymbol(_)
                | Error::UnboundSymbol(_)
                | Error::InvalidChart(_)
                | Error::ChartMismatch(_)
                | Error::AlreadyAutonomous
                | Error::SizeMismatch(_)
                | Error::NonVerticalField(_)
                | Error::InverseRequired
                | Error::Problem(_)
        )
    }
}
