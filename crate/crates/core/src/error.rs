use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("degenerate curve: torsion polynomial vanishes identically")]
    DegenerateCurve,

    #[error("root finding did not converge (degree {degree}, worst residual {residual:e})")]
    RootNonconvergence { degree: usize, residual: f64 },

    #[error("quadrature did not converge at level {level} on [{lo}, {hi}] (error estimate {estimate:e})")]
    QuadratureNonconvergence { level: usize, lo: f64, hi: f64, estimate: f64 },

    #[error("exponent -1 reached while integrating at level {level}")]
    LogarithmicTerm { level: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("hypothesis `{name}` not verified: {detail}")]
    Hypothesis { name: String, detail: String },

    #[error("demanded mass not met at level {level}: have {have:e}, need {need:e}")]
    MassShortfall { level: usize, have: f64, need: f64 },

    #[error("report parse error on line {line}: {message}")]
    ReportParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
