use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} is not a power of two >= 2")]
    GridSize(usize),

    #[error("invalid coefficient: {0}")]
    Coefficient(String),

    #[error("invalid operator spec: {0}")]
    Spec(String),

    #[error("problem too large: {what} needs {required} but the limit is {limit}")]
    TooLarge {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("invalid domain mask: {0}")]
    Mask(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("vector is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("incompatible grids: coarse {coarse}, fine {fine}")]
    IncompatibleGrids { coarse: usize, fine: usize },

    #[error("shift {0} is singular for this operator")]
    SingularShift(f64),

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("operator has no band or tensor structure metadata; it cannot be split")]
    MissingStructure,

    #[error("phase wrap: spectral radius * tau = {0:.4} >= pi; use a smaller tau")]
    PhaseWrap(f64),

    #[error("unknown {family} '{name}' (known: {known})")]
    UnknownStrategy {
        family: &'static str,
        name: String,
        known: String,
    },

    #[error(
        "quantization overflow: {value} needs more than {bits} bits at resolution {resolution}"
    )]
    Quantization {
        value: f64,
        bits: u32,
        resolution: f64,
    },

    #[error("register state error: {0}")]
    Register(String),

    #[error("fit needs at least 3 usable points, got {0}")]
    FitDegenerate(usize),

    #[error("config error at `{path}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        path: String,
        line: Option<usize>,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            line: None,
            message: message.into(),
        }
    }
}
