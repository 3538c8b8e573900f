use thiserror::Error;

pub type Result<T> = std::result::Result<T, LatticeError>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Column `index` (0-based) lies in the span of the columns before it.
    #[error("basis is rank deficient: column {index} depends on the preceding columns")]
    RankDeficient { index: usize },

    /// Column `index` of a vector set is not an integer combination of the basis.
    #[error("vector {index} is not a lattice vector of the given basis")]
    NotInLattice { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {dim} exceeds the enumeration cap {cap}")]
    CapExceeded { dim: usize, cap: usize },

    /// A requested error radius would break uniqueness of the decoding problem.
    #[error("radius^2 {radius_sq} exceeds lambda_1^2 / 4 = {limit_sq}")]
    RadiusTooLarge { radius_sq: String, limit_sq: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl LatticeError {
    pub fn shape(msg: impl Into<String>) -> Self {
        LatticeError::Shape(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LatticeError::CapExceeded { .. } => 3,
            LatticeError::Parse(_) => 4,
            LatticeError::Io(_) => 4,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for LatticeError {
    fn from(e: serde_json::Error) -> Self {
        LatticeError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for LatticeError {
    fn from(e: std::io::Error) -> Self {
        LatticeError::Io(e.to_string())
    }
}
