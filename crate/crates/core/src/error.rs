use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The spectral parameter sits on (or numerically next to) the spectrum of A₀.
    #[error("singular solve: lambda = {lambda} is within {distance:.3e} of the spectrum of A0")]
    SingularSolve { lambda: Complex64, distance: f64 },

    /// The interior (Dirichlet) block is singular, so the boundary Schur complement is undefined.
    #[error("singular Schur complement: lambda = {lambda} is within {distance:.3e} of the Dirichlet spectrum")]
    SingularSchur { lambda: Complex64, distance: f64 },

    #[error("I - B M(lambda) is numerically singular at lambda = {lambda} (smallest singular value {sigma_min:.3e})")]
    SingularKreinBlock { lambda: Complex64, sigma_min: f64 },

    #[error("boundary condition does not determine the boundary values uniquely (smallest |eig| {smallest:.3e})")]
    SingularElimination { smallest: f64 },

    #[error("ellipticity violated at ({x}, {y}): smallest coefficient eigenvalue {eig:.6e}")]
    EllipticityViolation { x: f64, y: f64, eig: f64 },

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("bad potential profile: {0}")]
    BadProfile(String),

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("boundary parameter is not non-positive (max eigenvalue {max_eig:.3e})")]
    NotNegative { max_eig: f64 },

    #[error("bad samples: {0}")]
    BadSamples(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid config at {pointer}: {message}")]
    ConfigInvalid { pointer: String, message: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SingularSolve { .. } => "SingularSolve",
            Error::SingularSchur { .. } => "SingularSchur",
            Error::SingularKreinBlock { .. } => "SingularKreinBlock",
            Error::SingularElimination { .. } => "SingularElimination",
            Error::EllipticityViolation { .. } => "EllipticityViolation",
            Error::BadGrid(_) => "BadGrid",
            Error::BadProfile(_) => "BadProfile",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotNegative { .. } => "NotNegative",
            Error::BadSamples(_) => "BadSamples",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Unsupported(_) => "Unsupported",
            Error::ConfigInvalid { .. } => "ConfigInvalid",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
