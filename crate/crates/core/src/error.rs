use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Majorana index {index} outside the range 0..{limit}")]
    IndexOutOfRange { index: u32, limit: usize },

    #[error("Majorana index {0} is outside the reflection domain")]
    ReflectionDomain(u32),

    #[error("invalid reflection map: {0}")]
    InvalidReflection(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid reflection plane: {0}")]
    InvalidPlane(String),

    #[error("island rank {0} does not exist")]
    UnknownIsland(usize),

    #[error("({0}, {1}) is not a lattice bond in its stored direction")]
    NotABond(u32, u32),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("vortex factorization failed: {0}")]
    Factorization(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{modes} fermionic modes exceed the matrix representation limit of {limit}")]
    TooManyModes { modes: usize, limit: usize },

    #[error("operator dimension {dim} exceeds the dense cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error(
        "ground cluster is ill-separated: eigenvalue at E0 + {offset:e} lies within a factor 10 of gap_tol = {gap_tol:e}; choose a different tolerance"
    )]
    IllSeparated { offset: f64, gap_tol: f64 },

    #[error(
        "Lanczos did not converge after {matvecs} matrix-vector products (residual {residual:e}, target {target:e})"
    )]
    NoConvergence { matvecs: usize, residual: f64, target: f64 },

    #[error("operator A has support outside the left half-lattice (index {0})")]
    SupportViolation(u32),

    #[error("malformed operator dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
