use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate potential: {0}")]
    DegeneratePotential(String),

    #[error("linear solver failed: {0}")]
    SolverFailure(String),

    #[error("conjugate gradients did not converge after {iterations} iterations (relative residual {rel_residual:.3e})")]
    CgNonConvergence { iterations: usize, rel_residual: f64 },

    #[error("no interface: {0}")]
    NoInterface(String),

    #[error("interface extraction failed: {0}")]
    InterfaceTopology(String),

    #[error("sample outside domain at ({x}, {y})")]
    OutOfDomain { x: f64, y: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("non-finite field value encountered in {0}")]
    NonFinite(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config error: {0}")]
    Config(String),
}
