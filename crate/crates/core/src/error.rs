use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("coefficient list is empty")]
    EmptyCoefficients,
    #[error("potential is not confining: {0}")]
    NonConfining(String),
    #[error("potential has a second global minimum near u = {0}")]
    DegenerateMinima(f64),
    #[error("series requires c2 = 1, got c2 = {0}")]
    NotNormalized(f64),
    #[error("rational magnitude exceeded the bignum budget at order {0}")]
    Overflow(usize),
    #[error("recursion needs energy coefficient {0}, which was not provided")]
    MissingEps(usize),
    #[error("term has a pole at u = 0")]
    OriginSingularity,
    #[error("integrand pole at the origin does not cancel; supply a lower cutoff")]
    CutoffRequired,
    #[error("operation requires a polynomial potential")]
    NonPolynomial,
    #[error("potential vanishes inside the integration range near u = {0}")]
    PotentialZeroInside(f64),
    #[error("ODE step budget exceeded at tau = {0}")]
    StiffnessBudgetExceeded(f64),
    #[error("integration box too small: u(T)/u0 = {0:.3e} has not relaxed")]
    BoxTooSmall(f64),
    #[error("variational parameter B must be positive, got {0}")]
    NonPositiveB(f64),
    #[error("asymptotic constraints are inconsistent: {0}")]
    InconsistentConstraints(String),
    #[error("overlap matrix is singular; cannot orthogonalize")]
    SingularGram,
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("failed to bracket eigenvalue {0}")]
    BracketFailure(usize),
    #[error("config error: {0}")]
    ConfigParse(String),
}

impl Error {
    /// Exit code the CLI maps this error to: 2 for configuration
    /// problems, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse(_) | Error::EmptyCoefficients => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
