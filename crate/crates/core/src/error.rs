//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    // exact_algebra
    #[error("division by zero")]
    DivisionByZero,
    #[error("division not exact")]
    DivisionNotExact,
    #[error("non-invertible denominator: {0}")]
    NonInvertibleDenominator(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(String, String),

    // lambda_calc
    #[error("half-integer A-power survives in term A^({0}/2) B^{1}")]
    HalfPowerResidue(i32, i32),
    #[error("nonzero coefficient on the constant basis element: {0}")]
    NonzeroConstantTerm(String),

    // hierarchy
    #[error("not a total x-derivative: {0}")]
    NotExact(String),
    #[error("flow decomposition failed: {0}")]
    DecompositionFailure(String),

    // loop_solver
    #[error("singular diagonal entry for unknown {0}")]
    SingularDiagonal(String),
    #[error("system is not upper triangular at row {row}, column {col}")]
    NotUpperTriangular { row: String, col: String },
    #[error("dX_p/dv is nonzero at order {0}")]
    NonzeroVGradient(usize),
    #[error("reconstructed X_{0} does not reproduce its gradient")]
    GradientMismatch(usize),
    #[error("loop equation residual nonzero at order {order} on {basis}")]
    ResidualNonzero { order: usize, basis: String },
    #[error("closed part of X_{0} depends on forbidden variables: {1}")]
    ClosedPartContaminated(usize, String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    // iz_coords
    #[error("IZ inversion roundtrip failed: {0}")]
    RoundtripFailure(String),

    // correlators
    #[error("genus-zero fixed point did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("query exceeds truncation budget: {0}")]
    TruncationExceeded(String),
    #[error("invalid correlator query: {0}")]
    InvalidQuery(String),
    #[error("the two correlator routes disagree: {0}")]
    CrossCheckMismatch(String),

    // virasoro
    #[error("mixed partials disagree while integrating: {0}")]
    IntegrabilityFailure(String),

    #[error("unknown expression id {0}")]
    UnknownExpr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
