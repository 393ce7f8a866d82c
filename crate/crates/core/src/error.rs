use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("jet order {0} is not supported (maximum is 6)")]
    UnsupportedOrder(usize),

    /// The radius of curvature is not positive somewhere on the curve.
    #[error("convexity violated at theta = {theta}: value {value}")]
    ConvexityViolation { theta: f64, value: f64 },

    #[error("Newton inversion of the affine arc length failed at s = {s} (residual {residual})")]
    InversionFailed { s: f64, residual: f64 },

    #[error("affine frame invariant violated: max defect {defect} exceeds {tol}")]
    JetInvariant { defect: f64, tol: f64 },

    /// The chord state lies outside the positive phase space.
    #[error("state outside the phase space: {0}")]
    PhaseSpace(String),

    #[error("point is not strictly exterior to the curve")]
    NotExterior,

    #[error("root finder failed: {0}")]
    RootNotFound(String),

    #[error("polygon solver diverged for n = {n} (residual {residual})")]
    SolverDiverged { n: usize, residual: f64 },

    /// The critical polygon is not a local extremum of the expected type.
    #[error("critical polygon for n = {n} is not a local {expected} (extreme eigenvalue {eigenvalue})")]
    NotExtremal {
        n: usize,
        expected: &'static str,
        eigenvalue: f64,
    },

    #[error("tangent lines are nearly parallel; vertex intersection is ill-conditioned")]
    IllConditioned,

    #[error("least-squares design is rank deficient or too ill-conditioned (condition number {0:e})")]
    RankDeficient(f64),

    #[error("fit residual {residual:e} exceeds the deficit accuracy budget {budget:e}")]
    UnderResolved { residual: f64, budget: f64 },
}

impl Error {
    /// True for errors raised while validating inputs (as opposed to numerical failures).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::UnsupportedOrder(_)
                | Error::ConvexityViolation { .. }
                | Error::PhaseSpace(_)
                | Error::NotExterior
        )
    }
}
