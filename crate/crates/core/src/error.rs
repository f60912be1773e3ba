use thiserror::Error;

use crate::solver::ContinuationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature vector is not in the admissible cone")]
    NotInCone,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("height must be positive, got {0}")]
    NonpositiveHeight(f64),

    #[error("point at distance {distance} lies outside the cap footprint (radius {footprint})")]
    OutsideFootprint { distance: f64, footprint: f64 },

    #[error("argument outside the domain of definition: {0}")]
    DomainError(String),

    #[error("bisection bracket failed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no equidistant cap initializer: {0}")]
    NoCapInitializer(String),

    #[error("Newton iteration diverged after {} iterations", trace.len())]
    NewtonDiverged { trace: Vec<f64> },

    #[error("curvature left the admissible cone at {} node(s)", nodes.len())]
    ConeViolation { nodes: Vec<usize> },

    #[error("line search stalled below the minimum step")]
    LineSearchStalled,

    #[error("Jacobian is singular (zero pivot in column {column})")]
    SingularJacobian { column: usize },

    #[error("continuation stalled at t = {t} (step floor reached)")]
    ContinuationStalled {
        t: f64,
        report: Box<ContinuationReport>,
    },

    #[error("input field is not marked as converged")]
    NotConverged,

    #[error("cannot parse curvature family {input:?}: {reason}")]
    FamilyParse { input: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
