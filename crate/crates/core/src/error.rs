use thiserror::Error;

use crate::Param;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("bad norm specification: {0}")]
    BadSpec(String),

    #[error("convexity violated at {point:?}: smallest eigenvalue of A_F is {eigenvalue:e}")]
    ConvexityViolation { point: Vec<f64>, eigenvalue: f64 },

    #[error("argument must be a nonzero vector")]
    ZeroVector,

    #[error("dual-norm refinement did not converge (best value {best}, gradient {gradient:e})")]
    OptimizerStall { best: f64, gradient: f64 },

    #[error("degenerate Jacobian at {param:?} (smallest singular value {singular_value:e})")]
    DegenerateJacobian { param: Param, singular_value: f64 },

    #[error("immersion check failed: {0}")]
    ImmersionFailure(String),

    #[error("A_F is not numerically positive definite at the normal of {param:?}")]
    FactorizationFailure { param: Param },

    #[error("curvature vector has a nonpositive entry ({0})")]
    NonpositiveCurvature(f64),

    #[error("integrand is not finite at node {node} of level {level}")]
    NonFiniteField { level: usize, node: usize },

    #[error("enclosed volume is not positive ({0}); check the orientation")]
    NegativeVolume(f64),

    #[error("anisotropic mean curvature {value:e} is not positive at {param:?}")]
    NonpositiveAnisotropicMeanCurvature { param: Param, value: f64 },

    #[error("normal equations of the Wulff fit are singular")]
    SingularNormalEquations,

    #[error("local distance refinement stalled near {param:?}")]
    RefinementStall { param: Param },

    #[error("no positive anisotropic principal curvature (largest is {0:e})")]
    NoPositiveCurvature(f64),

    #[error("cut-time bracket failed at {param:?}: predicate false at t = {time:e}")]
    BracketFailure { param: Param, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
