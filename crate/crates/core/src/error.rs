use thiserror::Error;

/// Errors produced by the geometry routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid epsilon {0}: must be +1 or -1")]
    InvalidEpsilon(i64),

    #[error("hypersurface dimension n = {0} is below the supported minimum of 2")]
    DimensionTooSmall(usize),

    #[error("operation requires n = {required}, got n = {got}")]
    UnsupportedDimension { required: usize, got: usize },

    #[error("degenerate span at Gram-Schmidt step {step}: |<w,w>| = {value:e}")]
    DegenerateSpan { step: usize, value: f64 },

    #[error("Gram-Schmidt step {step} produced sign {got} but {expected} was requested")]
    SignMismatch { step: usize, expected: i8, got: i8 },

    #[error("frame is not orthonormal (max deviation {deviation:e})")]
    NonOrthonormalFrame { deviation: f64 },

    #[error("frame has {got} vectors but the angles describe {expected}")]
    FrameSize { expected: usize, got: usize },

    #[error("vector is not unit (norm^2 deviation {deviation:e})")]
    NotUnit { deviation: f64 },

    #[error("vector lies outside the frame span (residual {residual:e})")]
    OutsideSpan { residual: f64 },

    #[error("angle out of range: {0}")]
    AngleOutOfRange(String),

    #[error("invalid geodesic point: {0}")]
    InvalidGeodesicPoint(String),

    #[error("vector is not orthogonal to the oriented plane (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("tangent vectors live over different base points")]
    BaseMismatch,

    #[error("chart is not immersed at {u:?} (smallest singular value {sigma:e})")]
    ImmersionFailure { u: Vec<f64>, sigma: f64 },

    #[error("point {u:?} is off the pseudo-sphere (<phi,phi> - 1 = {deviation:e})")]
    OffSpaceForm { u: Vec<f64>, deviation: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenFailure(String),

    #[error("surface is not convex at {u:?} (principal curvatures {curvatures:?})")]
    NonConvex { u: Vec<f64>, curvatures: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tangent Gram matrix is singular (reciprocal condition {rcond:e})")]
    SingularGram { rcond: f64 },

    #[error("structure field is not expressible in the tangent basis (residual {residual:e})")]
    NotExpressible { residual: f64 },

    #[error("finite-difference step {0:e} is outside the usable range")]
    StepUnderflow(f64),

    #[error("principal frame rotation does not preserve eigenspaces (residual {residual:e})")]
    FrameNotPrincipal { residual: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
