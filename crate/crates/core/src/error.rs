use thiserror::Error;

use crate::C64;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two poles coincide.
    #[error("eigenvalues {i} and {j} coincide (distance {distance:e})")]
    DuplicateEigenvalue {
        /// first index
        i: usize,
        /// second index
        j: usize,
        /// |lambda_i - lambda_j|
        distance: f64,
    },
    /// Shapes of the inputs disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// The direction hits a critical value.
    #[error("direction {eta} is within {distance:e} of a critical value")]
    InadmissibleDirection {
        /// requested direction
        eta: f64,
        /// distance to the nearest critical value (mod 2 pi)
        distance: f64,
    },
    /// Frobenius series too inaccurate at the validity radius.
    #[error("series at pole {k} has tail bound {tail:e} at its radius")]
    SeriesDivergence {
        /// pole index
        k: usize,
        /// estimated relative tail
        tail: f64,
    },
    /// Evaluation requested outside the validity disk.
    #[error("point at distance {distance} from pole {k} exceeds radius {radius}")]
    OutOfRadius {
        /// pole index
        k: usize,
        /// |lambda - lambda_k|
        distance: f64,
        /// validity radius
        radius: f64,
    },
    /// No path with enough clearance was found.
    #[error("no path from pole {k} to pole {j}: best clearance {clearance:e}")]
    PathPlanningFailure {
        /// start pole
        k: usize,
        /// target pole
        j: usize,
        /// best clearance achieved
        clearance: f64,
    },
    /// The integrator was asked to step too close to a singularity.
    #[error("step underflow near {at}")]
    StepUnderflow {
        /// point where stepping failed
        at: C64,
    },
    /// The accumulated error estimate exceeds the request.
    #[error("tolerance not met: estimate {estimate:e} > {tol:e}")]
    ToleranceNotMet {
        /// error estimate
        estimate: f64,
        /// requested tolerance
        tol: f64,
    },
    /// The local fundamental matrix is too ill-conditioned at every trial point.
    #[error("ill-conditioned decomposition at pole {j} for column {k}: cond {cond:e}")]
    IllConditionedDecomposition {
        /// pole where the decomposition was attempted
        j: usize,
        /// continued column
        k: usize,
        /// best condition number found
        cond: f64,
    },
    /// `M_k*` does not exist because `A1` has a (near) negative integer eigenvalue.
    #[error("M* unavailable: A1 has eigenvalue {eigenvalue} near a negative integer")]
    Unavailable {
        /// offending eigenvalue
        eigenvalue: C64,
    },
    /// The asymptotic series cannot reach the requested accuracy.
    #[error("asymptotic anchor too inaccurate: smallest term {smallest:e}")]
    AnchorAccuracyInsufficient {
        /// smallest relative term reached
        smallest: f64,
    },
    /// Stokes matrix estimates disagree across the overlap sector.
    #[error("Stokes matrix spread {spread:e} across overlap points")]
    OverlapConditioning {
        /// max-abs spread
        spread: f64,
    },
    /// Laplace quadrature did not settle.
    #[error("Laplace quadrature for column {k} did not converge")]
    QuadratureNotConverged {
        /// column index
        k: usize,
    },
    /// Invalid argument supplied by the caller.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
