use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by all star-calculus operations.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum StarError {
    #[error("degenerate star product: |det| = {det_abs:.3e}")]
    DegenerateProduct { det_abs: f64 },

    #[error("degenerate expression parameter: {0}")]
    DegenerateK(String),

    #[error("path passes within {dist:.3e} of the singular point {z}")]
    PathHitsSingularity { z: Complex64, dist: f64 },

    #[error("non-generic expression parameter")]
    NonGenericK,

    #[error("s = {s} lies on a singular line")]
    OnSingularLine { s: f64 },

    #[error("expression parameter is not in class {0}")]
    WrongClass(&'static str),

    #[error("z = {z} lies outside the convergence strip")]
    OutOfStrip { z: Complex64 },

    #[error("z = {z} lies outside the convergence domain")]
    OutOfDomain { z: Complex64 },

    #[error("z = {z} is at or too near a pole")]
    AtPole { z: Complex64 },

    #[error("sigma = {sigma} is not a singular point")]
    NotASingularPoint { sigma: Complex64 },

    #[error("path is not closed")]
    OpenPath,

    #[error("path crosses the slits an odd number of times")]
    OddCrossings,

    #[error("parallel transport blow-up: |det| = {0:.3e}")]
    TransportBlowUp(f64),

    #[error("t = 0 is excluded from the co-moving family")]
    AtZero,

    #[error("eta vanishes near t = {t}")]
    EtaVanishes { t: Complex64 },

    #[error("singular pull-back in the co-moving solution")]
    SingularPullback,

    #[error("wrong region for this diagonal expression")]
    WrongRegion,

    #[error("z = {z} is too close to an integer")]
    AtInteger { z: Complex64 },

    #[error("element not representable in this basis: {0}")]
    UnsupportedElement(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, StarError>;
