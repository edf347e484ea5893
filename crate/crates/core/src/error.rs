use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported jet order {0} (maximum is {1})")]
    UnsupportedOrder(usize, usize),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("sampling failure at stencil point {point:?}: non-finite value")]
    SamplingFailure { point: Vec<f64> },

    #[error("oracle divergence: ladder errors grow level-to-level ({0:?})")]
    OracleDivergence(Vec<f64>),

    #[error("graph is not spacelike: max |lambda| = {max_lambda}")]
    NotSpacelike { max_lambda: f64 },

    #[error("decomposition failure: {0}")]
    DecompositionFailure(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid radius {0}; radii must be nonnegative")]
    InvalidRadius(f64),

    #[error("invalid time t = {t}; must lie in [0, T) with T = {horizon}")]
    InvalidTime { t: f64, horizon: f64 },

    #[error("s = {s} is below the threshold s0 = {s0}; margin {margin} is not certified")]
    BelowThreshold { s: f64, s0: f64, margin: f64 },

    #[error("invalid threshold beta = {0}; must satisfy beta < 9")]
    InvalidThreshold(f64),

    #[error("radius R = {r} out of range; must exceed R0 = {r0}")]
    OutOfRange { r: f64, r0: f64 },

    #[error("frame not adapted: |du| off-diagonal reaches {max_offdiag}")]
    FrameNotAdapted { max_offdiag: f64 },

    #[error("degenerate rotation: I - D2eta is singular (|det| = {0})")]
    DegenerateRotation(f64),

    #[error("invalid spec: {0}")]
    SpecInvalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
