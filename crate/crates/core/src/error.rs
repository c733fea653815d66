use thiserror::Error;

/// Failures reported by the spectral routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("grid with n = {n} aliases a potential of support radius {radius}; need n > {min}", min = 2 * radius)]
    GridTooCoarse { n: usize, radius: usize },
    #[error("energy {z} is not below the threshold {threshold}")]
    ThresholdViolation { z: f64, threshold: f64 },
    #[error("resolvent integral diverges at the threshold for quasimomentum {k:?}")]
    Divergent { k: [f64; 3] },
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("total quasimomentum {0:?} is not a grid node")]
    OffGrid([f64; 3]),
    #[error("grid with n = {n} exceeds the dense cap n <= {max}")]
    GridTooLarge { n: usize, max: usize },
    #[error("energy {z} is not below the discrete channel threshold (smallest eigenvalue of I - G is {min_eigenvalue})")]
    AboveChannelThreshold { z: f64, min_eigenvalue: f64 },
    #[error("eigenvalue counts disagree: direct {direct}, Birman-Schwinger {birman_schwinger}")]
    CountMismatch { direct: usize, birman_schwinger: usize },
    #[error("root finding failed: {0}")]
    NoBracket(String),
    #[error("not a resonance: {0}")]
    NotResonant(String),
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
