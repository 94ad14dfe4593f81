//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by constructors and model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Coherent amplitude was negative or not finite.
    #[error("coherent amplitude must be finite and non-negative, got {beta}")]
    NegativeAmplitude { beta: f64 },

    /// An operation that divides by the signal energy got `beta <= 0`.
    #[error("amplitude must be strictly positive, got {beta}")]
    NonPositiveAmplitude { beta: f64 },

    /// Phase-noise amplitude was negative or not finite.
    #[error("phase-noise amplitude must be finite and non-negative, got {sigma}")]
    NegativeNoise { sigma: f64 },

    /// An angle argument was NaN or infinite.
    #[error("angle must be finite, got {angle}")]
    NonFiniteAngle { angle: f64 },

    /// Quadrature variances must be strictly positive.
    #[error("quadrature variances must be strictly positive, got ({var_x}, {var_y})")]
    NonPositiveVariance { var_x: f64, var_y: f64 },

    /// The mean vector is too short to define a phase.
    #[error("mean vector norm^2 = {norm_sq:e} is below the floor; phase undefined")]
    ZeroMeanVector { norm_sq: f64 },

    /// A mirror power reflectivity or crystal loss was outside `[0, 1)`.
    #[error("reflectivities and crystal loss must lie in [0, 1), got {value}")]
    InvalidMirrorParameter { value: f64 },

    /// All loss rates vanish, so the coupling fractions are undefined.
    #[error("cavity has zero total loss; input/escape efficiencies undefined")]
    ZeroLossCavity,

    /// Efficiencies must be positive and sum to at most one.
    #[error("efficiencies must satisfy eta > 0 and eta_in + eta_esc <= 1, got ({eta_in}, {eta_esc})")]
    InvalidCoupling { eta_in: f64, eta_esc: f64 },

    /// Escape efficiency outside `(0, 1]`.
    #[error("escape efficiency must lie in (0, 1], got {eta_esc}")]
    InvalidEscapeEfficiency { eta_esc: f64 },

    /// Gain below the pump-off value of one.
    #[error("OPO gain must be >= 1, got {gain}")]
    GainBelowUnity { gain: f64 },

    /// Pump ratio was negative or not finite.
    #[error("pump ratio must be finite and non-negative, got {d}")]
    NegativePump { d: f64 },

    /// Pump at or above the oscillation threshold; the below-threshold model
    /// does not apply.
    #[error("pump ratio d = {d} is at or above the oscillation threshold (d < 1 required)")]
    AtOrAboveThreshold { d: f64 },

    /// `sigma^2` is so large that the hyperbolic terms overflow; the phase is
    /// fully randomized long before this point.
    #[error("sigma^2 = {sigma_sq} exceeds the supported range (sigma^2 <= 700)")]
    OutOfModelRange { sigma_sq: f64 },

    /// The advantage curve changed sign more than once on the scan grid,
    /// which the model should never produce; flags a modeling bug.
    #[error("{count} sign changes found while scanning the advantage curve")]
    MultipleCrossings { count: usize },

    /// Not enough samples or batches for the requested estimate.
    #[error("need at least {required} samples, got {actual}")]
    InsufficientSamples { required: usize, actual: usize },

    /// A sweep or scan grid specification is malformed.
    #[error("invalid grid specification: {reason}")]
    InvalidGrid { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
