//! Simulation and analysis of phase-diffused coherent signals sent through a
//! degenerate optical parametric oscillator (OPO).
//!
//! The model works at the level of first and second quadrature moments in the
//! `x = a + a†` convention (vacuum variance 1). A coherent state of amplitude
//! `beta` picks up Gaussian phase noise of amplitude `sigma`, optionally passes
//! through a below-threshold OPO with pump phase locked to amplify `x`, and the
//! phase is read out from the two quadrature means with first-order error
//! propagation.
//!
//! The interesting question is when the OPO lowers the phase-estimator
//! variance. [`threshold::threshold_closed_form`] answers it in closed form and
//! [`threshold::threshold_bisection`] answers it by brute-force scanning; the
//! two must always agree. [`montecarlo`] provides a seeded homodyne sampler
//! that validates every analytic moment empirically.

pub mod error;
pub mod montecarlo;
pub mod opo;
pub mod signal;
pub mod threshold;

pub use error::{Error, Result};
pub use montecarlo::{
    calibration_report, estimate_moments, mc_phase_estimator_experiment, sample_quadrature,
    sample_quadrature_stream, CalibrationRow, EstimatorExperiment, MomentEstimate, SamplerConfig,
    StateSpec,
};
pub use opo::{
    opo_diffused_moments, opo_output_moments, output_variances, phase_compression, OpoCoupling,
    OpoDrive, OpoMirrorSpec,
};
pub use signal::{
    coherent_moments, diffused_moments, estimate_phase, phase_variance_no_opo, wrap_angle,
    CoherentSignal, PhaseDiffusion, PhaseEstimate, QuadratureMoments,
};
pub use threshold::{
    phase_variance_with_opo, threshold_bisection, threshold_closed_form, threshold_sweep,
    variance_advantage, variance_curves, Classification, GainRange, Method, SigmaGrid, SweepRow,
    SweepSpec, ThresholdResult, VariancePoint,
};
