//! Seeded homodyne sampler: an independent stochastic check of every
//! analytic moment in the crate.
//!
//! Sampling is exact, not approximate: conditional on a phase draw
//! `φ ~ N(φ₀, σ²)` the state is Gaussian with known moments, and the rotated
//! quadrature `x_θ = x cos θ + y sin θ` is Gaussian with
//! `mean_θ = ⟨x⟩ cos θ + ⟨y⟩ sin θ` and `var_θ = var[x] cos²θ + var[y] sin²θ`
//! (the conditional `xy` covariance vanishes for the fixed pump phase).
//!
//! Reproducibility: every stream is a ChaCha8 keystream whose 32-byte key is
//! derived by SplitMix64 from `(seed, stream index)`. Batches own disjoint
//! streams, so results are bit-identical no matter how batches are scheduled;
//! Gaussians come from the inverse normal CDF of the stream's uniforms, never
//! from rejection sampling.

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::opo::{opo_factors, OpoCoupling, OpoDrive};
use crate::signal::{CoherentSignal, PhaseDiffusion, QuadratureMoments};
use crate::{coherent_moments, diffused_moments, opo_diffused_moments, opo_output_moments};

/// Seed and sample budget for a sampling run.
///
/// Identical configs and inputs produce bit-identical sample streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Samples per stream; at least 2 so a variance is estimable.
    pub n_samples: usize,
    /// Batches for repeated-estimate experiments.
    pub n_batches: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_samples: usize, n_batches: usize) -> Self {
        Self {
            seed,
            n_samples,
            n_batches,
        }
    }
}

/// Which modeled state the sampler draws from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Coherent {
        signal: CoherentSignal,
    },
    Diffused {
        signal: CoherentSignal,
        noise: PhaseDiffusion,
    },
    OpoOutput {
        signal: CoherentSignal,
        coupling: OpoCoupling,
        drive: OpoDrive,
    },
    /// Phase-diffused seed at `φ = 0` through the OPO.
    OpoDiffused {
        beta: f64,
        noise: PhaseDiffusion,
        coupling: OpoCoupling,
        drive: OpoDrive,
    },
}

impl StateSpec {
    /// The analytic moments this sampler is validated against.
    pub fn analytic_moments(&self) -> Result<QuadratureMoments> {
        match *self {
            StateSpec::Coherent { signal } => Ok(coherent_moments(signal)),
            StateSpec::Diffused { signal, noise } => Ok(diffused_moments(signal, noise)),
            StateSpec::OpoOutput {
                signal,
                coupling,
                drive,
            } => Ok(opo_output_moments(signal, coupling, drive)),
            StateSpec::OpoDiffused {
                beta,
                noise,
                coupling,
                drive,
            } => opo_diffused_moments(beta, noise, coupling, drive),
        }
    }

    /// Phase distribution and conditional-moment template.
    fn sampling_parts(&self) -> (f64, f64, CondTemplate) {
        match *self {
            StateSpec::Coherent { signal } => (
                signal.phi(),
                0.0,
                CondTemplate::coherent(signal.beta()),
            ),
            StateSpec::Diffused { signal, noise } => (
                signal.phi(),
                noise.sigma(),
                CondTemplate::coherent(signal.beta()),
            ),
            StateSpec::OpoOutput {
                signal,
                coupling,
                drive,
            } => (
                signal.phi(),
                0.0,
                CondTemplate::opo(signal.beta(), coupling, drive),
            ),
            StateSpec::OpoDiffused {
                beta,
                noise,
                coupling,
                drive,
            } => (0.0, noise.sigma(), CondTemplate::opo(beta, coupling, drive)),
        }
    }
}

/// Conditional moments as a function of the drawn phase:
/// `(a_x cos φ, a_y sin φ, v_x, v_y)`.
#[derive(Debug, Clone, Copy)]
struct CondTemplate {
    amp_x: f64,
    amp_y: f64,
    var_x: f64,
    var_y: f64,
}

impl CondTemplate {
    fn coherent(beta: f64) -> Self {
        Self {
            amp_x: 2.0 * beta,
            amp_y: 2.0 * beta,
            var_x: 1.0,
            var_y: 1.0,
        }
    }

    fn opo(beta: f64, coupling: OpoCoupling, drive: OpoDrive) -> Self {
        let f = opo_factors(beta, coupling, drive);
        Self {
            amp_x: f.alpha_x,
            amp_y: f.alpha_y,
            var_x: f.var_x,
            var_y: f.var_y,
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 keystream for one `(seed, stream)` pair.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mixed_seed = splitmix64(&mut state);
    state = mixed_seed ^ stream.wrapping_mul(0xD134_2543_DE82_EF95);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    <ChaCha8Rng as rand_chacha::rand_core::SeedableRng>::from_seed(key)
}

/// Uniform in the open interval `(0, 1)` from one `u64`.
pub(crate) fn uniform_open01(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard-normal draws via the inverse CDF of the stream's uniforms.
struct GaussianStream {
    rng: ChaCha8Rng,
    normal: Normal,
}

impl GaussianStream {
    fn new(seed: u64, stream: u64) -> Self {
        Self {
            rng: stream_rng(seed, stream),
            normal: Normal::standard(),
        }
    }

    fn next(&mut self) -> f64 {
        self.normal.inverse_cdf(uniform_open01(self.rng.next_u64()))
    }
}

/// Draw `n` homodyne samples of `x_θ` from one stream.
///
/// Every sample consumes exactly two normal draws (phase, then quadrature),
/// so zero-noise states replay the matching diffused stream bit for bit.
pub fn sample_quadrature_stream(
    state: &StateSpec,
    angle: f64,
    seed: u64,
    stream: u64,
    n_samples: usize,
) -> Result<Vec<f64>> {
    if !angle.is_finite() {
        return Err(Error::NonFiniteAngle { angle });
    }
    if n_samples < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: n_samples,
        });
    }
    let (phi0, sigma, template) = state.sampling_parts();
    let (sin_a, cos_a) = angle.sin_cos();
    let cos2 = cos_a * cos_a;
    let sin2 = sin_a * sin_a;
    let mut draws = GaussianStream::new(seed, stream);
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let phi = phi0 + sigma * draws.next();
        let (sin_phi, cos_phi) = phi.sin_cos();
        let mean_theta =
            template.amp_x * cos_phi * cos_a + template.amp_y * sin_phi * sin_a;
        let var_theta = template.var_x * cos2 + template.var_y * sin2;
        samples.push(mean_theta + var_theta.sqrt() * draws.next());
    }
    Ok(samples)
}

/// Draw `config.n_samples` homodyne samples of `x_θ` (stream 0).
pub fn sample_quadrature(
    state: &StateSpec,
    angle: f64,
    config: &SamplerConfig,
) -> Result<Vec<f64>> {
    sample_quadrature_stream(state, angle, config.seed, 0, config.n_samples)
}

/// Sample mean and unbiased variance with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    /// Unbiased (n−1 denominator) sample variance.
    pub variance: f64,
    /// `√(variance/n)`.
    pub std_error_mean: f64,
    /// `variance·√(2/(n−1))`; Gaussian approximation, slightly optimistic
    /// for the phase-mixture states.
    pub std_error_variance: f64,
}

/// Two-pass mean/variance estimate.
pub fn estimate_moments(samples: &[f64]) -> Result<MomentEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: n,
        });
    }
    let n_f = n as f64;
    let mean = samples.iter().sum::<f64>() / n_f;
    let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n_f - 1.0);
    Ok(MomentEstimate {
        mean,
        variance,
        std_error_mean: (variance / n_f).sqrt(),
        std_error_variance: variance * (2.0 / (n_f - 1.0)).sqrt(),
    })
}

/// Result of the repeated two-copy phase-estimation experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorExperiment {
    /// `n_samples · var_batches[φ̂]`; converges to the single-shot analytic
    /// `var[φ̂]` once `n_samples` is deep in the error-propagation regime.
    pub scaled_variance: f64,
    /// Standard error of `scaled_variance` across batches.
    pub std_error: f64,
    /// Mean of the per-batch phase estimates.
    pub phi_hat_mean: f64,
    pub n_samples: usize,
    pub n_batches: usize,
}

/// Repeated two-copy experiment: per batch, average `n_samples` of `x` and
/// (independently) of `y`, form `φ̂ = atan2(ȳ, x̄)`, then take the variance of
/// `φ̂` across batches.
///
/// Batch `b` owns streams `2b` (for `x`) and `2b + 1` (for `y`), so the
/// result does not depend on how batches are scheduled.
pub fn mc_phase_estimator_experiment(
    state: &StateSpec,
    config: &SamplerConfig,
) -> Result<EstimatorExperiment> {
    if config.n_batches < 100 {
        return Err(Error::InsufficientSamples {
            required: 100,
            actual: config.n_batches,
        });
    }
    let phi_hats = (0..config.n_batches)
        .into_par_iter()
        .map(|batch| -> Result<f64> {
            let stream = 2 * batch as u64;
            let x = sample_quadrature_stream(state, 0.0, config.seed, stream, config.n_samples)?;
            let y = sample_quadrature_stream(
                state,
                std::f64::consts::FRAC_PI_2,
                config.seed,
                stream + 1,
                config.n_samples,
            )?;
            let x_bar = x.iter().sum::<f64>() / config.n_samples as f64;
            let y_bar = y.iter().sum::<f64>() / config.n_samples as f64;
            Ok(y_bar.atan2(x_bar))
        })
        .collect::<Result<Vec<_>>>()?;

    let est = estimate_moments(&phi_hats)?;
    let scaled_variance = config.n_samples as f64 * est.variance;
    Ok(EstimatorExperiment {
        scaled_variance,
        std_error: config.n_samples as f64 * est.std_error_variance,
        phi_hat_mean: est.mean,
        n_samples: config.n_samples,
        n_batches: config.n_batches,
    })
}

/// One empirical-vs-analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRow {
    pub quantity: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    /// `(empirical − analytic) / std_error`.
    pub z: f64,
}

/// Sample the `x` (stream 0) and `y` (stream 1) quadratures and compare all
/// four first and second moments against the analytic values.
pub fn calibration_report(
    state: &StateSpec,
    config: &SamplerConfig,
) -> Result<Vec<CalibrationRow>> {
    let analytic = state.analytic_moments()?;
    let (x_est, y_est) = rayon::join(
        || {
            sample_quadrature_stream(state, 0.0, config.seed, 0, config.n_samples)
                .and_then(|s| estimate_moments(&s))
        },
        || {
            sample_quadrature_stream(
                state,
                std::f64::consts::FRAC_PI_2,
                config.seed,
                1,
                config.n_samples,
            )
            .and_then(|s| estimate_moments(&s))
        },
    );
    let (x_est, y_est) = (x_est?, y_est?);

    let row = |quantity, analytic_value: f64, empirical: f64, std_error: f64| CalibrationRow {
        quantity,
        analytic: analytic_value,
        empirical,
        std_error,
        z: (empirical - analytic_value) / std_error,
    };
    Ok(vec![
        row("mean_x", analytic.mean_x, x_est.mean, x_est.std_error_mean),
        row("var_x", analytic.var_x, x_est.variance, x_est.std_error_variance),
        row("mean_y", analytic.mean_y, y_est.mean, y_est.std_error_mean),
        row("var_y", analytic.var_y, y_est.variance, y_est.std_error_variance),
    ])
}
