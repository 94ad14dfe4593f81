//! Coherent signals, the Gaussian phase-diffusion channel, and the
//! two-quadrature phase estimator.
//!
//! Quadrature convention: `x = a + a†`, `y = i(a† − a)`, so a coherent state
//! `|β e^{iφ}⟩` has means `(2β cos φ, 2β sin φ)` and unit variances. Phase
//! diffusion replaces the phase by `φ + δ` with `δ ~ N(0, σ²)`; averaging the
//! coherent moments over the Gaussian kernel gives (at `φ = 0`)
//!
//! ```text
//! ⟨x⟩ = 2β e^{−σ²/2},                ⟨y⟩ = 0,
//! var[x] = 1 + 2β² (1 − e^{−σ²})²,  var[y] = 1 + 2β² (1 − e^{−2σ²}),
//! ```
//!
//! since `E[cos kδ] = e^{−k²σ²/2}`. The phase estimate `φ̂ = atan2(⟨y⟩, ⟨x⟩)`
//! carries the first-order propagated variance
//!
//! ```text
//! var[φ̂] = (⟨y⟩² var[x] + ⟨x⟩² var[y]) / (⟨x⟩² + ⟨y⟩²)².
//! ```

use crate::error::{Error, Result};

/// `⟨x⟩² + ⟨y⟩²` below this floor is treated as a zero mean vector.
pub const MEAN_NORM_FLOOR: f64 = 1e-24;

/// Largest `σ²` accepted by the hyperbolic-moment formulas.
pub const MAX_SIGMA_SQ: f64 = 700.0;

/// Wrap an angle to the interval `(−π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let r = phi.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r - tau
    } else {
        r
    }
}

/// Input coherent state `|β e^{iφ}⟩` with `β ≥ 0`.
///
/// The phase is stored wrapped to `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentSignal {
    beta: f64,
    phi: f64,
}

impl CoherentSignal {
    pub fn new(beta: f64, phi: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::NegativeAmplitude { beta });
        }
        if !phi.is_finite() {
            return Err(Error::NonFiniteAngle { angle: phi });
        }
        Ok(Self {
            beta,
            phi: wrap_angle(phi),
        })
    }

    /// Amplitude `β` (dimensionless, √photon-number scale).
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Phase in radians, in `(−π, π]`.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Gaussian phase-noise amplitude `σ` (standard deviation of the kernel).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiffusion {
    sigma: f64,
}

impl PhaseDiffusion {
    pub fn new(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::NegativeNoise { sigma });
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Kernel variance `σ²`.
    pub fn sigma_sq(&self) -> f64 {
        self.sigma * self.sigma
    }
}

/// First and second moments of the `x` and `y` quadratures
/// (`x = a + a†` convention, vacuum variance 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl QuadratureMoments {
    pub fn new(mean_x: f64, mean_y: f64, var_x: f64, var_y: f64) -> Result<Self> {
        let finite =
            mean_x.is_finite() && mean_y.is_finite() && var_x.is_finite() && var_y.is_finite();
        if !finite || var_x <= 0.0 || var_y <= 0.0 {
            return Err(Error::NonPositiveVariance { var_x, var_y });
        }
        Ok(Self {
            mean_x,
            mean_y,
            var_x,
            var_y,
        })
    }

    /// Moments produced by the model itself; invariants hold by construction.
    pub(crate) fn from_parts(mean_x: f64, mean_y: f64, var_x: f64, var_y: f64) -> Self {
        debug_assert!(var_x > 0.0 && var_y > 0.0);
        Self {
            mean_x,
            mean_y,
            var_x,
            var_y,
        }
    }

    /// `var[x]·var[y]`; at least 1 for every state this crate produces.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x * self.var_y
    }
}

/// Phase estimate `φ̂` with its single-shot propagated variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    /// Estimated phase in `(−π, π]`.
    pub phi_hat: f64,
    /// First-order propagated variance, radians².
    pub variance: f64,
}

/// Moments of a noiseless coherent state: `(2β cos φ, 2β sin φ, 1, 1)`.
pub fn coherent_moments(signal: CoherentSignal) -> QuadratureMoments {
    let amp = 2.0 * signal.beta();
    QuadratureMoments::from_parts(
        amp * signal.phi().cos(),
        amp * signal.phi().sin(),
        1.0,
        1.0,
    )
}

/// Moments after Gaussian phase diffusion of amplitude `σ`.
///
/// Computed in the frame where the signal mean lies on the `x` axis and
/// rotated back, so only the marginal variances are reported; the `xy`
/// covariance picked up at `φ ≠ 0` is outside the model.
pub fn diffused_moments(signal: CoherentSignal, noise: PhaseDiffusion) -> QuadratureMoments {
    let beta = signal.beta();
    let s = noise.sigma_sq();
    let e1 = (-s).exp();
    let e2 = (-2.0 * s).exp();

    // Frame-aligned moments (signal mean on the x axis).
    let mean_r = 2.0 * beta * (-0.5 * s).exp();
    let var_par = 1.0 + 2.0 * beta * beta * (1.0 - e1) * (1.0 - e1);
    let var_perp = 1.0 + 2.0 * beta * beta * (1.0 - e2);

    let (sin_phi, cos_phi) = signal.phi().sin_cos();
    QuadratureMoments::from_parts(
        mean_r * cos_phi,
        mean_r * sin_phi,
        var_par * cos_phi * cos_phi + var_perp * sin_phi * sin_phi,
        var_par * sin_phi * sin_phi + var_perp * cos_phi * cos_phi,
    )
}

/// Phase estimate from quadrature means with first-order error propagation.
pub fn estimate_phase(moments: QuadratureMoments) -> Result<PhaseEstimate> {
    let QuadratureMoments {
        mean_x,
        mean_y,
        var_x,
        var_y,
    } = moments;
    let norm_sq = mean_x * mean_x + mean_y * mean_y;
    if norm_sq.is_nan() || norm_sq < MEAN_NORM_FLOOR {
        return Err(Error::ZeroMeanVector { norm_sq });
    }
    let variance = (mean_y * mean_y * var_x + mean_x * mean_x * var_y) / (norm_sq * norm_sq);
    Ok(PhaseEstimate {
        phi_hat: wrap_angle(mean_y.atan2(mean_x)),
        variance,
    })
}

/// Closed-form phase-estimator variance of a diffused coherent state,
/// `[cosh σ² + (1 + 4β²) sinh σ²] / (4β²)`.
///
/// Equals `estimate_phase(diffused_moments(..))` at `φ = 0`; reduces to
/// `1/(4β²)` at `σ = 0`.
pub fn phase_variance_no_opo(beta: f64, sigma: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::NonPositiveAmplitude { beta });
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::NegativeNoise { sigma });
    }
    let s = sigma * sigma;
    if s > MAX_SIGMA_SQ {
        return Err(Error::OutOfModelRange { sigma_sq: s });
    }
    let energy = 4.0 * beta * beta;
    Ok((s.cosh() + (1.0 + energy) * s.sinh()) / energy)
}
