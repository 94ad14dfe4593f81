//! Degenerate OPO below threshold: cavity couplings, pump drive, and the
//! phase-sensitive transformation of quadrature moments.
//!
//! The cavity is summarized by the input and escape efficiencies
//! `η_in = γ_ic / γ` and `η_esc = γ_oc / γ`, with total loss rate
//! `γ = γ_ic + γ_oc + 2γ_cr` built from the input-coupler, output-coupler,
//! and crystal loss rates. The pump sits below the oscillation threshold at
//! amplitude ratio `d = √(P/P_th)`, giving gain `G = (1 − d)⁻²`. The pump
//! phase is locked so the `x` quadrature is amplified:
//!
//! ```text
//! ⟨x⟩ = √(4 η_in η_esc)/(1 − d) · 2β cos φ,    var[x] = Σ²x = 1 + η_esc · 4d/(1 − d)²,
//! ⟨y⟩ = √(4 η_in η_esc)/(1 + d) · 2β sin φ,    var[y] = Σ²y = 1 − η_esc · 4d/(1 + d)².
//! ```
//!
//! With Gaussian phase noise of variance `σ²` applied before the cavity the
//! output is the kernel average of the conditional moments above; writing
//! `α_x`, `α_y` for the amplified mean amplitudes at `φ = 0`,
//!
//! ```text
//! ⟨x⟩ = α_x e^{−σ²/2},   var[x] = Σ²x + α²x e^{−σ²}(cosh σ² − 1),
//! ⟨y⟩ = 0,               var[y] = Σ²y + α²y e^{−σ²} sinh σ².
//! ```

use crate::error::{Error, Result};
use crate::signal::{CoherentSignal, PhaseDiffusion, QuadratureMoments, MAX_SIGMA_SQ};

/// Mirror power reflectivities and single-pass crystal loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoMirrorSpec {
    /// Input-coupler power reflectivity, in `[0, 1)`.
    pub r_ic: f64,
    /// Output-coupler power reflectivity, in `[0, 1)`.
    pub r_oc: f64,
    /// Single-pass crystal loss, in `[0, 1)`.
    pub delta_cr: f64,
}

impl OpoMirrorSpec {
    pub fn new(r_ic: f64, r_oc: f64, delta_cr: f64) -> Result<Self> {
        for value in [r_ic, r_oc, delta_cr] {
            if !value.is_finite() || !(0.0..1.0).contains(&value) {
                return Err(Error::InvalidMirrorParameter { value });
            }
        }
        if (1.0 - r_ic) + (1.0 - r_oc) + 2.0 * delta_cr <= 0.0 {
            return Err(Error::ZeroLossCavity);
        }
        Ok(Self {
            r_ic,
            r_oc,
            delta_cr,
        })
    }
}

/// Input and escape efficiencies of the cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoCoupling {
    eta_in: f64,
    eta_esc: f64,
}

impl OpoCoupling {
    /// Requires `η_in > 0`, `η_esc > 0`, and `η_in + η_esc ≤ 1`
    /// (the two couplers cannot account for more than the total loss).
    pub fn new(eta_in: f64, eta_esc: f64) -> Result<Self> {
        let finite = eta_in.is_finite() && eta_esc.is_finite();
        if !finite || eta_in <= 0.0 || eta_esc <= 0.0 || eta_in + eta_esc > 1.0 + 1e-12 {
            return Err(Error::InvalidCoupling { eta_in, eta_esc });
        }
        Ok(Self { eta_in, eta_esc })
    }

    /// Efficiencies from mirror reflectivities, taking the loss rate per pass
    /// proportional to the power loss: `γ_ic = 1 − R_ic`, `γ_oc = 1 − R_oc`,
    /// `γ_cr = Δ`. The proportionality constant cancels in the ratios.
    pub fn from_mirrors(spec: OpoMirrorSpec) -> Result<Self> {
        let gamma_ic = 1.0 - spec.r_ic;
        let gamma_oc = 1.0 - spec.r_oc;
        let gamma = gamma_ic + gamma_oc + 2.0 * spec.delta_cr;
        if gamma <= 0.0 {
            return Err(Error::ZeroLossCavity);
        }
        Self::new(gamma_ic / gamma, gamma_oc / gamma)
    }

    pub fn eta_in(&self) -> f64 {
        self.eta_in
    }

    pub fn eta_esc(&self) -> f64 {
        self.eta_esc
    }

    /// On-resonance power transmissivity `T = 4 η_in η_esc`, the squared
    /// amplitude gain of the cavity with the pump off. Used to normalize
    /// reference measurements taken through the cold cavity.
    pub fn transmissivity(&self) -> f64 {
        4.0 * self.eta_in * self.eta_esc
    }
}

/// Pump amplitude ratio `d = √(P/P_th)`, strictly below threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoDrive {
    d: f64,
}

impl OpoDrive {
    pub fn new(d: f64) -> Result<Self> {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::NegativePump { d });
        }
        if d >= 1.0 {
            return Err(Error::AtOrAboveThreshold { d });
        }
        Ok(Self { d })
    }

    /// Drive from the parametric gain, `d = 1 − G^{−1/2}`.
    pub fn from_gain(gain: f64) -> Result<Self> {
        if !gain.is_finite() || gain < 1.0 {
            return Err(Error::GainBelowUnity { gain });
        }
        Self::new(1.0 - 1.0 / gain.sqrt())
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Parametric gain `G = (1 − d)⁻²`.
    pub fn gain(&self) -> f64 {
        let one_minus = 1.0 - self.d;
        1.0 / (one_minus * one_minus)
    }
}

/// Amplified mean amplitudes and output variances at fixed pump phase.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OpoFactors {
    /// `√(4 η_in η_esc)/(1 − d) · 2β`
    pub alpha_x: f64,
    /// `√(4 η_in η_esc)/(1 + d) · 2β`
    pub alpha_y: f64,
    /// `Σ²x`
    pub var_x: f64,
    /// `Σ²y`
    pub var_y: f64,
}

pub(crate) fn opo_factors(beta: f64, coupling: OpoCoupling, drive: OpoDrive) -> OpoFactors {
    let d = drive.d();
    let root = coupling.transmissivity().sqrt();
    let (var_x, var_y) =
        output_variances(coupling.eta_esc(), drive).expect("coupling invariant");
    OpoFactors {
        alpha_x: root / (1.0 - d) * 2.0 * beta,
        alpha_y: root / (1.0 + d) * 2.0 * beta,
        var_x,
        var_y,
    }
}

/// Output variances `(Σ²x, Σ²y)` of the driven cavity.
///
/// These depend only on the escape efficiency and the drive, so they are
/// exposed without requiring a full coupling; `η_esc = 1` is the lossless
/// limit where the product `Σ²x Σ²y` stays exactly 1.
pub fn output_variances(eta_esc: f64, drive: OpoDrive) -> Result<(f64, f64)> {
    if !eta_esc.is_finite() || eta_esc <= 0.0 || eta_esc > 1.0 {
        return Err(Error::InvalidEscapeEfficiency { eta_esc });
    }
    let d = drive.d();
    Ok((
        1.0 + eta_esc * 4.0 * d / ((1.0 - d) * (1.0 - d)),
        1.0 - eta_esc * 4.0 * d / ((1.0 + d) * (1.0 + d)),
    ))
}

/// Output moments for a noiseless coherent seed.
///
/// The pump phase is fixed to amplify `x`; `x` means grow by
/// `√(4ηη)/(1 − d)`, `y` means by `√(4ηη)/(1 + d)`, and the variances become
/// the (anti)squeezed `Σ²x ≥ 1`, `Σ²y ≤ 1`.
pub fn opo_output_moments(
    signal: CoherentSignal,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> QuadratureMoments {
    let f = opo_factors(signal.beta(), coupling, drive);
    let (sin_phi, cos_phi) = signal.phi().sin_cos();
    QuadratureMoments::from_parts(f.alpha_x * cos_phi, f.alpha_y * sin_phi, f.var_x, f.var_y)
}

/// Deterministic phase compression of the mean vector,
/// `tan θ_d = (1 − d)/(1 + d) · tan θ_0`.
///
/// Implemented with the two-argument arctangent, so the result stays in the
/// quadrant of `θ_0` and `θ_0 = ±π/2` are fixed points. Independent of the
/// signal amplitude.
pub fn phase_compression(theta0: f64, drive: OpoDrive) -> f64 {
    let k = (1.0 - drive.d()) / (1.0 + drive.d());
    let (sin_t, cos_t) = theta0.sin_cos();
    (k * sin_t).atan2(cos_t)
}

/// Moments after phase diffusion followed by the OPO, for a seed at `φ = 0`.
///
/// Kernel-averaging the conditional output over the Gaussian phase adds the
/// mean-spread terms `α²x e^{−σ²}(cosh σ² − 1)` and `α²y e^{−σ²} sinh σ²` on
/// top of `Σ²x`, `Σ²y`.
pub fn opo_diffused_moments(
    beta: f64,
    noise: PhaseDiffusion,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> Result<QuadratureMoments> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::NegativeAmplitude { beta });
    }
    let s = noise.sigma_sq();
    if s > MAX_SIGMA_SQ {
        return Err(Error::OutOfModelRange { sigma_sq: s });
    }
    let f = opo_factors(beta, coupling, drive);
    let e1 = (-s).exp();
    let e2 = (-2.0 * s).exp();
    // e^{−s}(cosh s − 1) = (1 + e^{−2s})/2 − e^{−s};  e^{−s} sinh s = (1 − e^{−2s})/2
    let spread_x = 0.5 * (1.0 + e2) - e1;
    let spread_y = 0.5 * (1.0 - e2);
    Ok(QuadratureMoments::from_parts(
        f.alpha_x * (-0.5 * s).exp(),
        0.0,
        f.var_x + f.alpha_x * f.alpha_x * spread_x,
        f.var_y + f.alpha_y * f.alpha_y * spread_y,
    ))
}
