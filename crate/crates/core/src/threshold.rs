//! When does the OPO help? Phase-estimator variance with the OPO in the path,
//! the advantage over the bare channel, and the noise threshold `σ_th` above
//! which the OPO wins.
//!
//! Equating the estimator variance without the OPO,
//! `[cosh σ² + (1 + 4β²) sinh σ²]/(4β²)`, to the one with it,
//! `[Σ²y + α²y e^{−σ²} sinh σ²]/(α²x e^{−σ²})`, collapses to
//! `e^{2σ²} = ρ` with
//!
//! ```text
//! ρ = 2β² (α²x − α²y) / [α²x + 2β² (α²x − α²y − 2Σ²y)],
//! ```
//!
//! so a crossing exists iff `ρ > 1`, at `σ_th = √(½ ln ρ)`. When no crossing
//! exists the sign of the advantage at a probe noise level classifies the
//! configuration as always or never beneficial. A brute-force grid scan plus
//! bisection serves as an independent check of the closed form and must agree
//! with it everywhere.

use crate::error::{Error, Result};
use crate::opo::{opo_factors, OpoCoupling, OpoDrive};
use crate::signal::{phase_variance_no_opo, MAX_SIGMA_SQ};

/// Probe noise level used to classify configurations without a crossing.
pub const SIGMA_PROBE: f64 = 0.5;

/// |advantage| below this (relative to the bare variance) counts as zero.
const NEUTRAL_TOL: f64 = 1e-12;

/// Bisection refines the crossing bracket below this width (radians).
const BISECT_TOL: f64 = 1e-10;

/// Closed form and bisection must agree on `σ_th` to this (radians).
pub const AGREEMENT_TOL: f64 = 1e-8;

/// Outcome of the with/without-OPO comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// The OPO helps exactly above this noise amplitude (radians).
    Threshold { sigma_th: f64 },
    /// The OPO lowers the estimator variance for every noise amplitude.
    AlwaysBeneficial,
    /// The OPO never lowers the estimator variance.
    NeverBeneficial,
    /// Identity channel: the comparison is a tie at every noise amplitude.
    Neutral,
}

impl Classification {
    pub fn sigma_th(&self) -> Option<f64> {
        match self {
            Classification::Threshold { sigma_th } => Some(*sigma_th),
            _ => None,
        }
    }
}

/// How a [`ThresholdResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub classification: Classification,
    pub method: Method,
}

/// Estimator variance with the OPO in the path (seed at `φ = 0`),
/// `[Σ²y + α²y e^{−σ²} sinh σ²] / (α²x e^{−σ²})`.
pub fn phase_variance_with_opo(
    beta: f64,
    sigma: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> Result<f64> {
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
    let f = opo_factors(beta, coupling, drive);
    let e1 = (-s).exp();
    let e2 = (-2.0 * s).exp();
    let var_y = f.var_y + f.alpha_y * f.alpha_y * 0.5 * (1.0 - e2);
    Ok(var_y / (f.alpha_x * f.alpha_x * e1))
}

/// `var[φ̂]` without the OPO minus `var[φ̂]` with it; positive means the OPO
/// helps at this noise level.
pub fn variance_advantage(
    beta: f64,
    sigma: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> Result<f64> {
    Ok(phase_variance_no_opo(beta, sigma)? - phase_variance_with_opo(beta, sigma, coupling, drive)?)
}

/// Classify at the probe noise level; used when the crossing equation is
/// degenerate or has no solution.
fn classify_by_probe(beta: f64, coupling: OpoCoupling, drive: OpoDrive) -> Result<Classification> {
    let advantage = variance_advantage(beta, SIGMA_PROBE, coupling, drive)?;
    let scale = phase_variance_no_opo(beta, SIGMA_PROBE)?.max(1.0);
    Ok(if advantage.abs() <= NEUTRAL_TOL * scale {
        Classification::Neutral
    } else if advantage > 0.0 {
        Classification::AlwaysBeneficial
    } else {
        Classification::NeverBeneficial
    })
}

/// Closed-form threshold classification.
///
/// `ρ > 1` yields `Threshold(√(½ ln ρ))`; otherwise the sign of the advantage
/// at [`SIGMA_PROBE`] decides. A pump-off drive makes `α_x = α_y`, so no
/// crossing can exist and the probe alone classifies.
pub fn threshold_closed_form(
    beta: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
) -> Result<ThresholdResult> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::NonPositiveAmplitude { beta });
    }
    let classification = if drive.d() == 0.0 {
        classify_by_probe(beta, coupling, drive)?
    } else {
        let f = opo_factors(beta, coupling, drive);
        let ax2 = f.alpha_x * f.alpha_x;
        let ay2 = f.alpha_y * f.alpha_y;
        let two_beta_sq = 2.0 * beta * beta;
        let num = two_beta_sq * (ax2 - ay2);
        let den = ax2 + two_beta_sq * (ax2 - ay2 - 2.0 * f.var_y);
        if den <= 0.0 {
            classify_by_probe(beta, coupling, drive)?
        } else {
            let rho = num / den;
            if rho > 1.0 {
                Classification::Threshold {
                    sigma_th: (0.5 * rho.ln()).sqrt(),
                }
            } else {
                classify_by_probe(beta, coupling, drive)?
            }
        }
    };
    Ok(ThresholdResult {
        classification,
        method: Method::ClosedForm,
    })
}

/// Scan grid for the brute-force threshold search, `min + k·step ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for SigmaGrid {
    /// Spans `[1e−4, 2.0]` rad; beyond 2 rad the phase is effectively
    /// uniform and the comparison is physically uninteresting.
    fn default() -> Self {
        Self {
            min: 1e-4,
            max: 2.0,
            step: 0.01,
        }
    }
}

impl SigmaGrid {
    fn validate(&self) -> Result<()> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.min >= 0.0
            && self.max > self.min
            && self.step > 0.0;
        if !ok {
            return Err(Error::InvalidGrid {
                reason: format!("sigma grid [{}, {}] step {}", self.min, self.max, self.step),
            });
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        grid_points(self.min, self.max, self.step)
    }
}

/// Inclusive arithmetic grid, robust to floating-point endpoint drift.
fn grid_points(min: f64, max: f64, step: f64) -> Vec<f64> {
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|k| min + k as f64 * step).collect()
}

fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] * w[1] < 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Brute-force threshold search: scan the advantage over `grid`, bisect a
/// single sign change to below `BISECT_TOL` (1e−10 rad).
///
/// Zero sign changes classify by the common sign (or as [`Classification::Neutral`]
/// when the advantage vanishes everywhere on the grid); more than one sign
/// change is a modeling bug and reported as [`Error::MultipleCrossings`].
pub fn threshold_bisection(
    beta: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
    grid: SigmaGrid,
) -> Result<ThresholdResult> {
    grid.validate()?;
    let points = grid.points();
    let values = points
        .iter()
        .map(|&sigma| variance_advantage(beta, sigma, coupling, drive))
        .collect::<Result<Vec<_>>>()?;

    let all_negligible = values.iter().zip(&points).all(|(v, &sigma)| {
        v.abs() <= NEUTRAL_TOL * phase_variance_no_opo(beta, sigma).unwrap_or(1.0).max(1.0)
    });
    let changes = sign_changes(&values);

    let classification = if all_negligible {
        Classification::Neutral
    } else {
        match changes.len() {
            0 => {
                if values[values.len() - 1] > 0.0 {
                    Classification::AlwaysBeneficial
                } else {
                    Classification::NeverBeneficial
                }
            }
            1 => {
                let i = changes[0];
                let advantage =
                    |sigma: f64| variance_advantage(beta, sigma, coupling, drive).unwrap();
                let (mut lo, mut hi) = (points[i], points[i + 1]);
                let mut f_lo = values[i];
                while hi - lo > BISECT_TOL {
                    let mid = 0.5 * (lo + hi);
                    let f_mid = advantage(mid);
                    if f_lo * f_mid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        f_lo = f_mid;
                    }
                }
                Classification::Threshold {
                    sigma_th: 0.5 * (lo + hi),
                }
            }
            n => return Err(Error::MultipleCrossings { count: n }),
        }
    };
    Ok(ThresholdResult {
        classification,
        method: Method::Bisection,
    })
}

/// Gain axis of a sweep, `min + k·step ≤ max`, all gains ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GainRange {
    fn validate(&self) -> Result<()> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.min >= 1.0
            && self.max >= self.min
            && self.step > 0.0;
        if !ok {
            return Err(Error::InvalidGrid {
                reason: format!("gain range [{}, {}] step {}", self.min, self.max, self.step),
            });
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        grid_points(self.min, self.max, self.step)
    }
}

/// Axes of a threshold-vs-gain sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub gain_range: GainRange,
    pub betas: Vec<f64>,
    pub coupling: OpoCoupling,
    pub sigma_grid: SigmaGrid,
}

/// One `(gain, beta)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub gain: f64,
    pub beta: f64,
    pub eta_in: f64,
    pub eta_esc: f64,
    /// Closed-form classification for this cell.
    pub classification: Classification,
    /// Whether the bisection oracle agreed (see [`methods_agree`]).
    pub methods_agree: bool,
}

/// Agreement between the closed form and the grid-limited bisection: equal
/// classifications with thresholds within [`AGREEMENT_TOL`], or a closed-form
/// threshold beyond the scan range that the scan necessarily reports as
/// never-beneficial.
pub fn methods_agree(closed: &Classification, scanned: &Classification, grid: &SigmaGrid) -> bool {
    match (closed, scanned) {
        (
            Classification::Threshold { sigma_th: a },
            Classification::Threshold { sigma_th: b },
        ) => (a - b).abs() <= AGREEMENT_TOL,
        (Classification::Threshold { sigma_th }, Classification::NeverBeneficial) => {
            *sigma_th > grid.max
        }
        (a, b) => a == b,
    }
}

/// Evaluate the threshold classification over a gain × beta grid.
///
/// Rows come out sorted by `(gain, beta)`; each row records whether the
/// bisection oracle agreed with the closed form.
pub fn threshold_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.gain_range.validate()?;
    spec.sigma_grid.validate()?;
    if spec.betas.is_empty() || spec.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::InvalidGrid {
            reason: "beta list must be non-empty and strictly positive".into(),
        });
    }

    let mut betas = spec.betas.clone();
    betas.sort_by(f64::total_cmp);

    let mut rows = Vec::new();
    for gain in spec.gain_range.points() {
        let drive = OpoDrive::from_gain(gain)?;
        for &beta in &betas {
            let closed = threshold_closed_form(beta, spec.coupling, drive)?;
            let scanned = threshold_bisection(beta, spec.coupling, drive, spec.sigma_grid)?;
            rows.push(SweepRow {
                gain,
                beta,
                eta_in: spec.coupling.eta_in(),
                eta_esc: spec.coupling.eta_esc(),
                classification: closed.classification,
                methods_agree: methods_agree(
                    &closed.classification,
                    &scanned.classification,
                    &spec.sigma_grid,
                ),
            });
        }
    }
    rows.sort_by(|a, b| a.gain.total_cmp(&b.gain).then(a.beta.total_cmp(&b.beta)));
    Ok(rows)
}

/// One point of a variance-vs-noise curve pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePoint {
    /// Noise amplitude, radians.
    pub sigma: f64,
    pub var_no_opo: f64,
    pub var_with_opo: f64,
}

/// Both estimator-variance curves over a noise grid, for plotting and for
/// locating the crossing visually.
pub fn variance_curves(
    beta: f64,
    coupling: OpoCoupling,
    drive: OpoDrive,
    grid: SigmaGrid,
) -> Result<Vec<VariancePoint>> {
    grid.validate()?;
    grid.points()
        .into_iter()
        .map(|sigma| {
            Ok(VariancePoint {
                sigma,
                var_no_opo: phase_variance_no_opo(beta, sigma)?,
                var_with_opo: phase_variance_with_opo(beta, sigma, coupling, drive)?,
            })
        })
        .collect()
}

/// Configuration-A parameters (published operating point with a threshold).
#[cfg(test)]
pub(crate) fn config_a() -> (f64, OpoCoupling, OpoDrive) {
    (
        5.70,
        OpoCoupling::new(0.008, 0.937).unwrap(),
        OpoDrive::from_gain(2.75).unwrap(),
    )
}

/// Configuration-B parameters (published operating point without one).
#[cfg(test)]
pub(crate) fn config_b() -> (f64, OpoCoupling, OpoDrive) {
    (
        2.05,
        OpoCoupling::new(0.079, 0.871).unwrap(),
        OpoDrive::from_gain(3.12).unwrap(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opo::opo_diffused_moments;
    use crate::signal::{estimate_phase, PhaseDiffusion};
    

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual}"
        );
    }

    #[test]
    fn with_opo_variance_config_a() {
        let (beta, coupling, drive) = config_a();
        assert_close(
            phase_variance_with_opo(beta, 0.0, coupling, drive).unwrap(),
            0.022171888109975674,
            1e-14,
        );
        assert_close(
            phase_variance_with_opo(beta, 14.8_f64.to_radians(), coupling, drive).unwrap(),
            0.036143707632788165,
            1e-14,
        );
    }

    #[test]
    fn identity_channel_matches_bare_variance() {
        let coupling = OpoCoupling::new(0.5, 0.5).unwrap();
        let drive = OpoDrive::new(0.0).unwrap();
        assert_close(
            phase_variance_with_opo(2.0, 0.0, coupling, drive).unwrap(),
            0.0625,
            1e-15,
        );
        for sigma in [0.1, 0.5, 1.0] {
            let advantage = variance_advantage(2.0, sigma, coupling, drive).unwrap();
            assert!(advantage.abs() < 1e-14, "sigma={sigma}: {advantage}");
        }
    }

    #[test]
    fn with_opo_variance_matches_estimator_chain() {
        let configs = [config_a(), config_b()];
        for (beta, coupling, drive) in configs {
            for sigma in [0.01, 0.1, 0.5, 1.0] {
                let direct = phase_variance_with_opo(beta, sigma, coupling, drive).unwrap();
                let moments = opo_diffused_moments(
                    beta,
                    PhaseDiffusion::new(sigma).unwrap(),
                    coupling,
                    drive,
                )
                .unwrap();
                let chained = estimate_phase(moments).unwrap().variance;
                assert!(
                    (direct - chained).abs() <= 1e-12 * direct,
                    "beta={beta} sigma={sigma}: {direct} vs {chained}"
                );
            }
        }
    }

    #[test]
    fn advantage_signs_at_zero_noise() {
        let (beta_a, coupling_a, drive_a) = config_a();
        assert_close(
            variance_advantage(beta_a, 0.0, coupling_a, drive_a).unwrap(),
            -0.014477212825272688,
            1e-14,
        );
        let (beta_b, coupling_b, drive_b) = config_b();
        assert_close(
            variance_advantage(beta_b, 0.0, coupling_b, drive_b).unwrap(),
            0.041_145_648_218_684_57,
            1e-14,
        );
    }

    #[test]
    fn closed_form_config_a_has_threshold() {
        let (beta, coupling, drive) = config_a();
        let result = threshold_closed_form(beta, coupling, drive).unwrap();
        let sigma_th = result.classification.sigma_th().expect("threshold");
        assert_close(sigma_th, 0.13459878365026663, 1e-12);
        assert_close(sigma_th.to_degrees(), 7.7119422307547467, 1e-10);
    }

    #[test]
    fn closed_form_config_b_always_beneficial() {
        let (beta, coupling, drive) = config_b();
        let result = threshold_closed_form(beta, coupling, drive).unwrap();
        assert_eq!(result.classification, Classification::AlwaysBeneficial);
    }

    #[test]
    fn pump_off_classifications() {
        let drive = OpoDrive::new(0.0).unwrap();
        let identity = threshold_closed_form(2.0, OpoCoupling::new(0.5, 0.5).unwrap(), drive)
            .unwrap()
            .classification;
        assert_eq!(identity, Classification::Neutral);
        let lossy = threshold_closed_form(2.0, OpoCoupling::new(0.4, 0.5).unwrap(), drive)
            .unwrap()
            .classification;
        assert_eq!(lossy, Classification::NeverBeneficial);
    }

    #[test]
    fn deep_pump_is_always_beneficial() {
        let (beta, coupling, _) = config_a();
        let drive = OpoDrive::new(0.9).unwrap();
        let closed = threshold_closed_form(beta, coupling, drive).unwrap();
        assert_eq!(closed.classification, Classification::AlwaysBeneficial);
        let scanned =
            threshold_bisection(beta, coupling, drive, SigmaGrid::default()).unwrap();
        assert_eq!(scanned.classification, Classification::AlwaysBeneficial);
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        for (beta, coupling, drive) in [config_a(), config_b()] {
            let closed = threshold_closed_form(beta, coupling, drive).unwrap();
            let scanned =
                threshold_bisection(beta, coupling, drive, SigmaGrid::default()).unwrap();
            assert!(
                methods_agree(
                    &closed.classification,
                    &scanned.classification,
                    &SigmaGrid::default()
                ),
                "{closed:?} vs {scanned:?}"
            );
            if let (Some(a), Some(b)) = (
                closed.classification.sigma_th(),
                scanned.classification.sigma_th(),
            ) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn bisection_neutral_on_identity_channel() {
        let result = threshold_bisection(
            2.0,
            OpoCoupling::new(0.5, 0.5).unwrap(),
            OpoDrive::new(0.0).unwrap(),
            SigmaGrid::default(),
        )
        .unwrap();
        assert_eq!(result.classification, Classification::Neutral);
    }

    #[test]
    fn scan_detects_multiple_crossings() {
        // Synthetic wiggle; the physical advantage curve never does this.
        let values = [-1.0, 1.0, -1.0, 1.0];
        assert_eq!(sign_changes(&values).len(), 3);
        let single = [-1.0, -0.5, 0.5, 1.0];
        assert_eq!(sign_changes(&single), vec![1]);
    }

    #[test]
    fn sweep_rows_sorted_and_consistent() {
        let (beta_b, coupling_b, drive_b) = config_b();
        let spec = SweepSpec {
            gain_range: GainRange {
                min: drive_b.gain(),
                max: drive_b.gain(),
                step: 1.0,
            },
            betas: vec![beta_b],
            coupling: coupling_b,
            sigma_grid: SigmaGrid::default(),
        };
        let rows = threshold_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].classification, Classification::AlwaysBeneficial);
        assert!(rows[0].methods_agree);

        let spec = SweepSpec {
            gain_range: GainRange {
                min: 1.0,
                max: 2.0,
                step: 0.5,
            },
            betas: vec![2.0, 1.0],
            coupling: OpoCoupling::new(0.08, 0.87).unwrap(),
            sigma_grid: SigmaGrid::default(),
        };
        let rows = threshold_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        for w in rows.windows(2) {
            assert!(
                (w[0].gain, w[0].beta) <= (w[1].gain, w[1].beta),
                "rows out of order"
            );
        }
        assert!(rows.iter().all(|r| r.methods_agree));
        // Pump-off rows classify through the advantage probe alone.
        assert_eq!(rows[0].gain, 1.0);
        assert_eq!(rows[0].classification, Classification::NeverBeneficial);
    }

    #[test]
    fn variance_curves_cross_at_the_threshold() {
        let (beta, coupling, drive) = config_a();
        let grid = SigmaGrid {
            min: 0.0,
            max: 30.0_f64.to_radians(),
            step: 0.5_f64.to_radians(),
        };
        let curves = variance_curves(beta, coupling, drive, grid).unwrap();
        let sigma_th = threshold_closed_form(beta, coupling, drive)
            .unwrap()
            .classification
            .sigma_th()
            .unwrap();
        let crossing = curves
            .windows(2)
            .find(|w| {
                (w[0].var_no_opo - w[0].var_with_opo) * (w[1].var_no_opo - w[1].var_with_opo) < 0.0
            })
            .expect("curves must cross");
        assert!(
            crossing[0].sigma <= sigma_th && sigma_th <= crossing[1].sigma,
            "crossing bracket [{}, {}] misses sigma_th {}",
            crossing[0].sigma,
            crossing[1].sigma,
            sigma_th
        );
    }

    #[test]
    fn variance_curves_config_b_strictly_below() {
        let (beta, coupling, drive) = config_b();
        let grid = SigmaGrid {
            min: 0.0,
            max: 30.0_f64.to_radians(),
            step: 0.5_f64.to_radians(),
        };
        for point in variance_curves(beta, coupling, drive, grid).unwrap() {
            assert!(
                point.var_with_opo < point.var_no_opo,
                "not strictly below at sigma={}",
                point.sigma
            );
        }
    }

    #[test]
    fn identity_channel_curves_coincide() {
        let curves = variance_curves(
            2.0,
            OpoCoupling::new(0.5, 0.5).unwrap(),
            OpoDrive::new(0.0).unwrap(),
            SigmaGrid::default(),
        )
        .unwrap();
        for point in curves {
            assert!((point.var_no_opo - point.var_with_opo).abs() <= 1e-12 * point.var_no_opo);
        }
    }
}
