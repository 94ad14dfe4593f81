//! Output records and formatting: JSON with stable key order, CSV with
//! 6-significant-digit floats.

use oposim::{Classification, OpoCoupling, OpoDrive, QuadratureMoments, SweepRow};
use serde::Serialize;

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(value: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let exponent = value.abs().log10().floor() as i32;
    if exponent < -4 || exponent >= sig as i32 {
        format!("{:.*e}", sig - 1, value)
    } else {
        let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        format!("{value:.decimals$}")
    }
}

/// Round to `sig` significant digits (for report fields quoted at fixed
/// precision).
pub fn round_sig(value: f64, sig: usize) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    format!("{:.*e}", sig - 1, value).parse().unwrap()
}

/// Stable name used in CSV and JSON for a classification.
pub fn classification_name(classification: &Classification) -> &'static str {
    match classification {
        Classification::Threshold { .. } => "threshold",
        Classification::AlwaysBeneficial => "always_beneficial",
        Classification::NeverBeneficial => "never_beneficial",
        Classification::Neutral => "neutral",
    }
}

#[derive(Debug, Serialize)]
pub struct MomentsRecord {
    pub beta: f64,
    pub phi_rad: f64,
    pub phi_deg: f64,
    pub sigma_rad: f64,
    pub sigma_deg: f64,
    pub opo: Option<OpoRecord>,
    pub no_opo: MomentsTuple,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub with_opo: Option<MomentsTuple>,
}

#[derive(Debug, Serialize)]
pub struct OpoRecord {
    pub eta_in: f64,
    pub eta_esc: f64,
    pub d: f64,
    pub gain: f64,
    pub transmissivity: f64,
}

impl OpoRecord {
    pub fn new(coupling: OpoCoupling, drive: OpoDrive) -> Self {
        Self {
            eta_in: coupling.eta_in(),
            eta_esc: coupling.eta_esc(),
            d: drive.d(),
            gain: drive.gain(),
            transmissivity: coupling.transmissivity(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MomentsTuple {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl From<QuadratureMoments> for MomentsTuple {
    fn from(m: QuadratureMoments) -> Self {
        Self {
            mean_x: m.mean_x,
            mean_y: m.mean_y,
            var_x: m.var_x,
            var_y: m.var_y,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MethodRecord {
    pub classification: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_th_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_th_deg: Option<f64>,
}

impl MethodRecord {
    pub fn new(classification: &Classification) -> Self {
        Self {
            classification: classification_name(classification),
            sigma_th_rad: classification.sigma_th(),
            sigma_th_deg: classification.sigma_th().map(f64::to_degrees),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ThresholdRecord {
    pub beta: f64,
    pub opo: OpoRecord,
    pub classification: &'static str,
    /// Degrees, quoted to 4 significant digits; absent unless a threshold
    /// exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_th_deg: Option<f64>,
    pub closed_form: MethodRecord,
    pub bisection: MethodRecord,
    pub agreement: bool,
}

/// Header of the sweep CSV schema.
pub const SWEEP_HEADER: &str = "gain,beta,eta_in,eta_esc,classification,sigma_th_deg";

/// One sweep row in the documented CSV schema; rows without a threshold carry
/// a `0` sentinel in `sigma_th_deg` with the classification as the flag.
pub fn sweep_csv_row(row: &SweepRow) -> String {
    let sigma_th_deg = row
        .classification
        .sigma_th()
        .map(f64::to_degrees)
        .unwrap_or(0.0);
    format!(
        "{},{},{},{},{},{}",
        format_sig(row.gain, 6),
        format_sig(row.beta, 6),
        format_sig(row.eta_in, 6),
        format_sig(row.eta_esc, 6),
        classification_name(&row.classification),
        format_sig(sigma_th_deg, 6),
    )
}

#[derive(Debug, Serialize)]
pub struct SweepRecordRow {
    pub gain: f64,
    pub beta: f64,
    pub eta_in: f64,
    pub eta_esc: f64,
    pub classification: &'static str,
    pub sigma_th_deg: f64,
    pub methods_agree: bool,
}

#[derive(Debug, Serialize)]
pub struct McRecord {
    pub state: &'static str,
    pub beta: f64,
    pub phi_rad: f64,
    pub sigma_rad: f64,
    pub sigma_deg: f64,
    pub opo: Option<OpoRecord>,
    pub seed: u64,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    pub rows: Vec<McRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<McRow>,
    pub max_abs_z: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct McRow {
    pub quantity: String,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub z: f64,
}
