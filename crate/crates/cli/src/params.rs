//! Parameter resolution: presets, config files, and command-line flags.
//!
//! Layers overlay in a fixed order — defaults, the config file's preset, the
//! config file's fields, the `--preset` flag, then explicit flags — so an
//! explicit flag always wins and a CLI preset overrides config-file scalars.

use serde::Deserialize;
use std::path::Path;

use oposim::{OpoCoupling, OpoDrive, OpoMirrorSpec};

use crate::CliError;

/// Angles on the CLI default to degrees (matching the usual figure axes);
/// a `deg` or `rad` suffix makes the unit explicit. Radians everywhere
/// internally.
pub fn parse_angle(text: &str) -> Result<f64, CliError> {
    let trimmed = text.trim();
    let (number, to_rad): (&str, fn(f64) -> f64) = if let Some(stripped) = trimmed.strip_suffix("deg")
    {
        (stripped, f64::to_radians)
    } else if let Some(stripped) = trimmed.strip_suffix("rad") {
        (stripped, std::convert::identity)
    } else {
        (trimmed, f64::to_radians)
    };
    number
        .trim()
        .parse::<f64>()
        .map(to_rad)
        .map_err(|_| CliError::Usage(format!("cannot parse angle '{text}' (use e.g. 10, 10deg, 0.17rad)")))
}

/// Pump specification: exactly one of gain or pump ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveSpec {
    Gain(f64),
    PumpRatio(f64),
}

impl DriveSpec {
    pub fn build(self) -> Result<OpoDrive, CliError> {
        match self {
            DriveSpec::Gain(g) => OpoDrive::from_gain(g).map_err(CliError::Model),
            DriveSpec::PumpRatio(d) => OpoDrive::new(d).map_err(CliError::Model),
        }
    }
}

/// Coupling specification: efficiencies directly, or mirror parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSpec {
    Etas { eta_in: f64, eta_esc: f64 },
    Mirrors { r_ic: f64, r_oc: f64, delta_cr: f64 },
}

impl CouplingSpec {
    pub fn build(self) -> Result<OpoCoupling, CliError> {
        match self {
            CouplingSpec::Etas { eta_in, eta_esc } => {
                OpoCoupling::new(eta_in, eta_esc).map_err(CliError::Model)
            }
            CouplingSpec::Mirrors {
                r_ic,
                r_oc,
                delta_cr,
            } => OpoMirrorSpec::new(r_ic, r_oc, delta_cr)
                .and_then(OpoCoupling::from_mirrors)
                .map_err(CliError::Model),
        }
    }
}

/// One layer of (possibly partial) parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawParams {
    pub beta: Option<f64>,
    /// Radians.
    pub phi: Option<f64>,
    /// Radians.
    pub sigma: Option<f64>,
    pub drive: Option<DriveSpec>,
    pub coupling: Option<CouplingSpec>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub batches: Option<usize>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl RawParams {
    /// Later layers win field by field; drive and coupling replace as a whole.
    pub fn overlay(mut self, over: RawParams) -> RawParams {
        self.beta = over.beta.or(self.beta);
        self.phi = over.phi.or(self.phi);
        self.sigma = over.sigma.or(self.sigma);
        self.drive = over.drive.or(self.drive);
        self.coupling = over.coupling.or(self.coupling);
        self.seed = over.seed.or(self.seed);
        self.samples = over.samples.or(self.samples);
        self.batches = over.batches.or(self.batches);
        self.format = over.format.or(self.format);
        self
    }
}

/// Built-in operating points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// beta = 5.70, G = 2.75, eta_in = 0.008, eta_esc = 0.937
    #[value(name = "configA", alias = "configa")]
    ConfigA,
    /// beta = 2.05, G = 3.12, eta_in = 0.079, eta_esc = 0.871
    #[value(name = "configB", alias = "configb")]
    ConfigB,
}

impl Preset {
    pub fn params(self) -> RawParams {
        match self {
            Preset::ConfigA => RawParams {
                beta: Some(5.70),
                drive: Some(DriveSpec::Gain(2.75)),
                coupling: Some(CouplingSpec::Etas {
                    eta_in: 0.008,
                    eta_esc: 0.937,
                }),
                ..RawParams::default()
            },
            Preset::ConfigB => RawParams {
                beta: Some(2.05),
                drive: Some(DriveSpec::Gain(3.12)),
                coupling: Some(CouplingSpec::Etas {
                    eta_in: 0.079,
                    eta_esc: 0.871,
                }),
                ..RawParams::default()
            },
        }
    }

    fn from_name(name: &str) -> Result<Self, CliError> {
        match name {
            "configA" | "configa" => Ok(Preset::ConfigA),
            "configB" | "configb" => Ok(Preset::ConfigB),
            other => Err(CliError::Usage(format!("unknown preset '{other}'"))),
        }
    }
}

/// An angle in a config file: bare numbers are degrees, strings may carry a
/// `deg`/`rad` suffix.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Number(f64),
    Text(String),
}

impl AngleValue {
    fn radians(&self) -> Result<f64, CliError> {
        match self {
            AngleValue::Number(v) => Ok(v.to_radians()),
            AngleValue::Text(s) => parse_angle(s),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpoSection {
    gain: Option<f64>,
    d: Option<f64>,
    eta_in: Option<f64>,
    eta_esc: Option<f64>,
    r_ic: Option<f64>,
    r_oc: Option<f64>,
    delta_cr: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplerSection {
    seed: Option<u64>,
    samples: Option<usize>,
    batches: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<String>,
    beta: Option<f64>,
    phi: Option<AngleValue>,
    sigma: Option<AngleValue>,
    opo: Option<OpoSection>,
    sampler: Option<SamplerSection>,
    format: Option<String>,
}

/// Combine optional drive and coupling fields into specs, enforcing the
/// exactly-one rules shared by the config file and the `--opo` list.
pub fn build_opo_specs(
    gain: Option<f64>,
    d: Option<f64>,
    eta_in: Option<f64>,
    eta_esc: Option<f64>,
    r_ic: Option<f64>,
    r_oc: Option<f64>,
    delta_cr: Option<f64>,
) -> Result<(Option<DriveSpec>, Option<CouplingSpec>), CliError> {
    let drive = match (gain, d) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("give exactly one of gain or d".into()))
        }
        (Some(g), None) => Some(DriveSpec::Gain(g)),
        (None, Some(d)) => Some(DriveSpec::PumpRatio(d)),
        (None, None) => None,
    };
    let etas = match (eta_in, eta_esc) {
        (Some(i), Some(e)) => Some(CouplingSpec::Etas {
            eta_in: i,
            eta_esc: e,
        }),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "eta-in and eta-esc must be given together".into(),
            ))
        }
    };
    let mirrors = match (r_ic, r_oc, delta_cr) {
        (Some(r_ic), Some(r_oc), Some(delta_cr)) => Some(CouplingSpec::Mirrors {
            r_ic,
            r_oc,
            delta_cr,
        }),
        (None, None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "r-ic, r-oc and delta-cr must be given together".into(),
            ))
        }
    };
    let coupling = match (etas, mirrors) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either efficiencies or mirror parameters, not both".into(),
            ))
        }
        (e, m) => e.or(m),
    };
    Ok((drive, coupling))
}

/// Parse the compact `--opo key=value,...` list.
///
/// Keys: `d`, `gain`, `eta-in`, `eta-esc`, `r-ic`, `r-oc`, `delta-cr`.
pub fn parse_opo_list(text: &str) -> Result<(Option<DriveSpec>, Option<CouplingSpec>), CliError> {
    let mut gain = None;
    let mut d = None;
    let mut eta_in = None;
    let mut eta_esc = None;
    let mut r_ic = None;
    let mut r_oc = None;
    let mut delta_cr = None;
    for item in text.split(',') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--opo entry '{item}' is not key=value")))?;
        let value: f64 = value.trim().parse().map_err(|_| {
            CliError::Usage(format!("--opo entry '{item}' has a non-numeric value"))
        })?;
        let slot = match key.trim() {
            "d" => &mut d,
            "gain" => &mut gain,
            "eta-in" | "eta_in" => &mut eta_in,
            "eta-esc" | "eta_esc" => &mut eta_esc,
            "r-ic" | "r_ic" => &mut r_ic,
            "r-oc" | "r_oc" => &mut r_oc,
            "delta-cr" | "delta_cr" => &mut delta_cr,
            other => return Err(CliError::Usage(format!("unknown --opo key '{other}'"))),
        };
        if slot.replace(value).is_some() {
            return Err(CliError::Usage(format!("--opo key '{key}' given twice")));
        }
    }
    build_opo_specs(gain, d, eta_in, eta_esc, r_ic, r_oc, delta_cr)
}

/// Load one layer from a JSON config file (applying the file's preset first).
pub fn load_config_file(path: &Path) -> Result<RawParams, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
    let file: ConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {}: {e}", path.display())))?;

    let base = match &file.preset {
        Some(name) => Preset::from_name(name)?.params(),
        None => RawParams::default(),
    };
    let (drive, coupling) = match file.opo {
        Some(section) => build_opo_specs(
            section.gain,
            section.d,
            section.eta_in,
            section.eta_esc,
            section.r_ic,
            section.r_oc,
            section.delta_cr,
        )?,
        None => (None, None),
    };
    let format = match file.format.as_deref() {
        None => None,
        Some("json") => Some(OutputFormat::Json),
        Some("csv") => Some(OutputFormat::Csv),
        Some(other) => {
            return Err(CliError::Usage(format!(
                "config file format must be 'json' or 'csv', got '{other}'"
            )))
        }
    };
    let sampler = file.sampler;
    let layer = RawParams {
        beta: file.beta,
        phi: file.phi.map(|a| a.radians()).transpose()?,
        sigma: file.sigma.map(|a| a.radians()).transpose()?,
        drive,
        coupling,
        seed: sampler.as_ref().and_then(|s| s.seed),
        samples: sampler.as_ref().and_then(|s| s.samples),
        batches: sampler.as_ref().and_then(|s| s.batches),
        format,
    };
    Ok(base.overlay(layer))
}

/// Comma-separated amplitude list for sweeps, e.g. `1,2,5`.
pub fn parse_beta_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse amplitude '{item}'")))
        })
        .collect()
}

/// Gain axis `min:max:step`, or a single gain for a one-point sweep.
pub fn parse_gain_range(text: &str) -> Result<oposim::GainRange, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse = |item: &str| {
        item.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("cannot parse gain '{item}'")))
    };
    match parts.as_slice() {
        [single] => {
            let gain = parse(single)?;
            Ok(oposim::GainRange {
                min: gain,
                max: gain,
                step: 1.0,
            })
        }
        [min, max, step] => Ok(oposim::GainRange {
            min: parse(min)?,
            max: parse(max)?,
            step: parse(step)?,
        }),
        _ => Err(CliError::Usage(format!(
            "gain range '{text}' must be min:max:step or a single value"
        ))),
    }
}

/// Fully resolved scalar parameters for the moments/threshold/mc commands.
#[derive(Debug, Clone, Copy)]
pub struct Resolved {
    pub beta: f64,
    /// Radians.
    pub phi: f64,
    /// Radians.
    pub sigma: f64,
    pub opo: Option<(OpoCoupling, OpoDrive)>,
}

/// Default coupling when an OPO is requested without one: the lossless
/// symmetric cavity, which at zero pump is the identity channel.
pub const DEFAULT_COUPLING: (f64, f64) = (0.5, 0.5);

pub fn resolve(params: &RawParams, require_beta: &str) -> Result<Resolved, CliError> {
    let beta = params.beta.ok_or_else(|| {
        CliError::Usage(format!("missing amplitude: give --beta or --preset ({require_beta})"))
    })?;
    let opo = match (params.coupling, params.drive) {
        (None, None) => None,
        (coupling, drive) => {
            let coupling = coupling
                .unwrap_or(CouplingSpec::Etas {
                    eta_in: DEFAULT_COUPLING.0,
                    eta_esc: DEFAULT_COUPLING.1,
                })
                .build()?;
            let drive = drive.unwrap_or(DriveSpec::PumpRatio(0.0)).build()?;
            Some((coupling, drive))
        }
    };
    Ok(Resolved {
        beta,
        phi: params.phi.unwrap_or(0.0),
        sigma: params.sigma.unwrap_or(0.0),
        opo,
    })
}
