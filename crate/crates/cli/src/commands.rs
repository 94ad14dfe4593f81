//! Implementations of the CLI subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};

use oposim::{
    calibration_report, diffused_moments, estimate_phase, mc_phase_estimator_experiment,
    opo_diffused_moments, opo_output_moments, phase_compression, threshold_bisection,
    threshold_closed_form, threshold_sweep, variance_curves, CoherentSignal, GainRange,
    OpoCoupling, OpoDrive, PhaseDiffusion, SamplerConfig, SigmaGrid, StateSpec, SweepSpec,
};

use crate::output::*;
use crate::params::{OutputFormat, Resolved, DEFAULT_COUPLING};
use crate::CliError;

fn print_json<T: serde::Serialize>(record: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(record)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{text}").map_err(CliError::Io)
}

fn signal_and_noise(resolved: &Resolved) -> Result<(CoherentSignal, PhaseDiffusion), CliError> {
    let signal = CoherentSignal::new(resolved.beta, resolved.phi).map_err(CliError::Model)?;
    let noise = PhaseDiffusion::new(resolved.sigma).map_err(CliError::Model)?;
    Ok((signal, noise))
}

/// Moments of the state chain: coherent seed, optional diffusion, optional OPO.
pub fn moments(resolved: Resolved) -> Result<(), CliError> {
    let (signal, noise) = signal_and_noise(&resolved)?;
    let no_opo = diffused_moments(signal, noise);

    let (opo, with_opo) = match resolved.opo {
        None => (None, None),
        Some((coupling, drive)) => {
            let moments = if resolved.sigma == 0.0 {
                opo_output_moments(signal, coupling, drive)
            } else if resolved.phi == 0.0 {
                opo_diffused_moments(resolved.beta, noise, coupling, drive)
                    .map_err(CliError::Model)?
            } else {
                return Err(CliError::Usage(
                    "the diffusion + OPO chain is modeled for phi = 0 only".into(),
                ));
            };
            (
                Some(OpoRecord::new(coupling, drive)),
                Some(MomentsTuple::from(moments)),
            )
        }
    };

    print_json(&MomentsRecord {
        beta: resolved.beta,
        phi_rad: signal.phi(),
        phi_deg: signal.phi().to_degrees(),
        sigma_rad: resolved.sigma,
        sigma_deg: resolved.sigma.to_degrees(),
        opo,
        no_opo: MomentsTuple::from(no_opo),
        with_opo,
    })
}

fn default_opo(resolved: &Resolved) -> Result<(OpoCoupling, OpoDrive), CliError> {
    match resolved.opo {
        Some(pair) => Ok(pair),
        None => Ok((
            OpoCoupling::new(DEFAULT_COUPLING.0, DEFAULT_COUPLING.1).map_err(CliError::Model)?,
            OpoDrive::new(0.0).map_err(CliError::Model)?,
        )),
    }
}

/// Run both threshold methods and report them with an agreement flag.
pub fn threshold(resolved: Resolved) -> Result<(), CliError> {
    let (coupling, drive) = default_opo(&resolved)?;
    let grid = SigmaGrid::default();
    let closed =
        threshold_closed_form(resolved.beta, coupling, drive).map_err(CliError::Model)?;
    let scanned =
        threshold_bisection(resolved.beta, coupling, drive, grid).map_err(CliError::Model)?;
    let agreement = oposim::threshold::methods_agree(
        &closed.classification,
        &scanned.classification,
        &grid,
    );

    print_json(&ThresholdRecord {
        beta: resolved.beta,
        opo: OpoRecord::new(coupling, drive),
        classification: classification_name(&closed.classification),
        sigma_th_deg: closed
            .classification
            .sigma_th()
            .map(|s| round_sig(s.to_degrees(), 4)),
        closed_form: MethodRecord::new(&closed.classification),
        bisection: MethodRecord::new(&scanned.classification),
        agreement,
    })
}

pub struct SweepInputs {
    pub betas: Vec<f64>,
    pub gains: GainRange,
    pub coupling: OpoCoupling,
    pub format: OutputFormat,
}

/// Threshold classification over the gain × beta grid, as CSV (default) or JSON.
pub fn sweep(inputs: SweepInputs) -> Result<(), CliError> {
    let spec = SweepSpec {
        gain_range: inputs.gains,
        betas: inputs.betas,
        coupling: inputs.coupling,
        sigma_grid: SigmaGrid::default(),
    };
    let rows = threshold_sweep(&spec).map_err(CliError::Model)?;
    match inputs.format {
        OutputFormat::Csv => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            writeln!(out, "{SWEEP_HEADER}").map_err(CliError::Io)?;
            for row in &rows {
                writeln!(out, "{}", sweep_csv_row(row)).map_err(CliError::Io)?;
            }
            Ok(())
        }
        OutputFormat::Json => {
            let records: Vec<SweepRecordRow> = rows
                .iter()
                .map(|row| SweepRecordRow {
                    gain: row.gain,
                    beta: row.beta,
                    eta_in: row.eta_in,
                    eta_esc: row.eta_esc,
                    classification: classification_name(&row.classification),
                    sigma_th_deg: row
                        .classification
                        .sigma_th()
                        .map(f64::to_degrees)
                        .unwrap_or(0.0),
                    methods_agree: row.methods_agree,
                })
                .collect();
            print_json(&records)
        }
    }
}

pub struct McInputs {
    pub resolved: Resolved,
    pub seed: u64,
    pub samples: usize,
    pub batches: Option<usize>,
}

/// Monte Carlo self-check: empirical moments (and optionally the repeated
/// two-copy estimator) against the analytic values, with z-scores.
pub fn mc(inputs: McInputs) -> Result<(), CliError> {
    let resolved = inputs.resolved;
    let (signal, noise) = signal_and_noise(&resolved)?;
    let (state, name): (StateSpec, &'static str) = match (resolved.opo, resolved.sigma) {
        (None, 0.0) => (StateSpec::Coherent { signal }, "coherent"),
        (None, _) => (StateSpec::Diffused { signal, noise }, "diffused-coherent"),
        (Some((coupling, drive)), 0.0) => (
            StateSpec::OpoOutput {
                signal,
                coupling,
                drive,
            },
            "opo-output",
        ),
        (Some((coupling, drive)), _) => {
            if resolved.phi != 0.0 {
                return Err(CliError::Usage(
                    "the diffusion + OPO chain is modeled for phi = 0 only".into(),
                ));
            }
            (
                StateSpec::OpoDiffused {
                    beta: resolved.beta,
                    noise,
                    coupling,
                    drive,
                },
                "opo-diffused",
            )
        }
    };

    let config = SamplerConfig::new(inputs.seed, inputs.samples, 1);
    let rows: Vec<McRow> = calibration_report(&state, &config)
        .map_err(CliError::Model)?
        .into_iter()
        .map(|r| McRow {
            quantity: r.quantity.to_string(),
            analytic: r.analytic,
            empirical: r.empirical,
            std_error: r.std_error,
            z: r.z,
        })
        .collect();

    let estimator = match inputs.batches {
        None => None,
        Some(batches) => {
            let experiment = mc_phase_estimator_experiment(
                &state,
                &SamplerConfig::new(inputs.seed, inputs.samples, batches),
            )
            .map_err(CliError::Model)?;
            let analytic = estimate_phase(state.analytic_moments().map_err(CliError::Model)?)
                .map_err(CliError::Model)?
                .variance;
            Some(McRow {
                quantity: "n_var_phi_hat".into(),
                analytic,
                empirical: experiment.scaled_variance,
                std_error: experiment.std_error,
                z: (experiment.scaled_variance - analytic) / experiment.std_error,
            })
        }
    };

    let max_abs_z = rows
        .iter()
        .chain(estimator.iter())
        .map(|r| r.z.abs())
        .fold(0.0, f64::max);
    let pass = max_abs_z <= 5.0;

    print_json(&McRecord {
        state: name,
        beta: resolved.beta,
        phi_rad: resolved.phi,
        sigma_rad: resolved.sigma,
        sigma_deg: resolved.sigma.to_degrees(),
        opo: resolved
            .opo
            .map(|(coupling, drive)| OpoRecord::new(coupling, drive)),
        seed: inputs.seed,
        samples: inputs.samples,
        batches: inputs.batches,
        rows,
        estimator,
        max_abs_z,
        pass,
    })?;
    if pass {
        Ok(())
    } else {
        Err(CliError::SelfCheck { max_abs_z })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    /// Threshold-vs-gain sweep at eta_in = 0.01, eta_esc = 0.93
    #[value(name = "fig4-top")]
    Fig4Top,
    /// Threshold-vs-gain sweep at eta_in = 0.08, eta_esc = 0.87
    #[value(name = "fig4-bottom")]
    Fig4Bottom,
    /// Variance-vs-noise curves for the configA preset
    #[value(name = "fig6-varA", alias = "fig6-vara")]
    Fig6VarA,
    /// Variance-vs-noise curves for the configB preset
    #[value(name = "fig6-varB", alias = "fig6-varb")]
    Fig6VarB,
    /// Compression of the ±40-degree sequence at G = 3.1
    #[value(name = "fig6-compression")]
    Fig6Compression,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(CliError::Io)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{}", path.display()).map_err(CliError::Io)
}

fn figure_sweep_csv(eta_in: f64, eta_esc: f64) -> Result<String, CliError> {
    let spec = SweepSpec {
        gain_range: GainRange {
            min: 1.1,
            max: 6.0,
            step: 0.05,
        },
        betas: vec![1.0, 2.0, 5.0],
        coupling: OpoCoupling::new(eta_in, eta_esc).map_err(CliError::Model)?,
        sigma_grid: SigmaGrid::default(),
    };
    let rows = threshold_sweep(&spec).map_err(CliError::Model)?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&sweep_csv_row(row));
        csv.push('\n');
    }
    Ok(csv)
}

fn variance_curves_csv(beta: f64, coupling: OpoCoupling, drive: OpoDrive) -> Result<String, CliError> {
    let grid = SigmaGrid {
        min: 0.0,
        max: 30.0f64.to_radians(),
        step: 0.25f64.to_radians(),
    };
    let points = variance_curves(beta, coupling, drive, grid).map_err(CliError::Model)?;
    let mut csv = String::from("sigma_deg,var_no_opo,var_with_opo\n");
    for point in points {
        csv.push_str(&format!(
            "{},{},{}\n",
            format_sig(point.sigma.to_degrees(), 6),
            format_sig(point.var_no_opo, 6),
            format_sig(point.var_with_opo, 6),
        ));
    }
    Ok(csv)
}

fn compression_csv() -> Result<String, CliError> {
    let gain = 3.1;
    let drive = OpoDrive::from_gain(gain).map_err(CliError::Model)?;
    let mut csv = String::from("theta0_deg,gain,theta_d_deg\n");
    for theta0_deg in [-40.0, 0.0, 40.0] {
        let theta_d = phase_compression(f64::to_radians(theta0_deg), drive).to_degrees();
        csv.push_str(&format!(
            "{},{},{}\n",
            format_sig(theta0_deg, 6),
            format_sig(gain, 6),
            format_sig(theta_d, 6),
        ));
    }
    Ok(csv)
}

/// Write the bundled dataset for one figure id into `outdir`.
pub fn reproduce(figure: FigureId, outdir: PathBuf) -> Result<(), CliError> {
    std::fs::create_dir_all(&outdir).map_err(CliError::Io)?;
    let (file_name, contents) = match figure {
        FigureId::Fig4Top => ("fig4-top.csv", figure_sweep_csv(0.01, 0.93)?),
        FigureId::Fig4Bottom => ("fig4-bottom.csv", figure_sweep_csv(0.08, 0.87)?),
        FigureId::Fig6VarA => {
            let coupling = OpoCoupling::new(0.008, 0.937).map_err(CliError::Model)?;
            let drive = OpoDrive::from_gain(2.75).map_err(CliError::Model)?;
            ("fig6-varA.csv", variance_curves_csv(5.70, coupling, drive)?)
        }
        FigureId::Fig6VarB => {
            let coupling = OpoCoupling::new(0.079, 0.871).map_err(CliError::Model)?;
            let drive = OpoDrive::from_gain(3.12).map_err(CliError::Model)?;
            ("fig6-varB.csv", variance_curves_csv(2.05, coupling, drive)?)
        }
        FigureId::Fig6Compression => ("fig6-compression.csv", compression_csv()?),
    };
    write_file(&outdir.join(file_name), &contents)
}
