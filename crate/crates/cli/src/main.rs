//! `oposim` — phase-diffused coherent signals through a degenerate OPO.
//!
//! Subcommands compute quadrature moments, the phase-noise threshold above
//! which the OPO helps, gain sweeps, Monte Carlo self-checks, and the bundled
//! figure datasets. Exit codes: 0 success, 2 usage error, 3 model-domain
//! error, 4 Monte Carlo self-check failure, 1 I/O failure.

mod commands;
mod output;
mod params;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::FigureId;
use params::{
    build_opo_specs, parse_angle, parse_opo_list, resolve, CouplingSpec, DriveSpec, OutputFormat,
    Preset, RawParams,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(oposim::Error),
    SelfCheck { max_abs_z: f64 },
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Model(err) => write!(f, "{err}"),
            CliError::SelfCheck { max_abs_z } => {
                write!(f, "Monte Carlo self-check failed: max |z| = {max_abs_z:.2} > 5")
            }
            CliError::Io(err) => write!(f, "{err}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(_) => 3,
            CliError::SelfCheck { .. } => 4,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "oposim",
    version,
    about = "Phase-diffused coherent signals through a degenerate OPO: \
             quadrature moments, noise thresholds, sweeps, and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadrature moments of the state chain (coherent -> diffusion -> OPO)
    Moments(ScalarArgs),
    /// Phase-noise threshold: closed form and bisection, with agreement flag
    Threshold(ScalarArgs),
    /// Threshold classification over a gain x beta grid (CSV by default)
    Sweep(SweepArgs),
    /// Monte Carlo homodyne sampling: empirical vs analytic, with z-scores
    Mc(McArgs),
    /// Write the bundled dataset for a figure id
    Reproduce(ReproduceArgs),
}

/// Cavity coupling flags shared by every parameterized command.
#[derive(Args)]
struct CouplingFlags {
    /// Compact OPO spec, e.g. d=0.40,eta-in=0.08,eta-esc=0.87
    #[arg(long, value_name = "KEY=VAL,...")]
    opo: Option<String>,
    /// Input efficiency (with --eta-esc)
    #[arg(long)]
    eta_in: Option<f64>,
    /// Escape efficiency (with --eta-in)
    #[arg(long)]
    eta_esc: Option<f64>,
    /// Input-coupler power reflectivity (with --r-oc, --delta-cr)
    #[arg(long)]
    r_ic: Option<f64>,
    /// Output-coupler power reflectivity
    #[arg(long)]
    r_oc: Option<f64>,
    /// Single-pass crystal loss
    #[arg(long)]
    delta_cr: Option<f64>,
}

impl CouplingFlags {
    /// The `--opo` list and the individual flags are mutually exclusive; the
    /// list may also carry the drive (`d=` or `gain=`).
    fn specs(&self) -> Result<(Option<DriveSpec>, Option<CouplingSpec>), CliError> {
        let (_, coupling) = build_opo_specs(
            None,
            None,
            self.eta_in,
            self.eta_esc,
            self.r_ic,
            self.r_oc,
            self.delta_cr,
        )?;
        match &self.opo {
            None => Ok((None, coupling)),
            Some(list) => {
                if coupling.is_some() {
                    return Err(CliError::Usage(
                        "use --opo or the individual OPO flags, not both".into(),
                    ));
                }
                parse_opo_list(list)
            }
        }
    }
}

/// Parameter flags for the scalar commands (moments, threshold, mc).
///
/// Angles accept `deg`/`rad` suffixes and default to degrees.
#[derive(Args)]
struct CommonArgs {
    /// Built-in operating point (configA or configB)
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// JSON config file; explicit flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Coherent amplitude
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Signal phase (e.g. 45deg, 0.2rad)
    #[arg(long, allow_hyphen_values = true, value_name = "ANGLE")]
    phi: Option<String>,
    /// Phase-noise amplitude (e.g. 10deg, 0.17rad)
    #[arg(long, allow_hyphen_values = true, value_name = "ANGLE")]
    sigma: Option<String>,
    /// OPO gain G = (1-d)^-2
    #[arg(long, conflicts_with = "d")]
    gain: Option<f64>,
    /// Pump amplitude ratio d = sqrt(P/P_th)
    #[arg(long)]
    d: Option<f64>,
    #[command(flatten)]
    coupling: CouplingFlags,
}

impl CommonArgs {
    fn flag_layer(&self) -> Result<RawParams, CliError> {
        let (list_drive, coupling) = self.coupling.specs()?;
        let flag_drive = self
            .gain
            .map(DriveSpec::Gain)
            .or(self.d.map(DriveSpec::PumpRatio));
        if flag_drive.is_some() && list_drive.is_some() {
            return Err(CliError::Usage(
                "give the drive either in --opo or as --gain/--d, not both".into(),
            ));
        }
        Ok(RawParams {
            beta: self.beta,
            phi: self.phi.as_deref().map(parse_angle).transpose()?,
            sigma: self.sigma.as_deref().map(parse_angle).transpose()?,
            drive: flag_drive.or(list_drive),
            coupling,
            ..RawParams::default()
        })
    }

    /// defaults <- config-file preset <- config file <- --preset <- flags
    fn resolve_layers(&self) -> Result<RawParams, CliError> {
        let mut acc = RawParams::default();
        if let Some(path) = &self.config {
            acc = acc.overlay(params::load_config_file(path)?);
        }
        if let Some(preset) = self.preset {
            acc = acc.overlay(preset.params());
        }
        Ok(acc.overlay(self.flag_layer()?))
    }
}

#[derive(Args)]
struct ScalarArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in operating point (configA or configB)
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// JSON config file; explicit flags override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Comma-separated amplitudes, e.g. 1,2,5
    #[arg(long, value_name = "LIST")]
    beta: Option<String>,
    /// Gain axis min:max:step, or a single gain
    #[arg(long, value_name = "RANGE")]
    gain: Option<String>,
    #[command(flatten)]
    coupling: CouplingFlags,
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per quadrature stream
    #[arg(long)]
    samples: Option<usize>,
    /// Batches for the repeated two-copy estimator experiment
    #[arg(long)]
    batches: Option<usize>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Figure dataset to write
    #[arg(value_enum)]
    figure: FigureId,
    /// Output directory
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
}

fn sweep_layers(args: &SweepArgs) -> Result<RawParams, CliError> {
    let mut acc = RawParams::default();
    if let Some(path) = &args.config {
        acc = acc.overlay(params::load_config_file(path)?);
    }
    if let Some(preset) = args.preset {
        acc = acc.overlay(preset.params());
    }
    let (list_drive, coupling) = args.coupling.specs()?;
    Ok(acc.overlay(RawParams {
        drive: list_drive,
        coupling,
        ..RawParams::default()
    }))
}

fn sweep_inputs(args: &SweepArgs) -> Result<commands::SweepInputs, CliError> {
    let layered = sweep_layers(args)?;
    let betas = match &args.beta {
        Some(list) => params::parse_beta_list(list)?,
        None => vec![layered.beta.ok_or_else(|| {
            CliError::Usage("missing amplitudes: give --beta or --preset".into())
        })?],
    };
    let gains = match &args.gain {
        Some(range) => params::parse_gain_range(range)?,
        None => {
            let drive = layered
                .drive
                .ok_or_else(|| {
                    CliError::Usage("missing gain axis: give --gain or --preset".into())
                })?
                .build()?;
            oposim::GainRange {
                min: drive.gain(),
                max: drive.gain(),
                step: 1.0,
            }
        }
    };
    let coupling = layered
        .coupling
        .unwrap_or(CouplingSpec::Etas {
            eta_in: params::DEFAULT_COUPLING.0,
            eta_esc: params::DEFAULT_COUPLING.1,
        })
        .build()?;
    Ok(commands::SweepInputs {
        betas,
        gains,
        coupling,
        format: args.format,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Moments(args) => {
            let params = args.common.resolve_layers()?;
            commands::moments(resolve(&params, "moments")?)
        }
        Command::Threshold(args) => {
            let params = args.common.resolve_layers()?;
            commands::threshold(resolve(&params, "threshold")?)
        }
        Command::Sweep(args) => commands::sweep(sweep_inputs(&args)?),
        Command::Mc(args) => {
            let params = args.common.resolve_layers()?;
            let resolved = resolve(&params, "mc")?;
            commands::mc(commands::McInputs {
                resolved,
                seed: args.seed.or(params.seed).unwrap_or(42),
                samples: args.samples.or(params.samples).unwrap_or(1_000_000),
                batches: args.batches.or(params.batches),
            })
        }
        Command::Reproduce(args) => commands::reproduce(args.figure, args.outdir),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        // A closed stdout (e.g. piping into `head`) is a normal way to stop.
        if let CliError::Io(io_err) = &err {
            if io_err.kind() == std::io::ErrorKind::BrokenPipe {
                return;
            }
        }
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
