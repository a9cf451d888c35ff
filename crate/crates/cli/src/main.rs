//! `rydant`: run the simulation pipelines from a JSON config.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, Preset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] rydant::Error),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Schema(_) => 2,
            CliError::Model(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rydant", version, about = "Rydberg-atom antenna isotropy simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Level scheme and cell defaults.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Seed for every random draw; echoed into outputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides {
            preset: self.preset,
            seed: self.seed,
            ..Overrides::default()
        };
        if let Some(dir) = &self.out {
            o.put(Some("output"), "dir", dir.as_str());
        }
        o
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dressed-state eigenvalues for one polarization.
    Eigen {
        #[command(flatten)]
        common: Common,
        /// Inclination from the quantum axis, rad.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        chi: f64,
        /// Azimuth, rad.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        theta: f64,
        /// Relative phase of the polarization components, rad.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// RF Rabi frequency, MHz (overrides `drive.rabi_mhz`)
        #[arg(long, allow_negative_numbers = true)]
        rabi_mhz: Option<f64>,
        /// RF detuning, MHz (overrides `drive.detuning_mhz`)
        #[arg(long, allow_negative_numbers = true)]
        detuning_mhz: Option<f64>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gain pattern on one or more planes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep plane (XY, XZ or YZ); repeat for several.
        #[arg(long)]
        plane: Vec<String>,
        /// Read the splitting from eigenvalues or from simulated spectra
        #[arg(long, value_parser = ["eigen", "spectrum"])]
        readout: Option<String>,
        /// Gaussian jitter on the splitting, dB
        #[arg(long)]
        noise_sigma_db: Option<f64>,
        /// Scale the field by the in-cell path average.
        #[arg(long)]
        cell: bool,
    },
    /// Probe transmission versus coupling detuning, with the A-T readout.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// RF Rabi frequency, MHz (overrides `drive.rabi_mhz`)
        #[arg(long, allow_negative_numbers = true)]
        rabi_mhz: Option<f64>,
        /// RF detuning, MHz (overrides `drive.detuning_mhz`)
        #[arg(long, allow_negative_numbers = true)]
        detuning_mhz: Option<f64>,
    },
    /// Standing-wave field profile in the cell and its angle dependence.
    Cellfield {
        #[command(flatten)]
        common: Common,
        /// Incidence angle of the profile, degrees.
        #[arg(long)]
        angle_deg: Option<f64>,
        /// Angle sweep as start:step:stop in degrees.
        #[arg(long)]
        sweep: Option<String>,
        /// Index-matched walls.
        #[arg(long)]
        no_walls: bool,
        /// Wave polarization relative to the plane of incidence
        #[arg(long, value_parser = ["TE", "TM"])]
        polarization: Option<String>,
    },
    /// Compare isotropic deviations of two pattern reports.
    Compare {
        /// Report written by `sweep`.
        a: PathBuf,
        /// Second report; omit with `--dipole-reference`.
        b: Option<PathBuf>,
        /// Compare against a short dipole along Z on the same planes.
        #[arg(long)]
        dipole_reference: bool,
        /// Output directory for `compare.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("RYDANT_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("RYDANT_THREADS must be a positive integer (got {text:?})")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Eigen {
            common,
            chi,
            theta,
            phi,
            rabi_mhz,
            detuning_mhz,
            csv,
        } => {
            let mut o = common.overrides();
            if let Some(v) = rabi_mhz {
                o.put(Some("drive"), "rabi_mhz", v);
            }
            if let Some(v) = detuning_mhz {
                o.put(Some("drive"), "detuning_mhz", v);
            }
            let cfg = config::load(common.config.as_deref(), o)?;
            commands::eigen(&cfg, chi, theta, phi, csv)
        }
        Command::Sweep {
            common,
            plane,
            readout,
            noise_sigma_db,
            cell,
        } => {
            let mut o = common.overrides();
            match plane.len() {
                0 => {}
                1 => o.put(Some("sweep"), "plane", plane[0].to_ascii_uppercase()),
                _ => o.put(
                    Some("sweep"),
                    "plane",
                    plane.iter().map(|p| p.to_ascii_uppercase()).collect::<Vec<_>>(),
                ),
            }
            if let Some(r) = readout {
                o.put(Some("sweep"), "readout", r);
            }
            if let Some(s) = noise_sigma_db {
                o.put(Some("sweep"), "noise_sigma_db", s);
            }
            if cell {
                o.put(Some("sweep"), "cell", true);
            }
            let cfg = config::load(common.config.as_deref(), o)?;
            commands::sweep(&cfg)
        }
        Command::Spectrum {
            common,
            rabi_mhz,
            detuning_mhz,
        } => {
            let mut o = common.overrides();
            if let Some(v) = rabi_mhz {
                o.put(Some("drive"), "rabi_mhz", v);
            }
            if let Some(v) = detuning_mhz {
                o.put(Some("drive"), "detuning_mhz", v);
            }
            let cfg = config::load(common.config.as_deref(), o)?;
            commands::spectrum(&cfg)
        }
        Command::Cellfield {
            common,
            angle_deg,
            sweep,
            no_walls,
            polarization,
        } => {
            let mut o = common.overrides();
            if let Some(a) = angle_deg {
                o.put(Some("cell"), "angle_deg", a);
            }
            if no_walls {
                o.put(Some("cell"), "walls", false);
            }
            if let Some(p) = polarization {
                o.put(Some("cell"), "polarization", p);
            }
            let cfg = config::load(common.config.as_deref(), o)?;
            let angles = match sweep {
                Some(text) => config::parse_range(&text)?,
                None => cfg.cell_sweep_angles()?,
            };
            commands::cellfield(&cfg, &angles)
        }
        Command::Compare {
            a,
            b,
            dipole_reference,
            out,
        } => commands::compare(&a, b.as_deref(), dipole_reference, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rydant: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
