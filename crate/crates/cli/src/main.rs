//! `spacemimo` command-line front end.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scenario::{LinkFields, RegionFields, Scenario};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<spacemimo_core::Error> for CliError {
    fn from(e: spacemimo_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "spacemimo",
    version,
    about = "Distributed LOS MIMO link analysis"
)]
struct Cli {
    /// JSON scenario file; flags override its values.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Channel gain, input SNR and SISO spectral efficiency of a link budget.
    Link {
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Spectral efficiency vs energy-per-bit curves.
    Tradeoff {
        #[arg(long)]
        m: Option<usize>,
        /// Comma-separated antenna counts; one curve per value.
        #[arg(long, value_delimiter = ',')]
        all_m: Option<Vec<usize>>,
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Best antenna count and its spectral efficiency along an energy-per-bit grid.
    #[command(name = "optimal-m")]
    OptimalM {
        #[arg(long)]
        m_max: Option<usize>,
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Monte Carlo ergodic spectral efficiency over random placements.
    Mc {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated electrical sizes for a convergence sweep.
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        #[command(flatten)]
        snr: SnrArgs,
        #[command(flatten)]
        region: RegionArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Singular-value spectrum of the kernel operator on the disc.
    Eigen {
        #[arg(long)]
        radial_order: Option<usize>,
        #[arg(long)]
        angular_order: Option<usize>,
        #[command(flatten)]
        region: RegionArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Spectral efficiency of one geometry read from a JSON file.
    Capacity {
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[command(flatten)]
        snr: SnrArgs,
        #[command(flatten)]
        link: LinkArgs,
    },
}

#[derive(Debug, Args)]
struct LinkArgs {
    #[arg(long)]
    power_watts: Option<f64>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    tx_aperture_m2: Option<f64>,
    #[arg(long)]
    rx_aperture_m2: Option<f64>,
    #[arg(long)]
    range_m: Option<f64>,
    #[arg(long)]
    wavelength_m: Option<f64>,
    /// Linear loss factor in (0, 1].
    #[arg(long)]
    loss_factor: Option<f64>,
    /// Loss in dB (positive = attenuation); converted with L = 10^(-dB/10).
    #[arg(long, allow_hyphen_values = true)]
    loss_db: Option<f64>,
    #[arg(long)]
    noise_psd_w_per_hz: Option<f64>,
}

impl From<LinkArgs> for LinkFields {
    fn from(a: LinkArgs) -> Self {
        LinkFields {
            power_watts: a.power_watts,
            bandwidth_hz: a.bandwidth_hz,
            tx_aperture_m2: a.tx_aperture_m2,
            rx_aperture_m2: a.rx_aperture_m2,
            range_m: a.range_m,
            wavelength_m: a.wavelength_m,
            loss_factor: a.loss_factor,
            loss_db: a.loss_db,
            noise_psd_w_per_hz: a.noise_psd_w_per_hz,
        }
    }
}

#[derive(Debug, Args)]
struct RegionArgs {
    /// Disc radius in meters (wavelength and range from --wavelength-m / --range-m).
    #[arg(long)]
    radius_m: Option<f64>,
    /// Electrical size |S|/(wavelength*range), alternative to --radius-m.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct SnrArgs {
    /// Input SNR, linear.
    #[arg(long)]
    gamma: Option<f64>,
    /// Input SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Channel gain, linear.
    #[arg(long)]
    g: Option<f64>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Energy-per-bit grid `lo:hi:steps` in dB, endpoints inclusive.
    #[arg(long, allow_hyphen_values = true)]
    eta_db: Option<String>,
    /// Channel gain, linear (default 1).
    #[arg(long)]
    g: Option<f64>,
    /// Optional cap on usable spatial channels.
    #[arg(long)]
    dof: Option<usize>,
    /// Absolute residual tolerance of the root finder.
    #[arg(long)]
    tol: Option<f64>,
}

fn flags_scenario(command: Command) -> (commands::Kind, Scenario) {
    let mut s = Scenario::default();
    let kind = match command {
        Command::Link { link } => {
            s.link = link.into();
            commands::Kind::Link
        }
        Command::Tradeoff {
            m,
            all_m,
            curve,
            link,
        } => {
            s.m = m;
            s.all_m = all_m;
            s.link = link.into();
            apply_curve(&mut s, curve);
            commands::Kind::Tradeoff
        }
        Command::OptimalM { m_max, curve, link } => {
            s.m_max = m_max;
            s.link = link.into();
            apply_curve(&mut s, curve);
            commands::Kind::OptimalM
        }
        Command::Mc {
            m,
            trials,
            seed,
            ratios,
            snr,
            region,
            link,
        } => {
            s.m = m;
            s.trials = trials;
            s.seed = seed;
            s.ratios = ratios;
            s.link = link.into();
            apply_snr(&mut s, snr);
            apply_region(&mut s, region);
            commands::Kind::Mc
        }
        Command::Eigen {
            radial_order,
            angular_order,
            region,
            link,
        } => {
            s.radial_order = radial_order;
            s.angular_order = angular_order;
            s.link = link.into();
            apply_region(&mut s, region);
            commands::Kind::Eigen
        }
        Command::Capacity {
            geometry,
            snr,
            link,
        } => {
            s.geometry = geometry;
            s.link = link.into();
            apply_snr(&mut s, snr);
            commands::Kind::Capacity
        }
    };
    (kind, s)
}

fn apply_curve(s: &mut Scenario, c: CurveArgs) {
    s.eta_db = c.eta_db;
    s.g = c.g;
    s.dof = c.dof;
    s.tol = c.tol;
}

fn apply_snr(s: &mut Scenario, a: SnrArgs) {
    s.gamma = a.gamma;
    s.snr_db = a.snr_db;
    s.g = a.g;
}

fn apply_region(s: &mut Scenario, a: RegionArgs) {
    s.region = RegionFields {
        radius_m: a.radius_m,
        wavelength_m: None,
        range_m: None,
    };
    s.c = a.c;
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = Scenario::load(cli.scenario.as_deref())?;
    let (kind, flags) = flags_scenario(cli.command);
    let scenario = file.merge(flags);
    let format = cli.format.unwrap_or(Format::Csv);
    let body = match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Validation(format!("invalid `threads`: {e}")))?;
            pool.install(|| commands::execute(kind, &scenario, format))?
        }
        None => commands::execute(kind, &scenario, format)?,
    };
    match cli.out {
        Some(path) => std::fs::write(&path, body)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
