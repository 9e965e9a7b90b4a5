use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spdc_cli::commands::{
    cmd_analyze_chsh, cmd_analyze_visibility, cmd_fit, cmd_reproduce, cmd_simulate_bell_scan,
    cmd_simulate_scan, Figure, SimulateOverrides,
};
use spdc_cli::CliError;
use spdc_core::ModelKind;

/// Two-crystal SPDC conditional-interference simulator and analysis tool.
#[derive(Parser)]
#[command(name = "spdc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a detector or waveplate scan and write it as CSV.
    Simulate {
        #[command(subcommand)]
        kind: SimulateCommand,
    },
    /// Fit a model to a pattern CSV and write the result as JSON.
    Fit {
        kind: FitKind,
        /// Input pattern CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output fit JSON.
        #[arg(long)]
        out: PathBuf,
        /// Run configuration (the double-slit envelope scale comes from
        /// its layout).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute visibilities and CHSH values, printed as JSON on stdout.
    Analyze {
        #[command(subcommand)]
        kind: AnalyzeCommand,
    },
    /// Simulate, fit and summarize one of the reference figures.
    Reproduce {
        fig: FigureArg,
        /// Output directory for the CSV, fit JSON and summary JSON.
        #[arg(long)]
        outdir: PathBuf,
        /// Replace counts by Poisson draws.
        #[arg(long, value_enum, default_value_t = Switch::Off)]
        noise: Switch,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Scan the signal detector horizontally with the idler fixed.
    Scan {
        #[command(flatten)]
        common: SimulateArgs,
        /// Signal waveplate angle, degrees (overrides the config).
        #[arg(long)]
        theta_deg: Option<f64>,
    },
    /// Turn the signal waveplate with both detectors fixed.
    BellScan {
        #[command(flatten)]
        common: SimulateArgs,
        /// Fixed signal-detector position, millimetres.
        #[arg(long)]
        x_mm: Option<f64>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed for the shot noise (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Poisson shot noise on or off (overrides the config).
    #[arg(long, value_enum)]
    noise: Option<Switch>,
    /// Output CSV path (default: pattern.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Raw visibility (max - min) / (max + min) of a pattern CSV.
    Visibility {
        /// Input pattern CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Restrict to an abscissa window, LO:HI.
        #[arg(long)]
        window: Option<String>,
    },
    /// CHSH estimates from a fringe visibility.
    Chsh {
        /// Fringe visibility in [0, 1].
        #[arg(long)]
        visibility: f64,
        /// State amplitude of crystal 1 (requires --beta).
        #[arg(long, requires = "beta")]
        alpha: Option<f64>,
        /// State amplitude of crystal 2 (requires --alpha).
        #[arg(long, requires = "alpha")]
        beta: Option<f64>,
        /// Coherence for the state-based estimate (default: the visibility).
        #[arg(long)]
        gamma: Option<f64>,
        /// Relative phase between the crystal paths, radians.
        #[arg(long, default_value_t = 0.0)]
        phi_rad: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FitKind {
    Gaussian,
    DoubleSlit,
    Fringe,
}

impl From<FitKind> for ModelKind {
    fn from(kind: FitKind) -> ModelKind {
        match kind {
            FitKind::Gaussian => ModelKind::Gaussian,
            FitKind::DoubleSlit => ModelKind::DoubleSlit,
            FitKind::Fringe => ModelKind::Fringe,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl From<FigureArg> for Figure {
    fn from(fig: FigureArg) -> Figure {
        match fig {
            FigureArg::Fig2 => Figure::Fig2,
            FigureArg::Fig3 => Figure::Fig3,
            FigureArg::Fig4 => Figure::Fig4,
            FigureArg::Fig5 => Figure::Fig5,
            FigureArg::Fig6 => Figure::Fig6,
        }
    }
}

fn parse_window(window: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = window.split(':').collect();
    let [lo, hi] = parts.as_slice() else {
        return Err(CliError::input(format!(
            "--window expects LO:HI, got '{window}'"
        )));
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| CliError::input(format!("bad window bound '{lo}': {e}")))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| CliError::input(format!("bad window bound '{hi}': {e}")))?;
    Ok((lo, hi))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { kind } => match kind {
            SimulateCommand::Scan { common, theta_deg } => {
                let overrides = SimulateOverrides {
                    theta_deg,
                    seed: common.seed,
                    noise: common.noise.map(bool::from),
                    ..SimulateOverrides::default()
                };
                let path =
                    cmd_simulate_scan(common.config.as_deref(), overrides, common.out.as_deref())?;
                eprintln!("wrote {}", path.display());
            }
            SimulateCommand::BellScan { common, x_mm } => {
                let overrides = SimulateOverrides {
                    x_mm,
                    seed: common.seed,
                    noise: common.noise.map(bool::from),
                    ..SimulateOverrides::default()
                };
                let path = cmd_simulate_bell_scan(
                    common.config.as_deref(),
                    overrides,
                    common.out.as_deref(),
                )?;
                eprintln!("wrote {}", path.display());
            }
        },
        Command::Fit {
            kind,
            input,
            out,
            config,
        } => {
            cmd_fit(kind.into(), &input, &out, config.as_deref())?;
            eprintln!("wrote {}", out.display());
        }
        Command::Analyze { kind } => {
            let json = match kind {
                AnalyzeCommand::Visibility { input, window } => {
                    let window = window.as_deref().map(parse_window).transpose()?;
                    cmd_analyze_visibility(&input, window)?
                }
                AnalyzeCommand::Chsh {
                    visibility,
                    alpha,
                    beta,
                    gamma,
                    phi_rad,
                } => {
                    let alpha_beta = alpha.zip(beta);
                    cmd_analyze_chsh(visibility, alpha_beta, gamma, phi_rad)?
                }
            };
            println!("{json}");
        }
        Command::Reproduce {
            fig,
            outdir,
            noise,
            seed,
        } => {
            let result = cmd_reproduce(fig.into(), &outdir, noise.into(), seed)?;
            println!("{}", result.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
