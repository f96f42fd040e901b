use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbnoma::experiments::{
    run_antenna_sweep, run_beam_pattern, run_effective, run_power_sweep, run_rates, ExperimentConfig, SweepKind,
    SweepSpec,
};
use mbnoma::experiments::csv::Table;
use mbnoma::Error;

/// Multi-beam NOMA simulator for hybrid mmWave downlinks.
#[derive(Parser)]
#[command(name = "mbnoma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beam pattern of a split two-segment precoder and a full-array precoder.
    Beampattern(Common),
    /// Per-user effective channels (direct, closed form, asymptotic).
    Effective(Common),
    /// Per-drop sum rates of multi-beam NOMA, TDMA and single-beam NOMA.
    Rates(Common),
    /// Two-user sum rate versus the strong user's antenna count.
    SweepAntennas(Common),
    /// Sum rates versus the BS transmit power.
    SweepPower(Common),
}

#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; a `<out>.meta` file records the resolved parameters.
    /// Without it the table goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pins |alpha_1| / |alpha_2| in two-user scenarios.
    #[arg(long)]
    ratio: Option<f64>,
    /// Worker threads; 0 uses all cores. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    type Runner = fn(&SweepSpec) -> mbnoma::Result<Table>;
    let (kind, runner, args): (_, Runner, _) = match cli.command {
        Command::Beampattern(a) => (SweepKind::BeamPattern, run_beam_pattern, a),
        Command::Effective(a) => (SweepKind::Snapshot, run_effective, a),
        Command::Rates(a) => (SweepKind::Snapshot, run_rates, a),
        Command::SweepAntennas(a) => (SweepKind::AntennaSweep, run_antenna_sweep, a),
        Command::SweepPower(a) => (SweepKind::PowerSweep, run_power_sweep, a),
    };

    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.trials.is_some() {
        cfg.trials = args.trials;
    }
    if args.ratio.is_some() {
        cfg.gain_ratio = args.ratio;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    let spec = cfg.sweep_spec(kind)?;

    let csv = runner(&spec)?.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let mut meta = path.clone().into_os_string();
            meta.push(".meta");
            let meta = PathBuf::from(meta);
            fs::write(&meta, spec.to_config_text()).map_err(|e| Failure::Io(format!("{}: {e}", meta.display())))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(csv.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(Failure::Io(e.to_string())),
                _ => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("mbnoma: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("mbnoma: {msg}");
            ExitCode::FAILURE
        }
    }
}
