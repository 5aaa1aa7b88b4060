use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmirror::cli::units::{parse_quantity, Dimension};
use qmirror::cli::{canned, canned_names, csv_string, emit_outputs, parse_scenario, run_scenario, with_threads, Scenario, Table};
use qmirror::dfg::{optimum_focusing, scan_xi, FocusingOptions};
use qmirror::kinematics::PhotonTriad;
use qmirror::{Error, Result};

#[derive(Parser)]
#[command(name = "qmirror", version, about = "Quantum-mirror ghost-imaging optics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the built-in scenarios.
    Reproduce {
        name: String,
        /// Output path prefix; files are written as PREFIX_<table>.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a scenario file.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Difference-frequency tools.
    Dfg {
        #[command(subcommand)]
        command: DfgCommand,
    },
    /// Idler wavelength and frequencies for a pump and signal wavelength.
    Kinematics {
        #[arg(long, value_parser = length)]
        pump: f64,
        #[arg(long, value_parser = length)]
        signal: f64,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Subcommand)]
enum DfgCommand {
    /// Focusing function over a log-spaced range of xi, as CSV on stdout.
    ScanXi {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        xi_min: f64,
        #[arg(long)]
        xi_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long)]
        optimize_dk: bool,
    },
}

fn length(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Dimension::Length).map_err(|e| e.message)
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("QMIRROR_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Validation(format!("QMIRROR_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

fn execute(mut scenario: Scenario, out: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    if let Some(seed) = seed {
        scenario.run.seed = seed;
    }
    let prefix = out
        .or_else(|| scenario.run.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    let (report, data) = with_threads(threads()?, || run_scenario(&scenario))??;
    let written = emit_outputs(&report, &data, &prefix)?;
    print!("{}", report.summary());
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reproduce { name, out, seed } => execute(canned(&name)?, out, seed),
        Command::Run { file, out, seed } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Error::from(e).context(format!("reading {}", file.display())))?;
            let scenario = parse_scenario(&text).map_err(|e| e.context(file.display().to_string()))?;
            execute(scenario, out, seed)
        }
        Command::Dfg {
            command:
                DfgCommand::ScanXi {
                    mu,
                    xi_min,
                    xi_max,
                    points,
                    optimize_dk,
                },
        } => {
            let opts = FocusingOptions::default();
            let (profile, best) = with_threads(threads()?, || -> Result<_> {
                let profile = scan_xi(mu, xi_min, xi_max, points, optimize_dk, 0.0, &opts)?;
                Ok((profile, optimum_focusing(mu, optimize_dk, &opts)?))
            })??;
            let mut table = Table::new(&["xi", "h", "dk_half_b"]);
            for p in &profile {
                table.push(vec![p.xi, p.h, p.dk_half_b]);
            }
            print!("{}", csv_string(&table)?);
            eprintln!("optimum xi = {:.6} h = {:.6} dk_half_b = {:.6}", best.xi, best.h, best.dk_half_b);
            Ok(())
        }
        Command::Kinematics { pump, signal } => {
            let t = PhotonTriad::collinear(pump, signal)?;
            println!("pump_wavelength = {pump:.16e} m");
            println!("signal_wavelength = {signal:.16e} m");
            println!("idler_wavelength = {:.16e} m", t.idler_wavelength());
            println!("omega_pump = {:.16e} rad/s", t.omega_p);
            println!("omega_signal = {:.16e} rad/s", t.omega_s);
            println!("omega_idler = {:.16e} rad/s", t.omega_i);
            println!("signal_idler_ratio = {:.16e}", t.omega_s / t.omega_i);
            Ok(())
        }
        Command::List => {
            for name in canned_names() {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
