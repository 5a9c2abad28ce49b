//! `urllc`: solve single instances, run parameter sweeps and fading
//! availability studies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use urllc_core::harness::{
    build_multi_scenario, build_scenario, csv_line, emit_availability_csv,
    emit_availability_plotdata, emit_csv, emit_plotdata, network_availability, run_sweep,
    solve_multi_summary, solve_scenario, write_output, RunFile, SchemeKind, SolveSummary, Template,
    SWEEP_HEADER,
};
use urllc_core::{ChannelModel, Error};

const SWEEP_ENERGY_JOULE: f64 = 5e-5;
const AVAILABILITY_ENERGY_JOULE: f64 = 5e-4;

#[derive(Parser)]
#[command(
    name = "urllc",
    version,
    about = "Blocklength and power allocation for short-packet downlink"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Plotdata,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the allocation.
    Solve(SolveArgs),
    /// Solve every (scheme, value) pair of a sweep described in a run file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of Rayleigh-faded draws in which each scheme meets the target.
    Availability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        draws: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Error probability the actuator must reach.
        #[arg(long)]
        target: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// oma, noma, relay, cnoma or oma_multi.
    #[arg(long)]
    scheme: SchemeKind,
    #[arg(long, default_value_t = 200.0)]
    d1: f64,
    #[arg(long, default_value_t = 500.0)]
    d2: f64,
    #[arg(long, default_value_t = 300.0)]
    d3: f64,
    #[arg(long, default_value_t = 100)]
    bits: u32,
    #[arg(long, default_value_t = 100)]
    symbols: u32,
    #[arg(long, default_value_t = SWEEP_ENERGY_JOULE)]
    energy_joule: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps1_max: f64,
    /// Normalized gain overriding the path-loss value of a link.
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long)]
    h2: Option<f64>,
    #[arg(long)]
    h3: Option<f64>,
    /// Device count for oma_multi.
    #[arg(long, default_value_t = 2)]
    devices: u32,
    #[arg(long, default_value_t = 50.0)]
    multi_spacing: f64,
}

enum Failure {
    Infeasible,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn read_run_file(path: &Path, default_energy: f64) -> Result<RunFile, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidScenario(format!("cannot read {}: {e}", path.display())))?;
    RunFile::parse(&text, default_energy)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match out {
        Some(p) => write_output(p, bytes),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|source| Error::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn solve(args: SolveArgs, format: Format) -> Result<(), Failure> {
    let t = Template {
        d1: args.d1,
        d2: args.d2,
        d3: args.d3,
        data_bits: args.bits,
        budget_symbols: args.symbols,
        energy_joule: args.energy_joule,
        eps1_max: args.eps1_max,
        devices: args.devices,
        multi_spacing_m: args.multi_spacing,
        h1: args.h1,
        h2: args.h2,
        h3: args.h3,
    };
    let channel = ChannelModel::default();
    let summary: SolveSummary = if args.scheme == SchemeKind::OmaMulti {
        solve_multi_summary(&build_multi_scenario(&channel, &t)?)
    } else {
        solve_scenario(args.scheme, &build_scenario(&channel, &t, None)?)
    };
    let text = match format {
        Format::Csv => format!("{SWEEP_HEADER}\n{}\n", csv_line(None, None, &summary)),
        Format::Plotdata => format!(
            "# {}\n# eps_target ln_eps_target feasible\n{:e} {} {}\n",
            summary.scheme,
            summary.eps_target.value(),
            summary.eps_target.ln(),
            u8::from(summary.feasible)
        ),
    };
    emit(None, text.as_bytes())?;
    if summary.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(args) => solve(args, cli.format),
        Command::Sweep { config, out } => {
            let cfg = read_run_file(&config, SWEEP_ENERGY_JOULE)?.sweep_config()?;
            let rows = run_sweep(&cfg)?;
            let bytes = match cli.format {
                Format::Csv => emit_csv(&rows),
                Format::Plotdata => emit_plotdata(&rows),
            };
            Ok(emit(out.as_deref(), &bytes)?)
        }
        Command::Availability {
            config,
            draws,
            seed,
            target,
            out,
        } => {
            let rf = read_run_file(&config, AVAILABILITY_ENERGY_JOULE)?;
            let schemes = rf.schemes(&SchemeKind::TWO_DEVICE)?;
            let draws = draws.or(rf.draws).unwrap_or(1000);
            let seed = seed.or(rf.seed).unwrap_or(1);
            let target = target.or(rf.target).unwrap_or(rf.template.eps1_max);
            if !(target > 0.0 && target <= 1.0) {
                return Err(Error::InvalidScenario(format!(
                    "target must lie in (0, 1], got {target}"
                ))
                .into());
            }
            let reports =
                network_availability(&schemes, &rf.template, &rf.channel, draws, seed, target)?;
            let bytes = match cli.format {
                Format::Csv => emit_availability_csv(&reports),
                Format::Plotdata => emit_availability_plotdata(&reports),
            };
            Ok(emit(out.as_deref(), &bytes)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infeasible) => {
            eprintln!("no feasible allocation");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
