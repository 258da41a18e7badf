//! `tsn5g` — deterministic 5G-TSN indoor-factory link simulator.
//!
//! Subcommands: `run` (one scenario), `sweep` (test-case / profile /
//! distance grids), `channel-eval` (deterministic channel dump),
//! `validate` (config check). Exit codes: 0 ok, 1 usage, 2 config or
//! validation failure, 3 runtime failure, 4 I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsn5g_sim::channel::{DistancePolicy, InfProfile};
use tsn5g_sim::{Result, SimError};

use commands::SweepDim;

#[derive(Parser)]
#[command(name = "tsn5g", version, about = "5G-TSN indoor factory link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and export latency/harq/sinr CSVs plus a JSON summary.
    Run(RunArgs),
    /// Run a scenario grid (test cases, profiles, or ring distances) over seeds.
    Sweep(SweepArgs),
    /// Dump deterministic channel quantities over a distance grid.
    ChannelEval(ChannelEvalArgs),
    /// Check a configuration without writing outputs.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the export files.
    #[arg(long)]
    out: PathBuf,
    /// Seed override for this run.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key, e.g. --override radio.num_rbs=50 (repeatable).
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Print simulated-time progress to stderr.
    #[arg(long)]
    progress: bool,
    /// Clamp out-of-range distances instead of failing.
    #[arg(long)]
    lenient_range: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Grid dimension to sweep.
    #[arg(long, value_enum)]
    sweep_dim: SweepDimArg,
    /// Seeds: a list "1,2,3" or a range "0..10".
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    progress: bool,
    #[arg(long)]
    lenient_range: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepDimArg {
    TestCases,
    Profiles,
    Distances,
}

#[derive(Args)]
struct ChannelEvalArgs {
    /// Profiles: comma list (SL,DL,SH,DH,HH) or "all".
    #[arg(long, default_value = "all")]
    profiles: String,
    /// 2D distance grid: a list "1,10,100" or a range "50..600:50".
    #[arg(long)]
    distances: String,
    /// Carrier frequency, GHz.
    #[arg(long, default_value_t = 5.9)]
    fc: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Clamp out-of-range distances instead of failing.
    #[arg(long)]
    lenient_range: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "override", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Print the effective configuration (all defaults filled in).
    #[arg(long)]
    dump: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not usage errors
            if e.kind() == clap::error::ErrorKind::DisplayHelp
                || e.kind() == clap::error::ErrorKind::DisplayVersion
            {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = config::load_config(&args.config, &args.overrides)?;
            if args.lenient_range {
                cfg.scenario.distance_policy = DistancePolicy::Clamp;
            }
            commands::cmd_run(&cfg, args.seed, &args.out, args.progress)
        }
        Command::Sweep(args) => {
            let mut cfg = config::load_config(&args.config, &args.overrides)?;
            if args.lenient_range {
                cfg.scenario.distance_policy = DistancePolicy::Clamp;
            }
            let seeds = parse_seeds(&args.seeds)?;
            let dim = match args.sweep_dim {
                SweepDimArg::TestCases => SweepDim::TestCases,
                SweepDimArg::Profiles => SweepDim::Profiles,
                SweepDimArg::Distances => SweepDim::Distances,
            };
            commands::cmd_sweep(&cfg, dim, &seeds, &args.out, args.progress)
        }
        Command::ChannelEval(args) => {
            let profiles = parse_profiles(&args.profiles)?;
            let grid = parse_grid(&args.distances)?;
            let policy = if args.lenient_range {
                DistancePolicy::Clamp
            } else {
                DistancePolicy::Strict
            };
            commands::cmd_channel_eval(&profiles, &grid, args.fc, &args.out, policy)
        }
        Command::Validate(args) => {
            let cfg = config::load_config(&args.config, &args.overrides)?;
            commands::cmd_validate(&cfg, args.dump)
        }
    }
}

fn exit_code(e: &SimError) -> u8 {
    match e {
        SimError::Config { .. }
        | SimError::Domain(_)
        | SimError::Unsupported(_)
        | SimError::NotComputable(_) => 2,
        SimError::Logic(_) => 3,
        SimError::Io(_) => 4,
    }
}

/// "1,2,3" or "0..10" (half-open range).
fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| SimError::config("seeds", format!("bad range `{spec}`")))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| SimError::config("seeds", format!("bad range `{spec}`")))?;
        if hi <= lo {
            return Err(SimError::config("seeds", "range end must exceed start"));
        }
        return Ok((lo..hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| SimError::config("seeds", format!("bad seed `{s}`")))
        })
        .collect()
}

fn parse_profiles(spec: &str) -> Result<Vec<InfProfile>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(InfProfile::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| InfProfile::from_str(s.trim()))
        .collect()
}

/// "1,10,100" or "start..end:step" (both endpoints included when the
/// step lands on the end).
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if let Some((range, step)) = spec.split_once(':') {
        let Some((lo, hi)) = range.split_once("..") else {
            return Err(SimError::config(
                "distances",
                format!("bad grid `{spec}` (expected start..end:step)"),
            ));
        };
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| SimError::config("distances", format!("bad number in `{spec}`")))
        };
        let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
        if step <= 0.0 || hi < lo {
            return Err(SimError::config("distances", "need start <= end and step > 0"));
        }
        let mut grid = Vec::new();
        let mut i = 0u64;
        loop {
            let d = lo + step * i as f64;
            if d > hi + 1e-9 {
                break;
            }
            grid.push(d);
            i += 1;
        }
        return Ok(grid);
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| SimError::config("distances", format!("bad distance `{s}`")))
        })
        .collect()
}
