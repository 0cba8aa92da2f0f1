//! Batch CLI for the collective three-level emission engines.
//!
//! Every subcommand reads a TOML config (--config), applies CLI and
//! LSR_* environment overrides on top, and writes its artifacts under the
//! resolved output directory. Override precedence: command line, then
//! environment, then the config file. Exit codes: 0 success, 2 config
//! error, 3 capacity limit, 4 integration failure, 5 comparison failed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lambda_sr_cli::commands;
use lambda_sr_cli::config::{self, GeometrySection, Mode, RunConfig, SeedPolicyName};
use lambda_sr_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "lambda-sr",
    version,
    about = "Collective two-channel emission of laser-dressed three-level ensembles",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlator-closure run over the configured time grid
    Meanfield(RunArgs),
    /// Small-N master-equation run with full pair observables
    Exact(RunArgs),
    /// Closed-form single-atom decay in trajectory format
    SingleAtom(RunArgs),
    /// Parallel scan over drive strengths, one subdirectory per point
    Sweep(RunArgs),
    /// Pulse metrics and sum-rule audit of a finished run
    Analyze(RunArgs),
    /// Per-column deviation report between two runs
    Compare(RunArgs),
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::Meanfield(_) => Mode::Meanfield,
            Command::Exact(_) => Mode::Exact,
            Command::SingleAtom(_) => Mode::SingleAtom,
            Command::Sweep(_) => Mode::Sweep,
            Command::Analyze(_) => Mode::Analyze,
            Command::Compare(_) => Mode::Compare,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Meanfield(a)
            | Command::Exact(a)
            | Command::SingleAtom(a)
            | Command::Sweep(a)
            | Command::Analyze(a)
            | Command::Compare(a) => a,
        }
    }
}

fn parse_on_off(value: &str) -> Result<bool, String> {
    match value {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(format!("expected on or off, got {other}")),
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML)
    #[arg(long, env = "LSR_CONFIG", value_name = "PATH")]
    config: PathBuf,

    /// Output directory (overrides run.out)
    #[arg(long, env = "LSR_OUT", value_name = "DIR")]
    out: Option<PathBuf>,

    /// Emit SVG figure panels (overrides run.svg)
    #[arg(long, env = "LSR_SVG", value_name = "on|off", value_parser = parse_on_off)]
    svg: Option<bool>,

    /// Relative tolerance (solver, or comparison threshold in compare mode)
    #[arg(long, env = "LSR_TOL_REL", value_name = "TOL")]
    tol_rel: Option<f64>,

    /// Absolute tolerance (solver, or comparison threshold in compare mode)
    #[arg(long, env = "LSR_TOL_ABS", value_name = "TOL")]
    tol_abs: Option<f64>,

    /// Initial-fluctuation seeding policy (overrides solver.seed_policy)
    #[arg(long, env = "LSR_SEED_POLICY", value_enum, value_name = "POLICY")]
    seed_policy: Option<SeedPolicyName>,

    /// Force the all-to-all coupling geometry (overrides [geometry])
    #[arg(long, env = "LSR_DICKE")]
    dicke: bool,
}

/// Loads the config file and layers the CLI/env overrides onto it. The
/// result is the effective config, which is also what the run manifest
/// records.
fn effective_config(mode: Mode, args: &RunArgs) -> CliResult<RunConfig> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut config = config::parse_config(&text)?;

    if config.run.mode != mode {
        return Err(CliError::Config(format!(
            "config sets run.mode = \"{}\" but the {} subcommand was invoked",
            config.run.mode, mode
        )));
    }
    if let Some(out) = &args.out {
        config.run.out = Some(out.clone());
    }
    if let Some(svg) = args.svg {
        config.run.svg = Some(svg);
    }
    if mode == Mode::Compare {
        let section = config
            .compare
            .as_mut()
            .ok_or_else(|| CliError::Config("compare requires a [compare] section".into()))?;
        if let Some(tol) = args.tol_rel {
            section.tol_rel = Some(tol);
        }
        if let Some(tol) = args.tol_abs {
            section.tol_abs = Some(tol);
        }
    } else {
        if let Some(tol) = args.tol_rel {
            config.solver.tol_rel = tol;
        }
        if let Some(tol) = args.tol_abs {
            config.solver.tol_abs = tol;
        }
    }
    if let Some(policy) = args.seed_policy {
        config.solver.seed_policy = policy;
    }
    if args.dicke {
        config.geometry = Some(GeometrySection::default());
    }
    config::validate_config(&config)?;
    Ok(config)
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let mode = cli.command.mode();
    let args = cli.command.args();
    let config = effective_config(mode, args)?;
    let out = config.run.out.clone();
    let svg_on = config.run.svg.unwrap_or(true);

    match mode {
        Mode::Meanfield => {
            let dir = out.unwrap_or_else(|| PathBuf::from("out"));
            commands::meanfield::run(&config, &dir, svg_on)
        }
        Mode::Exact => {
            let dir = out.unwrap_or_else(|| PathBuf::from("out"));
            commands::exact::run(&config, &dir, svg_on)
        }
        Mode::SingleAtom => {
            let dir = out.unwrap_or_else(|| PathBuf::from("out"));
            commands::single_atom::run(&config, &dir, svg_on)
        }
        Mode::Sweep => {
            let dir = out.unwrap_or_else(|| PathBuf::from("out"));
            commands::sweep::run(&config, &dir, svg_on)
        }
        Mode::Analyze => {
            let section = config
                .analyze
                .as_ref()
                .ok_or_else(|| CliError::Config("analyze requires an [analyze] section".into()))?;
            let dir = out.unwrap_or_else(|| section.run.clone());
            commands::analyze::run(&config, &dir)
        }
        Mode::Compare => commands::compare::run(&config, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
