//! Front end for the collinear-point pipeline: parameter resolution,
//! subcommands, reference-table regeneration and diff reports.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod tables;

use clap::Parser;

use cli::{Cli, Command, Common};
use config::{load_config, RunConfig};
use error::Result;

fn base_config(cli: &Cli) -> Result<RunConfig> {
    match &cli.config {
        Some(p) => load_config(p),
        None => Ok(RunConfig::default()),
    }
}

fn prepared(cli: &Cli, common: &Common) -> Result<RunConfig> {
    let mut cfg = base_config(cli)?;
    common.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Locate(c) => commands::locate(&prepared(&cli, c)?),
        Command::Linearize(c) => commands::linearize(&prepared(&cli, c)?),
        Command::Expand(c) => commands::expand(&prepared(&cli, c)?),
        Command::Reduce(c) => commands::reduce_cmd(&prepared(&cli, c)?),
        Command::Thresholds(c) => commands::thresholds(&prepared(&cli, c)?),
        Command::Poincare {
            common,
            seeds,
            crossings,
            t_max,
        } => {
            let mut cfg = prepared(&cli, common)?;
            if let Some(v) = seeds {
                cfg.section.seeds = *v;
            }
            if let Some(v) = crossings {
                cfg.section.crossings = *v;
            }
            if let Some(v) = t_max {
                cfg.section.t_max = *v;
            }
            commands::poincare(&cfg)
        }
        Command::Freqmap {
            common,
            points,
            p_y0,
        } => {
            let mut cfg = prepared(&cli, common)?;
            if let Some(v) = points {
                cfg.freqmap.points = *v;
            }
            if let Some(v) = p_y0 {
                cfg.freqmap.p_y0 = *v;
            }
            commands::freqmap(&cfg)
        }
        Command::Fli {
            common,
            grid,
            horizon,
            tangent,
        } => {
            let mut cfg = prepared(&cli, common)?;
            if let Some(v) = grid {
                cfg.fli.grid = *v;
            }
            if let Some(v) = horizon {
                cfg.fli.horizon = *v;
            }
            if let Some(v) = tangent {
                cfg.fli.tangent = v.as_slice().try_into().map_err(|_| {
                    error::CliError::Usage(format!("--tangent needs 4 components, got {}", v.len()))
                })?;
            }
            cfg.validate()?;
            commands::fli(&cfg)
        }
        Command::Bifscan {
            common,
            family,
            h_min,
            h_max,
            step,
            h_tol,
        } => {
            let mut cfg = prepared(&cli, common)?;
            let s = &mut cfg.bifscan;
            if let Some(v) = family {
                s.family = *v;
            }
            if let Some(v) = h_min {
                s.h_min = *v;
            }
            if let Some(v) = h_max {
                s.h_max = *v;
            }
            if let Some(v) = step {
                s.step = *v;
            }
            if let Some(v) = h_tol {
                s.h_tol = *v;
            }
            cfg.validate()?;
            commands::bifscan(&cfg)
        }
        Command::ReproduceTables { system, tol, out } => {
            let common = Common {
                tol: *tol,
                out: out.clone(),
                ..Default::default()
            };
            let cfg = prepared(&cli, &common)?;
            let system = system.clone().or(cfg.system.clone());
            commands::reproduce_tables(system.as_deref(), &cfg)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
