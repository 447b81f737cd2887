// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;
mod error;
mod svg;

use commands::Command;
use config::{ConfigMap, RunConfig};
use error::{CliError, Result};

/// Weighted-norm experiments on dyadic grids and the discrete circle.
///
/// Exit status: 0 on success, 1 on bad input or an operational failure,
/// 2 when a mathematical invariant is violated.
#[derive(Debug, Parser)]
#[command(name = "muck", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// Flat key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Grid levels N (2^N cells).
    #[arg(long)]
    levels: Option<String>,

    /// Circle points M for hilbert/riesz.
    #[arg(long)]
    points: Option<String>,

    #[arg(long)]
    p: Option<String>,

    #[arg(long)]
    seed: Option<String>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write a log-log SVG plot.
    #[arg(long)]
    svg: bool,

    /// Add half-shifted dyadic intervals to the family.
    #[arg(long)]
    shifted: bool,

    /// Any config key, e.g. `--set operator=hilbert`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn config_of(cli: &Cli) -> Result<RunConfig> {
    let mut map = match &cli.config {
        Some(path) => ConfigMap::read(path)?,
        None => ConfigMap::default(),
    };
    for pair in &cli.set {
        map.set_pair(pair)?;
    }
    let flags = [("grid_levels", &cli.levels), ("circle_points", &cli.points), ("p", &cli.p), ("seed", &cli.seed)];
    for (key, value) in flags {
        if let Some(v) = value {
            map.set(key, v.as_str());
        }
    }
    if let Some(out) = &cli.out {
        map.set("output_dir", out.to_string_lossy());
    }
    if cli.svg {
        map.set("svg", "true");
    }
    if cli.shifted {
        map.set("interval_family", "shifted");
    }
    RunConfig::from_map(&map)
}

fn thread_pool() -> Result<()> {
    let Ok(raw) = std::env::var("MUCK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config("MUCK_THREADS", format!("expected a positive integer, got {raw:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("MUCK_THREADS", e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = thread_pool().and_then(|_| config_of(&cli)).and_then(|cfg| commands::run(cli.command, &cfg));
    match result {
        Ok((written, summary)) => {
            for path in written {
                println!("wrote {}", path.display());
            }
            println!("{}: {summary}", cli.command.name());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
