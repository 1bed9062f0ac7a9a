//! `simplex-sections`: section volumes of the regular simplex from the
//! command line.
//!
//! Exit codes: 0 on success, 1 when a search contradicts its prediction or
//! a verification record fails, 2 on bad arguments or any other error.

mod commands;
mod config;
mod output;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::{CliConfig, Format, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "simplex-sections", version, about = "Hyperplane sections of the regular simplex")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    parallelism: Option<u64>,
    /// key = value config file; defaults to $SIMPLEX_SECTIONS_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Volume of one section.
    Section {
        #[arg(long)]
        n: usize,
        /// Comma-separated coordinates (normalized automatically) or `axis:k`.
        #[arg(long, allow_hyphen_values = true)]
        dir: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
    },
    /// Section volume of a family over a grid of distances.
    Sweep {
        #[arg(long)]
        n: usize,
        /// `axis:k`, `max-family`, `min-family` or `fixed-direction` (needs --dir).
        #[arg(long)]
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Search for the extremal section at one distance.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Max)]
        mode: ModeArg,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Dimension or inclusive range such as `2..6`.
        #[arg(long)]
        n: Option<String>,
        /// Distance grid size for the dimension suites.
        #[arg(long)]
        grid: Option<usize>,
        /// Sample count for the inequality and oracle suites.
        #[arg(long)]
        samples: Option<usize>,
        /// Random restarts per search.
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Distance where the facet and edge sections have equal volume.
    Crossover {
        #[arg(long, required_unless_present = "asymptotic", conflicts_with = "asymptotic")]
        n: Option<usize>,
        /// The constant c in tₙ ~ c/√n instead.
        #[arg(long)]
        asymptotic: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    LargeDims,
    SmallDims,
    Discontinuities,
    Inequalities,
    Oracle,
    All,
}

fn resolve_config(cli: &Cli) -> Result<CliConfig> {
    let mut cfg = CliConfig::default();
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
    if let Some(p) = path {
        cfg.load_file(&p)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.output_format = f;
    }
    if let Some(o) = &cli.output {
        cfg.output_path = Some(o.clone());
    }
    if let Some(p) = cli.parallelism {
        cfg.parallelism = p as usize;
    }
    Ok(cfg)
}

/// `a`, `a..b` or `a..=b`; both forms of range include `b`.
fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let parse = |x: &str| x.trim().parse::<usize>().with_context(|| format!("bad dimension {x:?}"));
    let r = match s.split_once("..") {
        Some((a, b)) => parse(a)?..=parse(b.strip_prefix('=').unwrap_or(b))?,
        None => {
            let n = parse(s)?;
            n..=n
        }
    };
    if r.is_empty() {
        bail!("empty dimension range {s:?}");
    }
    Ok(r)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = resolve_config(&cli)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build_global()
        .context("starting worker threads")?;
    match cli.command {
        Command::Section { n, dir, t } => commands::section(&cfg, n, &dir, t),
        Command::Sweep { n, family, dir, t_min, t_max, steps } => {
            commands::sweep(&cfg, n, &family, dir.as_deref(), t_min, t_max, steps)
        }
        Command::Search { n, t, mode, restarts } => {
            let mode = match mode {
                ModeArg::Max => simplex_sections::search::Mode::Max,
                ModeArg::Min => simplex_sections::search::Mode::Min,
            };
            commands::search(&cfg, n, t, mode, restarts)
        }
        Command::Verify { suite, n, grid, samples, restarts } => {
            let range = n.as_deref().map(parse_range).transpose()?;
            commands::verify(&cfg, suite, range, grid, samples, restarts)
        }
        Command::Crossover { n, asymptotic } => commands::crossover(&cfg, n, asymptotic),
    }
}

fn main() -> ExitCode {
    // Parse failures exit with status 2 from inside clap.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
