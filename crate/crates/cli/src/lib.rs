//! The `romforge` command line: generate snapshots, train and query
//! surrogates, cross-validate and plot.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use romforge::rom::Method;

use crate::commands::{DataSource, Queries};
use crate::config::{parse_k_list, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "romforge",
    version,
    about = "POD-GPR and CAE-GPR reduced-order models"
)]
pub struct Cli {
    /// Run configuration (key = value lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_method)]
    pub method: Option<Method>,
    /// ROM dimension(s), e.g. `5` or `1..35` or `5,10,20`.
    #[arg(long, global = true)]
    pub k: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Keep going when some cavity solves fail.
    #[arg(long, global = true)]
    pub allow_partial: bool,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: romforge::RomError| e.to_string())
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Snapshot file (defaults to the configured data_path).
    #[arg(long, conflicts_with = "csv")]
    pub data: Option<PathBuf>,
    /// One CSV file per channel instead of a snapshot file.
    #[arg(long, num_args = 1..)]
    pub csv: Vec<PathBuf>,
    /// Grid of CSV data as NYxNX; omit for unstructured states.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the design space and solve the cavity at every point.
    Generate {
        /// Also export one CSV per channel into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Build one surrogate.
    Train {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Evaluate a surrogate at new parameters.
    Predict {
        #[arg(long)]
        surrogate: Option<PathBuf>,
        /// Comma-separated parameter vector; repeat for several queries.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "design")]
        mu: Vec<String>,
        /// Design table with one query per row.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        csv_dir: Option<PathBuf>,
    },
    /// Five-fold cross-validation report.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
    },
    /// SVG error curves from a report.
    Plot {
        /// Report CSV (defaults to the configured report_path).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::usage(format!("--grid expects NYxNX, got '{s}'"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn data_source(args: &DataArgs, cfg: &RunConfig) -> Result<DataSource, CliError> {
    if args.csv.is_empty() {
        if args.grid.is_some() {
            return Err(CliError::usage("--grid only applies to --csv input"));
        }
        return Ok(DataSource::Snapshot(
            args.data.clone().unwrap_or_else(|| cfg.data_path.clone()),
        ));
    }
    let (ny, nx) = args
        .grid
        .as_deref()
        .map(parse_grid)
        .transpose()?
        .unwrap_or((0, 0));
    Ok(DataSource::Csv {
        files: args.csv.clone(),
        ny,
        nx,
    })
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .clone()
        .ok_or_else(|| CliError::usage("--config is required"))?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.allow_partial {
        cfg.generate.allow_partial = true;
    }
    let ks = cli
        .k
        .as_deref()
        .map(parse_k_list)
        .transpose()
        .map_err(CliError::usage)?;
    let out = |default: &PathBuf| cli.out.clone().unwrap_or_else(|| default.clone());

    match &cli.command {
        Command::Generate { csv_dir } => {
            commands::generate(&cfg, &out(&cfg.data_path), csv_dir.as_deref())
        }
        Command::Train { data } => {
            let k = match ks.as_deref() {
                None => cfg.k,
                Some([k]) => *k,
                Some(_) => return Err(CliError::usage("train takes a single --k")),
            };
            let method = cli.method.unwrap_or(cfg.method);
            let src = data_source(data, &cfg)?;
            commands::train(&cfg, method, k, &src, &out(&cfg.surrogate_path)).map(|_| ())
        }
        Command::Predict {
            surrogate,
            mu,
            design,
            csv_dir,
        } => {
            let queries = match design {
                Some(p) => Queries::Table(p.clone()),
                None if mu.is_empty() => {
                    return Err(CliError::usage("predict needs --mu or --design"))
                }
                None => Queries::Inline(
                    mu.iter()
                        .map(|s| commands::parse_mu(s))
                        .collect::<Result<_, _>>()?,
                ),
            };
            let s = surrogate
                .clone()
                .unwrap_or_else(|| cfg.surrogate_path.clone());
            commands::predict(&s, &queries, &out(&cfg.prediction_path), csv_dir.as_deref())
                .map(|_| ())
        }
        Command::Evaluate { data } => {
            let methods = match cli.method {
                Some(m) => vec![m],
                None => vec![Method::PodGpr, Method::CaeGpr],
            };
            let src = data_source(data, &cfg)?;
            commands::evaluate(&cfg, &src, &methods, ks.as_deref(), &out(&cfg.report_path))
                .map(|_| ())
        }
        Command::Plot { report } => {
            let r = report.clone().unwrap_or_else(|| cfg.report_path.clone());
            commands::plot(&r, &out(&cfg.plot_dir)).map(|_| ())
        }
    }
}
