//! Command-line front end: argument parsing, configuration layering and the
//! `ingest`, `features`, `evaluate` and `report` subcommands.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use citegauge_core::eval::SingleFeatureMode;
use citegauge_core::features::F4Mode;
use citegauge_core::{Error, ErrorKind, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_recall_levels, PartialConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "citegauge", version, about = "Classify citations as incidental or influential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the corpus and pairs; report counts and parse warnings.
    Ingest(RunArgs),
    /// Write the per-pair feature table.
    Features(RunArgs),
    /// Cross-validate and write the report, tables and curve points.
    Evaluate(RunArgs),
    /// Render a saved report as text tables.
    Report {
        /// Path to a report JSON written by `evaluate`.
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum F4ModeArg {
    Jaccard,
    Boolean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SingleFeatureModeArg {
    #[value(name = "direct_rank")]
    DirectRank,
    Forest,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub trees: Option<usize>,
    #[arg(long, value_name = "N")]
    pub folds: Option<usize>,
    /// Comma-separated, strictly increasing, in (0, 1].
    #[arg(long, value_name = "CSV")]
    pub recall_levels: Option<String>,
    #[arg(long, value_enum)]
    pub f4_mode: Option<F4ModeArg>,
    #[arg(long, value_enum)]
    pub single_feature_mode: Option<SingleFeatureModeArg>,
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        let flags = PartialConfig {
            corpus_dir: self.corpus.clone(),
            pairs_file: self.pairs.clone(),
            seed: self.seed,
            trees: self.trees,
            folds: self.folds,
            recall_levels: self.recall_levels.as_deref().map(parse_recall_levels).transpose()?,
            f4_mode: self.f4_mode.map(|m| match m {
                F4ModeArg::Jaccard => F4Mode::Jaccard,
                F4ModeArg::Boolean => F4Mode::Boolean,
            }),
            single_feature_mode: self.single_feature_mode.map(|m| match m {
                SingleFeatureModeArg::DirectRank => SingleFeatureMode::DirectRank,
                SingleFeatureModeArg::Forest => SingleFeatureMode::Forest,
            }),
            output_dir: self.output.clone(),
            threads: self.threads,
        };
        flags.over(file).resolve()
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Data => EXIT_DATA,
        ErrorKind::Internal => EXIT_INTERNAL,
    }
}

/// Runs one subcommand and returns what it prints on success.
pub fn run(command: &Command) -> Result<String> {
    let (args, f): (&RunArgs, fn(&RunConfig) -> Result<String>) = match command {
        Command::Report { path } => return commands::cmd_report(path),
        Command::Ingest(a) => (a, commands::cmd_ingest),
        Command::Features(a) => (a, commands::cmd_features),
        Command::Evaluate(a) => (a, commands::cmd_evaluate),
    };
    let config = args.resolve()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    pool.install(|| f(&config))
}
