//! Run configuration, layered as flags over a JSON file over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use citegauge_core::eval::{validate_recall_levels, EvaluationConfig, SingleFeatureMode, DEFAULT_RECALL_LEVELS};
use citegauge_core::features::{F4Mode, FeatureConfig};
use citegauge_core::forest::ForestConfig;
use citegauge_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_dir: PathBuf,
    pub pairs_file: PathBuf,
    pub seed: u64,
    pub trees: usize,
    pub folds: usize,
    pub recall_levels: Vec<f64>,
    pub f4_mode: F4Mode,
    pub single_feature_mode: SingleFeatureMode,
    pub output_dir: PathBuf,
    /// Worker threads; `None` lets the pool decide. Never affects results.
    pub threads: Option<usize>,
}

/// Every field optional; used for both the `--config` file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub corpus_dir: Option<PathBuf>,
    pub pairs_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trees: Option<usize>,
    pub folds: Option<usize>,
    pub recall_levels: Option<Vec<f64>>,
    pub f4_mode: Option<F4Mode>,
    pub single_feature_mode: Option<SingleFeatureMode>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            corpus_dir: self.corpus_dir.or(lower.corpus_dir),
            pairs_file: self.pairs_file.or(lower.pairs_file),
            seed: self.seed.or(lower.seed),
            trees: self.trees.or(lower.trees),
            folds: self.folds.or(lower.folds),
            recall_levels: self.recall_levels.or(lower.recall_levels),
            f4_mode: self.f4_mode.or(lower.f4_mode),
            single_feature_mode: self.single_feature_mode.or(lower.single_feature_mode),
            output_dir: self.output_dir.or(lower.output_dir),
            threads: self.threads.or(lower.threads),
        }
    }

    /// Fills defaults and checks the result.
    pub fn resolve(self) -> Result<RunConfig> {
        let config = RunConfig {
            corpus_dir: self.corpus_dir.ok_or_else(|| Error::Config("no corpus directory (use --corpus)".into()))?,
            pairs_file: self.pairs_file.ok_or_else(|| Error::Config("no pairs file (use --pairs)".into()))?,
            seed: self.seed.unwrap_or(42),
            trees: self.trees.unwrap_or(100),
            folds: self.folds.unwrap_or(10),
            recall_levels: self.recall_levels.unwrap_or_else(|| DEFAULT_RECALL_LEVELS.to_vec()),
            f4_mode: self.f4_mode.unwrap_or_default(),
            single_feature_mode: self.single_feature_mode.unwrap_or_default(),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            threads: self.threads,
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.trees < 1 {
            return Err(Error::Config("trees must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        validate_recall_levels(&self.recall_levels)
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig { f4_mode: self.f4_mode, ..FeatureConfig::default() }
    }

    pub fn evaluation_config(&self) -> EvaluationConfig {
        EvaluationConfig {
            folds: self.folds,
            seed: self.seed,
            recall_levels: self.recall_levels.clone(),
            single_feature_mode: self.single_feature_mode,
            f4_mode: self.f4_mode,
            forest: ForestConfig { tree_count: self.trees, seed: self.seed, ..ForestConfig::default() },
        }
    }
}

/// Parses `0.1,0.5,0.9`.
pub fn parse_recall_levels(text: &str) -> Result<Vec<f64>> {
    let levels = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad recall level `{}`", s.trim()))))
        .collect::<Result<Vec<_>>>()?;
    validate_recall_levels(&levels)?;
    Ok(levels)
}
