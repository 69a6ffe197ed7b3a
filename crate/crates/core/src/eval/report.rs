use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    cross_validate, interpolated_precision, mean_average_precision, pearson, pr_curve, CorrelationResult,
    InterpolatedPoint, PrPoint, ScoredPair,
};
use crate::corpus::CorpusStats;
use crate::error::{Error, Result};
use crate::features::{F4Mode, FeatureRow, FEATURE_NAMES};
use crate::forest::ForestConfig;

pub const DEFAULT_RECALL_LEVELS: [f64; 6] = [0.05, 0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    F1,
    F4,
    F9,
    All,
}

impl FeatureSet {
    pub const SINGLES: [FeatureSet; 3] = [FeatureSet::F1, FeatureSet::F4, FeatureSet::F9];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::F1 => "F1",
            FeatureSet::F4 => "F4",
            FeatureSet::F9 => "F9",
            FeatureSet::All => "All",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FeatureSet::F1 => "Direct Citations",
            FeatureSet::F4 => "Author Overlap",
            FeatureSet::F9 => "Abstract Similarity",
            FeatureSet::All => "All features",
        }
    }

    /// Feature column for single-feature sets.
    pub fn column(self) -> Option<usize> {
        match self {
            FeatureSet::F1 => Some(0),
            FeatureSet::F4 => Some(1),
            FeatureSet::F9 => Some(2),
            FeatureSet::All => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleFeatureMode {
    /// Rank pairs by the raw feature value.
    #[default]
    DirectRank,
    /// Cross-validate a forest trained on that feature alone.
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub folds: usize,
    pub seed: u64,
    pub recall_levels: Vec<f64>,
    pub single_feature_mode: SingleFeatureMode,
    pub f4_mode: F4Mode,
    /// The per-fold seed replaces `forest.seed`.
    pub forest: ForestConfig,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 42,
            recall_levels: DEFAULT_RECALL_LEVELS.to_vec(),
            single_feature_mode: SingleFeatureMode::DirectRank,
            f4_mode: F4Mode::Jaccard,
            forest: ForestConfig::default(),
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.forest.tree_count == 0 {
            return Err(Error::Config("trees must be at least 1".into()));
        }
        validate_recall_levels(&self.recall_levels)
    }
}

pub fn validate_recall_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Config("no recall levels".into()));
    }
    if levels.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return Err(Error::Config("recall levels must lie in (0, 1]".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("recall levels must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrGridRow {
    pub feature_set: FeatureSet,
    pub precision: Vec<InterpolatedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub feature: FeatureSet,
    /// `None` when the feature is constant over the evaluated pairs.
    pub result: Option<CorrelationResult>,
    /// Interpolated precision at recall 0.9 of the single-feature ranking.
    pub precision_at_recall_0_9: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRow {
    pub feature_set: FeatureSet,
    pub map: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub feature_set: FeatureSet,
    pub points: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub pr_grid: Vec<PrGridRow>,
    pub correlations: Vec<CorrelationRow>,
    /// MAP of the all-features forest ranking.
    pub map_score: f64,
    pub map_by_feature_set: Vec<MapRow>,
    pub curves: Vec<CurveRow>,
    pub stats: CorpusStats,
    pub config: EvaluationConfig,
}

/// Cross-validates the all-features forest and scores each single feature.
pub fn evaluate(rows: &[FeatureRow], stats: CorpusStats, config: &EvaluationConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let pairs: Vec<_> = rows.iter().map(|r| r.pair.clone()).collect();
    let matrix: Vec<Vec<f64>> = rows.iter().map(|r| r.features.to_array().to_vec()).collect();

    let mut sets = Vec::with_capacity(4);
    for set in FeatureSet::SINGLES {
        let col = set.column().expect("single feature set");
        let scored = match config.single_feature_mode {
            SingleFeatureMode::DirectRank => {
                pairs.iter().zip(&matrix).map(|(p, x)| ScoredPair { pair: p.clone(), score: x[col] }).collect()
            }
            SingleFeatureMode::Forest => {
                let column: Vec<Vec<f64>> = matrix.iter().map(|x| vec![x[col]]).collect();
                let forest = ForestConfig { features_per_split: None, ..config.forest };
                cross_validate(&pairs, &column, &[FEATURE_NAMES[col]], &forest, config.folds, config.seed)?.scored
            }
        };
        sets.push((set, scored));
    }
    let all = cross_validate(&pairs, &matrix, &FEATURE_NAMES, &config.forest, config.folds, config.seed)?;
    sets.push((FeatureSet::All, all.scored));
    build_report(&sets, rows, stats, config)
}

/// Assembles curves, grids, MAP and correlations from scored rankings.
pub fn build_report(
    sets: &[(FeatureSet, Vec<ScoredPair>)],
    rows: &[FeatureRow],
    stats: CorpusStats,
    config: &EvaluationConfig,
) -> Result<EvaluationReport> {
    let mut pr_grid = Vec::new();
    let mut curves = Vec::new();
    let mut map_by_feature_set = Vec::new();
    for (set, scored) in sets {
        let curve = pr_curve(scored)?;
        pr_grid.push(PrGridRow { feature_set: *set, precision: interpolated_precision(&curve, &config.recall_levels) });
        map_by_feature_set.push(MapRow { feature_set: *set, map: mean_average_precision(scored)? });
        curves.push(CurveRow { feature_set: *set, points: curve });
    }
    let map_score = map_by_feature_set
        .iter()
        .find(|m| m.feature_set == FeatureSet::All)
        .map(|m| m.map)
        .ok_or_else(|| Error::Evaluation("no all-features ranking".into()))?;

    let labels: Vec<f64> = rows.iter().map(|r| r.pair.label.as_f64()).collect();
    let mut correlations = Vec::new();
    for set in FeatureSet::SINGLES {
        let col = set.column().expect("single feature set");
        let values: Vec<f64> = rows.iter().map(|r| r.features.to_array()[col]).collect();
        let result = match pearson(&values, &labels) {
            Ok(r) => Some(r),
            Err(Error::UndefinedCorrelation(why)) => {
                log::warn!("no correlation for {}: {why}", FEATURE_NAMES[col]);
                None
            }
            Err(e) => return Err(e),
        };
        let precision_at_recall_0_9 = curves
            .iter()
            .find(|c| c.feature_set == set)
            .map(|c| interpolated_precision(&c.points, &[0.9])[0].precision)
            .unwrap_or(0.0);
        correlations.push(CorrelationRow { feature: set, result, precision_at_recall_0_9 });
    }

    let report = EvaluationReport {
        pr_grid,
        correlations,
        map_score,
        map_by_feature_set,
        curves,
        stats,
        config: config.clone(),
    };
    report.validate()?;
    Ok(report)
}

/// Pairs behind a correlation row, also when the correlation is undefined.
fn rows_n(report: &EvaluationReport, row: &CorrelationRow) -> usize {
    match row.result {
        Some(c) => c.n,
        None => report.curves.iter().find(|c| c.feature_set == row.feature).map_or(0, |c| c.points.len()),
    }
}

fn write_err(e: std::io::Error) -> Error {
    Error::io("<report output>", e)
}

impl EvaluationReport {
    pub fn validate(&self) -> Result<()> {
        if self.pr_grid.is_empty() {
            return Err(Error::InvalidData("report has no precision/recall grid".into()));
        }
        if self.correlations.is_empty() {
            return Err(Error::InvalidData("report has no correlations".into()));
        }
        for row in &self.pr_grid {
            if row.precision.windows(2).any(|w| w[1].precision > w[0].precision) {
                return Err(Error::Invariant(format!(
                    "interpolated precision increases with recall for {}",
                    row.feature_set.as_str()
                )));
            }
        }
        self.stats.check()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: EvaluationReport = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn grid_row(&self, set: FeatureSet) -> Option<&PrGridRow> {
        self.pr_grid.iter().find(|r| r.feature_set == set)
    }

    pub fn correlation(&self, set: FeatureSet) -> Option<&CorrelationResult> {
        self.correlations.iter().find(|c| c.feature == set).and_then(|c| c.result.as_ref())
    }

    /// `feature_set,P@R=<level>,...`, one row per feature set.
    pub fn write_table1_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        let mut header = vec!["feature_set".to_string()];
        header.extend(self.config.recall_levels.iter().map(|l| format!("P@R={l}")));
        csv.write_record(&header)?;
        for row in &self.pr_grid {
            let mut record = vec![row.feature_set.as_str().to_string()];
            record.extend(row.precision.iter().map(|p| format!("{:.6}", p.precision)));
            csv.write_record(&record)?;
        }
        csv.flush().map_err(write_err)?;
        Ok(())
    }

    /// `feature,name,precision_at_recall_0.9,pearson_r,p_value,n`.
    pub fn write_table2_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["feature", "name", "precision_at_recall_0.9", "pearson_r", "p_value", "n"])?;
        for row in &self.correlations {
            csv.write_record([
                row.feature.as_str().to_string(),
                row.feature.description().to_string(),
                format!("{:.6}", row.precision_at_recall_0_9),
                row.result.map(|c| format!("{:.6}", c.r)).unwrap_or_default(),
                row.result.map(|c| format!("{:.6e}", c.p_value)).unwrap_or_default(),
                rows_n(self, row).to_string(),
            ])?;
        }
        csv.flush().map_err(write_err)?;
        Ok(())
    }

    /// Plot-ready `recall,precision,feature_set`.
    pub fn write_curve_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["recall", "precision", "feature_set"])?;
        for curve in &self.curves {
            for p in &curve.points {
                csv.write_record([
                    format!("{:.6}", p.recall),
                    format!("{:.6}", p.precision),
                    curve.feature_set.as_str().to_string(),
                ])?;
            }
        }
        csv.flush().map_err(write_err)?;
        Ok(())
    }

    /// Aligned text tables: interpolated precision, then per-feature results.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let levels = &self.config.recall_levels;
        let _ = writeln!(out, "Interpolated precision at recall levels");
        let _ = write!(out, "{:<12}", "Feature");
        for l in levels {
            let _ = write!(out, "{:>10}", format!("P@R={l}"));
        }
        out.push('\n');
        for row in &self.pr_grid {
            let _ = write!(out, "{:<12}", row.feature_set.as_str());
            for p in &row.precision {
                let _ = write!(out, "{:>10.4}", p.precision);
            }
            out.push('\n');
        }
        out.push('\n');
        let _ = writeln!(out, "Comparison by feature");
        let _ = writeln!(out, "{:<22}{:>10}{:>11}{:>13}{:>6}", "Feature", "P@R=0.9", "Pearson r", "p-value", "n");
        for row in &self.correlations {
            let (r, p) = match row.result {
                Some(c) => (format!("{:.4}", c.r), format!("{:.3e}", c.p_value)),
                None => ("undefined".to_string(), "-".to_string()),
            };
            let _ = writeln!(
                out,
                "{:<22}{:>10.4}{:>11}{:>13}{:>6}",
                row.feature.description(),
                row.precision_at_recall_0_9,
                r,
                p,
                rows_n(self, row)
            );
        }
        out.push('\n');
        for m in &self.map_by_feature_set {
            let _ = writeln!(out, "MAP {:<8}{:.4}", m.feature_set.as_str(), m.map);
        }
        let s = &self.stats;
        let _ = writeln!(
            out,
            "Pairs: {} total ({} incidental, {} influential); {} with abstracts ({} influential)",
            s.total_pairs, s.incidental_count, s.influential_count, s.filtered_pairs, s.positive_after_filter
        );
        out
    }
}
