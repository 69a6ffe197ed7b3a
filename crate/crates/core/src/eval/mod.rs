//! Stratified cross-validation and ranking metrics.
//!
//! All rankings sort by descending score and break ties by ascending
//! `(citing_id, cited_id)`, so every metric is deterministic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CitationPair, Label};
use crate::error::{Error, Result};
use crate::forest::{ForestConfig, ForestModel, Sample};
use crate::rng::{derive_seed, SeededRng};

mod report;

pub use report::{
    build_report, evaluate, validate_recall_levels, CorrelationRow, CurveRow, EvaluationConfig, EvaluationReport,
    FeatureSet, MapRow, PrGridRow, SingleFeatureMode, DEFAULT_RECALL_LEVELS,
};

const FOLD_STREAM: u64 = 0xF01D_5EED;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index of each input row.
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn training_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn positives_per_fold(&self, labels: &[Label]) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for (f, l) in self.fold_of.iter().zip(labels) {
            if l.is_positive() {
                counts[*f] += 1;
            }
        }
        counts
    }
}

/// Shuffles each class with the seeded generator and deals it round-robin.
///
/// Positives are dealt first starting at fold 0; negatives continue from
/// the fold after the last positive so fold sizes also differ by at most one.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!("{k} folds for {} rows", labels.len())));
    }
    let mut rng = SeededRng::child(seed, FOLD_STREAM);
    let mut fold_of = vec![0; labels.len()];
    let mut next = 0;
    for class in [Label::Influential, Label::Incidental] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rng.shuffle(&mut rows);
        for row in rows {
            fold_of[row] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub pair: CitationPair,
    /// Ranking score: a held-out positive-class probability, or a raw
    /// feature value when ranking by a single feature.
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// One entry per input row, in input order.
    pub scored: Vec<ScoredPair>,
    pub folds: FoldAssignment,
    /// Training rows used for each fold's model.
    pub training_rows: Vec<Vec<usize>>,
}

pub fn pair_sample_id(pair: &CitationPair) -> String {
    format!("{}\t{}", pair.citing_id, pair.cited_id)
}

type FoldScores = (Vec<usize>, Vec<(usize, f64)>);

/// Trains on `k - 1` folds and scores the held-out fold, for every fold.
///
/// Fold `f` trains with forest seed `derive_seed(seed, f)`.
pub fn cross_validate(
    pairs: &[CitationPair],
    features: &[Vec<f64>],
    feature_names: &[&str],
    forest: &ForestConfig,
    k: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if pairs.len() != features.len() {
        return Err(Error::Evaluation(format!("{} pairs but {} feature rows", pairs.len(), features.len())));
    }
    let labels: Vec<Label> = pairs.iter().map(|p| p.label).collect();
    let folds = stratified_folds(&labels, k, seed)?;
    let samples: Vec<Sample> = pairs
        .iter()
        .zip(features)
        .map(|(p, x)| Sample { id: pair_sample_id(p), x: x.clone(), label: p.label })
        .collect();

    // (training rows, (row, held-out score)) per fold
    let per_fold: Vec<FoldScores> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train = folds.training_rows(fold);
            let train_samples: Vec<Sample> = train.iter().map(|&i| samples[i].clone()).collect();
            let positives = train_samples.iter().filter(|s| s.label.is_positive()).count();
            if positives == 0 || positives == train_samples.len() {
                return Err(Error::Evaluation(format!(
                    "fold {fold}: training split has a single class ({positives} positives of {})",
                    train_samples.len()
                )));
            }
            let config = ForestConfig { seed: derive_seed(seed, fold as u64), ..*forest };
            let model = ForestModel::train(&train_samples, feature_names, &config)?;
            let scores = folds.test_rows(fold).into_iter().map(|i| (i, model.predict_proba(&samples[i].x))).collect();
            Ok((train, scores))
        })
        .collect::<Result<_>>()?;

    let mut scores = vec![f64::NAN; pairs.len()];
    let mut training_rows = Vec::with_capacity(k);
    for (train, fold_scores) in per_fold {
        for (i, s) in fold_scores {
            scores[i] = s;
        }
        training_rows.push(train);
    }
    let scored = pairs.iter().zip(scores).map(|(pair, score)| ScoredPair { pair: pair.clone(), score }).collect();
    Ok(CrossValidation { scored, folds, training_rows })
}

/// Scores in ranking order: descending score, then ascending pair id.
pub fn rank(scored: &[ScoredPair]) -> Vec<&ScoredPair> {
    let mut ranked: Vec<&ScoredPair> = scored.iter().collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.pair.key().cmp(&b.pair.key())));
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

fn positives(scored: &[ScoredPair]) -> Result<usize> {
    match scored.iter().filter(|s| s.pair.label.is_positive()).count() {
        0 => Err(Error::Evaluation("no positive pairs to rank".into())),
        n => Ok(n),
    }
}

/// One point per prefix of the ranking.
pub fn pr_curve(scored: &[ScoredPair]) -> Result<Vec<PrPoint>> {
    let total = positives(scored)? as f64;
    let mut tp = 0usize;
    Ok(rank(scored)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            tp += s.pair.label.is_positive() as usize;
            PrPoint { recall: tp as f64 / total, precision: tp as f64 / (i + 1) as f64 }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolatedPoint {
    pub recall_level: f64,
    pub precision: f64,
}

/// `max { precision(r') : r' >= level }`, or 0 when no point reaches the level.
pub fn interpolated_precision(curve: &[PrPoint], recall_levels: &[f64]) -> Vec<InterpolatedPoint> {
    recall_levels
        .iter()
        .map(|&level| InterpolatedPoint {
            recall_level: level,
            precision: curve.iter().filter(|p| p.recall >= level).map(|p| p.precision).fold(0.0, f64::max),
        })
        .collect()
}

/// Average over positives of the precision at each positive's rank.
pub fn mean_average_precision(scored: &[ScoredPair]) -> Result<f64> {
    let total = positives(scored)?;
    let mut tp = 0usize;
    let mut sum = 0.0;
    for (i, s) in rank(scored).into_iter().enumerate() {
        if s.pair.label.is_positive() {
            tp += 1;
            sum += tp as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-tailed, from Student's t with `n - 2` degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Sample Pearson correlation with its two-tailed p-value.
///
/// The p-value is `I_{df/(df+t²)}(df/2, 1/2)` where `I` is the regularised
/// incomplete beta function and `t = r·sqrt(df/(1-r²))`.
pub fn pearson(values: &[f64], labels: &[f64]) -> Result<CorrelationResult> {
    let n = values.len();
    if n != labels.len() {
        return Err(Error::Evaluation(format!("{n} values but {} labels", labels.len())));
    }
    if n < 3 {
        return Err(Error::UndefinedCorrelation(format!("need at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(values), mean(labels));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in values.iter().zip(labels) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // spreads at rounding-noise level count as constant
    let flat = |ss: f64, m: f64| ss <= n as f64 * (1e-12 * m.abs().max(1.0)).powi(2);
    if flat(sxx, mx) || flat(syy, my) {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationResult { r, p_value: t_test_p_value(r, n), n })
}

fn t_test_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let one_minus = 1.0 - r * r;
    if one_minus <= 0.0 {
        return 0.0;
    }
    let t2 = r * r * df / one_minus;
    statrs::function::beta::beta_reg(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0)
}
