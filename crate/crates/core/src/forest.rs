//! Bagged decision trees with Gini splits and per-split feature sampling.
//!
//! Each tree sees a bootstrap resample of the training rows drawn from its
//! own seeded stream (`derive_seed(master, tree_index)`), so trees can be
//! built on any thread in any order and still reproduce bit for bit.
//! Training rows are sorted by id before sampling, which makes the model
//! independent of input row order.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Splits must beat the parent impurity by more than this.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub tree_count: usize,
    /// `None` grows trees until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` resolves to `floor(log2(d)) + 1`.
    pub features_per_split: Option<usize>,
    pub seed: u64,
    /// Reweight classes to equal total weight. Off by default.
    pub balanced_class_weight: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            tree_count: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            seed: 42,
            balanced_class_weight: false,
        }
    }
}

impl ForestConfig {
    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features.max(1) as f64).log2().floor() as usize + 1)
            .min(n_features)
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::Config("tree_count must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if let Some(k) = self.features_per_split {
            if k == 0 || k > n_features {
                return Err(Error::Config(format!("features_per_split must be in [1, {n_features}], got {k}")));
            }
        }
        Ok(())
    }
}

/// One training row.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub x: Vec<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Training rows (with bootstrap multiplicity) per class.
        counts: [u32; 2],
        positive_fraction: f64,
    },
}

/// Arena of nodes; the root is node 0 and children always follow parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidData("tree has no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split { left, right, threshold, .. } => {
                    if *left <= i || *right <= i || *left >= nodes.len() || *right >= nodes.len() {
                        return Err(Error::InvalidData(format!("node {i} has invalid children")));
                    }
                    if threshold.is_nan() {
                        return Err(Error::InvalidData(format!("node {i} has a NaN threshold")));
                    }
                }
                Node::Leaf { positive_fraction, .. } => {
                    if !(0.0..=1.0).contains(positive_fraction) {
                        return Err(Error::InvalidData(format!("leaf {i} fraction out of range")));
                    }
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Positive-class fraction of the leaf `x` falls into.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { positive_fraction, .. } => return *positive_fraction,
            }
        }
    }

    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    /// Grows one tree on `indices` (repeats allowed) into `samples`.
    ///
    /// `rng` drives per-node feature sampling. At each node the first
    /// `features_per_split` features of a random permutation are searched;
    /// when none of them improves on the parent impurity the search moves
    /// on through the rest of the permutation before giving up. Among the
    /// features searched the lowest weighted child Gini wins, ties going to
    /// the lower feature index and then the lower threshold.
    pub fn grow(samples: &[Sample], indices: &[usize], config: &ForestConfig, rng: &mut SeededRng) -> Result<Self> {
        let n_features = check_samples(samples)?;
        config.validate(n_features)?;
        let weights = class_weights(samples, config.balanced_class_weight);
        let mut builder = Builder {
            samples,
            weights,
            config,
            n_features,
            k: config.resolved_features_per_split(n_features),
            rng,
            nodes: Vec::new(),
        };
        let mut idx = indices.to_vec();
        builder.build(&mut idx, 0);
        Ok(Self { nodes: builder.nodes })
    }
}

fn check_samples(samples: &[Sample]) -> Result<usize> {
    let first = samples.first().ok_or_else(|| Error::Training("no training rows".into()))?;
    let d = first.x.len();
    if d == 0 {
        return Err(Error::Training("rows have no features".into()));
    }
    for s in samples {
        if s.x.len() != d {
            return Err(Error::Training(format!("row `{}` has {} features, expected {d}", s.id, s.x.len())));
        }
        if s.x.iter().any(|v| v.is_nan()) {
            return Err(Error::Training(format!("row `{}` has a NaN feature", s.id)));
        }
    }
    Ok(d)
}

fn class_weights(samples: &[Sample], balanced: bool) -> [f64; 2] {
    if !balanced {
        return [1.0, 1.0];
    }
    let pos = samples.iter().filter(|s| s.label.is_positive()).count() as f64;
    let neg = samples.len() as f64 - pos;
    let n = samples.len() as f64;
    [if neg > 0.0 { n / (2.0 * neg) } else { 1.0 }, if pos > 0.0 { n / (2.0 * pos) } else { 1.0 }]
}

pub(crate) fn gini(w: [f64; 2]) -> f64 {
    let total = w[0] + w[1];
    if total <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (w[0] / total, w[1] / total);
    1.0 - p0 * p0 - p1 * p1
}

struct Builder<'a> {
    samples: &'a [Sample],
    weights: [f64; 2],
    config: &'a ForestConfig,
    n_features: usize,
    k: usize,
    rng: &'a mut SeededRng,
    nodes: Vec<Node>,
}

#[derive(Clone, Copy)]
struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn class(&self, i: usize) -> usize {
        self.samples[i].label.is_positive() as usize
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let mut counts = [0u32; 2];
        let mut w = [0.0; 2];
        for &i in idx.iter() {
            let c = self.class(i);
            counts[c] += 1;
            w[c] += self.weights[c];
        }
        let leaf = Node::Leaf { counts, positive_fraction: if w[0] + w[1] > 0.0 { w[1] / (w[0] + w[1]) } else { 0.0 } };
        self.nodes.push(leaf.clone());

        let parent = gini(w);
        let depth_reached = self.config.max_depth.is_some_and(|m| depth >= m);
        if parent <= 0.0 || depth_reached || idx.len() < 2 * self.config.min_leaf {
            return at;
        }
        let Some(best) = self.choose_split(idx, w, parent) else {
            return at;
        };

        idx.sort_by(|&a, &b| {
            let (va, vb) = (self.samples[a].x[best.feature], self.samples[b].x[best.feature]);
            (va > best.threshold).cmp(&(vb > best.threshold)).then(a.cmp(&b))
        });
        let split_at = idx.partition_point(|&i| self.samples[i].x[best.feature] <= best.threshold);
        let (lo, hi) = idx.split_at_mut(split_at);
        let left = self.build(lo, depth + 1);
        let right = self.build(hi, depth + 1);
        self.nodes[at] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        at
    }

    fn choose_split(&mut self, idx: &[usize], w: [f64; 2], parent: f64) -> Option<Candidate> {
        let mut order: Vec<usize> = (0..self.n_features).collect();
        self.rng.shuffle(&mut order);
        let mut best: Option<Candidate> = None;
        for (searched, &feature) in order.iter().enumerate() {
            if searched >= self.k && best.is_some() {
                break;
            }
            if let Some(c) = self.best_threshold(idx, feature, w) {
                if c.impurity < parent - MIN_GAIN && better(&c, best.as_ref()) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(&self, idx: &[usize], feature: usize, total: [f64; 2]) -> Option<Candidate> {
        let mut sorted: Vec<(f64, usize)> = idx.iter().map(|&i| (self.samples[i].x[feature], self.class(i))).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total_w = total[0] + total[1];
        let min_leaf = self.config.min_leaf;
        let mut left = [0.0; 2];
        let mut best: Option<Candidate> = None;
        for i in 0..sorted.len() - 1 {
            left[sorted[i].1] += self.weights[sorted[i].1];
            let (a, b) = (sorted[i].0, sorted[i + 1].0);
            if a == b || i + 1 < min_leaf || sorted.len() - i - 1 < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let (wl, wr) = (left[0] + left[1], right[0] + right[1]);
            let impurity = (wl * gini(left) + wr * gini(right)) / total_w;
            let mid = a + (b - a) / 2.0;
            let threshold = if mid < b { mid } else { a };
            let cand = Candidate { impurity, feature, threshold };
            if best.is_none_or(|bst| impurity < bst.impurity - MIN_GAIN) {
                best = Some(cand);
            }
        }
        best
    }
}

fn better(c: &Candidate, best: Option<&Candidate>) -> bool {
    match best {
        None => true,
        Some(b) if c.impurity < b.impurity - MIN_GAIN => true,
        Some(b) if c.impurity <= b.impurity + MIN_GAIN => {
            (c.feature, c.threshold).partial_cmp(&(b.feature, b.threshold)) == Some(Ordering::Less)
        }
        _ => false,
    }
}

/// The generator for tree `tree_index`; the bootstrap is drawn from it first.
pub fn tree_rng(seed: u64, tree_index: usize) -> SeededRng {
    SeededRng::child(seed, tree_index as u64)
}

/// `n` draws with replacement from `0..n`.
pub fn bootstrap(n: usize, rng: &mut SeededRng) -> Vec<usize> {
    (0..n).map(|_| rng.below(n)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub feature_names: Vec<String>,
    pub trees: Vec<DecisionTree>,
}

/// Orders rows by id, breaking ties on features and label.
pub fn sort_samples(samples: &mut [Sample]) {
    samples.sort_by(|a, b| {
        a.id.cmp(&b.id)
            .then_with(|| {
                a.x.iter().zip(&b.x).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
            })
            .then(a.label.cmp(&b.label))
    });
}

impl ForestModel {
    pub fn train(samples: &[Sample], feature_names: &[&str], config: &ForestConfig) -> Result<Self> {
        let n_features = check_samples(samples)?;
        if feature_names.len() != n_features {
            return Err(Error::Training(format!("{} feature names for {n_features} features", feature_names.len())));
        }
        config.validate(n_features)?;
        let positives = samples.iter().filter(|s| s.label.is_positive()).count();
        if positives == 0 || positives == samples.len() {
            return Err(Error::Training("training data contains a single class".into()));
        }
        let mut sorted = samples.to_vec();
        sort_samples(&mut sorted);
        let n = sorted.len();
        let trees = (0..config.tree_count)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(config.seed, t);
                let idx = bootstrap(n, &mut rng);
                DecisionTree::grow(&sorted, &idx, config, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config: *config, feature_names: feature_names.iter().map(|s| s.to_string()).collect(), trees })
    }

    pub fn from_parts(config: ForestConfig, feature_names: Vec<String>, trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.len() != config.tree_count {
            return Err(Error::InvalidData(format!("config says {} trees, got {}", config.tree_count, trees.len())));
        }
        for tree in &trees {
            for node in tree.nodes() {
                if let Node::Split { feature, .. } = node {
                    if *feature >= feature_names.len() {
                        return Err(Error::InvalidData(format!("split on unknown feature {feature}")));
                    }
                }
            }
        }
        Ok(Self { config, feature_names, trees })
    }

    /// Mean positive-class leaf fraction over trees.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if self.predict_proba(x) >= 0.5 {
            Label::Influential
        } else {
            Label::Incidental
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest models always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ForestModel = serde_json::from_str(text)?;
        let trees = raw.trees.into_iter().map(|t| DecisionTree::from_nodes(t.nodes)).collect::<Result<Vec<_>>>()?;
        Self::from_parts(raw.config, raw.feature_names, trees)
    }
}
