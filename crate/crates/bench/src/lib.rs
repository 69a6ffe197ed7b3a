//! Shared inputs for the benchmarks.

use citegauge_core::corpus::filter_valid_pairs;
use citegauge_core::features::{extract_all, FeatureConfig};
use citegauge_core::forest::Sample;
use citegauge_core::synthetic::{generate, SyntheticConfig, SyntheticDataset};

pub fn dataset(papers: usize, pairs: usize) -> SyntheticDataset {
    generate(&SyntheticConfig { papers, pairs, ..SyntheticConfig::default() })
}

/// Feature rows of a synthetic dataset as forest training samples.
pub fn samples(data: &SyntheticDataset) -> Vec<Sample> {
    let corpus = data.corpus().expect("synthetic ids are unique");
    let valid = filter_valid_pairs(&data.pairs, &corpus);
    let table = extract_all(&valid, &corpus, &FeatureConfig::default()).expect("synthetic features extract");
    table
        .rows
        .iter()
        .map(|r| Sample {
            id: format!("{}\t{}", r.pair.citing_id, r.pair.cited_id),
            x: r.features.to_array().to_vec(),
            label: r.pair.label,
        })
        .collect()
}
