//! The three per-pair predictors.
//!
//! * `f1`: direct in-text citation count (see [`crate::citeparse`]).
//! * `f4`: author overlap between citing and cited paper.
//! * `f9`: cosine similarity of the tf-idf vectors of the two abstracts,
//!   with idf fitted over every abstract in the corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::citeparse::{CiteParseConfig, ParseWarning, ParsedPaper};
use crate::corpus::{CitationPair, Corpus};
use crate::error::{Error, Result};
use crate::text::NameKey;

pub use crate::text::tokenize;

pub const FEATURE_NAMES: [&str; 3] = ["f1", "f4", "f9"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub f1_direct_count: u32,
    pub f4_author_overlap: f64,
    pub f9_abstract_sim: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 3] {
        [self.f1_direct_count as f64, self.f4_author_overlap, self.f9_abstract_sim]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F4Mode {
    #[default]
    Jaccard,
    /// 1.0 when the author sets intersect, 0.0 otherwise.
    Boolean,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub f4_mode: F4Mode,
    pub citeparse: CiteParseConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Term → dimension, dimensions assigned in lexicographic term order.
    pub vocabulary: BTreeMap<String, usize>,
    /// Indexed by dimension.
    pub document_frequency: Vec<usize>,
    pub document_count: usize,
}

/// Sparse vector with strictly increasing dimensions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn from_dense(values: &[f64]) -> Self {
        Self { entries: values.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, v)| (i, *v)).collect() }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, dim: usize) -> f64 {
        self.entries.binary_search_by_key(&dim, |(d, _)| *d).map_or(0.0, |i| self.entries[i].1)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, v)| *v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { entries: self.entries.iter().map(|(d, v)| (*d, v * factor)).collect() }
    }

    fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    fn dot(&self, other: &Self) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (da, va) = self.entries[i];
            let (db, vb) = other.entries[j];
            match da.cmp(&db) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += va * vb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Fits document frequencies over `abstracts`. Needs at least two documents.
pub fn fit_tfidf<S: AsRef<str>>(abstracts: &[S]) -> Result<TfidfModel> {
    if abstracts.len() < 2 {
        return Err(Error::Config(format!("tf-idf needs at least 2 abstracts, got {}", abstracts.len())));
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for text in abstracts {
        let terms: BTreeSet<String> = tokenize(text.as_ref()).into_iter().collect();
        for term in terms {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let vocabulary = df.keys().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(TfidfModel { vocabulary, document_frequency: df.into_values().collect(), document_count: abstracts.len() })
}

impl TfidfModel {
    /// Smoothed idf: `ln((1 + N) / (1 + df)) + 1`.
    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|&dim| self.idf_at(dim))
    }

    fn idf_at(&self, dim: usize) -> f64 {
        let n = self.document_count as f64;
        let df = self.document_frequency[dim] as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    /// Raw term frequency times idf; out-of-vocabulary terms are ignored.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for term in tokenize(text) {
            if let Some(&dim) = self.vocabulary.get(&term) {
                *counts.entry(dim).or_insert(0) += 1;
            }
        }
        SparseVector { entries: counts.into_iter().map(|(dim, tf)| (dim, tf as f64 * self.idf_at(dim))).collect() }
    }
}

/// `a·b / (‖a‖‖b‖)`, clamped to `[0, 1]`; zero when either vector is zero.
pub fn cosine_similarity(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(0.0, 1.0)
}

/// Jaccard overlap of normalised author names (`"smith j"`).
pub fn author_overlap<S: AsRef<str>>(citing: &[S], cited: &[S], mode: F4Mode) -> f64 {
    let keys = |names: &[S]| -> BTreeSet<String> {
        names.iter().filter_map(|n| NameKey::parse(n.as_ref())).map(|k| k.key()).collect()
    };
    let (a, b) = (keys(citing), keys(cited));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    let jaccard = a.intersection(&b).count() as f64 / union as f64;
    match mode {
        F4Mode::Jaccard => jaccard,
        F4Mode::Boolean if jaccard > 0.0 => 1.0,
        F4Mode::Boolean => 0.0,
    }
}

/// Features for one pair, parsing the citing paper from scratch.
pub fn extract_features(
    pair: &CitationPair,
    corpus: &Corpus,
    tfidf: &TfidfModel,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    let citing = corpus.get(&pair.citing_id).ok_or_else(|| Error::MissingRecord(pair.citing_id.clone()))?;
    let parsed = ParsedPaper::parse(citing);
    extract_with(pair, corpus, tfidf, config, &parsed).map(|(v, _)| v)
}

fn extract_with(
    pair: &CitationPair,
    corpus: &Corpus,
    tfidf: &TfidfModel,
    config: &FeatureConfig,
    parsed: &ParsedPaper,
) -> Result<(FeatureVector, Vec<ParseWarning>)> {
    let lookup = |id: &str| corpus.get(id).ok_or_else(|| Error::MissingRecord(id.to_string()));
    let citing = lookup(&pair.citing_id)?;
    let cited = lookup(&pair.cited_id)?;
    let direct = parsed.count_for(cited, &config.citeparse);
    let abstract_vector = |p: &crate::corpus::PaperRecord| tfidf.vectorize(p.abstract_text.as_deref().unwrap_or(""));
    let vector = FeatureVector {
        f1_direct_count: direct.count as u32,
        f4_author_overlap: author_overlap(&citing.authors, &cited.authors, config.f4_mode),
        f9_abstract_sim: cosine_similarity(&abstract_vector(citing), &abstract_vector(cited)),
    };
    Ok((vector, direct.warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub pair: CitationPair,
    pub features: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionFailure {
    pub pair: CitationPair,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
    pub failures: Vec<ExtractionFailure>,
    /// Citing-paper warnings first (one set per paper, in id order), then
    /// per-pair warnings in pair order.
    pub warnings: Vec<ParseWarning>,
}

/// Fits tf-idf over every corpus abstract and extracts all pairs.
pub fn fit_corpus_tfidf(corpus: &Corpus) -> Result<TfidfModel> {
    let abstracts: Vec<&str> = corpus.iter().filter_map(|p| p.abstract_text.as_deref()).collect();
    fit_tfidf(&abstracts)
}

/// Extracts features for every pair in parallel; output order follows `pairs`.
pub fn extract_all(pairs: &[CitationPair], corpus: &Corpus, config: &FeatureConfig) -> Result<FeatureTable> {
    let tfidf = fit_corpus_tfidf(corpus)?;
    extract_all_with(pairs, corpus, &tfidf, config)
}

pub fn extract_all_with(
    pairs: &[CitationPair],
    corpus: &Corpus,
    tfidf: &TfidfModel,
    config: &FeatureConfig,
) -> Result<FeatureTable> {
    let citing_ids: BTreeSet<&str> = pairs.iter().map(|p| p.citing_id.as_str()).collect();
    let parsed: HashMap<&str, ParsedPaper> =
        citing_ids.into_par_iter().filter_map(|id| corpus.get(id).map(|p| (id, ParsedPaper::parse(p)))).collect();

    let outcomes: Vec<Result<(FeatureVector, Vec<ParseWarning>)>> = pairs
        .par_iter()
        .map(|pair| {
            let parsed =
                parsed.get(pair.citing_id.as_str()).ok_or_else(|| Error::MissingRecord(pair.citing_id.clone()))?;
            extract_with(pair, corpus, tfidf, config, parsed)
        })
        .collect();

    let mut table = FeatureTable::default();
    let mut paper_ids: Vec<&&str> = parsed.keys().collect();
    paper_ids.sort();
    for id in paper_ids {
        table.warnings.extend(parsed[*id].warnings());
    }
    for (pair, outcome) in pairs.iter().zip(outcomes) {
        match outcome {
            Ok((features, warnings)) => {
                table.rows.push(FeatureRow { pair: pair.clone(), features });
                table.warnings.extend(warnings);
            }
            Err(e) => table.failures.push(ExtractionFailure { pair: pair.clone(), message: e.to_string() }),
        }
    }
    Ok(table)
}

/// Writes `citing_id,cited_id,f1,f4,f9,label` with reals at six decimals.
pub fn write_feature_csv<W: Write>(writer: W, rows: &[FeatureRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["citing_id", "cited_id", "f1", "f4", "f9", "label"])?;
    for row in rows {
        let f = &row.features;
        csv.write_record([
            row.pair.citing_id.clone(),
            row.pair.cited_id.clone(),
            f.f1_direct_count.to_string(),
            format!("{:.6}", f.f4_author_overlap),
            format!("{:.6}", f.f9_abstract_sim),
            row.pair.label.to_string(),
        ])?;
    }
    csv.flush().map_err(|e| Error::io("<feature csv>", e))?;
    Ok(())
}
