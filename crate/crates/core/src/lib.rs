//! Citation influence classification from publication full texts.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`] loads paper records and the labelled citing/cited pairs.
//! 2. [`citeparse`] splits each citing paper into running text and
//!    bibliography, then links in-text markers to bibliography entries.
//! 3. [`features`] computes the three per-pair predictors: direct citation
//!    count, author overlap and tf-idf abstract similarity.
//! 4. [`forest`] and [`eval`] train a bagged decision-tree ensemble under
//!    stratified cross-validation and score it with interpolated
//!    precision, Pearson correlation and mean average precision.

pub mod citeparse;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
pub mod rng;
pub mod synthetic;
pub mod text;

pub use citeparse::{BibliographyEntry, CiteParseConfig, InTextCitation, ParsedPaper};
pub use corpus::{CitationPair, Corpus, CorpusStats, Label, PairSet, PaperRecord};
pub use error::{Error, ErrorKind, Result};
pub use eval::{CorrelationResult, EvaluationReport, FeatureSet, ScoredPair};
pub use features::{F4Mode, FeatureRow, FeatureVector, TfidfModel};
pub use forest::{ForestConfig, ForestModel};
