//! Paper records, labelled citation pairs and the abstract-availability filter.
//!
//! A corpus is a directory of JSON documents, one paper per file:
//!
//! ```json
//! {"id": "P13-1001", "title": "...", "authors": ["A. Author"],
//!  "abstract": "..." , "body": "...", "references": null}
//! ```
//!
//! Labels live in a tab-separated file of `citing_id<TAB>cited_id<TAB>label`
//! rows with an optional header.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: String,
    pub title: String,
    pub authors: Vec<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub body: String,
    pub references: Option<Vec<String>>,
}

impl PaperRecord {
    /// Normalises and validates a record as it would be after loading.
    pub fn validated(mut self) -> Result<Self> {
        if self.id.trim().is_empty() {
            return Err(Error::InvalidData("paper id is empty".into()));
        }
        if self.authors.iter().any(|a| a.trim().is_empty()) {
            return Err(Error::InvalidData(format!("paper `{}` has an empty author name", self.id)));
        }
        if self.abstract_text.as_deref().is_some_and(|a| a.trim().is_empty()) {
            self.abstract_text = None;
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<PaperRecord>(text)?.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("paper records always serialize")
    }

    pub fn has_abstract(&self) -> bool {
        self.abstract_text.is_some()
    }
}

/// Writes one record as `<dir>/<id>.json`, replacing characters that are
/// awkward in file names.
pub fn write_paper(dir: &Path, record: &PaperRecord) -> Result<PathBuf> {
    let stem: String = record
        .id
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, record.to_json()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub errors: Vec<FileError>,
}

/// Immutable id → record index.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    papers: BTreeMap<String, PaperRecord>,
    sources: BTreeMap<String, PathBuf>,
}

impl Corpus {
    pub fn from_records(records: impl IntoIterator<Item = PaperRecord>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for (i, record) in records.into_iter().enumerate() {
            corpus.insert(record.validated()?, PathBuf::from(format!("<record {i}>")))?;
        }
        Ok(corpus)
    }

    fn insert(&mut self, record: PaperRecord, source: PathBuf) -> Result<()> {
        if let Some(first) = self.sources.get(&record.id) {
            return Err(Error::DuplicateId { id: record.id, first: first.clone(), second: source });
        }
        self.sources.insert(record.id.clone(), source);
        self.papers.insert(record.id.clone(), record);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.papers.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    /// Records in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &PaperRecord> {
        self.papers.values()
    }

    pub fn source(&self, id: &str) -> Option<&Path> {
        self.sources.get(id).map(PathBuf::as_path)
    }
}

/// Loads every `*.json` file directly under `dir`.
///
/// Malformed files are collected into the [`LoadReport`]; an unreadable
/// directory or a duplicated id aborts the load.
pub fn load_corpus(dir: &Path) -> Result<(Corpus, LoadReport)> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_json = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        if is_json && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();

    let parsed: Vec<(PathBuf, std::result::Result<PaperRecord, String>)> = paths
        .into_par_iter()
        .map(|path| {
            let outcome = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|text| PaperRecord::from_json(&text).map_err(|e| e.to_string()));
            (path, outcome)
        })
        .collect();

    let mut corpus = Corpus::default();
    let mut report = LoadReport::default();
    for (path, outcome) in parsed {
        match outcome {
            Ok(record) => corpus.insert(record, path)?,
            Err(message) => {
                log::warn!("skipping {}: {message}", path.display());
                report.errors.push(FileError { path, message });
            }
        }
    }
    Ok((corpus, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Incidental,
    Influential,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Influential
    }

    pub fn as_f64(self) -> f64 {
        u8::from(self) as f64
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        match label {
            Label::Incidental => 0,
            Label::Influential => 1,
        }
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, String> {
        match value {
            0 => Ok(Label::Incidental),
            1 => Ok(Label::Influential),
            other => Err(format!("label must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CitationPair {
    pub citing_id: String,
    pub cited_id: String,
    pub label: Label,
}

impl CitationPair {
    pub fn new(citing_id: impl Into<String>, cited_id: impl Into<String>, label: Label) -> Self {
        Self { citing_id: citing_id.into(), cited_id: cited_id.into(), label }
    }

    /// Ordering key used wherever pairs need a deterministic tie-break.
    pub fn key(&self) -> (&str, &str) {
        (&self.citing_id, &self.cited_id)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_pairs: usize,
    pub incidental_count: usize,
    pub influential_count: usize,
    pub filtered_pairs: usize,
    pub positive_after_filter: usize,
}

impl CorpusStats {
    fn count(&mut self, label: Label) {
        self.total_pairs += 1;
        match label {
            Label::Incidental => self.incidental_count += 1,
            Label::Influential => self.influential_count += 1,
        }
    }

    /// Records the outcome of [`filter_valid_pairs`].
    pub fn record_filter(&mut self, filtered: &[CitationPair]) {
        self.filtered_pairs = filtered.len();
        self.positive_after_filter = filtered.iter().filter(|p| p.label.is_positive()).count();
    }

    pub fn check(&self) -> Result<()> {
        if self.incidental_count + self.influential_count != self.total_pairs {
            return Err(Error::Invariant(format!("class counts do not sum to total: {self:?}")));
        }
        if self.filtered_pairs > self.total_pairs {
            return Err(Error::Invariant(format!("more filtered than total pairs: {self:?}")));
        }
        if self.positive_after_filter > self.influential_count || self.positive_after_filter > self.filtered_pairs {
            return Err(Error::Invariant(format!("filtered positives out of range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum RowIssueKind {
    Malformed(String),
    BadLabel(String),
    SelfCitation,
    UnknownId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowIssue {
    pub line: usize,
    #[serde(flatten)]
    pub kind: RowIssueKind,
}

/// Result of [`load_pairs`]: usable pairs, raw label counts and skipped rows.
#[derive(Debug, Clone, Default)]
pub struct PairSet {
    pub pairs: Vec<CitationPair>,
    pub stats: CorpusStats,
    pub issues: Vec<RowIssue>,
}

pub fn load_pairs(path: &Path, corpus: &Corpus) -> Result<PairSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs(&text, corpus)
}

/// Parses label rows. `stats` counts every row with a valid label, including
/// rows later dropped because an id is missing from the corpus.
pub fn parse_pairs(text: &str, corpus: &Corpus) -> Result<PairSet> {
    let mut set = PairSet::default();
    let mut seen_first = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').map(str::trim).collect();
        let first = !seen_first;
        seen_first = true;
        if fields.len() != 3 {
            set.issues.push(RowIssue {
                line,
                kind: RowIssueKind::Malformed(format!("expected 3 tab-separated fields, got {}", fields.len())),
            });
            continue;
        }
        let label_field = fields[2];
        if label_field.parse::<f64>().is_err() {
            if !first {
                set.issues.push(RowIssue {
                    line,
                    kind: RowIssueKind::Malformed(format!("non-numeric label `{label_field}`")),
                });
            }
            continue;
        }
        let label = match label_field.parse::<u8>().ok().and_then(|v| Label::try_from(v).ok()) {
            Some(label) => label,
            None => {
                set.issues.push(RowIssue { line, kind: RowIssueKind::BadLabel(label_field.to_string()) });
                continue;
            }
        };
        let (citing, cited) = (fields[0], fields[1]);
        if citing.is_empty() || cited.is_empty() {
            set.issues.push(RowIssue { line, kind: RowIssueKind::Malformed("empty paper id".into()) });
            continue;
        }
        if citing == cited {
            set.issues.push(RowIssue { line, kind: RowIssueKind::SelfCitation });
            continue;
        }
        set.stats.count(label);
        let unknown: Vec<&str> = [citing, cited].into_iter().filter(|id| !corpus.contains(id)).collect();
        if !unknown.is_empty() {
            log::warn!("line {line}: dropping pair with unknown id(s) {}", unknown.join(", "));
            set.issues.push(RowIssue { line, kind: RowIssueKind::UnknownId(unknown.join(",")) });
            continue;
        }
        set.pairs.push(CitationPair::new(citing, cited, label));
    }
    set.stats.check()?;
    Ok(set)
}

/// Keeps the pairs whose citing and cited papers both have an abstract.
pub fn filter_valid_pairs(pairs: &[CitationPair], corpus: &Corpus) -> Vec<CitationPair> {
    let has_abstract = |id: &str| corpus.get(id).is_some_and(PaperRecord::has_abstract);
    pairs.iter().filter(|p| has_abstract(&p.citing_id) && has_abstract(&p.cited_id)).cloned().collect()
}
