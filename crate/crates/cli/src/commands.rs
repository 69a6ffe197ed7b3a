//! The four subcommands. Each returns the text to print and writes its
//! artifacts under the configured output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use citegauge_core::citeparse::ParseWarning;
use citegauge_core::corpus::{filter_valid_pairs, load_corpus, load_pairs, FileError, RowIssue};
use citegauge_core::eval::evaluate;
use citegauge_core::features::{extract_all, write_feature_csv, ExtractionFailure, FeatureTable};
use citegauge_core::{CitationPair, Corpus, CorpusStats, Error, EvaluationReport, Result};
use log::{info, warn};
use serde::Serialize;

use crate::config::RunConfig;

pub const INGEST_FILE: &str = "ingest.json";
pub const FEATURES_FILE: &str = "features.csv";
pub const FAILURES_FILE: &str = "features_failures.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TABLE1_FILE: &str = "table1.csv";
pub const TABLE2_FILE: &str = "table2.csv";
pub const CURVE_FILE: &str = "pr_points.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarningRow {
    pub citing_id: String,
    pub cited_id: Option<String>,
    pub kind: &'static str,
    pub detail: String,
}

impl From<&ParseWarning> for WarningRow {
    fn from(w: &ParseWarning) -> Self {
        Self { citing_id: w.citing_id.clone(), cited_id: w.cited_id.clone(), kind: w.kind_name(), detail: w.detail() }
    }
}

/// Everything `ingest` learns about the inputs.
#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub papers: usize,
    pub stats: CorpusStats,
    pub load_errors: Vec<FileError>,
    pub row_issues: Vec<RowIssue>,
    pub unresolved_markers: usize,
    pub warnings: Vec<WarningRow>,
}

struct Inputs {
    corpus: Corpus,
    load_errors: Vec<FileError>,
    row_issues: Vec<RowIssue>,
    valid: Vec<CitationPair>,
    stats: CorpusStats,
}

fn load_inputs(config: &RunConfig) -> Result<Inputs> {
    let (corpus, report) = load_corpus(&config.corpus_dir)?;
    for e in &report.errors {
        warn!("skipped {}: {}", e.path.display(), e.message);
    }
    let set = load_pairs(&config.pairs_file, &corpus)?;
    for issue in &set.issues {
        warn!("{}: line {}: {:?}", config.pairs_file.display(), issue.line, issue.kind);
    }
    let valid = filter_valid_pairs(&set.pairs, &corpus);
    let mut stats = set.stats;
    stats.record_filter(&valid);
    stats.check()?;
    info!("{} papers, {} pairs, {} with abstracts", corpus.len(), stats.total_pairs, stats.filtered_pairs);
    Ok(Inputs { corpus, load_errors: report.errors, row_issues: set.issues, valid, stats })
}

fn output_path(config: &RunConfig, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    Ok(config.output_dir.join(name))
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn extract(inputs: &Inputs, config: &RunConfig) -> Result<FeatureTable> {
    if inputs.valid.is_empty() {
        return Err(Error::InvalidData("no citation pairs left after dropping pairs without abstracts".into()));
    }
    let table = extract_all(&inputs.valid, &inputs.corpus, &config.feature_config())?;
    for f in &table.failures {
        warn!("{} -> {}: {}", f.pair.citing_id, f.pair.cited_id, f.message);
    }
    if table.rows.is_empty() {
        return Err(Error::InvalidData("feature extraction failed for every pair".into()));
    }
    Ok(table)
}

pub fn cmd_ingest(config: &RunConfig) -> Result<String> {
    let inputs = load_inputs(config)?;
    let warnings: Vec<WarningRow> = if inputs.valid.is_empty() {
        Vec::new()
    } else {
        extract_all(&inputs.valid, &inputs.corpus, &config.feature_config())?
            .warnings
            .iter()
            .map(WarningRow::from)
            .collect()
    };
    let summary = IngestSummary {
        papers: inputs.corpus.len(),
        stats: inputs.stats,
        load_errors: inputs.load_errors,
        row_issues: inputs.row_issues,
        unresolved_markers: warnings.iter().filter(|w| w.kind == "unresolved_marker").count(),
        warnings,
    };
    let path = output_path(config, INGEST_FILE)?;
    write_text(&path, &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    let s = &summary.stats;
    Ok(format!(
        "papers: {}\npairs: {} ({} incidental, {} influential)\nwith abstracts: {} ({} influential)\n\
         unreadable files: {}\nskipped rows: {}\nparse warnings: {} ({} unresolved markers)\n",
        summary.papers,
        s.total_pairs,
        s.incidental_count,
        s.influential_count,
        s.filtered_pairs,
        s.positive_after_filter,
        summary.load_errors.len(),
        summary.row_issues.len(),
        summary.warnings.len(),
        summary.unresolved_markers,
    ))
}

fn write_failures<W: Write>(w: W, failures: &[ExtractionFailure]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["citing_id", "cited_id", "message"])?;
    for f in failures {
        csv.write_record([&f.pair.citing_id, &f.pair.cited_id, &f.message])?;
    }
    csv.flush().map_err(|e| Error::io(FAILURES_FILE, e))
}

pub fn cmd_features(config: &RunConfig) -> Result<String> {
    let inputs = load_inputs(config)?;
    let table = extract(&inputs, config)?;
    let path = output_path(config, FEATURES_FILE)?;
    write_with(&path, |w| write_feature_csv(w, &table.rows))?;
    let sidecar = output_path(config, FAILURES_FILE)?;
    write_with(&sidecar, |w| write_failures(w, &table.failures))?;
    Ok(format!(
        "wrote {} feature rows to {}\n{} extraction failures, {} parse warnings\n",
        table.rows.len(),
        path.display(),
        table.failures.len(),
        table.warnings.len()
    ))
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<String> {
    let inputs = load_inputs(config)?;
    let table = extract(&inputs, config)?;
    let report = evaluate(&table.rows, inputs.stats, &config.evaluation_config())?;

    write_text(&output_path(config, REPORT_FILE)?, &(report.to_json() + "\n"))?;
    write_with(&output_path(config, TABLE1_FILE)?, |w| report.write_table1_csv(w))?;
    write_with(&output_path(config, TABLE2_FILE)?, |w| report.write_table2_csv(w))?;
    write_with(&output_path(config, CURVE_FILE)?, |w| report.write_curve_csv(w))?;
    Ok(report.render())
}

pub fn cmd_report(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report = EvaluationReport::from_json(&text)?;
    Ok(report.render())
}
