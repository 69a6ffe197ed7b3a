//! Reference-section segmentation, bibliography parsing and in-text marker
//! linking.
//!
//! The direct citation count for a (citing, cited) pair is obtained in three
//! steps: split the citing body at its last reference heading, pick the
//! bibliography entry that best matches the cited paper, then count the
//! in-text markers in the running text that resolve to that entry.

use std::collections::HashSet;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::text::{fold, tokenize, NameKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiteParseConfig {
    /// Minimum entry/paper match score for an entry to count as the cited paper.
    pub match_threshold: f64,
    pub title_weight: f64,
    pub author_weight: f64,
}

impl Default for CiteParseConfig {
    fn default() -> Self {
        Self { match_threshold: 0.5, title_weight: 0.7, author_weight: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BibliographyEntry {
    /// 1-based position in the reference list.
    pub index: usize,
    pub raw: String,
    pub surname_tokens: Vec<String>,
    pub year: Option<u16>,
    pub numeric_key: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InTextCitation {
    /// Byte offset of the marker in the main text.
    pub offset: usize,
    pub marker: String,
    pub entry_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedMarker {
    pub offset: usize,
    pub marker: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CitationScan {
    pub citations: Vec<InTextCitation>,
    pub unresolved: Vec<UnresolvedMarker>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmented {
    pub main_text: String,
    pub reference_block: Vec<String>,
    /// False when neither a heading nor an explicit list was found.
    pub bibliography_found: bool,
}

static HEADING: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?mi)^[ \t]*(?:\d+(?:\.\d+)*\.?[ \t]+)?(?:references|bibliography)[ \t]*:?[ \t]*\r?$").unwrap()
});
static BRACKET_START: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\[\d+\]").unwrap());
static DOT_START: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\d{1,3}\.\s").unwrap());
static AUTHOR_START: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"^\s*(?:\p{Lu}[\p{L}'’\-]+(?:\s+\p{Lu}[\p{L}'’\-]+)*,|(?:\p{Lu}\.\s*)+\p{Lu}[\p{L}'’\-]+)").unwrap()
});

/// Splits `body` at the last reference heading.
///
/// Without a heading the whole body is returned as main text with an empty
/// block and `bibliography_found == false`.
pub fn segment_references(body: &str) -> Segmented {
    match HEADING.find_iter(body).last() {
        Some(heading) => Segmented {
            main_text: body[..heading.start()].to_string(),
            reference_block: split_entries(&body[heading.end()..]),
            bibliography_found: true,
        },
        None => Segmented { main_text: body.to_string(), reference_block: Vec::new(), bibliography_found: false },
    }
}

/// Uses the paper's explicit reference list when it has one.
pub fn segment_paper(paper: &PaperRecord) -> Segmented {
    match &paper.references {
        Some(list) => {
            Segmented { main_text: paper.body.clone(), reference_block: list.clone(), bibliography_found: true }
        }
        None => segment_references(&paper.body),
    }
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// One string per bibliography entry.
///
/// Entry boundaries are, in order of preference: `[n]` line prefixes,
/// `n.` line prefixes, blank lines, and finally lines that open with an
/// author name right after a line ending in a period.
fn split_entries(block: &str) -> Vec<String> {
    let lines: Vec<&str> = block.lines().collect();
    let starts: Vec<bool> = if lines.iter().any(|l| BRACKET_START.is_match(l)) {
        lines.iter().map(|l| BRACKET_START.is_match(l)).collect()
    } else if lines.iter().filter(|l| DOT_START.is_match(l)).count() >= 2 {
        lines.iter().map(|l| DOT_START.is_match(l)).collect()
    } else if block.trim().contains("\n\n") || block.trim().contains("\n\r\n") {
        return block
            .split("\n\n")
            .flat_map(|p| p.split("\n\r\n"))
            .map(collapse_ws)
            .filter(|p| !p.is_empty())
            .collect();
    } else {
        let mut prev_closed = true;
        lines
            .iter()
            .map(|l| {
                let start = !l.trim().is_empty() && prev_closed && AUTHOR_START.is_match(l);
                if !l.trim().is_empty() {
                    prev_closed = l.trim_end().ends_with('.');
                }
                start
            })
            .collect()
    };

    let mut entries: Vec<String> = Vec::new();
    let mut current: Option<String> = None;
    for (line, start) in lines.iter().zip(starts) {
        if start {
            entries.extend(current.take());
            current = Some(line.to_string());
        } else if let Some(cur) = current.as_mut() {
            cur.push(' ');
            cur.push_str(line);
        }
    }
    entries.extend(current);
    entries.into_iter().map(|e| collapse_ws(&e)).filter(|e| !e.is_empty()).collect()
}

static KEY_BRACKET: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*\[(\d+)\]\s*").unwrap());
static KEY_DOT: Lazy<Regex> = Lazy::new(|| Regex::new(r"^\s*(\d{1,3})\.\s+").unwrap());
static YEAR: Lazy<Regex> = Lazy::new(|| Regex::new(r"\b(1[89]\d\d|20\d\d|2100)[a-z]?\b").unwrap());

const NOT_SURNAMES: &[&str] = &["And", "Et", "Al", "In", "Ed", "Eds", "The", "With"];

/// Parses one raw bibliography string.
///
/// The author region is the text before the year, cut at the first period
/// that closes a word of two or more letters (initials do not close it).
/// Entries without a year use the text before that period, or nothing.
pub fn parse_bib_entry(raw: &str, index: usize) -> BibliographyEntry {
    let text = collapse_ws(raw);
    let (numeric_key, rest) = if let Some(c) = KEY_BRACKET.captures(&text) {
        (c[1].parse().ok(), &text[c.get(0).unwrap().end()..])
    } else if let Some(c) = KEY_DOT.captures(&text) {
        (c[1].parse().ok(), &text[c.get(0).unwrap().end()..])
    } else {
        (None, text.as_str())
    };

    let year_match = YEAR.captures(rest).and_then(|c| {
        let m = c.get(1).unwrap();
        m.as_str().parse::<u16>().ok().map(|y| (y, m.start()))
    });
    let before_year = match year_match {
        Some((_, at)) => &rest[..at],
        None => rest,
    };
    let region = match closing_period(before_year) {
        Some(at) => &before_year[..at],
        None if year_match.is_some() => before_year,
        None => "",
    };

    let mut surname_tokens: Vec<String> = Vec::new();
    for token in region.split(|c: char| !(c.is_alphabetic() || c == '\'' || c == '’' || c == '-')) {
        let token = token.trim_matches(|c: char| c == '-' || c == '\'' || c == '’');
        let mut chars = token.chars();
        let Some(first) = chars.next() else { continue };
        let len = token.chars().count();
        let has_lower = token.chars().any(char::is_lowercase);
        let plausible = first.is_uppercase() && len >= 2 && (has_lower || len >= 3);
        if plausible && !NOT_SURNAMES.contains(&token) && !surname_tokens.iter().any(|s| s == token) {
            surname_tokens.push(token.to_string());
        }
    }

    BibliographyEntry { index, raw: text.clone(), surname_tokens, year: year_match.map(|(y, _)| y), numeric_key }
}

/// Byte index of the first period that follows a run of two or more letters.
fn closing_period(s: &str) -> Option<usize> {
    let mut run = 0;
    for (i, c) in s.char_indices() {
        if c == '.' && run >= 2 {
            return Some(i);
        }
        run = if c.is_alphabetic() { run + 1 } else { 0 };
    }
    None
}

/// Weighted title-token and surname overlap between an entry and a paper.
///
/// Title overlap is the fraction of the paper's distinct title terms found
/// in the entry; author overlap is the fraction of the paper's author
/// surnames found among the entry's surname tokens.
pub fn match_entry_to_paper(entry: &BibliographyEntry, cited: &PaperRecord, config: &CiteParseConfig) -> f64 {
    let title_terms: HashSet<String> = tokenize(&fold(&cited.title)).into_iter().collect();
    let entry_terms: HashSet<String> = tokenize(&fold(&entry.raw)).into_iter().collect();
    let title_overlap = if title_terms.is_empty() {
        0.0
    } else {
        title_terms.intersection(&entry_terms).count() as f64 / title_terms.len() as f64
    };

    let cited_surnames: HashSet<String> = cited
        .authors
        .iter()
        .filter_map(|a| NameKey::parse(a))
        .filter_map(|k| k.surname.split_whitespace().last().map(String::from))
        .collect();
    let entry_surnames: HashSet<String> = entry.surname_tokens.iter().map(|s| fold(s)).collect();
    let author_overlap = if cited_surnames.is_empty() {
        0.0
    } else {
        cited_surnames.intersection(&entry_surnames).count() as f64 / cited_surnames.len() as f64
    };

    config.title_weight * title_overlap + config.author_weight * author_overlap
}

static NUMERIC_MARKER: Lazy<Regex> = Lazy::new(|| Regex::new(r"\[\s*(\d{1,4}(?:\s*[,;\-–]\s*\d{1,4})*)\s*\]").unwrap());
static PARENTHESIS: Lazy<Regex> = Lazy::new(|| Regex::new(r"\(([^()]{1,600})\)").unwrap());

const NAME: &str = r"(?:(?:van|von|de|der|den|del|da|di|du|la|le|dos|das)\s+)*\p{Lu}[\p{L}'’\-]+";
const YEARS: &str = r"\d{4}[a-z]?(?:\s*,\s*\d{4}[a-z]?)*";

static PAREN_PART: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"^\s*(?:(?:e\.g\.|i\.e\.|cf\.|see(?:\s+also)?)\s*,?\s*)?({NAME})(?:\s+et\s+al\.?|\s+(?:and|&)\s+({NAME}))?\s*,?\s*({YEARS})\s*$"
    ))
    .unwrap()
});
static NARRATIVE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(r"\b({NAME})(?:\s+et\s+al\.?|\s+(?:and|&)\s+({NAME}))?\s*\(\s*({YEARS})\s*\)")).unwrap()
});
static YEAR_ITEM: Lazy<Regex> = Lazy::new(|| Regex::new(r"(\d{4})([a-z]?)").unwrap());

const MAX_RANGE: u32 = 200;

/// Detects numeric and author-year markers and links each to an entry.
///
/// Numeric markers (`[n]`, `[n,m]`, `[n-m]`) are only scanned when at least
/// one entry carries a numeric key. Ranges expand inclusively. Every key or
/// year inside a marker produces one citation, or one unresolved record when
/// no entry matches.
pub fn find_in_text_citations(main_text: &str, entries: &[BibliographyEntry]) -> CitationScan {
    let mut scan = CitationScan::default();

    if entries.iter().any(|e| e.numeric_key.is_some()) {
        for caps in NUMERIC_MARKER.captures_iter(main_text) {
            let whole = caps.get(0).unwrap();
            for key in expand_keys(&caps[1]) {
                let linked = key.and_then(|k| entries.iter().find(|e| e.numeric_key == Some(k)));
                push(&mut scan, whole.start(), whole.as_str(), linked);
            }
        }
    }

    for caps in PARENTHESIS.captures_iter(main_text) {
        let inner = caps.get(1).unwrap();
        let mut part_start = inner.start();
        for part in inner.as_str().split(';') {
            if let Some(pc) = PAREN_PART.captures(part) {
                let offset = part_start + pc.get(1).unwrap().start();
                link_author_year(
                    &mut scan,
                    offset,
                    part.trim(),
                    &pc[1],
                    pc.get(2).map(|m| m.as_str()),
                    &pc[3],
                    entries,
                );
            }
            part_start += part.len() + 1;
        }
    }

    for caps in NARRATIVE.captures_iter(main_text) {
        let whole = caps.get(0).unwrap();
        link_author_year(
            &mut scan,
            whole.start(),
            whole.as_str(),
            &caps[1],
            caps.get(2).map(|m| m.as_str()),
            &caps[3],
            entries,
        );
    }

    scan.citations.sort_by_key(|c| (c.offset, c.entry_index));
    scan.unresolved.sort_by_key(|u| u.offset);
    scan
}

fn push(scan: &mut CitationScan, offset: usize, marker: &str, linked: Option<&BibliographyEntry>) {
    let marker = collapse_ws(marker);
    match linked {
        Some(entry) => scan.citations.push(InTextCitation { offset, marker, entry_index: entry.index }),
        None => scan.unresolved.push(UnresolvedMarker { offset, marker }),
    }
}

/// Keys inside a numeric marker; `None` stands for an item that cannot be
/// expanded (a reversed or oversized range).
fn expand_keys(list: &str) -> Vec<Option<u32>> {
    let mut keys = Vec::new();
    for item in list.split([',', ';']) {
        let bounds: Vec<Option<u32>> = item.split(['-', '–']).map(|s| s.trim().parse().ok()).collect();
        match bounds.as_slice() {
            [Some(k)] => keys.push(Some(*k)),
            [Some(lo), Some(hi)] if lo <= hi && hi - lo <= MAX_RANGE => keys.extend((*lo..=*hi).map(Some)),
            _ => keys.push(None),
        }
    }
    keys
}

fn last_word_folded(name: &str) -> String {
    fold(name.split_whitespace().last().unwrap_or(name))
}

fn link_author_year(
    scan: &mut CitationScan,
    offset: usize,
    marker: &str,
    surname: &str,
    second: Option<&str>,
    years: &str,
    entries: &[BibliographyEntry],
) {
    let first = last_word_folded(surname);
    let second = second.map(last_word_folded);
    for item in YEAR_ITEM.captures_iter(years) {
        let year: Option<u16> = item[1].parse().ok();
        let suffix = &item[2];
        let has = |e: &BibliographyEntry, name: &str| e.surname_tokens.iter().any(|s| fold(s) == name);
        let mut candidates: Vec<&BibliographyEntry> =
            entries.iter().filter(|e| e.year.is_some() && e.year == year && has(e, &first)).collect();
        // narrow only while at least one candidate survives
        let mut narrow = |keep: &dyn Fn(&BibliographyEntry) -> bool| {
            let kept: Vec<_> = candidates.iter().copied().filter(|e| keep(e)).collect();
            if !kept.is_empty() {
                candidates = kept;
            }
        };
        if let Some(second) = &second {
            narrow(&|e| has(e, second));
        }
        narrow(&|e| e.surname_tokens.first().is_some_and(|s| fold(s) == first));
        if !suffix.is_empty() {
            let tagged = format!("{}{}", &item[1], suffix);
            narrow(&|e| e.raw.contains(&tagged));
        }
        push(scan, offset, marker, candidates.first().copied());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarningKind {
    UnparseableBibliography,
    NoMatch { best_score: f64 },
    UnresolvedMarker { offset: usize, marker: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseWarning {
    pub citing_id: String,
    pub cited_id: Option<String>,
    #[serde(flatten)]
    pub kind: WarningKind,
}

impl ParseWarning {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            WarningKind::UnparseableBibliography => "unparseable_bibliography",
            WarningKind::NoMatch { .. } => "no_match",
            WarningKind::UnresolvedMarker { .. } => "unresolved_marker",
        }
    }

    pub fn detail(&self) -> String {
        match &self.kind {
            WarningKind::UnparseableBibliography => String::new(),
            WarningKind::NoMatch { best_score } => format!("best_score={best_score:.6}"),
            WarningKind::UnresolvedMarker { offset, marker } => format!("offset={offset} marker={marker}"),
        }
    }
}

/// A citing paper with its bibliography parsed and markers linked.
#[derive(Debug, Clone)]
pub struct ParsedPaper {
    pub id: String,
    pub main_text: String,
    pub entries: Vec<BibliographyEntry>,
    pub scan: CitationScan,
    pub bibliography_found: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectCount {
    pub count: usize,
    pub entry_index: Option<usize>,
    pub warnings: Vec<ParseWarning>,
}

impl ParsedPaper {
    pub fn parse(paper: &PaperRecord) -> Self {
        let segmented = segment_paper(paper);
        let entries: Vec<BibliographyEntry> =
            segmented.reference_block.iter().enumerate().map(|(i, raw)| parse_bib_entry(raw, i + 1)).collect();
        let scan = find_in_text_citations(&segmented.main_text, &entries);
        Self {
            id: paper.id.clone(),
            main_text: segmented.main_text,
            bibliography_found: segmented.bibliography_found && !entries.is_empty(),
            entries,
            scan,
        }
    }

    /// Per-paper warnings that do not depend on the cited paper.
    pub fn warnings(&self) -> Vec<ParseWarning> {
        let mut out = Vec::new();
        if !self.bibliography_found {
            out.push(ParseWarning {
                citing_id: self.id.clone(),
                cited_id: None,
                kind: WarningKind::UnparseableBibliography,
            });
        }
        out.extend(self.scan.unresolved.iter().map(|u| ParseWarning {
            citing_id: self.id.clone(),
            cited_id: None,
            kind: WarningKind::UnresolvedMarker { offset: u.offset, marker: u.marker.clone() },
        }));
        out
    }

    /// Highest-scoring entry for `cited`; ties go to the lower index.
    pub fn best_entry(&self, cited: &PaperRecord, config: &CiteParseConfig) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for entry in &self.entries {
            let score = match_entry_to_paper(entry, cited, config);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((entry.index, score));
            }
        }
        best
    }

    pub fn count_for(&self, cited: &PaperRecord, config: &CiteParseConfig) -> DirectCount {
        let warn = |kind| ParseWarning { citing_id: self.id.clone(), cited_id: Some(cited.id.clone()), kind };
        if !self.bibliography_found {
            return DirectCount {
                count: 0,
                entry_index: None,
                warnings: vec![warn(WarningKind::UnparseableBibliography)],
            };
        }
        match self.best_entry(cited, config) {
            Some((index, score)) if score >= config.match_threshold => DirectCount {
                count: self.scan.citations.iter().filter(|c| c.entry_index == index).count(),
                entry_index: Some(index),
                warnings: Vec::new(),
            },
            best => DirectCount {
                count: 0,
                entry_index: None,
                warnings: vec![warn(WarningKind::NoMatch { best_score: best.map_or(0.0, |(_, s)| s) })],
            },
        }
    }
}

/// Number of in-text markers in `citing` that resolve to `cited`.
pub fn count_direct_citations(citing: &PaperRecord, cited: &PaperRecord, config: &CiteParseConfig) -> DirectCount {
    ParsedPaper::parse(citing).count_for(cited, config)
}
