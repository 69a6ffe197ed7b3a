//! Seeded synthetic corpora for benchmarks, fixtures and smoke runs.
//!
//! Influential pairs are generated with more in-text mentions, a higher
//! chance of sharing an author and a higher chance of sharing a topic
//! vocabulary than incidental pairs, so all three features carry signal.
//! Half of the citing papers use numeric `[n]` markers and half use
//! author-year markers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::{write_paper, CitationPair, Corpus, Label, PaperRecord};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub papers: usize,
    pub pairs: usize,
    pub positive_rate: f64,
    pub missing_abstract_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { papers: 120, pairs: 300, positive_rate: 0.15, missing_abstract_rate: 0.05, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub papers: Vec<PaperRecord>,
    pub pairs: Vec<CitationPair>,
}

const SYLLABLES: &[&str] =
    &["ka", "lo", "mi", "ra", "te", "su", "vo", "ne", "pi", "da", "go", "fe", "zu", "ri", "ma", "to", "bel", "nor"];
const TOPICS: usize = 8;
const TOPIC_WORDS: usize = 14;
const COMMON: &[&str] = &[
    "we", "present", "method", "results", "show", "that", "this", "paper", "approach", "data", "model", "propose",
    "evaluate", "task", "using", "based", "on", "the", "of", "and",
];

fn word(rng: &mut SeededRng, syllables: usize) -> String {
    (0..syllables).map(|_| SYLLABLES[rng.below(SYLLABLES.len())]).collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

fn unique_words(rng: &mut SeededRng, count: usize, syllables: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w = word(rng, syllables);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

struct Meta {
    topic: usize,
    year: u16,
    authors: Vec<(String, String)>,
    numeric: bool,
}

pub fn generate(config: &SyntheticConfig) -> SyntheticDataset {
    let mut rng = SeededRng::new(config.seed);
    let mut taken: BTreeSet<String> = COMMON.iter().map(|s| s.to_string()).collect();
    let topics: Vec<Vec<String>> = (0..TOPICS).map(|_| unique_words(&mut rng, TOPIC_WORDS, 3, &mut taken)).collect();
    let title_words = unique_words(&mut rng, config.papers, 4, &mut taken);
    let surnames = unique_words(&mut rng, config.papers.max(8) / 2 + 4, 3, &mut taken);
    let given = unique_words(&mut rng, 12, 2, &mut taken);

    let metas: Vec<Meta> = (0..config.papers)
        .map(|i| {
            let n_authors = 1 + rng.below(4);
            let mut authors: Vec<(String, String)> = Vec::new();
            while authors.len() < n_authors {
                let a = (capitalize(&given[rng.below(given.len())]), capitalize(&surnames[rng.below(surnames.len())]));
                if !authors.iter().any(|b| b.1 == a.1) {
                    authors.push(a);
                }
            }
            Meta { topic: rng.below(TOPICS), year: 2000 + rng.below(16) as u16, authors, numeric: i % 2 == 0 }
        })
        .collect();

    // (citing, cited) → (label, mentions)
    let mut edges: BTreeMap<(usize, usize), (Label, usize)> = BTreeMap::new();
    let mut attempts = 0;
    while edges.len() < config.pairs && attempts < config.pairs * 50 {
        attempts += 1;
        let citing = rng.below(config.papers);
        let positive = (rng.below(10_000) as f64) < config.positive_rate * 10_000.0;
        let cited = if positive && rng.below(10) < 6 {
            let same_topic: Vec<usize> =
                (0..config.papers).filter(|&j| j != citing && metas[j].topic == metas[citing].topic).collect();
            if same_topic.is_empty() {
                continue;
            }
            same_topic[rng.below(same_topic.len())]
        } else {
            rng.below(config.papers)
        };
        if cited == citing || edges.contains_key(&(citing, cited)) {
            continue;
        }
        let mentions = if positive { 2 + rng.below(5) } else { 1 + rng.below(2) };
        let label = if positive { Label::Influential } else { Label::Incidental };
        edges.insert((citing, cited), (label, mentions));
    }

    // influential pairs share an author about a third of the time
    let mut metas = metas;
    for (&(citing, cited), (label, _)) in &edges {
        if label.is_positive() && rng.below(3) == 0 {
            let shared = metas[cited].authors[0].clone();
            if !metas[citing].authors.iter().any(|a| a.1 == shared.1) {
                metas[citing].authors.push(shared);
            }
        }
    }

    let titles: Vec<String> = (0..config.papers)
        .map(|i| {
            let topic = &topics[metas[i].topic];
            let mut words = vec![capitalize(&title_words[i])];
            words.extend((0..3).map(|_| topic[rng.below(topic.len())].clone()));
            words.join(" ")
        })
        .collect();

    let papers: Vec<PaperRecord> = (0..config.papers)
        .map(|i| {
            let meta = &metas[i];
            let topic = &topics[meta.topic];
            let abstract_text = if (rng.below(10_000) as f64) < config.missing_abstract_rate * 10_000.0 {
                None
            } else {
                let words: Vec<&str> = (0..40)
                    .map(|_| {
                        if rng.below(10) < 6 {
                            topic[rng.below(topic.len())].as_str()
                        } else {
                            COMMON[rng.below(COMMON.len())]
                        }
                    })
                    .collect();
                Some(words.join(" "))
            };
            let cited: Vec<(usize, usize)> =
                edges.iter().filter(|((c, _), _)| *c == i).map(|((_, j), (_, m))| (*j, *m)).collect();
            PaperRecord {
                id: paper_id(i),
                title: titles[i].clone(),
                authors: meta.authors.iter().map(|(g, s)| format!("{g} {s}")).collect(),
                abstract_text,
                body: body(&mut rng, meta, &cited, &metas, &titles),
                references: None,
            }
        })
        .collect();

    let pairs = edges.iter().map(|(&(c, d), &(label, _))| CitationPair::new(paper_id(c), paper_id(d), label)).collect();
    SyntheticDataset { papers, pairs }
}

fn paper_id(i: usize) -> String {
    format!("S{i:04}")
}

fn marker(meta: &Meta, key: usize, narrative: bool) -> String {
    if meta.numeric {
        return format!("[{key}]");
    }
    let names = match meta.authors.len() {
        1 => meta.authors[0].1.clone(),
        2 => format!("{} and {}", meta.authors[0].1, meta.authors[1].1),
        _ => format!("{} et al.", meta.authors[0].1),
    };
    if narrative {
        format!("{names} ({})", meta.year)
    } else {
        format!("({names}, {})", meta.year)
    }
}

fn body(rng: &mut SeededRng, meta: &Meta, cited: &[(usize, usize)], metas: &[Meta], titles: &[String]) -> String {
    let topic_filler = ["prior work", "related studies", "earlier analysis", "this line of research"];
    let mut sentences = vec!["Introduction".to_string(), "We study the problem in detail.".to_string()];
    let mut mentions: Vec<usize> =
        cited.iter().enumerate().flat_map(|(k, (_, m))| std::iter::repeat_n(k, *m)).collect();
    rng.shuffle(&mut mentions);
    for k in mentions {
        let (j, _) = cited[k];
        let narrative = rng.below(2) == 0;
        let m = marker(&metas[j], k + 1, narrative);
        let filler = topic_filler[rng.below(topic_filler.len())];
        sentences.push(if narrative && !meta.numeric {
            format!("{m} describes {filler}.")
        } else {
            format!("As in {filler} {m}, we build on it.")
        });
    }
    let mut text = sentences.join("\n");
    text.push_str("\n\nReferences\n");
    for (k, (j, _)) in cited.iter().enumerate() {
        let m = &metas[*j];
        let authors: Vec<String> = m.authors.iter().map(|(g, s)| format!("{s}, {}.", &g[..1])).collect();
        let prefix = if meta.numeric { format!("[{}] ", k + 1) } else { String::new() };
        text.push_str(&format!(
            "{prefix}{} {}. {}. In Proceedings of the Workshop.\n",
            authors.join(", "),
            m.year,
            titles[*j]
        ));
        if !meta.numeric {
            text.push('\n');
        }
    }
    text
}

impl SyntheticDataset {
    pub fn corpus(&self) -> Result<Corpus> {
        Corpus::from_records(self.papers.iter().cloned())
    }

    pub fn pairs_tsv(&self) -> String {
        let mut out = String::from("citing_id\tcited_id\tlabel\n");
        for p in &self.pairs {
            out.push_str(&format!("{}\t{}\t{}\n", p.citing_id, p.cited_id, p.label));
        }
        out
    }

    /// Writes `<root>/corpus/*.json` and `<root>/pairs.tsv`.
    pub fn write(&self, root: &Path) -> Result<(PathBuf, PathBuf)> {
        let corpus_dir = root.join("corpus");
        fs::create_dir_all(&corpus_dir).map_err(|e| Error::io(&corpus_dir, e))?;
        for p in &self.papers {
            write_paper(&corpus_dir, p)?;
        }
        let pairs = root.join("pairs.tsv");
        fs::write(&pairs, self.pairs_tsv()).map_err(|e| Error::io(&pairs, e))?;
        Ok((corpus_dir, pairs))
    }
}
