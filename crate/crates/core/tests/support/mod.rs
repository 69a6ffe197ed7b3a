//! Independent reference computations shared by the integration tests and
//! the acceptance harness. Nothing here calls into the library's algorithms;
//! each function is a deliberately naive restatement of the definition.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use citegauge_core::corpus::PaperRecord;

pub fn six_papers_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/six_papers")
        .canonicalize()
        .expect("six-paper fixture exists")
}

/// Textbook single-pass Pearson formula.
pub fn direct_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Two-tailed Student-t tail probability by Simpson quadrature.
///
/// With `x = sqrt(df)·tan θ` the density becomes proportional to
/// `cos^(df-1) θ` on `[0, π/2)`, so both the tail mass and the normaliser
/// are finite integrals.
pub fn t_two_tailed_by_quadrature(t: f64, df: f64) -> f64 {
    let theta = (t.abs() / df.sqrt()).atan();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |th: f64| th.cos().powf(df - 1.0);
    simpson(f, theta, half_pi, 200_000) / simpson(f, 0.0, half_pi, 200_000)
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + h * i as f64);
    }
    sum * h / 3.0
}

pub fn t_statistic(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    r * (df / (1.0 - r * r)).sqrt()
}

/// Average precision from scratch: sort, walk, average precision at hits.
pub fn average_precision(scores: &[(f64, String, bool)]) -> f64 {
    let mut v: Vec<&(f64, String, bool)> = scores.iter().collect();
    v.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    let total = v.iter().filter(|s| s.2).count() as f64;
    let mut hits = 0.0;
    let mut acc = 0.0;
    for (i, s) in v.iter().enumerate() {
        if s.2 {
            hits += 1.0;
            acc += hits / (i + 1) as f64;
        }
    }
    acc / total
}

/// Best root split over every feature and every midpoint, by brute force.
///
/// Returns `(feature, threshold, weighted_gini)`; ties keep the first
/// candidate in (feature, threshold) order. `None` when nothing beats the
/// parent impurity.
pub fn exhaustive_split(rows: &[(Vec<f64>, bool)], idx: &[usize], min_leaf: usize) -> Option<(usize, f64, f64)> {
    let gini = |pos: f64, neg: f64| {
        let n = pos + neg;
        if n == 0.0 {
            0.0
        } else {
            1.0 - (pos / n).powi(2) - (neg / n).powi(2)
        }
    };
    let pos_total = idx.iter().filter(|&&i| rows[i].1).count() as f64;
    let n = idx.len() as f64;
    let parent = gini(pos_total, n - pos_total);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..rows[0].0.len() {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i].0[f]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (mut lp, mut ln, mut rp, mut rn) = (0.0, 0.0, 0.0, 0.0);
            for &i in idx {
                let left = rows[i].0[f] <= thr;
                match (left, rows[i].1) {
                    (true, true) => lp += 1.0,
                    (true, false) => ln += 1.0,
                    (false, true) => rp += 1.0,
                    (false, false) => rn += 1.0,
                }
            }
            if ((lp + ln) as usize) < min_leaf || ((rp + rn) as usize) < min_leaf {
                continue;
            }
            let imp = ((lp + ln) * gini(lp, ln) + (rp + rn) * gini(rp, rn)) / n;
            if imp >= parent - 1e-12 {
                continue;
            }
            match best {
                Some((_, _, b)) if imp >= b - 1e-12 => {}
                _ => best = Some((f, thr, imp)),
            }
        }
    }
    best
}

/// Lowercased alphanumeric runs of length ≥ 2 that are not all digits.
pub fn naive_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| t.len() >= 2 && !t.chars().all(|c| c.is_ascii_digit()))
        .map(|t| t.to_lowercase())
        .collect()
}

/// Smoothed tf-idf cosine over a small ASCII collection, with dense maps.
pub fn naive_tfidf_cosine(docs: &[&str], a: usize, b: usize) -> f64 {
    let n = docs.len() as f64;
    let mut df: BTreeMap<String, f64> = BTreeMap::new();
    for d in docs {
        for t in naive_tokens(d).into_iter().collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1.0;
        }
    }
    let vec = |d: &str| {
        let mut v: BTreeMap<String, f64> = BTreeMap::new();
        for t in naive_tokens(d) {
            let idf = ((1.0 + n) / (1.0 + df[&t])).ln() + 1.0;
            *v.entry(t).or_default() += idf;
        }
        v
    };
    let (va, vb) = (vec(docs[a]), vec(docs[b]));
    let dot: f64 = va.iter().map(|(k, x)| x * vb.get(k).copied().unwrap_or(0.0)).sum();
    let na = va.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb = vb.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// A citing/cited pair with a hand-counted number of in-text mentions.
pub struct GoldenDoc {
    pub name: &'static str,
    pub citing: PaperRecord,
    pub cited: PaperRecord,
    pub expected: usize,
}

fn paper(id: &str, title: &str, authors: &[&str], body: &str) -> PaperRecord {
    PaperRecord {
        id: id.into(),
        title: title.into(),
        authors: authors.iter().map(|s| s.to_string()).collect(),
        abstract_text: Some(format!("{title} abstract")),
        body: body.into(),
        references: None,
    }
}

const NUMERIC_REFS: &str = "References\n\
[1] Smith, J. and Doe, A. 2010. Graph parsing with trees. In Proc. ACL.\n\
[2] Brown, P. 1993. Statistical machine translation. Computational Linguistics.\n\
[3] Lee, K. 2012. Citation graphs at scale. JASIST.\n\
[4] Park, S. 2008. Topic drift in science. Scientometrics.\n\
[5] Jones, B. 2015. Reading between the lines. EMNLP.\n";

/// Ten small documents whose direct-citation counts were counted by hand.
pub fn golden_documents() -> Vec<GoldenDoc> {
    let graph = paper("G", "Graph Parsing with Trees", &["John Smith", "Alice Doe"], "");
    let lee = paper("L", "Citation Graphs at Scale", &["Kate Lee"], "");
    let park = paper("K", "Topic Drift in Science", &["Sue Park"], "");
    let mut out = vec![
        GoldenDoc {
            name: "numeric single markers",
            citing: paper(
                "C1",
                "x",
                &["Ann Other"],
                &format!("Intro [1] text. Again [1]. Other work [2].\n{NUMERIC_REFS}"),
            ),
            cited: graph.clone(),
            expected: 2,
        },
        GoldenDoc {
            name: "numeric lists",
            citing: paper(
                "C2",
                "x",
                &["Ann Other"],
                &format!("We build on [1, 3] and [2,3,4]. Later [3]; see also [5].\n{NUMERIC_REFS}"),
            ),
            cited: lee.clone(),
            expected: 3,
        },
        GoldenDoc {
            name: "numeric ranges",
            citing: paper(
                "C3",
                "x",
                &["Ann Other"],
                &format!("Surveys [2-4] and [1\u{2013}3] differ from [5].\n{NUMERIC_REFS}"),
            ),
            cited: lee.clone(),
            expected: 2,
        },
        GoldenDoc {
            name: "numeric markers broken across lines",
            citing: paper(
                "C4",
                "x",
                &["Ann Other"],
                &format!("Early results [1,\n4] and later ones [\n4 ] agree.\n{NUMERIC_REFS}"),
            ),
            cited: park.clone(),
            expected: 2,
        },
    ];
    let ay_refs = "References\n\n\
Jones, B. 2011. Reading between the lines. EMNLP.\n\n\
M\u{fc}ller, J. 2010. Diacritics in names. COLING.\n\n\
Smith, J., Doe, A. and Lee, K. 2010. Graph parsing with trees. ACL.\n\n\
Smith, J. and Doe, A. 2012. Forest parsing. ACL.\n";
    out.push(GoldenDoc {
        name: "parenthetical author-year with diacritics",
        citing: paper(
            "C5",
            "x",
            &["Ann Other"],
            &format!("First (Muller, 2010). Then (M\u{fc}ller, 2010; Jones, 2011).\n{ay_refs}"),
        ),
        cited: paper("M", "Diacritics in Names", &["J\u{fc}rgen M\u{fc}ller"], ""),
        expected: 2,
    });
    out.push(GoldenDoc {
        name: "et al. markers including a line break",
        citing: paper(
            "C6",
            "x",
            &["Ann Other"],
            &format!("Trees help (Smith et al., 2010). Again (Smith et\nal., 2010) and (Jones, 2011).\n{ay_refs}"),
        ),
        cited: paper("T", "Graph Parsing with Trees", &["John Smith", "Alice Doe", "Kate Lee"], ""),
        expected: 2,
    });
    out.push(GoldenDoc {
        name: "narrative two-author markers",
        citing: paper("C7", "x", &["Ann Other"], &format!(
            "Smith and Doe (2012) parse forests. Later Smith and\nDoe (2012) extend it. Smith et al. (2010) differ.\n{ay_refs}"
        )),
        cited: paper("F", "Forest Parsing", &["John Smith", "Alice Doe"], ""),
        expected: 2,
    });
    let suffix_refs = "References\n\n\
Smith, J. 2010a. Early parsing. ACL.\n\n\
Smith, J. 2010b. Late parsing. EMNLP.\n\n\
Smith, J. 2012. Parsing again. NAACL.\n";
    out.push(GoldenDoc {
        name: "year lists",
        citing: paper(
            "C8",
            "x",
            &["Ann Other"],
            &format!("Smith (2010a, 2012) and (Smith, 2012) and (Smith, 2010b).\n{suffix_refs}"),
        ),
        cited: paper("P", "Parsing Again", &["John Smith"], ""),
        expected: 2,
    });
    out.push(GoldenDoc {
        name: "year suffix disambiguation",
        citing: paper(
            "C9",
            "x",
            &["Ann Other"],
            &format!("(Smith, 2010a) (Smith, 2010b) (cf. Smith, 2010b).\n{suffix_refs}"),
        ),
        cited: paper("B", "Late Parsing", &["John Smith"], ""),
        expected: 2,
    });
    out.push(GoldenDoc {
        name: "mentions inside the reference list are ignored",
        citing: paper(
            "C10",
            "x",
            &["Ann Other"],
            &format!(
                "Only Lee (2012) here.\n\n{}",
                "References\nLee, K. 2012. Citation graphs at scale. JASIST. Reprinted in Lee (2012).\n\
             Brown, P. 1993. Statistical machine translation. CL.\n"
            ),
        ),
        cited: lee,
        expected: 1,
    });
    out
}

/// Twenty rows of three features on a coarse grid (ties are common), with
/// labels from a noisy threshold rule. Uses its own xorshift generator.
pub fn forest_fixture(seed: u64) -> Vec<(Vec<f64>, bool)> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move |bound: u64| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state % bound
    };
    (0..20)
        .map(|_| {
            let x: Vec<f64> = (0..3).map(|_| next(8) as f64 / 4.0).collect();
            let noisy = next(6) == 0;
            let positive = (x[0] + 0.5 * x[2] > 1.4) != noisy;
            (x, positive)
        })
        .collect()
}

/// A hand-enumerated ranking: scores, labels, and the expected
/// (recall, precision) after each prefix and average precision.
pub struct HandTable {
    pub scores: &'static [f64],
    pub labels: &'static [bool],
    pub curve: &'static [(f64, f64)],
    pub average_precision: f64,
}

pub const HAND_TABLES: [HandTable; 3] = [
    // ranked: + - + - - +
    HandTable {
        scores: &[6.0, 5.0, 4.0, 3.0, 2.0, 1.0],
        labels: &[true, false, true, false, false, true],
        curve: &[
            (1.0 / 3.0, 1.0),
            (1.0 / 3.0, 0.5),
            (2.0 / 3.0, 2.0 / 3.0),
            (2.0 / 3.0, 0.5),
            (2.0 / 3.0, 0.4),
            (1.0, 0.5),
        ],
        average_precision: (1.0 + 2.0 / 3.0 + 0.5) / 3.0,
    },
    // ties at 0.9 and 0.5 are broken by ascending id: c0000, c0001, ...
    HandTable {
        scores: &[0.5, 0.9, 0.9, 0.1, 0.5],
        labels: &[true, false, true, true, false],
        curve: &[(0.0, 0.0), (1.0 / 3.0, 0.5), (2.0 / 3.0, 2.0 / 3.0), (2.0 / 3.0, 0.5), (1.0, 0.6)],
        average_precision: (0.5 + 2.0 / 3.0 + 0.6) / 3.0,
    },
    // all positives first
    HandTable {
        scores: &[0.2, 0.8, 0.7, 0.1],
        labels: &[false, true, true, false],
        curve: &[(0.5, 1.0), (1.0, 1.0), (1.0, 2.0 / 3.0), (1.0, 0.5)],
        average_precision: 1.0,
    },
];
