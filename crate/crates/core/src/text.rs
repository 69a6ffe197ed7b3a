//! Text normalisation shared by the parsing and feature stages.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercase and strip diacritics (`"Müller"` becomes `"muller"`).
pub fn fold(s: &str) -> String {
    s.nfd().filter(|c| !is_combining_mark(*c)).flat_map(char::to_lowercase).collect()
}

/// Lowercased alphanumeric terms of length two or more, numbers dropped.
///
/// This is the tf-idf tokenizer; it also drives title matching.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .filter(|t| !t.chars().all(|c| c.is_numeric()))
        .map(str::to_lowercase)
        .collect()
}

/// A person name reduced to a comparable key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameKey {
    pub surname: String,
    pub initial: Option<char>,
}

const SUFFIXES: &[&str] = &["jr", "sr", "ii", "iii", "iv"];

impl NameKey {
    /// Parses `"Surname, Given"` or `"Given [Middle] Surname"`.
    ///
    /// Returns `None` when the name has no letters.
    pub fn parse(raw: &str) -> Option<NameKey> {
        let folded = fold(raw);
        let (surname_part, given_part) = match folded.split_once(',') {
            Some((s, g)) => (s.to_string(), g.to_string()),
            None => {
                let mut words: Vec<&str> =
                    folded.split_whitespace().filter(|w| !SUFFIXES.contains(&w.trim_matches('.'))).collect();
                let last = words.pop()?;
                (last.to_string(), words.join(" "))
            }
        };
        let surname: String = surname_part
            .chars()
            .filter(|c| c.is_alphanumeric() || *c == '-' || *c == '\'' || c.is_whitespace())
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ");
        if !surname.chars().any(char::is_alphabetic) {
            return None;
        }
        let initial = given_part
            .split(|c: char| !c.is_alphabetic())
            .find(|w| !w.is_empty() && !SUFFIXES.contains(w))
            .and_then(|w| w.chars().next());
        Some(NameKey { surname, initial })
    }

    /// `"smith j"` when a given name is known, `"smith"` otherwise.
    pub fn key(&self) -> String {
        match self.initial {
            Some(i) => format!("{} {}", self.surname, i),
            None => self.surname.clone(),
        }
    }
}
