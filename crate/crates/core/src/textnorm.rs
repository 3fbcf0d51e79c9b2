//! Transcript normalization for LM training and scoring: replacement table,
//! non-speech marker removal, punctuation stripping, lowercasing.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, Error)]
pub enum NormError {
    #[error("malformed non-speech pattern {0:?}: expected `<open>...<close>`")]
    BadPattern(String),
    #[error("replacement table line {line}: expected two tab-separated columns")]
    BadReplacementLine { line: usize },
    #[error("replacement table line {line}: empty pattern")]
    EmptyReplacementPattern { line: usize },
    #[error("failed to read replacement table: {0}")]
    Io(#[from] std::io::Error),
}

/// A bracketed non-speech marker such as `[cough]`, written as `[...]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BracketPattern {
    pub open: char,
    pub close: char,
}

impl BracketPattern {
    /// Parses the `<open>...<close>` notation, e.g. `[...]` or `<...>`.
    pub fn parse(spec: &str) -> Result<Self, NormError> {
        let bad = || NormError::BadPattern(spec.to_string());
        let mut chars = spec.chars();
        let open = chars.next().ok_or_else(bad)?;
        let close = chars.next_back().ok_or_else(bad)?;
        if chars.as_str() != "..." || open == close || open == '.' || close == '.' {
            return Err(bad());
        }
        if open.is_whitespace() || close.is_whitespace() {
            return Err(bad());
        }
        Ok(Self { open, close })
    }
}

impl fmt::Display for BracketPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}...{}", self.open, self.close)
    }
}

/// Literal `pattern -> replacement` rewrites applied in order before anything
/// else. Loaded from a two-column TSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplacementTable {
    rules: Vec<(String, String)>,
}

impl ReplacementTable {
    pub fn new(rules: Vec<(String, String)>) -> Self {
        Self { rules }
    }

    pub fn parse(tsv: &str) -> Result<Self, NormError> {
        let mut rules = Vec::new();
        for (i, line) in tsv.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            let (pattern, replacement) = line
                .split_once('\t')
                .ok_or(NormError::BadReplacementLine { line: i + 1 })?;
            if replacement.contains('\t') {
                return Err(NormError::BadReplacementLine { line: i + 1 });
            }
            if pattern.is_empty() {
                return Err(NormError::EmptyReplacementPattern { line: i + 1 });
            }
            rules.push((pattern.to_string(), replacement.to_string()));
        }
        Ok(Self { rules })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NormError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn apply(&self, text: &str) -> String {
        self.rules
            .iter()
            .fold(text.to_string(), |acc, (p, r)| acc.replace(p.as_str(), r))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    /// Characters stripped in addition to the Unicode punctuation category.
    pub punctuation_set: BTreeSet<char>,
    /// Strip every char in Unicode general category P*.
    pub unicode_punctuation: bool,
    pub nonspeech_patterns: Vec<BracketPattern>,
    pub lowercase: bool,
    /// Keep `-` inside words instead of treating it as a separator.
    pub keep_hyphens: bool,
    pub replacements: ReplacementTable,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            punctuation_set: "\"'`´«»„“”‚‘’<>|/\\~^*+=_#@&%$§".chars().collect(),
            unicode_punctuation: true,
            nonspeech_patterns: vec![BracketPattern {
                open: '[',
                close: ']',
            }],
            lowercase: true,
            keep_hyphens: false,
            replacements: ReplacementTable::default(),
        }
    }
}

impl NormalizationConfig {
    pub fn is_punctuation(&self, c: char) -> bool {
        if c == '-' && self.keep_hyphens {
            return false;
        }
        if self.punctuation_set.contains(&c) {
            return true;
        }
        if c == '-' {
            return true;
        }
        self.unicode_punctuation && c.general_category_group() == GeneralCategoryGroup::Punctuation
    }
}

/// Lowercase words with no punctuation, whitespace, or empty entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedTranscript {
    words: Vec<String>,
}

impl NormalizedTranscript {
    /// Splits already-normalized text on whitespace. No punctuation handling.
    pub fn from_normalized_text(text: &str) -> Self {
        Self {
            words: text.split_whitespace().map(str::to_string).collect(),
        }
    }

    /// Builds a transcript from words, dropping empty entries and splitting
    /// entries that contain whitespace.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words
                .into_iter()
                .flat_map(|w| {
                    w.as_ref()
                        .split_whitespace()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
        }
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn into_words(self) -> Vec<String> {
        self.words
    }
}

impl fmt::Display for NormalizedTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.words.join(" "))
    }
}

fn strip_nonspeech(text: &str, patterns: &[BracketPattern]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match patterns.iter().find(|p| p.open == c) {
            Some(p) => {
                let rest = chars.as_str();
                match rest.find(p.close) {
                    Some(end) => {
                        // marker acts as a word break
                        out.push(' ');
                        chars = rest[end + p.close.len_utf8()..].chars();
                    }
                    // unterminated marker: drop only the opener
                    None => out.push(' '),
                }
            }
            None => out.push(c),
        }
    }
    out
}

pub fn normalize(text: &str, config: &NormalizationConfig) -> NormalizedTranscript {
    let replaced;
    let text = if config.replacements.is_empty() {
        text
    } else {
        replaced = config.replacements.apply(text);
        &replaced
    };
    let stripped = strip_nonspeech(text, &config.nonspeech_patterns);
    let mut cleaned = String::with_capacity(stripped.len());
    for c in stripped.chars() {
        if config.is_punctuation(c) {
            cleaned.push(' ');
        } else if config.lowercase {
            cleaned.extend(c.to_lowercase());
        } else {
            cleaned.push(c);
        }
    }
    let words = cleaned.split_whitespace().map(str::to_string).collect();
    NormalizedTranscript { words }
}

pub fn render(t: &NormalizedTranscript) -> String {
    t.to_string()
}
