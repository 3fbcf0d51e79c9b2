//! Grapheme alphabet shared by the acoustic model output and the decoders.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("index {index} out of range for {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("blank and delimiter share index {0}")]
    BlankIsDelimiter(usize),
    #[error("failed to read alphabet: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed alphabet json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Ordered output inventory of a CTC model.
///
/// Column `i` of an emission matrix scores `tokens[i]`. The blank renders as
/// the empty string and the delimiter as a single space, whatever their
/// stored spelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAlphabet", into = "RawAlphabet")]
pub struct Alphabet {
    tokens: Vec<String>,
    blank_index: usize,
    delimiter_index: usize,
}

#[derive(Serialize, Deserialize)]
struct RawAlphabet {
    tokens: Vec<String>,
    blank_index: usize,
    delimiter_index: usize,
}

impl TryFrom<RawAlphabet> for Alphabet {
    type Error = AlphabetError;

    fn try_from(raw: RawAlphabet) -> Result<Self, Self::Error> {
        Alphabet::new(raw.tokens, raw.blank_index, raw.delimiter_index)
    }
}

impl From<Alphabet> for RawAlphabet {
    fn from(a: Alphabet) -> Self {
        RawAlphabet {
            tokens: a.tokens,
            blank_index: a.blank_index,
            delimiter_index: a.delimiter_index,
        }
    }
}

impl Alphabet {
    pub fn new(
        tokens: Vec<String>,
        blank_index: usize,
        delimiter_index: usize,
    ) -> Result<Self, AlphabetError> {
        if tokens.is_empty() {
            return Err(AlphabetError::Empty);
        }
        for index in [blank_index, delimiter_index] {
            if index >= tokens.len() {
                return Err(AlphabetError::IndexOutOfRange {
                    index,
                    len: tokens.len(),
                });
            }
        }
        if blank_index == delimiter_index {
            return Err(AlphabetError::BlankIsDelimiter(blank_index));
        }
        let mut seen = HashSet::with_capacity(tokens.len());
        for t in &tokens {
            if !seen.insert(t.as_str()) {
                return Err(AlphabetError::DuplicateToken(t.clone()));
            }
        }
        Ok(Self {
            tokens,
            blank_index,
            delimiter_index,
        })
    }

    /// Blank at index 0, delimiter `|` at index 1, then one token per char.
    pub fn from_chars(chars: &str) -> Result<Self, AlphabetError> {
        let mut tokens = vec!["<blank>".to_string(), "|".to_string()];
        tokens.extend(chars.chars().map(String::from));
        Self::new(tokens, 0, 1)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AlphabetError> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AlphabetError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn blank(&self) -> usize {
        self.blank_index
    }

    pub fn delimiter(&self) -> usize {
        self.delimiter_index
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t == token)
    }

    /// Output spelling of a token.
    pub fn render_token(&self, index: usize) -> &str {
        if index == self.blank_index {
            ""
        } else if index == self.delimiter_index {
            " "
        } else {
            &self.tokens[index]
        }
    }

    /// Renders a collapsed label sequence into text.
    pub fn render(&self, labels: &[usize]) -> String {
        labels.iter().map(|&i| self.render_token(i)).collect()
    }

    /// Encodes `text` as labels: spaces map to the delimiter, every other char
    /// to its single-char token. Returns `None` for chars outside the alphabet.
    pub fn encode(&self, text: &str) -> Option<Vec<usize>> {
        text.chars()
            .map(|c| {
                if c == ' ' {
                    Some(self.delimiter_index)
                } else {
                    let mut buf = [0u8; 4];
                    self.index_of(c.encode_utf8(&mut buf))
                }
            })
            .collect()
    }
}
