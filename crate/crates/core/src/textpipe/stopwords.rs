use std::collections::BTreeSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const DEFAULT_LIST: &str = include_str!("../../data/stopwords_en.txt");

/// A stopword set with the SHA-256 of the source text it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: BTreeSet<String>,
    source_sha256: String,
}

impl Stopwords {
    /// Parses one word per line; `#` lines and blank lines are skipped,
    /// trailing whitespace is trimmed.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.trim_end())
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.trim_start().to_lowercase())
            .collect();
        Stopwords {
            words,
            source_sha256: hex::encode(Sha256::digest(text.as_bytes())),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read stopword file {}: {e}", path.display())))?;
        Ok(Self::parse(&text))
    }

    pub fn english() -> Self {
        Self::parse(DEFAULT_LIST)
    }

    pub fn empty() -> Self {
        Self::parse("")
    }

    /// Rebuilds a set from a stored word list (e.g. a saved model).
    pub fn from_words(words: impl IntoIterator<Item = String>, source_sha256: String) -> Self {
        Stopwords {
            words: words.into_iter().collect(),
            source_sha256,
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn source_sha256(&self) -> &str {
        &self.source_sha256
    }
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &Stopwords) -> Vec<String> {
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}
