//! Text preprocessing: tokenization, lowercasing, stopword removal, Porter
//! stemming, dictionary construction and count/TF weighting.
//!
//! [`Analyzer`] turns raw text into stems and depends only on configuration.
//! [`FittedPipeline`] adds a [`Vocabulary`] built from training documents and
//! maps stems to weighted [`SparseVector`]s.

mod porter;
mod stopwords;
mod tokenize;
mod vector;
mod vocab;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use porter::porter_stem;
pub use stopwords::{remove_stopwords, Stopwords};
pub use tokenize::{tokenize, Tokenizer};
pub use vector::SparseVector;
pub use vocab::{build_vocabulary, tf_transform, vectorize_counts, Vocabulary};

/// Natural log is used by the TF transform; recorded in model metadata.
pub const TF_LOG_BASE: &str = "e";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerKind {
    Porter,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub output_word_counts: bool,
    pub tf_transform: bool,
    pub stemmer: StemmerKind,
    /// `None` selects the bundled English list.
    pub stopword_file: Option<PathBuf>,
    pub split_apostrophes: bool,
    pub words_to_keep: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            lowercase: true,
            output_word_counts: true,
            tf_transform: true,
            stemmer: StemmerKind::Porter,
            stopword_file: None,
            split_apostrophes: true,
            words_to_keep: 100_000_000,
        }
    }
}

impl PipelineConfig {
    pub fn tokenizer(&self) -> Tokenizer {
        Tokenizer {
            lowercase: self.lowercase,
            split_apostrophes: self.split_apostrophes,
        }
    }

    pub fn load_stopwords(&self) -> Result<Stopwords> {
        match &self.stopword_file {
            Some(path) => Stopwords::load(path),
            None => Ok(Stopwords::english()),
        }
    }
}

/// Text to stems: tokenize, lowercase, drop stopwords, stem.
#[derive(Debug, Clone)]
pub struct Analyzer {
    tokenizer: Tokenizer,
    stemmer: StemmerKind,
    stopwords: Stopwords,
}

impl Analyzer {
    pub fn new(config: &PipelineConfig, stopwords: Stopwords) -> Self {
        Analyzer {
            tokenizer: config.tokenizer(),
            stemmer: config.stemmer,
            stopwords,
        }
    }

    pub fn analyze(&self, text: &str) -> Vec<String> {
        let tokens = remove_stopwords(self.tokenizer.tokenize(text), &self.stopwords);
        match self.stemmer {
            StemmerKind::Porter => tokens.iter().map(|t| porter_stem(t)).collect(),
            StemmerKind::None => tokens,
        }
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }
}

/// Preprocessing state frozen at training time.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    config: PipelineConfig,
    analyzer: Analyzer,
    vocabulary: Vocabulary,
}

impl FittedPipeline {
    pub fn fit<S: AsRef<str>, D: AsRef<[S]>>(
        config: PipelineConfig,
        stopwords: Stopwords,
        training_stems: &[D],
    ) -> Result<Self> {
        let vocabulary = Vocabulary::build(training_stems, config.words_to_keep)?;
        Ok(Self::from_parts(config, stopwords, vocabulary))
    }

    pub fn from_parts(config: PipelineConfig, stopwords: Stopwords, vocabulary: Vocabulary) -> Self {
        let analyzer = Analyzer::new(&config, stopwords);
        FittedPipeline {
            config,
            analyzer,
            vocabulary,
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn analyzer(&self) -> &Analyzer {
        &self.analyzer
    }

    pub fn stopwords(&self) -> &Stopwords {
        self.analyzer.stopwords()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn vectorize_stems<S: AsRef<str>>(&self, stems: &[S]) -> SparseVector {
        let mut vec = vectorize_counts(stems, &self.vocabulary);
        if !self.config.output_word_counts {
            vec = vec.map_values(|_, _| 1.0);
        }
        if self.config.tf_transform {
            // every id came from this vocabulary, so df lookups cannot fail
            vec = tf_transform(&vec, &self.vocabulary).expect("ids come from the vocabulary");
        }
        vec
    }

    pub fn vectorize(&self, text: &str) -> SparseVector {
        self.vectorize_stems(&self.analyzer.analyze(text))
    }
}
