use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SparseVector;
use crate::error::{Error, Result};

/// Training-set dictionary: one attribute per distinct stem, with document
/// frequencies. Ids are dense and follow lexicographic term order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    n_docs: u32,
    terms: Vec<String>,
    df: Vec<u32>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.terms, r.df, r.n_docs)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            n_docs: v.n_docs,
            terms: v.terms,
            df: v.df,
        }
    }
}

impl Vocabulary {
    fn from_parts(terms: Vec<String>, df: Vec<u32>, n_docs: u32) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary {
            terms,
            df,
            n_docs,
            index,
        }
    }

    /// Builds the dictionary from analyzed training documents. When there are
    /// more distinct stems than `words_to_keep`, the highest document
    /// frequencies win, ties broken lexicographically.
    pub fn build<S: AsRef<str>, D: AsRef<[S]>>(docs: &[D], words_to_keep: usize) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: HashMap<&str, u32> = HashMap::new();
        let mut seen: Vec<&str> = Vec::new();
        for doc in docs {
            seen.clear();
            seen.extend(doc.as_ref().iter().map(AsRef::as_ref));
            seen.sort_unstable();
            seen.dedup();
            for term in &seen {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(&str, u32)> = df.into_iter().collect();
        if entries.len() > words_to_keep {
            entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            entries.truncate(words_to_keep);
        }
        entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
        let (terms, df): (Vec<String>, Vec<u32>) =
            entries.into_iter().map(|(t, d)| (t.to_string(), d)).unzip();
        Ok(Self::from_parts(terms, df, docs.len() as u32))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self, id: u32) -> Option<u32> {
        self.df.get(id as usize).copied()
    }

    /// True when terms are unique and sorted, every term has a df, and
    /// `1 <= df <= n_docs`. Checked on deserialized vocabularies.
    pub fn is_consistent(&self) -> bool {
        self.df.len() == self.terms.len()
            && self.index.len() == self.terms.len()
            && self.terms.windows(2).all(|w| w[0] < w[1])
            && self.df.iter().all(|&d| d >= 1 && d <= self.n_docs)
    }

    /// SHA-256 over the serialized dictionary.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("vocabulary serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn build_vocabulary<S: AsRef<str>, D: AsRef<[S]>>(docs: &[D], words_to_keep: usize) -> Result<Vocabulary> {
    Vocabulary::build(docs, words_to_keep)
}

/// Occurrence counts of in-vocabulary stems; unknown stems are dropped.
pub fn vectorize_counts<S: AsRef<str>>(stems: &[S], vocab: &Vocabulary) -> SparseVector {
    stems
        .iter()
        .filter_map(|s| vocab.id(s.as_ref()))
        .map(|id| (id, 1.0))
        .collect()
}

/// `weight = count * ln(n_docs / df)`. Terms present in every training
/// document get weight 0 and are dropped.
pub fn tf_transform(vec: &SparseVector, vocab: &Vocabulary) -> Result<SparseVector> {
    let n = f64::from(vocab.n_docs());
    let mut pairs = Vec::with_capacity(vec.nnz());
    for (id, count) in vec.iter() {
        let df = vocab
            .df(id)
            .filter(|&d| d > 0)
            .ok_or(Error::Inconsistent(id as usize))?;
        pairs.push((id, count * (n / f64::from(df)).ln()));
    }
    Ok(SparseVector::from_pairs(pairs))
}
