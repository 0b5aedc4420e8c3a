//! Polarity classifiers and the persisted model.

mod model;
mod nb;
mod svm;
mod tree;

use serde::{Deserialize, Serialize};

use crate::corpus::PolarityLabel;
use crate::error::{Error, Result};
use crate::textpipe::SparseVector;

pub use model::{load_model, save_model, FeatureConfig, FeatureSpace, PolarityModel, PolarityPrediction, FORMAT_VERSION};
pub use nb::{train_nb, NaiveBayesModel};
pub use svm::{svm_decision, train_svm, train_svm_detailed, LinearSvmModel, SvmDiagnostics};
pub use tree::{best_split, train_tree, DecisionTreeModel, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Svm,
    NaiveBayes,
    Tree,
}

impl ClassifierKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svm" => Some(ClassifierKind::Svm),
            "nb" | "naive_bayes" | "naivebayes" => Some(ClassifierKind::NaiveBayes),
            "tree" | "c45" | "c4.5" => Some(ClassifierKind::Tree),
            _ => None,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::NaiveBayes => "NB",
            ClassifierKind::Tree => "Tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub classifier: ClassifierKind,
    pub c_parameter: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub smoothing: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            classifier: ClassifierKind::Svm,
            c_parameter: 1.0,
            tolerance: 1e-3,
            max_iterations: 200_000,
            smoothing: 1.0,
            max_depth: 20,
            min_leaf: 2,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn for_classifier(classifier: ClassifierKind) -> Self {
        TrainingConfig {
            classifier,
            ..Self::default()
        }
    }
}

/// Provenance attached to a trained linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub vocabulary_sha256: String,
    pub selection_sha256: String,
    pub log_base: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Svm(LinearSvmModel),
    NaiveBayes(NaiveBayesModel),
    Tree(DecisionTreeModel),
}

impl Classifier {
    pub fn train(docs: &[(SparseVector, PolarityLabel)], n_attributes: usize, cfg: &TrainingConfig) -> Result<Self> {
        Ok(match cfg.classifier {
            ClassifierKind::Svm => Classifier::Svm(train_svm(docs, n_attributes, cfg)?),
            ClassifierKind::NaiveBayes => Classifier::NaiveBayes(train_nb(docs, n_attributes, cfg)?),
            ClassifierKind::Tree => Classifier::Tree(train_tree(docs, cfg)?),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Svm(_) => ClassifierKind::Svm,
            Classifier::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            Classifier::Tree(_) => ClassifierKind::Tree,
        }
    }

    /// Ties (decision exactly 0, equal posteriors) go to positive.
    pub fn predict(&self, vec: &SparseVector) -> PolarityLabel {
        match self {
            Classifier::Svm(m) => m.predict(vec),
            Classifier::NaiveBayes(m) => m.predict(vec),
            Classifier::Tree(m) => m.predict(vec),
        }
    }

    /// SVM margin or NB log-odds; trees have none.
    pub fn decision_value(&self, vec: &SparseVector) -> Option<f64> {
        match self {
            Classifier::Svm(m) => Some(m.decision(vec)),
            Classifier::NaiveBayes(m) => Some(m.decision(vec)),
            Classifier::Tree(_) => None,
        }
    }
}

pub fn predict(model: &Classifier, vec: &SparseVector) -> PolarityLabel {
    model.predict(vec)
}

pub(crate) fn require_both_classes(docs: &[(SparseVector, PolarityLabel)]) -> Result<()> {
    let pos = docs.iter().any(|(_, l)| *l == PolarityLabel::Positive);
    let neg = docs.iter().any(|(_, l)| *l == PolarityLabel::Negative);
    if pos && neg {
        Ok(())
    } else {
        Err(Error::SingleClass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trains_every_kind() {
        let docs: Vec<(SparseVector, PolarityLabel)> = (0..20)
            .map(|i| {
                let label = if i % 2 == 0 { PolarityLabel::Positive } else { PolarityLabel::Negative };
                let attr = if i % 2 == 0 { 0 } else { 1 };
                (SparseVector::from_pairs(vec![(attr, 1.0 + (i % 3) as f64), (2, 1.0)]), label)
            })
            .collect();
        for kind in [ClassifierKind::Svm, ClassifierKind::NaiveBayes, ClassifierKind::Tree] {
            let model = Classifier::train(&docs, 3, &TrainingConfig::for_classifier(kind)).unwrap();
            assert_eq!(model.kind(), kind);
            assert!(docs.iter().all(|(v, l)| predict(&model, v) == *l), "{kind:?}");
            assert_eq!(model.decision_value(&docs[0].0).is_some(), kind != ClassifierKind::Tree);
        }
    }

    #[test]
    fn positive_decision_predicts_positive() {
        let m = Classifier::Svm(LinearSvmModel {
            weights: vec![1.0],
            bias: 0.0,
            c_parameter: 1.0,
            tolerance: 1e-3,
            iterations: 0,
            converged: true,
            training_meta: None,
        });
        assert_eq!(m.predict(&SparseVector::from_pairs(vec![(0, 2.3)])), PolarityLabel::Positive);
        assert_eq!(m.predict(&SparseVector::new()), PolarityLabel::Positive);
        assert_eq!(m.predict(&SparseVector::from_pairs(vec![(0, -0.1)])), PolarityLabel::Negative);
    }

    #[test]
    fn kind_names() {
        assert_eq!(ClassifierKind::parse("NB"), Some(ClassifierKind::NaiveBayes));
        assert_eq!(ClassifierKind::parse("c4.5"), Some(ClassifierKind::Tree));
        assert_eq!(ClassifierKind::parse("part"), None);
    }
}
