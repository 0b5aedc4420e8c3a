//! The full trained artifact: preprocessing state, selected attributes and
//! classifier, with a versioned JSON file format.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{Classifier, ClassifierKind, TrainingConfig, TrainingMeta};
use crate::corpus::{PolarityLabel, Review};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::featsel::{rank_and_select, SelectionResult};
use crate::textpipe::{FittedPipeline, PipelineConfig, SparseVector, Stopwords, Vocabulary, TF_LOG_BASE};

pub const FORMAT_VERSION: u32 = 1;
const IG_BINARIZATION: &str = "presence";

/// Everything that decides the attribute space before a classifier sees it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub pipeline: PipelineConfig,
    /// `None` skips selection and keeps the whole vocabulary.
    pub ig_threshold: Option<f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            pipeline: PipelineConfig::default(),
            ig_threshold: Some(0.0),
        }
    }
}

/// Vocabulary plus selection, fitted on training documents only.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    pub pipeline: FittedPipeline,
    pub selection: SelectionResult,
}

impl FeatureSpace {
    /// Fits the space on analyzed documents and returns it with the compact
    /// training vectors.
    pub fn fit<S: AsRef<str>, D: AsRef<[S]>>(
        features: &FeatureConfig,
        stopwords: Stopwords,
        stems: &[D],
        labels: &[PolarityLabel],
        mode: Execution,
    ) -> Result<(Self, Vec<SparseVector>)> {
        if stems.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: stems.len(),
                right: labels.len(),
            });
        }
        let pipeline = FittedPipeline::fit(features.pipeline.clone(), stopwords, stems)?;
        let full: Vec<(SparseVector, PolarityLabel)> = stems
            .iter()
            .zip(labels)
            .map(|(s, &l)| (pipeline.vectorize_stems(s.as_ref()), l))
            .collect();
        let n = pipeline.vocabulary().len();
        let selection = match features.ig_threshold {
            Some(t) => rank_and_select(&full, n, t, mode),
            None => SelectionResult::all(n),
        };
        let space = FeatureSpace { pipeline, selection };
        let vectors = full.iter().map(|(v, _)| space.selection.compact(v)).collect();
        Ok((space, vectors))
    }

    pub fn dimension(&self) -> usize {
        self.selection.len()
    }

    pub fn transform_stems<S: AsRef<str>>(&self, stems: &[S]) -> SparseVector {
        self.selection.compact(&self.pipeline.vectorize_stems(stems))
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        self.selection.compact(&self.pipeline.vectorize(text))
    }

    fn meta(&self, seed: u64) -> TrainingMeta {
        TrainingMeta {
            vocabulary_sha256: self.pipeline.vocabulary().sha256(),
            selection_sha256: sha256_json(&self.selection),
            log_base: TF_LOG_BASE.to_string(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarityPrediction {
    pub review_id: String,
    pub predicted: PolarityLabel,
    pub decision_value: Option<f64>,
}

/// A trained classifier with the preprocessing state needed to score raw text.
#[derive(Debug, Clone)]
pub struct PolarityModel {
    pub features: FeatureSpace,
    pub training: TrainingConfig,
    pub classifier: Classifier,
    pub ig_threshold: Option<f64>,
}

impl PolarityModel {
    /// Analyzes, vectorizes, selects and trains on the given texts.
    pub fn fit<T: AsRef<str> + Sync>(
        texts: &[T],
        labels: &[PolarityLabel],
        features: &FeatureConfig,
        stopwords: Stopwords,
        training: &TrainingConfig,
        mode: Execution,
    ) -> Result<Self> {
        let analyzer = crate::textpipe::Analyzer::new(&features.pipeline, stopwords.clone());
        let stems: Vec<Vec<String>> = crate::exec::map(mode, texts, |t| analyzer.analyze(t.as_ref()));
        Self::fit_stems(&stems, labels, features, stopwords, training, mode)
    }

    pub fn fit_stems<S: AsRef<str>, D: AsRef<[S]>>(
        stems: &[D],
        labels: &[PolarityLabel],
        features: &FeatureConfig,
        stopwords: Stopwords,
        training: &TrainingConfig,
        mode: Execution,
    ) -> Result<Self> {
        let (space, vectors) = FeatureSpace::fit(features, stopwords, stems, labels, mode)?;
        Self::train_on(space, vectors, labels, features.ig_threshold, training)
    }

    /// Trains a classifier on a fitted space and its compact training vectors.
    pub fn train_on(
        space: FeatureSpace,
        vectors: Vec<SparseVector>,
        labels: &[PolarityLabel],
        ig_threshold: Option<f64>,
        training: &TrainingConfig,
    ) -> Result<Self> {
        let docs: Vec<(SparseVector, PolarityLabel)> = vectors.into_iter().zip(labels.iter().copied()).collect();
        let mut classifier = Classifier::train(&docs, space.dimension(), training)?;
        if let Classifier::Svm(m) = &mut classifier {
            m.training_meta = Some(space.meta(training.seed));
        }
        Ok(PolarityModel {
            features: space,
            training: training.clone(),
            classifier,
            ig_threshold,
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        self.classifier.kind()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        self.features.pipeline.vocabulary()
    }

    pub fn selection(&self) -> &SelectionResult {
        &self.features.selection
    }

    pub fn predict_vector(&self, compact: &SparseVector) -> (PolarityLabel, Option<f64>) {
        (self.classifier.predict(compact), self.classifier.decision_value(compact))
    }

    pub fn predict_text(&self, text: &str) -> (PolarityLabel, Option<f64>) {
        self.predict_vector(&self.features.transform(text))
    }

    pub fn predict_review(&self, review: &Review) -> PolarityPrediction {
        let (predicted, decision_value) = self.predict_text(&review.text);
        PolarityPrediction {
            review_id: review.id.clone(),
            predicted,
            decision_value,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StoredStopwords {
    sha256: String,
    words: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct StoredPipeline {
    config: PipelineConfig,
    stopwords: StoredStopwords,
    tf_log_base: String,
    ig_binarization: String,
    ig_threshold: Option<f64>,
    vocabulary: Vocabulary,
}

#[derive(Serialize)]
struct ChecksumBody<'a> {
    pipeline: &'a StoredPipeline,
    selection: &'a SelectionResult,
    training: &'a TrainingConfig,
    classifier: &'a Classifier,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    created_at: Option<String>,
    manifest_id: Option<String>,
    checksum: String,
    pipeline: StoredPipeline,
    selection: SelectionResult,
    training: TrainingConfig,
    classifier: Classifier,
}

fn sha256_json<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("model parts serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn checksum(p: &StoredPipeline, s: &SelectionResult, t: &TrainingConfig, c: &Classifier) -> String {
    sha256_json(&ChecksumBody {
        pipeline: p,
        selection: s,
        training: t,
        classifier: c,
    })
}

/// Serializes a model. `created_at` and `manifest_id` are passed through
/// verbatim so callers control reproducibility.
pub fn save_model(
    model: &PolarityModel,
    created_at: Option<String>,
    manifest_id: Option<String>,
    mut writer: impl Write,
) -> Result<()> {
    let pipeline = &model.features.pipeline;
    let stored = StoredPipeline {
        config: pipeline.config().clone(),
        stopwords: StoredStopwords {
            sha256: pipeline.stopwords().source_sha256().to_string(),
            words: pipeline.stopwords().words().map(str::to_string).collect(),
        },
        tf_log_base: TF_LOG_BASE.to_string(),
        ig_binarization: IG_BINARIZATION.to_string(),
        ig_threshold: model.ig_threshold,
        vocabulary: pipeline.vocabulary().clone(),
    };
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        created_at,
        manifest_id,
        checksum: checksum(&stored, &model.features.selection, &model.training, &model.classifier),
        pipeline: stored,
        selection: model.features.selection.clone(),
        training: model.training.clone(),
        classifier: model.classifier.clone(),
    };
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writer.write_all(b"\n").map_err(|e| Error::io("<model>", e))?;
    Ok(())
}

fn load_err(msg: impl Into<String>) -> Error {
    Error::ModelLoad(msg.into())
}

/// Parses and validates a model file.
pub fn load_model(bytes: &[u8]) -> Result<PolarityModel> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| load_err(format!("not a model document: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| load_err("missing format_version"))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(Error::UnsupportedVersion {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(|e| load_err(format!("malformed model: {e}")))?;
    let expected = checksum(&file.pipeline, &file.selection, &file.training, &file.classifier);
    if expected != file.checksum {
        return Err(load_err("checksum mismatch"));
    }
    let vocab = &file.pipeline.vocabulary;
    if file.pipeline.tf_log_base != TF_LOG_BASE || file.pipeline.ig_binarization != IG_BINARIZATION {
        return Err(load_err("unsupported weighting metadata"));
    }
    if !vocab.is_consistent() {
        return Err(load_err("vocabulary document frequencies are inconsistent"));
    }
    if file.selection.original_count != vocab.len()
        || file.selection.sorted_ids().last().is_some_and(|&m| m as usize >= vocab.len())
    {
        return Err(load_err("selection does not match the vocabulary"));
    }
    let dim = file.selection.len();
    let ok = match &file.classifier {
        Classifier::Svm(m) => m.weights.len() == dim,
        Classifier::NaiveBayes(m) => m.term_log_likelihoods.iter().all(|l| l.len() == dim),
        Classifier::Tree(m) => m.nodes.iter().all(|n| match n {
            super::Node::Split {
                attribute,
                present,
                absent,
                ..
            } => (*attribute as usize) < dim && *present < m.nodes.len() && *absent < m.nodes.len(),
            super::Node::Leaf { .. } => true,
        }) && !m.nodes.is_empty(),
    };
    if !ok {
        return Err(load_err("classifier dimension does not match the selection"));
    }
    let stopwords = Stopwords::from_words(file.pipeline.stopwords.words, file.pipeline.stopwords.sha256);
    let pipeline = FittedPipeline::from_parts(file.pipeline.config, stopwords, file.pipeline.vocabulary);
    Ok(PolarityModel {
        features: FeatureSpace {
            pipeline,
            selection: file.selection,
        },
        training: file.training,
        classifier: file.classifier,
        ig_threshold: file.pipeline.ig_threshold,
    })
}
