//! Stratified k-fold cross-validation, confusion matrices and metrics.
//!
//! All percentages are in `[0, 100]`. Averaged metrics are the arithmetic
//! mean of the per-fold values; pooled metrics come from the summed
//! confusion matrix and are reported separately.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassifierKind, FeatureConfig, FeatureSpace, PolarityModel, TrainingConfig};
use crate::corpus::PolarityLabel;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::rng;
use crate::table::{fmt_half_up, Align, TextTable};
use crate::textpipe::{Analyzer, SparseVector, Stopwords};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// Fold id per document index.
    pub assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, doc: usize) -> usize {
        self.assignment[doc]
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignment {
            s[f] += 1;
        }
        s
    }
}

/// Shuffles each class with its own seeded stream, then deals documents to
/// folds round-robin. The deal continues from one class to the next, so both
/// per-class and total fold sizes differ by at most one.
pub fn stratified_folds(labels: &[PolarityLabel], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::Config(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0usize;
    for (tag, label) in PolarityLabel::ALL.into_iter().enumerate() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if members.len() < k {
            return Err(Error::InsufficientData {
                label,
                needed: k,
                available: members.len(),
            });
        }
        members.shuffle(&mut rng::substream(seed, 0xF01D + tag as u64));
        for i in members {
            assignment[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldAssignment { k, seed, assignment })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn add(&mut self, actual: PolarityLabel, predicted: PolarityLabel) {
        use PolarityLabel::{Negative as N, Positive as P};
        match (actual, predicted) {
            (P, P) => self.tp += 1,
            (N, N) => self.tn += 1,
            (N, P) => self.fp += 1,
            (P, N) => self.fn_ += 1,
        }
    }

    pub fn merge(&self, other: &ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tp + other.tp,
            tn: self.tn + other.tn,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
        }
    }

    /// The same counts with Negative treated as the positive class.
    pub fn swapped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

pub fn confusion(predictions: &[PolarityLabel], actuals: &[PolarityLabel]) -> Result<ConfusionMatrix> {
    if predictions.len() != actuals.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: actuals.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &a) in predictions.iter().zip(actuals) {
        cm.add(a, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
}

impl PerClass {
    pub fn get(&self, label: PolarityLabel) -> &ClassMetrics {
        match label {
            PolarityLabel::Positive => &self.positive,
            PolarityLabel::Negative => &self.negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub per_class: PerClass,
    pub confusion: ConfusionMatrix,
    /// Set when some denominator was zero and the value was defined as 0.
    pub degenerate: bool,
}

fn pct(num: u64, den: u64, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

fn class_metrics(tp: u64, fp: u64, fn_: u64, degenerate: &mut bool) -> ClassMetrics {
    let precision = pct(tp, tp + fp, degenerate);
    let recall = pct(tp, tp + fn_, degenerate);
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        *degenerate = true;
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f_score,
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> FoldMetrics {
    let mut degenerate = false;
    let accuracy = pct(cm.tp + cm.tn, cm.total(), &mut degenerate);
    let positive = class_metrics(cm.tp, cm.fp, cm.fn_, &mut degenerate);
    let negative = class_metrics(cm.tn, cm.fn_, cm.fp, &mut degenerate);
    FoldMetrics {
        accuracy,
        per_class: PerClass { positive, negative },
        confusion: *cm,
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedMetrics {
    pub accuracy: f64,
    pub per_class: PerClass,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn average(folds: &[FoldMetrics]) -> AveragedMetrics {
    let cm = |f: fn(&ClassMetrics) -> f64, label: PolarityLabel| mean(folds.iter().map(|m| f(m.per_class.get(label))));
    let block = |label| ClassMetrics {
        precision: cm(|c| c.precision, label),
        recall: cm(|c| c.recall, label),
        f_score: cm(|c| c.f_score, label),
    };
    AveragedMetrics {
        accuracy: mean(folds.iter().map(|m| m.accuracy)),
        per_class: PerClass {
            positive: block(PolarityLabel::Positive),
            negative: block(PolarityLabel::Negative),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub vocabulary_size: usize,
    pub vocabulary_sha256: String,
    pub kept_attributes: usize,
    /// SVM only: whether SMO met the tolerance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub metrics: FoldMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classifier: ClassifierKind,
    pub k: usize,
    pub seed: u64,
    pub rng: String,
    pub folds: Vec<FoldReport>,
    /// Mean of the per-fold values.
    pub averaged: AveragedMetrics,
    /// Metrics of the summed confusion matrix.
    pub pooled: FoldMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub k: usize,
    pub seed: u64,
    pub reports: Vec<MetricsReport>,
}

impl Comparison {
    pub fn report(&self, kind: ClassifierKind) -> Option<&MetricsReport> {
        self.reports.iter().find(|r| r.classifier == kind)
    }

    pub fn render_table(&self) -> String {
        let rows: Vec<(String, AveragedMetrics)> = self
            .reports
            .iter()
            .map(|r| (r.classifier.display_name().to_string(), r.averaged))
            .collect();
        render_comparison(&rows)
    }
}

/// Renders rows in the classifier comparison layout: accuracy with two
/// decimals, per-class precision, recall and F-score with one.
pub fn render_comparison(rows: &[(String, AveragedMetrics)]) -> String {
    let mut t = TextTable::new().column("Classifier", 10, Align::Left).column("Accuracy(%)", 11, Align::Right);
    for h in ["Prec pos", "Prec neg", "Rec pos", "Rec neg", "F pos", "F neg"] {
        t = t.column(h, 8, Align::Right);
    }
    for (name, m) in rows {
        let p = &m.per_class.positive;
        let n = &m.per_class.negative;
        let mut cells = vec![name.clone(), fmt_half_up(m.accuracy, 2)];
        for v in [p.precision, n.precision, p.recall, n.recall, p.f_score, n.f_score] {
            cells.push(fmt_half_up(v, 1));
        }
        t.row(cells);
    }
    t.render()
}

/// Vocabulary and selection for one fold, built from its training documents only.
pub fn fit_fold<S: AsRef<str> + Sync, D: AsRef<[S]> + Sync>(
    stems: &[D],
    labels: &[PolarityLabel],
    folds: &FoldAssignment,
    fold: usize,
    features: &FeatureConfig,
    stopwords: &Stopwords,
    mode: Execution,
) -> Result<(FeatureSpace, Vec<SparseVector>, Vec<PolarityLabel>)> {
    let train = folds.train_indices(fold);
    let train_stems: Vec<&[S]> = train.iter().map(|&i| stems[i].as_ref()).collect();
    let train_labels: Vec<PolarityLabel> = train.iter().map(|&i| labels[i]).collect();
    let (space, vectors) = FeatureSpace::fit(features, stopwords.clone(), &train_stems, &train_labels, mode)?;
    Ok((space, vectors, train_labels))
}

/// Runs every trainer on the same folds. Stems are computed once; each fold
/// builds its feature space once and shares it between trainers.
#[allow(clippy::too_many_arguments)]
pub fn compare<T: AsRef<str> + Sync>(
    texts: &[T],
    labels: &[PolarityLabel],
    features: &FeatureConfig,
    stopwords: &Stopwords,
    trainers: &[TrainingConfig],
    k: usize,
    seed: u64,
    mode: Execution,
) -> Result<Comparison> {
    if trainers.is_empty() {
        return Err(Error::Config("no classifier to evaluate".into()));
    }
    if texts.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: texts.len(),
            right: labels.len(),
        });
    }
    let folds = stratified_folds(labels, k, seed)?;
    let analyzer = Analyzer::new(&features.pipeline, stopwords.clone());
    let stems: Vec<Vec<String>> = exec::map(mode, texts, |t| analyzer.analyze(t.as_ref()));

    let per_fold: Vec<Result<Vec<FoldReport>>> = exec::map_range(mode, k, |fold| {
        let (space, vectors, train_labels) = fit_fold(&stems, labels, &folds, fold, features, stopwords, mode)?;
        let test = folds.test_indices(fold);
        let test_vectors: Vec<SparseVector> = test.iter().map(|&i| space.transform_stems(&stems[i])).collect();
        let actual: Vec<PolarityLabel> = test.iter().map(|&i| labels[i]).collect();
        let mut out = Vec::with_capacity(trainers.len());
        for cfg in trainers {
            let model = PolarityModel::train_on(space.clone(), vectors.clone(), &train_labels, features.ig_threshold, cfg)?;
            let predicted: Vec<PolarityLabel> = test_vectors.iter().map(|v| model.classifier.predict(v)).collect();
            let cm = confusion(&predicted, &actual)?;
            out.push(FoldReport {
                fold,
                train_size: train_labels.len(),
                test_size: test.len(),
                vocabulary_size: space.pipeline.vocabulary().len(),
                vocabulary_sha256: space.pipeline.vocabulary().sha256(),
                kept_attributes: space.dimension(),
                converged: match &model.classifier {
                    crate::classify::Classifier::Svm(m) => Some(m.converged),
                    _ => None,
                },
                metrics: metrics(&cm),
            });
        }
        Ok(out)
    });
    let per_fold: Vec<Vec<FoldReport>> = per_fold.into_iter().collect::<Result<_>>()?;

    let reports = trainers
        .iter()
        .enumerate()
        .map(|(t, cfg)| {
            let folds: Vec<FoldReport> = per_fold.iter().map(|f| f[t].clone()).collect();
            let fold_metrics: Vec<FoldMetrics> = folds.iter().map(|f| f.metrics).collect();
            let pooled_cm = fold_metrics
                .iter()
                .fold(ConfusionMatrix::default(), |acc, m| acc.merge(&m.confusion));
            for f in &folds {
                if f.converged == Some(false) {
                    log::warn!("SMO hit the iteration cap in fold {}", f.fold);
                }
            }
            MetricsReport {
                classifier: cfg.classifier,
                k,
                seed,
                rng: rng::RNG_ALGORITHM.to_string(),
                averaged: average(&fold_metrics),
                pooled: metrics(&pooled_cm),
                folds,
            }
        })
        .collect();
    Ok(Comparison { k, seed, reports })
}

#[allow(clippy::too_many_arguments)]
pub fn cross_validate<T: AsRef<str> + Sync>(
    texts: &[T],
    labels: &[PolarityLabel],
    features: &FeatureConfig,
    stopwords: &Stopwords,
    trainer: &TrainingConfig,
    k: usize,
    seed: u64,
    mode: Execution,
) -> Result<MetricsReport> {
    let mut c = compare(texts, labels, features, stopwords, std::slice::from_ref(trainer), k, seed, mode)?;
    Ok(c.reports.remove(0))
}
