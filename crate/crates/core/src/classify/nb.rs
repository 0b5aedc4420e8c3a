//! Multinomial naive Bayes with additive smoothing.
//!
//! Vector values are read as (possibly fractional) term counts.

use serde::{Deserialize, Serialize};

use super::TrainingConfig;
use crate::corpus::PolarityLabel;
use crate::error::{Error, Result};
use crate::textpipe::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// Indexed `[positive, negative]`.
    pub class_priors: [f64; 2],
    /// `term_log_likelihoods[class][attribute]`.
    pub term_log_likelihoods: [Vec<f64>; 2],
    pub smoothing: f64,
}

fn slot(label: PolarityLabel) -> usize {
    match label {
        PolarityLabel::Positive => 0,
        PolarityLabel::Negative => 1,
    }
}

impl NaiveBayesModel {
    pub fn prior(&self, label: PolarityLabel) -> f64 {
        self.class_priors[slot(label)]
    }

    pub fn log_likelihood(&self, label: PolarityLabel, attribute: u32) -> f64 {
        self.term_log_likelihoods[slot(label)][attribute as usize]
    }

    pub fn log_posterior(&self, label: PolarityLabel, vec: &SparseVector) -> f64 {
        let ll = &self.term_log_likelihoods[slot(label)];
        let evidence: f64 = vec
            .iter()
            .filter_map(|(i, c)| ll.get(i as usize).map(|l| c * l))
            .sum();
        self.prior(label).ln() + evidence
    }

    /// Log-odds of positive over negative.
    pub fn decision(&self, vec: &SparseVector) -> f64 {
        self.log_posterior(PolarityLabel::Positive, vec) - self.log_posterior(PolarityLabel::Negative, vec)
    }

    pub fn predict(&self, vec: &SparseVector) -> PolarityLabel {
        if self.decision(vec) >= 0.0 {
            PolarityLabel::Positive
        } else {
            PolarityLabel::Negative
        }
    }
}

pub fn train_nb(
    docs: &[(SparseVector, PolarityLabel)],
    n_attributes: usize,
    cfg: &TrainingConfig,
) -> Result<NaiveBayesModel> {
    super::require_both_classes(docs)?;
    if !(cfg.smoothing > 0.0) {
        return Err(Error::Config("smoothing must be positive".into()));
    }
    let dim = docs
        .iter()
        .filter_map(|(v, _)| v.max_index())
        .map(|i| i as usize + 1)
        .max()
        .unwrap_or(0)
        .max(n_attributes);
    let mut counts = [vec![0.0; dim], vec![0.0; dim]];
    let mut docs_per_class = [0usize; 2];
    for (v, label) in docs {
        let s = slot(*label);
        docs_per_class[s] += 1;
        v.add_to_dense(&mut counts[s], 1.0);
    }
    let n = docs.len() as f64;
    let class_priors = [docs_per_class[0] as f64 / n, docs_per_class[1] as f64 / n];
    let alpha = cfg.smoothing;
    let term_log_likelihoods = counts.map(|c| {
        let total: f64 = c.iter().sum::<f64>() + alpha * dim as f64;
        c.iter().map(|&k| ((k + alpha) / total).ln()).collect()
    });
    Ok(NaiveBayesModel {
        class_priors,
        term_log_likelihoods,
        smoothing: alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use PolarityLabel::{Negative as N, Positive as P};

    fn doc(pairs: &[(u32, f64)], label: PolarityLabel) -> (SparseVector, PolarityLabel) {
        (SparseVector::from_pairs(pairs.to_vec()), label)
    }

    #[test]
    fn priors_and_monotonicity() {
        let docs = [doc(&[(0, 1.0)], P), doc(&[(0, 2.0)], P), doc(&[(1, 1.0)], N), doc(&[(1, 1.0)], N)];
        let m = train_nb(&docs, 2, &TrainingConfig::default()).unwrap();
        assert_eq!(m.class_priors, [0.5, 0.5]);
        assert!(m.log_likelihood(P, 0) > m.log_likelihood(N, 0));
    }

    #[test]
    fn hand_computed_likelihoods() {
        // 3 attributes, smoothing 1.
        // pos counts: a=3, b=1, c=0 (total 4) -> (4/7, 2/7, 1/7)
        // neg counts: a=0, b=1, c=2 (total 3) -> (1/6, 2/6, 3/6)
        let docs = [
            doc(&[(0, 2.0), (1, 1.0)], P),
            doc(&[(0, 1.0)], P),
            doc(&[(2, 2.0)], N),
            doc(&[(1, 1.0)], N),
        ];
        let m = train_nb(&docs, 3, &TrainingConfig::default()).unwrap();
        let expect_pos = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        let expect_neg = [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0];
        for i in 0..3 {
            assert!((m.log_likelihood(P, i) - f64::ln(expect_pos[i as usize])).abs() < 1e-12);
            assert!((m.log_likelihood(N, i) - f64::ln(expect_neg[i as usize])).abs() < 1e-12);
        }
        let sum: f64 = m.term_log_likelihoods[0].iter().map(|l| l.exp()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_vector_with_symmetric_model_is_positive() {
        let docs = [doc(&[(0, 1.0)], P), doc(&[(1, 1.0)], N)];
        let m = train_nb(&docs, 2, &TrainingConfig::default()).unwrap();
        assert_eq!(m.decision(&SparseVector::new()), 0.0);
        assert_eq!(m.predict(&SparseVector::new()), P);
        assert_eq!(m.predict(&SparseVector::from_pairs(vec![(1, 1.0)])), N);
    }

    #[test]
    fn duplicating_corpus_keeps_predictions() {
        let docs = vec![
            doc(&[(0, 1.0), (2, 1.0)], P),
            doc(&[(0, 2.0)], P),
            doc(&[(1, 1.0), (2, 1.0)], N),
            doc(&[(1, 3.0)], N),
            doc(&[(2, 1.0)], N),
        ];
        let twice: Vec<_> = docs.iter().chain(docs.iter()).cloned().collect();
        let cfg = TrainingConfig::default();
        let (a, b) = (train_nb(&docs, 3, &cfg).unwrap(), train_nb(&twice, 3, &cfg).unwrap());
        for v in [vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 5.0)], vec![(0, 1.0), (1, 1.0)]] {
            let v = SparseVector::from_pairs(v);
            assert_eq!(a.predict(&v), b.predict(&v));
        }
    }

    #[test]
    fn single_class_rejected() {
        let docs = [doc(&[(0, 1.0)], N)];
        assert!(matches!(train_nb(&docs, 1, &TrainingConfig::default()), Err(Error::SingleClass)));
    }
}
