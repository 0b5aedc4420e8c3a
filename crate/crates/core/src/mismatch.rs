//! Polarity mismatch (PM) between predicted text polarity and the polarity
//! implied by a five-point score, and the reports built on it.
//!
//! Orientation follows the confusion matrix: the score is the actual
//! polarity, the classifier output is the prediction. A false positive is a
//! review scored 1 or 2 whose text reads positive.

use std::collections::BTreeMap;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::classify::PolarityModel;
use crate::corpus::{PolarityLabel, Review};
use crate::error::{Error, Result};
use crate::eval::ConfusionMatrix;
use crate::exec::{self, Execution};
use crate::rng;
use crate::table::{fmt_half_up, Align, TextTable};

/// 4 and 5 are positive, 1 and 2 negative.
pub fn expected_polarity(score: u8) -> Result<PolarityLabel> {
    match score {
        4 | 5 => Ok(PolarityLabel::Positive),
        1 | 2 => Ok(PolarityLabel::Negative),
        3 => Err(Error::NeutralScore),
        s => Err(Error::InvalidScore {
            score: f64::from(s),
            scale: "five-point",
        }),
    }
}

pub fn compute_pm(predicted: PolarityLabel, score: u8) -> Result<u8> {
    Ok(u8::from(predicted != expected_polarity(score)?))
}

/// Converts a validated five-point score to its integer value.
pub fn five_point_score(score: f64) -> Result<u8> {
    if score.fract() == 0.0 && (1.0..=5.0).contains(&score) {
        Ok(score as u8)
    } else {
        Err(Error::InvalidScore {
            score,
            scale: "five-point",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchRecord {
    pub review_id: String,
    pub score: u8,
    pub actual_polarity: PolarityLabel,
    pub predicted_polarity: PolarityLabel,
    pub decision_value: Option<f64>,
    pub pm: u8,
}

impl MismatchRecord {
    pub fn new(review_id: impl Into<String>, score: u8, predicted: PolarityLabel, decision_value: Option<f64>) -> Result<Self> {
        let actual = expected_polarity(score)?;
        Ok(MismatchRecord {
            review_id: review_id.into(),
            score,
            actual_polarity: actual,
            predicted_polarity: predicted,
            decision_value,
            pm: u8::from(actual != predicted),
        })
    }

    pub fn category(&self) -> Category {
        Category::of(self.actual_polarity, self.predicted_polarity)
    }
}

/// Scores every review. Score-3 reviews are an error here; exclude them first.
pub fn detect(model: &PolarityModel, reviews: &[Review], mode: Execution) -> Result<Vec<MismatchRecord>> {
    exec::map(mode, reviews, |r| {
        let score = five_point_score(r.score)?;
        expected_polarity(score)?;
        let p = model.predict_review(r);
        MismatchRecord::new(p.review_id, score, p.predicted, p.decision_value)
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Tp,
    Tn,
    Fp,
    Fn,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Fp, Category::Fn, Category::Tp, Category::Tn];

    pub fn of(actual: PolarityLabel, predicted: PolarityLabel) -> Self {
        use PolarityLabel::{Negative as N, Positive as P};
        match (actual, predicted) {
            (P, P) => Category::Tp,
            (N, N) => Category::Tn,
            (N, P) => Category::Fp,
            (P, N) => Category::Fn,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tp" => Some(Category::Tp),
            "tn" => Some(Category::Tn),
            "fp" => Some(Category::Fp),
            "fn" => Some(Category::Fn),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Category::Tp => "TP",
            Category::Tn => "TN",
            Category::Fp => "FP",
            Category::Fn => "FN",
        }
    }

    /// Names the category both as a confusion cell and as a text/score pairing.
    pub fn description(self) -> &'static str {
        match self {
            Category::Tp => "positive text / high score (TP)",
            Category::Tn => "negative text / low score (TN)",
            Category::Fp => "positive text / low score (FP, mismatch)",
            Category::Fn => "negative text / high score (FN, mismatch)",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreCounts {
    pub predicted_pos: u64,
    pub predicted_neg: u64,
}

impl ScoreCounts {
    pub fn total(&self) -> u64 {
        self.predicted_pos + self.predicted_neg
    }
}

/// Predicted polarity counts per score. Merging is associative and
/// commutative, so partial breakdowns can be combined in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub per_score: BTreeMap<u8, ScoreCounts>,
}

impl ScoreBreakdown {
    pub fn add(&mut self, score: u8, predicted: PolarityLabel) {
        let c = self.per_score.entry(score).or_default();
        match predicted {
            PolarityLabel::Positive => c.predicted_pos += 1,
            PolarityLabel::Negative => c.predicted_neg += 1,
        }
    }

    pub fn merge(&mut self, other: &ScoreBreakdown) {
        for (&s, c) in &other.per_score {
            let e = self.per_score.entry(s).or_default();
            e.predicted_pos += c.predicted_pos;
            e.predicted_neg += c.predicted_neg;
        }
    }

    pub fn total(&self) -> u64 {
        self.per_score.values().map(ScoreCounts::total).sum()
    }

    /// Collapses scores into the polarity confusion matrix.
    pub fn confusion(&self) -> Result<ConfusionMatrix> {
        let mut cm = ConfusionMatrix::default();
        for (&s, c) in &self.per_score {
            match expected_polarity(s)? {
                PolarityLabel::Positive => {
                    cm.tp += c.predicted_pos;
                    cm.fn_ += c.predicted_neg;
                }
                PolarityLabel::Negative => {
                    cm.fp += c.predicted_pos;
                    cm.tn += c.predicted_neg;
                }
            }
        }
        Ok(cm)
    }
}

impl FromIterator<(u8, ScoreCounts)> for ScoreBreakdown {
    fn from_iter<I: IntoIterator<Item = (u8, ScoreCounts)>>(iter: I) -> Self {
        let mut b = ScoreBreakdown::default();
        for (s, c) in iter {
            b.merge(&ScoreBreakdown {
                per_score: BTreeMap::from([(s, c)]),
            });
        }
        b
    }
}

pub fn per_score_breakdown(records: &[MismatchRecord]) -> ScoreBreakdown {
    let mut b = ScoreBreakdown::default();
    for r in records {
        b.add(r.score, r.predicted_polarity);
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub total: u64,
    pub predicted_pos: u64,
    pub predicted_neg: u64,
    pub mismatched: u64,
    pub mismatch_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledExample {
    pub review_id: String,
    pub score: u8,
    pub decision_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// Percentages are at full precision; text rendering rounds half-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub total: u64,
    pub overall_match_rate: f64,
    pub fp_total: u64,
    pub fn_total: u64,
    pub confusion: ConfusionMatrix,
    pub per_score: BTreeMap<u8, ScoreRow>,
    pub per_score_mismatch_pct: BTreeMap<u8, f64>,
    /// Share of all false positives carried by each low score.
    pub fp_share_by_score: BTreeMap<u8, f64>,
    /// Share of all false negatives carried by each high score.
    pub fn_share_by_score: BTreeMap<u8, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sampled_examples: BTreeMap<Category, Vec<SampledExample>>,
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

pub fn report_from_breakdown(b: &ScoreBreakdown) -> Result<MismatchReport> {
    let confusion = b.confusion()?;
    let total = confusion.total();
    let mut per_score = BTreeMap::new();
    let mut per_score_mismatch_pct = BTreeMap::new();
    let mut fp_share_by_score = BTreeMap::new();
    let mut fn_share_by_score = BTreeMap::new();
    for (&s, c) in &b.per_score {
        let mismatched = match expected_polarity(s)? {
            PolarityLabel::Positive => {
                fn_share_by_score.insert(s, pct(c.predicted_neg, confusion.fn_));
                c.predicted_neg
            }
            PolarityLabel::Negative => {
                fp_share_by_score.insert(s, pct(c.predicted_pos, confusion.fp));
                c.predicted_pos
            }
        };
        let mismatch_pct = pct(mismatched, c.total());
        per_score_mismatch_pct.insert(s, mismatch_pct);
        per_score.insert(
            s,
            ScoreRow {
                total: c.total(),
                predicted_pos: c.predicted_pos,
                predicted_neg: c.predicted_neg,
                mismatched,
                mismatch_pct,
            },
        );
    }
    Ok(MismatchReport {
        total,
        overall_match_rate: pct(confusion.tp + confusion.tn, total),
        fp_total: confusion.fp,
        fn_total: confusion.fn_,
        confusion,
        per_score,
        per_score_mismatch_pct,
        fp_share_by_score,
        fn_share_by_score,
        sampled_examples: BTreeMap::new(),
    })
}

pub fn mismatch_report(records: &[MismatchRecord]) -> Result<MismatchReport> {
    report_from_breakdown(&per_score_breakdown(records))
}

/// Seeded uniform sample without replacement, returned in input order.
pub fn sample_mismatches(records: &[MismatchRecord], category: Category, n: usize, seed: u64) -> Vec<String> {
    sample_records(records, category, n, seed)
        .into_iter()
        .map(|r| r.review_id.clone())
        .collect()
}

pub fn sample_records(records: &[MismatchRecord], category: Category, n: usize, seed: u64) -> Vec<&MismatchRecord> {
    let pool: Vec<&MismatchRecord> = records.iter().filter(|r| r.category() == category).collect();
    let amount = n.min(pool.len());
    let mut rng = rng::substream(seed, 0x5A3B_0000 + category as u64);
    let mut picked = index::sample(&mut rng, pool.len(), amount).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| pool[i]).collect()
}

/// Scores in display order: positive block first, highest score first.
fn display_scores(per_score: &BTreeMap<u8, ScoreRow>) -> Vec<u8> {
    per_score.keys().rev().copied().collect()
}

pub fn render_confusion_table(cm: &ConfusionMatrix) -> String {
    let mut t = TextTable::new()
        .column("Actual polarity", 15, Align::Left)
        .column("Predicted pos", 13, Align::Right)
        .column("Predicted neg", 13, Align::Right);
    t.row(["pos".to_string(), cm.tp.to_string(), format!("{} (FN)", cm.fn_)]);
    t.row(["neg".to_string(), format!("{} (FP)", cm.fp), cm.tn.to_string()]);
    t.render()
}

pub fn render_score_table(report: &MismatchReport) -> String {
    let mut t = TextTable::new()
        .column("Actual score", 12, Align::Left)
        .column("Predicted pos", 13, Align::Right)
        .column("Predicted neg", 13, Align::Right);
    for s in display_scores(&report.per_score) {
        let r = &report.per_score[&s];
        t.row([s.to_string(), r.predicted_pos.to_string(), r.predicted_neg.to_string()]);
    }
    t.render()
}

pub fn render_mismatch_table(report: &MismatchReport) -> String {
    let mut t = TextTable::new()
        .column("Score", 5, Align::Left)
        .column("Total reviews", 13, Align::Right)
        .column("Mismatched (%)", 14, Align::Right);
    for s in display_scores(&report.per_score) {
        let r = &report.per_score[&s];
        t.row([s.to_string(), r.total.to_string(), fmt_half_up(r.mismatch_pct, 1)]);
    }
    t.render()
}

/// All three tables, the headline rates and any sampled examples.
pub fn render_report(report: &MismatchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Reviews: {}  PM=0: {}%  PM=1: {} ({} FP + {} FN)\n\n",
        report.total,
        fmt_half_up(report.overall_match_rate, 2),
        report.fp_total + report.fn_total,
        report.fp_total,
        report.fn_total
    ));
    out.push_str("Confusion matrix\n");
    out.push_str(&render_confusion_table(&report.confusion));
    out.push_str("\nConfusion matrix by actual score\n");
    out.push_str(&render_score_table(report));
    out.push_str("\nMismatched reviews per score\n");
    out.push_str(&render_mismatch_table(report));
    let shares = |m: &BTreeMap<u8, f64>| {
        m.iter()
            .rev()
            .map(|(s, v)| format!("score {s}: {}%", fmt_half_up(*v, 1)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    out.push_str(&format!("\nFP share by score: {}\n", shares(&report.fp_share_by_score)));
    out.push_str(&format!("FN share by score: {}\n", shares(&report.fn_share_by_score)));
    for (cat, examples) in &report.sampled_examples {
        out.push_str(&format!("\nSampled {}\n", cat.description()));
        for e in examples {
            let dv = e.decision_value.map(|d| format!(" decision={}", fmt_half_up(d, 3))).unwrap_or_default();
            out.push_str(&format!("- [{}] score {}{}", e.review_id, e.score, dv));
            if let Some(text) = &e.text {
                out.push_str(&format!(": {}", text.replace('\n', " ")));
            }
            out.push('\n');
        }
    }
    out
}
