//! Information-gain attribute ranking and selection.
//!
//! Attributes are binarized to presence (stored weight != 0) before the
//! class-conditional entropy is computed. Entropies are in bits.

use serde::{Deserialize, Serialize};

use crate::corpus::PolarityLabel;
use crate::exec::{self, Execution};
use crate::textpipe::{SparseVector, Vocabulary};

/// Gains closer to zero than this are reported as exactly zero, so that
/// class-independent attributes never survive a threshold of 0 through
/// floating-point residue.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub attribute_id: u32,
    pub gain: f64,
}

/// Two-class entropy of a count pair, in bits (`0 log 0 = 0`).
pub fn entropy2(a: usize, b: usize) -> f64 {
    let n = (a + b) as f64;
    if n == 0.0 {
        return 0.0;
    }
    [a, b]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Presence/class contingency counts for one attribute.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Contingency {
    pub present_pos: usize,
    pub present_neg: usize,
    pub absent_pos: usize,
    pub absent_neg: usize,
}

impl Contingency {
    pub fn gain(&self) -> f64 {
        let pos = self.present_pos + self.absent_pos;
        let neg = self.present_neg + self.absent_neg;
        let n = (pos + neg) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let present = (self.present_pos + self.present_neg) as f64;
        let absent = (self.absent_pos + self.absent_neg) as f64;
        let conditional = present / n * entropy2(self.present_pos, self.present_neg)
            + absent / n * entropy2(self.absent_pos, self.absent_neg);
        let gain = entropy2(pos, neg) - conditional;
        if gain.abs() < GAIN_EPSILON {
            0.0
        } else {
            gain
        }
    }
}

fn class_totals(docs: &[(SparseVector, PolarityLabel)]) -> (usize, usize) {
    let pos = docs.iter().filter(|(_, l)| *l == PolarityLabel::Positive).count();
    (pos, docs.len() - pos)
}

pub fn information_gain(docs: &[(SparseVector, PolarityLabel)], attribute_id: u32) -> f64 {
    let (pos, neg) = class_totals(docs);
    let mut t = Contingency::default();
    for (v, label) in docs {
        if v.contains(attribute_id) {
            match label {
                PolarityLabel::Positive => t.present_pos += 1,
                PolarityLabel::Negative => t.present_neg += 1,
            }
        }
    }
    t.absent_pos = pos - t.present_pos;
    t.absent_neg = neg - t.present_neg;
    t.gain()
}

/// Ranked attributes with gain strictly above the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SelectionRepr", into = "SelectionRepr")]
pub struct SelectionResult {
    /// Rank order: gain descending, attribute id ascending on ties.
    pub ranked: Vec<AttributeScore>,
    pub threshold: f64,
    pub original_count: usize,
    /// Set when nothing scored above the threshold.
    pub empty: bool,
    sorted_ids: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SelectionRepr {
    threshold: f64,
    original_count: usize,
    kept: Vec<AttributeScore>,
}

impl From<SelectionRepr> for SelectionResult {
    fn from(r: SelectionRepr) -> Self {
        SelectionResult::new(r.kept, r.threshold, r.original_count)
    }
}

impl From<SelectionResult> for SelectionRepr {
    fn from(s: SelectionResult) -> Self {
        SelectionRepr {
            threshold: s.threshold,
            original_count: s.original_count,
            kept: s.ranked,
        }
    }
}

impl SelectionResult {
    fn new(ranked: Vec<AttributeScore>, threshold: f64, original_count: usize) -> Self {
        let mut sorted_ids: Vec<u32> = ranked.iter().map(|s| s.attribute_id).collect();
        sorted_ids.sort_unstable();
        SelectionResult {
            empty: ranked.is_empty(),
            ranked,
            threshold,
            original_count,
            sorted_ids,
        }
    }

    /// Keeps every attribute (no selection stage).
    pub fn all(original_count: usize) -> Self {
        let ranked = (0..original_count as u32)
            .map(|attribute_id| AttributeScore { attribute_id, gain: 0.0 })
            .collect();
        let mut s = Self::new(ranked, -1.0, original_count);
        s.empty = original_count == 0;
        s
    }

    pub fn kept(&self) -> impl Iterator<Item = u32> + '_ {
        self.ranked.iter().map(|s| s.attribute_id)
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn contains(&self, attribute_id: u32) -> bool {
        self.sorted_ids.binary_search(&attribute_id).is_ok()
    }

    /// Kept attribute ids in ascending order.
    pub fn sorted_ids(&self) -> &[u32] {
        &self.sorted_ids
    }

    /// Position of a kept attribute in the compact space `0..len()`.
    pub fn compact_id(&self, attribute_id: u32) -> Option<u32> {
        self.sorted_ids.binary_search(&attribute_id).ok().map(|p| p as u32)
    }

    /// Projects and renumbers a vector into the compact space.
    pub fn compact(&self, vec: &SparseVector) -> SparseVector {
        vec.iter()
            .filter_map(|(i, w)| self.compact_id(i).map(|c| (c, w)))
            .collect()
    }

    /// JSON-ready ranking with term strings.
    pub fn report(&self, vocab: &Vocabulary) -> Vec<RankedTerm> {
        self.ranked
            .iter()
            .map(|s| RankedTerm {
                term: vocab.term(s.attribute_id).unwrap_or("").to_string(),
                attribute_id: s.attribute_id,
                gain: s.gain,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTerm {
    pub term: String,
    pub attribute_id: u32,
    pub gain: f64,
}

/// Scores all `n_attributes` attributes and keeps those with gain > threshold.
pub fn rank_and_select(
    docs: &[(SparseVector, PolarityLabel)],
    n_attributes: usize,
    threshold: f64,
    mode: Execution,
) -> SelectionResult {
    let (pos, neg) = class_totals(docs);
    let mut present = vec![[0usize; 2]; n_attributes];
    for (v, label) in docs {
        let slot = match label {
            PolarityLabel::Positive => 0,
            PolarityLabel::Negative => 1,
        };
        for &i in v.indices() {
            if let Some(c) = present.get_mut(i as usize) {
                c[slot] += 1;
            }
        }
    }
    let gains = exec::map(mode, &present, |c| {
        Contingency {
            present_pos: c[0],
            present_neg: c[1],
            absent_pos: pos - c[0],
            absent_neg: neg - c[1],
        }
        .gain()
    });
    let mut ranked: Vec<AttributeScore> = gains
        .into_iter()
        .enumerate()
        .filter(|&(_, g)| g > threshold)
        .map(|(i, gain)| AttributeScore {
            attribute_id: i as u32,
            gain,
        })
        .collect();
    ranked.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.attribute_id.cmp(&b.attribute_id)));
    let result = SelectionResult::new(ranked, threshold, n_attributes);
    if result.empty {
        log::warn!("no attribute scored above the information-gain threshold {threshold}");
    }
    result
}

/// Restricts a vector to the selected attributes.
pub fn project(vec: &SparseVector, selection: &SelectionResult) -> SparseVector {
    vec.retain(|i| selection.contains(i))
}
