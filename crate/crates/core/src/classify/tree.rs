//! Binary presence decision tree grown by information gain (C4.5-style
//! splitting with pre-pruning; no gain ratio, numeric thresholds or
//! post-pruning).

use serde::{Deserialize, Serialize};

use super::TrainingConfig;
use crate::corpus::PolarityLabel;
use crate::error::Result;
use crate::featsel::Contingency;
use crate::textpipe::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: PolarityLabel,
        positive: usize,
        negative: usize,
    },
    Split {
        attribute: u32,
        gain: f64,
        /// Child index for documents containing the attribute.
        present: usize,
        absent: usize,
        positive: usize,
        negative: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    /// `nodes[0]` is the root.
    pub nodes: Vec<Node>,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl DecisionTreeModel {
    fn leaf_for(&self, vec: &SparseVector) -> &Node {
        let mut node = &self.nodes[0];
        while let Node::Split {
            attribute,
            present,
            absent,
            ..
        } = node
        {
            node = &self.nodes[if vec.contains(*attribute) { *present } else { *absent }];
        }
        node
    }

    pub fn predict(&self, vec: &SparseVector) -> PolarityLabel {
        match self.leaf_for(vec) {
            Node::Leaf { label, .. } => *label,
            Node::Split { .. } => unreachable!("leaf_for stops at leaves"),
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { present, absent, .. } => 1 + walk(nodes, *present).max(walk(nodes, *absent)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

fn majority(positive: usize, negative: usize) -> PolarityLabel {
    if positive >= negative {
        PolarityLabel::Positive
    } else {
        PolarityLabel::Negative
    }
}

/// Best presence split among attributes not yet used on the path; ties go to
/// the smaller attribute id.
pub fn best_split(
    docs: &[(SparseVector, PolarityLabel)],
    members: &[usize],
    used: &[u32],
    min_leaf: usize,
) -> Option<(u32, f64)> {
    let mut present: std::collections::BTreeMap<u32, [usize; 2]> = Default::default();
    let (mut pos, mut neg) = (0, 0);
    for &m in members {
        let (v, label) = &docs[m];
        let s = match label {
            PolarityLabel::Positive => {
                pos += 1;
                0
            }
            PolarityLabel::Negative => {
                neg += 1;
                1
            }
        };
        for &a in v.indices() {
            present.entry(a).or_default()[s] += 1;
        }
    }
    let mut best: Option<(u32, f64)> = None;
    for (&a, c) in &present {
        if used.contains(&a) {
            continue;
        }
        let n_present = c[0] + c[1];
        if n_present < min_leaf || members.len() - n_present < min_leaf {
            continue;
        }
        let gain = Contingency {
            present_pos: c[0],
            present_neg: c[1],
            absent_pos: pos - c[0],
            absent_neg: neg - c[1],
        }
        .gain();
        if gain > 0.0 && best.map_or(true, |(_, g)| gain > g) {
            best = Some((a, gain));
        }
    }
    best
}

pub fn train_tree(docs: &[(SparseVector, PolarityLabel)], cfg: &TrainingConfig) -> Result<DecisionTreeModel> {
    super::require_both_classes(docs)?;
    let mut model = DecisionTreeModel {
        nodes: Vec::new(),
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
    };
    let all: Vec<usize> = (0..docs.len()).collect();
    grow(docs, &all, &mut Vec::new(), cfg, &mut model.nodes);
    Ok(model)
}

fn grow(
    docs: &[(SparseVector, PolarityLabel)],
    members: &[usize],
    used: &mut Vec<u32>,
    cfg: &TrainingConfig,
    nodes: &mut Vec<Node>,
) -> usize {
    let positive = members.iter().filter(|&&m| docs[m].1 == PolarityLabel::Positive).count();
    let negative = members.len() - positive;
    let id = nodes.len();
    nodes.push(Node::Leaf {
        label: majority(positive, negative),
        positive,
        negative,
    });
    if positive == 0 || negative == 0 || used.len() >= cfg.max_depth {
        return id;
    }
    let Some((attribute, gain)) = best_split(docs, members, used, cfg.min_leaf.max(1)) else {
        return id;
    };
    let (with, without): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&m| docs[m].0.contains(attribute));
    used.push(attribute);
    let present = grow(docs, &with, used, cfg, nodes);
    let absent = grow(docs, &without, used, cfg, nodes);
    used.pop();
    nodes[id] = Node::Split {
        attribute,
        gain,
        present,
        absent,
        positive,
        negative,
    };
    id
}
