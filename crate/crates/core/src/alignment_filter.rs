//! Alignment-quality features and a small decision-tree classifier used to
//! separate well aligned sentence pairs from poorly aligned ones, plus a
//! pure-threshold fallback mode.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::ParallelPair;

pub const FEATURE_COUNT: usize = 5;

/// Per-pair alignment quality features, in fixed index order:
/// 0 align_score, 1 src_len, 2 tgt_len, 3 unaligned_ratio, 4 one_to_one_ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterFeatures {
    pub align_score: f64,
    pub src_len: usize,
    pub tgt_len: usize,
    pub unaligned_ratio: f64,
    pub one_to_one_ratio: f64,
}

impl FilterFeatures {
    pub fn get(&self, index: usize) -> f64 {
        match index {
            0 => self.align_score,
            1 => self.src_len as f64,
            2 => self.tgt_len as f64,
            3 => self.unaligned_ratio,
            4 => self.one_to_one_ratio,
            _ => panic!("feature index {index} out of range"),
        }
    }

    pub fn name(index: usize) -> &'static str {
        match index {
            0 => "align_score",
            1 => "src_len",
            2 => "tgt_len",
            3 => "unaligned_ratio",
            4 => "one_to_one_ratio",
            _ => panic!("feature index {index} out of range"),
        }
    }
}

/// Computes the filter features for one pair.
///
/// unaligned_ratio pools both sides: (unlinked source tokens + unlinked
/// target tokens) / (src_len + tgt_len), 0 when both sentences are empty.
/// one_to_one_ratio counts links whose source index and target index each
/// occur in exactly one link, over the total link count, 0 when no links.
pub fn extract_features(pair: &ParallelPair) -> FilterFeatures {
    let src_len = pair.src.len();
    let tgt_len = pair.tgt.len();

    let mut src_degree = vec![0usize; src_len];
    let mut tgt_degree = vec![0usize; tgt_len];
    for &(i, j) in &pair.links {
        src_degree[i] += 1;
        tgt_degree[j] += 1;
    }

    let unaligned = src_degree.iter().filter(|&&d| d == 0).count()
        + tgt_degree.iter().filter(|&&d| d == 0).count();
    let total_tokens = src_len + tgt_len;
    let unaligned_ratio = if total_tokens == 0 {
        0.0
    } else {
        unaligned as f64 / total_tokens as f64
    };

    let one_to_one = pair
        .links
        .iter()
        .filter(|&&(i, j)| src_degree[i] == 1 && tgt_degree[j] == 1)
        .count();
    let one_to_one_ratio = if pair.links.is_empty() {
        0.0
    } else {
        one_to_one as f64 / pair.links.len() as f64
    };

    FilterFeatures {
        align_score: pair.align_score,
        src_len,
        tgt_len,
        unaligned_ratio,
        one_to_one_ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterClass {
    Keep,
    Drop,
}

impl fmt::Display for FilterClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterClass::Keep => write!(f, "keep"),
            FilterClass::Drop => write!(f, "drop"),
        }
    }
}

/// Binary tree node. Serialized form: internal nodes are
/// `{"feature": int, "threshold": real, "left": ..., "right": ...}`,
/// leaves are `{"class": "keep"|"drop"}`. The `<=` branch goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class: FilterClass,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionTree {
    pub root: TreeNode,
}

impl DecisionTree {
    /// Deterministic root-to-leaf descent; `<=` goes left.
    pub fn classify(&self, features: &FilterFeatures) -> FilterClass {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { class } => return *class,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features.get(*feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<DecisionTree> {
        let tree: DecisionTree = serde_json::from_str(json)
            .map_err(|e| Error::Invalid(format!("malformed decision tree JSON: {e}")))?;
        tree.validate(&tree.root)?;
        Ok(tree)
    }

    fn validate(&self, node: &TreeNode) -> Result<()> {
        if let TreeNode::Split {
            feature,
            left,
            right,
            ..
        } = node
        {
            if *feature >= FEATURE_COUNT {
                return Err(Error::Invalid(format!(
                    "decision tree references feature index {feature}, valid range is 0..{FEATURE_COUNT}"
                )));
            }
            self.validate(left)?;
            self.validate(right)?;
        }
        Ok(())
    }
}

fn gini(counts: (usize, usize)) -> f64 {
    let total = counts.0 + counts.1;
    if total == 0 {
        return 0.0;
    }
    let p_keep = counts.0 as f64 / total as f64;
    let p_drop = counts.1 as f64 / total as f64;
    1.0 - p_keep * p_keep - p_drop * p_drop
}

fn class_counts(samples: &[(FilterFeatures, FilterClass)]) -> (usize, usize) {
    let keep = samples
        .iter()
        .filter(|(_, c)| *c == FilterClass::Keep)
        .count();
    (keep, samples.len() - keep)
}

/// Majority class; ties go to keep.
fn majority(samples: &[(FilterFeatures, FilterClass)]) -> FilterClass {
    let (keep, drop) = class_counts(samples);
    if drop > keep {
        FilterClass::Drop
    } else {
        FilterClass::Keep
    }
}

/// Best axis-aligned split of `samples`, or None when no split is valid.
/// Candidate thresholds are midpoints between sorted distinct values of each
/// feature; the split minimizing weighted Gini impurity wins, ties broken by
/// lowest feature index then lowest threshold.
fn best_split(
    samples: &[(FilterFeatures, FilterClass)],
    min_leaf: usize,
) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    for feature in 0..FEATURE_COUNT {
        let mut values: Vec<f64> = samples.iter().map(|(f, _)| f.get(feature)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("features are finite"));
        values.dedup();
        for window in values.windows(2) {
            let threshold = (window[0] + window[1]) / 2.0;
            let (left, right): (Vec<_>, Vec<_>) = samples
                .iter()
                .partition(|(f, _)| f.get(feature) <= threshold);
            if left.len() < min_leaf || right.len() < min_leaf {
                continue;
            }
            let n = samples.len() as f64;
            let impurity = left.len() as f64 / n * gini(class_counts(&left))
                + right.len() as f64 / n * gini(class_counts(&right));
            let candidate = (impurity, feature, threshold);
            let better = match best {
                None => true,
                Some((bi, bf, bt)) => {
                    impurity < bi
                        || (impurity == bi && (feature, threshold) < (bf, bt))
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

fn grow(
    samples: &[(FilterFeatures, FilterClass)],
    depth: usize,
    max_depth: usize,
    min_leaf: usize,
) -> TreeNode {
    let (keep, drop) = class_counts(samples);
    let pure = keep == 0 || drop == 0;
    if pure || depth >= max_depth {
        return TreeNode::Leaf {
            class: majority(samples),
        };
    }
    match best_split(samples, min_leaf) {
        None => TreeNode::Leaf {
            class: majority(samples),
        },
        Some((feature, threshold)) => {
            let (left, right): (Vec<_>, Vec<_>) = samples
                .iter()
                .cloned()
                .partition(|(f, _)| f.get(feature) <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(&left, depth + 1, max_depth, min_leaf)),
                right: Box::new(grow(&right, depth + 1, max_depth, min_leaf)),
            }
        }
    }
}

/// Greedy top-down Gini induction. `max_depth` bounds the number of split
/// levels above a leaf; pass `usize::MAX` for unbounded depth.
pub fn train_tree(
    samples: &[(FilterFeatures, FilterClass)],
    max_depth: usize,
    min_leaf: usize,
) -> Result<DecisionTree> {
    if samples.is_empty() {
        return Err(Error::Invalid(
            "cannot train a decision tree on an empty sample set".to_string(),
        ));
    }
    let min_leaf = min_leaf.max(1);
    Ok(DecisionTree {
        root: grow(samples, 0, max_depth, min_leaf),
    })
}

/// Threshold fallback: keep a pair iff align_score >= min_score AND
/// unaligned_ratio <= max_unaligned AND one_to_one_ratio >= min_one_to_one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_score: f64,
    pub max_unaligned: f64,
    pub min_one_to_one: f64,
}

impl Default for Thresholds {
    /// Pass-through defaults: nothing is dropped.
    fn default() -> Thresholds {
        Thresholds {
            min_score: 0.0,
            max_unaligned: 1.0,
            min_one_to_one: 0.0,
        }
    }
}

impl Thresholds {
    pub fn classify(&self, f: &FilterFeatures) -> FilterClass {
        if f.align_score >= self.min_score
            && f.unaligned_ratio <= self.max_unaligned
            && f.one_to_one_ratio >= self.min_one_to_one
        {
            FilterClass::Keep
        } else {
            FilterClass::Drop
        }
    }
}

#[derive(Debug, Clone)]
pub enum FilterMode {
    Tree(DecisionTree),
    Thresholds(Thresholds),
}

impl FilterMode {
    pub fn classify(&self, f: &FilterFeatures) -> FilterClass {
        match self {
            FilterMode::Tree(tree) => tree.classify(f),
            FilterMode::Thresholds(t) => t.classify(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub kept: usize,
    pub dropped: usize,
}

/// Classifies every pair and keeps the `keep` ones, preserving input order.
pub fn filter_corpus(
    pairs: Vec<ParallelPair>,
    mode: &FilterMode,
) -> (Vec<ParallelPair>, FilterReport) {
    let total = pairs.len();
    let kept: Vec<ParallelPair> = pairs
        .into_iter()
        .filter(|p| mode.classify(&extract_features(p)) == FilterClass::Keep)
        .collect();
    let report = FilterReport {
        kept: kept.len(),
        dropped: total - kept.len(),
    };
    (kept, report)
}

/// Per-feature summary used in the drop report.
pub fn feature_summary(pairs: &[ParallelPair]) -> BTreeMap<&'static str, f64> {
    let mut sums = BTreeMap::new();
    if pairs.is_empty() {
        return sums;
    }
    for pair in pairs {
        let f = extract_features(pair);
        for idx in 0..FEATURE_COUNT {
            *sums.entry(FilterFeatures::name(idx)).or_insert(0.0) += f.get(idx);
        }
    }
    for value in sums.values_mut() {
        *value /= pairs.len() as f64;
    }
    sums
}
