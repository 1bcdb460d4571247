//! Evaluation: per-class precision/recall for annotations and triggers,
//! corpus gender-dependence statistics, and corpus-level BLEU with the
//! baseline-vs-adapted system comparison.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trigger::Decision;
use crate::types::{GenderLabel, LabelSet, Role};

/// tp/fp/fn counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ClassCounts {
    /// tp/(tp+fp); None when no predictions were made.
    pub fn precision(&self) -> Option<f64> {
        let denom = self.tp + self.fp;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    /// tp/(tp+fn); None when the class never occurs in gold.
    pub fn recall(&self) -> Option<f64> {
        let denom = self.tp + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }
}

fn pct_or_na(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}%", v * 100.0),
        None => "n/a".to_string(),
    }
}

/// Per-class precision/recall report over the four gender label classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrReport {
    /// In `GenderLabel::ALL` order.
    pub classes: Vec<(GenderLabel, ClassCounts)>,
}

impl PrReport {
    pub fn counts(&self, label: GenderLabel) -> ClassCounts {
        self.classes
            .iter()
            .find(|(l, _)| *l == label)
            .map(|(_, c)| *c)
            .expect("all four classes present")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let classes: serde_json::Map<String, serde_json::Value> = self
            .classes
            .iter()
            .map(|(label, counts)| {
                (
                    label.to_string(),
                    serde_json::json!({
                        "tp": counts.tp,
                        "fp": counts.fp,
                        "fn": counts.fn_,
                        "precision": counts.precision(),
                        "recall": counts.recall(),
                    }),
                )
            })
            .collect();
        serde_json::Value::Object(classes)
    }
}

impl fmt::Display for PrReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<14} {:>10} {:>10} {:>5} {:>5} {:>5}",
            "class", "precision", "recall", "tp", "fp", "fn"
        )?;
        for (label, counts) in &self.classes {
            writeln!(
                f,
                "{:<14} {:>10} {:>10} {:>5} {:>5} {:>5}",
                label.to_string(),
                pct_or_na(counts.precision()),
                pct_or_na(counts.recall()),
                counts.tp,
                counts.fp,
                counts.fn_,
            )?;
        }
        Ok(())
    }
}

/// Scores predicted label sets against gold label sets, per class.
pub fn score_annotations(predicted: &[LabelSet], gold: &[LabelSet]) -> Result<PrReport> {
    if predicted.len() != gold.len() {
        return Err(Error::Invalid(format!(
            "predicted has {} sentences but gold has {}",
            predicted.len(),
            gold.len()
        )));
    }
    let classes = GenderLabel::ALL
        .into_iter()
        .map(|class| {
            let mut counts = ClassCounts::default();
            for (p, g) in predicted.iter().zip(gold) {
                match (p.contains(&class), g.contains(&class)) {
                    (true, true) => counts.tp += 1,
                    (true, false) => counts.fp += 1,
                    (false, true) => counts.fn_ += 1,
                    (false, false) => {}
                }
            }
            (class, counts)
        })
        .collect();
    Ok(PrReport { classes })
}

/// Which roles carry labels, as percentages over all sentences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependenceStats {
    pub none_pct: f64,
    pub speaker_only_pct: f64,
    pub listener_only_pct: f64,
    pub both_pct: f64,
}

impl fmt::Display for DependenceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<26} {:>10}", "Gender Dependence", "Sentences")?;
        writeln!(f, "{:<26} {:>9.1}%", "None", self.none_pct)?;
        writeln!(f, "{:<26} {:>9.1}%", "Speaker Only", self.speaker_only_pct)?;
        writeln!(f, "{:<26} {:>9.1}%", "Listener Only", self.listener_only_pct)?;
        writeln!(
            f,
            "{:<26} {:>9.1}%",
            "Both Speaker and Listener", self.both_pct
        )?;
        Ok(())
    }
}

/// Categorizes every sentence by which roles are labeled. Errors on an
/// empty corpus (percentages would be undefined).
pub fn dependence_stats(label_sets: &[LabelSet]) -> Result<DependenceStats> {
    if label_sets.is_empty() {
        return Err(Error::Invalid(
            "cannot compute dependence statistics for an empty corpus".to_string(),
        ));
    }
    let mut counts = [0usize; 4]; // none, speaker only, listener only, both
    for labels in label_sets {
        let speaker = labels.iter().any(|l| l.role == Role::Speaker);
        let listener = labels.iter().any(|l| l.role == Role::Listener);
        let idx = match (speaker, listener) {
            (false, false) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (true, true) => 3,
        };
        counts[idx] += 1;
    }
    let total = label_sets.len() as f64;
    let pct = |c: usize| c as f64 / total * 100.0;
    Ok(DependenceStats {
        none_pct: pct(counts[0]),
        speaker_only_pct: pct(counts[1]),
        listener_only_pct: pct(counts[2]),
        both_pct: pct(counts[3]),
    })
}

pub const MAX_NGRAM: usize = 4;

/// Sentence-mode smoothing: +1 on numerator and denominator of the n >= 2
/// precisions. Corpus mode is unsmoothed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    AddOne,
}

/// Corpus-level BLEU breakdown. Score and precisions are in [0, 1];
/// the CLI renders x100 with 2 decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BleuReport {
    pub precisions: [f64; MAX_NGRAM],
    pub brevity_penalty: f64,
    pub score: f64,
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl BleuReport {
    /// Score rendered the conventional way: x100, two decimals.
    pub fn display_score(&self) -> String {
        format!("{:.2}", self.score * 100.0)
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Standard corpus-level BLEU with modified (clipped) n-gram precision,
/// n = 1..4, single reference per candidate.
pub fn corpus_bleu(
    candidates: &[Vec<String>],
    references: &[Vec<String>],
    smoothing: Smoothing,
) -> Result<BleuReport> {
    if candidates.len() != references.len() {
        return Err(Error::Invalid(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::Invalid(
            "cannot score an empty corpus".to_string(),
        ));
    }

    let mut clipped = [0usize; MAX_NGRAM];
    let mut totals = [0usize; MAX_NGRAM];
    let mut candidate_len = 0usize;
    let mut reference_len = 0usize;
    for (cand, reference) in candidates.iter().zip(references) {
        candidate_len += cand.len();
        reference_len += reference.len();
        for n in 1..=MAX_NGRAM {
            let cand_counts = ngram_counts(cand, n);
            let ref_counts = ngram_counts(reference, n);
            for (gram, count) in &cand_counts {
                totals[n - 1] += count;
                clipped[n - 1] += (*count).min(ref_counts.get(gram).copied().unwrap_or(0));
            }
        }
    }

    let mut precisions = [0.0f64; MAX_NGRAM];
    for n in 1..=MAX_NGRAM {
        let (mut num, mut den) = (clipped[n - 1] as f64, totals[n - 1] as f64);
        if smoothing == Smoothing::AddOne && n >= 2 {
            num += 1.0;
            den += 1.0;
        }
        precisions[n - 1] = if den > 0.0 { num / den } else { 0.0 };
    }

    let brevity_penalty = if candidate_len > reference_len {
        1.0
    } else {
        // limit value 0 when the candidate side is empty
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    };
    let score = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let mean_log: f64 = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_NGRAM as f64;
        brevity_penalty * mean_log.exp()
    };

    Ok(BleuReport {
        precisions,
        brevity_penalty,
        score,
        candidate_len,
        reference_len,
    })
}

/// Baseline vs proposed comparison over the trigger routing, shaped like a
/// two-column BLEU table: full test set and the adapted-routed subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub baseline_full: BleuReport,
    pub proposed_full: BleuReport,
    /// None when no sentence was routed to the adapted model.
    pub baseline_subset: Option<BleuReport>,
    pub proposed_subset: Option<BleuReport>,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let subset = |r: &Option<BleuReport>| {
            r.as_ref()
                .map_or("n/a".to_string(), BleuReport::display_score)
        };
        writeln!(
            f,
            "{:<10} {:>14} {:>24}",
            "Model", "Full Test Set", "Gender Labeled Test Set"
        )?;
        writeln!(
            f,
            "{:<10} {:>14} {:>24}",
            "Baseline",
            self.baseline_full.display_score(),
            subset(&self.baseline_subset)
        )?;
        writeln!(
            f,
            "{:<10} {:>14} {:>24}",
            "Proposed",
            self.proposed_full.display_score(),
            subset(&self.proposed_subset)
        )?;
        Ok(())
    }
}

/// Scores the proposed routing (baseline output for Base sentences, adapted
/// output for Adapted ones) against the baseline on the full set and on the
/// Adapted-routed subset.
pub fn compare_systems(
    baseline: &[Vec<String>],
    adapted: &[Vec<String>],
    references: &[Vec<String>],
    routes: &[Decision],
) -> Result<ComparisonReport> {
    let n = references.len();
    if baseline.len() != n || adapted.len() != n || routes.len() != n {
        return Err(Error::Invalid(format!(
            "misaligned inputs: {} baseline, {} adapted, {} references, {} routes",
            baseline.len(),
            adapted.len(),
            n,
            routes.len()
        )));
    }
    let proposed: Vec<Vec<String>> = routes
        .iter()
        .zip(baseline.iter().zip(adapted))
        .map(|(route, (b, a))| match route {
            Decision::Base => b.clone(),
            Decision::Adapted => a.clone(),
        })
        .collect();

    let subset_idx: Vec<usize> = routes
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == Decision::Adapted)
        .map(|(i, _)| i)
        .collect();
    let take = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        subset_idx.iter().map(|&i| rows[i].clone()).collect()
    };

    let baseline_full = corpus_bleu(baseline, references, Smoothing::None)?;
    let proposed_full = corpus_bleu(&proposed, references, Smoothing::None)?;
    let (baseline_subset, proposed_subset) = if subset_idx.is_empty() {
        (None, None)
    } else {
        let sub_refs = take(references);
        (
            Some(corpus_bleu(&take(baseline), &sub_refs, Smoothing::None)?),
            Some(corpus_bleu(&take(adapted), &sub_refs, Smoothing::None)?),
        )
    };
    Ok(ComparisonReport {
        baseline_full,
        proposed_full,
        baseline_subset,
        proposed_subset,
    })
}

/// Whitespace-splits lines into the token lists BLEU consumes.
pub fn tokenize_lines(lines: &[String]) -> Vec<Vec<String>> {
    lines
        .iter()
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Gender, GenderLabel, Role};

    fn label_set(items: &[(Role, Gender)]) -> LabelSet {
        items
            .iter()
            .map(|&(r, g)| GenderLabel::new(r, g))
            .collect()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let gold = vec![
            label_set(&[(Role::Speaker, Gender::Masc)]),
            label_set(&[(Role::Speaker, Gender::Fem)]),
            label_set(&[(Role::Listener, Gender::Masc)]),
            label_set(&[(Role::Listener, Gender::Fem)]),
        ];
        let report = score_annotations(&gold, &gold).unwrap();
        for (_, counts) in &report.classes {
            assert_eq!(counts.precision(), Some(1.0));
            assert_eq!(counts.recall(), Some(1.0));
        }
    }

    #[test]
    fn empty_predictions_give_undefined_precision_zero_recall() {
        let gold: Vec<LabelSet> = (0..5)
            .map(|_| label_set(&[(Role::Speaker, Gender::Masc)]))
            .collect();
        let predicted: Vec<LabelSet> = (0..5).map(|_| LabelSet::new()).collect();
        let report = score_annotations(&predicted, &gold).unwrap();
        let counts = report.counts(GenderLabel::new(Role::Speaker, Gender::Masc));
        assert_eq!(counts.precision(), None);
        assert_eq!(counts.recall(), Some(0.0));
        assert!(report.to_string().contains("n/a"));
    }

    #[test]
    fn hand_counted_mixed_fixture() {
        let sm = (Role::Speaker, Gender::Masc);
        let lf = (Role::Listener, Gender::Fem);
        let gold = vec![
            label_set(&[sm]),
            label_set(&[sm]),
            label_set(&[lf]),
            label_set(&[]),
            label_set(&[sm, lf]),
        ];
        let predicted = vec![
            label_set(&[sm]),   // tp sm
            label_set(&[lf]),   // fn sm, fp lf
            label_set(&[lf]),   // tp lf
            label_set(&[sm]),   // fp sm
            label_set(&[sm]),   // tp sm, fn lf
        ];
        let report = score_annotations(&predicted, &gold).unwrap();
        let sm_counts = report.counts(GenderLabel::new(sm.0, sm.1));
        assert_eq!((sm_counts.tp, sm_counts.fp, sm_counts.fn_), (2, 1, 1));
        let lf_counts = report.counts(GenderLabel::new(lf.0, lf.1));
        assert_eq!((lf_counts.tp, lf_counts.fp, lf_counts.fn_), (1, 1, 1));
        // tp+fn = gold occurrences, tp+fp = predicted occurrences
        assert_eq!(sm_counts.tp + sm_counts.fn_, 3);
        assert_eq!(sm_counts.tp + sm_counts.fp, 3);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(score_annotations(&[LabelSet::new()], &[]).is_err());
    }

    #[test]
    fn all_unlabeled_stats() {
        let sets: Vec<LabelSet> = (0..4).map(|_| LabelSet::new()).collect();
        let stats = dependence_stats(&sets).unwrap();
        assert_eq!(stats.none_pct, 100.0);
        assert_eq!(stats.both_pct, 0.0);
    }

    #[test]
    fn eight_sentence_fixture_stats() {
        let mut sets: Vec<LabelSet> = (0..4).map(|_| LabelSet::new()).collect();
        sets.push(label_set(&[(Role::Speaker, Gender::Masc)]));
        sets.push(label_set(&[(Role::Listener, Gender::Fem)]));
        sets.push(label_set(&[(Role::Listener, Gender::Masc)]));
        sets.push(label_set(&[
            (Role::Speaker, Gender::Fem),
            (Role::Listener, Gender::Masc),
        ]));
        let stats = dependence_stats(&sets).unwrap();
        assert_eq!(stats.none_pct, 50.0);
        assert_eq!(stats.speaker_only_pct, 12.5);
        assert_eq!(stats.listener_only_pct, 25.0);
        assert_eq!(stats.both_pct, 12.5);
        let sum =
            stats.none_pct + stats.speaker_only_pct + stats.listener_only_pct + stats.both_pct;
        assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn empty_corpus_stats_is_an_error() {
        assert!(dependence_stats(&[]).is_err());
    }

    #[test]
    fn identity_corpus_scores_exactly_one() {
        let refs = vec![toks("the cat is on the mat"), toks("hello world")];
        let report = corpus_bleu(&refs, &refs, Smoothing::None).unwrap();
        assert_eq!(report.score, 1.0);
        assert_eq!(report.brevity_penalty, 1.0);
    }

    #[test]
    fn clipped_unigram_precision_fixture() {
        let cand = vec![toks("the the the the the the the")];
        let reference = vec![toks("the cat is on the mat")];
        let report = corpus_bleu(&cand, &reference, Smoothing::None).unwrap();
        assert_eq!(report.precisions[0], 2.0 / 7.0);
        assert_eq!(report.score, 0.0); // no matching bigram
    }

    #[test]
    fn brevity_penalty_applies_to_short_candidates() {
        let cand = vec![toks("the cat is on")];
        let reference = vec![toks("the cat is on the mat")];
        let report = corpus_bleu(&cand, &reference, Smoothing::None).unwrap();
        assert!((report.brevity_penalty - (1.0f64 - 6.0 / 4.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn empty_candidate_contributes_zero_counts() {
        let cands = vec![toks(""), toks("hello world")];
        let refs = vec![toks("something"), toks("hello world")];
        let report = corpus_bleu(&cands, &refs, Smoothing::None).unwrap();
        assert_eq!(report.candidate_len, 2);
        assert_eq!(report.reference_len, 3);
    }

    #[test]
    fn empty_corpus_bleu_is_an_error() {
        assert!(corpus_bleu(&[], &[], Smoothing::None).is_err());
        assert!(corpus_bleu(&[toks("a")], &[], Smoothing::None).is_err());
    }

    #[test]
    fn add_one_smoothing_lifts_higher_order_zeros() {
        let cand = vec![toks("a b")];
        let reference = vec![toks("a c")];
        let unsmoothed = corpus_bleu(&cand, &reference, Smoothing::None).unwrap();
        assert_eq!(unsmoothed.score, 0.0);
        let smoothed = corpus_bleu(&cand, &reference, Smoothing::AddOne).unwrap();
        assert!(smoothed.precisions[1] > 0.0);
    }

    #[test]
    fn identical_systems_report_zero_delta() {
        let refs = vec![toks("a b c"), toks("d e f g")];
        let out = vec![toks("a b c"), toks("d e x g")];
        let routes = vec![Decision::Base, Decision::Adapted];
        let report = compare_systems(&out, &out, &refs, &routes).unwrap();
        assert_eq!(report.baseline_full, report.proposed_full);
        assert_eq!(report.baseline_subset, report.proposed_subset);
    }

    #[test]
    fn all_base_routes_make_proposed_equal_baseline() {
        let refs = vec![toks("a b c d"), toks("e f g h")];
        let baseline = vec![toks("a b c d"), toks("e f x h")];
        let adapted = vec![toks("z z z z"), toks("z z z z")];
        let routes = vec![Decision::Base, Decision::Base];
        let report = compare_systems(&baseline, &adapted, &refs, &routes).unwrap();
        assert_eq!(report.baseline_full.score, report.proposed_full.score);
        assert!(report.baseline_subset.is_none());
    }

    #[test]
    fn subset_scores_equal_manual_partition() {
        let refs = vec![toks("a b c d"), toks("e f g h"), toks("i j k l")];
        let baseline = vec![toks("a b c d"), toks("e f x h"), toks("i j k x")];
        let adapted = vec![toks("a b x d"), toks("e f g h"), toks("i j k l")];
        let routes = vec![Decision::Base, Decision::Adapted, Decision::Adapted];
        let report = compare_systems(&baseline, &adapted, &refs, &routes).unwrap();
        let sub_refs = vec![refs[1].clone(), refs[2].clone()];
        let manual_base =
            corpus_bleu(&[baseline[1].clone(), baseline[2].clone()], &sub_refs, Smoothing::None)
                .unwrap();
        let manual_adapted =
            corpus_bleu(&[adapted[1].clone(), adapted[2].clone()], &sub_refs, Smoothing::None)
                .unwrap();
        assert_eq!(report.baseline_subset.unwrap(), manual_base);
        assert_eq!(report.proposed_subset.unwrap(), manual_adapted);
    }

    #[test]
    fn joint_permutation_leaves_bleu_unchanged() {
        let cands = vec![toks("a b c"), toks("d e"), toks("f g h i")];
        let refs = vec![toks("a b x"), toks("d e"), toks("f g h j")];
        let report = corpus_bleu(&cands, &refs, Smoothing::None).unwrap();
        let perm = [2usize, 0, 1];
        let pc: Vec<_> = perm.iter().map(|&i| cands[i].clone()).collect();
        let pr: Vec<_> = perm.iter().map(|&i| refs[i].clone()).collect();
        let permuted = corpus_bleu(&pc, &pr, Smoothing::None).unwrap();
        assert!((report.score - permuted.score).abs() < 1e-12);
    }
}
