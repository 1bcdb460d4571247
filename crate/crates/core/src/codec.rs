//! Gender side-constraint tokens: inject them at the end of English source
//! sentences, strip them back out, and build NMT-ready training files.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus_io::AnnotationRecord;
use crate::error::{Error, Result};
use crate::types::{Gender, GenderLabel, LabelSet, ParallelPair, Role};

/// The four side-constraint token spellings. Tokens are plain
/// whitespace-delimited words so any downstream tokenizer treats each as a
/// single vocabulary entry. Placement is fixed at the sentence end, speaker
/// token before listener token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderTokenScheme {
    pub speaker_m: String,
    pub speaker_f: String,
    pub listener_m: String,
    pub listener_f: String,
}

impl Default for GenderTokenScheme {
    fn default() -> GenderTokenScheme {
        GenderTokenScheme {
            speaker_m: "<SPKR_M>".to_string(),
            speaker_f: "<SPKR_F>".to_string(),
            listener_m: "<LSTR_M>".to_string(),
            listener_f: "<LSTR_F>".to_string(),
        }
    }
}

impl GenderTokenScheme {
    /// Checks that the four spellings are pairwise distinct and contain no
    /// whitespace.
    pub fn validate(&self) -> Result<()> {
        let tokens = [
            &self.speaker_m,
            &self.speaker_f,
            &self.listener_m,
            &self.listener_f,
        ];
        for token in tokens {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!(
                    "gender token `{token}` must be non-empty and whitespace-free"
                )));
            }
        }
        let distinct: BTreeSet<&String> = tokens.into_iter().collect();
        if distinct.len() != 4 {
            return Err(Error::Invalid(
                "the four gender token spellings must be pairwise distinct".to_string(),
            ));
        }
        Ok(())
    }

    pub fn token_for(&self, label: GenderLabel) -> &str {
        match (label.role, label.gender) {
            (Role::Speaker, Gender::Masc) => &self.speaker_m,
            (Role::Speaker, Gender::Fem) => &self.speaker_f,
            (Role::Listener, Gender::Masc) => &self.listener_m,
            (Role::Listener, Gender::Fem) => &self.listener_f,
        }
    }

    pub fn label_for(&self, token: &str) -> Option<GenderLabel> {
        GenderLabel::ALL
            .into_iter()
            .find(|&l| self.token_for(l) == token)
    }
}

fn check_at_most_one_per_role(labels: &LabelSet) -> Result<()> {
    for role in [Role::Speaker, Role::Listener] {
        let count = labels.iter().filter(|l| l.role == role).count();
        if count > 1 {
            return Err(Error::Invalid(format!(
                "a sentence can carry at most one {role} gender label, got {count}"
            )));
        }
    }
    Ok(())
}

/// Appends the side-constraint tokens for `labels` to the end of the
/// sentence, speaker before listener; no labels leaves the text unchanged.
pub fn inject(sentence: &str, labels: &LabelSet, scheme: &GenderTokenScheme) -> Result<String> {
    check_at_most_one_per_role(labels)?;
    if labels.is_empty() {
        return Ok(sentence.to_string());
    }
    // LabelSet ordering is speaker-before-listener already.
    let tokens: Vec<&str> = labels.iter().map(|&l| scheme.token_for(l)).collect();
    if sentence.is_empty() {
        Ok(tokens.join(" "))
    } else {
        Ok(format!("{sentence} {}", tokens.join(" ")))
    }
}

/// Removes any trailing run of scheme tokens and returns the remaining text
/// plus the parsed labels. Scheme tokens in non-trailing position are left
/// untouched. Two trailing tokens for the same role are an error.
pub fn strip(sentence: &str, scheme: &GenderTokenScheme) -> Result<(String, LabelSet)> {
    let mut labels = LabelSet::new();
    let mut end = sentence.len();
    loop {
        let trimmed = sentence[..end].trim_end();
        let Some(word_start) = trimmed.rfind(char::is_whitespace).map(|i| {
            i + trimmed[i..].chars().next().expect("char at index").len_utf8()
        }) else {
            // Single-word remainder: it may itself be a scheme token.
            if let Some(label) = scheme.label_for(trimmed) {
                if !trimmed.is_empty() {
                    if labels.iter().any(|l| l.role == label.role) {
                        return Err(Error::Invalid(format!(
                            "duplicate trailing {} gender token",
                            label.role
                        )));
                    }
                    labels.insert(label);
                    return Ok((String::new(), labels));
                }
            }
            return Ok((trimmed.to_string(), labels));
        };
        let last_word = &trimmed[word_start..];
        match scheme.label_for(last_word) {
            Some(label) => {
                if labels.iter().any(|l| l.role == label.role) {
                    return Err(Error::Invalid(format!(
                        "duplicate trailing {} gender token",
                        label.role
                    )));
                }
                labels.insert(label);
                end = word_start;
            }
            None => return Ok((trimmed.to_string(), labels)),
        }
    }
}

/// Which pairs end up in the emitted training files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingMode {
    /// Every pair; labels are injected where present.
    All,
    /// Only pairs that carry at least one gender label.
    LabeledOnly,
}

/// Builds line-aligned NMT training text: injected English source lines and
/// plain Arabic target lines. `annotations` must align with `pairs` by id.
pub fn build_training_set(
    pairs: &[ParallelPair],
    annotations: &[AnnotationRecord],
    mode: TrainingMode,
    scheme: &GenderTokenScheme,
) -> Result<(Vec<String>, Vec<String>)> {
    scheme.validate()?;
    if pairs.len() != annotations.len() {
        return Err(Error::Invalid(format!(
            "{} pairs but {} annotation records",
            pairs.len(),
            annotations.len()
        )));
    }
    let mut src_lines = Vec::new();
    let mut tgt_lines = Vec::new();
    for (pair, record) in pairs.iter().zip(annotations) {
        if pair.id != record.id {
            return Err(Error::Invalid(format!(
                "annotation id {} does not match pair id {}",
                record.id, pair.id
            )));
        }
        let labels = record.label_set();
        if mode == TrainingMode::LabeledOnly && labels.is_empty() {
            continue;
        }
        src_lines.push(inject(&pair.src.text(), &labels, scheme)?);
        tgt_lines.push(pair.tgt.text());
    }
    Ok((src_lines, tgt_lines))
}
