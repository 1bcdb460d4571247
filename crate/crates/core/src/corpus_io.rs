//! Readers and writers for every corpus artifact: line-aligned parallel
//! text, Pharaoh alignment files, CoNLL-style tagged files, and JSON Lines
//! annotation records.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{GenderLabel, Lang, Morph, ParallelPair, Tag, TaggedSentence, TaggedToken};

/// One JSON Lines annotation record. Field order is the wire order;
/// labels are kept sorted (speaker before listener, masc before fem).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: usize,
    pub labels: Vec<GenderLabel>,
    pub rules: Vec<String>,
}

impl AnnotationRecord {
    pub fn new(id: usize, labels: BTreeSet<GenderLabel>, rules: Vec<String>) -> AnnotationRecord {
        AnnotationRecord {
            id,
            labels: labels.into_iter().collect(),
            rules,
        }
    }

    pub fn label_set(&self) -> BTreeSet<GenderLabel> {
        self.labels.iter().copied().collect()
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<String> = text.split('\n').map(str::to_string).collect();
    // A trailing newline does not introduce a final empty sentence.
    if lines.last().is_some_and(String::is_empty) {
        lines.pop();
    }
    Ok(lines)
}

fn check_line_counts(a_path: &Path, a: usize, b_path: &Path, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LineCountMismatch {
            left_path: a_path.display().to_string(),
            left: a,
            right_path: b_path.display().to_string(),
            right: b,
        });
    }
    Ok(())
}

/// Parses one Pharaoh line (`0-0 1-2 ...`, 0-based) into a link set.
fn parse_pharaoh_line(path: &Path, line_no: usize, line: &str) -> Result<BTreeSet<(usize, usize)>> {
    let mut links = BTreeSet::new();
    for token in line.split_whitespace() {
        let link = token.split_once('-').and_then(|(i, j)| {
            let i = i.parse::<usize>().ok()?;
            let j = j.parse::<usize>().ok()?;
            Some((i, j))
        });
        match link {
            Some(pair) => {
                links.insert(pair);
            }
            None => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("malformed alignment link `{token}` (expected digits-digits)"),
                ))
            }
        }
    }
    Ok(links)
}

fn read_scores(path: &Path) -> Result<Vec<f64>> {
    read_lines(path)?
        .iter()
        .enumerate()
        .map(|(idx, line)| {
            line.trim().parse::<f64>().map_err(|_| {
                Error::parse(path, idx + 1, format!("malformed alignment score `{line}`"))
            })
        })
        .collect()
}

fn assemble_pairs(
    src: Vec<TaggedSentence>,
    tgt: Vec<TaggedSentence>,
    align_path: &Path,
    align_lines: &[String],
    scores: Option<Vec<f64>>,
) -> Result<Vec<ParallelPair>> {
    let mut pairs = Vec::with_capacity(src.len());
    for (id, (src_sent, tgt_sent)) in src.into_iter().zip(tgt).enumerate() {
        let line_no = id + 1;
        let links = parse_pharaoh_line(align_path, line_no, &align_lines[id])?;
        for &(i, j) in &links {
            if i >= src_sent.len() || j >= tgt_sent.len() {
                return Err(Error::parse(
                    align_path,
                    line_no,
                    format!(
                        "link {i}-{j} out of range ({} source tokens, {} target tokens)",
                        src_sent.len(),
                        tgt_sent.len()
                    ),
                ));
            }
        }
        let score = scores.as_ref().map_or(1.0, |s| s[id]);
        pairs.push(ParallelPair::new(id, src_sent, tgt_sent, links, score)?);
    }
    Ok(pairs)
}

/// Reads a plain-text parallel corpus with a Pharaoh alignment file and an
/// optional per-line score file. Tokens get tag `OTHER` and empty features;
/// a missing score file defaults every score to 1.0.
pub fn read_parallel_corpus(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
    align_path: impl AsRef<Path>,
    score_path: Option<&Path>,
) -> Result<Vec<ParallelPair>> {
    let (src_path, tgt_path, align_path) =
        (src_path.as_ref(), tgt_path.as_ref(), align_path.as_ref());
    let src_lines = read_lines(src_path)?;
    let tgt_lines = read_lines(tgt_path)?;
    let align_lines = read_lines(align_path)?;
    check_line_counts(src_path, src_lines.len(), tgt_path, tgt_lines.len())?;
    check_line_counts(src_path, src_lines.len(), align_path, align_lines.len())?;
    let scores = score_path
        .map(|p| -> Result<Vec<f64>> {
            let s = read_scores(p)?;
            check_line_counts(src_path, src_lines.len(), p, s.len())?;
            Ok(s)
        })
        .transpose()?;

    let src = src_lines
        .iter()
        .map(|l| TaggedSentence::from_plain(Lang::En, l))
        .collect();
    let tgt = tgt_lines
        .iter()
        .map(|l| TaggedSentence::from_plain(Lang::Ar, l))
        .collect();
    assemble_pairs(src, tgt, align_path, &align_lines, scores)
}

/// Like [`read_parallel_corpus`] but the target side comes from a
/// CoNLL-style tagged file, so rule matching has real tags to work with.
pub fn read_parallel_corpus_tagged_tgt(
    src_path: impl AsRef<Path>,
    tgt_tags_path: impl AsRef<Path>,
    align_path: impl AsRef<Path>,
    score_path: Option<&Path>,
) -> Result<Vec<ParallelPair>> {
    let (src_path, tgt_tags_path, align_path) = (
        src_path.as_ref(),
        tgt_tags_path.as_ref(),
        align_path.as_ref(),
    );
    let src_lines = read_lines(src_path)?;
    let align_lines = read_lines(align_path)?;
    let tgt = read_tagged_corpus(tgt_tags_path, Lang::Ar)?;
    check_line_counts(src_path, src_lines.len(), tgt_tags_path, tgt.len())?;
    check_line_counts(src_path, src_lines.len(), align_path, align_lines.len())?;
    let scores = score_path
        .map(|p| -> Result<Vec<f64>> {
            let s = read_scores(p)?;
            check_line_counts(src_path, src_lines.len(), p, s.len())?;
            Ok(s)
        })
        .transpose()?;

    let src = src_lines
        .iter()
        .map(|l| TaggedSentence::from_plain(Lang::En, l))
        .collect();
    assemble_pairs(src, tgt, align_path, &align_lines, scores)
}

/// Reads a CoNLL-style tagged corpus: one token per line as
/// `index<TAB>surface<TAB>tag<TAB>feats`, blank line between sentences.
/// Indices within each sentence must run 0,1,2,...
pub fn read_tagged_corpus(path: impl AsRef<Path>, lang: Lang) -> Result<Vec<TaggedSentence>> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut sentences = Vec::new();
    let mut current: Vec<TaggedToken> = Vec::new();
    let mut open = false; // saw at least one token line since the last blank

    for (idx, line) in lines.iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            if open {
                sentences.push(TaggedSentence::new(lang, std::mem::take(&mut current)));
                open = false;
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("malformed index `{}`", fields[0])))?;
        if index != current.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("non-consecutive token index {index} (expected {})", current.len()),
            ));
        }
        let tag: Tag = fields[2]
            .parse()
            .map_err(|e: String| Error::parse(path, line_no, e))?;
        let feats = Morph::parse(fields[3]).map_err(|e| Error::parse(path, line_no, e))?;
        let token =
            TaggedToken::new(fields[1], tag, feats).map_err(|e| Error::parse(path, line_no, e))?;
        current.push(token);
        open = true;
    }
    if open {
        sentences.push(TaggedSentence::new(lang, current));
    }
    Ok(sentences)
}

/// Serializes annotation records to JSON Lines. Output is byte-identical
/// across runs for identical input: fixed key order, labels sorted
/// speaker-before-listener then masc-before-fem.
pub fn annotations_to_string(records: &[AnnotationRecord]) -> Result<String> {
    let mut out = String::new();
    for record in records {
        let mut sorted = record.clone();
        sorted.labels.sort();
        let line = serde_json::to_string(&sorted)
            .map_err(|e| Error::Internal(format!("annotation serialization failed: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_annotations(records: &[AnnotationRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, annotations_to_string(records)?).map_err(|e| Error::io(path, e))
}

/// Reads a JSON Lines annotation file written by [`write_annotations`].
pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotationRecord>> {
    let path = path.as_ref();
    read_lines(path)?
        .iter()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::parse(path, idx + 1, format!("malformed annotation record: {e}")))
        })
        .collect()
}
