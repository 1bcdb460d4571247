//! English trigger patterns that decide whether a sentence is gender
//! sensitive, routing it to the adapted translation model instead of the
//! base one.
//!
//! Pattern grammar (one pattern per line, `#` comments):
//!
//! ```text
//! pattern  := "^"? element+
//! element  := quoted-literal        e.g. "I am"   (case-insensitive surfaces)
//!           | TAG                   one token with that tag
//!           | TAG*                  zero or more tokens with that tag
//!           | TAG+                  one or more tokens with that tag
//!           | [TAG TAG ...]         one token with any of the listed tags
//! ```
//!
//! `^` anchors the pattern to the sentence start. A multi-word literal
//! matches that many consecutive tokens.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Lang, Tag, TaggedSentence};

/// One element of a trigger pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matcher {
    /// Consecutive surface literals, compared lowercased.
    Literal(Vec<String>),
    /// One token whose tag is in the set.
    TagAlt(Vec<Tag>),
    /// Zero or more tokens with the tag.
    Star(Tag),
    /// One or more tokens with the tag.
    Plus(Tag),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerPattern {
    pub id: String,
    pub anchored: bool,
    pub elements: Vec<Matcher>,
}

impl TriggerPattern {
    fn new(id: &str, anchored: bool, elements: Vec<Matcher>) -> TriggerPattern {
        TriggerPattern {
            id: id.to_string(),
            anchored,
            elements,
        }
    }
}

fn lit(words: &str) -> Matcher {
    Matcher::Literal(words.split_whitespace().map(|w| w.to_lowercase()).collect())
}

/// The built-in trigger table:
/// T1 `"I am" RB* JJ`, T2 `"you are" [JJ VBG]`, T3 `^VB`,
/// T4 `"you" VBP`, T5 `"you" JJ`.
pub fn builtin_patterns() -> Vec<TriggerPattern> {
    vec![
        TriggerPattern::new(
            "T1",
            false,
            vec![lit("I am"), Matcher::Star(Tag::Rb), Matcher::TagAlt(vec![Tag::Jj])],
        ),
        TriggerPattern::new(
            "T2",
            false,
            vec![lit("you are"), Matcher::TagAlt(vec![Tag::Jj, Tag::Vbg])],
        ),
        TriggerPattern::new("T3", true, vec![Matcher::TagAlt(vec![Tag::Vb])]),
        TriggerPattern::new("T4", false, vec![lit("you"), Matcher::TagAlt(vec![Tag::Vbp])]),
        TriggerPattern::new("T5", false, vec![lit("you"), Matcher::TagAlt(vec![Tag::Jj])]),
    ]
}

fn parse_tag(s: &str, path: &Path, line_no: usize) -> Result<Tag> {
    s.parse::<Tag>()
        .map_err(|e| Error::parse(path, line_no, e))
}

fn parse_pattern_line(line: &str, id: String, path: &Path, line_no: usize) -> Result<TriggerPattern> {
    let mut rest = line.trim();
    let anchored = rest.starts_with('^');
    if anchored {
        rest = rest[1..].trim_start();
    }
    let mut elements = Vec::new();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('"') {
            let end = after.find('"').ok_or_else(|| {
                Error::parse(path, line_no, "unterminated quoted literal".to_string())
            })?;
            let words: Vec<String> = after[..end]
                .split_whitespace()
                .map(|w| w.to_lowercase())
                .collect();
            if words.is_empty() {
                return Err(Error::parse(path, line_no, "empty quoted literal".to_string()));
            }
            elements.push(Matcher::Literal(words));
            rest = after[end + 1..].trim_start();
        } else if let Some(after) = rest.strip_prefix('[') {
            let end = after.find(']').ok_or_else(|| {
                Error::parse(path, line_no, "unterminated tag alternation".to_string())
            })?;
            let tags: Vec<Tag> = after[..end]
                .split_whitespace()
                .map(|t| parse_tag(t, path, line_no))
                .collect::<Result<_>>()?;
            if tags.is_empty() {
                return Err(Error::parse(path, line_no, "empty tag alternation".to_string()));
            }
            elements.push(Matcher::TagAlt(tags));
            rest = after[end + 1..].trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let word = &rest[..end];
            let element = if let Some(tag) = word.strip_suffix('*') {
                Matcher::Star(parse_tag(tag, path, line_no)?)
            } else if let Some(tag) = word.strip_suffix('+') {
                Matcher::Plus(parse_tag(tag, path, line_no)?)
            } else {
                Matcher::TagAlt(vec![parse_tag(word, path, line_no)?])
            };
            elements.push(element);
            rest = rest[end..].trim_start();
        }
    }
    if elements.is_empty() {
        return Err(Error::parse(path, line_no, "empty pattern".to_string()));
    }
    if elements.iter().all(|e| matches!(e, Matcher::Star(_))) {
        return Err(Error::parse(
            path,
            line_no,
            "pattern would match the empty token sequence".to_string(),
        ));
    }
    Ok(TriggerPattern { id, anchored, elements })
}

/// Parses a user pattern file; patterns are named T1, T2, ... in file order
/// and replace the built-in table.
pub fn parse_pattern_file(path: impl AsRef<Path>) -> Result<Vec<TriggerPattern>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut patterns = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let id = format!("T{}", patterns.len() + 1);
        patterns.push(parse_pattern_line(trimmed, id, path, idx + 1)?);
    }
    if patterns.is_empty() {
        return Err(Error::Invalid(format!(
            "pattern file {} contains no patterns",
            path.display()
        )));
    }
    Ok(patterns)
}

/// Compiled trigger table.
#[derive(Debug, Clone)]
pub struct TriggerEngine {
    patterns: Vec<TriggerPattern>,
}

impl Default for TriggerEngine {
    fn default() -> TriggerEngine {
        TriggerEngine::new(builtin_patterns())
    }
}

/// Routing decision for one sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Base,
    Adapted,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Base => write!(f, "base"),
            Decision::Adapted => write!(f, "adapted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub decision: Decision,
    /// Fired pattern ids, deduplicated, in pattern-table order.
    pub matched: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RouteCounts {
    pub base: usize,
    pub adapted: usize,
}

/// Matches pattern elements starting at token `pos`; returns the exclusive
/// end of the match. Star/plus elements try the longest run first, so the
/// reported span reflects maximal-munch repetition.
fn match_elements(sentence: &TaggedSentence, elements: &[Matcher], pos: usize) -> Option<usize> {
    let Some((first, rest)) = elements.split_first() else {
        return Some(pos);
    };
    let tokens = &sentence.tokens;
    match first {
        Matcher::Literal(words) => {
            if pos + words.len() > tokens.len() {
                return None;
            }
            for (word, token) in words.iter().zip(&tokens[pos..]) {
                if token.surface.to_lowercase() != *word {
                    return None;
                }
            }
            match_elements(sentence, rest, pos + words.len())
        }
        Matcher::TagAlt(tags) => {
            let token = tokens.get(pos)?;
            if tags.contains(&token.tag) {
                match_elements(sentence, rest, pos + 1)
            } else {
                None
            }
        }
        Matcher::Star(tag) => {
            let run = tokens[pos..].iter().take_while(|t| t.tag == *tag).count();
            (0..=run)
                .rev()
                .find_map(|take| match_elements(sentence, rest, pos + take))
        }
        Matcher::Plus(tag) => {
            let run = tokens[pos..].iter().take_while(|t| t.tag == *tag).count();
            (1..=run)
                .rev()
                .find_map(|take| match_elements(sentence, rest, pos + take))
        }
    }
}

impl TriggerEngine {
    pub fn new(patterns: Vec<TriggerPattern>) -> TriggerEngine {
        TriggerEngine { patterns }
    }

    pub fn patterns(&self) -> &[TriggerPattern] {
        &self.patterns
    }

    /// Every pattern match at every start position (anchored patterns only
    /// at position 0). Spans are inclusive token index ranges.
    pub fn match_triggers(
        &self,
        sentence: &TaggedSentence,
    ) -> Result<Vec<(String, (usize, usize))>> {
        if sentence.lang != Lang::En {
            return Err(Error::Invalid(format!(
                "trigger patterns apply to English sentences, got {}",
                sentence.lang
            )));
        }
        let mut matches = Vec::new();
        for start in 0..sentence.tokens.len() {
            for pattern in &self.patterns {
                if pattern.anchored && start != 0 {
                    continue;
                }
                if let Some(end) = match_elements(sentence, &pattern.elements, start) {
                    if end > start {
                        matches.push((pattern.id.clone(), (start, end - 1)));
                    }
                }
            }
        }
        Ok(matches)
    }

    /// Adapted iff at least one trigger matches.
    pub fn route(&self, sentence: &TaggedSentence) -> Result<Route> {
        let matches = self.match_triggers(sentence)?;
        let mut matched: Vec<String> = Vec::new();
        for pattern in &self.patterns {
            if matches.iter().any(|(id, _)| id == &pattern.id) {
                matched.push(pattern.id.clone());
            }
        }
        let decision = if matched.is_empty() {
            Decision::Base
        } else {
            Decision::Adapted
        };
        Ok(Route { decision, matched })
    }

    pub fn route_corpus(&self, sentences: &[TaggedSentence]) -> Result<(Vec<Route>, RouteCounts)> {
        let mut routes = Vec::with_capacity(sentences.len());
        let mut counts = RouteCounts::default();
        for sentence in sentences {
            let route = self.route(sentence)?;
            match route.decision {
                Decision::Base => counts.base += 1,
                Decision::Adapted => counts.adapted += 1,
            }
            routes.push(route);
        }
        Ok((routes, counts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Morph, TaggedToken};

    fn en(tagged: &[(&str, Tag)]) -> TaggedSentence {
        let tokens = tagged
            .iter()
            .map(|(s, t)| TaggedToken::new(*s, *t, Morph::default()).unwrap())
            .collect();
        TaggedSentence::new(Lang::En, tokens)
    }

    #[test]
    fn t1_matches_i_am_adjective() {
        let engine = TriggerEngine::default();
        let s = en(&[("I", Tag::Prp), ("am", Tag::Vbp), ("sure", Tag::Jj)]);
        let matches = engine.match_triggers(&s).unwrap();
        assert!(matches.contains(&("T1".to_string(), (0, 2))));
    }

    #[test]
    fn t1_consumes_adverb_run() {
        let engine = TriggerEngine::default();
        let s = en(&[
            ("I", Tag::Prp),
            ("am", Tag::Vbp),
            ("very", Tag::Rb),
            ("sure", Tag::Jj),
        ]);
        let matches = engine.match_triggers(&s).unwrap();
        assert!(matches.contains(&("T1".to_string(), (0, 3))));
    }

    #[test]
    fn t3_matches_sentence_initial_verb_only() {
        let engine = TriggerEngine::default();
        let s = en(&[("Go", Tag::Vb), ("home", Tag::Nn)]);
        let matches = engine.match_triggers(&s).unwrap();
        assert_eq!(matches, vec![("T3".to_string(), (0, 0))]);

        let mid = en(&[("she", Tag::Prp), ("smiled", Tag::Vb)]);
        assert!(engine.match_triggers(&mid).unwrap().is_empty());
    }

    #[test]
    fn t4_matches_you_plus_present_verb() {
        let engine = TriggerEngine::default();
        let s = en(&[("you", Tag::Prp), ("play", Tag::Vbp)]);
        let matches = engine.match_triggers(&s).unwrap();
        assert_eq!(matches, vec![("T4".to_string(), (0, 1))]);
    }

    #[test]
    fn no_trigger_tokens_no_match() {
        let engine = TriggerEngine::default();
        let s = en(&[
            ("The", Tag::Other),
            ("weather", Tag::Nn),
            ("is", Tag::Other),
            ("nice", Tag::Jj),
        ]);
        assert!(engine.match_triggers(&s).unwrap().is_empty());
        assert_eq!(engine.route(&s).unwrap().decision, Decision::Base);
    }

    #[test]
    fn literals_are_case_insensitive() {
        let engine = TriggerEngine::default();
        let upper = en(&[("You", Tag::Prp), ("play", Tag::Vbp)]);
        let lower = en(&[("you", Tag::Prp), ("play", Tag::Vbp)]);
        assert_eq!(
            engine.match_triggers(&upper).unwrap(),
            engine.match_triggers(&lower).unwrap()
        );
    }

    #[test]
    fn route_lists_fired_patterns_ascending_dedup() {
        let engine = TriggerEngine::default();
        // "you play ; you happy" fires T4 then T5 at different positions.
        let s = en(&[
            ("you", Tag::Prp),
            ("play", Tag::Vbp),
            ("you", Tag::Prp),
            ("happy", Tag::Jj),
        ]);
        let route = engine.route(&s).unwrap();
        assert_eq!(route.decision, Decision::Adapted);
        assert_eq!(route.matched, vec!["T4".to_string(), "T5".to_string()]);
    }

    #[test]
    fn empty_sentence_routes_base() {
        let engine = TriggerEngine::default();
        let route = engine.route(&en(&[])).unwrap();
        assert_eq!(route.decision, Decision::Base);
        assert!(route.matched.is_empty());
    }

    #[test]
    fn arabic_sentence_is_rejected() {
        let engine = TriggerEngine::default();
        let s = TaggedSentence::from_plain(Lang::Ar, "مرحبا");
        assert!(engine.match_triggers(&s).is_err());
    }

    #[test]
    fn appending_tokens_preserves_existing_matches() {
        let engine = TriggerEngine::default();
        let mut s = en(&[("I", Tag::Prp), ("am", Tag::Vbp), ("sure", Tag::Jj)]);
        let before = engine.match_triggers(&s).unwrap();
        s.tokens
            .push(TaggedToken::new("today", Tag::Rb, Morph::default()).unwrap());
        let after = engine.match_triggers(&s).unwrap();
        for m in &before {
            assert!(after.contains(m), "match {m:?} lost after append");
        }
    }

    #[test]
    fn pattern_file_round_trip() {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# modal rule").unwrap();
        writeln!(f, "\"you\" MD+ VB").unwrap();
        writeln!(f, "^VB").unwrap();
        let patterns = parse_pattern_file(f.path()).unwrap();
        assert_eq!(patterns.len(), 2);
        assert_eq!(patterns[0].id, "T1");
        assert_eq!(
            patterns[0].elements,
            vec![
                Matcher::Literal(vec!["you".to_string()]),
                Matcher::Plus(Tag::Md),
                Matcher::TagAlt(vec![Tag::Vb]),
            ]
        );
        assert!(patterns[1].anchored);

        let engine = TriggerEngine::new(patterns);
        let s = en(&[("you", Tag::Prp), ("should", Tag::Md), ("go", Tag::Vb)]);
        assert_eq!(engine.route(&s).unwrap().decision, Decision::Adapted);
    }

    #[test]
    fn builtin_table_parses_from_its_own_notation() {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            "\"I am\" RB* JJ\n\"you are\" [JJ VBG]\n^VB\n\"you\" VBP\n\"you\" JJ\n"
        )
        .unwrap();
        assert_eq!(parse_pattern_file(f.path()).unwrap(), builtin_patterns());
    }

    #[test]
    fn star_only_pattern_is_rejected() {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "RB*").unwrap();
        assert!(parse_pattern_file(f.path()).is_err());
    }
}
