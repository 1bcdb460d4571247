//! Rule-based speaker/listener gender annotation for POS-tagged Arabic
//! sentences, with alignment-gated disambiguation of ambiguous verb forms
//! through the aligned English side.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::corpus_io::AnnotationRecord;
use crate::error::{Error, Result};
use crate::types::{
    Gender, GenderLabel, Lang, LabelSet, Number, ParallelPair, Person, Role, Tag, TaggedSentence,
    TaggedToken, VerbForm,
};

/// Word lists the rules consult. The bundled defaults cover the documented
/// examples; each list can be replaced from a file (one entry per line,
/// `#` comments).
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub doubly_transitive_verbs: HashSet<String>,
    pub incomplete_verbs: HashSet<String>,
    pub call_particles: HashSet<String>,
    pub en_first_person: HashSet<String>,
    pub en_second_person: HashSet<String>,
}

fn set(entries: &[&str]) -> HashSet<String> {
    entries.iter().map(|s| s.to_string()).collect()
}

impl Default for Lexicons {
    fn default() -> Lexicons {
        Lexicons {
            doubly_transitive_verbs: set(&["علم", "ظن", "اعتبر", "وجد", "حسب"]),
            incomplete_verbs: set(&["كان", "أصبح", "صار", "ظل", "بات", "أمسى"]),
            call_particles: set(&["يا", "أيها", "أيتها"]),
            en_first_person: set(&["i"]),
            en_second_person: set(&["you"]),
        }
    }
}

fn load_word_list(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

impl Lexicons {
    pub fn load_doubly_transitive(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.doubly_transitive_verbs = load_word_list(path.as_ref())?;
        Ok(())
    }

    pub fn load_incomplete_verbs(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.incomplete_verbs = load_word_list(path.as_ref())?;
        Ok(())
    }

    pub fn load_call_particles(&mut self, path: impl AsRef<Path>) -> Result<()> {
        self.call_particles = load_word_list(path.as_ref())?;
        Ok(())
    }

    fn is_doubly_transitive(&self, token: &TaggedToken) -> bool {
        token.tag == Tag::Vb && self.doubly_transitive_verbs.contains(token.lemma_or_surface())
    }

    fn is_incomplete_verb(&self, token: &TaggedToken) -> bool {
        token.tag == Tag::Vbi
            || (token.tag == Tag::Vb && self.incomplete_verbs.contains(token.lemma_or_surface()))
    }

    fn is_call_particle(&self, token: &TaggedToken) -> bool {
        token.tag == Tag::CallPart || self.call_particles.contains(token.surface.as_str())
    }
}

/// Identifier of one labelling rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
    R11,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
        RuleId::R11,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", *self as usize + 1)
    }
}

/// One rule application: where it matched, what it concluded, and whether
/// the conclusion still needs confirmation from the English alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule_id: RuleId,
    /// Inclusive token span in the Arabic sentence.
    pub span: (usize, usize),
    pub label: GenderLabel,
    /// True exactly for R10/R11: the label is provisional until the aligned
    /// English phrase confirms the pronoun.
    pub needs_alignment: bool,
    /// Token whose gender feature supplied the label's gender.
    pub gender_source_index: usize,
}

fn is_pron_s(token: &TaggedToken, person: Person) -> bool {
    token.tag == Tag::PronS
        && token.feats.person == Some(person)
        && token.feats.number == Some(Number::Sing)
}

fn is_pron_o(token: &TaggedToken, person: Person) -> bool {
    token.tag == Tag::PronO
        && token.feats.person == Some(person)
        && token.feats.number == Some(Number::Sing)
}

fn has_clitic(token: &TaggedToken, person: Person) -> bool {
    token.feats.clitic_person == Some(person) && token.feats.clitic_number == Some(Number::Sing)
}

fn donor_gender(token: &TaggedToken) -> Option<Gender> {
    token.feats.gender
}

/// A verb form whose subject person is unmarked; these are the ambiguous
/// forms routed through the alignment-gated rules.
fn is_ambiguous_verb(token: &TaggedToken) -> bool {
    matches!(token.tag, Tag::Vb | Tag::Vbi) && token.feats.person.is_none()
}

struct RuleCtx<'a> {
    tokens: &'a [TaggedToken],
    lex: &'a Lexicons,
}

impl<'a> RuleCtx<'a> {
    fn at(&self, idx: usize) -> Option<&'a TaggedToken> {
        self.tokens.get(idx)
    }

    fn try_rule(&self, rule: RuleId, start: usize) -> Option<RuleMatch> {
        let t0 = self.at(start)?;
        match rule {
            // DoublyTransitiveVB + object pronoun (2nd sing) + JJ, or the
            // clitic-on-verb encoding of the same structure.
            RuleId::R1 => self.doubly_transitive(start, t0, Person::Second, Role::Listener, rule),
            RuleId::R2 => {
                if !is_pron_s(t0, Person::Second) {
                    return None;
                }
                let jj = self.at(start + 1)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 1), Role::Listener, start + 1, false)
            }
            RuleId::R3 => {
                if !is_pron_s(t0, Person::Second) {
                    return None;
                }
                let vbi = self.at(start + 1)?;
                if !self.lex.is_incomplete_verb(vbi) {
                    return None;
                }
                let jj = self.at(start + 2)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 2), Role::Listener, start + 2, false)
            }
            // A feminine 2nd person singular verb marks the listener by itself.
            RuleId::R4 => {
                if t0.tag == Tag::Vb
                    && t0.feats.person == Some(Person::Second)
                    && t0.feats.number == Some(Number::Sing)
                    && t0.feats.gender == Some(Gender::Fem)
                {
                    self.emit(rule, (start, start), Role::Listener, start, false)
                } else {
                    None
                }
            }
            RuleId::R5 => {
                if t0.tag == Tag::Vb
                    && t0.feats.verbform == Some(VerbForm::Imperative)
                    && t0.feats.person == Some(Person::Second)
                    && t0.feats.number == Some(Number::Sing)
                {
                    self.emit(rule, (start, start), Role::Listener, start, false)
                } else {
                    None
                }
            }
            RuleId::R6 => {
                if !self.lex.is_call_particle(t0) {
                    return None;
                }
                let head = self.at(start + 1)?;
                if !matches!(head.tag, Tag::Nn | Tag::Jj) {
                    return None;
                }
                self.emit(rule, (start, start + 1), Role::Listener, start + 1, false)
            }
            RuleId::R7 => self.doubly_transitive(start, t0, Person::First, Role::Speaker, rule),
            RuleId::R8 => {
                if !is_pron_s(t0, Person::First) {
                    return None;
                }
                let jj = self.at(start + 1)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 1), Role::Speaker, start + 1, false)
            }
            RuleId::R9 => {
                if !is_pron_s(t0, Person::First) {
                    return None;
                }
                let vbi = self.at(start + 1)?;
                if !self.lex.is_incomplete_verb(vbi) {
                    return None;
                }
                let jj = self.at(start + 2)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 2), Role::Speaker, start + 2, false)
            }
            // Ambiguous verb + JJ, gated on finding "you" in the aligned
            // English phrase; blocked when a 2nd person clitic is attached.
            RuleId::R10 => {
                if !is_ambiguous_verb(t0) || has_clitic(t0, Person::Second) {
                    return None;
                }
                let jj = self.at(start + 1)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 1), Role::Listener, start + 1, true)
            }
            // Ambiguous verb + JJ, gated on finding "I".
            RuleId::R11 => {
                if !is_ambiguous_verb(t0) {
                    return None;
                }
                let jj = self.at(start + 1)?;
                if jj.tag != Tag::Jj {
                    return None;
                }
                self.emit(rule, (start, start + 1), Role::Speaker, start + 1, true)
            }
        }
    }

    fn doubly_transitive(
        &self,
        start: usize,
        verb: &TaggedToken,
        person: Person,
        role: Role,
        rule: RuleId,
    ) -> Option<RuleMatch> {
        if !self.lex.is_doubly_transitive(verb) {
            return None;
        }
        // Separate object-pronoun token encoding first.
        if let Some(pron) = self.at(start + 1) {
            if is_pron_o(pron, person) {
                if let Some(jj) = self.at(start + 2) {
                    if jj.tag == Tag::Jj {
                        return self.emit(rule, (start, start + 2), role, start + 2, false);
                    }
                }
            }
        }
        // Clitic-on-verb encoding.
        if has_clitic(verb, person) {
            if let Some(jj) = self.at(start + 1) {
                if jj.tag == Tag::Jj {
                    return self.emit(rule, (start, start + 1), role, start + 1, false);
                }
            }
        }
        None
    }

    /// Builds the match, abstaining when the donor token carries no gender.
    fn emit(
        &self,
        rule_id: RuleId,
        span: (usize, usize),
        role: Role,
        donor: usize,
        needs_alignment: bool,
    ) -> Option<RuleMatch> {
        let gender = donor_gender(self.at(donor)?)?;
        Some(RuleMatch {
            rule_id,
            span,
            label: GenderLabel::new(role, gender),
            needs_alignment,
            gender_source_index: donor,
        })
    }
}

/// Applies all labelling rules at every position of a tagged Arabic
/// sentence. Matches are reported left-to-right, rule id ascending at equal
/// start position; matching is over contiguous tokens. Conflict resolution
/// between matches happens in [`annotate_pair`], not here.
pub fn match_rules(sentence: &TaggedSentence, lex: &Lexicons) -> Result<Vec<RuleMatch>> {
    if sentence.lang != Lang::Ar {
        return Err(Error::Invalid(format!(
            "gender rules apply to Arabic sentences, got {}",
            sentence.lang
        )));
    }
    let ctx = RuleCtx {
        tokens: &sentence.tokens,
        lex,
    };
    let mut matches = Vec::new();
    for start in 0..sentence.tokens.len() {
        for rule in RuleId::ALL {
            if let Some(m) = ctx.try_rule(rule, start) {
                matches.push(m);
            }
        }
    }
    Ok(matches)
}

/// Confirms or rejects an alignment-gated match by searching the English
/// tokens aligned to the match span for first/second person pronouns
/// (case-insensitive). Returns None (abstain) when neither pronoun is
/// found, or when both are.
pub fn resolve_alignment(
    m: &RuleMatch,
    pair: &ParallelPair,
    lex: &Lexicons,
) -> Result<Option<GenderLabel>> {
    if !m.needs_alignment {
        return Err(Error::Invalid(format!(
            "rule {} does not need alignment resolution",
            m.rule_id
        )));
    }
    if m.span.1 >= pair.tgt.len() {
        return Err(Error::Invalid(format!(
            "match span ({}, {}) out of range for pair {} with {} target tokens",
            m.span.0,
            m.span.1,
            pair.id,
            pair.tgt.len()
        )));
    }
    let mut found_first = false;
    let mut found_second = false;
    for &(i, j) in &pair.links {
        if j < m.span.0 || j > m.span.1 {
            continue;
        }
        let surface = pair.src.tokens[i].surface.to_lowercase();
        if lex.en_first_person.contains(&surface) {
            found_first = true;
        }
        if lex.en_second_person.contains(&surface) {
            found_second = true;
        }
    }
    if found_first == found_second {
        // both or neither: no usable evidence
        return Ok(None);
    }
    let confirmed = match m.rule_id {
        RuleId::R11 => found_first,
        RuleId::R10 => found_second,
        // User-extensible path for future gated rules: confirm on the
        // pronoun matching the match's role.
        _ => match m.label.role {
            Role::Speaker => found_first,
            Role::Listener => found_second,
        },
    };
    Ok(confirmed.then_some(m.label))
}

/// Annotation mode: Arabic-only disables the alignment-gated rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatingMode {
    ArabicOnly,
    AlignmentGated,
}

/// Annotates one pair: runs the rules, resolves gated matches, and collapses
/// to at most one label per role.
///
/// Non-gated labels are authoritative: if non-gated matches for a role
/// disagree on gender the role abstains (gated evidence cannot revive it),
/// and a gated label that contradicts a non-gated one is discarded. Gated
/// labels can only add a label for a role with no non-gated evidence, or
/// confirm an existing one.
pub fn annotate_pair(
    pair: &ParallelPair,
    lex: &Lexicons,
    mode: GatingMode,
) -> Result<(LabelSet, Vec<RuleMatch>)> {
    let matches = match_rules(&pair.tgt, lex)?;

    // (index into matches, confirmed label)
    let mut ungated: Vec<(usize, GenderLabel)> = Vec::new();
    let mut gated: Vec<(usize, GenderLabel)> = Vec::new();
    for (idx, m) in matches.iter().enumerate() {
        if m.needs_alignment {
            if mode == GatingMode::AlignmentGated {
                if let Some(label) = resolve_alignment(m, pair, lex)? {
                    gated.push((idx, label));
                }
            }
        } else {
            ungated.push((idx, m.label));
        }
    }

    let mut labels = LabelSet::new();
    let mut fired_indices: BTreeSet<usize> = BTreeSet::new();
    for role in [Role::Speaker, Role::Listener] {
        let role_ungated: Vec<&(usize, GenderLabel)> =
            ungated.iter().filter(|(_, l)| l.role == role).collect();
        let genders: BTreeSet<Gender> = role_ungated.iter().map(|(_, l)| l.gender).collect();
        match genders.len() {
            0 => {
                // No direct evidence; gated evidence may supply the label.
                let role_gated: Vec<&(usize, GenderLabel)> =
                    gated.iter().filter(|(_, l)| l.role == role).collect();
                let gated_genders: BTreeSet<Gender> =
                    role_gated.iter().map(|(_, l)| l.gender).collect();
                if gated_genders.len() == 1 {
                    let gender = *gated_genders.iter().next().expect("one gender");
                    labels.insert(GenderLabel::new(role, gender));
                    fired_indices.extend(role_gated.iter().map(|(i, _)| *i));
                }
            }
            1 => {
                let gender = *genders.iter().next().expect("one gender");
                let label = GenderLabel::new(role, gender);
                labels.insert(label);
                fired_indices.extend(role_ungated.iter().map(|(i, _)| *i));
                // Gated matches that agree count as contributing evidence.
                fired_indices.extend(
                    gated
                        .iter()
                        .filter(|(_, l)| *l == label)
                        .map(|(i, _)| *i),
                );
            }
            _ => {
                // Conflicting direct evidence: abstain for this role.
            }
        }
    }

    let fired: Vec<RuleMatch> = fired_indices
        .into_iter()
        .map(|i| matches[i].clone())
        .collect();
    Ok((labels, fired))
}

/// Corpus-level annotation summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub total: usize,
    pub labeled: usize,
    pub labeled_fraction: f64,
    pub per_class: BTreeMap<String, usize>,
}

/// Annotates every pair in order and aggregates class counts.
pub fn annotate_corpus(
    pairs: &[ParallelPair],
    lex: &Lexicons,
    mode: GatingMode,
) -> Result<(Vec<AnnotationRecord>, CorpusSummary)> {
    let mut records = Vec::with_capacity(pairs.len());
    let mut per_class: BTreeMap<String, usize> = GenderLabel::ALL
        .iter()
        .map(|l| (l.to_string(), 0))
        .collect();
    let mut labeled = 0usize;
    for pair in pairs {
        let (labels, fired) = annotate_pair(pair, lex, mode)?;
        if !labels.is_empty() {
            labeled += 1;
        }
        for label in &labels {
            *per_class
                .get_mut(&label.to_string())
                .expect("all classes present") += 1;
        }
        let rules: Vec<String> = fired.iter().map(|m| m.rule_id.to_string()).collect();
        records.push(AnnotationRecord::new(pair.id, labels, rules));
    }
    let total = pairs.len();
    let summary = CorpusSummary {
        total,
        labeled,
        labeled_fraction: if total == 0 {
            0.0
        } else {
            labeled as f64 / total as f64
        },
        per_class,
    };
    Ok((records, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Morph;
    use std::collections::BTreeSet as Set;

    fn tok(surface: &str, tag: Tag, feats: &str) -> TaggedToken {
        TaggedToken::new(surface, tag, Morph::parse(feats).unwrap()).unwrap()
    }

    fn ar(tokens: Vec<TaggedToken>) -> TaggedSentence {
        TaggedSentence::new(Lang::Ar, tokens)
    }

    fn pair_with(
        src_text: &str,
        tgt: TaggedSentence,
        links: &[(usize, usize)],
    ) -> ParallelPair {
        ParallelPair::new(
            0,
            TaggedSentence::from_plain(Lang::En, src_text),
            tgt,
            links.iter().copied().collect::<Set<_>>(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn r8_first_person_adjective_marks_male_speaker() {
        let s = ar(vec![
            tok("أنا", Tag::PronS, "person=1|number=sing"),
            tok("متأكد", Tag::Jj, "gender=m"),
        ]);
        let matches = match_rules(&s, &Lexicons::default()).unwrap();
        assert_eq!(matches.len(), 1);
        let m = &matches[0];
        assert_eq!(m.rule_id, RuleId::R8);
        assert_eq!(m.label, GenderLabel::new(Role::Speaker, Gender::Masc));
        assert_eq!(m.gender_source_index, 1);
        assert!(!m.needs_alignment);
    }

    #[test]
    fn r6_calling_particle_marks_male_listener() {
        let s = ar(vec![
            tok("يا", Tag::CallPart, "_"),
            tok("رجل", Tag::Nn, "gender=m"),
        ]);
        let matches = match_rules(&s, &Lexicons::default()).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].rule_id, RuleId::R6);
        assert_eq!(
            matches[0].label,
            GenderLabel::new(Role::Listener, Gender::Masc)
        );
    }

    #[test]
    fn r4_feminine_second_person_verb_marks_female_listener() {
        let s = ar(vec![
            tok("أنت", Tag::PronS, "person=2|number=sing"),
            tok("تلعبين", Tag::Vb, "person=2|number=sing|gender=f"),
        ]);
        let matches = match_rules(&s, &Lexicons::default()).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].rule_id, RuleId::R4);
        assert_eq!(
            matches[0].label,
            GenderLabel::new(Role::Listener, Gender::Fem)
        );
    }

    #[test]
    fn empty_sentence_has_no_matches() {
        let s = ar(vec![]);
        assert!(match_rules(&s, &Lexicons::default()).unwrap().is_empty());
    }

    #[test]
    fn donor_without_gender_abstains() {
        let s = ar(vec![
            tok("أنا", Tag::PronS, "person=1|number=sing"),
            tok("متأكد", Tag::Jj, "_"),
        ]);
        assert!(match_rules(&s, &Lexicons::default()).unwrap().is_empty());
    }

    #[test]
    fn english_sentence_is_rejected() {
        let s = TaggedSentence::from_plain(Lang::En, "hello");
        assert!(match_rules(&s, &Lexicons::default()).is_err());
    }

    #[test]
    fn dtv_clitic_and_separate_pronoun_encodings_both_match() {
        let lex = Lexicons::default();
        // clitic encoding
        let s1 = ar(vec![
            tok("علمتك", Tag::Vb, "lemma=علم|clitic_person=2|clitic_number=sing"),
            tok("مجتهدا", Tag::Jj, "gender=m"),
        ]);
        let m1 = match_rules(&s1, &lex).unwrap();
        assert!(m1.iter().any(|m| m.rule_id == RuleId::R1));
        // separate token encoding
        let s2 = ar(vec![
            tok("ظننت", Tag::Vb, "lemma=ظن|person=1|number=sing"),
            tok("ك", Tag::PronO, "person=2|number=sing"),
            tok("ذكي", Tag::Jj, "gender=m"),
        ]);
        let m2 = match_rules(&s2, &lex).unwrap();
        assert_eq!(m2.len(), 1);
        assert_eq!(m2[0].rule_id, RuleId::R1);
        assert_eq!(m2[0].span, (0, 2));
    }

    fn ambiguous_became_happy(gender: &str) -> TaggedSentence {
        ar(vec![
            tok("أصبحت", Tag::Vb, "_"),
            tok("سعيدا", Tag::Jj, &format!("gender={gender}")),
        ])
    }

    #[test]
    fn ambiguous_verb_fires_both_gated_rules() {
        let matches = match_rules(&ambiguous_became_happy("m"), &Lexicons::default()).unwrap();
        let ids: Vec<RuleId> = matches.iter().map(|m| m.rule_id).collect();
        assert_eq!(ids, vec![RuleId::R10, RuleId::R11]);
        assert!(matches.iter().all(|m| m.needs_alignment));
    }

    #[test]
    fn alignment_confirms_speaker_when_aligned_phrase_has_i() {
        let lex = Lexicons::default();
        let pair = pair_with(
            "I became happy",
            ambiguous_became_happy("m"),
            &[(0, 0), (1, 0), (2, 1)],
        );
        let matches = match_rules(&pair.tgt, &lex).unwrap();
        let r11 = matches.iter().find(|m| m.rule_id == RuleId::R11).unwrap();
        assert_eq!(
            resolve_alignment(r11, &pair, &lex).unwrap(),
            Some(GenderLabel::new(Role::Speaker, Gender::Masc))
        );
        let r10 = matches.iter().find(|m| m.rule_id == RuleId::R10).unwrap();
        assert_eq!(resolve_alignment(r10, &pair, &lex).unwrap(), None);
    }

    #[test]
    fn alignment_with_neither_pronoun_abstains() {
        let lex = Lexicons::default();
        let pair = pair_with(
            "she became happy",
            ambiguous_became_happy("f"),
            &[(0, 0), (1, 0), (2, 1)],
        );
        let matches = match_rules(&pair.tgt, &lex).unwrap();
        for m in matches.iter().filter(|m| m.needs_alignment) {
            assert_eq!(resolve_alignment(m, &pair, &lex).unwrap(), None);
        }
    }

    #[test]
    fn alignment_with_both_pronouns_abstains() {
        let lex = Lexicons::default();
        let pair = pair_with(
            "i think you became strong",
            ambiguous_became_happy("f"),
            &[(0, 0), (2, 0), (3, 0), (4, 1)],
        );
        let matches = match_rules(&pair.tgt, &lex).unwrap();
        for m in matches.iter().filter(|m| m.needs_alignment) {
            assert_eq!(resolve_alignment(m, &pair, &lex).unwrap(), None);
        }
    }

    #[test]
    fn annotate_pair_emits_single_speaker_label() {
        let pair = pair_with(
            "I am certain",
            ar(vec![
                tok("أنا", Tag::PronS, "person=1|number=sing"),
                tok("متأكد", Tag::Jj, "gender=m"),
            ]),
            &[(0, 0), (1, 0), (2, 1)],
        );
        let (labels, fired) =
            annotate_pair(&pair, &Lexicons::default(), GatingMode::AlignmentGated).unwrap();
        assert_eq!(
            labels.into_iter().collect::<Vec<_>>(),
            vec![GenderLabel::new(Role::Speaker, Gender::Masc)]
        );
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].rule_id, RuleId::R8);
    }

    #[test]
    fn agreeing_duplicate_matches_collapse_to_one_label() {
        // R2 (pronoun + JJ) and R4 (feminine 2nd person verb) both say
        // Listener/Fem.
        let pair = pair_with(
            "you are playing happily",
            ar(vec![
                tok("أنت", Tag::PronS, "person=2|number=sing"),
                tok("سعيدة", Tag::Jj, "gender=f"),
                tok("تلعبين", Tag::Vb, "person=2|number=sing|gender=f"),
            ]),
            &[(0, 0)],
        );
        let (labels, fired) =
            annotate_pair(&pair, &Lexicons::default(), GatingMode::AlignmentGated).unwrap();
        assert_eq!(labels.len(), 1);
        assert!(labels.contains(&GenderLabel::new(Role::Listener, Gender::Fem)));
        let ids: Set<RuleId> = fired.iter().map(|m| m.rule_id).collect();
        assert!(ids.contains(&RuleId::R2) && ids.contains(&RuleId::R4));
    }

    #[test]
    fn conflicting_listener_genders_abstain() {
        // R4 says Listener/Fem, R6 says Listener/Masc.
        let pair = pair_with(
            "you said it man",
            ar(vec![
                tok("قلتيه", Tag::Vb, "person=2|number=sing|gender=f"),
                tok("يا", Tag::CallPart, "_"),
                tok("رجل", Tag::Nn, "gender=m"),
            ]),
            &[(0, 0), (1, 0), (2, 0), (3, 2)],
        );
        let (labels, fired) =
            annotate_pair(&pair, &Lexicons::default(), GatingMode::AlignmentGated).unwrap();
        assert!(labels.is_empty());
        assert!(fired.is_empty());
    }

    #[test]
    fn arabic_only_mode_skips_gated_rules() {
        let pair = pair_with(
            "I became happy",
            ambiguous_became_happy("m"),
            &[(0, 0), (1, 0), (2, 1)],
        );
        let lex = Lexicons::default();
        let (labels, _) = annotate_pair(&pair, &lex, GatingMode::ArabicOnly).unwrap();
        assert!(labels.is_empty());
        let (labels, fired) = annotate_pair(&pair, &lex, GatingMode::AlignmentGated).unwrap();
        assert_eq!(labels.len(), 1);
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].rule_id, RuleId::R11);
    }

    #[test]
    fn corpus_summary_counts_and_fraction() {
        let lex = Lexicons::default();
        let labeled = pair_with(
            "I am certain",
            ar(vec![
                tok("أنا", Tag::PronS, "person=1|number=sing"),
                tok("متأكد", Tag::Jj, "gender=m"),
            ]),
            &[],
        );
        let mut unlabeled = pair_with("hello", ar(vec![tok("مرحبا", Tag::Other, "_")]), &[]);
        unlabeled.id = 1;
        let (records, summary) =
            annotate_corpus(&[labeled, unlabeled], &lex, GatingMode::AlignmentGated).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].rules, vec!["R8".to_string()]);
        assert!(records[1].labels.is_empty());
        assert_eq!(summary.labeled, 1);
        assert_eq!(summary.labeled_fraction, 0.5);
        assert_eq!(summary.per_class["speaker/m"], 1);
        assert_eq!(summary.per_class["listener/f"], 0);
    }

    #[test]
    fn match_order_is_left_to_right_then_rule_ascending() {
        let s = ar(vec![
            tok("أنا", Tag::PronS, "person=1|number=sing"),
            tok("سعيد", Tag::Jj, "gender=m"),
            tok("يا", Tag::CallPart, "_"),
            tok("رجل", Tag::Nn, "gender=m"),
        ]);
        let matches = match_rules(&s, &Lexicons::default()).unwrap();
        let starts: Vec<usize> = matches.iter().map(|m| m.span.0).collect();
        let mut sorted = starts.clone();
        sorted.sort();
        assert_eq!(starts, sorted);
    }
}
