//! Domain types shared by every stage of the pipeline: tagged tokens and
//! sentences, aligned sentence pairs, and the four gender label classes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Language of a tagged sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lang {
    En,
    Ar,
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lang::En => write!(f, "EN"),
            Lang::Ar => write!(f, "AR"),
        }
    }
}

/// Coarse tag alphabet. Closed: anything outside it is a parse error in
/// tagged input, and plain-text tokens fall back to `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Jj,
    Vb,
    Vbi,
    Nn,
    PronS,
    PronO,
    CallPart,
    Rb,
    Vbg,
    Vbp,
    Md,
    Prp,
    Other,
}

impl Tag {
    pub const ALL: [Tag; 13] = [
        Tag::Jj,
        Tag::Vb,
        Tag::Vbi,
        Tag::Nn,
        Tag::PronS,
        Tag::PronO,
        Tag::CallPart,
        Tag::Rb,
        Tag::Vbg,
        Tag::Vbp,
        Tag::Md,
        Tag::Prp,
        Tag::Other,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Tag::Jj => "JJ",
            Tag::Vb => "VB",
            Tag::Vbi => "VBI",
            Tag::Nn => "NN",
            Tag::PronS => "PRON_S",
            Tag::PronO => "PRON_O",
            Tag::CallPart => "CALL_PART",
            Tag::Rb => "RB",
            Tag::Vbg => "VBG",
            Tag::Vbp => "VBP",
            Tag::Md => "MD",
            Tag::Prp => "PRP",
            Tag::Other => "OTHER",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.symbol() == s)
            .ok_or_else(|| format!("unknown tag symbol `{s}`"))
    }
}

/// Grammatical gender, also the gender half of a [`GenderLabel`].
/// Masculine orders before feminine (annotation output ordering).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum Gender {
    #[serde(rename = "m")]
    Masc,
    #[serde(rename = "f")]
    Fem,
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gender::Masc => write!(f, "m"),
            Gender::Fem => write!(f, "f"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Person {
    First,
    Second,
    Third,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Number {
    Sing,
    Dual,
    Plur,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerbForm {
    Perf,
    Imperf,
    Imperative,
}

/// Morphological feature bundle attached to a token. Every field is optional;
/// parsing rejects unknown keys and out-of-set values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Morph {
    pub gender: Option<Gender>,
    pub person: Option<Person>,
    pub number: Option<Number>,
    pub verbform: Option<VerbForm>,
    pub clitic_person: Option<Person>,
    pub clitic_number: Option<Number>,
    pub lemma: Option<String>,
}

fn parse_gender(v: &str) -> std::result::Result<Gender, String> {
    match v {
        "m" => Ok(Gender::Masc),
        "f" => Ok(Gender::Fem),
        _ => Err(format!("unknown feature value `{v}` for gender")),
    }
}

fn parse_person(key: &str, v: &str) -> std::result::Result<Person, String> {
    match v {
        "1" => Ok(Person::First),
        "2" => Ok(Person::Second),
        "3" => Ok(Person::Third),
        _ => Err(format!("unknown feature value `{v}` for {key}")),
    }
}

fn parse_number(key: &str, v: &str) -> std::result::Result<Number, String> {
    match v {
        "sing" => Ok(Number::Sing),
        "dual" => Ok(Number::Dual),
        "plur" => Ok(Number::Plur),
        _ => Err(format!("unknown feature value `{v}` for {key}")),
    }
}

fn parse_verbform(v: &str) -> std::result::Result<VerbForm, String> {
    match v {
        "perf" => Ok(VerbForm::Perf),
        "imperf" => Ok(VerbForm::Imperf),
        "imperative" => Ok(VerbForm::Imperative),
        _ => Err(format!("unknown feature value `{v}` for verbform")),
    }
}

impl Morph {
    /// Parses a `key=value|key=value` feature string; `_` means no features.
    pub fn parse(feats: &str) -> std::result::Result<Morph, String> {
        let mut m = Morph::default();
        if feats == "_" || feats.is_empty() {
            return Ok(m);
        }
        for part in feats.split('|') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("malformed feature `{part}` (expected key=value)"))?;
            match key {
                "gender" => m.gender = Some(parse_gender(value)?),
                "person" => m.person = Some(parse_person(key, value)?),
                "number" => m.number = Some(parse_number(key, value)?),
                "verbform" => m.verbform = Some(parse_verbform(value)?),
                "clitic_person" => m.clitic_person = Some(parse_person(key, value)?),
                "clitic_number" => m.clitic_number = Some(parse_number(key, value)?),
                "lemma" => m.lemma = Some(value.to_string()),
                _ => return Err(format!("unknown feature key `{key}`")),
            }
        }
        Ok(m)
    }
}

/// One surface token plus its coarse tag and morphological features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: Tag,
    pub feats: Morph,
}

impl TaggedToken {
    /// Fails if the surface is empty or contains whitespace.
    pub fn new(
        surface: impl Into<String>,
        tag: Tag,
        feats: Morph,
    ) -> std::result::Result<TaggedToken, String> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err("token surface must be non-empty".to_string());
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(format!("token surface `{surface}` contains whitespace"));
        }
        Ok(TaggedToken { surface, tag, feats })
    }

    /// Plain-text token: tag `OTHER`, no features.
    pub fn plain(surface: impl Into<String>) -> std::result::Result<TaggedToken, String> {
        TaggedToken::new(surface, Tag::Other, Morph::default())
    }

    /// Lemma when present, otherwise the surface form.
    pub fn lemma_or_surface(&self) -> &str {
        self.feats.lemma.as_deref().unwrap_or(&self.surface)
    }
}

/// An ordered, possibly empty token sequence in one language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub lang: Lang,
    pub tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn new(lang: Lang, tokens: Vec<TaggedToken>) -> TaggedSentence {
        TaggedSentence { lang, tokens }
    }

    /// Whitespace-splits a plain text line into `OTHER`-tagged tokens.
    pub fn from_plain(lang: Lang, line: &str) -> TaggedSentence {
        let tokens = line
            .split_whitespace()
            .map(|w| TaggedToken::plain(w).expect("whitespace-split token is non-empty"))
            .collect();
        TaggedSentence { lang, tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Surfaces joined with single spaces.
    pub fn text(&self) -> String {
        let parts: Vec<&str> = self.tokens.iter().map(|t| t.surface.as_str()).collect();
        parts.join(" ")
    }
}

/// An aligned sentence pair with Pharaoh links and an alignment score.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelPair {
    pub id: usize,
    pub src: TaggedSentence,
    pub tgt: TaggedSentence,
    pub links: BTreeSet<(usize, usize)>,
    pub align_score: f64,
}

impl ParallelPair {
    /// Validates that every link index is in range for both sides.
    pub fn new(
        id: usize,
        src: TaggedSentence,
        tgt: TaggedSentence,
        links: BTreeSet<(usize, usize)>,
        align_score: f64,
    ) -> Result<ParallelPair> {
        for &(i, j) in &links {
            if i >= src.len() || j >= tgt.len() {
                return Err(Error::Invalid(format!(
                    "link {i}-{j} out of range for pair {id} ({} source tokens, {} target tokens)",
                    src.len(),
                    tgt.len()
                )));
            }
        }
        Ok(ParallelPair {
            id,
            src,
            tgt,
            links,
            align_score,
        })
    }
}

/// Whose gender a label describes. Speaker orders before listener
/// (annotation output ordering).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Speaker,
    Listener,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Speaker => write!(f, "speaker"),
            Role::Listener => write!(f, "listener"),
        }
    }
}

/// One of the four annotation classes: (speaker|listener) x (masc|fem).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct GenderLabel {
    pub role: Role,
    pub gender: Gender,
}

impl GenderLabel {
    pub const ALL: [GenderLabel; 4] = [
        GenderLabel { role: Role::Speaker, gender: Gender::Masc },
        GenderLabel { role: Role::Speaker, gender: Gender::Fem },
        GenderLabel { role: Role::Listener, gender: Gender::Masc },
        GenderLabel { role: Role::Listener, gender: Gender::Fem },
    ];

    pub fn new(role: Role, gender: Gender) -> GenderLabel {
        GenderLabel { role, gender }
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.role, self.gender)
    }
}

/// A set of labels with at most one entry per role.
pub type LabelSet = BTreeSet<GenderLabel>;
