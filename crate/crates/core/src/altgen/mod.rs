//! Alternative-sentence generation: phonemize a gold sentence, allow small
//! phoneme edits, decode back into words, rescore, filter, and assemble
//! evaluation sets.

mod dataset;
mod generate;
mod span;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{Lang, LexiconError};
use crate::wfst::WfstError;

pub use dataset::{
    assemble_dataset, build_pool, read_dataset, write_dataset, DatasetStats, PoolSummary, SplitTarget,
};
pub use generate::{heuristic_score, phonemize, Generator};
pub use span::{sample_span, span_bounds};

#[derive(Debug, Error)]
pub enum AltgenError {
    #[error("token {token:?} ({lang}) is not in the lexicon")]
    Oov { token: String, lang: Lang },
    #[error("insufficient pool: need {cs_needed} cs-gold and {mono_needed} mono-gold sets, have {cs_available} and {mono_available}")]
    InsufficientPool {
        cs_needed: usize,
        mono_needed: usize,
        cs_available: usize,
        mono_available: usize,
    },
    #[error("dataset line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Wfst(#[from] WfstError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaggedToken {
    #[serde(rename = "w")]
    pub surface: String,
    pub lang: Lang,
}

impl TaggedToken {
    pub fn new(surface: &str, lang: Lang) -> Self {
        TaggedToken {
            surface: surface.to_lowercase(),
            lang,
        }
    }

    pub fn is_word(&self) -> bool {
        self.lang != Lang::Punct
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.surface, self.lang)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldKind {
    Cs,
    MonoL1,
    MonoL2,
}

impl GoldKind {
    pub fn is_cs(self) -> bool {
        self == GoldKind::Cs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldSentence {
    pub tokens: Vec<TaggedToken>,
}

impl GoldSentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Self {
        GoldSentence { tokens }
    }

    /// Parses whitespace-separated `surface/lang` tokens.
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut tokens = Vec::new();
        for (i, tok) in line.split_whitespace().enumerate() {
            let (surface, tag) = tok
                .rsplit_once('/')
                .ok_or_else(|| format!("token {} ({tok:?}) has no language tag", i + 1))?;
            if surface.is_empty() {
                return Err(format!("token {} ({tok:?}) has an empty surface", i + 1));
            }
            let lang: Lang = tag.parse().map_err(|e| format!("token {}: {e}", i + 1))?;
            tokens.push(TaggedToken::new(surface, lang));
        }
        Ok(GoldSentence { tokens })
    }

    pub fn kind(&self) -> GoldKind {
        let has = |l| self.tokens.iter().any(|t| t.lang == l);
        match (has(Lang::L1), has(Lang::L2)) {
            (true, true) => GoldKind::Cs,
            (false, true) => GoldKind::MonoL2,
            _ => GoldKind::MonoL1,
        }
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word()).count()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Non-punctuation surfaces, the unit of WER.
    pub fn words(&self) -> Vec<&str> {
        words_of(&self.tokens)
    }

    /// Language with fewer words in this sentence (L2 on a tie).
    pub fn minority_lang(&self) -> Lang {
        let count = |l| self.tokens.iter().filter(|t| t.lang == l).count();
        if count(Lang::L1) < count(Lang::L2) {
            Lang::L1
        } else {
            Lang::L2
        }
    }

    pub fn to_line(&self) -> String {
        self.tokens
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn words_of(tokens: &[TaggedToken]) -> Vec<&str> {
    tokens
        .iter()
        .filter(|t| t.is_word())
        .map(|t| t.surface.as_str())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AltType {
    Cs,
    L1,
    L2,
}

impl AltType {
    pub const ALL: [AltType; 3] = [AltType::Cs, AltType::L1, AltType::L2];

    /// Languages the decoder may emit for this type.
    pub fn languages(self) -> &'static [Lang] {
        match self {
            AltType::Cs => &[Lang::L1, Lang::L2],
            AltType::L1 => &[Lang::L1],
            AltType::L2 => &[Lang::L2],
        }
    }
}

impl fmt::Display for AltType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AltType::Cs => "cs",
            AltType::L1 => "l1",
            AltType::L2 => "l2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    pub tokens: Vec<TaggedToken>,
    #[serde(skip, default = "default_alt_type")]
    pub alt_type: AltType,
    #[serde(rename = "cost")]
    pub gen_cost: f64,
    #[serde(rename = "score")]
    pub heur_score: f64,
}

fn default_alt_type() -> AltType {
    AltType::Cs
}

impl Alternative {
    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }
}

/// Heuristic weights and generation limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub nbest: usize,
    pub keep: usize,
    pub min_alternatives: usize,
    pub min_gold_words: usize,
    pub sub_cost: f64,
    pub del_cost: f64,
    pub unigram_scale: f64,
    pub w_cost: f64,
    pub w_minority: f64,
    pub w_length: f64,
    pub max_expansions: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            nbest: 1000,
            keep: 10,
            min_alternatives: 5,
            min_gold_words: 3,
            sub_cost: crate::lexicon::DEFAULT_SUB_COST,
            del_cost: crate::lexicon::DEFAULT_DEL_COST,
            unigram_scale: 0.1,
            w_cost: 1.0,
            w_minority: 2.0,
            w_length: 0.5,
            max_expansions: crate::wfst::DEFAULT_MAX_EXPANSIONS,
        }
    }
}

/// Why a gold sentence did not yield an evaluation set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rejection {
    TooShort { words: usize },
    Oov { token: String },
    TooFewAlternatives { alt_type: AltType, count: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::TooShort { words } => write!(f, "gold has only {words} words"),
            Rejection::Oov { token } => write!(f, "out-of-vocabulary token {token:?}"),
            Rejection::TooFewAlternatives { alt_type, count } => {
                write!(f, "only {count} {alt_type} alternatives")
            }
        }
    }
}

/// A gold sentence with its typed alternatives.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub id: String,
    pub gold: GoldSentence,
    pub alternatives: BTreeMap<AltType, Vec<Alternative>>,
}

impl EvalSet {
    pub fn gold_kind(&self) -> GoldKind {
        self.gold.kind()
    }

    pub fn alternative_count(&self) -> usize {
        self.alternatives.values().map(Vec::len).sum()
    }

    /// Every alternative, in cs, l1, l2 order.
    pub fn all_alternatives(&self) -> impl Iterator<Item = &Alternative> {
        AltType::ALL
            .iter()
            .filter_map(|t| self.alternatives.get(t))
            .flatten()
    }

    /// Gold first, then alternatives; the order used for scoring.
    pub fn sentences(&self) -> Vec<&[TaggedToken]> {
        std::iter::once(self.gold.tokens.as_slice())
            .chain(self.all_alternatives().map(|a| a.tokens.as_slice()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tagged_lines_and_kinds() {
        let g = GoldSentence::parse("no/l2 pero/l2 vino/l2 porque/l2 he/l1 came/l1").unwrap();
        assert_eq!(g.tokens.len(), 6);
        assert_eq!(g.kind(), GoldKind::Cs);
        assert_eq!(g.minority_lang(), Lang::L1);
        let g = GoldSentence::parse("Hello/l1 ./punct").unwrap();
        assert_eq!(g.kind(), GoldKind::MonoL1);
        assert_eq!(g.word_count(), 1);
        assert_eq!(g.tokens[0].surface, "hello");
        assert!(GoldSentence::parse("hello").is_err());
        assert!(GoldSentence::parse("hello/xx").is_err());
    }
}
