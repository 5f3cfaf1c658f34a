use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::altgen::TaggedToken;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const DROP: &str = "<drop>";
pub const BOS_ID: u32 = 0;
pub const EOS_ID: u32 = 1;
pub const DROP_ID: u32 = 2;
const RESERVED: [&str; 3] = [BOS, EOS, DROP];

/// Word types shared by both languages. Ids are contiguous from 0: the three
/// reserved symbols, then trainable and untrained tokens in sorted order.
/// There is no unknown-word symbol.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    trainable: Vec<bool>,
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    tokens: Vec<String>,
    trainable: Vec<bool>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        Vocabulary::from_parts(r.tokens, r.trainable)
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            tokens: v.tokens,
            trainable: v.trainable,
        }
    }
}

impl Vocabulary {
    fn from_parts(tokens: Vec<String>, trainable: Vec<bool>) -> Self {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary {
            tokens,
            trainable,
            index,
        }
    }

    /// `trained` tokens are trainable; tokens only in `untrained` are present
    /// but frozen.
    pub fn build<'a, I, J>(trained: I, untrained: J) -> Self
    where
        I: IntoIterator<Item = &'a str>,
        J: IntoIterator<Item = &'a str>,
    {
        let trained: BTreeSet<&str> = trained.into_iter().filter(|t| !RESERVED.contains(t)).collect();
        let all: BTreeSet<&str> = untrained
            .into_iter()
            .filter(|t| !RESERVED.contains(t))
            .chain(trained.iter().copied())
            .collect();
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut trainable = vec![true; RESERVED.len()];
        for t in all {
            tokens.push(t.to_string());
            trainable.push(trained.contains(t));
        }
        Vocabulary::from_parts(tokens, trainable)
    }

    /// Vocabulary from sentences: `train` sentences are trainable, `other`
    /// sentences (dev, test, alternatives) only contribute frozen entries.
    pub fn from_sentences<'a, I, J>(train: I, other: J) -> Self
    where
        I: IntoIterator<Item = &'a [TaggedToken]>,
        J: IntoIterator<Item = &'a [TaggedToken]>,
    {
        Vocabulary::build(
            train.into_iter().flatten().map(|t| t.surface.as_str()),
            other.into_iter().flatten().map(|t| t.surface.as_str()),
        )
    }

    /// Appends `extra` tokens not already present, frozen, after the existing
    /// ids. Existing ids are unchanged.
    pub fn extended<'a, I: IntoIterator<Item = &'a str>>(&self, extra: I) -> Self {
        let new: BTreeSet<&str> = extra.into_iter().filter(|t| !self.index.contains_key(*t)).collect();
        let mut tokens = self.tokens.clone();
        let mut trainable = self.trainable.clone();
        for t in new {
            tokens.push(t.to_string());
            trainable.push(false);
        }
        Vocabulary::from_parts(tokens, trainable)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn is_trainable(&self, id: u32) -> bool {
        self.trainable.get(id as usize).copied().unwrap_or(false)
    }

    pub fn trainable_mask(&self) -> &[bool] {
        &self.trainable
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn trainable_count(&self) -> usize {
        self.trainable.iter().filter(|&&t| t).count()
    }

    /// Token ids of a sentence, without sentinels.
    pub fn encode(&self, tokens: &[TaggedToken]) -> Result<Vec<u32>, CorpusError> {
        tokens
            .iter()
            .map(|t| {
                self.id(&t.surface)
                    .ok_or_else(|| CorpusError::UnknownToken(t.surface.clone()))
            })
            .collect()
    }

    /// True when `other` starts with exactly this vocabulary's tokens.
    pub fn is_prefix_of(&self, other: &Vocabulary) -> bool {
        other.tokens.len() >= self.tokens.len() && other.tokens[..self.tokens.len()] == self.tokens[..]
    }
}
