//! Pronunciation lexicons, unigram tables and the three transducers used to
//! generate phonetically confusable sentences: word→phoneme, phoneme edits,
//! and phoneme→word decoding.

mod cmudict;
mod compile;
mod phonemap;
mod unigram;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;
use std::sync::Arc as Shared;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wfst::{Label, SymbolTable, TableRef, WfstError};

pub use cmudict::{load_pron_dict, strip_stress, write_pron_dict, LexiconFragment};
pub use compile::{build_edit_fst, build_phone2word, build_word2phone};
pub use phonemap::{apply_phoneme_map, PhonemeMap};
pub use unigram::{Unigrams, UNIGRAM_FLOOR};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("phoneme {phoneme:?} in word {word:?} has no mapping")]
    UnmappedPhoneme { phoneme: String, word: String },
    #[error("phoneme {0:?} is not in the inventory")]
    UnknownPhoneme(String),
    #[error("fragment has no language")]
    MissingLanguage,
    #[error("invalid cost {0}: must be positive")]
    InvalidCost(f64),
    #[error(transparent)]
    Wfst(#[from] WfstError),
}

/// Language tag of a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lang {
    L1,
    L2,
    Punct,
}

impl Lang {
    pub fn as_str(self) -> &'static str {
        match self {
            Lang::L1 => "l1",
            Lang::L2 => "l2",
            Lang::Punct => "punct",
        }
    }

    /// The other spoken language; `Punct` maps to itself.
    pub fn other(self) -> Lang {
        match self {
            Lang::L1 => Lang::L2,
            Lang::L2 => Lang::L1,
            Lang::Punct => Lang::Punct,
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Lang::L1),
            "l2" => Ok(Lang::L2),
            "punct" => Ok(Lang::Punct),
            other => Err(format!("unknown language tag {other:?}")),
        }
    }
}

/// Words excluded from the decoding transducers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFilter {
    /// Drop single-character words except these.
    pub single_char_keep: Option<BTreeSet<char>>,
    pub words: BTreeSet<String>,
}

impl Default for WordFilter {
    fn default() -> Self {
        WordFilter {
            single_char_keep: Some(['a', 'i', 'y', 'o', 'e', 'u'].into_iter().collect()),
            words: BTreeSet::new(),
        }
    }
}

impl WordFilter {
    pub fn none() -> Self {
        WordFilter {
            single_char_keep: None,
            words: BTreeSet::new(),
        }
    }

    pub fn with_words<I: IntoIterator<Item = S>, S: Into<String>>(mut self, words: I) -> Self {
        self.words.extend(words.into_iter().map(Into::into));
        self
    }

    pub fn is_filtered(&self, word: &str) -> bool {
        if self.words.contains(word) {
            return true;
        }
        if let Some(keep) = &self.single_char_keep {
            let mut chars = word.chars();
            if let (Some(c), None) = (chars.next(), chars.next()) {
                return !keep.contains(&c);
            }
        }
        false
    }
}

/// Confusable phoneme pairs and the edit penalties (in −ln units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarPhonemes {
    pub pairs: Vec<(String, String)>,
    pub sub_cost: f64,
    /// `f64::INFINITY` disables deletions.
    pub del_cost: f64,
}

const SIMILAR_PAIRS: &[(&str, &str)] = &[
    ("OW", "UW"),
    ("AA", "EY"),
    ("L", "M"),
    ("N", "M"),
    ("M", "L"),
    ("B", "P"),
    ("B", "V"),
    ("V", "F"),
    ("T", "D"),
    ("K", "G"),
    ("S", "Z"),
    ("S", "TH"),
    ("Z", "TH"),
    ("SH", "ZH"),
];

pub const DEFAULT_SUB_COST: f64 = 3.0;
pub const DEFAULT_DEL_COST: f64 = 4.0;

impl SimilarPhonemes {
    pub fn new(pairs: Vec<(String, String)>, sub_cost: f64, del_cost: f64) -> Result<Self, LexiconError> {
        if !(sub_cost > 0.0) {
            return Err(LexiconError::InvalidCost(sub_cost));
        }
        if !(del_cost > 0.0) {
            return Err(LexiconError::InvalidCost(del_cost));
        }
        Ok(SimilarPhonemes {
            pairs,
            sub_cost,
            del_cost,
        })
    }

    /// The English/Spanish confusion list over the CMU inventory.
    pub fn cmu_default() -> Self {
        SimilarPhonemes {
            pairs: SIMILAR_PAIRS
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            sub_cost: DEFAULT_SUB_COST,
            del_cost: DEFAULT_DEL_COST,
        }
    }

    /// Reads `SRC<TAB>TGT1 TGT2 ...` lines (any whitespace); each target
    /// forms a pair with the source.
    pub fn read_pairs<R: BufRead>(source: R) -> Result<Vec<(String, String)>, LexiconError> {
        let mut pairs = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() < 2 {
                return Err(LexiconError::Parse {
                    line: i + 1,
                    msg: "expected a phoneme and at least one similar phoneme".into(),
                });
            }
            pairs.extend(f[1..].iter().map(|t| (f[0].to_string(), t.to_string())));
        }
        Ok(pairs)
    }

    /// Ordered substitution pairs: symmetric closure, no self pairs, sorted.
    pub fn ordered_pairs(&self) -> Vec<(String, String)> {
        let mut set = BTreeSet::new();
        for (a, b) in &self.pairs {
            if a != b {
                set.insert((a.clone(), b.clone()));
                set.insert((b.clone(), a.clone()));
            }
        }
        set.into_iter().collect()
    }
}

/// Immutable bilingual pronunciation lexicon with interned phoneme and word
/// tables. Word symbols are `surface/lang`, so decoded outputs carry tags.
#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: BTreeMap<(Lang, String), Vec<Vec<Label>>>,
    phones: TableRef,
    words: TableRef,
    unigrams: BTreeMap<Lang, Unigrams>,
    filter: WordFilter,
}

pub fn word_symbol(surface: &str, lang: Lang) -> String {
    format!("{surface}/{lang}")
}

/// Splits a `surface/lang` word symbol.
pub fn parse_word_symbol(sym: &str) -> Option<(&str, Lang)> {
    let (surface, tag) = sym.rsplit_once('/')?;
    Some((surface, tag.parse().ok()?))
}

#[derive(Default)]
pub struct LexiconBuilder {
    fragments: Vec<LexiconFragment>,
    unigrams: BTreeMap<Lang, Unigrams>,
    filter: WordFilter,
    extra_phones: BTreeSet<String>,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fragment(mut self, frag: LexiconFragment) -> Self {
        self.fragments.push(frag);
        self
    }

    pub fn unigrams(mut self, lang: Lang, u: Unigrams) -> Self {
        self.unigrams.insert(lang, u);
        self
    }

    pub fn filter(mut self, filter: WordFilter) -> Self {
        self.filter = filter;
        self
    }

    /// Adds phonemes to the inventory even if no word uses them.
    pub fn phones<I: IntoIterator<Item = S>, S: Into<String>>(mut self, phones: I) -> Self {
        self.extra_phones.extend(phones.into_iter().map(Into::into));
        self
    }

    pub fn build(self) -> Result<Lexicon, LexiconError> {
        let mut inventory = self.extra_phones;
        let mut merged: BTreeMap<(Lang, String), Vec<Vec<String>>> = BTreeMap::new();
        for frag in self.fragments {
            let lang = frag.language.ok_or(LexiconError::MissingLanguage)?;
            for (word, prons) in frag.entries {
                let slot = merged.entry((lang, word)).or_default();
                for p in prons {
                    inventory.extend(p.iter().cloned());
                    if !slot.contains(&p) {
                        slot.push(p);
                    }
                }
            }
        }
        let phones: SymbolTable = inventory.iter().collect();
        let words: SymbolTable = merged.keys().map(|(l, w)| word_symbol(w, *l)).collect();
        let entries = merged
            .into_iter()
            .map(|(k, prons)| {
                let prons = prons
                    .iter()
                    .map(|p| p.iter().map(|ph| phones.find(ph).expect("interned")).collect())
                    .collect();
                (k, prons)
            })
            .collect();
        Ok(Lexicon {
            entries,
            phones: Shared::new(phones),
            words: Shared::new(words),
            unigrams: self.unigrams,
            filter: self.filter,
        })
    }
}

impl Lexicon {
    pub fn builder() -> LexiconBuilder {
        LexiconBuilder::new()
    }

    pub fn phones(&self) -> &TableRef {
        &self.phones
    }

    pub fn words(&self) -> &TableRef {
        &self.words
    }

    pub fn filter(&self) -> &WordFilter {
        &self.filter
    }

    pub fn pronunciations(&self, word: &str, lang: Lang) -> Option<&[Vec<Label>]> {
        self.entries
            .get(&(lang, word.to_string()))
            .map(Vec::as_slice)
    }

    pub fn contains(&self, word: &str, lang: Lang) -> bool {
        self.entries.contains_key(&(lang, word.to_string()))
    }

    pub fn word_label(&self, word: &str, lang: Lang) -> Option<Label> {
        self.words.find(&word_symbol(word, lang))
    }

    /// `(surface, lang)` for a word label.
    pub fn decode_word(&self, label: Label) -> Option<(&str, Lang)> {
        parse_word_symbol(self.words.symbol(label)?)
    }

    pub fn unigram_prob(&self, word: &str, lang: Lang) -> f64 {
        self.unigrams
            .get(&lang)
            .map_or(UNIGRAM_FLOOR, |u| u.prob(word))
    }

    /// Entries in deterministic `(lang, word)` order.
    pub fn entries(&self) -> impl Iterator<Item = (Lang, &str, &[Vec<Label>])> + '_ {
        self.entries
            .iter()
            .map(|((l, w), p)| (*l, w.as_str(), p.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phone_strings(&self, labels: &[Label]) -> Vec<&str> {
        labels
            .iter()
            .map(|&l| self.phones.symbol(l).unwrap_or("<?>"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_filter_keeps_vowel_words() {
        let f = WordFilter::default();
        for w in ["a", "i", "y", "o", "e", "u"] {
            assert!(!f.is_filtered(w));
        }
        assert!(f.is_filtered("s"));
        assert!(f.is_filtered("x"));
        assert!(!f.is_filtered("cat"));
        assert!(WordFilter::none().with_words(["the"]).is_filtered("the"));
    }

    #[test]
    fn word_symbols_round_trip() {
        assert_eq!(parse_word_symbol(&word_symbol("a/b", Lang::L2)), Some(("a/b", Lang::L2)));
        assert_eq!(parse_word_symbol("cat"), None);
    }

    #[test]
    fn builder_interns_and_merges() {
        let mut en = LexiconFragment::new(Lang::L1);
        en.add("no", vec!["N".into(), "OW".into()]);
        let mut es = LexiconFragment::new(Lang::L2);
        es.add("no", vec!["N".into(), "OW".into()]);
        es.add("si", vec!["S".into(), "IY".into()]);
        let lex = Lexicon::builder().fragment(en).fragment(es).build().unwrap();
        assert_eq!(lex.len(), 3);
        assert!(lex.contains("no", Lang::L1) && lex.contains("no", Lang::L2));
        assert_eq!(lex.phones().len(), 5);
        let l = lex.word_label("si", Lang::L2).unwrap();
        assert_eq!(lex.decode_word(l), Some(("si", Lang::L2)));
        assert_eq!(lex.unigram_prob("si", Lang::L2), UNIGRAM_FLOOR);
    }

    #[test]
    fn similar_pairs_are_symmetric_and_costs_positive() {
        let s = SimilarPhonemes::cmu_default();
        let o = s.ordered_pairs();
        assert!(o.contains(&("B".into(), "V".into())));
        assert!(o.contains(&("V".into(), "B".into())));
        // L-M and M-L are listed both ways; closure removes the duplicate
        assert_eq!(o.iter().filter(|(a, b)| a == "L" && b == "M").count(), 1);
        assert!(SimilarPhonemes::new(vec![], 0.0, 1.0).is_err());
        assert!(SimilarPhonemes::new(vec![], 1.0, -1.0).is_err());
    }
}
