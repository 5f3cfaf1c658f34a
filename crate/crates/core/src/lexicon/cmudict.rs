//! CMU Pronouncing Dictionary text format.
//!
//! ```text
//! ;;; comment
//! READ  R IY1 D
//! READ(2)  R EH1 D
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use super::{Lang, LexiconError};

/// Pronunciations for one language, keyed by lower-cased word. Phonemes are
/// kept as strings until a [`super::Lexicon`] interns them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LexiconFragment {
    pub language: Option<Lang>,
    pub entries: BTreeMap<String, Vec<Vec<String>>>,
}

impl LexiconFragment {
    pub fn new(language: Lang) -> Self {
        LexiconFragment {
            language: Some(language),
            entries: BTreeMap::new(),
        }
    }

    /// Adds a pronunciation, ignoring exact duplicates.
    pub fn add(&mut self, word: &str, pron: Vec<String>) {
        let prons = self.entries.entry(word.to_string()).or_default();
        if !prons.contains(&pron) {
            prons.push(pron);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pronunciation_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }
}

/// Strips a trailing `(N)` variant marker.
fn strip_variant(head: &str) -> &str {
    if let Some(body) = head.strip_suffix(')') {
        if let Some(open) = body.rfind('(') {
            let digits = &body[open + 1..];
            if open > 0 && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                return &body[..open];
            }
        }
    }
    head
}

/// Removes stress digits (`AE1` -> `AE`).
pub fn strip_stress(phoneme: &str) -> &str {
    phoneme.trim_end_matches(|c: char| c.is_ascii_digit())
}

pub fn load_pron_dict<R: BufRead>(source: R, language: Lang) -> Result<LexiconFragment, LexiconError> {
    let mut frag = LexiconFragment::new(language);
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with(";;;") {
            continue;
        }
        let mut fields = line.split_whitespace();
        let head = fields.next().unwrap_or_default();
        let mut pron = Vec::new();
        for ph in fields {
            let bare = strip_stress(ph);
            if bare.is_empty() {
                return Err(LexiconError::Parse {
                    line: lineno,
                    msg: format!("phoneme {ph:?} has no symbol after removing stress"),
                });
            }
            pron.push(bare.to_string());
        }
        if pron.is_empty() {
            return Err(LexiconError::Parse {
                line: lineno,
                msg: format!("entry {head:?} has no phonemes"),
            });
        }
        let word = strip_variant(head).to_lowercase();
        frag.add(&word, pron);
    }
    Ok(frag)
}

/// Serializes in the same format `load_pron_dict` reads (lower-case words,
/// variants numbered from 2).
pub fn write_pron_dict(frag: &LexiconFragment) -> String {
    let mut out = String::new();
    for (word, prons) in &frag.entries {
        for (k, pron) in prons.iter().enumerate() {
            if k == 0 {
                let _ = write!(out, "{word}");
            } else {
                let _ = write!(out, "{word}({})", k + 1);
            }
            let _ = writeln!(out, "  {}", pron.join(" "));
        }
    }
    out
}
