use std::collections::BTreeMap;
use std::io::BufRead;

use super::LexiconError;

/// Probability assigned to dictionary words missing from the unigram table.
pub const UNIGRAM_FLOOR: f64 = 1e-9;

/// Word → unigram probability for one language.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Unigrams {
    probs: BTreeMap<String, f64>,
}

impl Unigrams {
    /// Normalizes raw non-negative counts (or probabilities) into a distribution.
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut raw: BTreeMap<String, f64> = BTreeMap::new();
        for (w, c) in counts {
            *raw.entry(w.as_ref().to_lowercase()).or_default() += c;
        }
        let total: f64 = raw.values().sum();
        let probs = if total > 0.0 {
            raw.into_iter()
                .filter(|(_, c)| *c > 0.0)
                .map(|(w, c)| (w, c / total))
                .collect()
        } else {
            BTreeMap::new()
        };
        Unigrams { probs }
    }

    /// Reads `word<TAB>value` lines. Values that already sum to ~1 are taken
    /// as probabilities, anything else as counts; both end up normalized.
    pub fn read<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut rows = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut f = line.split_whitespace();
            let (Some(w), Some(v), None) = (f.next(), f.next(), f.next()) else {
                return Err(LexiconError::Parse {
                    line: i + 1,
                    msg: "expected word<TAB>value".into(),
                });
            };
            let v: f64 = v.parse().map_err(|_| LexiconError::Parse {
                line: i + 1,
                msg: format!("bad value {v:?}"),
            })?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(LexiconError::Parse {
                    line: i + 1,
                    msg: format!("value {v} must be finite and non-negative"),
                });
            }
            rows.push((w.to_string(), v));
        }
        let sum: f64 = rows.iter().map(|(_, v)| v).sum();
        if (sum - 1.0).abs() < 1e-3 {
            log::debug!("unigram file read as probabilities");
        } else {
            log::debug!("unigram file read as counts (total {sum})");
        }
        Ok(Self::from_counts(rows))
    }

    /// Probability of `word`, or [`UNIGRAM_FLOOR`] when absent.
    pub fn prob(&self, word: &str) -> f64 {
        self.probs.get(word).copied().unwrap_or(UNIGRAM_FLOOR)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.probs.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Entries sorted by word, for deterministic serialization.
    pub fn sorted(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.probs.iter().map(|(w, &p)| (w.as_str(), p)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}
