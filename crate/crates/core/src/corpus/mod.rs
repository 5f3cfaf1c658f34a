//! Tagged and monolingual corpora: ingestion, cleaning, seeded splits and the
//! shared vocabulary.

mod clean;
mod vocab;

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::altgen::{GoldSentence, TaggedToken};
use crate::lexicon::Lang;
use crate::seeding::rng_for;

pub use clean::{clean_line, clean_tokens, is_punct_token, strip_parentheses};
pub use vocab::{Vocabulary, BOS, BOS_ID, DROP, DROP_ID, EOS, EOS_ID};

pub const MAX_SENTENCE_TOKENS: usize = 100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    InvalidRatios([f64; 3]),
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

/// Sentences from one source. `lines[i]` is the 0-based source line of
/// `sentences[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedCorpus {
    pub source: String,
    pub split: Option<Split>,
    pub sentences: Vec<GoldSentence>,
    pub lines: Vec<usize>,
}

impl TaggedCorpus {
    pub fn new(source: &str) -> Self {
        TaggedCorpus {
            source: source.to_string(),
            split: None,
            sentences: Vec::new(),
            lines: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn push(&mut self, line: usize, sentence: GoldSentence) {
        if sentence.tokens.len() > MAX_SENTENCE_TOKENS {
            log::warn!(
                "{}:{}: skipping sentence of {} tokens (cap {MAX_SENTENCE_TOKENS})",
                self.source,
                line + 1,
                sentence.tokens.len()
            );
            return;
        }
        self.sentences.push(sentence);
        self.lines.push(line);
    }

    /// `(id, sentence)` pairs; ids are `source:line` with 1-based lines.
    pub fn keyed(&self) -> Vec<(String, GoldSentence)> {
        self.sentences
            .iter()
            .zip(&self.lines)
            .map(|(s, l)| (format!("{}:{}", self.source, l + 1), s.clone()))
            .collect()
    }

    pub fn token_slices(&self) -> impl Iterator<Item = &[TaggedToken]> {
        self.sentences.iter().map(|s| s.tokens.as_slice())
    }

    /// One `surface/lang` sentence per line.
    pub fn to_tagged_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&s.to_line());
            out.push('\n');
        }
        out
    }
}

/// Reads whitespace-separated `surface/lang` tokens, one sentence per line.
/// Empty lines are skipped.
pub fn load_tagged<R: BufRead>(source: &str, reader: R) -> Result<TaggedCorpus, CorpusError> {
    let mut corpus = TaggedCorpus::new(source);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s = GoldSentence::parse(&line).map_err(|msg| CorpusError::Parse { line: i + 1, msg })?;
        corpus.push(i, s);
    }
    Ok(corpus)
}

/// Reads plain text lines, cleans them, and tags every word with `lang`.
/// Tokens made only of punctuation are tagged as punctuation.
pub fn load_monolingual<R: BufRead>(source: &str, reader: R, lang: Lang) -> Result<TaggedCorpus, CorpusError> {
    let mut corpus = TaggedCorpus::new(source);
    for (i, line) in reader.lines().enumerate() {
        let toks = clean_tokens(&line?);
        if toks.is_empty() {
            continue;
        }
        let tagged = toks
            .iter()
            .map(|t| TaggedToken::new(t, if is_punct_token(t) { Lang::Punct } else { lang }))
            .collect();
        corpus.push(i, GoldSentence::new(tagged));
    }
    Ok(corpus)
}

/// Largest-remainder apportionment of `n` items over `ratios`.
pub fn split_counts(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = n - counts.iter().sum::<usize>().min(n);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    [counts[0], counts[1], counts[2]]
}

/// Line indices of each split, for auditing and replay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub source: String,
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitManifest {
    pub fn lines(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }
}

/// Seeded shuffle then cut into train/dev/test. Each part keeps source order.
pub fn split(
    corpus: &TaggedCorpus,
    ratios: [f64; 3],
    seed: u64,
) -> Result<([TaggedCorpus; 3], SplitManifest), CorpusError> {
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidRatios(ratios));
    }
    let counts = split_counts(corpus.len(), ratios);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut rng_for(seed, &format!("split:{}", corpus.source)));
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut at = 0;
    for c in counts {
        let mut idx = order[at..at + c].to_vec();
        idx.sort_unstable();
        parts.push(idx);
        at += c;
    }
    let make = |s: Split, idx: &[usize]| TaggedCorpus {
        source: corpus.source.clone(),
        split: Some(s),
        sentences: idx.iter().map(|&i| corpus.sentences[i].clone()).collect(),
        lines: idx.iter().map(|&i| corpus.lines[i]).collect(),
    };
    let out = [
        make(Split::Train, &parts[0]),
        make(Split::Dev, &parts[1]),
        make(Split::Test, &parts[2]),
    ];
    let manifest = SplitManifest {
        source: corpus.source.clone(),
        seed,
        ratios,
        train: out[0].lines.clone(),
        dev: out[1].lines.clone(),
        test: out[2].lines.clone(),
    };
    Ok((out, manifest))
}

/// Rebuilds a split from its manifest.
pub fn apply_manifest(corpus: &TaggedCorpus, manifest: &SplitManifest, which: Split) -> TaggedCorpus {
    let wanted: std::collections::HashSet<usize> = manifest.lines(which).iter().copied().collect();
    let mut out = TaggedCorpus::new(&corpus.source);
    out.split = Some(which);
    for (s, &l) in corpus.sentences.iter().zip(&corpus.lines) {
        if wanted.contains(&l) {
            out.sentences.push(s.clone());
            out.lines.push(l);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altgen::GoldKind;
    use proptest::prelude::*;

    #[test]
    fn tagged_lines() {
        let text = "no/l2 pero/l2 vino/l2 porque/l2 he/l1 came/l1\n\nHi/l1 ./punct\n";
        let c = load_tagged("bm", text.as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.sentences[0].tokens.len(), 6);
        assert_eq!(c.sentences[0].kind(), GoldKind::Cs);
        assert_eq!(c.sentences[1].tokens[0].surface, "hi");
        assert_eq!(c.lines, [0, 2]);
        match load_tagged("bm", "ok/l1 missing\n".as_bytes()) {
            Err(CorpusError::Parse { line: 1, msg }) => assert!(msg.contains("token 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overlong_sentences_are_skipped() {
        let long = vec!["w/l1"; MAX_SENTENCE_TOKENS + 1].join(" ");
        let text = format!("a/l1\n{long}\nb/l1\n");
        let c = load_tagged("x", text.as_bytes()).unwrap();
        assert_eq!(c.lines, [0, 2]);
    }

    #[test]
    fn monolingual_lines_are_cleaned_and_tagged() {
        let c = load_monolingual("subs", "- (SIGHS) Hello there.\n(MUSIC)\n".as_bytes(), Lang::L1).unwrap();
        assert_eq!(c.len(), 1);
        let toks = &c.sentences[0].tokens;
        assert_eq!(c.sentences[0].surfaces(), ["hello", "there", "."]);
        assert_eq!(toks[0].lang, Lang::L1);
        assert_eq!(toks[2].lang, Lang::Punct);
    }

    fn numbered(n: usize) -> TaggedCorpus {
        let text: String = (0..n).map(|i| format!("w{i}/l1\n")).collect();
        load_tagged("c", text.as_bytes()).unwrap()
    }

    #[test]
    fn ten_sentences_split_six_two_two() {
        let (parts, m) = split(&numbered(10), [0.6, 0.2, 0.2], 4).unwrap();
        assert_eq!(parts.each_ref().map(TaggedCorpus::len), [6, 2, 2]);
        let (again, _) = split(&numbered(10), [0.6, 0.2, 0.2], 4).unwrap();
        assert_eq!(parts, again);
        assert_eq!(apply_manifest(&numbered(10), &m, Split::Dev), parts[1]);
        assert!(split(&numbered(10), [0.5, 0.2, 0.2], 4).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_the_corpus(n in 0usize..60, seed in 0u64..1000, a in 1u32..10, b in 1u32..10, c in 1u32..10) {
            let tot = f64::from(a + b + c);
            let ratios = [f64::from(a) / tot, f64::from(b) / tot, 1.0 - f64::from(a + b) / tot];
            let corpus = numbered(n);
            let (parts, m) = split(&corpus, ratios, seed).unwrap();
            let mut all: Vec<usize> = m.train.iter().chain(&m.dev).chain(&m.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            for (p, r) in parts.iter().zip(ratios) {
                prop_assert!((p.len() as f64 - r * n as f64).abs() < 1.0);
            }
        }
    }
}
