//! A small two-language world for demos and end-to-end tests.
//!
//! L1 words are spelled with `p t k s m`, L2 words with `b d g z n`; every
//! letter is its own phoneme. Each language has a sparse bigram grammar, and
//! code-switched sentences change language once, mid-sentence.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::altgen::{AltgenError, GenerationConfig, Generator, GoldKind, GoldSentence, TaggedToken};
use crate::corpus::TaggedCorpus;
use crate::lexicon::{write_pron_dict, Lang, Lexicon, LexiconError, LexiconFragment, SimilarPhonemes, Unigrams, WordFilter};
use crate::seeding::rng_for;

pub const L1_PHONES: [&str; 5] = ["P", "T", "K", "S", "M"];
pub const L2_PHONES: [&str; 5] = ["B", "D", "G", "Z", "N"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub words_per_lang: usize,
    pub successors: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub cs_fraction: f64,
    pub period_prob: f64,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            words_per_lang: 50,
            successors: 3,
            min_len: 4,
            max_len: 8,
            cs_fraction: 0.4,
            period_prob: 0.5,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct ToyLanguage {
    lang: Lang,
    words: Vec<String>,
    zipf: Vec<f64>,
    next: Vec<Vec<usize>>,
}

impl ToyLanguage {
    fn new<R: Rng + ?Sized>(lang: Lang, phones: &[&str; 5], cfg: &ToyConfig, rng: &mut R) -> Self {
        let mut all: Vec<String> = Vec::new();
        for a in phones {
            for b in phones {
                for c in phones {
                    all.push(format!("{a}{b}{c}").to_lowercase());
                }
            }
        }
        all.shuffle(rng);
        all.truncate(cfg.words_per_lang.min(all.len()));
        all.sort();
        let mut ranks: Vec<usize> = (0..all.len()).collect();
        ranks.shuffle(rng);
        let zipf = ranks.iter().map(|&r| 1.0 / (r + 1) as f64).collect();
        let next = (0..all.len())
            .map(|_| {
                let mut s: Vec<usize> = (0..all.len()).collect();
                s.shuffle(rng);
                s.truncate(cfg.successors.max(1));
                s
            })
            .collect();
        ToyLanguage {
            lang,
            words: all,
            zipf,
            next,
        }
    }

    fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.zipf.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        for (i, z) in self.zipf.iter().enumerate() {
            x -= z;
            if x <= 0.0 {
                return i;
            }
        }
        self.zipf.len() - 1
    }

    fn walk<R: Rng + ?Sized>(&self, len: usize, rng: &mut R, out: &mut Vec<TaggedToken>) {
        let mut w = self.start(rng);
        for k in 0..len {
            if k > 0 {
                w = *self.next[w].choose(rng).expect("successors");
            }
            out.push(TaggedToken::new(&self.words[w], self.lang));
        }
    }
}

/// Lexicon, unigram tables and grammars of the toy world.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyWorld {
    pub config: ToyConfig,
    l1: ToyLanguage,
    l2: ToyLanguage,
}

impl ToyWorld {
    pub fn new(config: ToyConfig) -> Self {
        let mut rng = rng_for(config.seed, "toy-world");
        let l1 = ToyLanguage::new(Lang::L1, &L1_PHONES, &config, &mut rng);
        let l2 = ToyLanguage::new(Lang::L2, &L2_PHONES, &config, &mut rng);
        ToyWorld { config, l1, l2 }
    }

    fn language(&self, lang: Lang) -> &ToyLanguage {
        if lang == Lang::L2 {
            &self.l2
        } else {
            &self.l1
        }
    }

    pub fn words(&self, lang: Lang) -> &[String] {
        &self.language(lang).words
    }

    pub fn fragment(&self, lang: Lang) -> LexiconFragment {
        let mut f = LexiconFragment::new(lang);
        for w in self.words(lang) {
            f.add(w, w.chars().map(|c| c.to_ascii_uppercase().to_string()).collect());
        }
        f
    }

    pub fn unigrams(&self, lang: Lang) -> Unigrams {
        let l = self.language(lang);
        Unigrams::from_counts(l.words.iter().zip(&l.zipf).map(|(w, z)| (w.as_str(), *z)))
    }

    pub fn lexicon(&self) -> Result<Lexicon, LexiconError> {
        Lexicon::builder()
            .fragment(self.fragment(Lang::L1))
            .fragment(self.fragment(Lang::L2))
            .unigrams(Lang::L1, self.unigrams(Lang::L1))
            .unigrams(Lang::L2, self.unigrams(Lang::L2))
            .filter(WordFilter::none())
            .build()
    }

    /// Each phoneme is confusable with its two neighbours in its own
    /// inventory (as a ring) and with its counterpart in the other one.
    pub fn similar_pairs() -> Vec<(String, String)> {
        let mut pairs = BTreeSet::new();
        for inv in [L1_PHONES, L2_PHONES] {
            for i in 0..5 {
                pairs.insert((inv[i].to_string(), inv[(i + 1) % 5].to_string()));
            }
        }
        for (a, b) in L1_PHONES.iter().zip(L2_PHONES) {
            pairs.insert((a.to_string(), b.to_string()));
        }
        pairs.into_iter().collect()
    }

    pub fn similar(sub_cost: f64, del_cost: f64) -> Result<SimilarPhonemes, LexiconError> {
        SimilarPhonemes::new(ToyWorld::similar_pairs(), sub_cost, del_cost)
    }

    /// Alternative generator over the toy lexicon and confusion list, with
    /// the edit costs taken from `cfg`.
    pub fn generator(&self, cfg: GenerationConfig) -> Result<Generator, AltgenError> {
        let sim = ToyWorld::similar(cfg.sub_cost, cfg.del_cost)?;
        Generator::new(Arc::new(self.lexicon()?), &sim, cfg)
    }

    /// A grammatical sentence of the requested kind.
    pub fn sentence<R: Rng + ?Sized>(&self, kind: GoldKind, rng: &mut R) -> GoldSentence {
        let c = &self.config;
        let len = rng.gen_range(c.min_len..=c.max_len.max(c.min_len));
        let mut tokens = Vec::with_capacity(len + 1);
        match kind {
            GoldKind::MonoL1 => self.l1.walk(len, rng, &mut tokens),
            GoldKind::MonoL2 => self.l2.walk(len, rng, &mut tokens),
            GoldKind::Cs => {
                let (first, second) = if rng.gen_bool(0.5) { (&self.l1, &self.l2) } else { (&self.l2, &self.l1) };
                let cut = rng.gen_range(1..len.max(2));
                first.walk(cut, rng, &mut tokens);
                second.walk(len.saturating_sub(cut).max(1), rng, &mut tokens);
            }
        }
        if rng.gen::<f64>() < c.period_prob {
            tokens.push(TaggedToken::new(".", Lang::Punct));
        }
        GoldSentence::new(tokens)
    }

    /// `n` tagged sentences, a `cs_fraction` share of them code-switched and
    /// the rest split evenly between the two languages.
    pub fn cs_corpus(&self, n: usize, key: &str) -> TaggedCorpus {
        let mut rng = rng_for(self.config.seed, key);
        let mut c = TaggedCorpus::new(key);
        for i in 0..n {
            let kind = if rng.gen::<f64>() < self.config.cs_fraction {
                GoldKind::Cs
            } else if rng.gen_bool(0.5) {
                GoldKind::MonoL1
            } else {
                GoldKind::MonoL2
            };
            c.push(i, self.sentence(kind, &mut rng));
        }
        c
    }

    /// `n` monolingual sentences in `lang`.
    pub fn mono_corpus(&self, lang: Lang, n: usize, key: &str) -> TaggedCorpus {
        let mut rng = rng_for(self.config.seed, key);
        let kind = if lang == Lang::L2 { GoldKind::MonoL2 } else { GoldKind::MonoL1 };
        let mut c = TaggedCorpus::new(key);
        for i in 0..n {
            c.push(i, self.sentence(kind, &mut rng));
        }
        c
    }

    /// Writes dictionaries, unigram tables, the similar-phoneme list, a tagged
    /// CS corpus and two plain-text monolingual corpora into `dir`.
    pub fn write_resources(&self, dir: &Path, cs_sentences: usize, mono_sentences: usize) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("l1.dict"), write_pron_dict(&self.fragment(Lang::L1)))?;
        std::fs::write(dir.join("l2.dict"), write_pron_dict(&self.fragment(Lang::L2)))?;
        for lang in [Lang::L1, Lang::L2] {
            let mut s = String::new();
            for (w, p) in self.unigrams(lang).sorted() {
                s.push_str(&format!("{w}\t{p}\n"));
            }
            std::fs::write(dir.join(format!("{lang}.unigrams")), s)?;
        }
        let sim: String = ToyWorld::similar_pairs()
            .iter()
            .map(|(a, b)| format!("{a} {b}\n"))
            .collect();
        std::fs::write(dir.join("similar.txt"), sim)?;
        std::fs::write(dir.join("cs.tagged"), self.cs_corpus(cs_sentences, "cs").to_tagged_text())?;
        for lang in [Lang::L1, Lang::L2] {
            let c = self.mono_corpus(lang, mono_sentences, &format!("mono-{lang}"));
            let text: String = c.sentences.iter().map(|s| s.surfaces().join(" ") + "\n").collect();
            std::fs::write(dir.join(format!("mono.{lang}.txt")), text)?;
        }
        Ok(())
    }
}
