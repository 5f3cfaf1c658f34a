use std::collections::{BTreeMap, HashSet};
use std::ops::RangeInclusive;
use std::sync::Arc as Shared;

use rand::Rng;

use crate::lexicon::{build_edit_fst, build_phone2word, Lexicon, SimilarPhonemes};
use crate::wfst::{compose, nbest_with_cap, Label, Wfst};

use super::{
    sample_span, AltType, AltgenError, Alternative, EvalSet, GenerationConfig, GoldSentence,
    Rejection, TaggedToken,
};

/// Phonemes of every word in `tokens` (first pronunciation each).
fn phonemize_tokens(tokens: &[TaggedToken], lex: &Lexicon) -> Result<Vec<Label>, AltgenError> {
    let mut out = Vec::new();
    for t in tokens.iter().filter(|t| t.is_word()) {
        let prons = lex.pronunciations(&t.surface, t.lang).ok_or_else(|| AltgenError::Oov {
            token: t.surface.clone(),
            lang: t.lang,
        })?;
        out.extend_from_slice(&prons[0]);
    }
    Ok(out)
}

/// Concatenated pronunciations of the gold words; punctuation is skipped and
/// each word's language tag selects its dictionary.
pub fn phonemize(gold: &GoldSentence, lex: &Lexicon) -> Result<Vec<Label>, AltgenError> {
    phonemize_tokens(&gold.tokens, lex)
}

/// Higher is better: `-w_cost * cost + w_minority * minority + w_length * mean_chars`.
/// `minority` is the fraction of candidate words in the gold's less dominant
/// language and only counts for code-switched alternatives.
pub fn heuristic_score(cand: &Alternative, gold: &GoldSentence, cfg: &GenerationConfig) -> f64 {
    let words: Vec<&TaggedToken> = cand.tokens.iter().filter(|t| t.is_word()).collect();
    if words.is_empty() {
        return -cfg.w_cost * cand.gen_cost;
    }
    let minority = if cand.alt_type == AltType::Cs {
        let m = gold.minority_lang();
        words.iter().filter(|t| t.lang == m).count() as f64 / words.len() as f64
    } else {
        0.0
    };
    let mean_chars = words.iter().map(|t| t.surface.chars().count()).sum::<usize>() as f64 / words.len() as f64;
    -cfg.w_cost * cand.gen_cost + cfg.w_minority * minority + cfg.w_length * mean_chars
}

/// Precompiled decoding machines for one lexicon and configuration.
pub struct Generator {
    lex: Shared<Lexicon>,
    cfg: GenerationConfig,
    edit: Wfst,
    decoders: BTreeMap<AltType, Wfst>,
}

impl Generator {
    pub fn new(lex: Shared<Lexicon>, similar: &SimilarPhonemes, cfg: GenerationConfig) -> Result<Self, AltgenError> {
        let sim = SimilarPhonemes {
            pairs: similar.pairs.clone(),
            sub_cost: cfg.sub_cost,
            del_cost: cfg.del_cost,
        };
        let edit = build_edit_fst(&sim, lex.phones())?;
        let mut decoders = BTreeMap::new();
        for t in AltType::ALL {
            decoders.insert(t, build_phone2word(&lex, t.languages(), cfg.unigram_scale)?);
        }
        Ok(Generator {
            lex,
            cfg,
            edit,
            decoders,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lex
    }

    pub fn config(&self) -> &GenerationConfig {
        &self.cfg
    }

    /// Raw decodings of `phones` (edited, then decoded into words of
    /// `alt_type`'s languages), cheapest first, unique word sequences.
    pub fn decode(&self, phones: &[Label], alt_type: AltType) -> Result<Vec<(Vec<TaggedToken>, f64)>, AltgenError> {
        let input = Wfst::linear_acceptor(self.lex.phones().clone(), phones)?;
        let edited = compose(&input, &self.edit)?;
        let lattice = compose(&edited, &self.decoders[&alt_type])?;
        let paths = nbest_with_cap(&lattice, self.cfg.nbest, self.cfg.max_expansions);
        Ok(paths
            .into_iter()
            .map(|p| {
                let toks = p
                    .output
                    .iter()
                    .map(|&l| {
                        let (w, lang) = self.lex.decode_word(l).expect("decoder emits lexicon words");
                        TaggedToken::new(w, lang)
                    })
                    .collect();
                (toks, p.weight)
            })
            .collect())
    }

    /// Token range converted for `alt_type`: a sampled span for code-switched
    /// alternatives, otherwise first word through last word.
    fn conversion_span<R: Rng + ?Sized>(&self, gold: &GoldSentence, alt_type: AltType, rng: &mut R) -> RangeInclusive<usize> {
        if alt_type == AltType::Cs {
            return sample_span(gold, rng);
        }
        let first = gold.tokens.iter().position(TaggedToken::is_word).unwrap_or(0);
        let last = gold.tokens.iter().rposition(TaggedToken::is_word).unwrap_or(0);
        first..=last
    }

    /// Alternatives of one type: decode, splice into the unconverted context,
    /// drop gold and duplicates, rescore, keep the best `keep`.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        gold: &GoldSentence,
        alt_type: AltType,
        rng: &mut R,
    ) -> Result<Vec<Alternative>, AltgenError> {
        if gold.word_count() == 0 {
            return Ok(Vec::new());
        }
        let span = self.conversion_span(gold, alt_type, rng);
        let phones = phonemize_tokens(&gold.tokens[span.clone()], &self.lex)?;
        let decoded = self.decode(&phones, alt_type)?;

        let gold_surface = gold.surfaces();
        let mut seen: HashSet<Vec<String>> = HashSet::new();
        let mut cands = Vec::new();
        for (words, cost) in decoded {
            if words.is_empty() {
                continue;
            }
            let mut tokens = gold.tokens[..*span.start()].to_vec();
            tokens.extend(words);
            tokens.extend_from_slice(&gold.tokens[span.end() + 1..]);
            let surface: Vec<String> = tokens.iter().map(|t| t.surface.clone()).collect();
            if surface == gold_surface || !seen.insert(surface) {
                continue;
            }
            let mut alt = Alternative {
                tokens,
                alt_type,
                gen_cost: cost,
                heur_score: 0.0,
            };
            alt.heur_score = heuristic_score(&alt, gold, &self.cfg);
            cands.push(alt);
        }
        cands.sort_by(|a, b| {
            b.heur_score
                .total_cmp(&a.heur_score)
                .then(a.gen_cost.total_cmp(&b.gen_cost))
                .then_with(|| a.surfaces().cmp(&b.surfaces()))
        });
        cands.truncate(self.cfg.keep);
        Ok(cands)
    }

    /// All three alternative types, or the reason the set is discarded.
    pub fn build_set<R: Rng + ?Sized>(&self, id: &str, gold: &GoldSentence, rng: &mut R) -> Result<EvalSet, Rejection> {
        let words = gold.word_count();
        if words < self.cfg.min_gold_words {
            return Err(Rejection::TooShort { words });
        }
        if let Err(AltgenError::Oov { token, .. }) = phonemize(gold, &self.lex) {
            return Err(Rejection::Oov { token });
        }
        let mut alternatives = BTreeMap::new();
        for t in AltType::ALL {
            let alts = match self.generate(gold, t, rng) {
                Ok(a) => a,
                Err(AltgenError::Oov { token, .. }) => return Err(Rejection::Oov { token }),
                Err(e) => panic!("generation failed on a well-formed machine: {e}"),
            };
            if alts.len() < self.cfg.min_alternatives {
                return Err(Rejection::TooFewAlternatives {
                    alt_type: t,
                    count: alts.len(),
                });
            }
            alternatives.insert(t, alts);
        }
        Ok(EvalSet {
            id: id.to_string(),
            gold: gold.clone(),
            alternatives,
        })
    }
}
