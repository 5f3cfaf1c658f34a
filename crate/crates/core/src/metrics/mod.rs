//! Ranking accuracy, word error rate and perplexity.

mod report;
mod wer;

use thiserror::Error;

pub use report::{EvalReport, SetOutcome};
pub use wer::{wer, WerBreakdown};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("reference sequence is empty")]
    EmptyReference,
    #[error("probability {0} is not in (0, 1]")]
    ZeroProbability(f64),
    #[error("no tokens accumulated")]
    NoTokens,
}

/// Scores of one evaluation set and which entry is the gold sentence.
#[derive(Clone, Debug, PartialEq)]
pub struct SetRanking {
    pub scores: Vec<f64>,
    pub gold: usize,
}

impl SetRanking {
    /// Index of the highest score (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.scores.iter().enumerate() {
            if *s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    /// Gold counts as identified only when strictly above every alternative.
    pub fn gold_wins(&self) -> bool {
        let g = self.scores[self.gold];
        self.scores
            .iter()
            .enumerate()
            .all(|(i, &s)| i == self.gold || s < g)
    }
}

/// Percentage of sets whose gold entry strictly outscores all others.
pub fn accuracy(results: &[SetRanking]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    let wins = results.iter().filter(|r| r.gold_wins()).count();
    100.0 * wins as f64 / results.len() as f64
}

/// Running `Σ log2 p` over scored tokens.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PerplexityAccumulator {
    pub sum_log2: f64,
    pub n_tokens: usize,
}

impl PerplexityAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_prob(&mut self, p: f64) -> Result<(), MetricsError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(MetricsError::ZeroProbability(p));
        }
        self.sum_log2 += p.log2();
        self.n_tokens += 1;
        Ok(())
    }

    /// Adds a natural-log probability.
    pub fn add_ln(&mut self, ln_p: f64) -> Result<(), MetricsError> {
        if !(ln_p.is_finite() && ln_p <= 0.0) {
            return Err(MetricsError::ZeroProbability(ln_p.exp()));
        }
        self.sum_log2 += ln_p / std::f64::consts::LN_2;
        self.n_tokens += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &PerplexityAccumulator) {
        self.sum_log2 += other.sum_log2;
        self.n_tokens += other.n_tokens;
    }

    pub fn perplexity(&self) -> Result<f64, MetricsError> {
        perplexity(self)
    }
}

/// `2^(-(1/N) Σ log2 p_i)`.
pub fn perplexity(acc: &PerplexityAccumulator) -> Result<f64, MetricsError> {
    if acc.n_tokens == 0 {
        return Err(MetricsError::NoTokens);
    }
    Ok((-acc.sum_log2 / acc.n_tokens as f64).exp2())
}

/// Micro-averaged WER in percent: total edits over total reference words.
pub fn corpus_wer(results: &[WerBreakdown]) -> f64 {
    let refs: usize = results.iter().map(|r| r.ref_len).sum();
    if refs == 0 {
        return 0.0;
    }
    let edits: usize = results.iter().map(WerBreakdown::edits).sum();
    100.0 * edits as f64 / refs as f64
}

/// Macro-averaged WER in percent: mean of per-set WERs.
pub fn corpus_wer_macro(results: &[WerBreakdown]) -> f64 {
    if results.is_empty() {
        return 0.0;
    }
    100.0 * results.iter().map(|r| r.wer).sum::<f64>() / results.len() as f64
}
