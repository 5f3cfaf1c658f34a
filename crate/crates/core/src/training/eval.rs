use rayon::prelude::*;

use super::{EncodedSet, TrainError};
use crate::metrics::{PerplexityAccumulator, SetOutcome, SetRanking};
use crate::neural::{LmModel, NeuralError, RankerModel};

/// Anything that assigns a real score to a token-id sentence; higher wins.
pub trait Scorer: Sync {
    fn score_ids(&self, ids: &[u32]) -> Result<f64, NeuralError>;
}

impl Scorer for LmModel {
    fn score_ids(&self, ids: &[u32]) -> Result<f64, NeuralError> {
        self.sentence_logprob(ids)
    }
}

impl Scorer for RankerModel {
    fn score_ids(&self, ids: &[u32]) -> Result<f64, NeuralError> {
        self.score(ids)
    }
}

impl<F: Fn(&[u32]) -> f64 + Sync> Scorer for F {
    fn score_ids(&self, ids: &[u32]) -> Result<f64, NeuralError> {
        Ok(self(ids))
    }
}

/// Scores gold (index 0) and every alternative.
pub fn rank_set<S: Scorer + ?Sized>(scorer: &S, set: &EncodedSet) -> Result<SetRanking, NeuralError> {
    let mut scores = vec![scorer.score_ids(&set.gold)?];
    for a in &set.alts {
        scores.push(scorer.score_ids(&a.ids)?);
    }
    Ok(SetRanking { scores, gold: 0 })
}

/// Ranks every set. Sets are scored in parallel; results keep input order.
pub fn evaluate_sets<S: Scorer>(scorer: &S, sets: &[EncodedSet]) -> Result<Vec<SetOutcome>, TrainError> {
    let rankings: Vec<Result<SetRanking, NeuralError>> = sets.par_iter().map(|s| rank_set(scorer, s)).collect();
    let mut out = Vec::with_capacity(sets.len());
    for (set, r) in sets.iter().zip(rankings) {
        let r = r?;
        let top = r.argmax();
        out.push(SetOutcome {
            gold_is_cs: set.gold_kind.is_cs(),
            correct: r.gold_wins(),
            top_wer: if top == 0 { set.gold_wer } else { set.alts[top - 1].wer },
        });
    }
    Ok(out)
}

/// Perplexity of the LM over `sentences`, EOS included.
pub fn perplexity_of(model: &LmModel, sentences: &[Vec<u32>]) -> Result<f64, TrainError> {
    let per: Vec<Result<Vec<f64>, NeuralError>> = sentences
        .par_iter()
        .map(|s| Ok(model.forward(s, model.eval_noise(s))?.target_log_probs()))
        .collect();
    let mut acc = PerplexityAccumulator::new();
    for lp in per {
        for l in lp? {
            acc.add_ln(l)?;
        }
    }
    Ok(acc.perplexity()?)
}
