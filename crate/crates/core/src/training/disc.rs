use serde::{Deserialize, Serialize};

use super::{DataAudit, Partition, TrainError};
use crate::altgen::{words_of, AltType, EvalSet, GoldKind};
use crate::corpus::Vocabulary;
use crate::metrics::{wer, WerBreakdown};
use crate::neural::{sgd_step, Parameters, RankerModel, SgdConfig};

/// An alternative as token ids, with its WER against the gold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedAlt {
    pub ids: Vec<u32>,
    pub wer: WerBreakdown,
    pub alt_type: AltType,
}

/// An evaluation or training set in vocabulary ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedSet {
    pub id: String,
    pub gold_kind: GoldKind,
    pub partition: Partition,
    pub gold: Vec<u32>,
    pub gold_wer: WerBreakdown,
    pub alts: Vec<EncodedAlt>,
}

pub fn encode_sets(sets: &[EvalSet], vocab: &Vocabulary, partition: Partition) -> Result<Vec<EncodedSet>, TrainError> {
    let mut out = Vec::with_capacity(sets.len());
    for s in sets {
        let gold_words = s.gold.words();
        let gold_wer = wer(&gold_words, &gold_words)?;
        let mut alts = Vec::new();
        for t in AltType::ALL {
            for a in s.alternatives.get(&t).into_iter().flatten() {
                alts.push(EncodedAlt {
                    ids: vocab.encode(&a.tokens)?,
                    wer: wer(&gold_words, &words_of(&a.tokens))?,
                    alt_type: t,
                });
            }
        }
        out.push(EncodedSet {
            id: s.id.clone(),
            gold_kind: s.gold_kind(),
            partition,
            gold: vocab.encode(&s.gold.tokens)?,
            gold_wer,
            alts,
        });
    }
    Ok(out)
}

/// `Σ_i max(0, wer_i − (gold − score_i))` over the alternatives.
pub fn disc_loss(gold_score: f64, alts: &[(f64, f64)]) -> f64 {
    alts.iter()
        .map(|&(score, wer)| (wer - (gold_score - score)).max(0.0))
        .sum()
}

/// Subgradient of [`disc_loss`]: `(d/d gold, d/d score_i)`. At a kink the
/// hinge counts as inactive.
pub fn disc_loss_grad(gold_score: f64, alts: &[(f64, f64)]) -> (f64, Vec<f64>) {
    let d: Vec<f64> = alts
        .iter()
        .map(|&(score, wer)| if wer - (gold_score - score) > 0.0 { 1.0 } else { 0.0 })
        .collect();
    (-d.iter().sum::<f64>(), d)
}

/// Loss of one set and, when `grads` is given, its gradient times `scale`.
pub fn set_loss(
    model: &RankerModel,
    set: &EncodedSet,
    scale: f64,
    grads: Option<&mut RankerModel>,
) -> Result<f64, TrainError> {
    let g = model.score(&set.gold)?;
    let mut pairs = Vec::with_capacity(set.alts.len());
    for a in &set.alts {
        pairs.push((model.score(&a.ids)?, a.wer.wer));
    }
    let loss = disc_loss(g, &pairs);
    if let Some(grads) = grads {
        if loss > 0.0 {
            let (dg, da) = disc_loss_grad(g, &pairs);
            model.score_backward(&set.gold, scale * dg, grads)?;
            for (a, d) in set.alts.iter().zip(da) {
                model.score_backward(&a.ids, scale * d, grads)?;
            }
        }
    }
    Ok(loss)
}

/// One pass over `sets` in `order`, `batch` sets per SGD step with the mean
/// set loss. Returns the mean loss over the sets used.
pub fn disc_epoch(
    model: &mut RankerModel,
    sets: &[EncodedSet],
    order: &[usize],
    sgd: &SgdConfig,
    batch: usize,
    audit: &mut DataAudit,
) -> Result<f64, TrainError> {
    if order.is_empty() {
        return Err(TrainError::EmptyCorpus("discriminative training".into()));
    }
    let mut grads = model.zeros_like();
    let mut total = 0.0;
    let mut used = 0usize;
    for chunk in order.chunks(batch.max(1)) {
        grads.zero_grad();
        let scale = 1.0 / chunk.len() as f64;
        for &i in chunk {
            let set = &sets[i];
            audit.record(set.partition);
            match set_loss(model, set, scale, Some(&mut grads)) {
                Ok(l) => {
                    total += l;
                    used += 1;
                }
                Err(e) => log::warn!("skipping set {}: {e}", set.id),
            }
        }
        sgd_step(model, &grads, sgd)?;
    }
    Ok(if used > 0 { total / used as f64 } else { 0.0 })
}
