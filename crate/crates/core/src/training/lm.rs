use rand::seq::SliceRandom;
use rand::Rng;

use super::{eval::perplexity_of, DataAudit, Partition, Protocol, TrainError};
use crate::neural::{sgd_step, LmModel, Parameters, SgdConfig};

/// Encoded training sentences per partition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LmCorpora {
    pub cs: Vec<Vec<u32>>,
    pub l1: Vec<Vec<u32>>,
    pub l2: Vec<Vec<u32>>,
}

impl LmCorpora {
    pub fn get(&self, p: Partition) -> &[Vec<u32>] {
        match p {
            Partition::Cs => &self.cs,
            Partition::L1 => &self.l1,
            Partition::L2 => &self.l2,
        }
    }

    fn all(&self, parts: &[Partition]) -> Vec<(Partition, usize)> {
        parts
            .iter()
            .flat_map(|&p| (0..self.get(p).len()).map(move |i| (p, i)))
            .collect()
    }
}

/// Presentation order of one epoch. `pretraining` selects the monolingual
/// phase of the fine-tuning protocol.
pub fn arrange<R: Rng + ?Sized>(
    protocol: Protocol,
    pretraining: bool,
    data: &LmCorpora,
    rng: &mut R,
) -> Vec<(Partition, usize)> {
    use Partition::*;
    let shuffled = |parts: &[Partition], rng: &mut R| {
        let mut v = data.all(parts);
        v.shuffle(rng);
        v
    };
    match (protocol, pretraining) {
        (Protocol::L1Only, _) => shuffled(&[L1], rng),
        (Protocol::L2Only, _) => shuffled(&[L2], rng),
        (Protocol::AllShuffled, _) => shuffled(&[Cs, L1, L2], rng),
        (Protocol::AllCsLast, _) => {
            let mut v = shuffled(&[L1, L2], rng);
            v.extend(shuffled(&[Cs], rng));
            v
        }
        (Protocol::FineTuned, true) => shuffled(&[L1, L2], rng),
        (Protocol::CsOnly | Protocol::FineTuned, _) => shuffled(&[Cs], rng),
    }
}

/// One pass in `order`, `batch` sentences per step with the loss averaged
/// over predicted tokens. Returns the epoch's mean per-token loss.
pub fn lm_epoch<R: Rng + ?Sized>(
    model: &mut LmModel,
    data: &LmCorpora,
    order: &[(Partition, usize)],
    sgd: &SgdConfig,
    batch: usize,
    rng: &mut R,
    audit: &mut DataAudit,
) -> Result<f64, TrainError> {
    if order.is_empty() {
        return Err(TrainError::EmptyCorpus("language-model training".into()));
    }
    let mut grads = model.zeros_like();
    let mut nll = 0.0;
    let mut tokens = 0usize;
    for chunk in order.chunks(batch.max(1)) {
        grads.zero_grad();
        let batch_tokens: usize = chunk.iter().map(|&(p, i)| data.get(p)[i].len() + 1).sum();
        let scale = 1.0 / batch_tokens as f64;
        for &(p, i) in chunk {
            audit.record(p);
            let (l, _) = model.train_sentence(&data.get(p)[i], rng, scale, &mut grads)?;
            nll += l;
        }
        tokens += batch_tokens;
        sgd_step(model, &grads, sgd)?;
    }
    Ok(nll / tokens as f64)
}

/// Dev perplexity; the selection metric of every generative protocol.
pub fn dev_perplexity(model: &LmModel, dev: &[Vec<u32>]) -> Result<f64, TrainError> {
    perplexity_of(model, dev)
}
