use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{LstmLayer, LstmStep};
use super::tensor::{gemv, gemv_t, ger, log_sum_exp, Tensor};
use super::{check_ids, Mode, NeuralError, Parameters};
use crate::corpus::{Vocabulary, BOS_ID, DROP_ID, EOS_ID};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub emb: usize,
    pub hidden: usize,
    pub layers: usize,
    pub word_dropout: f64,
    pub dropout: f64,
    pub init_range: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            emb: 300,
            hidden: 650,
            layers: 2,
            word_dropout: 0.2,
            dropout: 0.35,
            init_range: 0.05,
        }
    }
}

/// Word-level LSTM language model with a softmax over the whole vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct LmModel {
    pub config: LmConfig,
    pub vocab: Arc<Vocabulary>,
    pub emb: Tensor,
    pub layers: Vec<LstmLayer>,
    pub out_w: Tensor,
    pub out_b: Tensor,
}

/// Dropout draws for one sequence: the (possibly dropped) input ids and one
/// recurrent mask per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LmNoise {
    pub inputs: Vec<u32>,
    pub masks: Vec<Option<Vec<f64>>>,
}

/// Forward activations kept for the backward pass.
pub struct LmTape {
    noise: LmNoise,
    targets: Vec<u32>,
    steps: Vec<Vec<LstmStep>>,
    log_probs: Vec<Vec<f64>>,
}

impl LmTape {
    /// Log-softmax row at every position.
    pub fn log_probs(&self) -> &[Vec<f64>] {
        &self.log_probs
    }

    pub fn target_log_probs(&self) -> Vec<f64> {
        self.log_probs
            .iter()
            .zip(&self.targets)
            .map(|(row, &t)| row[t as usize])
            .collect()
    }
}

impl LmModel {
    pub fn new<R: Rng + ?Sized>(config: LmConfig, vocab: Arc<Vocabulary>, rng: &mut R) -> Self {
        let v = vocab.len();
        let r = config.init_range;
        let emb = Tensor::uniform(&[v, config.emb], r, rng);
        let layers = (0..config.layers)
            .map(|l| LstmLayer::new(if l == 0 { config.emb } else { config.hidden }, config.hidden, r, rng))
            .collect();
        let out_w = Tensor::uniform(&[v, config.hidden], r, rng);
        let out_b = Tensor::uniform(&[v], r, rng);
        LmModel {
            config,
            vocab,
            emb,
            layers,
            out_w,
            out_b,
        }
    }

    /// All-zero parameters of the right shapes.
    pub fn zeros(config: LmConfig, vocab: Arc<Vocabulary>) -> Self {
        let v = vocab.len();
        let layers = (0..config.layers)
            .map(|l| LstmLayer::zeros(if l == 0 { config.emb } else { config.hidden }, config.hidden))
            .collect();
        LmModel {
            emb: Tensor::zeros(&[v, config.emb]),
            layers,
            out_w: Tensor::zeros(&[v, config.hidden]),
            out_b: Tensor::zeros(&[v]),
            config,
            vocab,
        }
    }

    /// Copy of the model over a larger vocabulary that extends the current
    /// one. New rows are initialized like fresh parameters and stay frozen.
    pub fn with_vocab<R: Rng + ?Sized>(&self, vocab: Arc<Vocabulary>, rng: &mut R) -> Result<Self, NeuralError> {
        if !self.vocab.is_prefix_of(&vocab) {
            return Err(NeuralError::VocabMismatch);
        }
        let extra = vocab.len() - self.vocab.len();
        let r = self.config.init_range;
        let grow = |t: &Tensor, rng: &mut R| {
            let mut data = t.data().to_vec();
            let add = Tensor::uniform(&[extra * t.row_len()], r, rng);
            data.extend_from_slice(add.data());
            let mut shape = t.shape().to_vec();
            shape[0] += extra;
            Tensor::from_vec(&shape, data).expect("shape grows by whole rows")
        };
        let mut m = self.clone();
        m.emb = grow(&self.emb, rng);
        m.out_w = grow(&self.out_w, rng);
        m.out_b = grow(&self.out_b, rng);
        m.vocab = vocab;
        Ok(m)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Samples word dropout and recurrent masks. In eval mode nothing is
    /// dropped and no randomness is consumed.
    pub fn noise<R: Rng + ?Sized>(&self, ids: &[u32], mode: Mode, rng: &mut R) -> LmNoise {
        let mut inputs = Vec::with_capacity(ids.len() + 1);
        inputs.push(BOS_ID);
        inputs.extend_from_slice(ids);
        let mut masks = vec![None; self.layers.len()];
        if mode == Mode::Train {
            let wd = self.config.word_dropout;
            if wd > 0.0 {
                for x in &mut inputs[1..] {
                    if rng.gen::<f64>() < wd {
                        *x = DROP_ID;
                    }
                }
            }
            let p = self.config.dropout;
            if p > 0.0 {
                let keep = 1.0 / (1.0 - p);
                for m in &mut masks {
                    *m = Some(
                        (0..self.config.hidden)
                            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
                            .collect(),
                    );
                }
            }
        }
        LmNoise { inputs, masks }
    }

    pub fn eval_noise(&self, ids: &[u32]) -> LmNoise {
        let mut inputs = vec![BOS_ID];
        inputs.extend_from_slice(ids);
        LmNoise {
            inputs,
            masks: vec![None; self.layers.len()],
        }
    }

    /// Forward pass over `BOS ids` predicting `ids EOS`.
    pub fn forward(&self, ids: &[u32], noise: LmNoise) -> Result<LmTape, NeuralError> {
        check_ids(ids, self.vocab_size())?;
        let mut targets = ids.to_vec();
        targets.push(EOS_ID);
        let mut xs: Vec<Vec<f64>> = noise.inputs.iter().map(|&i| self.emb.row(i as usize).to_vec()).collect();
        let mut steps = Vec::with_capacity(self.layers.len());
        for (layer, mask) in self.layers.iter().zip(&noise.masks) {
            let s = layer.forward(&xs, mask.as_deref());
            let next = s.iter().map(|st| st.h.clone()).collect();
            xs = next;
            steps.push(s);
        }
        let h = self.config.hidden;
        let log_probs = xs
            .iter()
            .map(|top| {
                let mut logits = self.out_b.data().to_vec();
                gemv(self.out_w.data(), h, top, &mut logits);
                let z = log_sum_exp(&logits);
                logits.iter_mut().for_each(|l| *l -= z);
                logits
            })
            .collect();
        Ok(LmTape {
            noise,
            targets,
            steps,
            log_probs,
        })
    }

    /// Accumulates `scale * d(-Σ log p)/dθ` into `grads`.
    pub fn backward(&self, tape: &LmTape, scale: f64, grads: &mut LmModel) {
        let h = self.config.hidden;
        let top = &tape.steps[tape.steps.len() - 1];
        let mut dh: Vec<Vec<f64>> = Vec::with_capacity(top.len());
        for (t, row) in tape.log_probs.iter().enumerate() {
            let mut dlogits: Vec<f64> = row.iter().map(|lp| scale * lp.exp()).collect();
            dlogits[tape.targets[t] as usize] -= scale;
            ger(grads.out_w.data_mut(), h, &dlogits, &top[t].h);
            for (gb, d) in grads.out_b.data_mut().iter_mut().zip(&dlogits) {
                *gb += d;
            }
            let mut d = vec![0.0; h];
            gemv_t(self.out_w.data(), h, &dlogits, &mut d);
            dh.push(d);
        }
        for l in (0..self.layers.len()).rev() {
            dh = self.layers[l].backward(
                &tape.steps[l],
                tape.noise.masks[l].as_deref(),
                &dh,
                &mut grads.layers[l],
            );
        }
        for (t, &id) in tape.noise.inputs.iter().enumerate() {
            for (g, d) in grads.emb.row_mut(id as usize).iter_mut().zip(&dh[t]) {
                *g += d;
            }
        }
    }

    /// Log-probability of each next token (`n + 1` values, the last for EOS).
    pub fn lm_logprobs<R: Rng + ?Sized>(&self, ids: &[u32], mode: Mode, rng: &mut R) -> Result<Vec<f64>, NeuralError> {
        let noise = self.noise(ids, mode, rng);
        Ok(self.forward(ids, noise)?.target_log_probs())
    }

    /// Natural-log probability of the sentence including EOS; dropout off.
    pub fn sentence_logprob(&self, ids: &[u32]) -> Result<f64, NeuralError> {
        Ok(self.forward(ids, self.eval_noise(ids))?.target_log_probs().iter().sum())
    }

    /// Summed negative log-likelihood of one sentence, with gradients
    /// (times `scale`) added to `grads`. Returns `(nll, predicted tokens)`.
    pub fn train_sentence<R: Rng + ?Sized>(
        &self,
        ids: &[u32],
        rng: &mut R,
        scale: f64,
        grads: &mut LmModel,
    ) -> Result<(f64, usize), NeuralError> {
        let noise = self.noise(ids, Mode::Train, rng);
        let tape = self.forward(ids, noise)?;
        let nll = -tape.target_log_probs().iter().sum::<f64>();
        self.backward(&tape, scale, grads);
        Ok((nll, ids.len() + 1))
    }
}

impl Parameters for LmModel {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut v = vec![("emb".to_string(), &self.emb)];
        for (i, l) in self.layers.iter().enumerate() {
            v.push((format!("lstm{i}.w"), &l.w));
            v.push((format!("lstm{i}.b"), &l.b));
        }
        v.push(("out.w".to_string(), &self.out_w));
        v.push(("out.b".to_string(), &self.out_b));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut v = vec![("emb".to_string(), &mut self.emb)];
        for (i, l) in self.layers.iter_mut().enumerate() {
            v.push((format!("lstm{i}.w"), &mut l.w));
            v.push((format!("lstm{i}.b"), &mut l.b));
        }
        v.push(("out.w".to_string(), &mut self.out_w));
        v.push(("out.b".to_string(), &mut self.out_b));
        v
    }

    fn row_mask(&self, name: &str) -> Option<&[bool]> {
        matches!(name, "emb" | "out.w" | "out.b").then(|| self.vocab.trainable_mask())
    }
}
