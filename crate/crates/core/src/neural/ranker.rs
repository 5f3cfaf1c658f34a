use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lstm::LstmLayer;
use super::tensor::{axpy, dot, Tensor};
use super::{check_ids, NeuralError, Parameters};
use crate::corpus::Vocabulary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Repr {
    /// Final forward state concatenated with final backward state.
    BiLstm,
    /// Mean of the token embeddings.
    Bow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerConfig {
    pub emb: usize,
    pub hidden: usize,
    pub repr: Repr,
    pub init_range: f64,
}

impl Default for RankerConfig {
    fn default() -> Self {
        RankerConfig {
            emb: 300,
            hidden: 650,
            repr: Repr::BiLstm,
            init_range: 0.05,
        }
    }
}

/// Sentence scorer `w · repr(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RankerModel {
    pub config: RankerConfig,
    pub vocab: Arc<Vocabulary>,
    pub emb: Tensor,
    pub fwd: Option<LstmLayer>,
    pub bwd: Option<LstmLayer>,
    pub w: Tensor,
}

impl RankerModel {
    pub fn new<R: Rng + ?Sized>(config: RankerConfig, vocab: Arc<Vocabulary>, rng: &mut R) -> Self {
        let r = config.init_range;
        let emb = Tensor::uniform(&[vocab.len(), config.emb], r, rng);
        let (fwd, bwd, wdim) = match config.repr {
            Repr::BiLstm => (
                Some(LstmLayer::new(config.emb, config.hidden, r, rng)),
                Some(LstmLayer::new(config.emb, config.hidden, r, rng)),
                2 * config.hidden,
            ),
            Repr::Bow => (None, None, config.emb),
        };
        let w = Tensor::uniform(&[wdim], r, rng);
        RankerModel {
            config,
            vocab,
            emb,
            fwd,
            bwd,
            w,
        }
    }

    pub fn zeros(config: RankerConfig, vocab: Arc<Vocabulary>) -> Self {
        let (fwd, bwd, wdim) = match config.repr {
            Repr::BiLstm => (
                Some(LstmLayer::zeros(config.emb, config.hidden)),
                Some(LstmLayer::zeros(config.emb, config.hidden)),
                2 * config.hidden,
            ),
            Repr::Bow => (None, None, config.emb),
        };
        RankerModel {
            emb: Tensor::zeros(&[vocab.len(), config.emb]),
            fwd,
            bwd,
            w: Tensor::zeros(&[wdim]),
            config,
            vocab,
        }
    }

    /// See [`super::LmModel::with_vocab`].
    pub fn with_vocab<R: Rng + ?Sized>(&self, vocab: Arc<Vocabulary>, rng: &mut R) -> Result<Self, NeuralError> {
        if !self.vocab.is_prefix_of(&vocab) {
            return Err(NeuralError::VocabMismatch);
        }
        let extra = vocab.len() - self.vocab.len();
        let mut data = self.emb.data().to_vec();
        data.extend_from_slice(Tensor::uniform(&[extra * self.config.emb], self.config.init_range, rng).data());
        let mut m = self.clone();
        m.emb = Tensor::from_vec(&[vocab.len(), self.config.emb], data)?;
        m.vocab = vocab;
        Ok(m)
    }

    pub fn repr_dim(&self) -> usize {
        self.w.len()
    }

    fn embed(&self, ids: &[u32]) -> Result<Vec<Vec<f64>>, NeuralError> {
        if ids.is_empty() {
            return Err(NeuralError::EmptySentence);
        }
        check_ids(ids, self.vocab.len())?;
        Ok(ids.iter().map(|&i| self.emb.row(i as usize).to_vec()).collect())
    }

    pub fn repr(&self, ids: &[u32]) -> Result<Vec<f64>, NeuralError> {
        let xs = self.embed(ids)?;
        Ok(match (&self.fwd, &self.bwd) {
            (Some(f), Some(b)) => {
                let mut out = f.forward(&xs, None).pop().expect("non-empty").h;
                let rev: Vec<Vec<f64>> = xs.into_iter().rev().collect();
                out.extend(b.forward(&rev, None).pop().expect("non-empty").h);
                out
            }
            _ => {
                let mut mean = vec![0.0; self.config.emb];
                let k = 1.0 / xs.len() as f64;
                for x in &xs {
                    axpy(k, x, &mut mean);
                }
                mean
            }
        })
    }

    pub fn score(&self, ids: &[u32]) -> Result<f64, NeuralError> {
        Ok(dot(self.w.data(), &self.repr(ids)?))
    }

    /// Adds `dscore * d score(ids)/dθ` to `grads`.
    pub fn score_backward(&self, ids: &[u32], dscore: f64, grads: &mut RankerModel) -> Result<(), NeuralError> {
        if dscore == 0.0 {
            return Ok(());
        }
        let xs = self.embed(ids)?;
        let drepr: Vec<f64> = self.w.data().iter().map(|w| dscore * w).collect();
        match (&self.fwd, &self.bwd) {
            (Some(f), Some(b)) => {
                let h = self.config.hidden;
                let n = xs.len();
                let fs = f.forward(&xs, None);
                let rev: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
                let bs = b.forward(&rev, None);
                axpy(dscore, &fs[n - 1].h, &mut grads.w.data_mut()[..h]);
                axpy(dscore, &bs[n - 1].h, &mut grads.w.data_mut()[h..]);
                let mut dh_f = vec![vec![0.0; h]; n];
                dh_f[n - 1].copy_from_slice(&drepr[..h]);
                let mut dh_b = vec![vec![0.0; h]; n];
                dh_b[n - 1].copy_from_slice(&drepr[h..]);
                let dx_f = f.backward(&fs, None, &dh_f, grads.fwd.as_mut().expect("same shape"));
                let dx_b = b.backward(&bs, None, &dh_b, grads.bwd.as_mut().expect("same shape"));
                for (t, &id) in ids.iter().enumerate() {
                    let row = grads.emb.row_mut(id as usize);
                    axpy(1.0, &dx_f[t], row);
                    axpy(1.0, &dx_b[n - 1 - t], row);
                }
            }
            _ => {
                let k = 1.0 / xs.len() as f64;
                for x in &xs {
                    axpy(dscore * k, x, grads.w.data_mut());
                }
                for &id in ids {
                    axpy(k, &drepr, grads.emb.row_mut(id as usize));
                }
            }
        }
        Ok(())
    }
}

impl Parameters for RankerModel {
    fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut v = vec![("emb".to_string(), &self.emb)];
        for (n, l) in [("fwd", &self.fwd), ("bwd", &self.bwd)] {
            if let Some(l) = l {
                v.push((format!("{n}.w"), &l.w));
                v.push((format!("{n}.b"), &l.b));
            }
        }
        v.push(("w".to_string(), &self.w));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut v = vec![("emb".to_string(), &mut self.emb)];
        for (n, l) in [("fwd", &mut self.fwd), ("bwd", &mut self.bwd)] {
            if let Some(l) = l {
                v.push((format!("{n}.w"), &mut l.w));
                v.push((format!("{n}.b"), &mut l.b));
            }
        }
        v.push(("w".to_string(), &mut self.w));
        v
    }

    fn row_mask(&self, name: &str) -> Option<&[bool]> {
        (name == "emb").then(|| self.vocab.trainable_mask())
    }
}
