//! Hand-differentiated networks: LSTM language model and BiLSTM/BOW sentence
//! ranker, SGD with clipping, checkpoints.

mod checkpoint;
mod gradcheck;
mod lm;
mod lstm;
mod optim;
mod ranker;
mod tensor;

use thiserror::Error;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Model, FORMAT_VERSION,
};
pub use gradcheck::{check_gradients, relative_error, GradCheck, REL_ERR_FLOOR};
pub use lm::{LmConfig, LmModel, LmNoise, LmTape};
pub use lstm::{LstmLayer, LstmStep};
pub use optim::{grad_norm, sgd_step, ClipMode, SgdConfig, StepInfo};
pub use ranker::{RankerConfig, RankerModel, Repr};
pub use tensor::{log_sum_exp, Tensor};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("token id {id} out of range for vocabulary of {len}")]
    IdOutOfRange { id: u32, len: usize },
    #[error("empty sentence")]
    EmptySentence,
    #[error("non-finite gradient in {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("vocabulary does not extend the model's vocabulary")]
    VocabMismatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Named parameter tensors of a model. The same type doubles as its own
/// gradient buffer.
pub trait Parameters {
    fn tensors(&self) -> Vec<(String, &Tensor)>;
    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)>;

    /// Per-row trainable flags for tensors indexed by vocabulary id.
    fn row_mask(&self, _name: &str) -> Option<&[bool]> {
        None
    }

    fn zero_grad(&mut self) {
        for (_, t) in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    fn zeros_like(&self) -> Self
    where
        Self: Clone,
    {
        let mut z = self.clone();
        z.zero_grad();
        z
    }

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

pub(crate) fn check_ids(ids: &[u32], len: usize) -> Result<(), NeuralError> {
    match ids.iter().find(|&&i| i as usize >= len) {
        Some(&id) => Err(NeuralError::IdOutOfRange { id, len }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::corpus::Vocabulary;
    use crate::seeding::rng;
    use rand::Rng;

    fn vocab(n: usize) -> Arc<Vocabulary> {
        let words: Vec<String> = (0..n - 3).map(|i| format!("w{i:02}")).collect();
        Arc::new(Vocabulary::build(words.iter().map(String::as_str), []))
    }

    fn small_lm(v: usize, seed: u64) -> LmModel {
        let cfg = LmConfig {
            emb: 8,
            hidden: 12,
            ..LmConfig::default()
        };
        LmModel::new(cfg, vocab(v), &mut rng(seed))
    }

    fn random_ids(n: usize, v: usize, seed: u64) -> Vec<u32> {
        let mut r = rng(seed);
        (0..n).map(|_| r.gen_range(3..v as u32)).collect()
    }

    #[test]
    fn zero_projection_gives_uniform_predictions() {
        for v in [5, 20] {
            let mut m = small_lm(v, 1);
            m.out_w.fill(0.0);
            m.out_b.fill(0.0);
            let ids = random_ids(4, v, 2);
            let lp = m.lm_logprobs(&ids, Mode::Eval, &mut rng(0)).unwrap();
            assert_eq!(lp.len(), 5);
            for x in &lp {
                assert!((x + (v as f64).ln()).abs() < 1e-12);
            }
            let s = m.sentence_logprob(&ids).unwrap();
            assert!((s - 5.0 * -(v as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_rows_are_normalized() {
        let m = small_lm(20, 3);
        let ids = random_ids(6, 20, 4);
        let tape = m.forward(&ids, m.eval_noise(&ids)).unwrap();
        for row in tape.log_probs() {
            let total: f64 = row.iter().map(|l| l.exp()).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eval_mode_is_deterministic_and_matches_zero_dropout_training() {
        let mut m = small_lm(20, 5);
        let ids = random_ids(5, 20, 6);
        let a = m.lm_logprobs(&ids, Mode::Eval, &mut rng(1)).unwrap();
        let b = m.lm_logprobs(&ids, Mode::Eval, &mut rng(2)).unwrap();
        assert_eq!(a, b);
        m.config.dropout = 0.0;
        m.config.word_dropout = 0.0;
        assert_eq!(m.lm_logprobs(&ids, Mode::Train, &mut rng(3)).unwrap(), a);
    }

    #[test]
    fn one_token_sentence_and_bad_ids() {
        let m = small_lm(10, 7);
        let lp = m.lm_logprobs(&[4], Mode::Eval, &mut rng(0)).unwrap();
        assert_eq!(lp.len(), 2);
        assert!((m.sentence_logprob(&[4]).unwrap() - (lp[0] + lp[1])).abs() < 1e-15);
        assert!(matches!(m.sentence_logprob(&[10]), Err(NeuralError::IdOutOfRange { id: 10, .. })));
    }

    fn lm_nll(m: &LmModel, data: &[(Vec<u32>, LmNoise)]) -> f64 {
        data.iter()
            .map(|(ids, n)| -m.forward(ids, n.clone()).unwrap().target_log_probs().iter().sum::<f64>())
            .sum()
    }

    #[test]
    fn lm_gradients_match_finite_differences() {
        let m = small_lm(20, 11);
        let mut r = rng(12);
        let data: Vec<(Vec<u32>, LmNoise)> = (0..3)
            .map(|i| {
                let ids = random_ids(2 + 2 * i, 20, 20 + i as u64);
                let noise = m.noise(&ids, Mode::Train, &mut r);
                (ids, noise)
            })
            .collect();
        let mut grads = m.zeros_like();
        for (ids, n) in &data {
            let tape = m.forward(ids, n.clone()).unwrap();
            m.backward(&tape, 1.0, &mut grads);
        }
        let report = check_gradients(&m, &grads, |p| lm_nll(p, &data), 1e-5, 7);
        assert!(report.max_rel_err < 1e-4, "{report:?}");
    }

    fn ranker(repr: Repr, seed: u64) -> RankerModel {
        let cfg = RankerConfig {
            emb: 8,
            hidden: 12,
            repr,
            init_range: 0.3,
        };
        RankerModel::new(cfg, vocab(20), &mut rng(seed))
    }

    #[test]
    fn ranker_gradients_match_finite_differences() {
        for repr in [Repr::BiLstm, Repr::Bow] {
            let m = ranker(repr, 13);
            let sents: Vec<Vec<u32>> = (0..3).map(|i| random_ids(1 + 2 * i, 20, 30 + i as u64)).collect();
            let coef = [1.0, -0.5, 2.0];
            let mut grads = m.zeros_like();
            for (s, c) in sents.iter().zip(coef) {
                m.score_backward(s, c, &mut grads).unwrap();
            }
            let f = |p: &RankerModel| sents.iter().zip(coef).map(|(s, c)| c * p.score(s).unwrap()).sum::<f64>();
            let report = check_gradients(&m, &grads, f, 1e-5, 1);
            assert!(report.max_rel_err < 1e-4, "{repr:?} {report:?}");
        }
    }

    #[test]
    fn score_properties() {
        let mut m = ranker(Repr::BiLstm, 2);
        let s = [4u32, 9, 4];
        assert_eq!(m.repr(&s).unwrap().len(), 24);
        let r = m.repr(&[5, 6, 5]).unwrap();
        let pal = m.repr(&[5, 6, 5]).unwrap();
        assert_eq!(r, pal);
        assert!(matches!(m.score(&[]), Err(NeuralError::EmptySentence)));
        let before = m.score(&s).unwrap();
        m.w.data_mut().iter_mut().for_each(|x| *x *= 2.0);
        assert!((m.score(&s).unwrap() - 2.0 * before).abs() < 1e-15);
        m.w.fill(0.0);
        assert_eq!(m.score(&s).unwrap(), 0.0);
        let mut grads = m.zeros_like();
        m.score_backward(&s, 1.0, &mut grads).unwrap();
        assert_eq!(grads.w.data(), m.repr(&s).unwrap().as_slice());
    }

    #[test]
    fn bilstm_halves_swap_on_reversal() {
        let mut m = ranker(Repr::BiLstm, 3);
        m.bwd = m.fwd.clone();
        let a = m.repr(&[4, 7, 9]).unwrap();
        let b = m.repr(&[9, 7, 4]).unwrap();
        assert_eq!(a[..12], b[12..]);
        assert_eq!(a[12..], b[..12]);
        let one = m.repr(&[8]).unwrap();
        assert_eq!(one[..12], one[12..]);
    }

    #[test]
    fn bow_ignores_order_bilstm_does_not() {
        let bow = ranker(Repr::Bow, 4);
        let a = bow.score(&[4, 7, 9]).unwrap();
        let b = bow.score(&[9, 4, 7]).unwrap();
        assert!((a - b).abs() < 1e-15);
        let bi = ranker(Repr::BiLstm, 4);
        assert_ne!(bi.score(&[4, 7, 9]).unwrap(), bi.score(&[9, 4, 7]).unwrap());
    }

    #[test]
    fn checkpoint_round_trip_and_validation() {
        for model in [Model::Lm(small_lm(20, 1)), Model::Ranker(ranker(Repr::Bow, 1))] {
            let bytes = checkpoint_bytes(&model);
            assert_eq!(&bytes[..8], b"PHNRANK\0");
            assert_eq!(read_checkpoint(bytes.as_slice()).unwrap(), model);
            assert!(read_checkpoint(&bytes[..bytes.len() - 8]).is_err());
            let mut bad = bytes.clone();
            bad[0] = b'X';
            assert!(read_checkpoint(bad.as_slice()).is_err());
        }
    }

    #[test]
    fn extending_vocab_keeps_old_rows_and_freezes_new() {
        let m = small_lm(10, 1);
        let bigger = Arc::new(m.vocab.extended(["zz1", "zz2"]));
        let e = m.with_vocab(bigger.clone(), &mut rng(2)).unwrap();
        assert_eq!(e.emb.shape(), [12, 8]);
        assert_eq!(&e.emb.data()[..80], m.emb.data());
        assert!(!bigger.is_trainable(11));
        let other = Arc::new(Vocabulary::build(["q"], []));
        assert!(m.with_vocab(other, &mut rng(0)).is_err());
    }

    #[test]
    fn same_seed_same_parameters() {
        assert_eq!(small_lm(20, 9), small_lm(20, 9));
        assert_ne!(small_lm(20, 9), small_lm(20, 10));
    }
}
