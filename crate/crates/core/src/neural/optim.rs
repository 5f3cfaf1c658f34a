use serde::{Deserialize, Serialize};

use super::{NeuralError, Parameters};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipMode {
    /// Rescale the whole gradient so its L2 norm is at most `clip`.
    GlobalNorm,
    /// Clamp each component to `[-clip, clip]`.
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub lr: f64,
    pub clip: f64,
    pub clip_mode: ClipMode,
    pub weight_decay: f64,
}

/// What one step did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub grad_norm: f64,
    pub clip_scale: f64,
}

fn frozen(mask: Option<&[bool]>, row: usize) -> bool {
    mask.is_some_and(|m| !m[row])
}

/// Global L2 norm of the gradient, skipping frozen rows.
pub fn grad_norm<P: Parameters>(params: &P, grads: &P) -> f64 {
    let mut sq = 0.0;
    for ((name, _), (_, g)) in params.tensors().into_iter().zip(grads.tensors()) {
        let mask = params.row_mask(&name);
        let n = g.row_len();
        for (r, row) in g.data().chunks(n.max(1)).enumerate() {
            if !frozen(mask, r) {
                sq += row.iter().map(|x| x * x).sum::<f64>();
            }
        }
    }
    sq.sqrt()
}

/// `p -= lr * (clip(g) + wd * p)`, leaving frozen rows untouched. A non-finite
/// gradient aborts the step before anything is modified.
pub fn sgd_step<P: Parameters>(params: &mut P, grads: &P, cfg: &SgdConfig) -> Result<StepInfo, NeuralError> {
    for (name, g) in grads.tensors() {
        if g.data().iter().any(|x| !x.is_finite()) {
            return Err(NeuralError::NonFinite(name));
        }
    }
    let norm = grad_norm(params, grads);
    let scale = match cfg.clip_mode {
        ClipMode::GlobalNorm if norm > cfg.clip => cfg.clip / norm,
        _ => 1.0,
    };
    let masks: Vec<Option<Vec<bool>>> = params
        .tensors()
        .iter()
        .map(|(name, _)| params.row_mask(name).map(<[bool]>::to_vec))
        .collect();
    for (((_, p), (_, g)), mask) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(&masks) {
        let n = p.row_len().max(1);
        for (r, (prow, grow)) in p.data_mut().chunks_mut(n).zip(g.data().chunks(n)).enumerate() {
            if frozen(mask.as_deref(), r) {
                continue;
            }
            for (pv, &gv) in prow.iter_mut().zip(grow) {
                let gv = match cfg.clip_mode {
                    ClipMode::GlobalNorm => gv * scale,
                    ClipMode::Value => gv.clamp(-cfg.clip, cfg.clip),
                };
                *pv -= cfg.lr * (gv + cfg.weight_decay * *pv);
            }
        }
    }
    Ok(StepInfo {
        grad_norm: norm,
        clip_scale: scale,
    })
}
