//! Training protocols for the generative LM and the discriminative ranker,
//! dev-based learning-rate decay and best-checkpoint retention.

mod disc;
mod eval;
mod lm;
mod manifest;
mod recipe;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::neural::{ClipMode, LmConfig, NeuralError, RankerConfig, SgdConfig};

pub use disc::{disc_epoch, disc_loss, disc_loss_grad, encode_sets, set_loss, EncodedAlt, EncodedSet};
pub use eval::{evaluate_sets, perplexity_of, rank_set, Scorer};
pub use lm::{arrange, dev_perplexity, lm_epoch, LmCorpora};
pub use manifest::{sha256_hex, EvalEntry, PhaseRecord, RunManifest};
pub use recipe::{finetune_disc, finetune_lm, run_phase, train, DiscData, PhaseOutcome, TrainOutcome};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training data for {0}")]
    EmptyCorpus(String),
    #[error("protocol {recipe} needs {what}")]
    MissingData { recipe: Recipe, what: String },
    #[error("{0} is not a supported protocol/model pairing")]
    Unsupported(Recipe),
    #[error("vocabulary of the checkpoint differs from the data vocabulary")]
    VocabMismatch,
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("metrics: {0}")]
    Metrics(#[from] crate::metrics::MetricsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    L1Only,
    L2Only,
    AllShuffled,
    AllCsLast,
    CsOnly,
    FineTuned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Lm,
    Disc,
}

/// A protocol paired with a model kind, written `cs_only_lm`,
/// `fine_tuned_disc` and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Recipe {
    pub protocol: Protocol,
    pub kind: ModelKind,
}

impl Recipe {
    pub const ALL: [Recipe; 8] = [
        Recipe::new(Protocol::L1Only, ModelKind::Lm),
        Recipe::new(Protocol::L2Only, ModelKind::Lm),
        Recipe::new(Protocol::AllShuffled, ModelKind::Lm),
        Recipe::new(Protocol::AllCsLast, ModelKind::Lm),
        Recipe::new(Protocol::CsOnly, ModelKind::Lm),
        Recipe::new(Protocol::FineTuned, ModelKind::Lm),
        Recipe::new(Protocol::CsOnly, ModelKind::Disc),
        Recipe::new(Protocol::FineTuned, ModelKind::Disc),
    ];

    pub const fn new(protocol: Protocol, kind: ModelKind) -> Self {
        Recipe { protocol, kind }
    }

    pub fn is_supported(&self) -> bool {
        Recipe::ALL.contains(self)
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.protocol {
            Protocol::L1Only => "l1_only",
            Protocol::L2Only => "l2_only",
            Protocol::AllShuffled => "all_shuffled",
            Protocol::AllCsLast => "all_cs_last",
            Protocol::CsOnly => "cs_only",
            Protocol::FineTuned => "fine_tuned",
        };
        let k = match self.kind {
            ModelKind::Lm => "lm",
            ModelKind::Disc => "disc",
        };
        write!(f, "{p}_{k}")
    }
}

impl FromStr for Recipe {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Recipe::ALL
            .iter()
            .find(|r| r.to_string() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<String> = Recipe::ALL.iter().map(ToString::to_string).collect();
                format!("unknown protocol {s:?}; expected one of {}", names.join(", "))
            })
    }
}

impl Serialize for Recipe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Recipe {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub lr_decay: f64,
    pub min_lr: f64,
    pub clip: f64,
    pub clip_mode: ClipMode,
    pub weight_decay: f64,
    pub batch: usize,
    pub max_epochs: usize,
    pub finetune_epochs: usize,
    pub seed: u64,
    pub lm: LmConfig,
    pub ranker: RankerConfig,
}

impl TrainConfig {
    /// Generative defaults: lr 10, weight decay 1e-5.
    pub fn lm() -> Self {
        TrainConfig {
            lr: 10.0,
            lr_decay: 2.5,
            min_lr: 1e-4,
            clip: 1.0,
            clip_mode: ClipMode::GlobalNorm,
            weight_decay: 1e-5,
            batch: 20,
            max_epochs: 40,
            finetune_epochs: 40,
            seed: 0,
            lm: LmConfig::default(),
            ranker: RankerConfig::default(),
        }
    }

    /// Discriminative defaults: lr 1, no weight decay.
    pub fn disc() -> Self {
        TrainConfig {
            lr: 1.0,
            weight_decay: 0.0,
            ..TrainConfig::lm()
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Lm => TrainConfig::lm(),
            ModelKind::Disc => TrainConfig::disc(),
        }
    }

    pub fn sgd(&self, lr: f64) -> SgdConfig {
        SgdConfig {
            lr,
            clip: self.clip,
            clip_mode: self.clip_mode,
            weight_decay: self.weight_decay,
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::lm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Minimize,
    Maximize,
}

/// One row of the training curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_metric: f64,
    pub lr: f64,
    pub improved: bool,
}

/// Keeps the dev-best model and divides the learning rate by `decay` after
/// every epoch that does not strictly improve on it.
#[derive(Clone, Debug)]
pub struct BestTracker<M> {
    objective: Objective,
    lr: f64,
    decay: f64,
    best: Option<(usize, f64, M)>,
}

impl<M: Clone> BestTracker<M> {
    pub fn new(objective: Objective, lr: f64, decay: f64) -> Self {
        BestTracker {
            objective,
            lr,
            decay,
            best: None,
        }
    }

    fn better(&self, metric: f64, than: f64) -> bool {
        match self.objective {
            Objective::Minimize => metric < than,
            Objective::Maximize => metric > than,
        }
    }

    /// Records the end of `epoch`; returns whether it is the new best.
    pub fn observe(&mut self, epoch: usize, metric: f64, model: &M) -> bool {
        let improved = !metric.is_nan()
            && match &self.best {
                None => true,
                Some((_, b, _)) => self.better(metric, *b),
            };
        if improved {
            self.best = Some((epoch, metric, model.clone()));
        } else {
            self.lr /= self.decay;
        }
        improved
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn best_metric(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.1)
    }

    pub fn best_model(&self) -> Option<&M> {
        self.best.as_ref().map(|b| &b.2)
    }

    pub fn into_best(self) -> Option<M> {
        self.best.map(|b| b.2)
    }
}

/// Which slice of training data a sentence or set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Cs,
    L1,
    L2,
}

/// Counts of training items served per partition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DataAudit {
    pub served: BTreeMap<Partition, usize>,
}

impl DataAudit {
    pub fn record(&mut self, p: Partition) {
        *self.served.entry(p).or_default() += 1;
    }

    pub fn count(&self, p: Partition) -> usize {
        self.served.get(&p).copied().unwrap_or(0)
    }
}
