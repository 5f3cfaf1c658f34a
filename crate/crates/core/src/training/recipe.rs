use std::sync::Arc;

use rand::seq::SliceRandom;

use super::{
    arrange, dev_perplexity, disc_epoch, evaluate_sets, lm_epoch, BestTracker, DataAudit, EncodedSet, EpochRecord,
    LmCorpora, ModelKind, Objective, PhaseRecord, Protocol, Recipe, TrainConfig, TrainError,
};
use crate::corpus::Vocabulary;
use crate::neural::{LmModel, Model, RankerModel};
use crate::seeding::rng_for;

/// Encoded training sets for discriminative protocols. `mono` feeds the
/// pretraining phase of the fine-tuning protocol.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiscData {
    pub cs: Vec<EncodedSet>,
    pub mono: Vec<EncodedSet>,
}

/// Result of one training phase: the dev-best model and the curve.
#[derive(Clone, Debug)]
pub struct PhaseOutcome<M> {
    pub model: M,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_metric: Option<f64>,
}

impl<M> PhaseOutcome<M> {
    fn record(&self, name: &str, metric: &str) -> PhaseRecord {
        PhaseRecord {
            name: name.to_string(),
            metric: metric.to_string(),
            epochs: self.history.clone(),
            best_epoch: self.best_epoch,
            best_metric: self.best_metric,
        }
    }
}

pub struct TrainOutcome {
    pub model: Model,
    pub phases: Vec<PhaseRecord>,
    pub audit: DataAudit,
}

/// Generic epoch loop: train, measure dev, keep the best, decay the rate on
/// non-improvement. Stops early once the rate falls below `cfg.min_lr`.
pub fn run_phase<M, E, D>(
    model: M,
    cfg: &TrainConfig,
    epochs: usize,
    objective: Objective,
    mut epoch_fn: E,
    mut dev_fn: D,
) -> Result<PhaseOutcome<M>, TrainError>
where
    M: Clone,
    E: FnMut(&mut M, usize, f64) -> Result<f64, TrainError>,
    D: FnMut(&M) -> Result<f64, TrainError>,
{
    let mut model = model;
    let mut tracker = BestTracker::new(objective, cfg.lr, cfg.lr_decay);
    let mut history = Vec::new();
    for epoch in 0..epochs {
        let lr = tracker.lr();
        if lr < cfg.min_lr {
            log::info!("learning rate {lr:.3e} below floor; stopping after {epoch} epochs");
            break;
        }
        let train_loss = epoch_fn(&mut model, epoch, lr)?;
        let dev_metric = dev_fn(&model)?;
        let improved = tracker.observe(epoch, dev_metric, &model);
        log::info!("epoch {epoch:>3}  lr {lr:<10.4e} loss {train_loss:<10.5} dev {dev_metric:<10.4}{}", if improved { " *" } else { "" });
        history.push(EpochRecord {
            epoch,
            train_loss,
            dev_metric,
            lr,
            improved,
        });
    }
    Ok(PhaseOutcome {
        best_epoch: tracker.best_epoch(),
        best_metric: tracker.best_metric(),
        model: tracker.into_best().unwrap_or(model),
        history,
    })
}

fn lm_phase(
    model: LmModel,
    protocol: Protocol,
    pretraining: bool,
    data: &LmCorpora,
    dev: &[Vec<u32>],
    cfg: &TrainConfig,
    epochs: usize,
    tag: &str,
    audit: &mut DataAudit,
) -> Result<PhaseOutcome<LmModel>, TrainError> {
    run_phase(
        model,
        cfg,
        epochs,
        Objective::Minimize,
        |m, e, lr| {
            let mut rng = rng_for(cfg.seed, &format!("{tag}:epoch{e}"));
            let order = arrange(protocol, pretraining, data, &mut rng);
            lm_epoch(m, data, &order, &cfg.sgd(lr), cfg.batch, &mut rng, audit)
        },
        |m| dev_perplexity(m, dev),
    )
}

fn disc_phase(
    model: RankerModel,
    sets: &[EncodedSet],
    dev: &[EncodedSet],
    cfg: &TrainConfig,
    epochs: usize,
    tag: &str,
    audit: &mut DataAudit,
) -> Result<PhaseOutcome<RankerModel>, TrainError> {
    run_phase(
        model,
        cfg,
        epochs,
        Objective::Maximize,
        |m, e, lr| {
            let mut rng = rng_for(cfg.seed, &format!("{tag}:epoch{e}"));
            let mut order: Vec<usize> = (0..sets.len()).collect();
            order.shuffle(&mut rng);
            disc_epoch(m, sets, &order, &cfg.sgd(lr), cfg.batch, audit)
        },
        |m| dev_accuracy(m, dev),
    )
}

fn dev_accuracy(model: &RankerModel, dev: &[EncodedSet]) -> Result<f64, TrainError> {
    let outcomes = evaluate_sets(model, dev)?;
    Ok(100.0 * outcomes.iter().filter(|o| o.correct).count() as f64 / outcomes.len().max(1) as f64)
}

/// Continues a generative model on CS data only with a fresh schedule.
pub fn finetune_lm(
    pretrained: LmModel,
    vocab: &Vocabulary,
    data: &LmCorpora,
    dev: &[Vec<u32>],
    cfg: &TrainConfig,
    audit: &mut DataAudit,
) -> Result<PhaseOutcome<LmModel>, TrainError> {
    if *pretrained.vocab != *vocab {
        return Err(TrainError::VocabMismatch);
    }
    lm_phase(pretrained, Protocol::CsOnly, false, data, dev, cfg, cfg.finetune_epochs, "finetune", audit)
}

/// Continues a ranker on CS sets only with a fresh schedule.
pub fn finetune_disc(
    pretrained: RankerModel,
    vocab: &Vocabulary,
    sets: &[EncodedSet],
    dev: &[EncodedSet],
    cfg: &TrainConfig,
    audit: &mut DataAudit,
) -> Result<PhaseOutcome<RankerModel>, TrainError> {
    if *pretrained.vocab != *vocab {
        return Err(TrainError::VocabMismatch);
    }
    disc_phase(pretrained, sets, dev, cfg, cfg.finetune_epochs, "finetune", audit)
}

fn require(recipe: Recipe, ok: bool, what: &str) -> Result<(), TrainError> {
    if ok {
        Ok(())
    } else {
        Err(TrainError::MissingData {
            recipe,
            what: what.to_string(),
        })
    }
}

/// Runs `recipe` end to end. `dev_sentences` select generative models,
/// `dev_sets` discriminative ones.
pub fn train(
    recipe: Recipe,
    vocab: Arc<Vocabulary>,
    lm_data: &LmCorpora,
    disc_data: &DiscData,
    dev_sentences: &[Vec<u32>],
    dev_sets: &[EncodedSet],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    if !recipe.is_supported() {
        return Err(TrainError::Unsupported(recipe));
    }
    let mut audit = DataAudit::default();
    let mut init_rng = rng_for(cfg.seed, "init");
    let mut phases = Vec::new();
    let model = match recipe.kind {
        ModelKind::Lm => {
            require(recipe, !dev_sentences.is_empty(), "dev sentences")?;
            let (cs, l1, l2) = (!lm_data.cs.is_empty(), !lm_data.l1.is_empty(), !lm_data.l2.is_empty());
            match recipe.protocol {
                Protocol::L1Only => require(recipe, l1, "L1 monolingual sentences")?,
                Protocol::L2Only => require(recipe, l2, "L2 monolingual sentences")?,
                Protocol::CsOnly => require(recipe, cs, "code-switched sentences")?,
                Protocol::AllShuffled | Protocol::AllCsLast | Protocol::FineTuned => {
                    require(recipe, cs && l1 && l2, "code-switched and both monolingual corpora")?
                }
            }
            let m = LmModel::new(cfg.lm.clone(), vocab.clone(), &mut init_rng);
            if recipe.protocol == Protocol::FineTuned {
                let pre = lm_phase(m, Protocol::FineTuned, true, lm_data, dev_sentences, cfg, cfg.max_epochs, "pretrain", &mut audit)?;
                phases.push(pre.record("pretrain", "dev_perplexity"));
                let ft = finetune_lm(pre.model, &vocab, lm_data, dev_sentences, cfg, &mut audit)?;
                phases.push(ft.record("finetune", "dev_perplexity"));
                Model::Lm(ft.model)
            } else {
                let out = lm_phase(m, recipe.protocol, false, lm_data, dev_sentences, cfg, cfg.max_epochs, "train", &mut audit)?;
                phases.push(out.record("train", "dev_perplexity"));
                Model::Lm(out.model)
            }
        }
        ModelKind::Disc => {
            require(recipe, !dev_sets.is_empty(), "dev sets")?;
            require(recipe, !disc_data.cs.is_empty(), "code-switched training sets")?;
            let m = RankerModel::new(cfg.ranker.clone(), vocab.clone(), &mut init_rng);
            if recipe.protocol == Protocol::FineTuned {
                require(recipe, !disc_data.mono.is_empty(), "monolingual training sets")?;
                let pre = disc_phase(m, &disc_data.mono, dev_sets, cfg, cfg.max_epochs, "pretrain", &mut audit)?;
                phases.push(pre.record("pretrain", "dev_accuracy"));
                let ft = finetune_disc(pre.model, &vocab, &disc_data.cs, dev_sets, cfg, &mut audit)?;
                phases.push(ft.record("finetune", "dev_accuracy"));
                Model::Ranker(ft.model)
            } else {
                let out = disc_phase(m, &disc_data.cs, dev_sets, cfg, cfg.max_epochs, "train", &mut audit)?;
                phases.push(out.record("train", "dev_accuracy"));
                Model::Ranker(out.model)
            }
        }
    };
    Ok(TrainOutcome { model, phases, audit })
}
