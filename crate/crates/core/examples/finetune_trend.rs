//! Compare a ranker trained on scarce code-switched data alone with one
//! pretrained on monolingual sets and then fine-tuned, over three seeds.
//!
//! ```text
//! cargo run --release --example finetune_trend
//! ```

use std::sync::Arc;

use phonorank::altgen::{build_pool, EvalSet, GenerationConfig, TaggedToken};
use phonorank::corpus::Vocabulary;
use phonorank::lexicon::Lang;
use phonorank::neural::RankerConfig;
use phonorank::synthetic::{ToyConfig, ToyWorld};
use phonorank::training::{encode_sets, train, DiscData, LmCorpora, Partition, TrainConfig, TrainError};

fn sentences(sets: &[EvalSet]) -> impl Iterator<Item = &[TaggedToken]> {
    sets.iter().flat_map(|s| s.sentences())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let world = ToyWorld::new(ToyConfig::default());
    let generator = world.generator(GenerationConfig { nbest: 100, ..GenerationConfig::default() })?;
    let pool = |c: phonorank::corpus::TaggedCorpus| -> Vec<EvalSet> {
        build_pool(&c.keyed(), &generator, 7, 1).into_iter().filter_map(Result::ok).collect()
    };
    let cs = pool(world.cs_corpus(200, "ft-train"));
    let dev = pool(world.cs_corpus(200, "ft-dev"));
    let mut mono = pool(world.mono_corpus(Lang::L1, 300, "ft-mono-l1"));
    mono.extend(pool(world.mono_corpus(Lang::L2, 300, "ft-mono-l2")));
    println!("{} cs sets, {} mono sets, {} dev sets", cs.len(), mono.len(), dev.len());

    for seed in 1..=3u64 {
        let run = |recipe: &str, with_mono: bool| -> Result<f64, TrainError> {
            let trained: Vec<_> = if with_mono { sentences(&cs).chain(sentences(&mono)).collect() } else { sentences(&cs).collect() };
            let vocab = Arc::new(Vocabulary::from_sentences(trained, sentences(&dev).chain(sentences(&mono))));
            let data = DiscData {
                cs: encode_sets(&cs, &vocab, Partition::Cs)?,
                mono: encode_sets(&mono, &vocab, Partition::L1)?,
            };
            let dev_sets = encode_sets(&dev, &vocab, Partition::Cs)?;
            let cfg = TrainConfig {
                seed,
                max_epochs: 8,
                finetune_epochs: 8,
                ranker: RankerConfig { emb: 16, hidden: 16, ..RankerConfig::default() },
                ..TrainConfig::disc()
            };
            let out = train(recipe.parse().expect("known recipe"), vocab, &LmCorpora::default(), &data, &[], &dev_sets, &cfg)?;
            Ok(out.phases.last().and_then(|p| p.best_metric).unwrap_or(0.0))
        };
        let alone = run("cs_only_disc", false)?;
        let tuned = run("fine_tuned_disc", true)?;
        println!("seed {seed}: cs only {alone:>6.2}%   pretrained + fine-tuned {tuned:>6.2}%");
    }
    Ok(())
}
