//! Train the discriminative ranker with the margin loss and compare its dev
//! accuracy with picking a sentence at random.
//!
//! ```text
//! cargo run --release --example train_ranker
//! ```

use std::sync::Arc;

use phonorank::altgen::{build_pool, GenerationConfig};
use phonorank::corpus::Vocabulary;
use phonorank::metrics::EvalReport;
use phonorank::neural::{Model, RankerConfig};
use phonorank::synthetic::{ToyConfig, ToyWorld};
use phonorank::training::{encode_sets, evaluate_sets, train, DiscData, LmCorpora, Partition, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let world = ToyWorld::new(ToyConfig::default());
    let generator = world.generator(GenerationConfig { nbest: 100, ..GenerationConfig::default() })?;
    let pool = |n, key: &str| -> Vec<_> {
        build_pool(&world.cs_corpus(n, key).keyed(), &generator, 5, 1).into_iter().filter_map(Result::ok).collect()
    };
    let (train_sets, dev_sets) = (pool(800, "ranker-train"), pool(200, "ranker-dev"));

    let vocab = Arc::new(Vocabulary::from_sentences(
        train_sets.iter().flat_map(|s| s.sentences()),
        dev_sets.iter().flat_map(|s| s.sentences()),
    ));
    let data = DiscData { cs: encode_sets(&train_sets, &vocab, Partition::Cs)?, mono: vec![] };
    let dev = encode_sets(&dev_sets, &vocab, Partition::Cs)?;
    let per_set = dev.iter().map(|s| 1 + s.alts.len()).sum::<usize>() as f64 / dev.len() as f64;

    let cfg = TrainConfig {
        seed: 1,
        max_epochs: 10,
        ranker: RankerConfig { emb: 16, hidden: 16, ..RankerConfig::default() },
        ..TrainConfig::disc()
    };
    let out = train("cs_only_disc".parse()?, vocab, &LmCorpora::default(), &data, &[], &dev, &cfg)?;
    for e in &out.phases[0].epochs {
        println!("epoch {:>2}  hinge {:.4}  dev acc {:>6.2}%  lr {:.4}", e.epoch, e.train_loss, e.dev_metric, e.lr);
    }
    println!("random choice would score {:.2}%", 100.0 / per_set);

    let Model::Ranker(ranker) = &out.model else { unreachable!() };
    print!("{}", EvalReport::from_outcomes(&evaluate_sets(ranker, &dev)?, None).to_text());
    Ok(())
}
