//! Train the LSTM language model on synthetic code-switched text, report
//! dev perplexity per epoch, and use it to rank alternative sets.
//!
//! ```text
//! cargo run --release --example train_lm
//! ```

use std::sync::Arc;

use phonorank::altgen::GenerationConfig;
use phonorank::corpus::Vocabulary;
use phonorank::metrics::EvalReport;
use phonorank::neural::{checkpoint_bytes, LmConfig, Model};
use phonorank::synthetic::{ToyConfig, ToyWorld};
use phonorank::training::{encode_sets, evaluate_sets, perplexity_of, train, DiscData, LmCorpora, Partition, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let world = ToyWorld::new(ToyConfig::default());
    let train_corpus = world.cs_corpus(1500, "lm-train");
    let dev_corpus = world.cs_corpus(200, "lm-dev");
    let generator = world.generator(GenerationConfig { nbest: 100, ..GenerationConfig::default() })?;
    let dev_sets: Vec<_> = phonorank::altgen::build_pool(&dev_corpus.keyed(), &generator, 3, 1)
        .into_iter()
        .filter_map(Result::ok)
        .collect();

    let vocab = Arc::new(Vocabulary::from_sentences(
        train_corpus.sentences.iter().map(|s| s.tokens.as_slice()),
        dev_sets.iter().flat_map(|s| s.sentences()),
    ));
    let encode = |c: &phonorank::corpus::TaggedCorpus| -> Result<Vec<Vec<u32>>, phonorank::corpus::CorpusError> {
        c.sentences.iter().map(|s| vocab.encode(&s.tokens)).collect()
    };
    let data = LmCorpora { cs: encode(&train_corpus)?, ..LmCorpora::default() };
    let dev = encode(&dev_corpus)?;

    let cfg = TrainConfig {
        seed: 1,
        max_epochs: 6,
        lm: LmConfig { emb: 24, hidden: 24, ..LmConfig::default() },
        ..TrainConfig::lm()
    };
    let out = train("cs_only_lm".parse()?, vocab.clone(), &data, &DiscData::default(), &dev, &[], &cfg)?;
    for e in &out.phases[0].epochs {
        println!("epoch {:>2}  loss {:.4}  dev ppl {:>8.3}  lr {:<7.3}  {}", e.epoch, e.train_loss, e.dev_metric, e.lr, if e.improved { "*" } else { "" });
    }
    let Model::Lm(lm) = &out.model else { unreachable!() };
    println!("vocabulary {} ({} trainable); checkpoint {} bytes", vocab.len(), vocab.trainable_count(), checkpoint_bytes(&out.model).len());

    let encoded = encode_sets(&dev_sets, &vocab, Partition::Cs)?;
    let outcomes = evaluate_sets(lm, &encoded)?;
    print!("{}", EvalReport::from_outcomes(&outcomes, Some(perplexity_of(lm, &dev)?)).to_text());
    Ok(())
}
