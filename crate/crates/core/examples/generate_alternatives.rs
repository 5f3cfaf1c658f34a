//! Generate the three typed alternative sets for a few sentences of the
//! synthetic two-language world, then sample a small dataset.
//!
//! ```text
//! cargo run --release --example generate_alternatives
//! ```

use phonorank::altgen::{assemble_dataset, build_pool, DatasetStats, GenerationConfig, PoolSummary, SplitTarget};
use phonorank::seeding::rng_for;
use phonorank::synthetic::{ToyConfig, ToyWorld};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let world = ToyWorld::new(ToyConfig::default());
    let generator = world.generator(GenerationConfig {
        nbest: 200,
        ..GenerationConfig::default()
    })?;
    let corpus = world.cs_corpus(200, "demo");

    let (id, gold) = corpus.keyed().into_iter().find(|(_, g)| g.kind().is_cs()).expect("a cs sentence");
    let set = generator.build_set(&id, &gold, &mut rng_for(1, &id)).map_err(|r| r.to_string())?;
    println!("gold ({:?}): {}", set.gold_kind(), set.gold.to_line());
    for (t, alts) in &set.alternatives {
        println!("\n{t} alternatives:");
        for a in alts.iter().take(4) {
            println!("  {:<40} cost {:>6.3}  heuristic {:>7.3}", a.surfaces().join(" "), a.gen_cost, a.heur_score);
        }
    }

    let results = build_pool(&corpus.keyed(), &generator, 1, 2);
    println!("\n{:?}", PoolSummary::from_results(&results));
    let pool: Vec<_> = results.into_iter().filter_map(Result::ok).collect();
    let sample = assemble_dataset(&pool, SplitTarget::from_ratio(40, 1, 3), &mut rng_for(1, "demo-sample"))?;
    println!("{:#?}", DatasetStats::compute(&sample));
    Ok(())
}
