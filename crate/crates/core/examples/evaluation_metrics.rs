//! WER, ranking accuracy and perplexity on hand-made inputs.
//!
//! ```text
//! cargo run --example evaluation_metrics
//! ```

use phonorank::metrics::{accuracy, corpus_wer, wer, EvalReport, PerplexityAccumulator, SetOutcome, SetRanking};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = ["no", "pero", "vino", "porque", "he", "came"];
    let hypothesis = ["no", "pero", "been", "no", "porque", "he", "came"];
    let w = wer(&reference, &hypothesis)?;
    println!("{w:?}");
    println!("wer {:.3} ({} edits over {} words)", w.wer, w.edits(), w.ref_len);

    let sets = [
        SetRanking { scores: vec![-3.0, -4.5, -3.2], gold: 0 },
        SetRanking { scores: vec![-2.0, -1.0, -6.0], gold: 0 },
        SetRanking { scores: vec![-1.0, -1.0, -2.0], gold: 0 },
    ];
    for s in &sets {
        println!("argmax {} gold wins {}", s.argmax(), s.gold_wins());
    }
    println!("accuracy {:.2}% (a tie is not a win)", accuracy(&sets));

    let mut acc = PerplexityAccumulator::new();
    for p in [0.25, 0.5, 0.125, 0.25] {
        acc.add_prob(p)?;
    }
    println!("perplexity {:.4}", acc.perplexity()?);

    let outcomes = vec![
        SetOutcome { gold_is_cs: true, correct: true, top_wer: wer(&reference, &reference)? },
        SetOutcome { gold_is_cs: false, correct: false, top_wer: w },
    ];
    println!("corpus wer {:.2}%", corpus_wer(&[outcomes[0].top_wer, outcomes[1].top_wer]));
    print!("{}", EvalReport::from_outcomes(&outcomes, Some(acc.perplexity()?)).to_text());
    Ok(())
}
