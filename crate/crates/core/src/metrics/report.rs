use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{corpus_wer, corpus_wer_macro, WerBreakdown};

/// Result of ranking one evaluation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetOutcome {
    pub gold_is_cs: bool,
    pub correct: bool,
    /// Top-ranked sentence against gold.
    pub top_wer: WerBreakdown,
}

/// Table-3 / Table-5 style summary of one model on one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
    pub accuracy: f64,
    pub wer: f64,
    pub wer_macro: f64,
    pub accuracy_cs_gold: Option<f64>,
    pub accuracy_mono_gold: Option<f64>,
    pub sets: usize,
    pub cs_gold_sets: usize,
}

fn pct(hits: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| 100.0 * hits as f64 / n as f64)
}

impl EvalReport {
    pub fn from_outcomes(outcomes: &[SetOutcome], perplexity: Option<f64>) -> Self {
        let n = outcomes.len();
        let cs: Vec<&SetOutcome> = outcomes.iter().filter(|o| o.gold_is_cs).collect();
        let mono: Vec<&SetOutcome> = outcomes.iter().filter(|o| !o.gold_is_cs).collect();
        let hits = |v: &[&SetOutcome]| v.iter().filter(|o| o.correct).count();
        let wers: Vec<WerBreakdown> = outcomes.iter().map(|o| o.top_wer).collect();
        EvalReport {
            perplexity,
            accuracy: pct(outcomes.iter().filter(|o| o.correct).count(), n).unwrap_or(0.0),
            wer: corpus_wer(&wers),
            wer_macro: corpus_wer_macro(&wers),
            accuracy_cs_gold: pct(hits(&cs), cs.len()),
            accuracy_mono_gold: pct(hits(&mono), mono.len()),
            sets: n,
            cs_gold_sets: cs.len(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |x| format!("{x:.2}"));
        let mut s = String::new();
        let _ = writeln!(s, "{:<20}{:>10}", "sets", self.sets);
        let _ = writeln!(s, "{:<20}{:>10}", "cs-gold sets", self.cs_gold_sets);
        let _ = writeln!(s, "{:<20}{:>10}", "perplexity", opt(self.perplexity));
        let _ = writeln!(s, "{:<20}{:>10.2}", "accuracy", self.accuracy);
        let _ = writeln!(s, "{:<20}{:>10.2}", "wer", self.wer);
        let _ = writeln!(s, "{:<20}{:>10.2}", "wer (macro)", self.wer_macro);
        let _ = writeln!(s, "{:<20}{:>10}", "accuracy cs-gold", opt(self.accuracy_cs_gold));
        let _ = writeln!(s, "{:<20}{:>10}", "accuracy mono-gold", opt(self.accuracy_mono_gold));
        s
    }
}
