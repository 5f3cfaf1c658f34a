use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeding::rng_for;

use super::{AltType, AltgenError, Alternative, EvalSet, Generator, GoldKind, GoldSentence, Rejection};

/// How many CS-gold and mono-gold sets a split should contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTarget {
    pub cs: usize,
    pub mono: usize,
}

impl SplitTarget {
    /// `size` sets split `cs_parts : mono_parts` (CS count rounded down).
    pub fn from_ratio(size: usize, cs_parts: usize, mono_parts: usize) -> Self {
        let cs = size * cs_parts / (cs_parts + mono_parts).max(1);
        SplitTarget { cs, mono: size - cs }
    }

    pub fn total(&self) -> usize {
        self.cs + self.mono
    }
}

/// Counts of accepted and rejected sentences from [`build_pool`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub accepted: usize,
    pub too_short: usize,
    pub oov: usize,
    pub too_few_alternatives: usize,
}

impl PoolSummary {
    pub fn from_results(results: &[Result<EvalSet, Rejection>]) -> Self {
        let mut s = PoolSummary::default();
        for r in results {
            match r {
                Ok(_) => s.accepted += 1,
                Err(Rejection::TooShort { .. }) => s.too_short += 1,
                Err(Rejection::Oov { .. }) => s.oov += 1,
                Err(Rejection::TooFewAlternatives { .. }) => s.too_few_alternatives += 1,
            }
        }
        s
    }
}

/// Builds a set for every `(id, gold)` pair. Each sentence gets its own
/// generator seeded from `(seed, id)`, so the output is identical for any
/// worker count. Results are returned in input order.
pub fn build_pool(
    golds: &[(String, GoldSentence)],
    generator: &Generator,
    seed: u64,
    workers: usize,
) -> Vec<Result<EvalSet, Rejection>> {
    let done = AtomicUsize::new(0);
    let step = (golds.len() / 10).max(1);
    let run = || {
        golds
            .par_iter()
            .map(|(id, gold)| {
                let mut rng = rng_for(seed, id);
                let r = generator.build_set(id, gold, &mut rng);
                if let Err(rej) = &r {
                    log::debug!("{id}: rejected ({rej})");
                }
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n % step == 0 || n == golds.len() {
                    log::info!("generated {n}/{}", golds.len());
                }
                r
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("could not start {workers} workers ({e}); using the global pool");
            run()
        }
    }
}

/// Samples `target.cs` CS-gold and `target.mono` mono-gold sets without
/// replacement. Selected sets keep their pool order.
pub fn assemble_dataset<R: Rng + ?Sized>(
    pool: &[EvalSet],
    target: SplitTarget,
    rng: &mut R,
) -> Result<Vec<EvalSet>, AltgenError> {
    let cs: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].gold_kind().is_cs()).collect();
    let mono: Vec<usize> = (0..pool.len()).filter(|&i| !pool[i].gold_kind().is_cs()).collect();
    if cs.len() < target.cs || mono.len() < target.mono {
        return Err(AltgenError::InsufficientPool {
            cs_needed: target.cs,
            mono_needed: target.mono,
            cs_available: cs.len(),
            mono_available: mono.len(),
        });
    }
    let mut chosen: Vec<usize> = sample(rng, cs.len(), target.cs).into_iter().map(|i| cs[i]).collect();
    chosen.extend(sample(rng, mono.len(), target.mono).into_iter().map(|i| mono[i]));
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| pool[i].clone()).collect())
}

#[derive(Serialize, Deserialize)]
struct GoldRecord {
    tokens: Vec<super::TaggedToken>,
}

#[derive(Serialize, Deserialize)]
struct SetRecord {
    id: String,
    gold: GoldRecord,
    gold_kind: GoldKind,
    alts: BTreeMap<AltType, Vec<Alternative>>,
}

/// One JSON object per line.
pub fn write_dataset(sets: &[EvalSet]) -> String {
    let mut out = String::new();
    for s in sets {
        let rec = SetRecord {
            id: s.id.clone(),
            gold: GoldRecord {
                tokens: s.gold.tokens.clone(),
            },
            gold_kind: s.gold_kind(),
            alts: s.alternatives.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn read_dataset(text: &str) -> Result<Vec<EvalSet>, AltgenError> {
    let mut sets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SetRecord = serde_json::from_str(line).map_err(|e| AltgenError::Format {
            line: i + 1,
            msg: e.to_string(),
        })?;
        let mut alternatives = rec.alts;
        for (t, alts) in alternatives.iter_mut() {
            for a in alts {
                a.alt_type = *t;
            }
        }
        let gold = GoldSentence::new(rec.gold.tokens);
        if gold.kind() != rec.gold_kind {
            return Err(AltgenError::Format {
                line: i + 1,
                msg: format!("gold_kind {:?} does not match tokens", rec.gold_kind),
            });
        }
        sets.push(EvalSet {
            id: rec.id,
            gold,
            alternatives,
        });
    }
    Ok(sets)
}

/// Dataset-level counts (sets, sentences, alternatives per type).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub sets: usize,
    pub sentences: usize,
    pub alternatives: BTreeMap<AltType, usize>,
    pub cs_gold_sets: usize,
    pub cs_gold_fraction: f64,
    pub mean_sentences_per_set: f64,
}

impl DatasetStats {
    pub fn compute(sets: &[EvalSet]) -> Self {
        let mut alternatives: BTreeMap<AltType, usize> = AltType::ALL.iter().map(|t| (*t, 0)).collect();
        for s in sets {
            for (t, a) in &s.alternatives {
                *alternatives.entry(*t).or_default() += a.len();
            }
        }
        let alt_total: usize = alternatives.values().sum();
        let cs = sets.iter().filter(|s| s.gold_kind().is_cs()).count();
        let n = sets.len();
        DatasetStats {
            sets: n,
            sentences: n + alt_total,
            alternatives,
            cs_gold_sets: cs,
            cs_gold_fraction: if n > 0 { cs as f64 / n as f64 } else { 0.0 },
            mean_sentences_per_set: if n > 0 { (n + alt_total) as f64 / n as f64 } else { 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altgen::TaggedToken;
    use crate::lexicon::Lang;
    use crate::seeding::rng;

    fn fake_set(i: usize, cs: bool) -> EvalSet {
        let mut tokens = vec![TaggedToken::new(&format!("w{i}"), Lang::L1); 3];
        if cs {
            tokens[2].lang = Lang::L2;
        }
        let alt = Alternative {
            tokens: vec![TaggedToken::new("x", Lang::L1); 3],
            alt_type: AltType::L1,
            gen_cost: 1.5,
            heur_score: -0.25,
        };
        let mut alternatives = BTreeMap::new();
        alternatives.insert(AltType::L1, vec![alt]);
        EvalSet {
            id: format!("s{i}"),
            gold: GoldSentence::new(tokens),
            alternatives,
        }
    }

    fn pool(cs: usize, mono: usize) -> Vec<EvalSet> {
        (0..cs).map(|i| fake_set(i, true)).chain((cs..cs + mono).map(|i| fake_set(i, false))).collect()
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(SplitTarget::from_ratio(1000, 1, 3), SplitTarget { cs: 250, mono: 750 });
        assert_eq!(SplitTarget::from_ratio(40, 1, 3), SplitTarget { cs: 10, mono: 30 });
    }

    #[test]
    fn exhausting_the_pool_takes_everything() {
        let p = pool(100, 300);
        let d = assemble_dataset(&p, SplitTarget::from_ratio(400, 1, 3), &mut rng(1)).unwrap();
        assert_eq!(d.len(), 400);
        assert_eq!(d.iter().filter(|s| s.gold_kind().is_cs()).count(), 100);
    }

    #[test]
    fn selection_is_seeded_and_ratio_exact() {
        let p = pool(50, 80);
        let t = SplitTarget::from_ratio(40, 1, 3);
        let a = assemble_dataset(&p, t, &mut rng(9)).unwrap();
        let b = assemble_dataset(&p, t, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().filter(|s| s.gold_kind().is_cs()).count(), 10);
        let ids: std::collections::HashSet<&str> = a.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids.len(), 40);
    }

    #[test]
    fn insufficient_pool_reports_counts() {
        let p = pool(2, 5);
        match assemble_dataset(&p, SplitTarget { cs: 3, mono: 1 }, &mut rng(0)) {
            Err(AltgenError::InsufficientPool { cs_available, mono_available, .. }) => {
                assert_eq!((cs_available, mono_available), (2, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip_and_shape() {
        let p = pool(1, 1);
        let text = write_dataset(&p);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["gold_kind"], "cs");
        assert_eq!(first["gold"]["tokens"][0]["w"], "w0");
        assert_eq!(first["gold"]["tokens"][2]["lang"], "l2");
        assert_eq!(first["alts"]["l1"][0]["cost"], 1.5);
        assert_eq!(read_dataset(&text).unwrap(), p);
        let stats = DatasetStats::compute(&p);
        assert_eq!(stats.sentences, 4);
        assert_eq!(stats.cs_gold_fraction, 0.5);
    }
}
