//! Acceptance criteria 1-10. Runs without the libtest harness so that the
//! per-criterion verdict lines are always printed; exits non-zero if any
//! criterion fails.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use phonorank::altgen::{build_pool, write_dataset, assemble_dataset, AltType, EvalSet, GenerationConfig, Generator, SplitTarget};
use phonorank::corpus::{TaggedCorpus, Vocabulary};
use phonorank::lexicon::Lang;
use phonorank::metrics::{wer, PerplexityAccumulator};
use phonorank::neural::{check_gradients, LmConfig, LmModel, Mode, Model, Parameters, RankerConfig, RankerModel};
use phonorank::seeding::{rng, rng_for};
use phonorank::synthetic::{ToyConfig, ToyWorld};
use phonorank::training::{
    disc_loss, encode_sets, evaluate_sets, perplexity_of, rank_set, run_phase, set_loss, train, DiscData, EncodedSet,
    LmCorpora, Objective, Partition, Recipe, TrainConfig, TrainError,
};
use phonorank::wfst::{compose, nbest, Arc as FstArc, Label, SymbolTable, TableRef, Wfst, EPSILON};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

// ------------------------------------------------------------------ 1. FSTs

fn symbols() -> TableRef {
    Arc::new(["a", "b", "c"].iter().collect::<SymbolTable>())
}

/// Random acyclic transducer: arcs only go to higher-numbered states, so
/// every path can be enumerated.
fn random_fst<R: Rng>(t: &TableRef, r: &mut R) -> Wfst {
    let mut f = Wfst::new(t.clone(), t.clone());
    let n = r.gen_range(1..=6);
    for _ in 1..n {
        f.add_state();
    }
    for s in 0..n {
        if s + 1 < n {
            for _ in 0..r.gen_range(0..=3) {
                let to = r.gen_range(s + 1..n);
                let i = r.gen_range(0..=3) as Label;
                let o = r.gen_range(0..=3) as Label;
                f.add_arc(s, FstArc::new(i, o, r.gen_range(0..=4) as f64, to)).unwrap();
            }
        }
        if s == n - 1 || r.gen_bool(0.4) {
            f.set_final(s, r.gen_range(0..=2) as f64).unwrap();
        }
    }
    f
}

type Relation = BTreeMap<(Vec<Label>, Vec<Label>), f64>;

/// Every accepting path, reduced to the cheapest weight per
/// (input, output) pair with epsilons removed.
fn relation(f: &Wfst) -> Relation {
    fn walk(f: &Wfst, s: usize, i: &mut Vec<Label>, o: &mut Vec<Label>, w: f64, out: &mut Relation) {
        let fw = f.final_weight(s).value();
        if fw.is_finite() {
            let e = out.entry((i.clone(), o.clone())).or_insert(f64::INFINITY);
            *e = e.min(w + fw);
        }
        for a in f.arcs(s) {
            if a.ilabel != EPSILON {
                i.push(a.ilabel);
            }
            if a.olabel != EPSILON {
                o.push(a.olabel);
            }
            walk(f, a.nextstate, i, o, w + a.weight.value(), out);
            if a.olabel != EPSILON {
                o.pop();
            }
            if a.ilabel != EPSILON {
                i.pop();
            }
        }
    }
    let mut out = Relation::new();
    walk(f, f.start(), &mut Vec::new(), &mut Vec::new(), 0.0, &mut out);
    out
}

fn compose_oracle(a: &Relation, b: &Relation) -> Relation {
    let mut out = Relation::new();
    for ((x, y), wa) in a {
        for ((y2, z), wb) in b {
            if y == y2 {
                let e = out.entry((x.clone(), z.clone())).or_insert(f64::INFINITY);
                *e = e.min(wa + wb);
            }
        }
    }
    out
}

fn nbest_oracle(rel: &Relation, n: usize) -> Vec<(Vec<Label>, f64)> {
    let mut best: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
    for ((_, o), w) in rel {
        let e = best.entry(o.clone()).or_insert(f64::INFINITY);
        *e = e.min(*w);
    }
    let mut v: Vec<(Vec<Label>, f64)> = best.into_iter().collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(n);
    v
}

fn criterion_1() -> Verdict {
    let t0 = Instant::now();
    let t = symbols();
    let mut r = rng(2024);
    let mut failures = Vec::new();
    for case in 0..200 {
        let a = random_fst(&t, &mut r);
        let b = random_fst(&t, &mut r);
        let (ra, rb) = (relation(&a), relation(&b));
        let c = compose(&a, &b).unwrap();
        if relation(&c) != compose_oracle(&ra, &rb) {
            failures.push(format!("compose #{case}"));
        }
        let inverted: Relation = ra.iter().map(|((i, o), w)| ((o.clone(), i.clone()), *w)).collect();
        if relation(&a.invert()) != inverted {
            failures.push(format!("invert #{case}"));
        }
        for (name, f, rel) in [("nbest(a)", &a, &ra), ("nbest(a∘b)", &c, &relation(&c))] {
            let n = 1 + case % 10;
            let got: Vec<(Vec<Label>, f64)> = nbest(f, n).into_iter().map(|p| (p.output, p.weight)).collect();
            if got != nbest_oracle(rel, n) {
                failures.push(format!("{name} #{case}"));
            }
        }
    }
    let el = t0.elapsed();
    verdict(
        failures.is_empty() && el < Duration::from_secs(30),
        format!("200 random machine pairs, {} mismatches {:?}, {:.2}s", failures.len(), failures.first(), secs(el)),
    )
}

// ------------------------------------------------------------------- 2. WER

fn brute_edits(r: &[u8], h: &[u8]) -> usize {
    match (r.split_first(), h.split_first()) {
        (None, _) => h.len(),
        (_, None) => r.len(),
        (Some((a, rt)), Some((b, ht))) => {
            let sub = brute_edits(rt, ht) + usize::from(a != b);
            sub.min(brute_edits(rt, h) + 1).min(brute_edits(r, ht) + 1)
        }
    }
}

fn criterion_2() -> Verdict {
    let t0 = Instant::now();
    let mut r = rng(7);
    let mut bad = 0;
    for _ in 0..500 {
        let rl = r.gen_range(1..=6);
        let hl = r.gen_range(0..=6);
        let reference: Vec<u8> = (0..rl).map(|_| r.gen_range(0..4)).collect();
        let hyp: Vec<u8> = (0..hl).map(|_| r.gen_range(0..4)).collect();
        let w = wer(&reference, &hyp).unwrap();
        let e = brute_edits(&reference, &hyp);
        let consistent = w.edits() == e
            && w.ref_len == rl
            && w.wer == e as f64 / rl as f64
            && w.substitutions + w.deletions <= rl
            && hl + w.deletions == rl + w.insertions;
        if !consistent {
            bad += 1;
        }
    }
    let el = t0.elapsed();
    verdict(
        bad == 0 && el < Duration::from_secs(5),
        format!("500 pairs, {bad} disagreements with recursive edit distance, {:.3}s", secs(el)),
    )
}

// ------------------------------------------------------------ 3. perplexity

fn vocab_of_size(v: usize) -> Arc<Vocabulary> {
    let words: Vec<String> = (0..v - 3).map(|i| format!("w{i:03}")).collect();
    Arc::new(Vocabulary::build(words.iter().map(String::as_str), []))
}

fn criterion_3() -> Verdict {
    let mut r = rng(3);
    let mut worst_uniform: f64 = 0.0;
    for v in [2usize, 10, 100] {
        let mut acc = PerplexityAccumulator::new();
        for _ in 0..r.gen_range(5..50) {
            acc.add_prob(1.0 / v as f64).unwrap();
        }
        worst_uniform = worst_uniform.max((acc.perplexity().unwrap() - v as f64).abs());
    }
    let mut worst_model: f64 = 0.0;
    for v in [10usize, 100] {
        let cfg = LmConfig {
            emb: 4,
            hidden: 5,
            ..LmConfig::default()
        };
        let m = LmModel::zeros(cfg, vocab_of_size(v));
        let sents: Vec<Vec<u32>> = (0..20)
            .map(|_| (0..r.gen_range(1..8)).map(|_| r.gen_range(3..v as u32)).collect())
            .collect();
        worst_model = worst_model.max((perplexity_of(&m, &sents).unwrap() - v as f64).abs());
    }
    let mut worst_formula: f64 = 0.0;
    for _ in 0..100 {
        let probs: Vec<f64> = (0..r.gen_range(1..200)).map(|_| r.gen_range(1e-6..=1.0)).collect();
        let direct = 2f64.powf(-probs.iter().map(|p| p.log2()).sum::<f64>() / probs.len() as f64);
        let mut halves = (PerplexityAccumulator::new(), PerplexityAccumulator::new());
        for (k, p) in probs.iter().enumerate() {
            if k % 2 == 0 { &mut halves.0 } else { &mut halves.1 }.add_prob(*p).unwrap();
        }
        halves.0.merge(&halves.1);
        let streamed = halves.0.perplexity().unwrap();
        worst_formula = worst_formula.max((direct - streamed).abs() / direct.max(1.0));
    }
    verdict(
        worst_uniform < 1e-9 && worst_model < 1e-9 && worst_formula < 1e-12,
        format!(
            "uniform |ppl-V| {worst_uniform:.1e} (accumulator), {worst_model:.1e} (zero-weight LM); direct vs streaming {worst_formula:.1e}"
        ),
    )
}

// ---------------------------------------------------------- 4. gradcheck

fn criterion_4() -> Verdict {
    let t0 = Instant::now();
    let vocab = vocab_of_size(20);
    let mut r = rng(44);
    let sents: Vec<Vec<u32>> = (0..4)
        .map(|_| (0..r.gen_range(1..=6)).map(|_| r.gen_range(3..20u32)).collect())
        .collect();

    let lm_cfg = LmConfig {
        emb: 8,
        hidden: 12,
        ..LmConfig::default()
    };
    let lm = LmModel::new(lm_cfg, vocab.clone(), &mut rng(45));
    let noises: Vec<_> = sents.iter().map(|s| lm.noise(s, Mode::Train, &mut r)).collect();
    let mut g = lm.zeros_like();
    for (s, n) in sents.iter().zip(&noises) {
        let tape = lm.forward(s, n.clone()).unwrap();
        lm.backward(&tape, 1.0, &mut g);
    }
    let nll = |m: &LmModel| {
        sents
            .iter()
            .zip(&noises)
            .map(|(s, n)| -m.forward(s, n.clone()).unwrap().target_log_probs().iter().sum::<f64>())
            .sum::<f64>()
    };
    let lm_check = check_gradients(&lm, &g, nll, 1e-5, 1);

    // hinge loss through the BiLSTM ranker, at a point with every margin
    // violated or satisfied by a clear gap
    let rk_cfg = RankerConfig {
        emb: 8,
        hidden: 12,
        init_range: 0.3,
        ..RankerConfig::default()
    };
    let mut chosen = None;
    for seed in 0..50 {
        let m = RankerModel::new(rk_cfg.clone(), vocab.clone(), &mut rng(100 + seed));
        let set = EncodedSet {
            id: "g".into(),
            gold_kind: phonorank::altgen::GoldKind::Cs,
            partition: Partition::Cs,
            gold: sents[0].clone(),
            gold_wer: wer(&[0], &[0]).unwrap(),
            alts: sents[1..]
                .iter()
                .zip([0.25, 0.5, 1.0])
                .map(|(s, w)| phonorank::training::EncodedAlt {
                    ids: s.clone(),
                    wer: phonorank::metrics::WerBreakdown {
                        wer: w,
                        ..wer(&[0], &[0]).unwrap()
                    },
                    alt_type: AltType::Cs,
                })
                .collect(),
        };
        let g = m.score(&set.gold).unwrap();
        let margins: Vec<f64> = set.alts.iter().map(|a| a.wer.wer - (g - m.score(&a.ids).unwrap())).collect();
        if margins.iter().all(|x| x.abs() > 1e-3) && margins.iter().any(|&x| x > 0.0) {
            chosen = Some((m, set));
            break;
        }
    }
    let (rk, set) = chosen.expect("a point away from hinge kinks");
    let mut rg = rk.zeros_like();
    set_loss(&rk, &set, 1.0, Some(&mut rg)).unwrap();
    let hinge_check = check_gradients(&rk, &rg, |m| set_loss(m, &set, 1.0, None).unwrap(), 1e-5, 1);
    let el = t0.elapsed();
    verdict(
        lm_check.max_rel_err < 1e-4 && hinge_check.max_rel_err < 1e-4 && el < Duration::from_secs(60),
        format!(
            "LM cross-entropy: {} params, max rel err {:.2e}; hinge: {} params, max rel err {:.2e}; {:.1}s",
            lm_check.checked,
            lm_check.max_rel_err,
            hinge_check.checked,
            hinge_check.max_rel_err,
            secs(el)
        ),
    )
}

// ----------------------------------------------------------- 5. hinge truths

fn criterion_5() -> Verdict {
    // gold score 0 and alternative scores at minus the gap
    let a = disc_loss(0.0, &[(-0.5, 0.25), (-1.0, 0.5)]);
    let b = disc_loss(0.0, &[(-0.2, 0.5)]);
    let c = disc_loss(0.0, &[(0.1, 0.2), (-0.4, 0.5), (-1.0, 0.6)]);
    verdict(
        a == 0.0 && b == 0.3 && c == 0.4,
        format!("satisfied margins {a}, one alternative {b}, three alternatives {c}"),
    )
}

// ------------------------------------------------------ 6. dataset contract

fn check_set(set: &EvalSet, cfg: &GenerationConfig) -> Result<(), String> {
    if set.gold.word_count() < cfg.min_gold_words {
        return Err(format!("{}: gold has {} words", set.id, set.gold.word_count()));
    }
    let gold_words = set.gold.words();
    for t in AltType::ALL {
        let alts = set.alternatives.get(&t).map_or(&[][..], Vec::as_slice);
        if !(cfg.min_alternatives..=cfg.keep).contains(&alts.len()) {
            return Err(format!("{}: {} {t} alternatives", set.id, alts.len()));
        }
        if alts.iter().any(|a| phonorank::altgen::words_of(&a.tokens) == gold_words) {
            return Err(format!("{}: a {t} alternative equals the gold", set.id));
        }
    }
    Ok(())
}

fn criterion_6(world: &ToyWorld, generator: &Generator) -> Verdict {
    let corpus = world.cs_corpus(300, "c6");
    let golds = corpus.keyed();
    let target = SplitTarget::from_ratio(40, 1, 3);
    let build = |workers| {
        let pool: Vec<EvalSet> = build_pool(&golds, generator, 5, workers).into_iter().filter_map(Result::ok).collect();
        let sets = assemble_dataset(&pool, target, &mut rng_for(5, "assemble")).unwrap();
        (pool, write_dataset(&sets), sets)
    };
    let (pool1, bytes1, sets) = build(1);
    let (_, bytes4, _) = build(4);
    let violations: Vec<String> = pool1.iter().filter_map(|s| check_set(s, generator.config()).err()).collect();
    let cs = sets.iter().filter(|s| s.gold_kind().is_cs()).count();
    let phones = world.lexicon().unwrap().phones().labels().count();
    verdict(
        violations.is_empty() && cs == target.cs && sets.len() == 40 && bytes1 == bytes4 && phones == 10,
        format!(
            "{} pooled sets, {} invariant violations {:?}; 40-set sample has {cs} cs-gold (target {}); 1 vs 4 workers identical: {}",
            pool1.len(),
            violations.len(),
            violations.first(),
            target.cs,
            bytes1 == bytes4
        ),
    )
}

// --------------------------------------------------- shared synthetic task

struct Task {
    train: Vec<EvalSet>,
    dev: Vec<EvalSet>,
    mono: Vec<EvalSet>,
    generation_secs: f64,
}

fn accepted(golds: &TaggedCorpus, generator: &Generator, workers: usize) -> Vec<EvalSet> {
    build_pool(&golds.keyed(), generator, 11, workers).into_iter().filter_map(Result::ok).collect()
}

fn build_task(world: &ToyWorld, generator: &Generator) -> Task {
    let t0 = Instant::now();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let train = accepted(&world.cs_corpus(2000, "task-train"), generator, workers);
    let dev = accepted(&world.cs_corpus(400, "task-dev"), generator, workers);
    let mut mono = Vec::new();
    for lang in [Lang::L1, Lang::L2] {
        // one sixth of a 3000-line monolingual training corpus
        mono.extend(accepted(&world.mono_corpus(lang, 500, &format!("task-mono-{lang}")), generator, workers));
    }
    Task {
        train,
        dev,
        mono,
        generation_secs: secs(t0.elapsed()),
    }
}

fn sentences(sets: &[EvalSet]) -> impl Iterator<Item = &[phonorank::altgen::TaggedToken]> {
    sets.iter().flat_map(|s| s.sentences())
}

fn small_disc_config(seed: u64, epochs: usize) -> TrainConfig {
    TrainConfig {
        seed,
        max_epochs: epochs,
        finetune_epochs: epochs,
        ranker: RankerConfig {
            emb: 16,
            hidden: 16,
            ..RankerConfig::default()
        },
        ..TrainConfig::disc()
    }
}

fn baseline(dev: &[EncodedSet]) -> f64 {
    let alts = dev.iter().map(|s| s.alts.len()).sum::<usize>() as f64 / dev.len() as f64;
    100.0 / (1.0 + alts)
}

// ---------------------------------------------------- 7. learning signal

fn criterion_7(task: &Task) -> Verdict {
    let t0 = Instant::now();
    let vocab = Arc::new(Vocabulary::from_sentences(sentences(&task.train), sentences(&task.dev)));
    let train_sets = encode_sets(&task.train, &vocab, Partition::Cs).unwrap();
    let dev = encode_sets(&task.dev, &vocab, Partition::Cs).unwrap();
    let cfg = small_disc_config(1, 20);
    let recipe: Recipe = "cs_only_disc".parse().unwrap();
    let out = train(recipe, vocab, &LmCorpora::default(), &DiscData { cs: train_sets, mono: vec![] }, &[], &dev, &cfg).unwrap();
    let best = out.phases[0].best_metric.unwrap_or(0.0);
    let base = baseline(&dev);
    let first = out.phases[0]
        .epochs
        .iter()
        .find(|e| e.dev_metric >= 3.0 * base)
        .map(|e| e.epoch);
    let el = t0.elapsed().as_secs_f64() + task.generation_secs;
    verdict(
        best >= 3.0 * base && out.phases[0].epochs.len() <= 20 && el < 600.0,
        format!(
            "{} train sets; best dev accuracy {best:.2}% vs random {base:.2}% (needs {:.2}%), first reached at epoch {first:?}; {el:.0}s including generation",
            task.train.len(),
            3.0 * base
        ),
    )
}

// --------------------------------------------------------- 8. fine-tuning

fn criterion_8(task: &Task) -> Verdict {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in [1u64, 2, 3] {
        let mut subset = task.train.clone();
        subset.shuffle(&mut rng_for(seed, "quarter"));
        subset.truncate(task.train.len() / 4);
        let run = |recipe: &str, trained: Vec<&[phonorank::altgen::TaggedToken]>, other: Vec<&[phonorank::altgen::TaggedToken]>| -> Result<f64, TrainError> {
            let vocab = Arc::new(Vocabulary::from_sentences(trained, other));
            let data = DiscData {
                cs: encode_sets(&subset, &vocab, Partition::Cs)?,
                mono: encode_sets(&task.mono, &vocab, Partition::L1)?,
            };
            let dev = encode_sets(&task.dev, &vocab, Partition::Cs)?;
            let out = train(recipe.parse().unwrap(), vocab, &LmCorpora::default(), &data, &[], &dev, &small_disc_config(seed, 12))?;
            Ok(out.phases.last().and_then(|p| p.best_metric).unwrap_or(0.0))
        };
        let cs_only = run(
            "cs_only_disc",
            sentences(&subset).collect(),
            sentences(&task.dev).chain(sentences(&task.mono)).collect(),
        )
        .unwrap();
        let fine_tuned = run(
            "fine_tuned_disc",
            sentences(&subset).chain(sentences(&task.mono)).collect(),
            sentences(&task.dev).collect(),
        )
        .unwrap();
        if fine_tuned >= cs_only {
            wins += 1;
        }
        lines.push(format!("seed {seed}: fine-tuned {fine_tuned:.2} vs cs-only {cs_only:.2}"));
    }
    verdict(
        wins >= 2,
        format!("{} cs sets (25%), {} mono sets; {}; {wins}/3 seeds favour fine-tuning", task.train.len() / 4, task.mono.len(), lines.join(", ")),
    )
}

// -------------------------------------------------- 9. vocabulary extension

fn criterion_9(task: &Task) -> Verdict {
    let dev_sets = &task.dev[..task.dev.len().min(200)];
    let trained: Vec<_> = task.train.iter().map(|s| s.gold.tokens.as_slice()).collect();
    let vocab = Arc::new(Vocabulary::from_sentences(trained.iter().copied(), sentences(dev_sets)));
    let data = LmCorpora {
        cs: task.train.iter().map(|s| vocab.encode(&s.gold.tokens).unwrap()).collect(),
        ..LmCorpora::default()
    };
    let dev_sentences: Vec<Vec<u32>> = dev_sets.iter().map(|s| vocab.encode(&s.gold.tokens).unwrap()).collect();
    let cfg = TrainConfig {
        seed: 9,
        max_epochs: 3,
        lm: LmConfig {
            emb: 16,
            hidden: 16,
            ..LmConfig::default()
        },
        ..TrainConfig::lm()
    };
    let lm = match train("cs_only_lm".parse().unwrap(), vocab.clone(), &data, &DiscData::default(), &dev_sentences, &[], &cfg).unwrap().model {
        Model::Lm(m) => m,
        Model::Ranker(_) => unreachable!(),
    };
    let ranker = RankerModel::new(
        RankerConfig {
            emb: 16,
            hidden: 16,
            ..RankerConfig::default()
        },
        vocab.clone(),
        &mut rng(10),
    );

    let extra: Vec<String> = (0..200).map(|i| format!("novel{i:03}")).collect();
    let ext = Arc::new(vocab.extended(extra.iter().map(String::as_str)));
    let lm_ext = lm.with_vocab(ext.clone(), &mut rng(11)).unwrap();
    let ranker_ext = ranker.with_vocab(ext.clone(), &mut rng(12)).unwrap();

    let encoded = encode_sets(dev_sets, &vocab, Partition::Cs).unwrap();
    let encoded_ext = encode_sets(dev_sets, &ext, Partition::Cs).unwrap();
    let ppl = perplexity_of(&lm, &dev_sentences).unwrap();
    let ppl_ext = perplexity_of(&lm_ext, &dev_sentences).unwrap();

    let argmaxes = |m: &dyn Fn(&EncodedSet) -> usize, sets: &[EncodedSet]| sets.iter().map(m).collect::<Vec<_>>();
    let lm_a = argmaxes(&|s| rank_set(&lm, s).unwrap().argmax(), &encoded);
    let lm_b = argmaxes(&|s| rank_set(&lm_ext, s).unwrap().argmax(), &encoded_ext);
    let lm_flips = lm_a.iter().zip(&lm_b).filter(|(a, b)| a != b).count();
    let acc = |o: Vec<phonorank::metrics::SetOutcome>| o.iter().filter(|o| o.correct).count();
    let lm_acc = (acc(evaluate_sets(&lm, &encoded).unwrap()), acc(evaluate_sets(&lm_ext, &encoded_ext).unwrap()));
    let rk_scores_equal = encoded.iter().zip(&encoded_ext).all(|(a, b)| rank_set(&ranker, a).unwrap().scores == rank_set(&ranker_ext, b).unwrap().scores);

    verdict(
        ppl != ppl_ext && lm_flips == 0 && lm_acc.0 == lm_acc.1 && rk_scores_equal,
        format!(
            "+{} frozen tokens: LM perplexity {ppl:.4} -> {ppl_ext:.4}; LM argmax changed in {lm_flips}/{} sets, correct {} -> {}; ranker scores bit-identical: {rk_scores_equal}",
            ext.len() - vocab.len(),
            encoded.len(),
            lm_acc.0,
            lm_acc.1
        ),
    )
}

// ------------------------------------------------- 10. best-checkpoint policy

fn oracle_schedule(metrics: &[f64], objective: Objective, lr0: f64, decay: f64) -> (Vec<f64>, usize) {
    let mut lr = lr0;
    let mut lrs = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    for (e, &m) in metrics.iter().enumerate() {
        lrs.push(lr);
        let better = match best {
            None => true,
            Some((_, b)) => match objective {
                Objective::Maximize => m > b,
                Objective::Minimize => m < b,
            },
        };
        if better {
            best = Some((e, m));
        } else {
            lr /= decay;
        }
    }
    (lrs, best.map_or(0, |b| b.0))
}

fn criterion_10() -> Verdict {
    let mut r = rng(10);
    let mut cases: Vec<(Vec<f64>, Objective)> = vec![
        (vec![10.0, 12.0, 11.0, 15.0, 15.0, 9.0, 20.0, 3.0], Objective::Maximize),
        (vec![90.0, 80.0, 85.0, 80.0, 70.0, 71.0, 72.0], Objective::Minimize),
    ];
    for _ in 0..200 {
        let n = r.gen_range(1..15);
        let obj = if r.gen_bool(0.5) { Objective::Maximize } else { Objective::Minimize };
        cases.push(((0..n).map(|_| r.gen_range(0..6) as f64).collect(), obj));
    }
    let cfg = TrainConfig {
        lr: 1.0,
        lr_decay: 2.5,
        min_lr: 0.0,
        ..TrainConfig::disc()
    };
    let mut bad = 0;
    let mut ratio_checks = 0;
    for (metrics, obj) in &cases {
        let out = run_phase(
            usize::MAX,
            &cfg,
            metrics.len(),
            *obj,
            |m, e, _| {
                *m = e;
                Ok(0.0)
            },
            |m| Ok(metrics[*m]),
        )
        .unwrap();
        let (lrs, best) = oracle_schedule(metrics, *obj, cfg.lr, 2.5);
        let got: Vec<f64> = out.history.iter().map(|e| e.lr).collect();
        let mut ok = got == lrs && out.model == best && out.best_epoch == Some(best) && out.best_metric == Some(metrics[best]);
        for w in out.history.windows(2) {
            if !w[0].improved {
                ratio_checks += 1;
                ok &= (w[0].lr / w[1].lr - 2.5).abs() < 1e-12;
            } else {
                ok &= w[0].lr == w[1].lr;
            }
        }
        if !ok {
            bad += 1;
        }
    }
    verdict(
        bad == 0,
        format!("{} injected metric sequences, {bad} disagreements; {ratio_checks} non-improving epochs each cut lr by 2.5x", cases.len()),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut record = |n: usize, name: &'static str, v: Verdict| {
        println!("criterion {n:>2} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((n, name, v));
    };
    record(1, "fst oracle equivalence", criterion_1());
    record(2, "wer oracle", criterion_2());
    record(3, "perplexity identities", criterion_3());
    record(4, "gradient check", criterion_4());
    record(5, "hinge-loss unit truths", criterion_5());

    let world = ToyWorld::new(ToyConfig::default());
    let generator = world.generator(GenerationConfig::default()).unwrap();
    record(6, "dataset contract", criterion_6(&world, &generator));
    let task = build_task(&world, &generator);
    record(7, "end-to-end learning signal", criterion_7(&task));
    record(8, "fine-tuning trend at 25% cs data", criterion_8(&task));
    record(9, "vocabulary extension", criterion_9(&task));
    record(10, "best-checkpoint policy", criterion_10());

    println!();
    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| r.0.to_string()).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failing: {}", failed.join(", "));
        std::process::exit(1);
    }
}
