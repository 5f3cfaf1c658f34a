use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{resolve, resolve_seed, CliError};
use crate::altgen::{
    assemble_dataset, build_pool, read_dataset, write_dataset, AltType, DatasetStats, EvalSet, GenerationConfig,
    Generator, GoldKind, PoolSummary, SplitTarget, TaggedToken,
};
use crate::corpus::{load_monolingual, load_tagged, split, Split, SplitManifest, TaggedCorpus, Vocabulary};
use crate::lexicon::{
    apply_phoneme_map, load_pron_dict, Lang, Lexicon, PhonemeMap, SimilarPhonemes, Unigrams,
    WordFilter,
};
use crate::metrics::EvalReport;
use crate::neural::{checkpoint_bytes, load_checkpoint, Model};
use crate::seeding::rng_for;
use crate::training::{
    encode_sets, evaluate_sets, perplexity_of, sha256_hex, train, DiscData, EncodedSet, EvalEntry, LmCorpora,
    ModelKind, Partition, Protocol, Recipe, RunManifest, TrainConfig,
};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config serializes")
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::Config(format!("missing required key {key:?}")))
}

/// Reads files and remembers their digests for the run manifest.
#[derive(Default)]
struct Inputs {
    hashes: BTreeMap<String, String>,
}

impl Inputs {
    fn text(&mut self, path: &Path) -> Result<String, CliError> {
        let t = read_text(path)?;
        self.hashes.insert(path.display().to_string(), sha256_hex(t.as_bytes()));
        Ok(t)
    }

    fn tagged(&mut self, path: &Path) -> Result<TaggedCorpus, CliError> {
        let text = self.text(path)?;
        let name = path.file_name().map_or_else(String::new, |n| n.to_string_lossy().replace(".tagged", ""));
        Ok(load_tagged(&name, text.as_bytes())?)
    }

    fn dataset(&mut self, path: &Path) -> Result<Vec<EvalSet>, CliError> {
        let text = self.text(path)?;
        read_dataset(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

// ---------------------------------------------------------------- prep-corpus

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepCorpusConfig {
    /// Tagged `surface/lang` code-switched corpus.
    pub cs_corpus: Option<PathBuf>,
    /// Plain-text monolingual corpora.
    pub mono_l1: Option<PathBuf>,
    pub mono_l2: Option<PathBuf>,
    /// Keep only the first N monolingual lines.
    pub mono_lines: Option<usize>,
    pub out_dir: PathBuf,
    pub ratios: [f64; 3],
    pub seed: Option<u64>,
}

impl PrepCorpusConfig {
    pub fn defaults() -> Value {
        to_value(&PrepCorpusConfig {
            cs_corpus: None,
            mono_l1: None,
            mono_l2: None,
            mono_lines: None,
            out_dir: PathBuf::from("data"),
            ratios: [0.6, 0.2, 0.2],
            seed: None,
        })
    }
}

fn write_splits(corpus: &TaggedCorpus, prefix: &str, cfg: &PrepCorpusConfig, seed: u64) -> Result<SplitManifest, CliError> {
    let (parts, manifest) = split(corpus, cfg.ratios, seed)?;
    for p in &parts {
        let s = p.split.expect("split parts are labelled");
        write_text(&cfg.out_dir.join(format!("{prefix}.{s}.tagged")), &p.to_tagged_text())?;
    }
    log::info!(
        "{prefix}: {} train / {} dev / {} test",
        parts[0].len(),
        parts[1].len(),
        parts[2].len()
    );
    Ok(manifest)
}

/// Cleans and splits the corpora into `out_dir`: `cs.{split}.tagged`,
/// `mono.{l1,l2}.{split}.tagged` and `splits.json`.
pub fn cmd_prep_corpus(cfg: &PrepCorpusConfig) -> Result<(), CliError> {
    let seed = resolve_seed(cfg.seed)?;
    if cfg.cs_corpus.is_none() && cfg.mono_l1.is_none() && cfg.mono_l2.is_none() {
        return Err(CliError::Config("nothing to prepare: set cs_corpus, mono_l1 or mono_l2".into()));
    }
    let mut manifests = BTreeMap::new();
    if let Some(path) = &cfg.cs_corpus {
        let corpus = load_tagged("cs", read_text(path)?.as_bytes())?;
        manifests.insert("cs".to_string(), write_splits(&corpus, "cs", cfg, seed)?);
    }
    for (lang, path) in [(Lang::L1, &cfg.mono_l1), (Lang::L2, &cfg.mono_l2)] {
        let Some(path) = path else { continue };
        let mut text = read_text(path)?;
        if let Some(n) = cfg.mono_lines {
            text = text.lines().take(n).map(|l| format!("{l}\n")).collect();
        }
        let name = format!("mono.{lang}");
        let corpus = load_monolingual(&name, text.as_bytes(), lang)?;
        manifests.insert(name.clone(), write_splits(&corpus, &name, cfg, seed)?);
    }
    write_text(
        &cfg.out_dir.join("splits.json"),
        &serde_json::to_string_pretty(&manifests).expect("manifest serializes"),
    )
}

// ---------------------------------------------------------------- gen-dataset

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenDatasetConfig {
    /// Directory written by `prep-corpus`.
    pub data_dir: PathBuf,
    /// Defaults to `data_dir`.
    pub out_dir: Option<PathBuf>,
    pub l1_dict: Option<PathBuf>,
    pub l2_dict: Option<PathBuf>,
    /// `identity`, `spanish` or a `SRC<TAB>TGT` file.
    pub l1_phonemap: String,
    pub l2_phonemap: String,
    pub l1_unigrams: Option<PathBuf>,
    pub l2_unigrams: Option<PathBuf>,
    /// Similar-phoneme pairs; the built-in English/Spanish list when unset.
    pub similar: Option<PathBuf>,
    /// Drop frequent single-letter words from decoding.
    pub stoplist: bool,
    pub dev_size: usize,
    pub test_size: usize,
    pub cs_parts: usize,
    pub mono_parts: usize,
    /// Share of monolingual training lines turned into pretraining sets.
    pub mono_fraction: f64,
    /// Give monolingual pretraining golds all three alternative types
    /// (otherwise only alternatives in the gold's own language).
    pub mono_all_types: bool,
    pub workers: usize,
    pub seed: Option<u64>,
    pub generation: GenerationConfig,
}

impl GenDatasetConfig {
    pub fn defaults() -> Value {
        to_value(&GenDatasetConfig {
            data_dir: PathBuf::from("data"),
            out_dir: None,
            l1_dict: None,
            l2_dict: None,
            l1_phonemap: "identity".into(),
            l2_phonemap: "identity".into(),
            l1_unigrams: None,
            l2_unigrams: None,
            similar: None,
            stoplist: true,
            dev_size: 1000,
            test_size: 1000,
            cs_parts: 1,
            mono_parts: 3,
            mono_fraction: 1.0 / 6.0,
            mono_all_types: true,
            workers: 1,
            seed: None,
            generation: GenerationConfig::default(),
        })
    }
}

fn phoneme_map(choice: &str) -> Result<Option<PhonemeMap>, CliError> {
    Ok(match choice {
        "identity" | "" => None,
        "spanish" => Some(PhonemeMap::spanish_to_cmu()),
        path => Some(PhonemeMap::read(read_text(Path::new(path))?.as_bytes())?),
    })
}

fn load_lexicon(cfg: &GenDatasetConfig) -> Result<Lexicon, CliError> {
    let mut b = Lexicon::builder().filter(if cfg.stoplist { WordFilter::default() } else { WordFilter::none() });
    for (lang, dict, map, uni) in [
        (Lang::L1, &cfg.l1_dict, &cfg.l1_phonemap, &cfg.l1_unigrams),
        (Lang::L2, &cfg.l2_dict, &cfg.l2_phonemap, &cfg.l2_unigrams),
    ] {
        let path = required(dict, &format!("{lang}_dict"))?;
        let mut frag = load_pron_dict(read_text(path)?.as_bytes(), lang)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if let Some(m) = phoneme_map(map)? {
            frag = apply_phoneme_map(&frag, &m)?;
        }
        b = b.fragment(frag);
        match uni {
            Some(p) => b = b.unigrams(lang, Unigrams::read(read_text(p)?.as_bytes())?),
            None => log::warn!("no {lang} unigram table; every {lang} word gets the floor probability"),
        }
    }
    Ok(b.build()?)
}

fn similar_phonemes(cfg: &GenDatasetConfig) -> Result<SimilarPhonemes, CliError> {
    let g = &cfg.generation;
    let pairs = match &cfg.similar {
        Some(p) => SimilarPhonemes::read_pairs(read_text(p)?.as_bytes())?,
        None => SimilarPhonemes::cmu_default().pairs,
    };
    Ok(SimilarPhonemes::new(pairs, g.sub_cost, g.del_cost)?)
}

/// Per-file statistics sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub pool: PoolSummary,
    pub stats: DatasetStats,
}

fn pool_of(
    name: &str,
    corpus: &TaggedCorpus,
    generator: &Generator,
    cfg: &GenDatasetConfig,
    seed: u64,
) -> (Vec<EvalSet>, PoolSummary) {
    log::info!("{name}: generating alternatives for {} sentences", corpus.len());
    let results = build_pool(&corpus.keyed(), generator, seed, cfg.workers);
    let summary = PoolSummary::from_results(&results);
    log::info!(
        "{name}: {} accepted, {} too short, {} oov, {} too few alternatives",
        summary.accepted,
        summary.too_short,
        summary.oov,
        summary.too_few_alternatives
    );
    (results.into_iter().filter_map(Result::ok).collect(), summary)
}

fn emit(out_dir: &Path, name: &str, sets: &[EvalSet], pool: PoolSummary) -> Result<DatasetStats, CliError> {
    write_text(&out_dir.join(format!("{name}.jsonl")), &write_dataset(sets))?;
    let side = DatasetSidecar {
        pool,
        stats: DatasetStats::compute(sets),
    };
    write_text(
        &out_dir.join(format!("{name}.stats.json")),
        &serde_json::to_string_pretty(&side).expect("stats serialize"),
    )?;
    Ok(side.stats)
}

fn own_language_only(mut set: EvalSet) -> EvalSet {
    let keep = match set.gold_kind() {
        GoldKind::MonoL1 => AltType::L1,
        GoldKind::MonoL2 => AltType::L2,
        GoldKind::Cs => return set,
    };
    set.alternatives.retain(|t, _| *t == keep);
    set
}

/// Writes `dev.jsonl`, `test.jsonl` (sampled at the configured CS:mono
/// ratio), `train.jsonl` (every accepted training gold) and, when monolingual
/// splits exist, `mono_train.jsonl`; each with a `.stats.json` sidecar.
pub fn cmd_gen_dataset(cfg: &GenDatasetConfig) -> Result<BTreeMap<String, DatasetStats>, CliError> {
    let seed = resolve_seed(cfg.seed)?;
    if !(0.0..=1.0).contains(&cfg.mono_fraction) {
        return Err(CliError::Config(format!("mono_fraction {} is not in [0, 1]", cfg.mono_fraction)));
    }
    if cfg.cs_parts + cfg.mono_parts == 0 {
        return Err(CliError::Config("cs_parts + mono_parts must be positive".into()));
    }
    let lex = Arc::new(load_lexicon(cfg)?);
    let generator = Generator::new(lex, &similar_phonemes(cfg)?, cfg.generation.clone())?;
    let out_dir = cfg.out_dir.clone().unwrap_or_else(|| cfg.data_dir.clone());
    let mut inputs = Inputs::default();
    let mut stats = BTreeMap::new();

    for (split, size) in [(Split::Dev, cfg.dev_size), (Split::Test, cfg.test_size)] {
        let corpus = inputs.tagged(&cfg.data_dir.join(format!("cs.{split}.tagged")))?;
        let (pool, summary) = pool_of(split.as_str(), &corpus, &generator, cfg, seed);
        let target = SplitTarget::from_ratio(size, cfg.cs_parts, cfg.mono_parts);
        let sets = assemble_dataset(&pool, target, &mut rng_for(seed, &format!("assemble:{split}")))
            .map_err(|e| CliError::Data(format!("{split}: {e}")))?;
        stats.insert(split.to_string(), emit(&out_dir, split.as_str(), &sets, summary)?);
    }

    let corpus = inputs.tagged(&cfg.data_dir.join("cs.train.tagged"))?;
    let (train_sets, summary) = pool_of("train", &corpus, &generator, cfg, seed);
    stats.insert("train".into(), emit(&out_dir, "train", &train_sets, summary)?);

    let mut mono_sets = Vec::new();
    let mut mono_summary = PoolSummary::default();
    let mut any_mono = false;
    for lang in [Lang::L1, Lang::L2] {
        let path = cfg.data_dir.join(format!("mono.{lang}.train.tagged"));
        if !path.exists() {
            continue;
        }
        any_mono = true;
        let full = inputs.tagged(&path)?;
        let n = (full.len() as f64 * cfg.mono_fraction).round() as usize;
        let mut idx = sample(&mut rng_for(seed, &format!("mono-sample:{lang}")), full.len(), n).into_vec();
        idx.sort_unstable();
        let mut part = TaggedCorpus::new(&full.source);
        for i in idx {
            part.push(full.lines[i], full.sentences[i].clone());
        }
        let (sets, s) = pool_of(&format!("mono {lang}"), &part, &generator, cfg, seed);
        mono_summary.accepted += s.accepted;
        mono_summary.too_short += s.too_short;
        mono_summary.oov += s.oov;
        mono_summary.too_few_alternatives += s.too_few_alternatives;
        mono_sets.extend(sets.into_iter().map(|s| if cfg.mono_all_types { s } else { own_language_only(s) }));
    }
    if any_mono {
        stats.insert("mono_train".into(), emit(&out_dir, "mono_train", &mono_sets, mono_summary)?);
    }
    Ok(stats)
}

// ---------------------------------------------------------------------- train

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub protocol: Recipe,
    /// Directory holding the prepared corpora and generated datasets.
    pub data_dir: PathBuf,
    /// Defaults to `runs/<protocol>`.
    pub out_dir: Option<PathBuf>,
    /// After training, extend the vocabulary with every monolingual token
    /// (frozen, untrained) before evaluating and saving.
    pub extend_vocab_with_mono: bool,
    pub seed: Option<u64>,
    pub train: TrainConfig,
}

impl TrainRunConfig {
    /// Defaults depend on the model kind named by `protocol`.
    pub fn resolve(user: Value) -> Result<Self, CliError> {
        let protocol: Recipe = match user.get("protocol") {
            Some(Value::String(s)) => s.parse().map_err(CliError::Config)?,
            Some(v) => return Err(CliError::Config(format!("protocol must be a string, got {v}"))),
            None => return Err(CliError::Config("missing required key \"protocol\"".into())),
        };
        let defaults = to_value(&TrainRunConfig {
            protocol,
            data_dir: PathBuf::from("data"),
            out_dir: None,
            extend_vocab_with_mono: false,
            seed: None,
            train: TrainConfig::for_kind(protocol.kind),
        });
        let mut cfg: TrainRunConfig = resolve(defaults, user)?;
        cfg.seed = Some(resolve_seed(cfg.seed)?);
        cfg.train.seed = cfg.seed.unwrap_or_default();
        Ok(cfg)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("runs").join(self.protocol.to_string()))
    }
}

fn uses_mono(p: Protocol) -> bool {
    !matches!(p, Protocol::CsOnly)
}

fn encode_corpus(c: &TaggedCorpus, vocab: &Vocabulary) -> Result<Vec<Vec<u32>>, CliError> {
    c.token_slices()
        .map(|t| vocab.encode(t).map_err(CliError::from))
        .collect()
}

fn set_sentences(sets: &[EvalSet]) -> impl Iterator<Item = &[TaggedToken]> {
    sets.iter().flat_map(|s| s.sentences())
}

/// Evaluates `model` on `sets`; LMs also get perplexity over `ppl_corpus`.
fn evaluate_model(
    model: &Model,
    sets: &[EvalSet],
    ppl_corpus: Option<&[Vec<u32>]>,
) -> Result<EvalReport, CliError> {
    let vocab = model.vocab();
    let encoded = encode_sets(sets, vocab, Partition::Cs)
        .map_err(|e| CliError::Data(format!("dataset is incompatible with the checkpoint vocabulary: {e}")))?;
    Ok(match model {
        Model::Lm(m) => {
            let outcomes = evaluate_sets(m, &encoded)?;
            let ppl = match ppl_corpus {
                Some(c) if !c.is_empty() => Some(perplexity_of(m, c)?),
                _ => None,
            };
            EvalReport::from_outcomes(&outcomes, ppl)
        }
        Model::Ranker(m) => EvalReport::from_outcomes(&evaluate_sets(m, &encoded)?, None),
    })
}

/// Trains `cfg.protocol` and writes `model.ckpt` and `manifest.json` into
/// the output directory. Dev and test datasets, when present, are evaluated
/// into the manifest.
pub fn cmd_train(cfg: &TrainRunConfig) -> Result<RunManifest, CliError> {
    let recipe = cfg.protocol;
    let dir = &cfg.data_dir;
    let seed = cfg.train.seed;
    let mut inputs = Inputs::default();
    let opt_tagged = |inputs: &mut Inputs, name: &str| -> Result<Option<TaggedCorpus>, CliError> {
        let p = dir.join(name);
        if p.exists() {
            inputs.tagged(&p).map(Some)
        } else {
            Ok(None)
        }
    };
    let opt_sets = |inputs: &mut Inputs, name: &str| -> Result<Option<Vec<EvalSet>>, CliError> {
        let p = dir.join(name);
        if p.exists() {
            inputs.dataset(&p).map(Some)
        } else {
            Ok(None)
        }
    };
    let missing = |name: &str| CliError::Data(format!("{recipe} needs {}", dir.join(name).display()));

    let cs_dev = opt_tagged(&mut inputs, "cs.dev.tagged")?;
    let cs_test = opt_tagged(&mut inputs, "cs.test.tagged")?;
    let dev_sets = opt_sets(&mut inputs, "dev.jsonl")?;
    let test_sets = opt_sets(&mut inputs, "test.jsonl")?;
    let mono_name = |lang: Lang, s: Split| format!("mono.{lang}.{s}.tagged");

    let mut trained: Vec<Vec<TaggedToken>> = Vec::new();
    let mut untrained: Vec<Vec<TaggedToken>> = Vec::new();
    let mut cs_train = None;
    let mut mono_train: [Option<TaggedCorpus>; 2] = [None, None];
    let mut disc_cs = Vec::new();
    let mut disc_mono = Vec::new();
    match recipe.kind {
        ModelKind::Lm => {
            if cs_dev.is_none() {
                return Err(missing("cs.dev.tagged"));
            }
            let wants_cs = matches!(
                recipe.protocol,
                Protocol::CsOnly | Protocol::AllShuffled | Protocol::AllCsLast | Protocol::FineTuned
            );
            if wants_cs {
                let c = opt_tagged(&mut inputs, "cs.train.tagged")?.ok_or_else(|| missing("cs.train.tagged"))?;
                trained.extend(c.sentences.iter().map(|s| s.tokens.clone()));
                cs_train = Some(c);
            }
            for (k, lang) in [Lang::L1, Lang::L2].into_iter().enumerate() {
                let wanted = match recipe.protocol {
                    Protocol::L1Only => lang == Lang::L1,
                    Protocol::L2Only => lang == Lang::L2,
                    Protocol::CsOnly => false,
                    _ => true,
                };
                if wanted {
                    let name = mono_name(lang, Split::Train);
                    let c = opt_tagged(&mut inputs, &name)?.ok_or_else(|| missing(&name))?;
                    trained.extend(c.sentences.iter().map(|s| s.tokens.clone()));
                    mono_train[k] = Some(c);
                }
            }
        }
        ModelKind::Disc => {
            if dev_sets.is_none() {
                return Err(missing("dev.jsonl"));
            }
            disc_cs = opt_sets(&mut inputs, "train.jsonl")?.ok_or_else(|| missing("train.jsonl"))?;
            trained.extend(set_sentences(&disc_cs).map(<[TaggedToken]>::to_vec));
            if recipe.protocol == Protocol::FineTuned {
                disc_mono = opt_sets(&mut inputs, "mono_train.jsonl")?.ok_or_else(|| missing("mono_train.jsonl"))?;
                trained.extend(set_sentences(&disc_mono).map(<[TaggedToken]>::to_vec));
            }
        }
    }
    for c in [&cs_dev, &cs_test].into_iter().flatten() {
        untrained.extend(c.sentences.iter().map(|s| s.tokens.clone()));
    }
    for s in [&dev_sets, &test_sets].into_iter().flatten() {
        untrained.extend(set_sentences(s).map(<[TaggedToken]>::to_vec));
    }
    if uses_mono(recipe.protocol) {
        for lang in [Lang::L1, Lang::L2] {
            for s in [Split::Dev, Split::Test] {
                if let Some(c) = opt_tagged(&mut inputs, &mono_name(lang, s))? {
                    untrained.extend(c.sentences.iter().map(|s| s.tokens.clone()));
                }
            }
        }
    }
    let vocab = Arc::new(Vocabulary::from_sentences(
        trained.iter().map(Vec::as_slice),
        untrained.iter().map(Vec::as_slice),
    ));
    log::info!(
        "{recipe}: vocabulary of {} tokens, {} trainable",
        vocab.len(),
        vocab.trainable_count()
    );

    let mut lm_data = LmCorpora::default();
    if let Some(c) = &cs_train {
        lm_data.cs = encode_corpus(c, &vocab)?;
    }
    if let Some(c) = &mono_train[0] {
        lm_data.l1 = encode_corpus(c, &vocab)?;
    }
    if let Some(c) = &mono_train[1] {
        lm_data.l2 = encode_corpus(c, &vocab)?;
    }
    let dev_sentences = match &cs_dev {
        Some(c) if recipe.kind == ModelKind::Lm => encode_corpus(c, &vocab)?,
        _ => Vec::new(),
    };
    let disc_data = DiscData {
        cs: encode_sets(&disc_cs, &vocab, Partition::Cs)?,
        mono: encode_sets(&disc_mono, &vocab, Partition::L1)?
            .into_iter()
            .map(|mut s| {
                if s.gold_kind == GoldKind::MonoL2 {
                    s.partition = Partition::L2;
                }
                s
            })
            .collect(),
    };
    let dev_encoded: Vec<EncodedSet> = match (&dev_sets, recipe.kind) {
        (Some(s), ModelKind::Disc) => encode_sets(s, &vocab, Partition::Cs)?,
        _ => Vec::new(),
    };

    let outcome = train(recipe, vocab.clone(), &lm_data, &disc_data, &dev_sentences, &dev_encoded, &cfg.train)?;
    let mut model = outcome.model;
    if cfg.extend_vocab_with_mono {
        let mut extra: Vec<String> = Vec::new();
        for lang in [Lang::L1, Lang::L2] {
            for s in [Split::Train, Split::Dev, Split::Test] {
                if let Some(c) = opt_tagged(&mut inputs, &mono_name(lang, s))? {
                    extra.extend(c.token_slices().flatten().map(|t| t.surface.clone()));
                }
            }
        }
        let ext = Arc::new(vocab.extended(extra.iter().map(String::as_str)));
        log::info!("extending vocabulary by {} frozen tokens", ext.len() - vocab.len());
        model = model.with_vocab(ext, &mut rng_for(seed, "extend-vocab"))?;
    }

    let out_dir = cfg.out_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    let ckpt_path = out_dir.join("model.ckpt");
    let bytes = checkpoint_bytes(&model);
    std::fs::write(&ckpt_path, &bytes).map_err(|e| CliError::io(&ckpt_path, e))?;

    let mut evaluations = BTreeMap::new();
    for (name, sets, corpus) in [("dev", &dev_sets, &cs_dev), ("test", &test_sets, &cs_test)] {
        let Some(sets) = sets else { continue };
        let ppl = match (&model, corpus) {
            (Model::Lm(_), Some(c)) => Some(encode_corpus(c, model.vocab())?),
            _ => None,
        };
        let report = evaluate_model(&model, sets, ppl.as_deref())?;
        log::info!("{recipe} {name}: accuracy {:.2}, wer {:.2}", report.accuracy, report.wer);
        let file = dir.join(format!("{name}.jsonl"));
        evaluations.insert(
            name.to_string(),
            EvalEntry {
                dataset: file.display().to_string(),
                dataset_sha256: inputs.hashes.get(&file.display().to_string()).cloned().unwrap_or_default(),
                report,
            },
        );
    }

    let manifest = RunManifest {
        recipe,
        seed,
        config: to_value(cfg),
        data_sha256: inputs.hashes,
        phases: outcome.phases,
        audit: outcome.audit,
        checkpoint: Some(ckpt_path.display().to_string()),
        checkpoint_sha256: Some(sha256_hex(&bytes)),
        evaluations,
    };
    write_text(&out_dir.join("manifest.json"), &manifest.to_json())?;
    Ok(manifest)
}

// ------------------------------------------------------------------- evaluate

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub checkpoint: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    /// Tagged corpus for perplexity; the dataset's gold sentences if unset.
    pub corpus: Option<PathBuf>,
    /// Writes `<out>.json` and `<out>.txt` when set.
    pub out: Option<PathBuf>,
}

impl EvaluateConfig {
    pub fn defaults() -> Value {
        to_value(&EvaluateConfig {
            checkpoint: None,
            dataset: None,
            corpus: None,
            out: None,
        })
    }
}

/// Accuracy, WER, the CS-gold / mono-gold breakdown and (for language
/// models) perplexity of a checkpoint on a dataset.
pub fn cmd_evaluate(cfg: &EvaluateConfig) -> Result<EvalReport, CliError> {
    let ckpt = required(&cfg.checkpoint, "checkpoint")?;
    let model = load_checkpoint(ckpt).map_err(|e| CliError::Data(format!("{}: {e}", ckpt.display())))?;
    let mut inputs = Inputs::default();
    let sets = inputs.dataset(required(&cfg.dataset, "dataset")?)?;
    let ppl = match &model {
        Model::Lm(_) => {
            let sentences: Vec<Vec<TaggedToken>> = match &cfg.corpus {
                Some(p) => inputs.tagged(p)?.sentences.into_iter().map(|s| s.tokens).collect(),
                None => sets.iter().map(|s| s.gold.tokens.clone()).collect(),
            };
            let ids = sentences
                .iter()
                .map(|t| model.vocab().encode(t))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Data(format!("perplexity corpus is incompatible with the checkpoint: {e}")))?;
            Some(ids)
        }
        Model::Ranker(_) => None,
    };
    let report = evaluate_model(&model, &sets, ppl.as_deref())?;
    if let Some(out) = &cfg.out {
        write_text(&out.with_extension("json"), &report.to_json())?;
        write_text(&out.with_extension("txt"), &report.to_text())?;
    }
    Ok(report)
}

// --------------------------------------------------------------------- report

/// One line of the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub run: String,
    pub recipe: String,
    pub seed: u64,
    pub dev_perplexity: Option<f64>,
    pub dev_accuracy: Option<f64>,
    pub test_perplexity: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub test_wer: Option<f64>,
}

/// Rows for `manifests`, sorted by test accuracy, best first.
pub fn report_rows(manifests: &[(String, RunManifest)]) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = manifests
        .iter()
        .map(|(run, m)| {
            let e = |split: &str| m.evaluations.get(split).map(|e| &e.report);
            ReportRow {
                run: run.clone(),
                recipe: m.recipe.to_string(),
                seed: m.seed,
                dev_perplexity: e("dev").and_then(|r| r.perplexity),
                dev_accuracy: e("dev").map(|r| r.accuracy),
                test_perplexity: e("test").and_then(|r| r.perplexity),
                test_accuracy: e("test").map(|r| r.accuracy),
                test_wer: e("test").map(|r| r.wer),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &ReportRow| r.test_accuracy.unwrap_or(f64::NEG_INFINITY);
        key(b).total_cmp(&key(a)).then_with(|| a.run.cmp(&b.run))
    });
    rows
}

/// Fixed-width table; missing values print as `--`.
pub fn render_table(rows: &[ReportRow]) -> String {
    let f = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |x| format!("{x:.2}"));
    let run_w = rows.iter().map(|r| r.run.len()).max().unwrap_or(0).max(3);
    let rec_w = rows.iter().map(|r| r.recipe.len()).max().unwrap_or(0).max(6);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<run_w$}  {:<rec_w$}  {:>6}  {:>10}  {:>8}  {:>10}  {:>8}  {:>8}",
        "run", "recipe", "seed", "dev perp", "dev acc", "test perp", "test acc", "test wer"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<run_w$}  {:<rec_w$}  {:>6}  {:>10}  {:>8}  {:>10}  {:>8}  {:>8}",
            r.run,
            r.recipe,
            r.seed,
            f(r.dev_perplexity),
            f(r.dev_accuracy),
            f(r.test_perplexity),
            f(r.test_accuracy),
            f(r.test_wer)
        );
    }
    s
}

/// Comparison table across run manifests, as text or JSON rows.
pub fn cmd_report(paths: &[PathBuf], json: bool) -> Result<String, CliError> {
    if paths.is_empty() {
        return Err(CliError::Usage("report needs at least one manifest".into()));
    }
    let mut manifests = Vec::new();
    for p in paths {
        let m = RunManifest::from_json(&read_text(p)?).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
        let run = p
            .parent()
            .and_then(|d| d.file_name())
            .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
        manifests.push((run, m));
    }
    let rows = report_rows(&manifests);
    Ok(if json {
        serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"
    } else {
        render_table(&rows)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(run: &str, acc: Option<f64>) -> ReportRow {
        ReportRow {
            run: run.into(),
            recipe: "cs_only_disc".into(),
            seed: 1,
            dev_perplexity: None,
            dev_accuracy: acc,
            test_perplexity: Some(12.5),
            test_accuracy: acc,
            test_wer: Some(3.0),
        }
    }

    #[test]
    fn table_round_trips_through_json() {
        let rows = vec![row("a", Some(50.0)), row("b", None)];
        let json = serde_json::to_string(&rows).unwrap();
        let back: Vec<ReportRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(render_table(&back), render_table(&rows));
        let t = render_table(&rows);
        assert_eq!(t.lines().count(), 3);
        assert!(t.lines().nth(2).unwrap().contains("--"));
    }

    #[test]
    fn own_language_filter_keeps_cs_golds() {
        let set = EvalSet {
            id: "x".into(),
            gold: crate::altgen::GoldSentence::parse("a/l1 b/l1 c/l1").unwrap(),
            alternatives: AltType::ALL.iter().map(|t| (*t, Vec::new())).collect(),
        };
        assert_eq!(own_language_only(set).alternatives.keys().collect::<Vec<_>>(), [&AltType::L1]);
    }
}
