//! Command-line front end: `gen-dataset`, `prep-corpus`, `train`, `evaluate`
//! and `report`.
//!
//! Every command reads a TOML config (`--config FILE`) and then applies
//! `--key value` overrides. Keys may be dotted (`--train.lr 0.5`) and dashes
//! are read as underscores (`--dev-size 40`). Values are parsed as JSON when
//! possible and kept as strings otherwise.

mod commands;

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::altgen::AltgenError;
use crate::corpus::CorpusError;
use crate::lexicon::LexiconError;
use crate::metrics::MetricsError;
use crate::neural::NeuralError;
use crate::training::TrainError;

pub use commands::{
    cmd_evaluate, cmd_gen_dataset, cmd_prep_corpus, cmd_report, cmd_train, render_table, report_rows, EvaluateConfig,
    GenDatasetConfig, PrepCorpusConfig, ReportRow, TrainRunConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

pub const SEED_ENV: &str = "PHONORANK_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        match e {
            NeuralError::NonFinite(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Neural(n) => n.into(),
            TrainError::Metrics(m) => m.into(),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::EmptyReference => CliError::Data(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidRatios(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::InvalidCost(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<AltgenError> for CliError {
    fn from(e: AltgenError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Parsed command line, before any config file is read.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Invocation {
    pub command: String,
    pub config: Option<PathBuf>,
    pub overrides: Vec<(String, Value)>,
    pub positional: Vec<String>,
    pub quiet: bool,
    pub verbose: bool,
    pub json: bool,
    pub help: bool,
}

const COMMANDS: [&str; 5] = ["gen-dataset", "prep-corpus", "train", "evaluate", "report"];

pub const USAGE: &str = "\
usage: phonorank <command> [--config FILE] [--key value ...] [--quiet|--verbose]

commands:
  prep-corpus   clean and split corpora into data_dir
  gen-dataset   generate alternative-sentence datasets from data_dir
  train         train a protocol (e.g. --protocol cs_only_disc)
  evaluate      score a dataset with a checkpoint
  report        compare run manifests (report [--json] MANIFEST...)

exit codes: 0 ok, 1 usage/config, 2 data, 3 numeric";

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Splits `args` (without the program name) into command, flags, overrides
/// and positional arguments.
pub fn parse_args<S: AsRef<str>>(args: &[S]) -> Result<Invocation, CliError> {
    let mut inv = Invocation::default();
    let mut it = args.iter().map(AsRef::as_ref).peekable();
    match it.next() {
        None => return Err(CliError::Usage("missing command".into())),
        Some("-h" | "--help" | "help") => {
            inv.help = true;
            return Ok(inv);
        }
        Some(c) if COMMANDS.contains(&c) => inv.command = c.to_string(),
        Some(c) => return Err(CliError::Usage(format!("unknown command {c:?}"))),
    }
    while let Some(arg) = it.next() {
        match arg {
            "-h" | "--help" => inv.help = true,
            "-q" | "--quiet" => inv.quiet = true,
            "-v" | "--verbose" => inv.verbose = true,
            "--json" => inv.json = true,
            "--config" => {
                let p = it.next().ok_or_else(|| CliError::Usage("--config needs a path".into()))?;
                inv.config = Some(PathBuf::from(p));
            }
            _ if arg.starts_with("--") && arg.len() > 2 => {
                let body = &arg[2..];
                let (key, value) = match body.split_once('=') {
                    Some((k, v)) => (k.to_string(), parse_value(v)),
                    None => {
                        let v = match it.peek() {
                            Some(next) if !next.starts_with("--") => parse_value(it.next().unwrap_or_default()),
                            _ => Value::Bool(true),
                        };
                        (body.to_string(), v)
                    }
                };
                if key == "config" {
                    inv.config = Some(PathBuf::from(value.as_str().unwrap_or_default()));
                } else {
                    inv.overrides.push((key.replace('-', "_"), value));
                }
            }
            _ if arg.starts_with('-') && arg.len() > 1 => {
                return Err(CliError::Usage(format!("unknown flag {arg:?}")));
            }
            _ => inv.positional.push(arg.to_string()),
        }
    }
    Ok(inv)
}

/// Recursively merges `over` into `base`; objects merge, everything else
/// replaces.
pub fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn set_path(root: &mut Value, dotted: &str, value: Value) {
    let mut nested = value;
    for key in dotted.rsplit('.') {
        let mut m = Map::new();
        m.insert(key.to_string(), nested);
        nested = Value::Object(m);
    }
    merge(root, nested);
}

/// Config file (if any) with the command-line overrides applied on top.
pub fn user_config(inv: &Invocation) -> Result<Value, CliError> {
    let mut v = Value::Object(Map::new());
    if let Some(path) = &inv.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let t: toml::Value = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut v, serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))?);
    }
    for (k, val) in &inv.overrides {
        set_path(&mut v, k, val.clone());
    }
    Ok(v)
}

/// `defaults` overlaid with `user`, deserialized strictly.
pub fn resolve<T: DeserializeOwned>(mut defaults: Value, user: Value) -> Result<T, CliError> {
    merge(&mut defaults, user);
    serde_json::from_value(defaults).map_err(|e| CliError::Config(e.to_string()))
}

/// Seed from the config, then `PHONORANK_SEED`, then 0.
pub fn resolve_seed(configured: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = configured {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn init_logging(inv: &Invocation) {
    let level = if inv.quiet {
        log::LevelFilter::Warn
    } else if inv.verbose {
        log::LevelFilter::Debug
    } else {
        log::LevelFilter::Info
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
    log::set_max_level(level);
}

/// Runs one invocation and returns its exit code.
pub fn run<S: AsRef<str>>(args: &[S]) -> i32 {
    let inv = match parse_args(args) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("{e}\n\n{USAGE}");
            return e.exit_code();
        }
    };
    if inv.help {
        println!("{USAGE}");
        return EXIT_OK;
    }
    init_logging(&inv);
    match dispatch(&inv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(inv: &Invocation) -> Result<(), CliError> {
    let user = user_config(inv)?;
    match inv.command.as_str() {
        "prep-corpus" => cmd_prep_corpus(&resolve(PrepCorpusConfig::defaults(), user)?),
        "gen-dataset" => cmd_gen_dataset(&resolve(GenDatasetConfig::defaults(), user)?).map(|_| ()),
        "train" => cmd_train(&TrainRunConfig::resolve(user)?).map(|_| ()),
        "evaluate" => {
            let report = cmd_evaluate(&resolve(EvaluateConfig::defaults(), user)?)?;
            if inv.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(())
        }
        "report" => {
            if user.as_object().is_some_and(|m| !m.is_empty()) {
                return Err(CliError::Usage("report takes manifest paths and --json only".into()));
            }
            let paths: Vec<PathBuf> = inv.positional.iter().map(PathBuf::from).collect();
            print!("{}", cmd_report(&paths, inv.json)?);
            Ok(())
        }
        c => Err(CliError::Usage(format!("unknown command {c:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_nest_and_parse() {
        let inv = parse_args(&["train", "x", "--train.lr", "0.5", "--protocol=cs_only_disc", "--dev-size", "40", "--flag"])
            .unwrap();
        assert_eq!(inv.command, "train");
        assert_eq!(inv.positional, ["x"]);
        let v = user_config(&inv).unwrap();
        assert_eq!(
            v,
            json!({"train": {"lr": 0.5}, "protocol": "cs_only_disc", "dev_size": 40, "flag": true})
        );
    }

    #[test]
    fn merge_is_deep() {
        let mut a = json!({"a": {"b": 1, "c": 2}, "d": [1]});
        merge(&mut a, json!({"a": {"c": 3}, "d": [2, 3]}));
        assert_eq!(a, json!({"a": {"b": 1, "c": 3}, "d": [2, 3]}));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(parse_args::<&str>(&[]).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(parse_args(&["frobnicate"]).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(parse_args(&["train", "-x"]).unwrap_err().exit_code(), EXIT_USAGE);
        assert!(parse_args(&["report", "--help"]).unwrap().help);
        assert_eq!(run(&["train", "--no-such-key", "1"]), EXIT_USAGE);
    }

    #[test]
    fn explicit_seed_wins() {
        assert_eq!(resolve_seed(Some(9)).unwrap(), 9);
    }
}
