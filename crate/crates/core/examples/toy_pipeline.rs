//! The whole command-line pipeline on the synthetic two-language world:
//! prep-corpus, gen-dataset, train (two protocols), evaluate and report.
//!
//! ```text
//! cargo run --release --example toy_pipeline -- [WORK_DIR]
//! ```

use std::path::PathBuf;

use phonorank::cli::run;
use phonorank::synthetic::{ToyConfig, ToyWorld};

fn step(args: &[&str]) {
    println!("\n$ phonorank {}", args.join(" "));
    let code = run(args);
    assert_eq!(code, 0, "command failed with exit code {code}");
}

fn main() -> std::io::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("phonorank-toy"));
    let res = dir.join("resources");
    ToyWorld::new(ToyConfig::default()).write_resources(&res, 1500, 1500)?;
    let r = |f: &str| res.join(f).display().to_string();
    let data = dir.join("data").display().to_string();

    step(&[
        "prep-corpus", "--cs-corpus", &r("cs.tagged"), "--mono-l1", &r("mono.l1.txt"),
        "--mono-l2", &r("mono.l2.txt"), "--out-dir", &data, "--seed", "1",
    ]);
    step(&[
        "gen-dataset", "--data-dir", &data, "--l1-dict", &r("l1.dict"), "--l2-dict", &r("l2.dict"),
        "--l1-unigrams", &r("l1.unigrams"), "--l2-unigrams", &r("l2.unigrams"), "--similar", &r("similar.txt"),
        "--stoplist", "false", "--dev-size", "200", "--test-size", "200", "--generation.nbest", "100",
        "--workers", "4", "--seed", "1", "--quiet",
    ]);
    let mut manifests = Vec::new();
    for protocol in ["cs_only_disc", "cs_only_lm"] {
        let out = dir.join("runs").join(protocol).display().to_string();
        step(&[
            "train", "--protocol", protocol, "--data-dir", &data, "--out-dir", &out, "--seed", "1",
            "--train.max_epochs", "8", "--train.lm.emb", "16", "--train.lm.hidden", "16",
            "--train.ranker.emb", "16", "--train.ranker.hidden", "16",
        ]);
        manifests.push(format!("{out}/manifest.json"));
    }
    step(&[
        "evaluate", "--checkpoint", &format!("{}/runs/cs_only_disc/model.ckpt", dir.display()),
        "--dataset", &format!("{data}/test.jsonl"),
    ]);
    let mut report = vec!["report"];
    report.extend(manifests.iter().map(String::as_str));
    step(&report);
    Ok(())
}
