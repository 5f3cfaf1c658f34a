//! Parse CMU-format dictionaries for two languages, map the second onto the
//! first's phoneme inventory, and compile the word-to-phone, edit and
//! phone-to-word transducers.
//!
//! ```text
//! cargo run --example lexicon_compile
//! ```

use phonorank::lexicon::{
    apply_phoneme_map, build_edit_fst, build_phone2word, build_word2phone, load_pron_dict, Lang, Lexicon,
    PhonemeMap, SimilarPhonemes, Unigrams,
};
use phonorank::wfst::{compose, nbest, Wfst};

const ENGLISH: &str = "\
;;; tiny English dictionary
HE  HH IY1
CAME  K EY1 M
CAME(2)  K AH0 M
NO  N OW1
BAY  B EY1
";

const SPANISH: &str = "\
no n o
pero p e r o
vino b i n o
porque p o r k e
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let en = load_pron_dict(ENGLISH.as_bytes(), Lang::L1)?;
    let es_raw = load_pron_dict(SPANISH.as_bytes(), Lang::L2)?;
    let es = apply_phoneme_map(&es_raw, &PhonemeMap::spanish_to_cmu())?;
    for (w, prons) in &es.entries {
        let shown: Vec<String> = prons.iter().map(|p| p.join(" ")).collect();
        println!("{w:<8} -> {}", shown.join(" | "));
    }

    let lex = Lexicon::builder()
        .fragment(en)
        .fragment(es)
        .unigrams(Lang::L1, Unigrams::from_counts([("he", 50.0), ("came", 20.0), ("no", 30.0), ("bay", 1.0)]))
        .unigrams(Lang::L2, Unigrams::from_counts([("no", 80.0), ("pero", 40.0), ("vino", 10.0), ("porque", 25.0)]))
        .build()?;
    println!("\n{} entries over {} phonemes", lex.len(), lex.phones().len() - 1);

    let w2p = build_word2phone(&lex, &[Lang::L1, Lang::L2])?;
    let edit = build_edit_fst(&SimilarPhonemes::cmu_default(), lex.phones())?;
    let p2w = build_phone2word(&lex, &[Lang::L1, Lang::L2], 0.1)?;
    println!("word->phone {} states, edit {} arcs, phone->word {} states", w2p.num_states(), edit.num_arcs(), p2w.num_states());

    // "no/l2" pronounced, edited and decoded back into words of either language
    let word = lex.word_label("no", Lang::L2).expect("in lexicon");
    let gold = Wfst::linear_acceptor(lex.words().clone(), &[word])?;
    let lattice = compose(&compose(&compose(&gold, &w2p)?, &edit)?, &p2w)?;
    println!("\ndecodings of \"no/l2\":");
    for p in nbest(&lattice, 6) {
        println!("  {:<20} cost {:.3}", lattice.output_strings(&p.output).join(" "), p.weight);
    }
    Ok(())
}
