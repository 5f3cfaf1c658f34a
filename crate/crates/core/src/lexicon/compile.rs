use crate::wfst::{Arc, TableRef, Wfst, EPSILON};

use super::{Lang, Lexicon, LexiconError, SimilarPhonemes};

/// Closure over per-word pronunciation chains: `word:ph1 eps:ph2 ... eps:phN`
/// returning to the single start/final state. `cost` decides inclusion and
/// the word cost placed on the first arc.
fn pron_star(
    lex: &Lexicon,
    languages: &[Lang],
    cost: impl Fn(Lang, &str) -> Option<f64>,
) -> Result<Wfst, LexiconError> {
    let mut fst = Wfst::new(lex.words().clone(), lex.phones().clone());
    let home = fst.start();
    fst.set_final(home, 0.0)?;
    for (lang, word, prons) in lex.entries() {
        if !languages.contains(&lang) {
            continue;
        }
        let Some(c) = cost(lang, word) else { continue };
        let wl = lex.word_label(word, lang).expect("word interned");
        for pron in prons {
            let mut src = home;
            for (i, &ph) in pron.iter().enumerate() {
                let last = i + 1 == pron.len();
                let dst = if last { home } else { fst.add_state() };
                let (il, w) = if i == 0 { (wl, c) } else { (EPSILON, 0.0) };
                fst.add_arc(src, Arc::new(il, ph, w, dst))?;
                src = dst;
            }
        }
    }
    Ok(fst)
}

/// Word sequence → phoneme sequences for words of `languages`, all costs 0.
/// Input symbols are `surface/lang`, so the tag selects the pronunciation.
pub fn build_word2phone(lex: &Lexicon, languages: &[Lang]) -> Result<Wfst, LexiconError> {
    pron_star(lex, languages, |_, _| Some(0.0))
}

/// Phoneme sequence → word sequences: the inverse of [`build_word2phone`]
/// restricted to non-filtered words, each word costing
/// `unigram_scale * -ln p(word)`.
pub fn build_phone2word(lex: &Lexicon, languages: &[Lang], unigram_scale: f64) -> Result<Wfst, LexiconError> {
    if !(unigram_scale >= 0.0 && unigram_scale.is_finite()) {
        return Err(LexiconError::InvalidCost(unigram_scale));
    }
    let star = pron_star(lex, languages, |lang, word| {
        if lex.filter().is_filtered(word) {
            return None;
        }
        let p = lex.unigram_prob(word, lang);
        // p <= 1, so the cost is non-negative; clamp away -0.0
        Some((unigram_scale * -p.ln()).max(0.0))
    })?;
    Ok(star.invert())
}

/// Single-state phoneme edit machine: identity arcs at cost 0, substitutions
/// for each ordered similar pair at `sub_cost`, deletions at `del_cost`
/// (omitted when infinite). Pairs naming phonemes outside `inventory` are
/// skipped.
pub fn build_edit_fst(sim: &SimilarPhonemes, inventory: &TableRef) -> Result<Wfst, LexiconError> {
    let mut fst = Wfst::new(inventory.clone(), inventory.clone());
    let s = fst.start();
    fst.set_final(s, 0.0)?;
    for p in inventory.labels() {
        fst.add_arc(s, Arc::new(p, p, 0.0, s))?;
    }
    for (a, b) in sim.ordered_pairs() {
        match (inventory.find(&a), inventory.find(&b)) {
            (Some(la), Some(lb)) => fst.add_arc(s, Arc::new(la, lb, sim.sub_cost, s))?,
            _ => log::debug!("similar pair {a}-{b} outside inventory; skipped"),
        }
    }
    if sim.del_cost.is_finite() {
        for p in inventory.labels() {
            fst.add_arc(s, Arc::new(p, EPSILON, sim.del_cost, s))?;
        }
    }
    Ok(fst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconFragment, Unigrams, WordFilter};
    use crate::wfst::{compose, nbest, Label};
    use std::sync::Arc as Shared;

    fn frag(lang: Lang, entries: &[(&str, &str)]) -> LexiconFragment {
        let mut f = LexiconFragment::new(lang);
        for (w, p) in entries {
            f.add(w, p.split(' ').map(String::from).collect());
        }
        f
    }

    fn cat_lex() -> Lexicon {
        Lexicon::builder()
            .fragment(frag(Lang::L1, &[("cat", "K AE T"), ("at", "AE T"), ("kay", "K EY")]))
            .build()
            .unwrap()
    }

    fn words_in(lex: &Lexicon, ws: &[&str]) -> Vec<Label> {
        ws.iter().map(|w| lex.word_label(w, Lang::L1).unwrap()).collect()
    }

    #[test]
    fn word2phone_maps_and_concatenates() {
        let lex = cat_lex();
        let w2p = build_word2phone(&lex, &[Lang::L1]).unwrap();
        let input = Wfst::linear_acceptor(lex.words().clone(), &words_in(&lex, &["cat"])).unwrap();
        let out = nbest(&compose(&input, &w2p).unwrap(), 5);
        assert_eq!(out.len(), 1);
        assert_eq!(lex.phone_strings(&out[0].output), vec!["K", "AE", "T"]);
        assert_eq!(out[0].weight, 0.0);

        let input = Wfst::linear_acceptor(lex.words().clone(), &words_in(&lex, &["cat", "at"])).unwrap();
        let out = nbest(&compose(&input, &w2p).unwrap(), 5);
        assert_eq!(lex.phone_strings(&out[0].output), vec!["K", "AE", "T", "AE", "T"]);
    }

    #[test]
    fn phone2word_with_zero_scale_is_pure_inversion() {
        let lex = cat_lex();
        let p2w = build_phone2word(&lex, &[Lang::L1], 0.0).unwrap();
        assert_eq!(p2w, build_word2phone(&lex, &[Lang::L1]).unwrap().invert());
        assert!(p2w.states().iter().flat_map(|s| &s.arcs).all(|a| a.weight.value() == 0.0));
    }

    #[test]
    fn homophone_costs_differ_by_scaled_log_ratio() {
        let lex = Lexicon::builder()
            .fragment(frag(Lang::L1, &[("red", "R EH D"), ("read", "R EH D")]))
            .unigrams(Lang::L1, Unigrams::from_counts([("red", 0.2), ("read", 0.01), ("x", 0.79)]))
            .build()
            .unwrap();
        let scale = 0.7;
        let p2w = build_phone2word(&lex, &[Lang::L1], scale).unwrap();
        let ph: Vec<Label> = ["R", "EH", "D"].iter().map(|p| lex.phones().find(p).unwrap()).collect();
        let paths = nbest(&compose(&Wfst::linear_acceptor(lex.phones().clone(), &ph).unwrap(), &p2w).unwrap(), 5);
        assert_eq!(paths.len(), 2);
        assert_eq!(lex.words().symbol(paths[0].output[0]), Some("red/l1"));
        let expected = scale * (0.2f64 / 0.01).ln();
        assert!((paths[1].weight - paths[0].weight - expected).abs() < 1e-12);
    }

    #[test]
    fn filtered_words_never_decode() {
        let lex = Lexicon::builder()
            .fragment(frag(Lang::L1, &[("s", "EH S"), ("es", "EH S")]))
            .filter(WordFilter::default())
            .build()
            .unwrap();
        let p2w = build_phone2word(&lex, &[Lang::L1], 0.1).unwrap();
        let s = lex.word_label("s", Lang::L1).unwrap();
        assert!(p2w.states().iter().flat_map(|st| &st.arcs).all(|a| a.olabel != s));
    }

    #[test]
    fn language_restriction_selects_words() {
        let lex = Lexicon::builder()
            .fragment(frag(Lang::L1, &[("no", "N OW")]))
            .fragment(frag(Lang::L2, &[("no", "N OW")]))
            .build()
            .unwrap();
        let p2w = build_phone2word(&lex, &[Lang::L2], 0.0).unwrap();
        let ph: Vec<Label> = ["N", "OW"].iter().map(|p| lex.phones().find(p).unwrap()).collect();
        let paths = nbest(&compose(&Wfst::linear_acceptor(lex.phones().clone(), &ph).unwrap(), &p2w).unwrap(), 5);
        assert_eq!(paths.len(), 1);
        assert_eq!(lex.words().symbol(paths[0].output[0]), Some("no/l2"));
    }

    #[test]
    fn edit_fst_without_pairs_or_deletion_is_identity() {
        let inv: TableRef = Shared::new(["S", "Z"].iter().collect());
        let sim = SimilarPhonemes::new(vec![], 3.0, f64::INFINITY).unwrap();
        let e = build_edit_fst(&sim, &inv).unwrap();
        assert_eq!(e.num_arcs(), 2);
        assert!(e.arcs(0).iter().all(|a| a.ilabel == a.olabel && a.weight.value() == 0.0));
    }

    #[test]
    fn edit_fst_substitutes_similar_pairs() {
        let inv: TableRef = Shared::new(["B", "V", "S", "Z"].iter().collect());
        let c = 3.0;
        let sim = SimilarPhonemes::new(vec![("B".into(), "V".into()), ("S".into(), "Z".into())], c, f64::INFINITY).unwrap();
        let e = build_edit_fst(&sim, &inv).unwrap();
        let b = inv.find("B").unwrap();
        let v = inv.find("V").unwrap();
        let out = nbest(&compose(&Wfst::linear_acceptor(inv.clone(), &[b]).unwrap(), &e).unwrap(), 5);
        assert_eq!(out.len(), 2);
        assert_eq!((out[1].output.clone(), out[1].weight), (vec![v], c));

        // [S, Z] → {SZ:0, SS:c, ZZ:c, ZS:2c}, enumerated independently
        let s = inv.find("S").unwrap();
        let z = inv.find("Z").unwrap();
        let out = nbest(&compose(&Wfst::linear_acceptor(inv.clone(), &[s, z]).unwrap(), &e).unwrap(), 10);
        let mut oracle = Vec::new();
        for (o1, c1) in [(s, 0.0), (z, c)] {
            for (o2, c2) in [(z, 0.0), (s, c)] {
                oracle.push((vec![o1, o2], c1 + c2));
            }
        }
        oracle.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let got: Vec<(Vec<Label>, f64)> = out.into_iter().map(|p| (p.output, p.weight)).collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn deletions_add_epsilon_outputs() {
        let inv: TableRef = Shared::new(["S"].iter().collect());
        let sim = SimilarPhonemes::new(vec![], 3.0, 4.0).unwrap();
        let e = build_edit_fst(&sim, &inv).unwrap();
        let out = nbest(&compose(&Wfst::linear_acceptor(inv.clone(), &[1]).unwrap(), &e).unwrap(), 5);
        assert_eq!(out.len(), 2);
        assert_eq!((out[1].output.is_empty(), out[1].weight), (true, 4.0));
    }
}
