use std::collections::BTreeMap;
use std::io::BufRead;

use super::{LexiconError, LexiconFragment};

/// Source phoneme → alternative target sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhonemeMap {
    pub pairs: BTreeMap<String, Vec<Vec<String>>>,
}

/// Spanish (CMUSphinx) → CMU inventory.
const SPANISH_TO_CMU: &[(&str, &str)] = &[
    ("ch", "CH"),
    ("rr", "R"),
    ("gn", "NG"),
    ("a", "AA"),
    ("b", "B"),
    ("b", "V"),
    ("e", "EY"),
    ("d", "D"),
    ("d", "DH"),
    ("g", "G"),
    ("f", "F"),
    ("i", "IY"),
    ("k", "K"),
    ("j", "H"),
    ("m", "M"),
    ("n", "N"),
    ("l", "L"),
    ("o", "OW"),
    ("p", "P"),
    ("s", "S"),
    ("r", "R"),
    ("u", "UW"),
    ("t", "T"),
    ("y", "Y"),
    ("x", "S"),
    ("x", "SH"),
    ("x", "K S"),
    ("x", "H"),
    ("z", "TH"),
    ("z", "S"),
    ("ll", "L Y"),
    ("ll", "SH"),
];

impl PhonemeMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: &str, target: &[&str]) {
        let alts = self.pairs.entry(source.to_string()).or_default();
        let t: Vec<String> = target.iter().map(|s| s.to_string()).collect();
        if !alts.contains(&t) {
            alts.push(t);
        }
    }

    /// The manual Spanish-to-CMU mapping used for the English/Spanish lexicons.
    pub fn spanish_to_cmu() -> Self {
        let mut m = PhonemeMap::new();
        for (src, tgt) in SPANISH_TO_CMU {
            let t: Vec<&str> = tgt.split(' ').collect();
            m.add(src, &t);
        }
        m
    }

    /// Maps every phoneme to itself.
    pub fn identity<'a>(inventory: impl IntoIterator<Item = &'a str>) -> Self {
        let mut m = PhonemeMap::new();
        for p in inventory {
            m.add(p, &[p]);
        }
        m
    }

    /// Reads `SRC<TAB>TGT1 TGT2 ...` lines; one line per alternative.
    pub fn read<R: BufRead>(source: R) -> Result<Self, LexiconError> {
        let mut m = PhonemeMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (src, tgt) = line.split_once('\t').ok_or_else(|| LexiconError::Parse {
                line: i + 1,
                msg: "expected SRC<TAB>TARGET".into(),
            })?;
            let tgt: Vec<&str> = tgt.split_whitespace().collect();
            if src.trim().is_empty() || tgt.is_empty() {
                return Err(LexiconError::Parse {
                    line: i + 1,
                    msg: "empty source or target".into(),
                });
            }
            m.add(src.trim(), &tgt);
        }
        Ok(m)
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for (src, alts) in &self.pairs {
            for t in alts {
                out.push_str(src);
                out.push('\t');
                out.push_str(&t.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

/// Rewrites every pronunciation through `map`. Sources with several targets
/// multiply the pronunciation count (cross product); duplicates are dropped.
pub fn apply_phoneme_map(lex: &LexiconFragment, map: &PhonemeMap) -> Result<LexiconFragment, LexiconError> {
    let mut out = LexiconFragment {
        language: lex.language,
        entries: Default::default(),
    };
    for (word, prons) in &lex.entries {
        for pron in prons {
            let mut expanded: Vec<Vec<String>> = vec![Vec::new()];
            for ph in pron {
                let alts = map.pairs.get(ph).ok_or_else(|| LexiconError::UnmappedPhoneme {
                    phoneme: ph.clone(),
                    word: word.clone(),
                })?;
                expanded = expanded
                    .iter()
                    .flat_map(|prefix| {
                        alts.iter().map(move |t| {
                            let mut p = prefix.clone();
                            p.extend(t.iter().cloned());
                            p
                        })
                    })
                    .collect();
            }
            for p in expanded {
                out.add(word, p);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::Lang;

    fn frag(word: &str, pron: &[&str]) -> LexiconFragment {
        let mut f = LexiconFragment::new(Lang::L2);
        f.add(word, pron.iter().map(|s| s.to_string()).collect());
        f
    }

    #[test]
    fn churro_maps_digraphs() {
        let f = frag("churro", &["ch", "u", "rr", "o"]);
        let m = apply_phoneme_map(&f, &PhonemeMap::spanish_to_cmu()).unwrap();
        assert_eq!(m.entries["churro"], vec![vec!["CH", "UW", "R", "OW"]]);
    }

    #[test]
    fn ll_doubles_pronunciations() {
        let f = frag("calle", &["k", "a", "ll", "e"]);
        let m = apply_phoneme_map(&f, &PhonemeMap::spanish_to_cmu()).unwrap();
        assert_eq!(m.pronunciation_count(), 2);
        assert_eq!(m.entries["calle"][0], vec!["K", "AA", "L", "Y", "EY"]);
        assert_eq!(m.entries["calle"][1], vec!["K", "AA", "SH", "EY"]);
        assert_eq!(m.len(), f.len());
    }

    #[test]
    fn identity_map_changes_nothing() {
        let f = frag("cat", &["K", "AE", "T"]);
        let m = apply_phoneme_map(&f, &PhonemeMap::identity(["K", "AE", "T"])).unwrap();
        assert_eq!(m, f);
    }

    #[test]
    fn unmapped_phoneme_names_phoneme_and_word() {
        let f = frag("año", &["a", "ny", "o"]);
        let err = apply_phoneme_map(&f, &PhonemeMap::spanish_to_cmu()).unwrap_err();
        match err {
            LexiconError::UnmappedPhoneme { phoneme, word } => {
                assert_eq!(phoneme, "ny");
                assert_eq!(word, "año");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn file_format_round_trips() {
        let m = PhonemeMap::spanish_to_cmu();
        assert_eq!(PhonemeMap::read(m.write().as_bytes()).unwrap(), m);
        assert_eq!(m.pairs["x"].len(), 4);
        assert_eq!(m.pairs["x"][2], vec!["K", "S"]);
    }
}
