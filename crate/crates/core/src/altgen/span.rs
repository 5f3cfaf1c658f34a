use std::ops::RangeInclusive;

use rand::Rng;

use super::GoldSentence;

/// Allowed span length (in words) for a sentence of `words` words:
/// `ceil(0.3 n)..=floor(0.7 n)`, at least one word.
pub fn span_bounds(words: usize) -> (usize, usize) {
    let lo = ((3 * words + 9) / 10).max(1);
    let hi = (7 * words / 10).max(lo);
    (lo, hi.min(words))
}

/// Samples a contiguous run of words for code-switched conversion. The length
/// is uniform over [`span_bounds`] and the start uniform over valid positions.
/// Returns the token-index range from the first to the last chosen word.
pub fn sample_span<R: Rng + ?Sized>(gold: &GoldSentence, rng: &mut R) -> RangeInclusive<usize> {
    let word_idx: Vec<usize> = gold
        .tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_word())
        .map(|(i, _)| i)
        .collect();
    assert!(!word_idx.is_empty(), "sample_span needs at least one word");
    let (lo, hi) = span_bounds(word_idx.len());
    let len = rng.gen_range(lo..=hi);
    let start = rng.gen_range(0..=word_idx.len() - len);
    word_idx[start]..=word_idx[start + len - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altgen::TaggedToken;
    use crate::lexicon::Lang;
    use crate::seeding::rng;

    fn sentence(n: usize) -> GoldSentence {
        GoldSentence::new((0..n).map(|i| TaggedToken::new(&format!("w{i}"), Lang::L1)).collect())
    }

    #[test]
    fn bounds() {
        assert_eq!(span_bounds(10), (3, 7));
        assert_eq!(span_bounds(3), (1, 2));
        assert_eq!(span_bounds(20), (6, 14));
    }

    #[test]
    fn ten_words_monte_carlo() {
        let g = sentence(10);
        let mut r = rng(3);
        let mut len_hist = [0usize; 11];
        let mut start_hist = [0usize; 10];
        let draws = 10_000;
        for _ in 0..draws {
            let s = sample_span(&g, &mut r);
            len_hist[s.end() - s.start() + 1] += 1;
            start_hist[*s.start()] += 1;
        }
        assert!(len_hist[..3].iter().chain(&len_hist[8..]).all(|&c| c == 0));
        // each of the 5 lengths ~ 2000 draws
        for &c in &len_hist[3..=7] {
            assert!((c as f64 - 2000.0).abs() < 200.0, "{len_hist:?}");
        }
        assert!(start_hist[..=7].iter().all(|&c| c > 0));
        assert_eq!(start_hist[8] + start_hist[9], 0);
    }

    #[test]
    fn three_words_and_determinism() {
        let g = sentence(3);
        for seed in 0..50 {
            let s = sample_span(&g, &mut rng(seed));
            let len = s.end() - s.start() + 1;
            assert!((1..=2).contains(&len));
            assert_eq!(s, sample_span(&g, &mut rng(seed)));
        }
    }

    #[test]
    fn punctuation_is_not_counted() {
        let mut g = sentence(3);
        g.tokens.push(TaggedToken::new(".", Lang::Punct));
        for seed in 0..50 {
            let s = sample_span(&g, &mut rng(seed));
            assert!(*s.end() < 3);
        }
    }
}
