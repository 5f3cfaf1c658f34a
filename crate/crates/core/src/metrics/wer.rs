use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Edit counts of a minimal alignment and the resulting word error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WerBreakdown {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_len: usize,
    pub wer: f64,
}

impl WerBreakdown {
    pub fn edits(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    Match,
    Sub,
    Del,
    Ins,
}

/// Levenshtein alignment with unit costs. Among equally cheap alignments the
/// backtrace prefers substitution, then deletion, then insertion.
pub fn wer<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<WerBreakdown, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut cost = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        cost[i * w] = i;
    }
    for j in 0..=m {
        cost[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = cost[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = cost[(i - 1) * w + j] + 1;
            let ins = cost[i * w + j - 1] + 1;
            cost[i * w + j] = diag.min(del).min(ins);
        }
    }

    let (mut s, mut d, mut ins) = (0, 0, 0);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * w + j];
        let step = if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            let diag = cost[(i - 1) * w + j - 1] + usize::from(!same);
            if diag == here {
                if same {
                    Step::Match
                } else {
                    Step::Sub
                }
            } else if cost[(i - 1) * w + j] + 1 == here {
                Step::Del
            } else {
                Step::Ins
            }
        } else if i > 0 {
            Step::Del
        } else {
            Step::Ins
        };
        match step {
            Step::Match => {
                i -= 1;
                j -= 1;
            }
            Step::Sub => {
                s += 1;
                i -= 1;
                j -= 1;
            }
            Step::Del => {
                d += 1;
                i -= 1;
            }
            Step::Ins => {
                ins += 1;
                j -= 1;
            }
        }
    }
    debug_assert_eq!(s + d + ins, cost[n * w + m]);
    Ok(WerBreakdown {
        substitutions: s,
        deletions: d,
        insertions: ins,
        ref_len: n,
        wer: (s + d + ins) as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive recursion, independent of the table.
    fn brute(a: &[u8], b: &[u8]) -> usize {
        match (a.split_first(), b.split_first()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = brute(ra, rb) + usize::from(x != y);
                let del = brute(ra, b) + 1;
                let ins = brute(a, rb) + 1;
                sub.min(del).min(ins)
            }
        }
    }

    #[test]
    fn identical_is_zero() {
        let r = wer(&["a", "b"], &["a", "b"]).unwrap();
        assert_eq!(r.wer, 0.0);
        assert_eq!(r.edits(), 0);
    }

    #[test]
    fn single_substitution() {
        let r = wer(&["a", "b", "c"], &["a", "x", "c"]).unwrap();
        assert_eq!((r.substitutions, r.deletions, r.insertions), (1, 0, 0));
        assert!((r.wer - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ties_prefer_substitution() {
        // "a b" vs "c": one sub + one del either way
        let r = wer(&["a", "b"], &["c"]).unwrap();
        assert_eq!((r.substitutions, r.deletions, r.insertions), (1, 1, 0));
    }

    #[test]
    fn wer_can_exceed_one() {
        let r = wer(&["a"], &["x", "y", "z"]).unwrap();
        assert_eq!(r.wer, 3.0);
    }

    #[test]
    fn empty_reference_is_an_error() {
        assert!(wer::<&str>(&[], &["a"]).is_err());
    }

    proptest! {
        #[test]
        fn matches_recursion(a in proptest::collection::vec(0u8..4, 1..7), b in proptest::collection::vec(0u8..4, 0..7)) {
            prop_assert_eq!(wer(&a, &b).unwrap().edits(), brute(&a, &b));
        }

        #[test]
        fn raw_distance_is_a_metric(
            a in proptest::collection::vec(0u8..4, 1..7),
            b in proptest::collection::vec(0u8..4, 1..7),
            c in proptest::collection::vec(0u8..4, 1..7),
        ) {
            let d = |x: &[u8], y: &[u8]| wer(x, y).unwrap().edits();
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
            prop_assert_eq!(d(&a, &b) == 0, a == b);
        }
    }
}
