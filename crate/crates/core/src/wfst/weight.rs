use std::cmp::Ordering;
use std::fmt;

/// A cost in the tropical semiring: `plus` is `min`, `times` is `+`.
///
/// `zero()` is `+∞` and marks "no path" / "not final"; `one()` is `0.0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TropicalWeight(f64);

impl TropicalWeight {
    pub const fn new(cost: f64) -> Self {
        TropicalWeight(cost)
    }

    pub const fn zero() -> Self {
        TropicalWeight(f64::INFINITY)
    }

    pub const fn one() -> Self {
        TropicalWeight(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn plus(self, rhs: Self) -> Self {
        if rhs.0 < self.0 {
            rhs
        } else {
            self
        }
    }

    pub fn times(self, rhs: Self) -> Self {
        TropicalWeight(self.0 + rhs.0)
    }

    /// Valid arc weights are finite and non-negative.
    pub fn is_valid_arc_weight(self) -> bool {
        self.0.is_finite() && self.0 >= 0.0
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Default for TropicalWeight {
    fn default() -> Self {
        TropicalWeight::one()
    }
}

impl From<f64> for TropicalWeight {
    fn from(v: f64) -> Self {
        TropicalWeight(v)
    }
}

impl fmt::Display for TropicalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "Infinity")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w() -> impl Strategy<Value = TropicalWeight> {
        prop_oneof![
            (0u32..1000).prop_map(|v| TropicalWeight::new(v as f64 * 0.25)),
            Just(TropicalWeight::zero()),
        ]
    }

    proptest! {
        #[test]
        fn semiring_laws(a in w(), b in w(), c in w()) {
            let zero = TropicalWeight::zero();
            let one = TropicalWeight::one();
            prop_assert_eq!(a.plus(b), b.plus(a));
            prop_assert_eq!(a.plus(b).plus(c), a.plus(b.plus(c)));
            prop_assert_eq!(a.plus(zero), a);
            prop_assert_eq!(a.times(b).times(c), a.times(b.times(c)));
            prop_assert_eq!(a.times(one), a);
            prop_assert_eq!(one.times(a), a);
            prop_assert_eq!(a.times(b.plus(c)), a.times(b).plus(a.times(c)));
            prop_assert_eq!(b.plus(c).times(a), b.times(a).plus(c.times(a)));
            prop_assert!(a.times(zero).is_zero());
        }
    }

    #[test]
    fn arc_weight_validity() {
        assert!(TropicalWeight::new(0.0).is_valid_arc_weight());
        assert!(!TropicalWeight::new(-1.0).is_valid_arc_weight());
        assert!(!TropicalWeight::zero().is_valid_arc_weight());
        assert!(!TropicalWeight::new(f64::NAN).is_valid_arc_weight());
    }
}
