//! Freely reduced words over signed generators.

use std::fmt;
use std::ops::Mul;

use crate::automaton::{SignedState, Transducer};

/// A freely reduced word: no adjacent `s s⁻¹` pair. Every constructor reduces.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupWord(Vec<SignedState>);

impl GroupWord {
    pub fn empty() -> Self {
        GroupWord(Vec::new())
    }

    pub fn from_symbols<I: IntoIterator<Item = SignedState>>(symbols: I) -> Self {
        let mut w = GroupWord::empty();
        for s in symbols {
            w.push(s);
        }
        w
    }

    pub fn generator(s: SignedState) -> Self {
        GroupWord(vec![s])
    }

    /// Appends `s`, cancelling against the last letter if possible.
    #[inline]
    pub fn push(&mut self, s: SignedState) {
        if self.0.last() == Some(&s.inverse()) {
            self.0.pop();
        } else {
            self.0.push(s);
        }
    }

    pub fn extend_word(&mut self, other: &GroupWord) {
        for &s in &other.0 {
            self.push(s);
        }
    }

    pub fn symbols(&self) -> &[SignedState] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<SignedState> {
        self.0.last().copied()
    }

    #[must_use]
    pub fn inverse(&self) -> Self {
        GroupWord(self.0.iter().rev().map(|s| s.inverse()).collect())
    }

    #[must_use]
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = GroupWord::empty();
        for _ in 0..k.unsigned_abs() {
            out.extend_word(&base);
        }
        out
    }

    /// `[u, v] = u⁻¹ v⁻¹ u v`.
    pub fn commutator(u: &GroupWord, v: &GroupWord) -> Self {
        &(&(&u.inverse() * &v.inverse()) * u) * v
    }

    /// `u^v = v⁻¹ u v`.
    #[must_use]
    pub fn conjugate(&self, by: &GroupWord) -> Self {
        &(&by.inverse() * self) * by
    }

    /// Sum of per-state weights.
    pub fn weighted_length(&self, weight: impl Fn(SignedState) -> f64) -> f64 {
        self.0.iter().map(|&s| weight(s)).sum()
    }

    /// Renders with the transducer's state names; inverses as `X^-1`, or as the
    /// upper-cased name when that is unambiguous.
    pub fn display<'a>(&'a self, t: &'a Transducer) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            names: NameSource::Transducer(t),
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            names: NameSource::Slice(names),
        }
    }
}

impl Mul for &GroupWord {
    type Output = GroupWord;

    fn mul(self, rhs: &GroupWord) -> GroupWord {
        let mut out = self.clone();
        out.extend_word(rhs);
        out
    }
}

impl fmt::Debug for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

enum NameSource<'a> {
    Transducer(&'a Transducer),
    Slice(&'a [String]),
}

impl NameSource<'_> {
    fn name(&self, q: usize) -> &str {
        match self {
            NameSource::Transducer(t) => t.name(q),
            NameSource::Slice(s) => &s[q],
        }
    }

    fn exists(&self, name: &str) -> bool {
        match self {
            NameSource::Transducer(t) => t.state_by_name(name).is_some(),
            NameSource::Slice(s) => s.iter().any(|n| n == name),
        }
    }
}

pub struct WordDisplay<'a> {
    word: &'a GroupWord,
    names: NameSource<'a>,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("1");
        }
        for s in self.word.symbols() {
            let name = self.names.name(s.state());
            let simple = name.len() == 1 && name.chars().all(|c| c.is_ascii_lowercase());
            if !s.is_inverse() {
                if simple {
                    f.write_str(name)?;
                } else {
                    write!(f, "{{{name}}}")?;
                }
            } else {
                let upper = name.to_ascii_uppercase();
                if simple && !self.names.exists(&upper) {
                    f.write_str(&upper)?;
                } else if simple {
                    write!(f, "{name}^-1")?;
                } else {
                    write!(f, "{{{name}}}^-1")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sym(code: u32) -> SignedState {
        SignedState::from_code(code)
    }

    #[test]
    fn cancels_adjacent_pairs() {
        let a = SignedState::positive(1);
        let w = GroupWord::from_symbols([a, a.inverse()]);
        assert!(w.is_empty());
        let w = GroupWord::from_symbols([
            a,
            SignedState::positive(2),
            SignedState::positive(2).inverse(),
            a,
        ]);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn display_uses_uppercase_inverses() {
        let t = crate::automaton::builtin("gamma", None).unwrap();
        let a = SignedState::positive(1);
        let b = SignedState::positive(2);
        let w = GroupWord::commutator(&GroupWord::generator(a), &GroupWord::generator(b));
        assert_eq!(w.display(&t).to_string(), "ABab");
        let bsv = crate::automaton::builtin("bsv", None).unwrap();
        let m = GroupWord::generator(SignedState::new(2, true));
        assert_eq!(m.display(&bsv).to_string(), "m^-1");
    }

    proptest! {
        #[test]
        fn inverse_cancels(codes in proptest::collection::vec(2u32..8, 0..30)) {
            let w = GroupWord::from_symbols(codes.into_iter().map(sym));
            prop_assert!((&w * &w.inverse()).is_empty());
            prop_assert!(w.symbols().windows(2).all(|p| p[0] != p[1].inverse()));
        }
    }
}
