//! The wreath recursion `g ↦ ⟨g₁,…,g_d⟩π_g` on words.

use crate::automaton::{Transducer, IDENTITY};
use crate::word::GroupWord;

/// Children and root permutation of a word. `root[x]` is the image of letter `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathDecomposition {
    pub children: Vec<GroupWord>,
    pub root: Vec<u8>,
}

impl WreathDecomposition {
    pub fn root_is_trivial(&self) -> bool {
        self.root.iter().enumerate().all(|(x, &y)| x == y as usize)
    }

    /// Total letter count over all children.
    pub fn child_letters(&self) -> usize {
        self.children.iter().map(GroupWord::len).sum()
    }

    /// The decomposition of `u·v` from those of `u` and `v`:
    /// `(uv)_x = u_x v_{x^u}` and `π_{uv} = π_u` followed by `π_v`.
    pub fn compose(&self, other: &WreathDecomposition) -> WreathDecomposition {
        let children = self
            .children
            .iter()
            .zip(&self.root)
            .map(|(c, &y)| c * &other.children[y as usize])
            .collect();
        let root = self.root.iter().map(|&y| other.root[y as usize]).collect();
        WreathDecomposition { children, root }
    }
}

/// Decomposes `w`. Sections are replaced by their canonical states and freely
/// reduced, so the total child letter count never exceeds `|w|`.
pub fn decompose(t: &Transducer, w: &GroupWord) -> WreathDecomposition {
    let d = t.alphabet_size();
    let mut children = vec![GroupWord::empty(); d];
    let mut root = vec![0u8; d];
    for x in 0..d as u8 {
        let mut cur = x;
        let child = &mut children[x as usize];
        for &s in w.symbols() {
            let (y, section) = t.step(s, cur);
            let section = t.canonical(section);
            if section.state() != IDENTITY {
                child.push(section);
            }
            cur = y;
        }
        root[x as usize] = cur;
    }
    WreathDecomposition { children, root }
}

/// Only the root permutation of `w`.
pub fn root_permutation(t: &Transducer, w: &GroupWord) -> Vec<u8> {
    (0..t.alphabet_size() as u8)
        .map(|x| {
            w.symbols()
                .iter()
                .fold(x, |cur, &s| t.root_permutation(s)[cur as usize])
        })
        .collect()
}

/// True if the root permutation of `w` is the identity.
pub fn root_is_trivial(t: &Transducer, w: &GroupWord) -> bool {
    root_permutation(t, w)
        .iter()
        .enumerate()
        .all(|(x, &y)| x == y as usize)
}

/// True if `w` fixes every vertex of depth at most `depth`. Explores the distinct
/// section words level by level; makes no contraction assumption.
pub fn fixes_to_depth(t: &Transducer, w: &GroupWord, depth: usize) -> bool {
    let mut level = std::collections::BTreeSet::from([w.clone()]);
    for _ in 0..depth {
        let mut next = std::collections::BTreeSet::new();
        for u in &level {
            if u.is_empty() {
                continue;
            }
            let dec = decompose(t, u);
            if !dec.root_is_trivial() {
                return false;
            }
            next.extend(dec.children.into_iter().filter(|c| !c.is_empty()));
        }
        if next.is_empty() {
            return true;
        }
        level = next;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{builtin, SignedState};
    use crate::expr::eval_word;
    use proptest::prelude::*;

    fn gamma() -> Transducer {
        builtin("gamma", None).unwrap()
    }

    #[test]
    fn gamma_generators() {
        let t = gamma();
        let a = decompose(&t, &eval_word(&t, "a").unwrap());
        assert_eq!(
            a.children,
            vec![eval_word(&t, "b").unwrap(), GroupWord::empty()]
        );
        assert_eq!(a.root, vec![1, 0]);
        let e = decompose(&t, &GroupWord::empty());
        assert!(e.root_is_trivial() && e.children.iter().all(GroupWord::is_empty));
        let ba = decompose(&t, &eval_word(&t, "ba").unwrap());
        assert_eq!(
            ba.children,
            vec![eval_word(&t, "ab").unwrap(), GroupWord::empty()]
        );
        assert_eq!(ba.root, vec![1, 0]);
    }

    #[test]
    fn bsv_sections_use_inverse_of_mu() {
        let t = builtin("bsv", None).unwrap();
        let m = decompose(&t, &eval_word(&t, "m").unwrap());
        assert_eq!(m.children[0], eval_word(&t, "m^-1").unwrap());
        assert_eq!(eval_word(&t, "mM").unwrap(), GroupWord::empty());
    }

    #[test]
    fn depth_bounded_fixing() {
        let t = gamma();
        assert!(fixes_to_depth(&t, &eval_word(&t, "[b^a,b]").unwrap(), 12));
        assert!(!fixes_to_depth(&t, &eval_word(&t, "[a,b]").unwrap(), 3));
        assert!(fixes_to_depth(&t, &eval_word(&t, "[a,b]").unwrap(), 1));
    }

    fn gamma_word() -> impl Strategy<Value = GroupWord> {
        proptest::collection::vec(2u32..6, 0..20)
            .prop_map(|c| GroupWord::from_symbols(c.into_iter().map(SignedState::from_code)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn decomposition_is_a_homomorphism(u in gamma_word(), v in gamma_word()) {
            let t = gamma();
            prop_assert_eq!(decompose(&t, &(&u * &v)), decompose(&t, &u).compose(&decompose(&t, &v)));
        }

        #[test]
        fn children_are_no_longer(u in gamma_word()) {
            let t = gamma();
            prop_assert!(decompose(&t, &u).child_letters() <= u.len());
        }

        #[test]
        fn decomposition_matches_action(u in gamma_word(), v in proptest::collection::vec(0u8..2, 1..8)) {
            let t = gamma();
            let dec = decompose(&t, &u);
            let image = t.apply_word(u.symbols(), &v).unwrap();
            let x = v[0] as usize;
            prop_assert_eq!(image[0], dec.root[x]);
            prop_assert_eq!(&image[1..], &t.apply_word(dec.children[x].symbols(), &v[1..]).unwrap()[..]);
        }
    }
}
