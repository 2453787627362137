//! Nucleus computation and the word problem for contracting automaton groups.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use dashmap::DashMap;
use thiserror::Error;

use crate::automaton::{SignedState, Transducer};
use crate::word::GroupWord;
use crate::wreath::decompose;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("nucleus exceeded {budget} elements; the group was not verified to be contracting")]
    BudgetExhausted { budget: usize },
}

/// Memo entries beyond this count are not stored.
const MEMO_LIMIT: usize = 1 << 21;

/// Decides triviality by exploring every section word reachable from `w`.
///
/// `w` is trivial iff every reachable section has trivial root permutation. The
/// reachable set is finite because sections never have more letters than `w`.
/// `known` short-circuits words whose status is already known. Returns the
/// verdict and, when trivial, every visited word.
fn explore(
    t: &Transducer,
    w: &GroupWord,
    limit: usize,
    known: impl Fn(&GroupWord) -> Option<bool>,
) -> Result<(bool, Vec<GroupWord>), usize> {
    let mut seen: HashSet<GroupWord> = HashSet::from([w.clone()]);
    let mut order = vec![w.clone()];
    let mut queue = VecDeque::from([w.clone()]);
    while let Some(u) = queue.pop_front() {
        if u.is_empty() {
            continue;
        }
        match known(&u) {
            Some(true) => continue,
            Some(false) => return Ok((false, Vec::new())),
            None => {}
        }
        let dec = decompose(t, &u);
        if !dec.root_is_trivial() {
            return Ok((false, Vec::new()));
        }
        for c in dec.children {
            if !c.is_empty() && !seen.contains(&c) {
                if seen.len() >= limit {
                    return Err(limit);
                }
                seen.insert(c.clone());
                order.push(c.clone());
                queue.push_back(c);
            }
        }
    }
    Ok((true, order))
}

/// The finite child-closed core of a contracting group.
///
/// Members are pairwise distinct group elements, each stored as one reduced word;
/// `members()[0]` is the identity.
#[derive(Clone, Debug)]
pub struct Nucleus {
    members: Vec<GroupWord>,
    index: HashMap<GroupWord, usize>,
    children: Vec<Vec<usize>>,
    closure_rounds: usize,
    certified_depth: usize,
}

impl Nucleus {
    pub fn members(&self) -> &[GroupWord] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member index of a word known to represent a member.
    pub fn lookup(&self, w: &GroupWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Identity flag of a member.
    pub fn is_trivial_member(&self, i: usize) -> bool {
        i == 0
    }

    /// Member indices of the children of member `i`.
    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Number of product-and-close rounds until the set stabilised.
    pub fn closure_rounds(&self) -> usize {
        self.closure_rounds
    }

    /// Depth to which every non-trivial member was seen to move a vertex.
    pub fn certified_depth(&self) -> usize {
        self.certified_depth
    }
}

/// Closure of the generators, their inverses and the recurrent sections of all
/// pairwise products of members, until nothing new appears. Membership is up to
/// equality of group elements. Fails once more than `budget` members appear.
pub fn compute_nucleus(t: &Transducer, budget: usize) -> Result<Nucleus, SolverError> {
    let mut b = Builder {
        t,
        budget,
        members: Vec::new(),
        index: HashMap::new(),
    };
    b.insert(GroupWord::empty())?;
    for q in t.primary_generators() {
        let s = SignedState::positive(q);
        b.find_or_insert(GroupWord::generator(s))?;
        b.find_or_insert(GroupWord::generator(s.inverse()))?;
    }
    b.close_under_children()?;
    let mut rounds = 0;
    let mut done = 0;
    loop {
        rounds += 1;
        let n = b.members.len();
        let mut fresh = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i < done && j < done {
                    continue;
                }
                let product = &b.members[i] * &b.members[j];
                fresh.extend(recurrent_sections(t, &product));
            }
        }
        done = n;
        let before = b.members.len();
        for w in fresh {
            if !b.index.contains_key(&w) {
                b.find_or_insert(w)?;
            }
        }
        if b.members.len() == before {
            break;
        }
        b.close_under_children()?;
    }
    let children = b
        .members
        .clone()
        .iter()
        .map(|m| {
            decompose(t, m)
                .children
                .into_iter()
                .map(|c| b.index[&c])
                .collect()
        })
        .collect();
    let certified_depth = b
        .members
        .iter()
        .skip(1)
        .map(|m| first_moving_depth(t, m))
        .max()
        .unwrap_or(0);
    Ok(Nucleus {
        members: b.members,
        index: b.index,
        children,
        closure_rounds: rounds,
        certified_depth,
    })
}

struct Builder<'a> {
    t: &'a Transducer,
    budget: usize,
    members: Vec<GroupWord>,
    index: HashMap<GroupWord, usize>,
}

impl Builder<'_> {
    fn insert(&mut self, w: GroupWord) -> Result<usize, SolverError> {
        if let Some(&i) = self.index.get(&w) {
            return Ok(i);
        }
        if self.members.len() >= self.budget {
            return Err(SolverError::BudgetExhausted {
                budget: self.budget,
            });
        }
        let i = self.members.len();
        self.members.push(w.clone());
        self.index.insert(w, i);
        Ok(i)
    }

    /// Index of the member equal to `w` as a group element, adding `w` if new.
    fn find_or_insert(&mut self, w: GroupWord) -> Result<usize, SolverError> {
        if let Some(&i) = self.index.get(&w) {
            return Ok(i);
        }
        let limit = self.budget.saturating_mul(64).max(1 << 12);
        for (i, m) in self.members.iter().enumerate() {
            let q = &w * &m.inverse();
            let trivial = match explore(self.t, &q, limit, |_| None) {
                Ok((trivial, _)) => trivial,
                Err(_) => {
                    return Err(SolverError::BudgetExhausted {
                        budget: self.budget,
                    })
                }
            };
            if trivial {
                self.index.insert(w, i);
                return Ok(i);
            }
        }
        self.insert(w)
    }

    fn close_under_children(&mut self) -> Result<(), SolverError> {
        let mut i = 0;
        while i < self.members.len() {
            let dec = decompose(self.t, &self.members[i]);
            for c in dec.children {
                self.find_or_insert(c)?;
            }
            i += 1;
        }
        Ok(())
    }
}

/// Words lying on a cycle of the section graph reachable from `w`.
fn recurrent_sections(t: &Transducer, w: &GroupWord) -> Vec<GroupWord> {
    let mut id: BTreeMap<GroupWord, usize> = BTreeMap::new();
    let mut words = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut stack = vec![w.clone()];
    id.insert(w.clone(), 0);
    words.push(w.clone());
    edges.push(Vec::new());
    while let Some(u) = stack.pop() {
        let from = id[&u];
        for c in decompose(t, &u).children {
            let to = match id.get(&c) {
                Some(&k) => k,
                None => {
                    let k = words.len();
                    id.insert(c.clone(), k);
                    words.push(c.clone());
                    edges.push(Vec::new());
                    stack.push(c);
                    k
                }
            };
            edges[from].push(to);
        }
    }
    // a node is recurrent iff it can reach itself
    (0..words.len())
        .filter(|&s| {
            let mut seen = vec![false; words.len()];
            let mut stack: Vec<usize> = edges[s].clone();
            while let Some(v) = stack.pop() {
                if v == s {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.extend(&edges[v]);
                }
            }
            false
        })
        .map(|k| words[k].clone())
        .collect()
}

/// Smallest `k` such that `w` moves some vertex of depth `k`; 0 for the identity.
fn first_moving_depth(t: &Transducer, w: &GroupWord) -> usize {
    let mut level = BTreeSet::from([w.clone()]);
    for depth in 1.. {
        let mut next = BTreeSet::new();
        for u in &level {
            let dec = decompose(t, u);
            if !dec.root_is_trivial() {
                return depth;
            }
            next.extend(dec.children.into_iter().filter(|c| !c.is_empty()));
        }
        if next.is_empty() {
            return 0;
        }
        level = next;
    }
    unreachable!()
}

/// Exact word-problem solver for a contracting transducer.
///
/// Safe to share between threads; the memo table is a concurrent map.
pub struct WordProblem {
    t: Transducer,
    nucleus: Nucleus,
    memo: DashMap<GroupWord, bool>,
}

/// Default nucleus budget.
pub const NUCLEUS_BUDGET: usize = 256;

impl WordProblem {
    pub fn new(t: &Transducer) -> Result<Self, SolverError> {
        Self::with_budget(t, NUCLEUS_BUDGET)
    }

    pub fn with_budget(t: &Transducer, budget: usize) -> Result<Self, SolverError> {
        let nucleus = compute_nucleus(t, budget)?;
        Ok(WordProblem {
            t: t.clone(),
            nucleus,
            memo: DashMap::new(),
        })
    }

    pub fn transducer(&self) -> &Transducer {
        &self.t
    }

    pub fn nucleus(&self) -> &Nucleus {
        &self.nucleus
    }

    /// True iff `w` acts trivially on the whole tree.
    pub fn is_identity(&self, w: &GroupWord) -> bool {
        if w.is_empty() {
            return true;
        }
        if let Some(v) = self.memo.get(w) {
            return *v;
        }
        let known = |u: &GroupWord| {
            if let Some(i) = self.nucleus.lookup(u) {
                return Some(self.nucleus.is_trivial_member(i));
            }
            self.memo.get(u).map(|v| *v)
        };
        let (trivial, visited) = explore(&self.t, w, usize::MAX, known).expect("no limit");
        if self.memo.len() < MEMO_LIMIT {
            if trivial {
                for u in visited {
                    self.memo.insert(u, true);
                }
            } else {
                self.memo.insert(w.clone(), false);
            }
        }
        trivial
    }

    pub fn equal(&self, u: &GroupWord, v: &GroupWord) -> bool {
        self.is_identity(&(u * &v.inverse()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{builtin, trivial};
    use crate::expr::eval_word;
    use crate::wreath::fixes_to_depth;
    use proptest::prelude::*;

    fn display(t: &Transducer, n: &Nucleus) -> BTreeSet<String> {
        n.members()
            .iter()
            .map(|w| w.display(t).to_string())
            .collect()
    }

    #[test]
    fn gamma_nucleus() {
        let t = builtin("gamma", None).unwrap();
        let n = compute_nucleus(&t, 64).unwrap();
        assert_eq!(n.len(), 7);
        let names = display(&t, &n);
        for w in ["1", "a", "A", "b", "B"] {
            assert!(names.contains(w), "{names:?}");
        }
        // every child is a member
        for (i, m) in n.members().iter().enumerate() {
            for (c, &k) in decompose(&t, m).children.iter().zip(n.children(i)) {
                assert!(WordProblem::new(&t).unwrap().equal(c, &n.members()[k]));
            }
        }
    }

    #[test]
    fn grigorchuk_nucleus_is_generators() {
        let t = builtin("grigorchuk", None).unwrap();
        let n = compute_nucleus(&t, 64).unwrap();
        assert_eq!(n.len(), 5);
    }

    #[test]
    fn trivial_nucleus() {
        let n = compute_nucleus(&trivial(2), 8).unwrap();
        assert_eq!(n.len(), 1);
        assert!(n.is_trivial_member(0));
    }

    #[test]
    fn aleshin_exhausts_budget() {
        let t = builtin("aleshin", None).unwrap();
        assert_eq!(
            compute_nucleus(&t, 40).unwrap_err(),
            SolverError::BudgetExhausted { budget: 40 }
        );
    }

    #[test]
    fn gamma_identities() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let w = |s: &str| eval_word(&t, s).unwrap();
        assert!(wp.is_identity(&w("[b^a,b]")));
        assert!(wp.is_identity(&w("[[a^2,b^2],b^2]")));
        assert!(!wp.is_identity(&w("a")));
        assert!(!wp.is_identity(&w("[a,b]")));
        assert!(wp.equal(&w("ab"), &w("ab")));
        assert!(wp.equal(&w("b^a b"), &w("b b^a")));
        assert!(!wp.equal(&w("a"), &w("b")));
    }

    #[test]
    fn grigorchuk_relations() {
        let t = builtin("grigorchuk", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        for r in ["aa", "bb", "cc", "dd", "bcd", "(ad)^4", "(ac)^8", "(ab)^16"] {
            assert!(wp.is_identity(&eval_word(&t, r).unwrap()), "{r}");
        }
        assert!(!wp.is_identity(&eval_word(&t, "(ab)^8").unwrap()));
    }

    fn gamma_word(max: usize) -> impl Strategy<Value = GroupWord> {
        proptest::collection::vec(2u32..6, 0..max)
            .prop_map(|c| GroupWord::from_symbols(c.into_iter().map(SignedState::from_code)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn agrees_with_depth_twelve_action(w in gamma_word(17)) {
            let t = builtin("gamma", None).unwrap();
            let wp = WordProblem::new(&t).unwrap();
            prop_assert_eq!(wp.is_identity(&w), fixes_to_depth(&t, &w, 12));
        }

        #[test]
        fn equality_is_a_congruence(u in gamma_word(10), w in gamma_word(10)) {
            let t = builtin("gamma", None).unwrap();
            let wp = WordProblem::new(&t).unwrap();
            // u and u·[b^a,b] are equal
            let r = eval_word(&t, "[b^a,b]").unwrap();
            let v = &u * &r;
            prop_assert!(wp.equal(&u, &v));
            prop_assert!(wp.equal(&(&u * &w), &(&v * &w)));
            prop_assert!(wp.equal(&v, &u));
        }
    }
}
