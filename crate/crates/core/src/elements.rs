//! Sets of distinct group elements, bucketed by their action on a fixed level
//! and separated exactly by the word-problem solver.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::automaton::{SignedState, Transducer};
use crate::solver::WordProblem;
use crate::word::GroupWord;

/// Vertices on the signature level, at most this many.
const SIGNATURE_VERTICES: usize = 256;

/// Permutations of a fixed level induced by each signed state.
#[derive(Clone, Debug)]
pub struct LevelAction {
    level: usize,
    /// indexed by signed-state code
    perms: Vec<Vec<u32>>,
}

impl LevelAction {
    pub fn new(t: &Transducer, level: usize) -> Self {
        let d = t.alphabet_size();
        let size = d.pow(level as u32);
        let perms = (0..2 * t.state_count() as u32)
            .map(|code| {
                let s = SignedState::from_code(code);
                (0..size)
                    .map(|i| {
                        let mut v = index_to_vertex(i, d, level);
                        t.apply_in_place(s, &mut v);
                        vertex_to_index(&v, d) as u32
                    })
                    .collect()
            })
            .collect();
        LevelAction { level, perms }
    }

    /// The deepest level with at most 256 vertices.
    pub fn signature_level(t: &Transducer) -> usize {
        let d = t.alphabet_size();
        let mut level = 0;
        while d.pow(level as u32 + 1) <= SIGNATURE_VERTICES {
            level += 1;
        }
        level
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn identity(&self) -> Vec<u32> {
        (0..self.size() as u32).collect()
    }

    /// `perm` followed by `s`.
    pub fn extend(&self, perm: &[u32], s: SignedState) -> Vec<u32> {
        let g = &self.perms[s.code() as usize];
        perm.iter().map(|&v| g[v as usize]).collect()
    }

    pub fn of_word(&self, w: &GroupWord) -> Vec<u32> {
        w.symbols()
            .iter()
            .fold(self.identity(), |p, &s| self.extend(&p, s))
    }

    pub fn generator(&self, s: SignedState) -> &[u32] {
        &self.perms[s.code() as usize]
    }
}

/// Lexicographic index of a vertex, first letter most significant.
pub fn vertex_to_index(v: &[u8], d: usize) -> usize {
    v.iter().fold(0, |acc, &x| acc * d + x as usize)
}

pub fn index_to_vertex(mut i: usize, d: usize, level: usize) -> Vec<u8> {
    let mut v = vec![0u8; level];
    for slot in v.iter_mut().rev() {
        *slot = (i % d) as u8;
        i /= d;
    }
    v
}

fn hash_perm(p: &[u32]) -> u64 {
    let mut h = DefaultHasher::new();
    p.hash(&mut h);
    h.finish()
}

/// Distinct elements with one stored word each.
pub struct ElementSet<'a> {
    wp: &'a WordProblem,
    action: LevelAction,
    buckets: HashMap<u64, Vec<usize>>,
    words: Vec<GroupWord>,
}

impl<'a> ElementSet<'a> {
    pub fn new(wp: &'a WordProblem) -> Self {
        let t = wp.transducer();
        let action = LevelAction::new(t, LevelAction::signature_level(t));
        ElementSet {
            wp,
            action,
            buckets: HashMap::new(),
            words: Vec::new(),
        }
    }

    pub fn action(&self) -> &LevelAction {
        &self.action
    }

    pub fn words(&self) -> &[GroupWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of the stored element equal to `w`, given its level signature.
    pub fn find_with_signature(&self, w: &GroupWord, signature: &[u32]) -> Option<usize> {
        let bucket = self.buckets.get(&hash_perm(signature))?;
        bucket
            .iter()
            .copied()
            .find(|&i| self.wp.equal(w, &self.words[i]))
    }

    pub fn find(&self, w: &GroupWord) -> Option<usize> {
        self.find_with_signature(w, &self.action.of_word(w))
    }

    /// Inserts `w` unless an equal element is present. Returns the index and
    /// whether it was new.
    pub fn insert_with_signature(&mut self, w: GroupWord, signature: &[u32]) -> (usize, bool) {
        if let Some(i) = self.find_with_signature(&w, signature) {
            return (i, false);
        }
        let i = self.words.len();
        self.words.push(w);
        self.buckets
            .entry(hash_perm(signature))
            .or_default()
            .push(i);
        (i, true)
    }

    pub fn insert(&mut self, w: GroupWord) -> (usize, bool) {
        let sig = self.action.of_word(&w);
        self.insert_with_signature(w, &sig)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;
    use crate::expr::eval_word;

    #[test]
    fn vertex_indexing_round_trips() {
        for i in 0..27 {
            assert_eq!(vertex_to_index(&index_to_vertex(i, 3, 3), 3), i);
        }
        assert_eq!(vertex_to_index(&[1, 0], 2), 2);
    }

    #[test]
    fn equal_words_collapse() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let mut set = ElementSet::new(&wp);
        assert_eq!(set.action().level(), 8);
        assert!(set.insert(eval_word(&t, "b^a b").unwrap()).1);
        assert!(!set.insert(eval_word(&t, "b b^a").unwrap()).1);
        assert!(set.insert(eval_word(&t, "ab").unwrap()).1);
        assert!(set.insert(eval_word(&t, "ba").unwrap()).1);
        assert_eq!(set.len(), 3);
    }
}
