//! Finite level quotients: the action of a group on the first `n` levels.
//!
//! Over the binary alphabet every quotient is a 2-group, and its order is
//! computed from a polycyclic basis adapted to the level-stabilizer series:
//! the factor St(k)/St(k+1) is an F2-space of activity vectors on level `k`.
//! Larger alphabets fall back to a Schreier–Sims chain on the leaves.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::automaton::{SignedState, Transducer};
use crate::chain::{Perm, StabilizerChain};
use crate::elements::LevelAction;
use crate::word::GroupWord;

/// Largest number of leaves a quotient may act on.
pub const MAX_LEAVES: usize = 1 << 16;

/// Cap on closure tasks processed while building a basis.
pub const MAX_TASKS: usize = 50_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuotientError {
    #[error("level {level} over {d} letters exceeds the budget of {MAX_LEAVES} vertices")]
    Budget { level: usize, d: usize },
    #[error("closure did not finish within {MAX_TASKS} steps")]
    Iterations,
    #[error("exponent numerator {numerator} is not divisible by 3")]
    NonIntegerExponent { numerator: u64 },
}

/// Permutation of the vertices of level `n`, indexed lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelPermutation {
    level: usize,
    perm: Perm,
}

impl LevelPermutation {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn image(&self) -> &[u32] {
        &self.perm.0
    }

    pub fn perm(&self) -> &Perm {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.is_identity()
    }

    pub fn order(&self) -> BigUint {
        self.perm.order()
    }
}

fn check_budget(t: &Transducer, n: usize) -> Result<(), QuotientError> {
    let d = t.alphabet_size();
    let ok = (d as u128)
        .checked_pow(n as u32)
        .is_some_and(|size| size <= MAX_LEAVES as u128);
    if ok {
        Ok(())
    } else {
        Err(QuotientError::Budget { level: n, d })
    }
}

/// The permutation of level `n` induced by `w`.
pub fn level_permutation(
    t: &Transducer,
    w: &GroupWord,
    n: usize,
) -> Result<LevelPermutation, QuotientError> {
    check_budget(t, n)?;
    let action = LevelAction::new(t, n);
    Ok(LevelPermutation {
        level: n,
        perm: Perm(action.of_word(w)),
    })
}

/// Multiplicative order of `w` in the level-`n` quotient.
pub fn element_order(t: &Transducer, w: &GroupWord, n: usize) -> Result<BigUint, QuotientError> {
    Ok(level_permutation(t, w, n)?.order())
}

/// The natural generating set: the primary generators as one-letter words.
pub fn default_generators(t: &Transducer) -> Vec<GroupWord> {
    t.primary_generators()
        .into_iter()
        .map(|q| GroupWord::generator(SignedState::positive(q)))
        .collect()
}

fn generator_perms(
    t: &Transducer,
    generators: &[GroupWord],
    n: usize,
) -> Result<Vec<Perm>, QuotientError> {
    check_budget(t, n)?;
    let action = LevelAction::new(t, n);
    Ok(generators
        .iter()
        .map(|w| Perm(action.of_word(w)))
        .filter(|p| !p.is_identity())
        .collect())
}

/// Exact order of the subgroup of the level-`n` quotient generated by `generators`.
pub fn group_order(
    t: &Transducer,
    generators: &[GroupWord],
    n: usize,
) -> Result<BigUint, QuotientError> {
    let perms = generator_perms(t, generators, n)?;
    if t.alphabet_size() == 2 {
        let basis = LevelBasis::build(n, &perms, None)?;
        Ok(BigUint::one() << basis.len())
    } else {
        Ok(StabilizerChain::new(t.alphabet_size().pow(n as u32), &perms).order())
    }
}

/// Order of the full level-`n` quotient of the group.
pub fn quotient_order(t: &Transducer, n: usize) -> Result<BigUint, QuotientError> {
    group_order(t, &default_generators(t), n)
}

/// `(2^{n+1} + ⌊3n/2⌋ − 2) / 3`, the base-2 logarithm of the predicted order.
pub fn predicted_exponent_basilica(n: u32) -> Result<u64, QuotientError> {
    let numerator = (1u64 << (n + 1)) + u64::from(3 * n / 2) - 2;
    if !numerator.is_multiple_of(3) {
        return Err(QuotientError::NonIntegerExponent { numerator });
    }
    Ok(numerator / 3)
}

/// The predicted order of the level-`n` quotient of the basilica group.
pub fn predicted_order_basilica(n: u32) -> Result<BigUint, QuotientError> {
    Ok(BigUint::one() << predicted_exponent_basilica(n)?)
}

/// Index of the commutator subgroup in the level-`n` quotient.
pub fn derived_index(t: &Transducer, n: usize) -> Result<BigUint, QuotientError> {
    let perms = generator_perms(t, &default_generators(t), n)?;
    let commutators: Vec<Perm> = perms
        .iter()
        .enumerate()
        .flat_map(|(i, x)| perms[i + 1..].iter().map(move |y| x.commutator(y)))
        .filter(|c| !c.is_identity())
        .collect();
    if t.alphabet_size() == 2 {
        let whole = LevelBasis::build(n, &perms, None)?;
        let derived = LevelBasis::build(n, &commutators, Some(&perms))?;
        return Ok(BigUint::one() << (whole.len() - derived.len()));
    }
    let degree = t.alphabet_size().pow(n as u32);
    let whole = StabilizerChain::new(degree, &perms);
    let mut chain = StabilizerChain::new(degree, &commutators);
    let mut pending = commutators;
    let mut steps = 0;
    while let Some(x) = pending.pop() {
        for g in &perms {
            steps += 1;
            if steps > MAX_TASKS {
                return Err(QuotientError::Iterations);
            }
            let c = x.conjugate(g);
            if chain.add_generator(c.clone()) {
                pending.push(c);
            }
        }
    }
    Ok(whole.order() / chain.order())
}

/// `log₂|Qₙ| / log₂|Aut(Xⁿ)|`; over two letters the denominator is `2ⁿ − 1`.
pub fn hausdorff_estimate(t: &Transducer, n: usize) -> Result<f64, QuotientError> {
    let order = quotient_order(t, n)?;
    let d = t.alphabet_size();
    let vertices: f64 = (0..n).map(|k| (d as f64).powi(k as i32)).sum();
    let log_sym: f64 = (2..=d).map(|k| (k as f64).log2()).sum();
    Ok(log2(&order) / (vertices * log_sym))
}

/// Base-2 logarithm of a positive integer.
pub fn log2(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::MAX);
    top.log2() + shift as f64
}

type Bits = Vec<u64>;

fn bit(v: &Bits, i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn xor(a: &mut Bits, b: &Bits) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

fn first_bit(v: &Bits) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// A basis element stabilizing level `level` but not `level + 1`.
struct Entry {
    level: usize,
    pivot: usize,
    vector: Bits,
    /// leaf permutation; absent on the bottom level, where `vector` determines it
    perm: Option<Perm>,
}

enum Elem {
    Perm(Perm),
    Bottom(Bits),
}

enum Task {
    Elem(Elem),
    Square(usize),
    Commutator(usize, usize),
    Conjugate(usize, usize),
}

/// Polycyclic basis of a subgroup of the level-`n` binary quotient.
///
/// Every element is uniquely a product of basis elements taken in level
/// order, so the subgroup has order `2^len`.
struct LevelBasis {
    n: usize,
    entries: Vec<Entry>,
    by_level: Vec<Vec<usize>>,
}

impl LevelBasis {
    /// Closes `generators` under squares and commutators of basis elements,
    /// and under conjugation by `normalizer` when given.
    fn build(
        n: usize,
        generators: &[Perm],
        normalizer: Option<&[Perm]>,
    ) -> Result<Self, QuotientError> {
        let mut basis = LevelBasis {
            n,
            entries: Vec::new(),
            by_level: vec![Vec::new(); n],
        };
        if n == 0 {
            return Ok(basis);
        }
        let normalizer = normalizer.unwrap_or(&[]);
        let mut queue: VecDeque<Task> = generators
            .iter()
            .map(|g| Task::Elem(Elem::Perm(g.clone())))
            .collect();
        let mut steps = 0;
        while let Some(task) = queue.pop_front() {
            steps += 1;
            if steps > MAX_TASKS {
                return Err(QuotientError::Iterations);
            }
            let Some(elem) = basis.realize(task, normalizer) else {
                continue;
            };
            let Some(entry) = basis.sift(elem) else {
                continue;
            };
            let i = basis.entries.len();
            let bottom = entry.level + 1 == n;
            basis.by_level[entry.level].push(i);
            basis.entries.push(entry);
            if !bottom {
                queue.push_back(Task::Square(i));
            }
            for j in 0..i {
                if !(bottom && basis.entries[j].level + 1 == n) {
                    queue.push_back(Task::Commutator(i, j));
                }
            }
            for g in 0..normalizer.len() {
                queue.push_back(Task::Conjugate(i, g));
            }
        }
        Ok(basis)
    }

    fn len(&self) -> usize {
        self.entries.len()
    }

    fn bottom_words(&self) -> usize {
        (1usize << (self.n - 1)).div_ceil(64)
    }

    /// Activity vector on level `k` of an element fixing level `k`.
    fn activity(&self, g: &Perm, k: usize) -> Bits {
        let mut v = vec![0u64; (1usize << k).div_ceil(64)];
        let shift = self.n - k;
        for u in 0..1usize << k {
            if g.0[u << shift] >> (shift - 1) & 1 == 1 {
                v[u / 64] |= 1 << (u % 64);
            }
        }
        v
    }

    /// The bottom vector `u ↦ v[u^{g⁻¹}]` of the conjugate `y^g`.
    fn conjugate_bottom(&self, v: &Bits, g: &Perm) -> Bits {
        let mut out = vec![0u64; self.bottom_words()];
        let ginv = g.inverse();
        for u in 0..1usize << (self.n - 1) {
            if bit(v, (ginv.0[u << 1] >> 1) as usize) {
                out[u / 64] |= 1 << (u % 64);
            }
        }
        out
    }

    fn realize(&self, task: Task, normalizer: &[Perm]) -> Option<Elem> {
        let elem = match task {
            Task::Elem(e) => e,
            Task::Square(i) => {
                let p = self.entries[i].perm.as_ref()?;
                Elem::Perm(p.then(p))
            }
            Task::Commutator(i, j) => {
                let (x, y) = (&self.entries[i], &self.entries[j]);
                match (&x.perm, &y.perm) {
                    (Some(px), Some(py)) => Elem::Perm(px.commutator(py)),
                    (None, Some(p)) | (Some(p), None) => {
                        let v = if x.perm.is_none() {
                            &x.vector
                        } else {
                            &y.vector
                        };
                        let mut c = self.conjugate_bottom(v, p);
                        xor(&mut c, v);
                        Elem::Bottom(c)
                    }
                    (None, None) => return None,
                }
            }
            Task::Conjugate(i, g) => {
                let x = &self.entries[i];
                match &x.perm {
                    Some(p) => Elem::Perm(p.conjugate(&normalizer[g])),
                    None => Elem::Bottom(self.conjugate_bottom(&x.vector, &normalizer[g])),
                }
            }
        };
        Some(elem)
    }

    /// Reduces an element against the basis; the non-trivial residue, if any.
    fn sift(&self, elem: Elem) -> Option<Entry> {
        let bottom = self.n - 1;
        let mut v = match elem {
            Elem::Bottom(v) => v,
            Elem::Perm(mut g) => {
                for k in 0..bottom {
                    let mut a = self.activity(&g, k);
                    for &i in &self.by_level[k] {
                        let e = &self.entries[i];
                        if bit(&a, e.pivot) {
                            g = g.then(e.perm.as_ref().expect("non-bottom entry"));
                            xor(&mut a, &e.vector);
                        }
                    }
                    if let Some(pivot) = first_bit(&a) {
                        return Some(Entry {
                            level: k,
                            pivot,
                            vector: a,
                            perm: Some(g),
                        });
                    }
                }
                self.activity(&g, bottom)
            }
        };
        for &i in &self.by_level[bottom] {
            let e = &self.entries[i];
            if bit(&v, e.pivot) {
                xor(&mut v, &e.vector);
            }
        }
        first_bit(&v).map(|pivot| Entry {
            level: bottom,
            pivot,
            vector: v,
            perm: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;
    use crate::expr::eval_word;

    fn gamma() -> Transducer {
        builtin("gamma", None).unwrap()
    }

    #[test]
    fn generators_on_first_level() {
        let t = gamma();
        let a = level_permutation(&t, &eval_word(&t, "a").unwrap(), 1).unwrap();
        assert_eq!(a.image(), &[1, 0]);
        assert!(level_permutation(&t, &eval_word(&t, "b").unwrap(), 1)
            .unwrap()
            .is_identity());
        assert!(level_permutation(&t, &GroupWord::empty(), 5)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn predicted_orders() {
        assert_eq!(predicted_order_basilica(1).unwrap(), BigUint::from(2u32));
        assert_eq!(predicted_order_basilica(3).unwrap(), BigUint::from(64u32));
        assert_eq!(predicted_exponent_basilica(6).unwrap(), 45);
        for n in 0..=30 {
            assert!(predicted_exponent_basilica(n).is_ok());
        }
    }

    #[test]
    fn gamma_orders_match_chain() {
        let t = gamma();
        let gens = default_generators(&t);
        for n in 1..=5 {
            let perms = generator_perms(&t, &gens, n).unwrap();
            let chain = StabilizerChain::new(1 << n, &perms).order();
            assert_eq!(group_order(&t, &gens, n).unwrap(), chain, "n = {n}");
        }
        assert_eq!(group_order(&t, &gens, 4).unwrap(), BigUint::from(4096u32));
    }

    #[test]
    fn grigorchuk_orders_match_chain() {
        let t = builtin("grigorchuk", None).unwrap();
        for n in 1..=5 {
            let perms = generator_perms(&t, &default_generators(&t), n).unwrap();
            let chain = StabilizerChain::new(1 << n, &perms).order();
            assert_eq!(quotient_order(&t, n).unwrap(), chain, "n = {n}");
        }
        // |G/St(3)| = 2^7
        assert_eq!(quotient_order(&t, 3).unwrap(), BigUint::from(128u32));
    }

    #[test]
    fn derived_index_matches_chain_normal_closure() {
        let t = gamma();
        for n in 1..=5 {
            assert_eq!(derived_index(&t, n).unwrap(), BigUint::from(1u32 << n));
        }
        assert_eq!(
            derived_index(&crate::automaton::trivial(2), 3).unwrap(),
            BigUint::one()
        );
    }

    #[test]
    fn element_orders() {
        let t = gamma();
        let a = eval_word(&t, "a").unwrap();
        let c = eval_word(&t, "[a,b]").unwrap();
        assert_eq!(element_order(&t, &a, 3).unwrap(), BigUint::from(4u32));
        assert_eq!(element_order(&t, &c, 4).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn hausdorff_small_levels() {
        let t = gamma();
        assert!((hausdorff_estimate(&t, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((hausdorff_estimate(&t, 4).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let t = gamma();
        assert_eq!(
            level_permutation(&t, &GroupWord::empty(), 17),
            Err(QuotientError::Budget { level: 17, d: 2 })
        );
    }

    #[test]
    fn log2_of_large_powers() {
        assert_eq!(log2(&(BigUint::one() << 687u32)), 687.0);
        assert!((log2(&BigUint::from(3u32)) - 3f64.log2()).abs() < 1e-12);
    }
}
