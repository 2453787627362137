//! Permutations and a deterministic Schreier–Sims stabilizer chain.

use std::collections::{HashMap, HashSet};

use num_bigint::BigUint;

/// A permutation of `0..n` as an image table; `p[x]` is the image of `x`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` followed by `other`.
    #[must_use]
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&x| other.0[x as usize]).collect())
    }

    #[must_use]
    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    /// `self⁻¹ · by⁻¹ · self · by`.
    #[must_use]
    pub fn commutator(&self, by: &Perm) -> Perm {
        self.inverse().then(&by.inverse()).then(self).then(by)
    }

    /// `by⁻¹ · self · by`.
    #[must_use]
    pub fn conjugate(&self, by: &Perm) -> Perm {
        by.inverse().then(self).then(by)
    }

    /// Lengths of all cycles, fixed points included.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// Multiplicative order: the lcm of the cycle lengths.
    pub fn order(&self) -> BigUint {
        self.cycle_lengths()
            .into_iter()
            .fold(BigUint::from(1u32), |acc, l| {
                num_integer::lcm(acc, BigUint::from(l))
            })
    }

    fn first_moved(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .find(|(i, &x)| *i as u32 != x)
            .map(|(i, _)| i as u32)
    }
}

struct Level {
    base: u32,
    gens: Vec<Perm>,
    orbit: Vec<u32>,
    /// orbit point → index into `orbit`/`transversal`
    position: HashMap<u32, usize>,
    /// `transversal[i]` maps `base` to `orbit[i]`
    transversal: Vec<Perm>,
    /// (orbit index, generator index) pairs whose Schreier generator was sifted
    done: HashSet<(usize, usize)>,
}

impl Level {
    fn new(base: u32, degree: usize) -> Self {
        Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            position: HashMap::from([(base, 0)]),
            transversal: vec![Perm::identity(degree)],
            done: HashSet::new(),
        }
    }

    fn extend_orbit(&mut self) {
        let mut i = 0;
        while i < self.orbit.len() {
            for g in &self.gens {
                let image = g.0[self.orbit[i] as usize];
                if !self.position.contains_key(&image) {
                    self.position.insert(image, self.orbit.len());
                    self.orbit.push(image);
                    self.transversal.push(self.transversal[i].then(g));
                }
            }
            i += 1;
        }
    }
}

/// Base and strong generating set of a permutation group.
///
/// Base points are chosen as the smallest point moved by the element that
/// needed a new level, so the chain depends only on the input order.
pub struct StabilizerChain {
    degree: usize,
    levels: Vec<Level>,
}

impl StabilizerChain {
    pub fn new(degree: usize, generators: &[Perm]) -> Self {
        let mut chain = StabilizerChain {
            degree,
            levels: Vec::new(),
        };
        for g in generators {
            chain.add_generator(g.clone());
        }
        chain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.base).collect()
    }

    /// Product of the basic orbit lengths.
    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| {
            acc * BigUint::from(l.orbit.len())
        })
    }

    /// Sifts `g` from level `from`: the residue and the level where it stopped.
    fn strip(&self, mut g: Perm, from: usize) -> (Perm, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g.0[level.base as usize];
            match level.position.get(&beta) {
                Some(&k) => g = g.then(&level.transversal[k].inverse()),
                None => return (g, i),
            }
        }
        (g, self.levels.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.strip(g.clone(), 0).0.is_identity()
    }

    /// Adds `g` to the group and restores the chain property. Returns false if
    /// `g` was already a member.
    pub fn add_generator(&mut self, g: Perm) -> bool {
        let (h, j) = self.strip(g, 0);
        if h.is_identity() {
            return false;
        }
        self.install(h, 0, j);
        self.complete(j);
        true
    }

    /// Adds `h` as a strong generator on levels `from..=to`, creating a level
    /// if needed.
    fn install(&mut self, h: Perm, from: usize, to: usize) {
        if to == self.levels.len() {
            let base = h.first_moved().expect("non-identity residue");
            self.levels.push(Level::new(base, self.degree));
        }
        for level in &mut self.levels[from..=to] {
            level.gens.push(h.clone());
            level.extend_orbit();
        }
    }

    /// Sifts all unprocessed Schreier generators, working upward from `start`.
    fn complete(&mut self, start: usize) {
        let mut i = start.min(self.levels.len() - 1) as isize;
        while i >= 0 {
            let l = i as usize;
            let mut restart = None;
            'scan: for bi in 0..self.levels[l].orbit.len() {
                for si in 0..self.levels[l].gens.len() {
                    if !self.levels[l].done.insert((bi, si)) {
                        continue;
                    }
                    let level = &self.levels[l];
                    let s = &level.gens[si];
                    let image = s.0[level.orbit[bi] as usize];
                    let k = level.position[&image];
                    let schreier = level.transversal[bi]
                        .then(s)
                        .then(&level.transversal[k].inverse());
                    let (h, j) = self.strip(schreier, l + 1);
                    if !h.is_identity() {
                        self.install(h, l + 1, j);
                        restart = Some(j);
                        break 'scan;
                    }
                }
            }
            match restart {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Perm {
        Perm((0..n as u32).map(|i| (i + 1) % n as u32).collect())
    }

    fn transposition(n: usize, a: u32, b: u32) -> Perm {
        let mut p = Perm::identity(n);
        p.0.swap(a as usize, b as usize);
        p
    }

    #[test]
    fn symmetric_and_cyclic_orders() {
        for n in 2..8usize {
            let chain = StabilizerChain::new(n, &[cycle(n), transposition(n, 0, 1)]);
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(chain.order(), BigUint::from(fact));
            assert_eq!(
                StabilizerChain::new(n, &[cycle(n)]).order(),
                BigUint::from(n)
            );
        }
    }

    #[test]
    fn dihedral_and_membership() {
        let n = 6;
        let flip = Perm((0..n as u32).map(|i| (n as u32 - i) % n as u32).collect());
        let chain = StabilizerChain::new(n, &[cycle(n), flip]);
        assert_eq!(chain.order(), BigUint::from(12u32));
        assert!(chain.contains(&cycle(n).then(&cycle(n))));
        assert!(!chain.contains(&transposition(n, 0, 1)));
    }

    #[test]
    fn rubik_like_product() {
        // ⟨(0 1 2), (2 3 4)⟩ = A5
        let a = Perm(vec![1, 2, 0, 3, 4]);
        let b = Perm(vec![0, 1, 3, 4, 2]);
        assert_eq!(
            StabilizerChain::new(5, &[a, b]).order(),
            BigUint::from(60u32)
        );
    }

    #[test]
    fn permutation_algebra() {
        let a = Perm(vec![1, 2, 0, 3]);
        let b = transposition(4, 0, 3);
        assert!(a.then(&a.inverse()).is_identity());
        assert_eq!(a.order(), BigUint::from(3u32));
        assert_eq!(a.then(&b).order(), BigUint::from(4u32));
        assert!(a.commutator(&a).is_identity());
        assert_eq!(a.conjugate(&b).order(), BigUint::from(3u32));
    }
}
