//! Actions on the 3-regular tree.
//!
//! The tree is modelled as the binary tree `{𝟏,𝟐}*` with the root removed and
//! its two edges fused into one edge `e` joining `𝟏` and `𝟐`. Vertices are
//! non-empty words. Elements fixing `e` are pairs `⟨g₁,g₂⟩` of rooted
//! automorphisms acting on the two halves, and `t` is a hyperbolic
//! translation through `e`.

use std::collections::{HashSet, VecDeque};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automaton::SignedState;
use crate::expr::{eval_word, WordError};
use crate::word::GroupWord;

/// Deepest level on which rooted permutations are tabulated.
pub const MAX_LEVEL: usize = 22;

/// Largest radius accepted by [`transitivity_check`].
pub const MAX_RADIUS: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnrootedError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("vertex of length {0} exceeds the table depth {MAX_LEVEL}")]
    Budget(usize),
    #[error("radius {0} exceeds {MAX_RADIUS}")]
    Radius(usize),
    #[error("vertices are non-empty words over 1 and 2")]
    EmptyVertex,
}

/// A group of binary rooted-tree automorphisms given by self-similar rules
/// whose sections may be words, so states such as `c = ⟨b, d²⟩` need no
/// finite automaton.
pub struct RootedSystem {
    names: Vec<String>,
    swaps: Vec<bool>,
    sections: Vec<[Vec<SignedState>; 2]>,
    /// `levels[n][code]` is the permutation of level `n` by signed state `code`
    levels: Vec<OnceLock<Vec<Vec<u32>>>>,
}

impl RootedSystem {
    /// `rules[i] = (name, swaps root, left section, right section)`, sections
    /// written over the same names.
    pub fn new(rules: &[(&str, bool, &str, &str)]) -> Result<Self, WordError> {
        let names: Vec<String> = rules.iter().map(|r| r.0.to_string()).collect();
        let mut sections = Vec::new();
        for &(_, _, left, right) in rules {
            let w = |s: &str| -> Result<Vec<SignedState>, WordError> {
                Ok(eval_word(&names, s)?.symbols().to_vec())
            };
            sections.push([w(left)?, w(right)?]);
        }
        Ok(RootedSystem {
            swaps: rules.iter().map(|r| r.1).collect(),
            names,
            sections,
            levels: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Basilica generators with the auxiliary states `c = ⟨b,d²⟩`, `d = ⟨1,c⟩`.
    pub fn basilica_extended() -> Self {
        RootedSystem::new(&[
            ("a", true, "b", "1"),
            ("b", false, "a", "1"),
            ("c", false, "b", "dd"),
            ("d", false, "1", "c"),
        ])
        .expect("valid rules")
    }

    pub fn grigorchuk() -> Self {
        RootedSystem::new(&[
            ("a", true, "1", "1"),
            ("b", false, "a", "c"),
            ("c", false, "a", "d"),
            ("d", false, "1", "b"),
        ])
        .expect("valid rules")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn word(&self, text: &str) -> Result<GroupWord, WordError> {
        eval_word(&self.names, text)
    }

    fn level(&self, n: usize) -> &Vec<Vec<u32>> {
        self.levels[n].get_or_init(|| {
            let codes = 2 * self.names.len();
            if n == 0 {
                return vec![vec![0]; codes];
            }
            let below = self.level(n - 1);
            let half = 1usize << (n - 1);
            let mut out = vec![Vec::new(); codes];
            for (i, (swap, sections)) in self.swaps.iter().zip(&self.sections).enumerate() {
                let mut perm = vec![0u32; 2 * half];
                for (x, section) in sections.iter().enumerate() {
                    let y = x ^ usize::from(*swap);
                    for w in 0..half {
                        let image = section
                            .iter()
                            .fold(w as u32, |v, s| below[s.code() as usize][v as usize]);
                        perm[x * half + w] = (y * half) as u32 + image;
                    }
                }
                let mut inv = vec![0u32; 2 * half];
                for (v, &img) in perm.iter().enumerate() {
                    inv[img as usize] = v as u32;
                }
                out[SignedState::positive(i).code() as usize] = perm;
                out[SignedState::new(i, true).code() as usize] = inv;
            }
            out
        })
    }

    /// Image of the rooted vertex `v` under the word `w`.
    pub fn apply(&self, w: &[SignedState], v: &[u8]) -> Result<Vec<u8>, UnrootedError> {
        if v.len() > MAX_LEVEL {
            return Err(UnrootedError::Budget(v.len()));
        }
        let table = self.level(v.len());
        let index = v.iter().fold(0u32, |acc, &x| acc << 1 | u32::from(x));
        let image = w
            .iter()
            .fold(index, |i, s| table[s.code() as usize][i as usize]);
        Ok((0..v.len())
            .map(|k| (image >> (v.len() - 1 - k) & 1) as u8)
            .collect())
    }

    /// True if `w` fixes every vertex of length at most `depth`.
    pub fn fixes_to_depth(&self, w: &GroupWord, depth: usize) -> Result<bool, UnrootedError> {
        if depth > MAX_LEVEL {
            return Err(UnrootedError::Budget(depth));
        }
        // fixing the deepest level fixes all levels above it
        let table = self.level(depth);
        Ok((0..1u32 << depth).all(|i| {
            w.symbols()
                .iter()
                .fold(i, |v, s| table[s.code() as usize][v as usize])
                == i
        }))
    }
}

/// A tree automorphism given by a finite portrait: a rooted word, or a pair
/// acting on the two subtrees below a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Portrait {
    Word(Vec<SignedState>),
    Split(Box<Portrait>, Box<Portrait>),
}

impl Portrait {
    pub fn word(w: &GroupWord) -> Self {
        Portrait::Word(w.symbols().to_vec())
    }

    pub fn split(left: Portrait, right: Portrait) -> Self {
        Portrait::Split(Box::new(left), Box::new(right))
    }

    #[must_use]
    pub fn inverse(&self) -> Portrait {
        match self {
            Portrait::Word(w) => Portrait::Word(w.iter().rev().map(|s| s.inverse()).collect()),
            Portrait::Split(l, r) => Portrait::split(l.inverse(), r.inverse()),
        }
    }

    pub fn apply(&self, sys: &RootedSystem, v: &[u8]) -> Result<Vec<u8>, UnrootedError> {
        match self {
            Portrait::Word(w) => sys.apply(w, v),
            Portrait::Split(l, r) => match v.split_first() {
                None => Ok(Vec::new()),
                Some((&x, rest)) => {
                    let mut out = vec![x];
                    out.extend(if x == 0 { l } else { r }.apply(sys, rest)?);
                    Ok(out)
                }
            },
        }
    }
}

/// Which HNN extension: the basilica one with the lifts that satisfy
/// `aᵗ = b`, the same with the lifts exactly as printed, or Grigorchuk's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Delta,
    DeltaLiteral,
    Grig,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Delta => "delta",
            Variant::DeltaLiteral => "delta-literal",
            Variant::Grig => "gtilde",
        }
    }
}

/// The translation `t`. Basilica: `(𝟐𝟐w)ᵗ=𝟐w, (𝟐𝟏w)ᵗ=𝟏𝟐w, 𝟐ᵗ=𝟏, (𝟏w)ᵗ=𝟏𝟏w`.
/// Grigorchuk: `(𝟏w)ᵗ=𝟏𝟐w, (𝟐𝟏w)ᵗ=𝟏𝟏w, (𝟐𝟐w)ᵗ=𝟐w, 𝟐ᵗ=𝟏`.
pub fn t_act(v: &[u8], variant: Variant, inverse: bool) -> Result<Vec<u8>, UnrootedError> {
    let join = |prefix: &[u8], rest: &[u8]| [prefix, rest].concat();
    let out = match (variant, inverse, v) {
        (_, _, []) => return Err(UnrootedError::EmptyVertex),
        (Variant::Grig, false, [0, w @ ..]) => join(&[0, 1], w),
        (Variant::Grig, true, [0, 1, w @ ..]) => join(&[0], w),
        (Variant::Grig, true, [0, 0, w @ ..]) => join(&[1, 0], w),
        (Variant::Grig, true, [0]) => vec![1],
        (Variant::Grig, false, [1, 0, w @ ..]) => join(&[0, 0], w),
        (_, false, [1, 1, w @ ..]) => join(&[1], w),
        (_, false, [1]) => vec![0],
        (_, true, [1, w @ ..]) => join(&[1, 1], w),
        (_, false, [1, 0, w @ ..]) => join(&[0, 1], w),
        (_, false, [0, w @ ..]) => join(&[0, 0], w),
        (_, true, [0]) => vec![1],
        (_, true, [0, 0, w @ ..]) => join(&[0], w),
        (_, true, [0, 1, w @ ..]) => join(&[1, 0], w),
        _ => unreachable!("patterns cover all non-empty words"),
    };
    Ok(out)
}

/// A generator of an unrooted action.
#[derive(Clone, Debug)]
pub enum UnrootedGen {
    T,
    Lift(Portrait),
}

/// Generators acting on the 3-regular tree, with names for word parsing.
pub struct UnrootedGroup {
    pub variant: Variant,
    pub system: RootedSystem,
    pub names: Vec<String>,
    pub gens: Vec<UnrootedGen>,
}

impl UnrootedGroup {
    pub fn new(variant: Variant) -> Self {
        match variant {
            Variant::Delta | Variant::DeltaLiteral => {
                let system = RootedSystem::basilica_extended();
                let w = |s: &str| Portrait::word(&system.word(s).expect("rooted word"));
                let (ra, rb) = if variant == Variant::Delta {
                    ("d", "c")
                } else {
                    ("c", "d")
                };
                let a = Portrait::split(w("a"), w(ra));
                let b = Portrait::split(w("b"), w(rb));
                UnrootedGroup {
                    variant,
                    names: vec!["a".into(), "b".into(), "t".into()],
                    gens: vec![UnrootedGen::Lift(a), UnrootedGen::Lift(b), UnrootedGen::T],
                    system,
                }
            }
            Variant::Grig => {
                let system = RootedSystem::grigorchuk();
                let w = |s: &str| Portrait::word(&system.word(s).expect("rooted word"));
                let a = Portrait::split(
                    w("a"),
                    Portrait::split(w("d"), Portrait::split(w("a^d"), w("d"))),
                );
                UnrootedGroup {
                    variant,
                    names: ["a", "b", "c", "d", "t"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    gens: vec![
                        UnrootedGen::Lift(a),
                        UnrootedGen::Lift(Portrait::split(w("b"), w("d"))),
                        UnrootedGen::Lift(Portrait::split(w("c"), w("c"))),
                        UnrootedGen::Lift(Portrait::split(w("d"), w("b"))),
                        UnrootedGen::T,
                    ],
                    system,
                }
            }
        }
    }

    pub fn word(&self, text: &str) -> Result<GroupWord, UnrootedError> {
        Ok(eval_word(&self.names, text)?)
    }

    /// Image of `v` under one signed generator.
    pub fn act_symbol(&self, s: SignedState, v: &[u8]) -> Result<Vec<u8>, UnrootedError> {
        match &self.gens[s.state()] {
            UnrootedGen::T => t_act(v, self.variant, s.is_inverse()),
            UnrootedGen::Lift(p) if s.is_inverse() => p.inverse().apply(&self.system, v),
            UnrootedGen::Lift(p) => p.apply(&self.system, v),
        }
    }

    /// Image of `v` under `w`, letters acting left to right.
    pub fn act(&self, w: &GroupWord, v: &[u8]) -> Result<Vec<u8>, UnrootedError> {
        if v.is_empty() {
            return Err(UnrootedError::EmptyVertex);
        }
        w.symbols()
            .iter()
            .try_fold(v.to_vec(), |cur, &s| self.act_symbol(s, &cur))
    }

    /// The first vertex of length at most `depth` moved by `w`, if any.
    pub fn first_moved(
        &self,
        w: &GroupWord,
        depth: usize,
    ) -> Result<Option<Vec<u8>>, UnrootedError> {
        let vertices = all_vertices(depth);
        let moved: Result<Vec<Option<Vec<u8>>>, UnrootedError> = vertices
            .par_iter()
            .map(|v| Ok((self.act(w, v)? != *v).then(|| v.clone())))
            .collect();
        Ok(moved?.into_iter().flatten().next())
    }

    pub fn fixes_to_depth(&self, w: &GroupWord, depth: usize) -> Result<bool, UnrootedError> {
        Ok(self.first_moved(w, depth)?.is_none())
    }

    /// True if `u` and `v` act alike on all vertices of length at most `depth`.
    pub fn agree_to_depth(
        &self,
        u: &GroupWord,
        v: &GroupWord,
        depth: usize,
    ) -> Result<bool, UnrootedError> {
        self.fixes_to_depth(&(u * &v.inverse()), depth)
    }
}

/// All vertices of length `1..=depth`, shorter first, lexicographic within a length.
pub fn all_vertices(depth: usize) -> Vec<Vec<u8>> {
    (1..=depth)
        .flat_map(|n| {
            (0..1u32 << n).map(move |i| (0..n).map(|k| (i >> (n - 1 - k) & 1) as u8).collect())
        })
        .collect()
}

/// Tree distance from the vertex `𝟏`.
pub fn distance_from_one(v: &[u8]) -> usize {
    match v.first() {
        Some(0) => v.len() - 1,
        _ => v.len(),
    }
}

/// Neighbours of a vertex: its children, its parent, and across `e` for `𝟏`, `𝟐`.
pub fn neighbours(v: &[u8]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = (0..2).map(|x| [v, &[x]].concat()).collect();
    if v.len() == 1 {
        out.push(vec![1 - v[0]]);
    } else {
        out.push(v[..v.len() - 1].to_vec());
    }
    out
}

/// The relators of the presentation checked for each variant.
pub fn relators(variant: Variant) -> &'static [&'static str] {
    match variant {
        Variant::Delta | Variant::DeltaLiteral => &["b^(t^2-2)", "[[[b,t^-1],b],b]"],
        Variant::Grig => &[
            "a^2",
            "a^(tat^2+tat+ta)",
            "a^((1+ta)8)",
            "a^((1+tat^2+(1+ta)2)4)",
        ],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelatorCheck {
    pub relator: String,
    pub depth: usize,
    pub ok: bool,
    /// a vertex moved by the relator, written over 1 and 2
    pub moved: Option<String>,
}

fn vertex_text(v: &[u8]) -> String {
    v.iter().map(|&x| char::from(b'1' + x)).collect()
}

/// Checks that each expression fixes every vertex of length at most `depth`.
pub fn verify_expressions(
    group: &UnrootedGroup,
    exprs: &[&str],
    depth: usize,
) -> Result<Vec<RelatorCheck>, UnrootedError> {
    exprs
        .iter()
        .map(|&r| {
            let w = group.word(r)?;
            let moved = group.first_moved(&w, depth)?;
            Ok(RelatorCheck {
                relator: r.to_string(),
                depth,
                ok: moved.is_none(),
                moved: moved.as_deref().map(vertex_text),
            })
        })
        .collect()
}

/// Checks the presentation's relators to the given depth.
pub fn verify_unrooted_relators(
    variant: Variant,
    depth: usize,
) -> Result<Vec<RelatorCheck>, UnrootedError> {
    verify_expressions(&UnrootedGroup::new(variant), relators(variant), depth)
}

/// The relations `aᵗ = b`, `bᵗ = a²` of the basilica extension as relators.
pub const DELTA_RELATIONS: [&str; 2] = ["a^t B", "b^t A A"];

/// True if the rooted states `c` and `d` commute on all levels up to `depth`.
pub fn cd_commute(depth: usize) -> Result<bool, UnrootedError> {
    let sys = RootedSystem::basilica_extended();
    sys.fixes_to_depth(&sys.word("[c,d]")?, depth)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransitivityReport {
    pub radius: usize,
    /// vertices within `radius` of `𝟏`
    pub ball: usize,
    pub reached: usize,
    pub ok: bool,
}

/// Breadth-first orbit of `𝟏` under the generators and their inverses, kept to
/// vertices of length at most `radius + 4`; passes if every vertex within
/// distance `radius` of `𝟏` is reached.
pub fn transitivity_check(
    variant: Variant,
    radius: usize,
) -> Result<TransitivityReport, UnrootedError> {
    if radius > MAX_RADIUS {
        return Err(UnrootedError::Radius(radius));
    }
    let group = UnrootedGroup::new(variant);
    let limit = radius + 4;
    let mut seen = HashSet::from([vec![0u8]]);
    let mut queue = VecDeque::from([vec![0u8]]);
    while let Some(v) = queue.pop_front() {
        for g in 0..group.gens.len() {
            for inverse in [false, true] {
                let w = group.act_symbol(SignedState::new(g, inverse), &v)?;
                if w.len() <= limit && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
    }
    let ball: Vec<Vec<u8>> = all_vertices(radius + 1)
        .into_iter()
        .filter(|v| distance_from_one(v) <= radius)
        .collect();
    let reached = ball.iter().filter(|v| seen.contains(*v)).count();
    Ok(TransitivityReport {
        radius,
        ball: ball.len(),
        reached,
        ok: reached == ball.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugationReport {
    pub variant: Variant,
    pub samples: usize,
    pub depth: usize,
    pub failures: usize,
    pub ok: bool,
}

/// `⟨x,⟨y,z⟩⟩ᵗ` against `⟨⟨x,y⟩,z⟩` (basilica) or `⟨⟨y,x⟩,z⟩` (Grigorchuk) for
/// explicit rooted words.
pub fn conjugation_identity_holds(
    group: &UnrootedGroup,
    x: &GroupWord,
    y: &GroupWord,
    z: &GroupWord,
    depth: usize,
) -> Result<bool, UnrootedError> {
    let p = |w: &GroupWord| Portrait::word(w);
    let g = Portrait::split(p(x), Portrait::split(p(y), p(z)));
    let h = match group.variant {
        Variant::Grig => Portrait::split(Portrait::split(p(y), p(x)), p(z)),
        _ => Portrait::split(Portrait::split(p(x), p(y)), p(z)),
    };
    let sys = &group.system;
    all_vertices(depth)
        .par_iter()
        .map(|v| -> Result<bool, UnrootedError> {
            let lhs = t_act(
                &g.apply(sys, &t_act(v, group.variant, true)?)?,
                group.variant,
                false,
            )?;
            Ok(lhs == h.apply(sys, v)?)
        })
        .try_reduce(|| true, |a, b| Ok(a && b))
}

/// Tests the conjugation identity on `samples` random triples of rooted words
/// of length at most 4.
pub fn verify_conjugation_identity(
    variant: Variant,
    samples: usize,
    depth: usize,
    seed: u64,
) -> Result<ConjugationReport, UnrootedError> {
    let group = UnrootedGroup::new(variant);
    let rooted = group
        .system
        .names()
        .len()
        .min(if variant == Variant::Grig { 4 } else { 2 });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_word = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(0..=4);
        GroupWord::from_symbols(
            (0..len).map(|_| SignedState::new(rng.random_range(0..rooted), rng.random_bool(0.5))),
        )
    };
    let mut failures = 0;
    for _ in 0..samples {
        let (x, y, z) = (
            random_word(&mut rng),
            random_word(&mut rng),
            random_word(&mut rng),
        );
        if !conjugation_identity_holds(&group, &x, &y, &z, depth)? {
            failures += 1;
        }
    }
    Ok(ConjugationReport {
        variant,
        samples,
        depth,
        failures,
        ok: failures == 0,
    })
}
