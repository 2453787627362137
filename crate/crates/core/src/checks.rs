//! Algebraic property checks built on the word-problem solver.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::SignedState;
use crate::ball::Ball;
use crate::elements::ElementSet;
use crate::expr::{parse_word, EvalError, Generators, ParseError, WordExpr};
use crate::solver::WordProblem;
use crate::word::GroupWord;
use crate::wreath::decompose;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("the automaton is not monomial")]
    NotMonomial,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("no generator has `{0}` as a section")]
    NoParent(String),
    #[error("need at least {0} generators")]
    TooFewGenerators(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// True iff the positive words of length at most `max_len` over the first two
/// generators represent pairwise distinct elements.
pub fn free_monoid_check(wp: &WordProblem, max_len: usize) -> Result<bool, CheckError> {
    let gens = wp.transducer().primary_generators();
    if gens.len() < 2 {
        return Err(CheckError::TooFewGenerators(2));
    }
    let letters = [
        SignedState::positive(gens[0]),
        SignedState::positive(gens[1]),
    ];
    let mut set = ElementSet::new(wp);
    let mut frontier = vec![(GroupWord::empty(), set.action().identity())];
    set.insert_with_signature(GroupWord::empty(), &frontier[0].1);
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (w, sig) in &frontier {
            for &s in &letters {
                let mut u = w.clone();
                u.push(s);
                let sig = set.action().extend(sig, s);
                if !set.insert_with_signature(u.clone(), &sig).1 {
                    return Ok(false);
                }
                next.push((u, sig));
            }
        }
        frontier = next;
    }
    Ok(true)
}

/// Non-trivial ball elements whose square is trivial.
pub fn torsion_check(ball: &Ball<'_>) -> Vec<GroupWord> {
    let wp = ball.word_problem();
    ball.words()
        .iter()
        .filter(|w| !w.is_empty() && wp.is_identity(&(*w * *w)))
        .cloned()
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RelatorResult {
    pub relator: String,
    /// value substituted for `p`, if the relator mentions it
    pub p: Option<i64>,
    pub identity: bool,
}

/// Evaluates each relator, substituting `p ∈ {1, 2, 4, …, pmax}` where it
/// occurs, and tests each instance for triviality.
pub fn verify_relators(
    wp: &WordProblem,
    relators: &[WordExpr],
    pmax: i64,
) -> Result<Vec<RelatorResult>, CheckError> {
    let t = wp.transducer();
    let mut out = Vec::new();
    for r in relators {
        let ps: Vec<Option<i64>> = if r.mentions("p") {
            std::iter::successors(Some(1i64), |p| p.checked_mul(2))
                .take_while(|&p| p <= pmax)
                .map(Some)
                .collect()
        } else {
            vec![None]
        };
        for p in ps {
            let vars: HashMap<String, i64> = p.map(|p| ("p".to_string(), p)).into_iter().collect();
            let w = r.eval_with(t, &vars)?;
            out.push(RelatorResult {
                relator: r.to_string(),
                p,
                identity: wp.is_identity(&w),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchingWitness {
    pub s_prime: String,
    pub t_prime: String,
    pub n: usize,
    pub witness: String,
    /// letters (1-based) at which the witness has a non-trivial section
    pub nontrivial_coordinates: Vec<usize>,
    pub verified: bool,
    #[serde(skip)]
    pub word: GroupWord,
}

/// In a monomial group, let `s′`, `t′` be the generators with sections `s`, `t`
/// and `n` the order of `π_{t′}`. The witness is `[s′, (t′)ⁿ]`; it is verified
/// when exactly one section is non-trivial and that section equals `[s, t]`.
/// When `[s, t]` is trivial, verification asks for all sections to be trivial.
pub fn branching_witness(
    wp: &WordProblem,
    s: &str,
    t: &str,
) -> Result<BranchingWitness, CheckError> {
    let tr = wp.transducer();
    if !tr.validate().monomial {
        return Err(CheckError::NotMonomial);
    }
    let resolve = |name: &str| {
        tr.resolve(name)
            .ok_or_else(|| CheckError::UnknownGenerator(name.to_string()))
    };
    let (s, t) = (resolve(s)?, resolve(t)?);
    let to_word = |x: Option<SignedState>| x.map_or_else(GroupWord::empty, GroupWord::generator);
    let target = GroupWord::commutator(&to_word(s), &to_word(t));
    let (Some(s), Some(t)) = (s, t) else {
        return Ok(BranchingWitness {
            s_prime: "1".into(),
            t_prime: "1".into(),
            n: 1,
            witness: "1".into(),
            nontrivial_coordinates: Vec::new(),
            verified: true,
            word: GroupWord::empty(),
        });
    };
    let parent = |x: SignedState| {
        tr.primary_generators()
            .into_iter()
            .flat_map(|q| [SignedState::positive(q), SignedState::new(q, true)])
            .find(|&p| {
                decompose(tr, &GroupWord::generator(p))
                    .children
                    .contains(&GroupWord::generator(x))
            })
            .ok_or_else(|| CheckError::NoParent(GroupWord::generator(x).display(tr).to_string()))
    };
    let (sp, tp) = (parent(s)?, parent(t)?);
    let n = permutation_order(tr.root_permutation(tp));
    let word = GroupWord::commutator(
        &GroupWord::generator(sp),
        &GroupWord::generator(tp).pow(n as i64),
    );
    let dec = decompose(tr, &word);
    let nontrivial: Vec<usize> = (0..dec.children.len())
        .filter(|&x| !wp.is_identity(&dec.children[x]))
        .collect();
    let verified = if wp.is_identity(&target) {
        nontrivial.is_empty()
    } else {
        nontrivial.len() == 1 && wp.equal(&dec.children[nontrivial[0]], &target)
    };
    Ok(BranchingWitness {
        s_prime: GroupWord::generator(sp).display(tr).to_string(),
        t_prime: GroupWord::generator(tp).display(tr).to_string(),
        n,
        witness: word.display(tr).to_string(),
        nontrivial_coordinates: nontrivial.into_iter().map(|x| x + 1).collect(),
        verified,
        word,
    })
}

/// Order of a permutation given as an image table.
pub fn permutation_order(perm: &[u8]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut order = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x] as usize;
            len += 1;
        }
        order = num_integer::lcm(order, len);
    }
    order
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub word: String,
    pub root_swaps: bool,
    pub first_child: String,
    pub second_child: String,
    pub holds: bool,
}

/// In Γ, `b⁻¹a = ⟨a⁻¹b, 1⟩(𝟏 𝟐)`: the element generating the BSV recursion.
pub fn bsv_membership_check(wp: &WordProblem) -> Result<MembershipReport, CheckError> {
    membership(wp, "b^-1 a", "a^-1 b", "1")
}

/// Checks that `word` decomposes as `⟨first, second⟩(𝟏 𝟐)` in a binary group.
pub fn membership(
    wp: &WordProblem,
    word: &str,
    first: &str,
    second: &str,
) -> Result<MembershipReport, CheckError> {
    let t = wp.transducer();
    let parse = |text: &str| -> Result<GroupWord, CheckError> { Ok(parse_word(text)?.eval(t)?) };
    let w = parse(word)?;
    let dec = decompose(t, &w);
    let root_swaps = dec.root == [1, 0];
    let holds = root_swaps
        && dec.children.len() == 2
        && wp.equal(&dec.children[0], &parse(first)?)
        && wp.equal(&dec.children[1], &parse(second)?);
    Ok(MembershipReport {
        word: w.display(t).to_string(),
        root_swaps,
        first_child: dec.children[0].display(t).to_string(),
        second_child: dec
            .children
            .get(1)
            .map_or_else(String::new, |c| c.display(t).to_string()),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;
    use crate::ball::WeightVector;

    fn gamma() -> WordProblem {
        WordProblem::new(&builtin("gamma", None).unwrap()).unwrap()
    }

    #[test]
    fn free_monoid() {
        let wp = gamma();
        assert!(free_monoid_check(&wp, 0).unwrap());
        assert!(free_monoid_check(&wp, 1).unwrap());
        assert!(free_monoid_check(&wp, 6).unwrap());
        let g = WordProblem::new(&builtin("grigorchuk", None).unwrap()).unwrap();
        assert!(!free_monoid_check(&g, 2).unwrap());
    }

    #[test]
    fn torsion() {
        let wp = gamma();
        let w = WeightVector::unit(wp.transducer());
        assert!(torsion_check(&Ball::new(&wp, 4.0, &w, 100_000).unwrap()).is_empty());
        assert!(torsion_check(&Ball::new(&wp, 0.0, &w, 100_000).unwrap()).is_empty());
        let g = WordProblem::new(&builtin("grigorchuk", None).unwrap()).unwrap();
        let ball = Ball::new(&g, 1.0, &WeightVector::unit(g.transducer()), 100).unwrap();
        let found: Vec<String> = torsion_check(&ball)
            .iter()
            .map(|w| w.display(g.transducer()).to_string())
            .collect();
        assert_eq!(found, ["a", "b", "c", "d"]);
    }

    #[test]
    fn relators() {
        let wp = gamma();
        let family = [
            parse_word("[[a^p,b^p],b^p]").unwrap(),
            parse_word("[[b^p,a^(2p)],a^(2p)]").unwrap(),
        ];
        let r = verify_relators(&wp, &family, 16).unwrap();
        assert_eq!(r.len(), 10);
        assert!(r.iter().all(|x| x.identity));
        let r = verify_relators(&wp, &[parse_word("[a,b]").unwrap()], 16).unwrap();
        assert_eq!(r.len(), 1);
        assert!(!r[0].identity);
        assert!(verify_relators(&wp, &[], 16).unwrap().is_empty());
    }

    #[test]
    fn witnesses() {
        let wp = gamma();
        let w = branching_witness(&wp, "a", "b").unwrap();
        assert_eq!((w.s_prime.as_str(), w.t_prime.as_str(), w.n), ("b", "a", 2));
        assert!(w.verified);
        assert_eq!(w.nontrivial_coordinates, [1]);
        // here (t′)ⁿ = b is not diagonal, so [a,b] has two non-trivial sections
        let w = branching_witness(&wp, "b", "a").unwrap();
        assert_eq!((w.s_prime.as_str(), w.t_prime.as_str(), w.n), ("a", "b", 1));
        assert!(!w.verified);
        assert_eq!(w.nontrivial_coordinates, [1, 2]);
        // [a, a²] is trivial
        let w = branching_witness(&wp, "b", "b").unwrap();
        assert!(w.word.is_empty() && w.verified);
        assert!(branching_witness(&wp, "id", "id").unwrap().verified);
        let bsv = WordProblem::new(&builtin("bsv", None).unwrap()).unwrap();
        let w = branching_witness(&bsv, "l", "m").unwrap();
        assert!(w.verified, "{w:?}");
        let g = WordProblem::new(&builtin("grigorchuk", None).unwrap()).unwrap();
        assert_eq!(
            branching_witness(&g, "a", "b").unwrap_err(),
            CheckError::NotMonomial
        );
    }

    #[test]
    fn bsv_element() {
        let wp = gamma();
        let r = bsv_membership_check(&wp).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.first_child, "Ab");
        // a⁻¹b = ⟨1, b⁻¹a⟩(𝟏 𝟐)
        assert!(membership(&wp, "a^-1 b", "1", "b^-1 a").unwrap().holds);
        assert!(!membership(&wp, "a^-1 b", "b^-1 a", "1").unwrap().holds);
        assert!(!membership(&wp, "1", "1", "1").unwrap().holds);
    }

    #[test]
    fn orders_of_permutations() {
        assert_eq!(permutation_order(&[1, 0]), 2);
        assert_eq!(permutation_order(&[1, 2, 0, 4, 3]), 6);
        assert_eq!(permutation_order(&[]), 1);
    }
}
