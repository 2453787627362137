use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

use selfsim::automaton::{builtin, SignedState};
use selfsim::chain::{Perm, StabilizerChain};
use selfsim::quotient::{element_order, group_order, level_permutation, quotient_order};
use selfsim::spectra::{eigenvalues, hecke_matrix, q_det, q_eval, schreier_graph, SpectralPoint};
use selfsim::stochastic::{child_lengths, estimate_contraction, generator_symbols};
use selfsim::thompson::{evaluate, PlMap, Q};
use selfsim::unrooted::{neighbours, UnrootedGroup, Variant};
use selfsim::word::GroupWord;

fn gamma_word(max_len: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((1usize..=2, any::<bool>()), 0..=max_len).prop_map(|v| {
        GroupWord::from_symbols(v.into_iter().map(|(q, inv)| SignedState::new(q, inv)))
    })
}

fn perm(n: usize) -> impl Strategy<Value = Perm> {
    Just((0..n as u32).collect::<Vec<u32>>())
        .prop_shuffle()
        .prop_map(Perm)
}

/// Group generated by `gens`, by closure under right multiplication.
fn closure_size(n: usize, gens: &[Perm]) -> usize {
    let mut seen = HashSet::from([Perm::identity(n)]);
    let mut frontier = vec![Perm::identity(n)];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = p.then(g);
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    seen.len()
}

fn unrooted_word(names: usize, max_len: usize) -> impl Strategy<Value = GroupWord> {
    prop::collection::vec((0..names, any::<bool>()), 0..=max_len).prop_map(|v| {
        GroupWord::from_symbols(v.into_iter().map(|(q, inv)| SignedState::new(q, inv)))
    })
}

fn vertex(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 1..=max_len)
}

fn is_power_of_two(x: i64) -> bool {
    x > 0 && x & (x - 1) == 0
}

fn dyadic(q: &Q) -> bool {
    is_power_of_two(*q.denom())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_order_matches_closure(n in 2usize..=6, gens in prop::collection::vec(perm(6), 1..=3)) {
        let gens: Vec<Perm> = gens.into_iter().map(|p| Perm(p.0.into_iter().filter(|&x| (x as usize) < n).collect())).collect();
        let chain = StabilizerChain::new(n, &gens);
        prop_assert_eq!(chain.order(), BigUint::from(closure_size(n, &gens)));
        for g in &gens {
            prop_assert!(chain.contains(g));
        }
    }

    #[test]
    fn element_order_divides_group_order(w in gamma_word(8), n in 1usize..=6) {
        let t = builtin("gamma", None).unwrap();
        let order = element_order(&t, &w, n).unwrap();
        let q = quotient_order(&t, n).unwrap();
        prop_assert!((&q % &order).is_zero());
        let p = level_permutation(&t, &w, n).unwrap();
        prop_assert_eq!(p.order(), order.clone());
        // the level-n image is a quotient of the level-(n+1) image
        prop_assert!((element_order(&t, &w, n + 1).unwrap() % &order).is_zero());
    }

    #[test]
    fn subgroup_order_divides(w in gamma_word(6), n in 1usize..=5) {
        let t = builtin("gamma", None).unwrap();
        let sub = group_order(&t, &[w], n).unwrap();
        prop_assert!((quotient_order(&t, n).unwrap() % sub).is_zero());
    }

    #[test]
    fn children_never_longer_than_word(n in 1usize..60, seed in any::<u64>()) {
        let t = builtin("gamma", None).unwrap();
        for m in child_lengths(&t, n, 20, seed).unwrap() {
            prop_assert!(m as usize <= n);
        }
        prop_assert_eq!(generator_symbols(&t).len(), 4);
    }

    #[test]
    fn estimates_are_reproducible(seed in any::<u64>()) {
        let t = builtin("bsv", None).unwrap();
        let a = estimate_contraction(&t, 40, 30, seed).unwrap();
        let b = estimate_contraction(&t, 40, 30, seed).unwrap();
        prop_assert_eq!(a.mu_hat.to_bits(), b.mu_hat.to_bits());
        prop_assert!(a.mu_hat >= 0.0 && a.mu_hat <= 1.0);
    }

    #[test]
    fn determinant_matches_closed_form(l in -1.0f64..1.0, m in -1.0f64..1.0, v in -1.0f64..1.0, n in 0usize..=4) {
        let p = SpectralPoint::new(l, m, v);
        let (det, closed) = (q_det(n, p), q_eval(n, p));
        prop_assert!((det - closed).abs() <= 1e-8 * (1.0 + det.abs().max(closed.abs())), "{det} {closed}");
    }

    #[test]
    fn unrooted_words_are_isometries(w in unrooted_word(5, 6), v in vertex(6)) {
        let group = UnrootedGroup::new(Variant::Grig);
        let image = group.act(&w, &v).unwrap();
        for u in neighbours(&v) {
            prop_assert!(neighbours(&image).contains(&group.act(&w, &u).unwrap()));
        }
        prop_assert_eq!(group.act(&w.inverse(), &image).unwrap(), v);
    }

    #[test]
    fn delta_words_invert(w in unrooted_word(3, 8), v in vertex(8)) {
        let group = UnrootedGroup::new(Variant::Delta);
        let image = group.act(&w, &v).unwrap();
        prop_assert_eq!(group.act(&w.inverse(), &image).unwrap(), v);
    }

    #[test]
    fn pl_maps_form_a_group(a in "[tuTU]{0,8}", b in "[tuTU]{0,8}", c in "[tuTU]{0,4}") {
        let (f, g, h) = (evaluate(&a).unwrap(), evaluate(&b).unwrap(), evaluate(&c).unwrap());
        let fg = &f * &g;
        prop_assert!((&fg * &fg.inverse()).is_identity());
        prop_assert_eq!(&fg * &h, &f * &(&g * &h));
        prop_assert_eq!(&fg * &PlMap::identity(), fg.clone());
        prop_assert_eq!(evaluate(&format!("{a}{b}")).unwrap(), fg.clone());
        for w in fg.breakpoints().windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            prop_assert!(is_power_of_two(*slope.numer()) && is_power_of_two(*slope.denom()));
        }
        prop_assert!(fg.breakpoints().iter().all(|(x, y)| dyadic(x) && dyadic(y)));
        prop_assert_eq!(fg.eval(Q::one()), Q::one());
    }
}

#[test]
fn hecke_spectra_in_unit_interval() {
    for name in ["gamma", "grigorchuk", "bsv"] {
        let t = builtin(name, None).unwrap();
        for n in 1..=6 {
            let g = schreier_graph(&t, n).unwrap();
            let values = eigenvalues(&hecke_matrix(&g, &[]).unwrap()).unwrap();
            assert!(values.iter().all(|x| x.abs() <= 1.0 + 1e-9), "{name} {n}");
            assert!((values.last().unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
