//! Weighted balls of group elements and contraction certificates.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{SignedState, StateId, Transducer};
use crate::elements::ElementSet;
use crate::solver::WordProblem;
use crate::word::GroupWord;
use crate::wreath::decompose;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BallError {
    #[error("ball exceeded {0} elements")]
    MemoryBudget(usize),
    #[error("weight of `{0}` must be positive")]
    NonPositiveWeight(String),
    #[error("no weight given for state `{0}`")]
    MissingWeight(String),
    #[error("{0}")]
    Domain(String),
}

/// Positive weight per state; a formal inverse weighs the same as its state.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// All non-identity states weigh 1.
    pub fn unit(t: &Transducer) -> Self {
        WeightVector(vec![1.0; t.state_count()])
    }

    /// Weights by state name. Aliased states take the weight of their
    /// representative.
    pub fn from_names(t: &Transducer, weights: &[(&str, f64)]) -> Result<Self, BallError> {
        let mut w = vec![f64::NAN; t.state_count()];
        w[0] = 0.0;
        for &(name, value) in weights {
            let q = t
                .state_by_name(name)
                .ok_or_else(|| BallError::MissingWeight(name.to_string()))?;
            if value.is_nan() || value <= 0.0 {
                return Err(BallError::NonPositiveWeight(name.to_string()));
            }
            w[q] = value;
        }
        for q in t.generators() {
            if w[q].is_nan() {
                let c = t.canonical(SignedState::positive(q)).state();
                if c != q && !w[c].is_nan() {
                    w[q] = w[c];
                }
            }
        }
        for q in t.primary_generators() {
            if w[q].is_nan() {
                return Err(BallError::MissingWeight(t.name(q).to_string()));
            }
        }
        Ok(WeightVector(w))
    }

    pub fn get(&self, s: SignedState) -> f64 {
        self.0[s.state()]
    }

    pub fn state(&self, q: StateId) -> f64 {
        self.0[q]
    }

    pub fn length(&self, w: &GroupWord) -> f64 {
        w.weighted_length(|s| self.get(s))
    }
}

/// Real root of `X³ + X² + X − 2`, by Newton's method.
pub fn grigorchuk_eta() -> f64 {
    let mut x: f64 = 0.8;
    for _ in 0..60 {
        x -= (x * x * x + x * x + x - 2.0) / (3.0 * x * x + 2.0 * x + 1.0);
    }
    x
}

/// Weights with `ω_a = 1` solving `η(ω_a+ω_b) = ω_a+ω_c`,
/// `η(ω_a+ω_c) = ω_a+ω_d` and `η(ω_a+ω_d) = ω_b`.
pub fn grigorchuk_weights() -> [(&'static str, f64); 4] {
    let eta = grigorchuk_eta();
    let e3 = eta.powi(3);
    let wb = e3 / (1.0 - e3);
    let wc = eta * (1.0 + wb) - 1.0;
    let wd = eta * eta * (1.0 + wb) - 1.0;
    [("a", 1.0), ("b", wb), ("c", wc), ("d", wd)]
}

/// `α = log d / log(d/η)`: elements of length `n` number at most `e^{n^α}`.
pub fn growth_exponent(d: usize, eta: f64) -> Result<f64, BallError> {
    if d < 2 || !(eta > 0.0 && eta < 1.0) {
        return Err(BallError::Domain(format!(
            "need d >= 2 and 0 < eta < 1, got d={d}, eta={eta}"
        )));
    }
    let d = d as f64;
    Ok(d.ln() / (d / eta).ln())
}

/// One canonical word per element of weighted length at most `radius`, with the
/// element's minimal weighted length.
///
/// Canonical words are minimal for (weighted length, letter sequence). Because
/// prefixes of canonical words are canonical, a best-first search that extends
/// only canonical words reaches every element.
pub struct Ball<'a> {
    wp: &'a WordProblem,
    radius: f64,
    elements: ElementSet<'a>,
    lengths: Vec<f64>,
}

/// Weights are compared after rounding to this resolution.
const WEIGHT_SCALE: f64 = 1e9;

impl<'a> Ball<'a> {
    pub fn new(
        wp: &'a WordProblem,
        radius: f64,
        weights: &WeightVector,
        max_elements: usize,
    ) -> Result<Self, BallError> {
        let t = wp.transducer();
        let gens: Vec<SignedState> = t
            .primary_generators()
            .into_iter()
            .flat_map(|q| [SignedState::positive(q), SignedState::new(q, true)])
            .collect();
        let mut elements = ElementSet::new(wp);
        let mut lengths = Vec::new();
        let mut signatures: Vec<Vec<u32>> = Vec::new();
        // (weight key, word, parent element, last letter)
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((
            0i64,
            GroupWord::empty(),
            usize::MAX,
            None::<SignedState>,
        )));
        let limit = (radius * WEIGHT_SCALE).round() as i64;
        while let Some(Reverse((key, word, parent, last))) = heap.pop() {
            let signature = match (parent, last) {
                (usize::MAX, _) | (_, None) => elements.action().identity(),
                (p, Some(s)) => elements.action().extend(&signatures[p], s),
            };
            let (index, fresh) = elements.insert_with_signature(word.clone(), &signature);
            if !fresh {
                continue;
            }
            if elements.len() > max_elements {
                return Err(BallError::MemoryBudget(max_elements));
            }
            signatures.push(signature);
            lengths.push(key as f64 / WEIGHT_SCALE);
            for &s in &gens {
                if word.last() == Some(s.inverse()) {
                    continue;
                }
                let next_key = key + (weights.get(s) * WEIGHT_SCALE).round() as i64;
                if next_key <= limit {
                    let mut next = word.clone();
                    next.push(s);
                    heap.push(Reverse((next_key, next, index, Some(s))));
                }
            }
        }
        // report exact weighted lengths rather than rounded keys
        for (len, w) in lengths.iter_mut().zip(elements.words()) {
            *len = weights.length(w);
        }
        Ok(Ball {
            wp,
            radius,
            elements,
            lengths,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Canonical words in order of increasing length.
    pub fn words(&self) -> &[GroupWord] {
        self.elements.words()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn word_problem(&self) -> &WordProblem {
        self.wp
    }

    /// Minimal weighted length of the element represented by `w`, if it lies in
    /// the ball.
    pub fn minimal_length(&self, w: &GroupWord) -> Option<f64> {
        self.elements.find(w).map(|i| self.lengths[i])
    }

    pub fn contains(&self, w: &GroupWord) -> bool {
        self.elements.find(w).is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionMode {
    /// every child: `|g_x| ≤ η|g| + C`
    PerChild,
    /// sum over children: `Σ|g_x| ≤ η|g| + C`
    Summed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionViolation {
    pub word: String,
    pub length: f64,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub radius: f64,
    pub mode: ContractionMode,
    pub eta: f64,
    pub c: f64,
    pub checked: usize,
    /// elements whose children left the ball before the bound could be settled
    pub uncertified: usize,
    /// largest `lhs − bound` over checked elements
    pub max_slack: f64,
    /// largest `lhs / bound` over checked elements with positive bound
    pub worst_ratio: f64,
    pub violations: Vec<ContractionViolation>,
}

impl ContractionReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance on every contraction inequality.
pub const CONTRACTION_TOL: f64 = 1e-9;

/// Checks the contraction inequality on every element of the ball, using
/// minimal lengths of children. A child outside the ball has length above the
/// radius; if that already exceeds the bound it is a violation, otherwise the
/// element is counted as uncertified.
pub fn verify_contraction(
    ball: &Ball<'_>,
    eta: f64,
    c: f64,
    mode: ContractionMode,
) -> ContractionReport {
    let t = ball.word_problem().transducer();
    let mut report = ContractionReport {
        radius: ball.radius(),
        mode,
        eta,
        c,
        checked: 0,
        uncertified: 0,
        max_slack: f64::NEG_INFINITY,
        worst_ratio: 0.0,
        violations: Vec::new(),
    };
    for (w, &len) in ball.words().iter().zip(ball.lengths()) {
        let bound = eta * len + c;
        let children = decompose(t, w).children;
        let mut lhs = 0.0;
        let mut certain = true;
        for child in &children {
            let l = match ball.minimal_length(child) {
                Some(l) => l,
                None => {
                    certain = false;
                    ball.radius()
                }
            };
            match mode {
                ContractionMode::PerChild => lhs = f64::max(lhs, l),
                ContractionMode::Summed => lhs += l,
            }
        }
        let violated = lhs > bound + CONTRACTION_TOL;
        if !certain && !violated {
            report.uncertified += 1;
            continue;
        }
        report.checked += 1;
        report.max_slack = report.max_slack.max(lhs - bound);
        if bound > 0.0 {
            report.worst_ratio = report.worst_ratio.max(lhs / bound);
        }
        if violated {
            report.violations.push(ContractionViolation {
                word: w.display(t).to_string(),
                length: len,
                lhs,
                bound,
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;
    use crate::expr::eval_word;
    use approx::assert_abs_diff_eq;

    fn gamma_weights(t: &Transducer) -> WeightVector {
        WeightVector::from_names(t, &[("a", 1.0), ("b", 2f64.sqrt())]).unwrap()
    }

    #[test]
    fn small_gamma_balls() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let w = gamma_weights(&t);
        let b1 = Ball::new(&wp, 1.0, &w, 1000).unwrap();
        let names: Vec<String> = b1
            .words()
            .iter()
            .map(|x| x.display(&t).to_string())
            .collect();
        assert_eq!(names, ["1", "a", "A"]);
        let b = Ball::new(&wp, 2.5, &w, 1000).unwrap();
        let ab = eval_word(&t, "ab").unwrap();
        let ba = eval_word(&t, "ba").unwrap();
        assert!(b.contains(&ab) && b.contains(&ba));
        assert_ne!(b.elements.find(&ab), b.elements.find(&ba));
        assert_abs_diff_eq!(
            b.minimal_length(&ab).unwrap(),
            1.0 + 2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn grigorchuk_unit_ball_collapses_involutions() {
        let t = builtin("grigorchuk", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let b = Ball::new(&wp, 1.0, &WeightVector::unit(&t), 1000).unwrap();
        assert_eq!(b.len(), 5);
        let b = Ball::new(&wp, 2.0, &WeightVector::unit(&t), 1000).unwrap();
        // 1, a, b, c, d, ab, ac, ad, ba, ca, da
        assert_eq!(b.len(), 11);
    }

    #[test]
    fn balls_are_monotone() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let w = gamma_weights(&t);
        let small = Ball::new(&wp, 3.0, &w, 10_000).unwrap();
        let big = Ball::new(&wp, 5.0, &w, 10_000).unwrap();
        assert!(small.words().iter().all(|x| big.contains(x)));
        assert!(big.len() > small.len());
    }

    #[test]
    fn budget_is_enforced() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        assert_eq!(
            Ball::new(&wp, 6.0, &gamma_weights(&t), 10).err(),
            Some(BallError::MemoryBudget(10))
        );
    }

    #[test]
    fn weights_and_eta() {
        let eta = grigorchuk_eta();
        assert_abs_diff_eq!(eta, 0.8105357138, epsilon = 1e-9);
        let [_, (_, wb), (_, wc), (_, wd)] = grigorchuk_weights();
        assert_abs_diff_eq!(wb, 1.1399, epsilon = 2e-3);
        assert_abs_diff_eq!(wc, 0.7345, epsilon = 2e-3);
        assert_abs_diff_eq!(wd, 0.4060, epsilon = 2e-3);
        assert_abs_diff_eq!(eta * (1.0 + wb), 1.0 + wc, epsilon = 1e-12);
        assert_abs_diff_eq!(eta * (1.0 + wc), 1.0 + wd, epsilon = 1e-12);
        assert_abs_diff_eq!(eta * (1.0 + wd), wb, epsilon = 1e-12);
        assert_abs_diff_eq!(growth_exponent(2, eta).unwrap(), 0.7675, epsilon = 1e-4);
        assert_abs_diff_eq!(growth_exponent(2, 0.5).unwrap(), 0.5, epsilon = 1e-15);
        assert!(growth_exponent(2, 1.0 - 1e-12).unwrap() > 0.999);
        assert!(growth_exponent(2, 1.0).is_err());
        assert!(growth_exponent(1, 0.5).is_err());
    }

    #[test]
    fn trivial_bound_never_violated() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let ball = Ball::new(&wp, 5.0, &WeightVector::unit(&t), 100_000).unwrap();
        let r = verify_contraction(&ball, 1.0, 0.0, ContractionMode::PerChild);
        assert!(r.ok());
    }

    #[test]
    fn gamma_per_child_contraction() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let ball = Ball::new(&wp, 6.0, &gamma_weights(&t), 100_000).unwrap();
        let r = verify_contraction(&ball, 0.5f64.sqrt(), 2f64.sqrt(), ContractionMode::PerChild);
        assert!(r.ok(), "{:?}", r.violations.first());
        assert_eq!(r.uncertified, 0);
        // (|g|+1)/√2 is exceeded by b^a, whose child a^b is as long as b^a itself
        let r = verify_contraction(
            &ball,
            0.5f64.sqrt(),
            0.5f64.sqrt(),
            ContractionMode::PerChild,
        );
        assert!(r.violations.iter().any(|v| v.word == "Aba"));
        assert_abs_diff_eq!(r.max_slack, 0.5f64.sqrt(), epsilon = 1e-9);
    }
}
