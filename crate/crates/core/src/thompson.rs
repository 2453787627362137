//! Piecewise-linear homeomorphisms of `[0,1]` with exact dyadic breakpoints.
//!
//! Composition follows the right-action convention: `f * g` applies `f` first.

use std::ops::Mul;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::expr::{eval_word, WordError};

pub type Q = Ratio<i64>;

/// An increasing PL bijection of `[0,1]` given by its breakpoints, starting at
/// `(0,0)` and ending at `(1,1)`, with collinear points removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlMap {
    points: Vec<(Q, Q)>,
}

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

impl PlMap {
    pub fn identity() -> Self {
        PlMap {
            points: vec![(Q::zero(), Q::zero()), (Q::one(), Q::one())],
        }
    }

    /// Builds a map from breakpoints; panics unless they are strictly
    /// increasing in both coordinates from `(0,0)` to `(1,1)`.
    pub fn new(points: Vec<(Q, Q)>) -> Self {
        assert!(
            points.first() == Some(&(Q::zero(), Q::zero()))
                && points.last() == Some(&(Q::one(), Q::one()))
        );
        assert!(points
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        let mut map = PlMap { points };
        map.simplify();
        map
    }

    fn simplify(&mut self) {
        let mut out: Vec<(Q, Q)> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            while out.len() >= 2 {
                let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
                if (b.1 - a.1) * (p.0 - b.0) == (p.1 - b.1) * (b.0 - a.0) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(p);
        }
        self.points = out;
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn is_identity(&self) -> bool {
        self.points.len() == 2
    }

    fn interpolate(points: &[(Q, Q)], x: Q) -> Q {
        let i = points.partition_point(|p| p.0 < x);
        if i < points.len() && points[i].0 == x {
            return points[i].1;
        }
        let (a, b) = (points[i - 1], points[i]);
        a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
    }

    pub fn eval(&self, x: Q) -> Q {
        assert!(x >= Q::zero() && x <= Q::one(), "outside [0,1]");
        PlMap::interpolate(&self.points, x)
    }

    #[must_use]
    pub fn inverse(&self) -> PlMap {
        PlMap {
            points: self.points.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }

    /// `f` restricted to `[0,½)` after rescaling, identity on `[½,1]`.
    #[must_use]
    pub fn left_half(&self) -> PlMap {
        let half = q(1, 2);
        let mut points: Vec<(Q, Q)> = self
            .points
            .iter()
            .map(|&(x, y)| (x * half, y * half))
            .collect();
        points.push((Q::one(), Q::one()));
        PlMap::new(points)
    }
}

impl Mul for &PlMap {
    type Output = PlMap;

    fn mul(self, g: &PlMap) -> PlMap {
        let finv = self.inverse();
        let mut xs: Vec<Q> = self.points.iter().map(|p| p.0).collect();
        xs.extend(
            g.points
                .iter()
                .map(|p| PlMap::interpolate(&finv.points, p.0)),
        );
        xs.sort();
        xs.dedup();
        PlMap::new(xs.into_iter().map(|x| (x, g.eval(self.eval(x)))).collect())
    }
}

/// The generator `t`: `x/2` on `[0,½)`, `x−¼` on `[½,¾)`, `2x−1` on `[¾,1]`.
pub fn thompson_t() -> PlMap {
    PlMap::new(vec![
        (q(0, 1), q(0, 1)),
        (q(1, 2), q(1, 4)),
        (q(3, 4), q(1, 2)),
        (q(1, 1), q(1, 1)),
    ])
}

/// The generator `u = ⟨t,1⟩`: `t` on `[0,½)` rescaled, identity elsewhere.
pub fn thompson_u() -> PlMap {
    thompson_t().left_half()
}

/// The relators `[tu⁻¹, uᵗ]` and `[tu⁻¹, u^{t²}]`.
pub const THOMPSON_RELATORS: [&str; 2] = ["[tu^-1,u^t]", "[tu^-1,u^(t^2)]"];

/// Evaluates a word over `t` and `u` as a PL map.
pub fn evaluate(expr: &str) -> Result<PlMap, WordError> {
    let names = vec!["t".to_string(), "u".to_string()];
    let word = eval_word(&names, expr)?;
    let gens = [thompson_t(), thompson_u()];
    let inverses = [gens[0].inverse(), gens[1].inverse()];
    Ok(word.symbols().iter().fold(PlMap::identity(), |acc, s| {
        let g = if s.is_inverse() {
            &inverses[s.state()]
        } else {
            &gens[s.state()]
        };
        &acc * g
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThompsonCheck {
    pub relator: String,
    pub identity: bool,
    pub breakpoints: usize,
}

pub fn verify_thompson_relators() -> Result<Vec<ThompsonCheck>, WordError> {
    THOMPSON_RELATORS
        .iter()
        .map(|&r| {
            let map = evaluate(r)?;
            Ok(ThompsonCheck {
                relator: r.to_string(),
                identity: map.is_identity(),
                breakpoints: map.breakpoints().len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_values() {
        let t = thompson_t();
        assert_eq!(t.eval(q(1, 4)), q(1, 8));
        assert_eq!(t.eval(q(5, 8)), q(3, 8));
        assert_eq!(t.eval(q(7, 8)), q(3, 4));
        let u = thompson_u();
        assert_eq!(u.eval(q(1, 8)), q(1, 16));
        assert_eq!(u.eval(q(3, 4)), q(3, 4));
        assert_eq!(u.breakpoints().len(), 5);
    }

    #[test]
    fn group_operations() {
        let t = thompson_t();
        assert!((&t * &t.inverse()).is_identity());
        let tt = &t * &t;
        assert_eq!(tt.eval(q(1, 2)), q(1, 8));
        let u = thompson_u();
        // right action: x·(tu) = u(t(x))
        let tu = &t * &u;
        assert_eq!(tu.eval(q(7, 8)), u.eval(t.eval(q(7, 8))));
        assert_eq!(evaluate("tu").unwrap(), tu);
        assert!(evaluate("t^3 t^-3").unwrap().is_identity());
    }

    #[test]
    fn relators_are_exact_identities() {
        let checks = verify_thompson_relators().unwrap();
        assert!(checks.iter().all(|c| c.identity), "{checks:?}");
        assert!(!evaluate("[t,u]").unwrap().is_identity());
        assert!(!evaluate("[tu^-1,u]").unwrap().is_identity());
    }
}
