//! Random reduced words, contraction statistics, the binomial model and cogrowth.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::automaton::{SignedState, Transducer};
use crate::solver::WordProblem;
use crate::word::GroupWord;
use crate::wreath::decompose;

/// Largest word length accepted by [`exact_cogrowth`].
pub const MAX_COGROWTH_LENGTH: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum StochasticError {
    #[error("the group has no generators")]
    NoGenerators,
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("word length {n} exceeds the enumeration budget of {MAX_COGROWTH_LENGTH}")]
    Budget { n: usize },
}

/// Deterministic random stream: ChaCha8 seeded from a 64-bit value.
/// Sample `i` of a run with seed `s` uses the stream seeded with `s ^ i`.
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        RandomSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The independent stream for sample `index`.
    pub fn substream(&self, index: u64) -> RandomSource {
        RandomSource::new(self.seed ^ index)
    }

    pub fn below(&mut self, k: usize) -> usize {
        self.rng.random_range(0..k)
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// The primary generators and their inverses.
pub fn generator_symbols(t: &Transducer) -> Vec<SignedState> {
    t.primary_generators()
        .into_iter()
        .flat_map(|q| [SignedState::positive(q), SignedState::new(q, true)])
        .collect()
}

/// A uniformly random freely reduced word of length `n` over `symbols`, which
/// must be closed under inversion.
pub fn random_reduced_word(symbols: &[SignedState], n: usize, rng: &mut RandomSource) -> GroupWord {
    let mut letters = Vec::with_capacity(n);
    let mut last: Option<SignedState> = None;
    for _ in 0..n {
        let s = match last {
            None => symbols[rng.below(symbols.len())],
            Some(prev) => {
                let forbidden = symbols
                    .iter()
                    .position(|&s| s == prev.inverse())
                    .expect("inverse-closed symbols");
                let k = rng.below(symbols.len() - 1);
                symbols[if k >= forbidden { k + 1 } else { k }]
            }
        };
        letters.push(s);
        last = Some(s);
    }
    GroupWord::from_symbols(letters)
}

/// Summary of the child-length ratio over random words.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub n: usize,
    pub samples: usize,
    /// mean of `m / n`, where `m` is the total reduced child length
    pub mu_hat: f64,
    /// sample variance of `m`
    pub variance: f64,
    /// `μ̂(1−μ̂)n/s²`; absent when the variance vanishes
    pub eta_hat: Option<f64>,
    pub stderr_mu: f64,
    pub stderr_eta: Option<f64>,
}

/// Total letter count of the reduced children of a random word, per sample.
pub fn child_lengths(
    t: &Transducer,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<u64>, StochasticError> {
    let symbols = generator_symbols(t);
    if symbols.is_empty() {
        return Err(StochasticError::NoGenerators);
    }
    let root = RandomSource::new(seed);
    Ok((0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let w = random_reduced_word(&symbols, n, &mut root.substream(i));
            decompose(t, &w).child_letters() as u64
        })
        .collect())
}

/// Estimates μ and η from `samples` random reduced words of length `n`.
///
/// Power sums are accumulated exactly, so the result does not depend on the
/// order in which parallel samples finish.
pub fn estimate_contraction(
    t: &Transducer,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<TrialStats, StochasticError> {
    if n == 0 || samples < 2 {
        return Err(StochasticError::Domain(
            "need n ≥ 1 and at least two samples".into(),
        ));
    }
    Ok(stats_from_lengths(n, &child_lengths(t, n, samples, seed)?))
}

/// The statistics of a list of child lengths for words of length `n`.
pub fn stats_from_lengths(n: usize, lengths: &[u64]) -> TrialStats {
    let count = BigInt::from(lengths.len());
    let mut s: [BigInt; 5] = std::array::from_fn(|_| BigInt::from(0));
    for &m in lengths {
        let m = BigInt::from(m);
        let mut p = BigInt::from(1);
        for slot in &mut s {
            *slot += &p;
            p *= &m;
        }
    }
    let [_, s1, s2, s3, s4] = s;
    let nn = &count;
    // N^k times the k-th central sum
    let c2 = nn * &s2 - &s1 * &s1;
    let c3 = nn * nn * &s3 - 3 * nn * &s1 * &s2 + 2 * &s1 * &s1 * &s1;
    let c4 = nn * nn * nn * &s4 - 4 * nn * nn * &s1 * &s3 + 6 * nn * &s1 * &s1 * &s2
        - 3 * &s1 * &s1 * &s1 * &s1;
    let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
    let big_n = lengths.len() as f64;
    let nf = n as f64;
    let mean = f(&s1) / big_n;
    let variance = f(&c2) / (big_n * (big_n - 1.0));
    let m3 = f(&c3) / big_n.powi(3);
    let m4 = f(&c4) / big_n.powi(4);
    let mu_hat = mean / nf;
    let stderr_mu = (variance / big_n).sqrt() / nf;
    let (eta_hat, stderr_eta) = if variance > 0.0 {
        let eta = mu_hat * (1.0 - mu_hat) * nf / variance;
        // delta method in (mean, variance)
        let d_mean = (nf - 2.0 * mean) / (nf * variance);
        let d_var = -eta / variance;
        let var_mean = variance / big_n;
        let var_var = (m4 - variance * variance).max(0.0) / big_n;
        let cov = m3 / big_n;
        let se =
            (d_mean * d_mean * var_mean + d_var * d_var * var_var + 2.0 * d_mean * d_var * cov)
                .max(0.0)
                .sqrt();
        (Some(eta), Some(se))
    } else {
        (None, None)
    };
    TrialStats {
        n,
        samples: lengths.len(),
        mu_hat,
        variance,
        eta_hat,
        stderr_mu,
        stderr_eta,
    }
}

/// `η · binom(ηn, ηm) · μ^{ηm} (1−μ)^{η(n−m)}`, the binomial coefficient taken
/// through the Gamma function.
pub fn c_coefficient(m: u64, n: u64, mu: f64, eta: f64) -> Result<f64, StochasticError> {
    if m > n || !(mu > 0.0 && mu < 1.0) || !(eta > 0.0 && eta <= 1.0) {
        return Err(StochasticError::Domain(format!(
            "m={m}, n={n}, μ={mu}, η={eta}"
        )));
    }
    let (x, y) = (eta * n as f64, eta * m as f64);
    let ln_binom = ln_gamma(x + 1.0) - ln_gamma(y + 1.0) - ln_gamma(x - y + 1.0);
    let ln_c = eta.ln() + ln_binom + y * mu.ln() + (x - y) * (1.0 - mu).ln();
    Ok(ln_c.exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmenabilityReport {
    pub mu: f64,
    pub eta: f64,
    pub grid_size: usize,
    /// smallest `h(ρ) − ρ` on the grid
    pub min_gap: f64,
    pub argmin: f64,
    pub h_at_one: f64,
    pub holds: bool,
}

/// `h(ρ) = ((1−μ) + μρ^{1/η})^η`.
pub fn amenability_h(mu: f64, eta: f64, rho: f64) -> f64 {
    ((1.0 - mu) + mu * rho.powf(1.0 / eta)).powf(eta)
}

/// Checks `h(ρ) > ρ` at `ρ = i/(grid_size+1)` for `i = 1..=grid_size`, and `h(1) = 1`.
pub fn amenability_bound_check(
    mu: f64,
    eta: f64,
    grid_size: usize,
) -> Result<AmenabilityReport, StochasticError> {
    if !(mu > 0.0 && mu < 1.0 && eta > 0.0) || grid_size == 0 {
        return Err(StochasticError::Domain(format!(
            "μ={mu}, η={eta}, grid={grid_size}"
        )));
    }
    let (min_gap, argmin) = (1..=grid_size)
        .map(|i| {
            let rho = i as f64 / (grid_size + 1) as f64;
            (amenability_h(mu, eta, rho) - rho, rho)
        })
        .fold((f64::INFINITY, 0.0), |best, cur| {
            if cur.0 < best.0 {
                cur
            } else {
                best
            }
        });
    let h_at_one = amenability_h(mu, eta, 1.0);
    let holds = min_gap > 0.0 && (h_at_one - 1.0).abs() <= 4.0 * f64::EPSILON;
    Ok(AmenabilityReport {
        mu,
        eta,
        grid_size,
        min_gap,
        argmin,
        h_at_one,
        holds,
    })
}

/// Reduced words of length `n` and how many of them are trivial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CogrowthRow {
    pub n: usize,
    pub words: u128,
    pub identities: u64,
}

/// Counts trivial reduced words of each length up to `nmax` by exhaustive
/// enumeration over the primary generators and their inverses.
pub fn exact_cogrowth(wp: &WordProblem, nmax: usize) -> Result<Vec<CogrowthRow>, StochasticError> {
    if nmax > MAX_COGROWTH_LENGTH {
        return Err(StochasticError::Budget { n: nmax });
    }
    let symbols = generator_symbols(wp.transducer());
    let k = symbols.len() as u128;
    let mut rows = vec![CogrowthRow {
        n: 0,
        words: 1,
        identities: 1,
    }];
    for n in 1..=nmax {
        let words = if k == 0 {
            0
        } else {
            k * (k - 1).pow(n as u32 - 1)
        };
        let identities = if k == 0 {
            0
        } else {
            symbols
                .par_iter()
                .map(|&s| count_identities(wp, &symbols, &mut vec![s], n))
                .sum()
        };
        rows.push(CogrowthRow {
            n,
            words,
            identities,
        });
    }
    Ok(rows)
}

fn count_identities(
    wp: &WordProblem,
    symbols: &[SignedState],
    prefix: &mut Vec<SignedState>,
    n: usize,
) -> u64 {
    if prefix.len() == n {
        return u64::from(wp.is_identity(&GroupWord::from_symbols(prefix.iter().copied())));
    }
    let last = *prefix.last().expect("non-empty prefix");
    let mut total = 0;
    for &s in symbols {
        if s != last.inverse() {
            prefix.push(s);
            total += count_identities(wp, symbols, prefix, n);
            prefix.pop();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::builtin;

    #[test]
    fn random_words_are_reduced_and_deterministic() {
        let t = builtin("gamma", None).unwrap();
        let symbols = generator_symbols(&t);
        assert!(random_reduced_word(&symbols, 0, &mut RandomSource::new(1)).is_empty());
        for seed in 0..50 {
            let w = random_reduced_word(&symbols, 30, &mut RandomSource::new(seed));
            assert_eq!(w.len(), 30);
            assert_eq!(
                w,
                random_reduced_word(&symbols, 30, &mut RandomSource::new(seed))
            );
        }
    }

    #[test]
    fn length_one_words_have_one_child_letter() {
        let t = builtin("gamma", None).unwrap();
        let stats = estimate_contraction(&t, 1, 200, 7).unwrap();
        assert_eq!(stats.mu_hat, 1.0);
        assert_eq!(stats.variance, 0.0);
        assert_eq!(stats.eta_hat, None);
    }

    #[test]
    fn stats_of_known_sample() {
        let s = stats_from_lengths(10, &[4, 6, 8]);
        assert!((s.mu_hat - 0.6).abs() < 1e-15);
        assert!((s.variance - 4.0).abs() < 1e-12);
        assert!((s.eta_hat.unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn binomial_model_edges() {
        let (mu, eta) = (0.699, 0.326);
        let top = c_coefficient(50, 50, mu, eta).unwrap();
        assert!((top - eta * mu.powf(eta * 50.0)).abs() < 1e-12);
        let bottom = c_coefficient(0, 50, mu, eta).unwrap();
        assert!((bottom - eta * (1.0 - mu).powf(eta * 50.0)).abs() < 1e-12);
        assert!(c_coefficient(3, 2, mu, eta).is_err());
        assert!(c_coefficient(1, 2, 1.0, eta).is_err());
    }

    #[test]
    fn amenability_gap_positive() {
        let r = amenability_bound_check(0.699, 0.326, 99).unwrap();
        assert!(r.holds && r.min_gap > 0.0);
        assert_eq!(amenability_h(0.699, 0.326, 1.0), 1.0);
    }

    #[test]
    fn cogrowth_small_lengths() {
        let t = builtin("gamma", None).unwrap();
        let wp = WordProblem::new(&t).unwrap();
        let rows = exact_cogrowth(&wp, 4).unwrap();
        assert_eq!(
            rows[0],
            CogrowthRow {
                n: 0,
                words: 1,
                identities: 1
            }
        );
        assert_eq!(rows[3].words, 36);
        assert!(rows[1..].iter().all(|r| r.identities == 0));
        assert!(exact_cogrowth(&wp, 17).is_err());
    }
}
