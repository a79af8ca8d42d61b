//! Brute-force pattern distribution.
//!
//! Enumerates how many devices of each class land on each RB, weights every
//! occupancy by its multinomial probability and classifies it. Everything is
//! in the linear domain with exact integer multinomial coefficients, so it
//! shares no arithmetic with the factorized engine.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{classify_occupancy, AccessPattern, LoadHypothesis, SelectionProfile};

/// Default cap on `M^(n_high + n_low)`.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// Exact probability of every reachable pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternDistribution {
    m: usize,
    probs: BTreeMap<AccessPattern, f64>,
}

impl PatternDistribution {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Probability of `pattern`; zero when unreachable.
    pub fn get(&self, pattern: &AccessPattern) -> f64 {
        self.probs.get(pattern).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AccessPattern, f64)> {
        self.probs.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        let mut sum = NeumaierSum::default();
        self.probs.values().for_each(|&p| sum.add(p));
        sum.value()
    }
}

pub fn exhaustive_pattern_distribution(hyp: LoadHypothesis, profile: &SelectionProfile) -> Result<PatternDistribution> {
    exhaustive_pattern_distribution_with_cap(hyp, profile, DEFAULT_ENUMERATION_CAP)
}

pub fn exhaustive_pattern_distribution_with_cap(
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
    cap: u64,
) -> Result<PatternDistribution> {
    let m = profile.m();
    let required = (m as u128).checked_pow(hyp.total()).unwrap_or(u128::MAX);
    if required > u128::from(cap) {
        return Err(Error::BudgetExceeded { required, cap });
    }

    let high = weighted_occupancies(hyp.n_high, profile.p_high());
    let low = weighted_occupancies(hyp.n_low, profile.p_low());

    let mut sums: BTreeMap<AccessPattern, NeumaierSum> = BTreeMap::new();
    for (hc, hw) in &high {
        for (lc, lw) in &low {
            let pattern = classify_occupancy(hc, lc)?;
            sums.entry(pattern).or_default().add(hw * lw);
        }
    }
    let probs = sums.into_iter().map(|(k, s)| (k, s.value())).collect();
    Ok(PatternDistribution { m, probs })
}

pub fn oracle_pattern_probability(
    pattern: &AccessPattern,
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
) -> Result<f64> {
    profile.check_pattern(pattern)?;
    Ok(exhaustive_pattern_distribution(hyp, profile)?.get(pattern))
}

/// Every count vector of `n` devices over the RBs with non-zero probability,
/// paired with its multinomial probability.
fn weighted_occupancies(n: u32, p: &[f64]) -> Vec<(Vec<u32>, f64)> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; p.len()];
    spread(n, 0, p, &mut counts, &mut out);
    out
}

fn spread(left: u32, rb: usize, p: &[f64], counts: &mut Vec<u32>, out: &mut Vec<(Vec<u32>, f64)>) {
    if rb + 1 == p.len() {
        counts[rb] = left;
        let w = multinomial_weight(counts, p);
        if w > 0.0 {
            out.push((counts.clone(), w));
        }
        counts[rb] = 0;
        return;
    }
    for c in 0..=left {
        counts[rb] = c;
        spread(left - c, rb + 1, p, counts, out);
    }
    counts[rb] = 0;
}

fn multinomial_weight(counts: &[u32], p: &[f64]) -> f64 {
    let mut coefficient: u128 = 1;
    let mut placed = 0u32;
    for &c in counts {
        for j in 1..=c {
            placed += 1;
            // running product of C(placed, j) stays integral at every step
            coefficient = coefficient * u128::from(placed) / u128::from(j);
        }
    }
    let mut w = coefficient as f64;
    for (&c, &pi) in counts.iter().zip(p) {
        if c > 0 {
            w *= pi.powi(c as i32);
        }
    }
    w
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
