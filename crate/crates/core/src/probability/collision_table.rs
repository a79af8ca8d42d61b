use crate::logprob::{ln_binomial, LogProb};
use crate::model::PatternIndexSets;

use super::factors::collision_steps;
use super::renormalize::RenormalizationState;

/// The collision factor of one pattern for every remaining device count up to
/// a bound, filled by a backward recursion over the collision RBs.
///
/// Equal to summing over compositions, but the partial sums for the later
/// RBs are shared between all counts, so a whole hypothesis grid costs one
/// table per pattern. Values are kept in the linear domain: they are
/// conditional probabilities of the collision RBs only and stay well inside
/// the `f64` range.
#[derive(Debug, Clone)]
pub struct CollisionTable {
    max_high: u32,
    max_low: u32,
    values: Vec<f64>,
}

impl CollisionTable {
    /// `state` must have every single and empty RB of `sets` removed; its
    /// remaining counts are ignored.
    pub fn build(sets: &PatternIndexSets, state: &RenormalizationState, max_high: u32, max_low: u32) -> Self {
        let steps = collision_steps(sets, state);
        let width = max_low as usize + 1;
        let cells = (max_high as usize + 1) * width;
        let at = |a: u32, b: u32| a as usize * width + b as usize;

        // After the last collision RB nobody may remain.
        let mut next = vec![0.0; cells];
        next[0] = 1.0;
        for step in steps.iter().rev() {
            let high = BinomialRows::new(max_high, step.p_high, step.q_high);
            let low = BinomialRows::new(max_low, step.p_low, step.q_low);
            let mut current = vec![0.0; cells];
            for a in 0..=max_high {
                for b in 0..=max_low {
                    let mut sum = 0.0;
                    for i in 0..=a {
                        let wh = high.get(a, i);
                        if wh == 0.0 {
                            continue;
                        }
                        let c_min = 2u32.saturating_sub(i);
                        for c in c_min..=b {
                            let rest = next[at(a - i, b - c)];
                            if rest != 0.0 {
                                sum += wh * low.get(b, c) * rest;
                            }
                        }
                    }
                    current[at(a, b)] = sum;
                }
            }
            next = current;
        }
        Self {
            max_high,
            max_low,
            values: next,
        }
    }

    pub fn max_high(&self) -> u32 {
        self.max_high
    }

    pub fn max_low(&self) -> u32 {
        self.max_low
    }

    /// Panics when the counts exceed the table bounds.
    pub fn get(&self, remaining_high: u32, remaining_low: u32) -> LogProb {
        assert!(
            remaining_high <= self.max_high && remaining_low <= self.max_low,
            "({remaining_high}, {remaining_low}) outside collision table"
        );
        let width = self.max_low as usize + 1;
        LogProb::from_prob(self.values[remaining_high as usize * width + remaining_low as usize])
    }
}

/// `C(n, k) p^k q^(n-k)` for all `k <= n <= max`.
struct BinomialRows {
    width: usize,
    values: Vec<f64>,
}

impl BinomialRows {
    fn new(max: u32, p: f64, q: f64) -> Self {
        let width = max as usize + 1;
        let mut values = vec![0.0; width * width];
        for n in 0..=max {
            for k in 0..=n {
                let term =
                    LogProb::from_ln(ln_binomial(n, k)) * LogProb::from_power(p, k) * LogProb::from_power(q, n - k);
                values[n as usize * width + k as usize] = term.prob();
            }
        }
        Self { width, values }
    }

    fn get(&self, n: u32, k: u32) -> f64 {
        self.values[n as usize * self.width + k as usize]
    }
}
