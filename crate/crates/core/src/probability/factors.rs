//! The four conditional factors of a pattern probability.
//!
//! Each factor walks its RBs in ascending order and removes them from the
//! [`RenormalizationState`] as it goes, so the state handed to the next
//! factor is already conditioned on the earlier RBs.

use crate::logprob::{ln_binomial, LogProb};
use crate::model::PatternIndexSets;

use super::compositions::CompositionCache;
use super::renormalize::RenormalizationState;

/// Probability that every RB in the single-high set holds exactly one
/// high-priority device and nothing else.
pub fn high_factor(sets: &PatternIndexSets, state: &mut RenormalizationState) -> LogProb {
    let mut z = LogProb::ONE;
    for &rb in sets.high() {
        let n_high = state.remaining_high();
        z *= if n_high == 0 {
            LogProb::ZERO
        } else {
            LogProb::from_prob(f64::from(n_high) * state.p_high_hat()[rb])
                * LogProb::from_power(state.complement_high(rb), n_high - 1)
                * LogProb::from_power(state.complement_low(rb), state.remaining_low())
        };
        state.take_high(1);
        state.remove(rb);
    }
    z
}

/// Probability that every RB in the single-low set holds exactly one
/// low-priority device, given the single-high RBs.
pub fn low_factor(sets: &PatternIndexSets, state: &mut RenormalizationState) -> LogProb {
    let mut z = LogProb::ONE;
    for &rb in sets.low() {
        let n_low = state.remaining_low();
        z *= if n_low == 0 {
            LogProb::ZERO
        } else {
            LogProb::from_prob(f64::from(n_low) * state.p_low_hat()[rb])
                * LogProb::from_power(state.complement_low(rb), n_low - 1)
                * LogProb::from_power(state.complement_high(rb), state.remaining_high())
        };
        state.take_low(1);
        state.remove(rb);
    }
    z
}

/// Probability that no remaining device selects any RB in the empty set.
pub fn empty_factor(sets: &PatternIndexSets, state: &mut RenormalizationState) -> LogProb {
    let mut z = LogProb::ONE;
    for &rb in sets.empty() {
        z *= LogProb::from_power(state.complement_high(rb), state.remaining_high())
            * LogProb::from_power(state.complement_low(rb), state.remaining_low());
        state.remove(rb);
    }
    z
}

/// Conditional selection probabilities seen by one collision RB when the
/// collision RBs are visited in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CollisionStep {
    pub p_high: f64,
    pub q_high: f64,
    pub p_low: f64,
    pub q_low: f64,
}

/// The renormalized probabilities at each collision RB do not depend on how
/// many devices landed in the earlier ones, so they are computed once.
pub(crate) fn collision_steps(sets: &PatternIndexSets, state: &RenormalizationState) -> Vec<CollisionStep> {
    let mut s = state.clone();
    sets.collision()
        .iter()
        .map(|&rb| {
            let step = CollisionStep {
                p_high: s.p_high_hat()[rb],
                q_high: s.complement_high(rb),
                p_low: s.p_low_hat()[rb],
                q_low: s.complement_low(rb),
            };
            s.remove(rb);
            step
        })
        .collect()
}

/// `C(n, k) p^k q^(n-k)` in log domain.
pub(crate) fn binomial_term(n: u32, k: u32, p: f64, q: f64) -> LogProb {
    if k > n {
        return LogProb::ZERO;
    }
    LogProb::from_ln(ln_binomial(n, k)) * LogProb::from_power(p, k) * LogProb::from_power(q, n - k)
}

/// Probability that every collision RB holds at least two devices, given the
/// single and empty RBs. `state` must already have those RBs removed.
///
/// Sums over every composition of the remaining devices, decrementing the
/// remaining counts RB by RB.
pub fn collision_factor(sets: &PatternIndexSets, state: &RenormalizationState, cache: &CompositionCache) -> LogProb {
    let rbs = sets.collision();
    if rbs.is_empty() {
        return LogProb::ONE;
    }
    let steps = collision_steps(sets, state);
    let (n_high, n_low) = (state.remaining_high(), state.remaining_low());
    let mut z = LogProb::ZERO;
    for k in cache.combinations(rbs.len(), n_high + n_low).iter() {
        for i in cache.combinations_h(k, n_high, n_low).iter() {
            let (mut left_high, mut left_low) = (n_high, n_low);
            let mut term = LogProb::ONE;
            for (step, (&total, &highs)) in steps.iter().zip(k.iter().zip(i)) {
                let lows = total - highs;
                term *= binomial_term(left_high, highs, step.p_high, step.q_high)
                    * binomial_term(left_low, lows, step.p_low, step.q_low);
                if term.is_zero() {
                    break;
                }
                left_high -= highs;
                left_low -= lows;
            }
            z = z.ln_add(term);
        }
    }
    z
}
