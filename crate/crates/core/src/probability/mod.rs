//! Exact access-pattern probabilities.
//!
//! A pattern probability factors as
//! `P(single-high) · P(single-low | ·) · P(empty | ·) · P(collision | ·)`,
//! each factor conditioning on the RBs already accounted for by renormalizing
//! the selection probabilities over the RBs still open. The reduced mode
//! keeps only the first three factors.

mod collision_table;
mod compositions;
mod factors;
mod renormalize;

pub use collision_table::CollisionTable;
pub use compositions::{find_combinations, find_combinations_h, CollisionComposition, CompositionCache};
pub use factors::{collision_factor, empty_factor, high_factor, low_factor};
pub use renormalize::RenormalizationState;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::logprob::LogProb;
use crate::model::{AccessPattern, LoadHypothesis, ObservationSet, PatternIndexSets, SelectionProfile};

/// Which pattern probability a likelihood is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodMode {
    /// All four factors.
    Full,
    /// The collision factor dropped.
    Reduced,
}

/// The four factors of one pattern probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternFactors {
    pub high: LogProb,
    pub low: LogProb,
    pub empty: LogProb,
    pub collision: LogProb,
}

impl PatternFactors {
    pub fn full(&self) -> LogProb {
        self.reduced() * self.collision
    }

    pub fn reduced(&self) -> LogProb {
        self.high * self.low * self.empty
    }
}

/// Evaluates the first three factors, leaving `state` conditioned on every
/// single and empty RB.
pub(crate) fn leading_factors(
    sets: &PatternIndexSets,
    state: &mut RenormalizationState,
) -> (LogProb, LogProb, LogProb) {
    let high = high_factor(sets, state);
    let low = low_factor(sets, state);
    let empty = empty_factor(sets, state);
    (high, low, empty)
}

/// Pattern probabilities with a shared composition cache.
#[derive(Debug, Default)]
pub struct PatternEngine {
    cache: CompositionCache,
}

impl PatternEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cache(&self) -> &CompositionCache {
        &self.cache
    }

    /// All four factors, or `None` when the hypothesis cannot produce the
    /// pattern regardless of the profile.
    pub fn factors(
        &self,
        pattern: &AccessPattern,
        hyp: LoadHypothesis,
        profile: &SelectionProfile,
    ) -> Result<Option<PatternFactors>> {
        profile.check_pattern(pattern)?;
        let sets = pattern.index_sets();
        if !sets.is_feasible_for(hyp) {
            return Ok(None);
        }
        let mut state = RenormalizationState::new(profile, hyp);
        let (high, low, empty) = leading_factors(&sets, &mut state);
        let collision = collision_factor(&sets, &state, &self.cache);
        Ok(Some(PatternFactors {
            high,
            low,
            empty,
            collision,
        }))
    }

    pub fn probability(
        &self,
        pattern: &AccessPattern,
        hyp: LoadHypothesis,
        profile: &SelectionProfile,
        mode: LikelihoodMode,
    ) -> Result<LogProb> {
        profile.check_pattern(pattern)?;
        let sets = pattern.index_sets();
        if !sets.is_feasible_for(hyp) {
            return Ok(LogProb::ZERO);
        }
        let mut state = RenormalizationState::new(profile, hyp);
        let (high, low, empty) = leading_factors(&sets, &mut state);
        let reduced = high * low * empty;
        Ok(match mode {
            LikelihoodMode::Reduced => reduced,
            LikelihoodMode::Full if reduced.is_zero() => LogProb::ZERO,
            LikelihoodMode::Full => reduced * collision_factor(&sets, &state, &self.cache),
        })
    }

    pub fn pattern_probability(
        &self,
        pattern: &AccessPattern,
        hyp: LoadHypothesis,
        profile: &SelectionProfile,
    ) -> Result<LogProb> {
        self.probability(pattern, hyp, profile, LikelihoodMode::Full)
    }

    pub fn rcml_pattern_probability(
        &self,
        pattern: &AccessPattern,
        hyp: LoadHypothesis,
        profile: &SelectionProfile,
    ) -> Result<LogProb> {
        self.probability(pattern, hyp, profile, LikelihoodMode::Reduced)
    }

    /// Joint log-probability of independent slots.
    pub fn sequence_log_likelihood(
        &self,
        obs: &ObservationSet,
        hyp: LoadHypothesis,
        profile: &SelectionProfile,
        mode: LikelihoodMode,
    ) -> Result<LogProb> {
        for pattern in obs.patterns() {
            profile.check_pattern(pattern)?;
        }
        let mut total = LogProb::ONE;
        for pattern in obs.patterns() {
            total *= self.probability(pattern, hyp, profile, mode)?;
            if total.is_zero() {
                break;
            }
        }
        Ok(total)
    }
}

pub fn pattern_probability(
    pattern: &AccessPattern,
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
) -> Result<LogProb> {
    PatternEngine::new().pattern_probability(pattern, hyp, profile)
}

pub fn rcml_pattern_probability(
    pattern: &AccessPattern,
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
) -> Result<LogProb> {
    PatternEngine::new().rcml_pattern_probability(pattern, hyp, profile)
}

pub fn sequence_log_likelihood(
    obs: &ObservationSet,
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
    mode: LikelihoodMode,
) -> Result<LogProb> {
    PatternEngine::new().sequence_log_likelihood(obs, hyp, profile, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn pat(s: &str) -> AccessPattern {
        s.parse().unwrap()
    }

    fn hyp(h: u32, l: u32) -> LoadHypothesis {
        LoadHypothesis::new(h, l)
    }

    fn uniform(m: usize) -> SelectionProfile {
        SelectionProfile::uniform(m).unwrap()
    }

    #[test]
    fn pattern_probability_examples() {
        assert_eq!(
            pattern_probability(&pat("e"), hyp(0, 0), &uniform(1)).unwrap(),
            LogProb::ONE
        );
        let p = pattern_probability(&pat("hle"), hyp(1, 1), &uniform(3)).unwrap();
        assert!((p.prob() - 1.0 / 9.0).abs() < 1e-12);
        let p = pattern_probability(&pat("xe"), hyp(1, 1), &uniform(2)).unwrap();
        assert!((p.prob() - 0.25).abs() < 1e-12);
        assert!(pattern_probability(&pat("ee"), hyp(2, 0), &uniform(2))
            .unwrap()
            .is_zero());
        assert!(matches!(
            pattern_probability(&pat("eee"), hyp(0, 0), &uniform(2)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn reduced_examples() {
        let p = rcml_pattern_probability(&pat("hle"), hyp(1, 1), &uniform(3)).unwrap();
        assert!((p.prob() - 1.0 / 9.0).abs() < 1e-12);
        for (h, l) in [(0, 4), (2, 2), (3, 5), (0, 9)] {
            assert_eq!(
                rcml_pattern_probability(&pat("xx"), hyp(h, l), &uniform(2)).unwrap(),
                LogProb::ONE
            );
        }
        assert!(rcml_pattern_probability(&pat("xx"), hyp(1, 2), &uniform(2))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn factors_multiply_to_probability() {
        let engine = PatternEngine::new();
        let f = engine.factors(&pat("xx"), hyp(2, 2), &uniform(2)).unwrap().unwrap();
        assert_eq!(f.reduced(), LogProb::ONE);
        assert!((f.collision.prob() - 0.375).abs() < 1e-12);
        assert!(engine.factors(&pat("xx"), hyp(1, 0), &uniform(2)).unwrap().is_none());
    }

    #[test]
    fn sequence_examples() {
        let profile = uniform(2);
        let single = ObservationSet::new(vec![pat("xe")]).unwrap();
        let double = ObservationSet::new(vec![pat("xe"), pat("xe")]).unwrap();
        for mode in [LikelihoodMode::Full, LikelihoodMode::Reduced] {
            let one = sequence_log_likelihood(&single, hyp(1, 2), &profile, mode).unwrap();
            let direct = PatternEngine::new()
                .probability(&pat("xe"), hyp(1, 2), &profile, mode)
                .unwrap();
            assert_eq!(one, direct);
            let two = sequence_log_likelihood(&double, hyp(1, 2), &profile, mode).unwrap();
            assert!((two.ln() - 2.0 * one.ln()).abs() < 1e-12);
        }
        let obs = ObservationSet::new(vec![pat("he"), pat("eh")]).unwrap();
        let ll = sequence_log_likelihood(&obs, hyp(1, 0), &profile, LikelihoodMode::Full).unwrap();
        assert!((ll.ln() - 0.25f64.ln()).abs() < 1e-12);
    }
}
