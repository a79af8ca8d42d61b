//! Synthetic RACH observations.
//!
//! Every device picks one RB per slot from its class distribution,
//! independently of every other device and slot.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{classify_occupancy, AccessPattern, LoadHypothesis, ObservationSet, SelectionProfile};

/// Root of all random streams in a run.
///
/// The stream for `(trial, slot)` is a ChaCha8 generator seeded with
/// `mix(mix(mix(base_seed) ^ trial) ^ slot)`, where `mix` is the SplitMix64
/// finalizer. Streams never depend on the order in which they are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimulationSeed {
    base_seed: u64,
}

impl SimulationSeed {
    pub const fn new(base_seed: u64) -> Self {
        Self { base_seed }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream(&self, trial: u64, slot: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(mix(mix(self.base_seed) ^ trial) ^ slot))
    }
}

/// Combines several integers into one well-spread key.
pub fn mix_key(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| mix(acc ^ p))
}

fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Inverse-CDF sampler over RB indices.
#[derive(Debug, Clone)]
pub struct CategoricalSampler {
    cumulative: Vec<f64>,
    last_supported: usize,
}

impl CategoricalSampler {
    pub fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = p
            .iter()
            .map(|&pi| {
                acc += pi;
                acc
            })
            .collect();
        let last_supported = p.iter().rposition(|&pi| pi > 0.0).unwrap_or(0);
        Self {
            cumulative,
            last_supported,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        // Zero-probability RBs have an empty interval and are never hit.
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_supported)
    }
}

/// Samplers for both classes of a profile.
#[derive(Debug, Clone)]
pub struct PatternSampler {
    high: CategoricalSampler,
    low: CategoricalSampler,
    m: usize,
}

impl PatternSampler {
    pub fn new(profile: &SelectionProfile) -> Self {
        Self {
            high: CategoricalSampler::new(profile.p_high()),
            low: CategoricalSampler::new(profile.p_low()),
            m: profile.m(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, hyp: LoadHypothesis, rng: &mut R) -> AccessPattern {
        let mut high = vec![0u32; self.m];
        let mut low = vec![0u32; self.m];
        for _ in 0..hyp.n_high {
            high[self.high.sample(rng)] += 1;
        }
        for _ in 0..hyp.n_low {
            low[self.low.sample(rng)] += 1;
        }
        classify_occupancy(&high, &low).expect("count vectors share the profile length")
    }
}

pub fn sample_pattern<R: Rng + ?Sized>(hyp: LoadHypothesis, profile: &SelectionProfile, rng: &mut R) -> AccessPattern {
    PatternSampler::new(profile).sample(hyp, rng)
}

/// `slots` independent patterns for one trial; deterministic in
/// `(seed, trial)`.
pub fn sample_observations(
    hyp: LoadHypothesis,
    profile: &SelectionProfile,
    slots: usize,
    seed: SimulationSeed,
    trial: u64,
) -> Result<ObservationSet> {
    if slots == 0 {
        return Err(Error::ZeroSlots);
    }
    let sampler = PatternSampler::new(profile);
    let patterns = (0..slots as u64)
        .map(|slot| sampler.sample(hyp, &mut seed.stream(trial, slot)))
        .collect();
    ObservationSet::new(patterns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RbEvent;

    #[test]
    fn no_devices_means_all_empty() {
        let profile = SelectionProfile::uniform(4).unwrap();
        let mut rng = SimulationSeed::new(1).stream(0, 0);
        for _ in 0..50 {
            let p = sample_pattern(LoadHypothesis::new(0, 0), &profile, &mut rng);
            assert!(p.events().iter().all(|&e| e == RbEvent::Empty));
        }
    }

    #[test]
    fn single_rb_single_device() {
        let profile = SelectionProfile::uniform(1).unwrap();
        let mut rng = SimulationSeed::new(2).stream(0, 0);
        for _ in 0..50 {
            assert_eq!(
                sample_pattern(LoadHypothesis::new(1, 0), &profile, &mut rng).to_string(),
                "h"
            );
        }
    }

    #[test]
    fn single_device_frequency() {
        let profile = SelectionProfile::uniform(2).unwrap();
        let mut rng = SimulationSeed::new(3).stream(0, 0);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| sample_pattern(LoadHypothesis::new(1, 0), &profile, &mut rng).to_string() == "he")
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    #[test]
    fn zero_probability_rbs_are_never_chosen() {
        let sampler = CategoricalSampler::new(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let mut rng = SimulationSeed::new(4).stream(0, 0);
        for _ in 0..5000 {
            let i = sampler.sample(&mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn observations_are_deterministic() {
        let profile = SelectionProfile::uniform(6).unwrap();
        let hyp = LoadHypothesis::new(2, 4);
        let seed = SimulationSeed::new(42);
        let a = sample_observations(hyp, &profile, 3, seed, 7).unwrap();
        let b = sample_observations(hyp, &profile, 3, seed, 7).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.m(), 6);
        assert_eq!(a, b);
        let long_a = sample_observations(hyp, &profile, 20, seed, 7).unwrap();
        let long_b = sample_observations(hyp, &profile, 20, seed, 8).unwrap();
        assert_ne!(long_a, long_b);
        // a prefix of slots does not depend on the total slot count
        assert_eq!(&long_a.patterns()[..3], a.patterns());
    }

    #[test]
    fn zero_slots_rejected() {
        let profile = SelectionProfile::uniform(2).unwrap();
        assert!(matches!(
            sample_observations(LoadHypothesis::new(1, 1), &profile, 0, SimulationSeed::new(0), 0),
            Err(Error::ZeroSlots)
        ));
    }

    #[test]
    fn streams_differ() {
        let seed = SimulationSeed::new(9);
        let a: u64 = seed.stream(0, 1).random();
        let b: u64 = seed.stream(1, 0).random();
        let c: u64 = seed.stream(0, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_ne!(mix_key(&[1, 2]), mix_key(&[2, 1]));
    }
}
