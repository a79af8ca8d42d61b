use crate::model::{LoadHypothesis, SelectionProfile};

/// Remaining device counts and selection probabilities conditioned on the
/// RBs processed so far.
///
/// Each probability vector is either all zero (its mass is exhausted) or sums
/// to one over the RBs not yet removed. Removed RBs hold exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormalizationState {
    remaining_high: u32,
    remaining_low: u32,
    p_high_hat: Vec<f64>,
    p_low_hat: Vec<f64>,
    removed: Vec<bool>,
}

impl RenormalizationState {
    pub fn new(profile: &SelectionProfile, hyp: LoadHypothesis) -> Self {
        Self::from_parts(
            profile.p_high().to_vec(),
            profile.p_low().to_vec(),
            hyp.n_high,
            hyp.n_low,
        )
    }

    pub fn from_parts(p_high_hat: Vec<f64>, p_low_hat: Vec<f64>, remaining_high: u32, remaining_low: u32) -> Self {
        assert_eq!(p_high_hat.len(), p_low_hat.len(), "vector lengths differ");
        let m = p_high_hat.len();
        Self {
            remaining_high,
            remaining_low,
            p_high_hat,
            p_low_hat,
            removed: vec![false; m],
        }
    }

    pub fn remaining_high(&self) -> u32 {
        self.remaining_high
    }

    pub fn remaining_low(&self) -> u32 {
        self.remaining_low
    }

    pub fn p_high_hat(&self) -> &[f64] {
        &self.p_high_hat
    }

    pub fn p_low_hat(&self) -> &[f64] {
        &self.p_low_hat
    }

    pub fn is_removed(&self, rb: usize) -> bool {
        self.removed[rb]
    }

    pub fn is_high_exhausted(&self) -> bool {
        self.p_high_hat.iter().all(|&p| p == 0.0)
    }

    pub fn is_low_exhausted(&self) -> bool {
        self.p_low_hat.iter().all(|&p| p == 0.0)
    }

    /// Probability that a remaining high-priority device avoids `rb`.
    ///
    /// Summed over the other active RBs rather than taken as `1 - p`, so an
    /// RB holding all remaining mass yields an exact zero.
    pub fn complement_high(&self, rb: usize) -> f64 {
        self.mass_excluding(&self.p_high_hat, rb)
    }

    pub fn complement_low(&self, rb: usize) -> f64 {
        self.mass_excluding(&self.p_low_hat, rb)
    }

    fn mass_excluding(&self, v: &[f64], rb: usize) -> f64 {
        v.iter()
            .enumerate()
            .filter(|&(j, _)| j != rb && !self.removed[j])
            .map(|(_, p)| p)
            .sum()
    }

    /// Same conditioning, different remaining device counts.
    pub fn with_remaining(&self, remaining_high: u32, remaining_low: u32) -> Self {
        Self {
            remaining_high,
            remaining_low,
            ..self.clone()
        }
    }

    pub(crate) fn take_high(&mut self, count: u32) {
        self.remaining_high = self.remaining_high.saturating_sub(count);
    }

    pub(crate) fn take_low(&mut self, count: u32) {
        self.remaining_low = self.remaining_low.saturating_sub(count);
    }

    /// Conditions both vectors on no further device selecting `rb`.
    pub fn remove(&mut self, rb: usize) {
        assert!(!self.removed[rb], "RB {rb} removed twice");
        let rest_high = self.complement_high(rb);
        let rest_low = self.complement_low(rb);
        self.removed[rb] = true;
        Self::rescale(&mut self.p_high_hat, rb, rest_high);
        Self::rescale(&mut self.p_low_hat, rb, rest_low);
    }

    fn rescale(v: &mut [f64], rb: usize, rest: f64) {
        v[rb] = 0.0;
        if rest > 0.0 {
            v.iter_mut().for_each(|p| *p /= rest);
        } else {
            v.iter_mut().for_each(|p| *p = 0.0);
        }
    }

    pub fn renormalize_after_removal(&self, rb: usize) -> Self {
        let mut next = self.clone();
        next.remove(rb);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(v: &[f64]) -> RenormalizationState {
        RenormalizationState::from_parts(v.to_vec(), v.to_vec(), 0, 0)
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn two_events() {
        let s = state(&[0.5, 0.5]).renormalize_after_removal(0);
        assert_eq!(s.p_high_hat(), &[0.0, 1.0]);
    }

    #[test]
    fn four_uniform_events() {
        let s = state(&[0.25; 4]).renormalize_after_removal(2);
        let third = 1.0 / 3.0;
        assert!(close(s.p_high_hat(), &[third, third, 0.0, third]));
    }

    #[test]
    fn removing_zero_mass_event_is_identity() {
        let s = state(&[0.0, 1.0]).renormalize_after_removal(0);
        assert_eq!(s.p_high_hat(), &[0.0, 1.0]);
        assert!(!s.is_high_exhausted());
    }

    #[test]
    fn removing_all_mass_exhausts() {
        let s = state(&[0.0, 1.0, 0.0]).renormalize_after_removal(1);
        assert!(s.is_high_exhausted());
        assert!(s.is_low_exhausted());
        assert_eq!(s.complement_high(0), 0.0);
    }

    #[test]
    fn complement_is_exact_on_last_rb() {
        let mut s = state(&[0.2, 0.3, 0.5]);
        s.remove(0);
        s.remove(1);
        assert_eq!(s.complement_high(2), 0.0);
    }

    proptest! {
        #[test]
        fn active_mass_stays_normalized(
            raw in proptest::collection::vec(0.0f64..1.0, 2..8),
            order_seed in any::<u64>(),
        ) {
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let v: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let m = v.len();
            let mut order: Vec<usize> = (0..m).collect();
            let mut seed = order_seed;
            for i in (1..m).rev() {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                order.swap(i, (seed >> 33) as usize % (i + 1));
            }
            let mut s = state(&v);
            for &rb in &order[..m - 1] {
                s.remove(rb);
                prop_assert_eq!(s.p_high_hat()[rb], 0.0);
                if !s.is_high_exhausted() {
                    let sum: f64 = s.p_high_hat().iter().sum();
                    prop_assert!((sum - 1.0).abs() < 1e-12, "sum {}", sum);
                }
            }
        }
    }
}
