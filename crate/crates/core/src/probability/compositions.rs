//! Ways of distributing the devices left over after the single and empty RBs
//! across the collision RBs.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Devices per collision RB (`totals`) and how many of them are
/// high-priority (`highs`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollisionComposition {
    pub totals: Vec<u32>,
    pub highs: Vec<u32>,
}

/// All vectors of length `num_collision_rbs` with every entry at least 2 and
/// entries summing to `total_ues`, in lexicographic order.
pub fn find_combinations(num_collision_rbs: usize, total_ues: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(num_collision_rbs);
    fill_totals(num_collision_rbs, total_ues, &mut current, &mut out);
    out
}

fn fill_totals(slots: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots == 0 {
        if left == 0 {
            out.push(current.clone());
        }
        return;
    }
    let reserve = 2 * (slots as u32 - 1);
    if left < reserve + 2 {
        return;
    }
    let max_here = if slots == 1 { left } else { left - reserve };
    let min_here = if slots == 1 { left } else { 2 };
    for k in min_here..=max_here {
        current.push(k);
        fill_totals(slots - 1, left - k, current, out);
        current.pop();
    }
}

/// All high-priority splits `i` of the totals `k` with `0 <= i_j <= k_j`,
/// `sum(i) = remaining_high` and `sum(k - i) = remaining_low`, in
/// lexicographic order.
pub fn find_combinations_h(k: &[u32], remaining_high: i64, remaining_low: i64) -> Vec<Vec<u32>> {
    let total: i64 = k.iter().map(|&v| i64::from(v)).sum();
    if remaining_high < 0 || remaining_low < 0 || total != remaining_high + remaining_low {
        return Vec::new();
    }
    // suffix[j] = sum of k[j..]
    let mut suffix = vec![0u32; k.len() + 1];
    for j in (0..k.len()).rev() {
        suffix[j] = suffix[j + 1] + k[j];
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k.len());
    fill_highs(k, &suffix, remaining_high as u32, &mut current, &mut out);
    out
}

fn fill_highs(k: &[u32], suffix: &[u32], left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let j = current.len();
    if j == k.len() {
        if left == 0 {
            out.push(current.clone());
        }
        return;
    }
    let lo = left.saturating_sub(suffix[j + 1]);
    let hi = k[j].min(left);
    for i in lo..=hi {
        current.push(i);
        fill_highs(k, suffix, left - i, current, out);
        current.pop();
    }
}

type Shared = Arc<Vec<Vec<u32>>>;
/// Collision totals plus the remaining high and low counts.
type SplitKey = (Vec<u32>, u32, u32);

/// Memoized composition lists, safe to share between threads.
#[derive(Debug, Default)]
pub struct CompositionCache {
    totals: RwLock<HashMap<(usize, u32), Shared>>,
    splits: RwLock<HashMap<SplitKey, Shared>>,
}

impl CompositionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn combinations(&self, num_collision_rbs: usize, total_ues: u32) -> Shared {
        let key = (num_collision_rbs, total_ues);
        if let Some(hit) = self.totals.read().expect("cache poisoned").get(&key) {
            return Arc::clone(hit);
        }
        let value = Arc::new(find_combinations(num_collision_rbs, total_ues));
        self.totals
            .write()
            .expect("cache poisoned")
            .entry(key)
            .or_insert(value)
            .clone()
    }

    pub fn combinations_h(&self, k: &[u32], remaining_high: u32, remaining_low: u32) -> Shared {
        let key = (k.to_vec(), remaining_high, remaining_low);
        if let Some(hit) = self.splits.read().expect("cache poisoned").get(&key) {
            return Arc::clone(hit);
        }
        let value = Arc::new(find_combinations_h(
            k,
            i64::from(remaining_high),
            i64::from(remaining_low),
        ));
        self.splits
            .write()
            .expect("cache poisoned")
            .entry(key)
            .or_insert(value)
            .clone()
    }

    /// Every composition for `num_collision_rbs` RBs holding the given
    /// remaining devices.
    pub fn compositions(
        &self,
        num_collision_rbs: usize,
        remaining_high: u32,
        remaining_low: u32,
    ) -> Vec<CollisionComposition> {
        let totals = self.combinations(num_collision_rbs, remaining_high + remaining_low);
        totals
            .iter()
            .flat_map(|k| {
                self.combinations_h(k, remaining_high, remaining_low)
                    .iter()
                    .map(|i| CollisionComposition {
                        totals: k.clone(),
                        highs: i.clone(),
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}
