//! Domain types shared by every other module: resource-block events, access
//! patterns and their index sets, selection profiles, load hypotheses and
//! observation sets.
//!
//! Resource blocks are indexed from zero. In the text form of a pattern the
//! leftmost character is RB 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance on the sum of a selection probability vector.
pub const PROFILE_SUM_TOLERANCE: f64 = 1e-9;

/// What the base station observes on one resource block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RbEvent {
    /// Exactly one high-priority device selected the RB.
    SingleHigh,
    /// Exactly one low-priority device selected the RB.
    SingleLow,
    /// Nobody selected the RB.
    Empty,
    /// Two or more devices, of any class, selected the RB.
    Collision,
}

impl RbEvent {
    pub const ALL: [RbEvent; 4] = [
        RbEvent::SingleHigh,
        RbEvent::SingleLow,
        RbEvent::Empty,
        RbEvent::Collision,
    ];

    pub fn symbol(self) -> char {
        match self {
            RbEvent::SingleHigh => 'h',
            RbEvent::SingleLow => 'l',
            RbEvent::Empty => 'e',
            RbEvent::Collision => 'x',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'h' => Some(RbEvent::SingleHigh),
            'l' => Some(RbEvent::SingleLow),
            'e' => Some(RbEvent::Empty),
            'x' => Some(RbEvent::Collision),
            _ => None,
        }
    }

    /// Exchanges the roles of the two priority classes.
    pub fn swap_classes(self) -> Self {
        match self {
            RbEvent::SingleHigh => RbEvent::SingleLow,
            RbEvent::SingleLow => RbEvent::SingleHigh,
            other => other,
        }
    }
}

/// The events observed across the `M` resource blocks of one RACH slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AccessPattern {
    events: Vec<RbEvent>,
}

impl AccessPattern {
    pub fn new(events: Vec<RbEvent>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(Self { events })
    }

    /// Number of resource blocks.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[RbEvent] {
        &self.events
    }

    pub fn index_sets(&self) -> PatternIndexSets {
        PatternIndexSets::from_pattern(self)
    }

    pub fn swap_classes(&self) -> Self {
        Self {
            events: self.events.iter().map(|e| e.swap_classes()).collect(),
        }
    }

    /// Reorders the RBs so that position `i` of the result holds position
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.len(), "permutation length");
        Self {
            events: order.iter().map(|&i| self.events[i]).collect(),
        }
    }

    pub fn is_collision_free(&self) -> bool {
        !self.events.contains(&RbEvent::Collision)
    }

    /// Every pattern of length `m`, in lexicographic order of the text form
    /// `h < l < e < x`.
    pub fn enumerate_all(m: usize) -> Vec<AccessPattern> {
        assert!(m >= 1, "pattern length must be positive");
        let mut out = vec![Vec::with_capacity(m)];
        for _ in 0..m {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<RbEvent>| {
                    RbEvent::ALL.iter().map(move |&e| {
                        let mut next = prefix.clone();
                        next.push(e);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(|events| AccessPattern { events }).collect()
    }
}

impl FromStr for AccessPattern {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let events = text
            .chars()
            .enumerate()
            .map(|(position, c)| RbEvent::from_symbol(c).ok_or(Error::PatternCharacter { position, found: c }))
            .collect::<Result<Vec<_>>>()?;
        AccessPattern::new(events)
    }
}

impl fmt::Display for AccessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            write!(f, "{}", e.symbol())?;
        }
        Ok(())
    }
}

pub fn parse_pattern(text: &str) -> Result<AccessPattern> {
    text.parse()
}

pub fn format_pattern(pattern: &AccessPattern) -> String {
    pattern.to_string()
}

/// Zero-based RB indices of a pattern, split by event. Each set is ascending
/// and together they partition `0..M`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternIndexSets {
    high: Vec<usize>,
    low: Vec<usize>,
    empty: Vec<usize>,
    collision: Vec<usize>,
}

impl PatternIndexSets {
    pub fn from_pattern(pattern: &AccessPattern) -> Self {
        let mut sets = Self::default();
        for (i, e) in pattern.events().iter().enumerate() {
            match e {
                RbEvent::SingleHigh => sets.high.push(i),
                RbEvent::SingleLow => sets.low.push(i),
                RbEvent::Empty => sets.empty.push(i),
                RbEvent::Collision => sets.collision.push(i),
            }
        }
        sets
    }

    pub fn high(&self) -> &[usize] {
        &self.high
    }

    pub fn low(&self) -> &[usize] {
        &self.low
    }

    pub fn empty(&self) -> &[usize] {
        &self.empty
    }

    pub fn collision(&self) -> &[usize] {
        &self.collision
    }

    pub fn num_rbs(&self) -> usize {
        self.high.len() + self.low.len() + self.empty.len() + self.collision.len()
    }

    /// Whether `hyp` can produce the pattern at all, ignoring the profile.
    ///
    /// Every single-high and single-low RB needs its own device, and the
    /// devices left over must fill every collision RB with at least two.
    pub fn is_feasible_for(&self, hyp: LoadHypothesis) -> bool {
        let (h, l, x) = (
            self.high.len() as u64,
            self.low.len() as u64,
            self.collision.len() as u64,
        );
        let (n_high, n_low) = (u64::from(hyp.n_high), u64::from(hyp.n_low));
        if n_high < h || n_low < l {
            return false;
        }
        let rest = (n_high - h) + (n_low - l);
        if x == 0 {
            rest == 0
        } else {
            rest >= 2 * x
        }
    }
}

pub fn derive_index_sets(pattern: &AccessPattern) -> PatternIndexSets {
    PatternIndexSets::from_pattern(pattern)
}

pub fn feasibility_check(sets: &PatternIndexSets, hyp: LoadHypothesis) -> bool {
    sets.is_feasible_for(hyp)
}

/// Maps per-RB device counts of each class to the observed pattern.
pub fn classify_occupancy(high_counts: &[u32], low_counts: &[u32]) -> Result<AccessPattern> {
    if high_counts.len() != low_counts.len() {
        return Err(Error::DimensionMismatch {
            expected: high_counts.len(),
            found: low_counts.len(),
        });
    }
    let events = high_counts
        .iter()
        .zip(low_counts)
        .map(|(&h, &l)| match (h, l) {
            (0, 0) => RbEvent::Empty,
            (1, 0) => RbEvent::SingleHigh,
            (0, 1) => RbEvent::SingleLow,
            _ => RbEvent::Collision,
        })
        .collect();
    AccessPattern::new(events)
}

/// Number of high- and low-priority devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LoadHypothesis {
    pub n_high: u32,
    pub n_low: u32,
}

impl LoadHypothesis {
    pub const fn new(n_high: u32, n_low: u32) -> Self {
        Self { n_high, n_low }
    }

    pub fn total(self) -> u32 {
        self.n_high + self.n_low
    }

    pub fn swap_classes(self) -> Self {
        Self::new(self.n_low, self.n_high)
    }
}

impl fmt::Display for LoadHypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.n_high, self.n_low)
    }
}

/// Per-RB selection probabilities of each device class.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProfile {
    p_high: Vec<f64>,
    p_low: Vec<f64>,
}

impl SelectionProfile {
    pub fn new(p_high: Vec<f64>, p_low: Vec<f64>) -> Result<Self> {
        if p_high.is_empty() {
            return Err(Error::InvalidProfile("no resource blocks".into()));
        }
        if p_high.len() != p_low.len() {
            return Err(Error::InvalidProfile(format!(
                "p_high has {} entries but p_low has {}",
                p_high.len(),
                p_low.len()
            )));
        }
        for (name, v) in [("p_high", &p_high), ("p_low", &p_low)] {
            if let Some((i, p)) = v
                .iter()
                .enumerate()
                .find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0)
            {
                return Err(Error::InvalidProfile(format!("{name}[{i}] = {p} is not a probability")));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > PROFILE_SUM_TOLERANCE {
                return Err(Error::InvalidProfile(format!("{name} sums to {sum}, not 1")));
            }
        }
        Ok(Self { p_high, p_low })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidProfile("no resource blocks".into()));
        }
        let v = vec![1.0 / m as f64; m];
        Self::new(v.clone(), v)
    }

    pub fn m(&self) -> usize {
        self.p_high.len()
    }

    pub fn p_high(&self) -> &[f64] {
        &self.p_high
    }

    pub fn p_low(&self) -> &[f64] {
        &self.p_low
    }

    pub fn swap_classes(&self) -> Self {
        Self {
            p_high: self.p_low.clone(),
            p_low: self.p_high.clone(),
        }
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.m(), "permutation length");
        Self {
            p_high: order.iter().map(|&i| self.p_high[i]).collect(),
            p_low: order.iter().map(|&i| self.p_low[i]).collect(),
        }
    }

    pub(crate) fn check_pattern(&self, pattern: &AccessPattern) -> Result<()> {
        if pattern.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: self.m(),
                found: pattern.len(),
            });
        }
        Ok(())
    }
}

/// `T` access patterns observed in independent slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSet {
    patterns: Vec<AccessPattern>,
}

impl ObservationSet {
    pub fn new(patterns: Vec<AccessPattern>) -> Result<Self> {
        let first = patterns.first().ok_or(Error::EmptyObservations)?;
        let m = first.len();
        if let Some(bad) = patterns.iter().find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { patterns })
    }

    pub fn patterns(&self) -> &[AccessPattern] {
        &self.patterns
    }

    /// Number of slots.
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Number of resource blocks per slot.
    pub fn m(&self) -> usize {
        self.patterns[0].len()
    }

    /// Parses one pattern per line. Blank lines and lines starting with `#`
    /// are skipped.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let patterns = text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(patterns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pat(s: &str) -> AccessPattern {
        s.parse().unwrap()
    }

    #[test]
    fn index_sets_of_eight_rb_example() {
        // l h x e x h e h
        let sets = pat("lhxexheh").index_sets();
        assert_eq!(sets.high(), &[1, 5, 7]);
        assert_eq!(sets.low(), &[0]);
        assert_eq!(sets.empty(), &[3, 6]);
        assert_eq!(sets.collision(), &[2, 4]);
    }

    #[test]
    fn index_sets_trivial_patterns() {
        let sets = pat("eee").index_sets();
        assert!(sets.high().is_empty() && sets.low().is_empty() && sets.collision().is_empty());
        assert_eq!(sets.empty(), &[0, 1, 2]);

        let sets = pat("x").index_sets();
        assert_eq!(sets.collision(), &[0]);
        assert_eq!(sets.num_rbs(), 1);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_occupancy(&[1, 0], &[0, 0]).unwrap(), pat("he"));
        assert_eq!(classify_occupancy(&[1, 0], &[1, 0]).unwrap(), pat("xe"));
        assert_eq!(classify_occupancy(&[0, 1, 2], &[1, 0, 0]).unwrap(), pat("lhx"));
        assert!(matches!(
            classify_occupancy(&[1, 0], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn feasibility_examples() {
        let sets = pat("hle").index_sets();
        assert!(sets.is_feasible_for(LoadHypothesis::new(1, 1)));
        assert!(!sets.is_feasible_for(LoadHypothesis::new(2, 1)));
        assert!(!pat("xe").index_sets().is_feasible_for(LoadHypothesis::new(1, 0)));
        assert!(pat("xe").index_sets().is_feasible_for(LoadHypothesis::new(1, 1)));
        assert!(!pat("xx").index_sets().is_feasible_for(LoadHypothesis::new(2, 1)));
        assert!(pat("xx").index_sets().is_feasible_for(LoadHypothesis::new(0, 4)));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            pat("hlex").events(),
            &[
                RbEvent::SingleHigh,
                RbEvent::SingleLow,
                RbEvent::Empty,
                RbEvent::Collision
            ]
        );
        assert_eq!(pat("eee").events(), &[RbEvent::Empty; 3]);
        match "hq".parse::<AccessPattern>() {
            Err(Error::PatternCharacter { position, found }) => {
                assert_eq!(position, 1);
                assert_eq!(found, 'q');
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!("".parse::<AccessPattern>(), Err(Error::EmptyPattern)));
    }

    #[test]
    fn profile_validation() {
        assert!(SelectionProfile::new(vec![0.5, 0.5], vec![1.0, 0.0]).is_ok());
        assert!(SelectionProfile::new(vec![0.5, 0.6], vec![1.0, 0.0]).is_err());
        assert!(SelectionProfile::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(SelectionProfile::new(vec![1.5, -0.5], vec![0.5, 0.5]).is_err());
        assert!(SelectionProfile::new(vec![], vec![]).is_err());
        assert!(SelectionProfile::uniform(6).is_ok());
    }

    #[test]
    fn observation_set_validation() {
        assert!(matches!(ObservationSet::new(vec![]), Err(Error::EmptyObservations)));
        assert!(matches!(
            ObservationSet::new(vec![pat("he"), pat("hee")]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        let obs = ObservationSet::parse_lines("# comment\nhe\n\neh\n").unwrap();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs.m(), 2);
    }

    #[test]
    fn enumerate_all_counts() {
        assert_eq!(AccessPattern::enumerate_all(1).len(), 4);
        let all = AccessPattern::enumerate_all(3);
        assert_eq!(all.len(), 64);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 64);
    }

    fn pattern_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec(prop::sample::select(vec!['h', 'l', 'e', 'x']), 1..12)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn parse_format_round_trip(text in pattern_strategy()) {
            let p = parse_pattern(&text).unwrap();
            prop_assert_eq!(format_pattern(&p), text.clone());
            prop_assert_eq!(parse_pattern(&format_pattern(&p)).unwrap(), p);
        }

        #[test]
        fn index_sets_partition(text in pattern_strategy()) {
            let p = parse_pattern(&text).unwrap();
            let sets = p.index_sets();
            prop_assert_eq!(sets.num_rbs(), p.len());
            let mut all: Vec<usize> = sets.high().iter()
                .chain(sets.low()).chain(sets.empty()).chain(sets.collision())
                .copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..p.len()).collect::<Vec<_>>());
            for s in [sets.high(), sets.low(), sets.empty(), sets.collision()] {
                prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn true_load_is_always_feasible(
            picks_high in proptest::collection::vec(0usize..5, 0..8),
            picks_low in proptest::collection::vec(0usize..5, 0..8),
        ) {
            let m = 5;
            let mut high = vec![0u32; m];
            let mut low = vec![0u32; m];
            for &i in &picks_high { high[i] += 1; }
            for &i in &picks_low { low[i] += 1; }
            let p = classify_occupancy(&high, &low).unwrap();
            let hyp = LoadHypothesis::new(picks_high.len() as u32, picks_low.len() as u32);
            prop_assert!(p.index_sets().is_feasible_for(hyp));
        }
    }
}
