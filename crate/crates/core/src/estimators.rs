//! Maximum-likelihood load estimation over a grid of hypotheses.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logprob::LogProb;
use crate::model::{AccessPattern, LoadHypothesis, ObservationSet, SelectionProfile};
use crate::probability::{leading_factors, CollisionTable, LikelihoodMode, RenormalizationState};

/// Log-likelihoods closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Full pattern probability.
    Ml,
    /// Collision factor dropped.
    Rcml,
}

impl Estimator {
    pub fn mode(self) -> LikelihoodMode {
        match self {
            Estimator::Ml => LikelihoodMode::Full,
            Estimator::Rcml => LikelihoodMode::Reduced,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ml => "ml",
            Estimator::Rcml => "rcml",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" => Ok(Estimator::Ml),
            "rcml" => Ok(Estimator::Rcml),
            other => Err(Error::Config(format!(
                "unknown estimator {other:?} (expected ml or rcml)"
            ))),
        }
    }
}

/// Hypotheses `[0, n_high_max] x [0, n_low_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HypothesisGrid {
    pub n_high_max: u32,
    pub n_low_max: u32,
}

impl HypothesisGrid {
    pub const fn new(n_high_max: u32, n_low_max: u32) -> Self {
        Self { n_high_max, n_low_max }
    }

    /// Three times the RB count per class.
    pub fn default_for(m: usize) -> Self {
        let max = 3 * m as u32;
        Self::new(max, max)
    }

    pub fn rows(&self) -> usize {
        self.n_high_max as usize + 1
    }

    pub fn cols(&self) -> usize {
        self.n_low_max as usize + 1
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major over `n_high`, then `n_low`.
    pub fn hypotheses(&self) -> impl Iterator<Item = LoadHypothesis> + '_ {
        (0..=self.n_high_max).flat_map(move |h| (0..=self.n_low_max).map(move |l| LoadHypothesis::new(h, l)))
    }

    pub fn contains(&self, hyp: LoadHypothesis) -> bool {
        hyp.n_high <= self.n_high_max && hyp.n_low <= self.n_low_max
    }

    fn index(&self, hyp: LoadHypothesis) -> usize {
        hyp.n_high as usize * self.cols() + hyp.n_low as usize
    }

    /// Grows the grid until it reaches the smallest counts the observations
    /// allow: every single RB needs its own device and each collision RB at
    /// least two.
    pub fn widened_for(&self, obs: &ObservationSet) -> Self {
        let mut need_high = 0;
        let mut need_low = 0;
        let mut need_total = 0;
        for p in obs.patterns() {
            let sets = p.index_sets();
            let (h, l, x) = (
                sets.high().len() as u32,
                sets.low().len() as u32,
                sets.collision().len() as u32,
            );
            need_high = need_high.max(h);
            need_low = need_low.max(l);
            need_total = need_total.max(h + l + 2 * x);
        }
        let mut out = Self::new(self.n_high_max.max(need_high), self.n_low_max.max(need_low));
        let total = out.n_high_max + out.n_low_max;
        if total < need_total {
            out.n_low_max += need_total - total;
        }
        out
    }
}

/// Log-likelihood of every grid hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodSurface {
    grid: HypothesisGrid,
    values: Vec<LogProb>,
    mode: LikelihoodMode,
}

impl LikelihoodSurface {
    pub fn grid(&self) -> HypothesisGrid {
        self.grid
    }

    pub fn mode(&self) -> LikelihoodMode {
        self.mode
    }

    pub fn get(&self, hyp: LoadHypothesis) -> Option<LogProb> {
        self.grid.contains(hyp).then(|| self.values[self.grid.index(hyp)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (LoadHypothesis, LogProb)> + '_ {
        self.grid.hypotheses().zip(self.values.iter().copied())
    }

    /// Adds `delta` to every non-zero log-likelihood.
    pub fn shifted(&self, delta: f64) -> Self {
        let values = self
            .values
            .iter()
            .map(|v| {
                if v.is_zero() {
                    *v
                } else {
                    LogProb::from_ln(v.ln() + delta)
                }
            })
            .collect();
        Self { values, ..self.clone() }
    }

    /// The maximizer; ties go to the smallest `n_high + n_low`, then the
    /// smallest `n_high`. `None` when every cell is zero.
    pub fn argmax(&self) -> Option<LoadHypothesis> {
        let best = self
            .values
            .iter()
            .filter(|v| !v.is_zero())
            .map(|v| v.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return None;
        }
        self.iter()
            .filter(|(_, v)| !v.is_zero() && v.ln() >= best - TIE_TOLERANCE)
            .map(|(h, _)| h)
            .min_by_key(|h| (h.total(), h.n_high))
    }

    /// Rows are `n_high`, columns `n_low`; zero cells print as `-inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "n_high")?;
        for l in 0..=self.grid.n_low_max {
            write!(out, ",{l}")?;
        }
        writeln!(out)?;
        for h in 0..=self.grid.n_high_max {
            write!(out, "{h}")?;
            for l in 0..=self.grid.n_low_max {
                write!(out, ",{}", self.values[self.grid.index(LoadHypothesis::new(h, l))])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Evaluates every grid cell. The grid is widened (with a warning) when it
/// cannot hold the smallest load the observations imply.
pub fn likelihood_surface(
    obs: &ObservationSet,
    profile: &SelectionProfile,
    grid: HypothesisGrid,
    mode: LikelihoodMode,
) -> Result<LikelihoodSurface> {
    for p in obs.patterns() {
        profile.check_pattern(p)?;
    }
    let widened = grid.widened_for(obs);
    if widened != grid {
        warn!(
            "hypothesis grid widened from {}x{} to {}x{} to fit the observations",
            grid.n_high_max, grid.n_low_max, widened.n_high_max, widened.n_low_max
        );
    }
    let grid = widened;

    let mut multiplicity: BTreeMap<&AccessPattern, u32> = BTreeMap::new();
    for p in obs.patterns() {
        *multiplicity.entry(p).or_default() += 1;
    }

    let mut values = vec![LogProb::ONE; grid.len()];
    for (pattern, &count) in &multiplicity {
        let sets = pattern.index_sets();
        let (h, l) = (sets.high().len() as u32, sets.low().len() as u32);
        let table = (mode == LikelihoodMode::Full && !sets.collision().is_empty()).then(|| {
            let mut state = RenormalizationState::new(profile, LoadHypothesis::new(0, 0));
            leading_factors(&sets, &mut state);
            CollisionTable::build(&sets, &state, grid.n_high_max - h, grid.n_low_max - l)
        });
        for hyp in grid.hypotheses() {
            let cell = &mut values[grid.index(hyp)];
            if cell.is_zero() {
                continue;
            }
            if !sets.is_feasible_for(hyp) {
                *cell = LogProb::ZERO;
                continue;
            }
            let mut state = RenormalizationState::new(profile, hyp);
            let (fh, fl, fe) = leading_factors(&sets, &mut state);
            let mut p = fh * fl * fe;
            if let Some(table) = &table {
                if !p.is_zero() {
                    p *= table.get(hyp.n_high - h, hyp.n_low - l);
                }
            }
            *cell *= if p.is_zero() {
                LogProb::ZERO
            } else {
                LogProb::from_ln(p.ln() * f64::from(count))
            };
        }
    }
    Ok(LikelihoodSurface { grid, values, mode })
}

pub fn estimate(
    obs: &ObservationSet,
    profile: &SelectionProfile,
    grid: HypothesisGrid,
    estimator: Estimator,
) -> Result<LoadHypothesis> {
    let surface = likelihood_surface(obs, profile, grid, estimator.mode())?;
    surface
        .argmax()
        .ok_or_else(|| Error::NoFeasibleHypothesis(explain_infeasibility(obs, surface.grid())))
}

pub fn ml_estimate(obs: &ObservationSet, profile: &SelectionProfile, grid: HypothesisGrid) -> Result<LoadHypothesis> {
    estimate(obs, profile, grid, Estimator::Ml)
}

pub fn rcml_estimate(obs: &ObservationSet, profile: &SelectionProfile, grid: HypothesisGrid) -> Result<LoadHypothesis> {
    estimate(obs, profile, grid, Estimator::Rcml)
}

/// Names the constraint that rules out every hypothesis.
fn explain_infeasibility(obs: &ObservationSet, grid: HypothesisGrid) -> String {
    // A collision-free slot shows every device, so it pins both counts.
    let mut pinned: Option<(usize, u32, u32)> = None;
    for (t, p) in obs.patterns().iter().enumerate() {
        let sets = p.index_sets();
        let (h, l, x) = (
            sets.high().len() as u32,
            sets.low().len() as u32,
            sets.collision().len() as u32,
        );
        match pinned {
            None if x == 0 => pinned = Some((t, h, l)),
            Some((s, ph, pl)) => {
                if x == 0 && (h, l) != (ph, pl) {
                    return format!("collision-free slots {s} and {t} pin the load to ({ph}, {pl}) and ({h}, {l})");
                }
                if h > ph || l > pl || h + l + 2 * x > ph + pl {
                    return format!(
                        "collision-free slot {s} pins the load to ({ph}, {pl}) but slot {t} needs at least {} high, {} low and {} devices in total",
                        h,
                        l,
                        h + l + 2 * x
                    );
                }
            }
            None => {}
        }
    }
    if let Some((s, ph, pl)) = pinned {
        for (t, p) in obs.patterns().iter().enumerate().take(s) {
            let sets = p.index_sets();
            let (h, l, x) = (
                sets.high().len() as u32,
                sets.low().len() as u32,
                sets.collision().len() as u32,
            );
            if h > ph || l > pl || h + l + 2 * x > ph + pl {
                return format!(
                    "collision-free slot {s} pins the load to ({ph}, {pl}) but slot {t} needs at least {} high, {} low and {} devices in total",
                    h,
                    l,
                    h + l + 2 * x
                );
            }
        }
    }
    format!(
        "every hypothesis in the {}x{} grid has probability zero under the selection profile (an observed event lies on an RB its class never selects)",
        grid.n_high_max, grid.n_low_max
    )
}
