use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Estimator, HypothesisGrid};
use crate::model::SelectionProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SetupId {
    /// One priority class: both classes select uniformly.
    #[serde(rename = "1")]
    One,
    /// Low-priority devices restricted to the first half of the RBs.
    #[serde(rename = "2")]
    Two,
    /// Non-uniform selection for both classes.
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for SetupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetupId::One => "1",
            SetupId::Two => "2",
            SetupId::Three => "3",
            SetupId::Custom => "custom",
        })
    }
}

impl FromStr for SetupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(SetupId::One),
            "2" => Ok(SetupId::Two),
            "3" => Ok(SetupId::Three),
            "custom" => Ok(SetupId::Custom),
            other => Err(Error::Config(format!(
                "unknown setup {other:?} (expected 1, 2, 3 or custom)"
            ))),
        }
    }
}

const PRESET_M: usize = 6;

fn preset_profile(setup: SetupId) -> SelectionProfile {
    let twelfths = |v: [f64; 6]| v.iter().map(|x| x / 12.0).collect::<Vec<_>>();
    let third = 1.0 / 3.0;
    let (high, low) = match setup {
        SetupId::One | SetupId::Custom => (vec![1.0 / 6.0; 6], vec![1.0 / 6.0; 6]),
        SetupId::Two => (vec![1.0 / 6.0; 6], vec![third, third, third, 0.0, 0.0, 0.0]),
        SetupId::Three => (
            twelfths([1.0, 1.0, 2.0, 2.0, 3.0, 3.0]),
            twelfths([4.0, 3.0, 2.0, 1.0, 1.0, 1.0]),
        ),
    };
    SelectionProfile::new(high, low).expect("preset profiles are valid")
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub setup: SetupId,
    pub m: usize,
    pub t_values: Vec<usize>,
    pub n_high_values: Vec<u32>,
    /// Inclusive.
    pub n_low_range: (u32, u32),
    pub profile: SelectionProfile,
    pub trials: u32,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub grid: HypothesisGrid,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(setup: SetupId) -> Result<Self> {
        let n_high_values = match setup {
            SetupId::One | SetupId::Custom => vec![2],
            SetupId::Two | SetupId::Three => vec![1, 2],
        };
        Ok(Self {
            setup,
            m: PRESET_M,
            t_values: vec![1, 3, 10],
            n_high_values,
            n_low_range: (0, 7),
            profile: preset_profile(setup),
            trials: 50,
            seed: 1,
            estimators: vec![Estimator::Ml, Estimator::Rcml],
            grid: HypothesisGrid::default_for(PRESET_M),
            output: None,
        })
    }

    /// Applies `overrides` on top of the preset they name (setup 1 when
    /// none is named).
    pub fn resolve(overrides: &ConfigOverrides) -> Result<Self> {
        let setup = match &overrides.setup {
            Some(s) => s.to_string().parse()?,
            None if overrides.p_high.is_some() || overrides.p_low.is_some() => SetupId::Custom,
            None => SetupId::One,
        };
        let mut c = Self::preset(setup)?;
        let m = overrides.m.unwrap_or(c.m);
        if m == 0 {
            return Err(Error::Config("m must be at least 1".into()));
        }
        let p_high = overrides
            .p_high
            .as_ref()
            .map(|v| v.iter().map(|p| p.0).collect::<Vec<_>>());
        let p_low = overrides
            .p_low
            .as_ref()
            .map(|v| v.iter().map(|p| p.0).collect::<Vec<_>>());
        if m != c.m || p_high.is_some() || p_low.is_some() {
            let fixed_shape = matches!(setup, SetupId::Two | SetupId::Three);
            if fixed_shape && m != PRESET_M && (p_high.is_none() || p_low.is_none()) {
                return Err(Error::Config(format!(
                    "setup {setup} defines a profile over {PRESET_M} RBs; m = {m} needs explicit --p-high and --p-low"
                )));
            }
            let uniform = vec![1.0 / m as f64; m];
            let base = if m == c.m {
                c.profile.clone()
            } else {
                SelectionProfile::new(uniform.clone(), uniform)?
            };
            let high = p_high.unwrap_or_else(|| base.p_high().to_vec());
            let low = p_low.unwrap_or_else(|| base.p_low().to_vec());
            if high.len() != m || low.len() != m {
                return Err(Error::Config(format!(
                    "profile has {} and {} entries but m = {m}",
                    high.len(),
                    low.len()
                )));
            }
            c.profile = SelectionProfile::new(high, low)?;
            c.m = m;
            c.grid = HypothesisGrid::default_for(m);
        }
        if let Some(t) = &overrides.t {
            c.t_values = t.clone();
        }
        if let Some(n) = &overrides.n_high {
            c.n_high_values = n.clone();
        }
        if let Some([lo, hi]) = overrides.n_low_range {
            c.n_low_range = (lo, hi);
        }
        if let Some(trials) = overrides.trials {
            c.trials = trials;
        }
        if let Some(seed) = overrides.seed {
            c.seed = seed;
        }
        if let Some(e) = &overrides.estimators {
            c.estimators = e.clone();
        }
        if let Some(h) = overrides.grid_max_high {
            c.grid.n_high_max = h;
        }
        if let Some(l) = overrides.grid_max_low {
            c.grid.n_low_max = l;
        }
        if let Some(out) = &overrides.out {
            c.output = Some(out.clone());
        }
        c.t_values.sort_unstable();
        c.t_values.dedup();
        c.n_high_values.sort_unstable();
        c.n_high_values.dedup();
        c.estimators.sort_unstable();
        c.estimators.dedup();
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.profile.m() != self.m {
            return fail(format!("profile covers {} RBs but m = {}", self.profile.m(), self.m));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.t_values.is_empty() || self.t_values.contains(&0) {
            return fail("every T must be at least 1".into());
        }
        if self.n_high_values.is_empty() {
            return fail("no n_high values".into());
        }
        if self.n_low_range.0 > self.n_low_range.1 {
            return fail(format!(
                "empty n_low range {}..={}",
                self.n_low_range.0, self.n_low_range.1
            ));
        }
        if self.estimators.is_empty() {
            return fail("no estimators selected".into());
        }
        Ok(())
    }
}

/// Optional settings from a config file or command-line flags.
///
/// File schema (TOML, every key optional):
///
/// ```toml
/// setup = "3"                 # 1, 2, 3 or "custom"
/// m = 6
/// t = [1, 3, 10]
/// n_high = [1, 2]
/// n_low_range = [0, 7]        # inclusive
/// p_high = ["1/12", "1/12", "2/12", "2/12", "3/12", "3/12"]   # numbers or "a/b"
/// p_low = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0]
/// trials = 50
/// seed = 1
/// estimators = ["ml", "rcml"]
/// grid_max_high = 18
/// grid_max_low = 18
/// out = "results.csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub setup: Option<SetupField>,
    pub m: Option<usize>,
    pub t: Option<Vec<usize>>,
    pub n_high: Option<Vec<u32>>,
    pub n_low_range: Option<[u32; 2]>,
    pub p_high: Option<Vec<Probability>>,
    pub p_low: Option<Vec<Probability>>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub estimators: Option<Vec<Estimator>>,
    pub grid_max_high: Option<u32>,
    pub grid_max_low: Option<u32>,
    pub out: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Values set in `other` win.
    pub fn merged_with(self, other: ConfigOverrides) -> Self {
        Self {
            setup: other.setup.or(self.setup),
            m: other.m.or(self.m),
            t: other.t.or(self.t),
            n_high: other.n_high.or(self.n_high),
            n_low_range: other.n_low_range.or(self.n_low_range),
            p_high: other.p_high.or(self.p_high),
            p_low: other.p_low.or(self.p_low),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            estimators: other.estimators.or(self.estimators),
            grid_max_high: other.grid_max_high.or(self.grid_max_high),
            grid_max_low: other.grid_max_low.or(self.grid_max_low),
            out: other.out.or(self.out),
        }
    }
}

/// Setup given as a number or a string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SetupField {
    Number(u32),
    Name(String),
}

impl fmt::Display for SetupField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetupField::Number(n) => write!(f, "{n}"),
            SetupField::Name(s) => f.write_str(s),
        }
    }
}

/// A probability written as a number or an `a/b` fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability(pub f64);

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Probability(x)),
            Raw::Text(s) => parse_probability(&s).map(Probability).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_probability(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("invalid probability {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            Ok(num / den)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

/// Comma-separated probabilities, each a number or an `a/b` fraction.
pub fn parse_probabilities(text: &str) -> Result<Vec<Probability>> {
    text.split(',').map(|s| parse_probability(s).map(Probability)).collect()
}

pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid list entry {s:?}")))
        })
        .collect()
}

/// `a..b`, `a..=b`, `a-b` or `a:b`, all inclusive.
pub fn parse_range(text: &str) -> Result<[u32; 2]> {
    let t = text.trim();
    let parts = ["..=", "..", "-", ":"]
        .iter()
        .find_map(|sep| t.split_once(sep))
        .ok_or_else(|| Error::Config(format!("invalid range {text:?} (expected e.g. 0..7)")))?;
    let lo = parts
        .0
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid range {text:?}")))?;
    let hi = parts
        .1
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid range {text:?}")))?;
    Ok([lo, hi])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_presets() {
        let one = ExperimentConfig::preset(SetupId::One).unwrap();
        assert_eq!(one.n_high_values, vec![2]);
        assert_eq!(one.profile, SelectionProfile::uniform(6).unwrap());
        assert_eq!(one.t_values, vec![1, 3, 10]);
        assert_eq!(one.n_low_range, (0, 7));
        assert_eq!(one.trials, 50);
        assert_eq!(one.grid, HypothesisGrid::new(18, 18));

        let two = ExperimentConfig::preset(SetupId::Two).unwrap();
        assert_eq!(two.n_high_values, vec![1, 2]);
        assert_eq!(two.profile.p_high(), &[1.0 / 6.0; 6]);
        assert_eq!(two.profile.p_low()[3..], [0.0, 0.0, 0.0]);
        assert!((two.profile.p_low()[0] - 1.0 / 3.0).abs() < 1e-15);

        let three = ExperimentConfig::preset(SetupId::Three).unwrap();
        let expect_high = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0].map(|x| x / 12.0);
        let expect_low = [4.0, 3.0, 2.0, 1.0, 1.0, 1.0].map(|x| x / 12.0);
        assert_eq!(three.profile.p_high(), &expect_high);
        assert_eq!(three.profile.p_low(), &expect_low);
    }

    #[test]
    fn overrides_from_toml() {
        let ov = ConfigOverrides::from_toml(
            r#"
            setup = 3
            t = [10, 1]
            n_low_range = [2, 4]
            trials = 7
            estimators = ["rcml"]
            grid_max_low = 12
            "#,
        )
        .unwrap();
        let c = ExperimentConfig::resolve(&ov).unwrap();
        assert_eq!(c.setup, SetupId::Three);
        assert_eq!(c.t_values, vec![1, 10]);
        assert_eq!(c.n_low_range, (2, 4));
        assert_eq!(c.trials, 7);
        assert_eq!(c.estimators, vec![Estimator::Rcml]);
        assert_eq!(c.grid, HypothesisGrid::new(18, 12));
    }

    #[test]
    fn custom_profile_with_fractions() {
        let ov = ConfigOverrides::from_toml(
            r#"
            m = 3
            p_high = ["1/3", "1/3", "1/3"]
            p_low = [0.5, 0.5, 0.0]
            "#,
        )
        .unwrap();
        let c = ExperimentConfig::resolve(&ov).unwrap();
        assert_eq!(c.setup, SetupId::Custom);
        assert_eq!(c.m, 3);
        assert_eq!(c.profile.p_low(), &[0.5, 0.5, 0.0]);
        assert_eq!(c.grid, HypothesisGrid::new(9, 9));
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigOverrides::from_toml("setup = \"2\"\ntrials = 5\nseed = 3").unwrap();
        let flags = ConfigOverrides {
            trials: Some(9),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(&file.merged_with(flags)).unwrap();
        assert_eq!(c.setup, SetupId::Two);
        assert_eq!(c.trials, 9);
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn invalid_configurations() {
        let bad = |toml: &str| ExperimentConfig::resolve(&ConfigOverrides::from_toml(toml).unwrap()).unwrap_err();
        assert!(matches!(bad("setup = 3\nm = 4"), Error::Config(_)));
        assert!(matches!(bad("setup = 1\nm = 4\np_high = [1.0]"), Error::Config(_)));
        assert!(matches!(bad("trials = 0"), Error::Config(_)));
        assert!(matches!(bad("t = [0]"), Error::Config(_)));
        assert!(matches!(bad("n_low_range = [3, 1]"), Error::Config(_)));
        assert!(matches!(bad("setup = 7"), Error::Config(_)));
        assert!(matches!(
            bad("p_high = [0.5, 0.6, 0.0, 0.0, 0.0, 0.0]"),
            Error::InvalidProfile(_)
        ));
        assert!(ConfigOverrides::from_toml("bogus = 1").is_err());
        // a uniform single-class setup rescales with m
        let c = ExperimentConfig::resolve(&ConfigOverrides::from_toml("setup = 1\nm = 4").unwrap()).unwrap();
        assert_eq!(c.profile, SelectionProfile::uniform(4).unwrap());
    }

    #[test]
    fn flag_parsers() {
        let p = parse_probabilities("1/3, 1/3,0.333333333333333333,0").unwrap();
        assert_eq!(p.len(), 4);
        assert!((p[0].0 - 1.0 / 3.0).abs() < 1e-15);
        assert!(parse_probabilities("1/0").is_err());
        assert!(parse_probabilities("abc").is_err());
        assert_eq!(parse_list::<u32>("1,3,10").unwrap(), vec![1, 3, 10]);
        assert!(parse_list::<u32>("1,x").is_err());
        assert_eq!(parse_range("0..7").unwrap(), [0, 7]);
        assert_eq!(parse_range("0..=7").unwrap(), [0, 7]);
        assert_eq!(parse_range("2-5").unwrap(), [2, 5]);
        assert_eq!(parse_range("2:5").unwrap(), [2, 5]);
        assert!(parse_range("7").is_err());
    }
}
