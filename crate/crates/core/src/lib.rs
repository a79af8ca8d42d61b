//! Load estimation for a two-priority random-access channel.
//!
//! A base station sees, per RACH slot, which resource blocks were picked by a
//! single high-priority device (`h`), a single low-priority device (`l`),
//! nobody (`e`), or several devices (`x`). From `T` such slots this crate
//! estimates how many devices of each class are contending, with an exact
//! maximum-likelihood estimator and a cheaper variant that ignores collision
//! RBs.
//!
//! ```
//! use rachload::{ml_estimate, HypothesisGrid, ObservationSet, SelectionProfile};
//!
//! let profile = SelectionProfile::uniform(6).unwrap();
//! let obs = ObservationSet::parse_lines("hlxeel\nhxleel\n").unwrap();
//! let est = ml_estimate(&obs, &profile, HypothesisGrid::default_for(6)).unwrap();
//! assert!(est.n_high >= 1 && est.n_low >= 2);
//! ```

pub mod error;
pub mod estimators;
pub mod harness;
pub mod logprob;
pub mod model;
pub mod oracle;
pub mod probability;
pub mod simulator;

pub use error::{Error, Result};
pub use estimators::{
    estimate, likelihood_surface, ml_estimate, rcml_estimate, Estimator, HypothesisGrid, LikelihoodSurface,
};
pub use harness::{run_setup, ExperimentConfig, ExperimentOutcome, ExperimentRecord, SetupId};
pub use logprob::LogProb;
pub use model::{AccessPattern, LoadHypothesis, ObservationSet, PatternIndexSets, RbEvent, SelectionProfile};
pub use oracle::{exhaustive_pattern_distribution, oracle_pattern_probability, PatternDistribution};
pub use probability::{pattern_probability, rcml_pattern_probability, sequence_log_likelihood, LikelihoodMode};
pub use simulator::{sample_observations, sample_pattern, SimulationSeed};
