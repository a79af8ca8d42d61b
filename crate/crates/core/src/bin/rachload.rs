//! Command-line front end: simulate patterns, estimate loads, run Monte
//! Carlo experiments and cross-check the probability engine.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use rachload::error::{Error, Result};
use rachload::estimators::{estimate, likelihood_surface, Estimator};
use rachload::harness::{
    emit_mae_csv, emit_plot_csv, parse_list, parse_probabilities, parse_range, run_setup, write_records,
    ConfigOverrides, ExperimentConfig, SetupField,
};
use rachload::model::{AccessPattern, LoadHypothesis, ObservationSet, SelectionProfile};
use rachload::oracle::exhaustive_pattern_distribution;
use rachload::probability::PatternEngine;
use rachload::simulator::{sample_observations, SimulationSeed};

/// Exit code when `oracle-check` finds a disagreement.
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "rachload", version, about = "Two-priority RACH load estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample access patterns, one slot per line.
    Simulate(SimulateArgs),
    /// Estimate the load behind observed patterns.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment and write per-trial records as CSV.
    Experiment(ExperimentArgs),
    /// Compare the probability engine against brute-force enumeration.
    OracleCheck(OracleArgs),
}

/// Flags shared by every subcommand that needs a configuration.
#[derive(Args, Debug, Default)]
struct ConfigFlags {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset: 1, 2, 3 or custom.
    #[arg(long)]
    setup: Option<String>,
    /// Number of RBs.
    #[arg(long)]
    m: Option<usize>,
    /// High-priority selection probabilities, comma-separated (a/b allowed).
    #[arg(long, allow_hyphen_values = true)]
    p_high: Option<String>,
    /// Low-priority selection probabilities, comma-separated (a/b allowed).
    #[arg(long, allow_hyphen_values = true)]
    p_low: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid_max_high: Option<u32>,
    #[arg(long)]
    grid_max_low: Option<u32>,
}

impl ConfigFlags {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            setup: self.setup.clone().map(SetupField::Name),
            m: self.m,
            p_high: self.p_high.as_deref().map(parse_probabilities).transpose()?,
            p_low: self.p_low.as_deref().map(parse_probabilities).transpose()?,
            seed: self.seed,
            grid_max_high: self.grid_max_high,
            grid_max_low: self.grid_max_low,
            ..Default::default()
        };
        Ok(file.merged_with(flags))
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigFlags,
    /// Number of high-priority devices.
    #[arg(long)]
    n_high: u32,
    /// Number of low-priority devices.
    #[arg(long)]
    n_low: u32,
    /// Number of slots.
    #[arg(long, default_value_t = 1)]
    t: usize,
    /// Trial index; selects an independent stream under the same seed.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    config: ConfigFlags,
    /// Pattern file, one slot per line; `-` or absent reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "ml")]
    estimator: Estimator,
    /// Also write the log-likelihood surface as CSV.
    #[arg(long)]
    surface_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    config: ConfigFlags,
    /// Slot counts, comma-separated.
    #[arg(long)]
    t: Option<String>,
    /// High-priority counts, comma-separated.
    #[arg(long)]
    n_high: Option<String>,
    /// Inclusive low-priority range, e.g. 0..7.
    #[arg(long)]
    n_low_range: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    /// Estimators, comma-separated (ml, rcml).
    #[arg(long)]
    estimator: Option<String>,
    /// Record CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// MAE table CSV.
    #[arg(long)]
    mae_out: Option<PathBuf>,
    /// MAE-versus-n_low plot data CSV.
    #[arg(long)]
    plot_out: Option<PathBuf>,
    /// Worker threads (all cores when absent).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// RB counts to check, comma-separated. Ignored with an explicit profile.
    #[arg(long, default_value = "2,3,4")]
    m: String,
    /// Largest device count per class.
    #[arg(long, default_value_t = 3)]
    max_load: u32,
    #[arg(long, allow_hyphen_values = true, requires = "p_low")]
    p_high: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "p_high")]
    p_low: Option<String>,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_error(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_error(source: io::Error) -> Error {
    io_error(Path::new("<stdout>"), source)
}

fn simulate(a: SimulateArgs) -> Result<u8> {
    let config = ExperimentConfig::resolve(&a.config.overrides()?)?;
    let hyp = LoadHypothesis::new(a.n_high, a.n_low);
    let obs = sample_observations(hyp, &config.profile, a.t, SimulationSeed::new(config.seed), a.trial)?;
    let target = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let write = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(
            out,
            "# load {hyp}, m = {}, seed {}, trial {}",
            config.m, config.seed, a.trial
        )?;
        writeln!(out, "# one slot per line; character i is RB i (zero-based)")?;
        for p in obs.patterns() {
            writeln!(out, "{p}")?;
        }
        out.flush()
    };
    let mut out = open_output(a.out.as_deref())?;
    write(&mut out).map_err(|e| io_error(&target, e))?;
    Ok(0)
}

fn read_input(path: Option<&Path>) -> Result<String> {
    let mut text = String::new();
    match path {
        Some(p) if p != Path::new("-") => return fs::read_to_string(p).map_err(|e| io_error(p, e)),
        _ => io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| io_error(Path::new("<stdin>"), e))?,
    };
    Ok(text)
}

fn estimate_cmd(a: EstimateArgs) -> Result<u8> {
    let mut overrides = a.config.overrides()?;
    let obs = ObservationSet::parse_lines(&read_input(a.input.as_deref())?)?;
    // The observations fix m; a uniform profile follows it unless one is given.
    if overrides.m.is_none() && overrides.p_high.is_none() && overrides.p_low.is_none() {
        overrides.m = Some(obs.m());
    }
    let config = ExperimentConfig::resolve(&overrides)?;
    if let Some(path) = &a.surface_out {
        let surface = likelihood_surface(&obs, &config.profile, config.grid, a.estimator.mode())?;
        let mut out = open_output(Some(path))?;
        surface
            .write_csv(&mut out)
            .and_then(|()| out.flush())
            .map_err(|e| io_error(path, e))?;
    }
    let est = estimate(&obs, &config.profile, config.grid, a.estimator)?;
    println!("{} n_high={} n_low={}", a.estimator, est.n_high, est.n_low);
    Ok(0)
}

fn experiment(a: ExperimentArgs) -> Result<u8> {
    let flags = ConfigOverrides {
        t: a.t.as_deref().map(parse_list).transpose()?,
        n_high: a.n_high.as_deref().map(parse_list).transpose()?,
        n_low_range: a.n_low_range.as_deref().map(parse_range).transpose()?,
        trials: a.trials,
        estimators: a.estimator.as_deref().map(parse_list).transpose()?,
        out: a.out.clone(),
        ..Default::default()
    };
    let config = ExperimentConfig::resolve(&a.config.overrides()?.merged_with(flags))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    info!("running {:?} on {} threads", config.setup, pool.current_num_threads());
    let outcome = pool.install(|| run_setup(&config))?;

    match &config.output {
        Some(path) => rachload::harness::emit_csv(&outcome.records, path)?,
        None => write_records(&outcome.records, io::stdout().lock()).map_err(|e| Error::Csv {
            path: PathBuf::from("<stdout>"),
            source: e,
        })?,
    }
    if let Some(path) = &a.mae_out {
        emit_mae_csv(&outcome.summary, path)?;
    }
    if let Some(path) = &a.plot_out {
        emit_plot_csv(&outcome.summary, path)?;
    }
    Ok(0)
}

fn oracle_check(a: OracleArgs) -> Result<u8> {
    let profiles = match (&a.p_high, &a.p_low) {
        (Some(h), Some(l)) => {
            let values = |s: &str| -> Result<Vec<f64>> { Ok(parse_probabilities(s)?.iter().map(|p| p.0).collect()) };
            vec![SelectionProfile::new(values(h)?, values(l)?)?]
        }
        _ => parse_list::<usize>(&a.m)?
            .into_iter()
            .map(SelectionProfile::uniform)
            .collect::<Result<Vec<_>>>()?,
    };
    let engine = PatternEngine::new();
    let mut out = io::stdout().lock();
    let mut failures = 0usize;
    for profile in &profiles {
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for n_high in 0..=a.max_load {
            for n_low in 0..=a.max_load {
                let hyp = LoadHypothesis::new(n_high, n_low);
                let dist = exhaustive_pattern_distribution(hyp, profile)?;
                for pattern in AccessPattern::enumerate_all(profile.m()) {
                    let exact = dist.get(&pattern);
                    let engine_p = engine.pattern_probability(&pattern, hyp, profile)?.prob();
                    let rel = (engine_p - exact).abs() / exact.max(1e-300);
                    checked += 1;
                    if rel > a.tolerance {
                        failures += 1;
                        writeln!(
                            out,
                            "MISMATCH m={} {hyp} {pattern}: engine {engine_p:e} oracle {exact:e}",
                            profile.m()
                        )
                        .map_err(stdout_error)?;
                    }
                    worst = worst.max(rel);
                }
            }
        }
        writeln!(out, "m={} cases={checked} max_rel_err={worst:e}", profile.m()).map_err(stdout_error)?;
    }
    writeln!(out, "{}", if failures == 0 { "OK" } else { "FAILED" }).map_err(stdout_error)?;
    Ok(if failures == 0 { 0 } else { EXIT_MISMATCH })
}
