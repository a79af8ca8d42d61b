use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SetupId;
use crate::error::{Error, Result};
use crate::estimators::Estimator;

/// Column order of the record CSV.
pub const RECORD_FIELDS: [&str; 14] = [
    "setup_id",
    "estimator",
    "m",
    "t",
    "trial",
    "n_high_true",
    "n_low_true",
    "n_high_est",
    "n_low_est",
    "abs_err_high",
    "abs_err_low",
    "abs_err_total",
    "overloading_factor",
    "runtime_us",
];

/// One estimate in one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub setup_id: SetupId,
    pub estimator: Estimator,
    pub m: usize,
    pub t: usize,
    pub trial: u32,
    pub n_high_true: u32,
    pub n_low_true: u32,
    pub n_high_est: u32,
    pub n_low_est: u32,
    pub abs_err_high: u32,
    pub abs_err_low: u32,
    pub abs_err_total: u32,
    pub overloading_factor: f64,
    pub runtime_us: u64,
}

impl ExperimentRecord {
    /// Sort key: group keys, then trial.
    pub fn order_key(&self) -> (Estimator, u32, u32, usize, u32) {
        (self.estimator, self.n_high_true, self.n_low_true, self.t, self.trial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Estimator,
    NHigh,
    NLow,
    T,
}

/// The grouping used for the MAE curves.
pub const DEFAULT_GROUP_KEYS: [GroupKey; 4] = [GroupKey::Estimator, GroupKey::NHigh, GroupKey::NLow, GroupKey::T];

/// Mean absolute errors of one group. Keys not grouped on are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaeRow {
    pub estimator: Option<Estimator>,
    pub n_high: Option<u32>,
    pub n_low: Option<u32>,
    pub t: Option<usize>,
    pub trials: usize,
    pub mae_total: f64,
    pub mae_high: f64,
    pub mae_low: f64,
}

pub fn compute_mae(records: &[ExperimentRecord], keys: &[GroupKey]) -> Result<Vec<MaeRow>> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    type Key = (Option<Estimator>, Option<u32>, Option<u32>, Option<usize>);
    let mut groups: BTreeMap<Key, (usize, u64, u64, u64)> = BTreeMap::new();
    for r in records {
        let key = (
            keys.contains(&GroupKey::Estimator).then_some(r.estimator),
            keys.contains(&GroupKey::NHigh).then_some(r.n_high_true),
            keys.contains(&GroupKey::NLow).then_some(r.n_low_true),
            keys.contains(&GroupKey::T).then_some(r.t),
        );
        let g = groups.entry(key).or_default();
        g.0 += 1;
        g.1 += u64::from(r.abs_err_total);
        g.2 += u64::from(r.abs_err_high);
        g.3 += u64::from(r.abs_err_low);
    }
    Ok(groups
        .into_iter()
        .map(|((estimator, n_high, n_low, t), (n, total, high, low))| MaeRow {
            estimator,
            n_high,
            n_low,
            t,
            trials: n,
            mae_total: total as f64 / n as f64,
            mae_high: high as f64 / n as f64,
            mae_low: low as f64 / n as f64,
        })
        .collect())
}

/// Writes the header even when `records` is empty.
pub fn write_records<W: Write>(records: &[ExperimentRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RECORD_FIELDS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> csv::Result<Vec<ExperimentRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, BufWriter::new(file)).map_err(|source| csv_error(path, source))
}

pub fn load_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file).map_err(|source| csv_error(path, source))
}

pub fn write_mae<W: Write>(rows: &[MaeRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_mae_csv(rows: &[MaeRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_mae(rows, BufWriter::new(file)).map_err(|source| csv_error(path, source))
}

/// One point of an MAE-versus-`n_low` curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: u32,
    pub y: f64,
    pub series: String,
}

/// MAE curves over `n_low`, one series per estimator, `T` and `n_high`.
/// Rows must come from [`DEFAULT_GROUP_KEYS`] grouping.
pub fn plot_points(rows: &[MaeRow]) -> Vec<PlotPoint> {
    let mut points: Vec<_> = rows
        .iter()
        .filter_map(|r| {
            Some(PlotPoint {
                x: r.n_low?,
                y: r.mae_total,
                series: format!("{}/T={}/n_high={}", r.estimator?, r.t?, r.n_high?),
            })
        })
        .collect();
    points.sort_by(|a, b| a.series.cmp(&b.series).then(a.x.cmp(&b.x)));
    points
}

pub fn write_plot_data<W: Write>(rows: &[MaeRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["x", "y", "series"])?;
    for p in plot_points(rows) {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_plot_csv(rows: &[MaeRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_plot_data(rows, BufWriter::new(file)).map_err(|source| csv_error(path, source))
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}
