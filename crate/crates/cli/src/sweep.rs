//! Parameter sweeps over a base run configuration.
//!
//! The grid file maps config paths to arrays of values:
//!
//! ```toml
//! "nature.kind" = ["quantum", "independent"]
//! rounds = [1000, 10000, 100000]
//! ```
//!
//! Every point of the cartesian product is run once per seed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chsh_core::runner;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::GrowthRates;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<(String, Vec<toml::Value>)>,
}

fn flatten(
    prefix: &str,
    table: &toml::Table,
    axes: &mut Vec<(String, Vec<toml::Value>)>,
) -> Result<()> {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            toml::Value::Array(values) if values.is_empty() => {
                return Err(CliError::Config(format!("grid axis {path} has no values")))
            }
            toml::Value::Array(values) => axes.push((path, values.clone())),
            toml::Value::Table(inner) => flatten(&path, inner, axes)?,
            other => {
                return Err(CliError::Config(format!(
                    "grid axis {path} must be an array, got {other}"
                )))
            }
        }
    }
    Ok(())
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut axes = Vec::new();
        for (key, value) in &table {
            // Quoted keys such as "nature.kind" arrive unsplit.
            let mut nested = toml::Table::new();
            insert(&mut nested, key, value.clone());
            flatten("", &nested, &mut axes)?;
        }
        if axes.is_empty() {
            return Err(CliError::Config("grid is empty".into()));
        }
        Ok(Grid { axes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// All points of the product, first axis varying slowest.
    pub fn points(&self) -> Vec<Vec<(String, toml::Value)>> {
        let mut points = vec![Vec::new()];
        for (path, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((path.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

fn insert(table: &mut toml::Table, path: &str, value: toml::Value) {
    match path.split_once('.') {
        None => {
            table.insert(path.to_owned(), value);
        }
        Some((head, rest)) => {
            let entry = table
                .entry(head.to_owned())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            if !entry.is_table() {
                *entry = toml::Value::Table(toml::Table::new());
            }
            insert(
                entry.as_table_mut().expect("just made a table"),
                rest,
                value,
            );
        }
    }
}

/// Overlay one grid point on the base configuration.
pub fn apply(base: &RunConfig, point: &[(String, toml::Value)], seed: u64) -> Result<RunConfig> {
    let mut table = toml::Table::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    for (path, value) in point {
        insert(&mut table, path, value.clone());
    }
    table.insert("seed".into(), toml::Value::Integer(seed as i64));
    let config: RunConfig = table.try_into().map_err(|e: toml::de::Error| {
        CliError::Config(format!("grid point {}: {e}", label(point)))
    })?;
    config.validate()?;
    Ok(config)
}

pub fn label(point: &[(String, toml::Value)]) -> String {
    point
        .iter()
        .map(|(k, v)| format!("{k}={}", value_text(v)))
        .collect::<Vec<_>>()
        .join(";")
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One `(point, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: String,
    pub seed: u64,
    pub rounds: Option<u64>,
    #[serde(rename = "logK_A")]
    pub log_k_a: Option<f64>,
    #[serde(rename = "logK_B")]
    pub log_k_b: Option<f64>,
    #[serde(rename = "logK_AB")]
    pub log_k_ab: Option<f64>,
    #[serde(rename = "logW_AB")]
    pub log_w_ab: Option<f64>,
    pub kl_independence: Option<f64>,
    #[serde(rename = "S_n")]
    pub chsh: Option<f64>,
    pub max_cell_freq_error: Option<f64>,
    #[serde(rename = "rate_logK_AB")]
    pub rate_log_k_ab: Option<f64>,
    /// `ln W^AB_n / n` at the final round.
    #[serde(rename = "logW_AB_per_round")]
    pub log_w_per_round: Option<f64>,
    pub oracle_kl_independence: Option<f64>,
    pub oracle_k_rate: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(point: String, seed: u64, error: &CliError) -> Self {
        SweepRow {
            point,
            seed,
            rounds: None,
            log_k_a: None,
            log_k_b: None,
            log_k_ab: None,
            log_w_ab: None,
            kl_independence: None,
            chsh: None,
            max_cell_freq_error: None,
            rate_log_k_ab: None,
            log_w_per_round: None,
            oracle_kl_independence: None,
            oracle_k_rate: None,
            error: Some(match error.round() {
                Some(n) => format!("{error} (round {n})"),
                None => error.to_string(),
            }),
        }
    }

    /// Metric columns that get aggregated across seeds.
    pub const METRICS: [&'static str; 9] = [
        "logK_A",
        "logK_B",
        "logK_AB",
        "logW_AB",
        "kl_independence",
        "S_n",
        "max_cell_freq_error",
        "rate_logK_AB",
        "logW_AB_per_round",
    ];

    fn metrics(&self) -> [Option<f64>; 9] {
        [
            self.log_k_a,
            self.log_k_b,
            self.log_k_ab,
            self.log_w_ab,
            self.kl_independence,
            self.chsh,
            self.max_cell_freq_error,
            self.rate_log_k_ab,
            self.log_w_per_round,
        ]
    }
}

fn run_cell(base: &RunConfig, point: &[(String, toml::Value)], seed: u64) -> SweepRow {
    let name = label(point);
    let result = apply(base, point, seed).and_then(|config| {
        let trajectory = runner::run_game(&config.game(), &config.options(), seed)?;
        let oracle = runner::expected_rates(&config.game()).ok().flatten();
        Ok((config, trajectory, oracle))
    });
    match result {
        Ok((config, trajectory, oracle)) => {
            let last = &trajectory.summary.last;
            SweepRow {
                point: name,
                seed,
                rounds: Some(config.rounds),
                log_k_a: last.log_k_a,
                log_k_b: last.log_k_b,
                log_k_ab: last.log_k_ab,
                log_w_ab: last.log_w_ab,
                kl_independence: last.kl_independence,
                chsh: last.chsh,
                max_cell_freq_error: last.max_cell_freq_error,
                rate_log_k_ab: GrowthRates::of(&trajectory.snapshots).log_k_ab,
                log_w_per_round: last.log_w_ab.map(|w| w / config.rounds as f64),
                oracle_kl_independence: oracle.map(|r| r.kl_independence),
                oracle_k_rate: oracle.map(|r| r.k_rate),
                error: None,
            }
        }
        Err(e) => SweepRow::failed(name, seed, &e),
    }
}

/// Run every `(point, seed)` cell in parallel. Rows come back in grid
/// order, seeds innermost, whatever the thread schedule.
pub fn run_sweep(base: &RunConfig, grid: &Grid, seeds: &[u64]) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(CliError::Config("no seeds given".into()));
    }
    let cells: Vec<(Vec<(String, toml::Value)>, u64)> = grid
        .points()
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p.clone(), s)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|(p, s)| run_cell(base, p, *s))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub point: String,
    pub metric: &'static str,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, min and max of each metric across the seeds of a point.
pub fn aggregate(rows: &[SweepRow]) -> Vec<Aggregate> {
    let mut by_point: BTreeMap<usize, (String, Vec<&SweepRow>)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for row in rows {
        let i = order
            .iter()
            .position(|p| *p == row.point)
            .unwrap_or_else(|| {
                order.push(row.point.clone());
                order.len() - 1
            });
        by_point
            .entry(i)
            .or_insert_with(|| (row.point.clone(), Vec::new()))
            .1
            .push(row);
    }
    let mut out = Vec::new();
    for (point, group) in by_point.into_values() {
        for (k, metric) in SweepRow::METRICS.iter().enumerate() {
            let values: Vec<f64> = group.iter().filter_map(|r| r.metrics()[k]).collect();
            if values.is_empty() {
                continue;
            }
            out.push(Aggregate {
                point: point.clone(),
                metric,
                count: values.len(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepJson<'a> {
    pub schema_version: u32,
    pub seeds: &'a [u64],
    pub rows: &'a [SweepRow],
    pub aggregates: &'a [Aggregate],
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
