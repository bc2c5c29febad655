//! Trajectory CSV and run summary JSON.

use std::io::Write;

use chsh_core::runner::{self, Trajectory};
use chsh_core::{LimitingRates, Snapshot};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

/// Bumped whenever the CSV header or the summary layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 17] = [
    "n",
    "s",
    "t",
    "lambda",
    "omega_A",
    "omega_B",
    "logK_A",
    "logK_B",
    "logK_AB",
    "logW_AB",
    "kl_independence",
    "C13",
    "C14",
    "C23",
    "C24",
    "S_n",
    "max_cell_freq_error",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_record(s: &Snapshot) -> [String; 17] {
    [
        s.n.to_string(),
        cell(s.s),
        cell(s.t),
        cell(s.lambda),
        cell(s.omega_a),
        cell(s.omega_b),
        cell(s.log_k_a),
        cell(s.log_k_b),
        cell(s.log_k_ab),
        cell(s.log_w_ab),
        cell(s.kl_independence),
        cell(s.correlations[0]),
        cell(s.correlations[1]),
        cell(s.correlations[2]),
        cell(s.correlations[3]),
        cell(s.chsh),
        cell(s.max_cell_freq_error),
    ]
}

pub fn write_csv<W: Write>(out: W, snapshots: &[Snapshot]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in snapshots {
        w.write_record(csv_record(s))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Ordinary least-squares slope of `y` against `n`.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Slope of a log-capital column over the final half of the snapshots.
pub fn growth_rate(
    snapshots: &[Snapshot],
    column: impl Fn(&Snapshot) -> Option<f64>,
) -> Option<f64> {
    let tail = &snapshots[snapshots.len() / 2..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .filter_map(|s| column(s).map(|y| (s.n as f64, y)))
        .collect();
    ols_slope(&points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRates {
    #[serde(rename = "logK_A")]
    pub log_k_a: Option<f64>,
    #[serde(rename = "logK_B")]
    pub log_k_b: Option<f64>,
    #[serde(rename = "logK_AB")]
    pub log_k_ab: Option<f64>,
    #[serde(rename = "logW_AB")]
    pub log_w_ab: Option<f64>,
}

impl GrowthRates {
    pub fn of(snapshots: &[Snapshot]) -> Self {
        GrowthRates {
            log_k_a: growth_rate(snapshots, |s| s.log_k_a),
            log_k_b: growth_rate(snapshots, |s| s.log_k_b),
            log_k_ab: growth_rate(snapshots, |s| s.log_k_ab),
            log_w_ab: growth_rate(snapshots, |s| s.log_w_ab),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Maxima {
    #[serde(rename = "logK_A")]
    pub log_k_a: Option<f64>,
    #[serde(rename = "logK_B")]
    pub log_k_b: Option<f64>,
    #[serde(rename = "logK_AB")]
    pub log_k_ab: Option<f64>,
    #[serde(rename = "logW_AB")]
    pub log_w_ab: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleTargets {
    pub kl_independence: f64,
    pub k_rate: f64,
}

impl From<LimitingRates> for OracleTargets {
    fn from(r: LimitingRates) -> Self {
        OracleTargets {
            kl_independence: r.kl_independence,
            k_rate: r.k_rate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummaryJson {
    pub schema_version: u32,
    pub rounds: u64,
    pub seed: u64,
    #[serde(rename = "final")]
    pub last: Snapshot,
    pub maxima: Maxima,
    pub growth_rates: GrowthRates,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleTargets>,
    pub config: RunConfig,
}

impl RunSummaryJson {
    pub fn new(config: &RunConfig, trajectory: &Trajectory) -> Self {
        let s = &trajectory.summary;
        RunSummaryJson {
            schema_version: SCHEMA_VERSION,
            rounds: s.rounds,
            seed: config.seed,
            last: s.last.clone(),
            maxima: Maxima {
                log_k_a: s.max_log_k_a,
                log_k_b: s.max_log_k_b,
                log_k_ab: s.max_log_k_ab,
                log_w_ab: s.max_log_w_ab,
            },
            growth_rates: GrowthRates::of(&trajectory.snapshots),
            oracle: runner::expected_rates(&config.game())
                .ok()
                .flatten()
                .map(Into::into),
            config: config.clone(),
        }
    }
}
