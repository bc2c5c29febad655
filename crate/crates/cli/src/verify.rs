//! Re-derive every statistic in a trajectory CSV from its move columns.
//!
//! Only files written with `snapshot_stride = 1` carry every move, so
//! anything else is rejected up front.

use std::io::Read;
use std::path::Path;

use chsh_core::stats::{self, ContingencyCounts, OutcomeTally};
use chsh_core::{ChshTable, HiddenVariable, Outcome, OutcomePair, SettingPair};

use crate::error::{CliError, Result};
use crate::output::CSV_HEADER;

/// Relative tolerance; the denominator is floored at 1.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rounds: u64,
    pub protocol: &'static str,
    pub checked: Vec<&'static str>,
}

struct Row {
    n: u64,
    cells: Vec<String>,
}

impl Row {
    fn get(&self, col: &str) -> &str {
        let i = CSV_HEADER
            .iter()
            .position(|c| *c == col)
            .expect("known column");
        &self.cells[i]
    }

    fn float(&self, col: &str) -> Result<Option<f64>> {
        let v = self.get(col);
        if v.is_empty() {
            return Ok(None);
        }
        v.parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("round {}: bad {col} value {v:?}", self.n)))
    }

    fn require(&self, col: &str) -> Result<f64> {
        self.float(col)?
            .ok_or_else(|| CliError::Verify(format!("round {}: {col} is empty", self.n)))
    }

    fn int(&self, col: &str) -> Result<i64> {
        self.get(col).parse().map_err(|_| {
            CliError::Config(format!(
                "round {}: bad {col} value {:?}",
                self.n,
                self.get(col)
            ))
        })
    }

    fn moves(&self) -> Result<(SettingPair, HiddenVariable, OutcomePair)> {
        let bad = |e: chsh_core::GameError| CliError::Config(format!("round {}: {e}", self.n));
        let u = SettingPair::new(self.int("s")? as u8, self.int("t")? as u8).map_err(bad)?;
        let lambda: HiddenVariable = self.get("lambda").parse().map_err(bad)?;
        let a = Outcome::new(self.int("omega_A")? as i8).map_err(bad)?;
        let b = Outcome::new(self.int("omega_B")? as i8).map_err(bad)?;
        Ok((u, lambda, OutcomePair { a, b }))
    }
}

fn check(n: u64, col: &str, recorded: f64, expected: f64) -> Result<()> {
    let gap = (recorded - expected).abs() / expected.abs().max(1.0);
    if gap > TOLERANCE || recorded.is_nan() != expected.is_nan() {
        return Err(CliError::Verify(format!(
            "round {n}: {col} is {recorded} but recomputes to {expected}"
        )));
    }
    Ok(())
}

fn check_opt(n: u64, col: &str, recorded: Option<f64>, expected: Option<f64>) -> Result<()> {
    match (recorded, expected) {
        (Some(r), Some(e)) => check(n, col, r, e),
        (None, None) => Ok(()),
        (r, e) => Err(CliError::Verify(format!(
            "round {n}: {col} is {r:?} but recomputes to {e:?}"
        ))),
    }
}

/// Correlations and CHSH combination straight from the per-context counts.
fn correlations(tally: &OutcomeTally) -> ([Option<f64>; 4], Option<f64>) {
    let mut c = [None; 4];
    for u in SettingPair::ALL {
        let total = tally.total(u);
        if total > 0 {
            let same =
                (tally.count(u, OutcomePair::ALL[0]) + tally.count(u, OutcomePair::ALL[3])) as f64;
            c[u.index()] = Some((2.0 * same - total as f64) / total as f64);
        }
    }
    let s = match c {
        [Some(a), Some(b), Some(x), Some(y)] => Some(a - b + x + y),
        _ => None,
    };
    (c, s)
}

fn check_context(row: &Row, tally: &OutcomeTally, table: &ChshTable) -> Result<()> {
    let (c, s) = correlations(tally);
    for (name, value) in ["C13", "C14", "C23", "C24"].into_iter().zip(c) {
        check_opt(row.n, name, row.float(name)?, value)?;
    }
    check_opt(row.n, "S_n", row.float("S_n")?, s)?;
    check(
        row.n,
        "max_cell_freq_error",
        row.require("max_cell_freq_error")?,
        stats::max_cell_freq_error(tally, table),
    )
}

fn read_rows<R: Read>(input: R) -> Result<Vec<Row>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(CliError::Config(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let cells: Vec<String> = record?.iter().map(str::to_owned).collect();
        let n: u64 = cells[0]
            .parse()
            .map_err(|_| CliError::Config(format!("row {}: bad round {:?}", i + 1, cells[0])))?;
        if n != i as u64 + 1 {
            return Err(CliError::Config(format!(
                "row {} has n = {n}; verify needs a trajectory written with snapshot_stride = 1",
                i + 1
            )));
        }
        rows.push(Row { n, cells });
    }
    if rows.is_empty() {
        return Err(CliError::Config("trajectory has no rows".into()));
    }
    Ok(rows)
}

fn verify_closed(rows: &[Row]) -> Result<Vec<&'static str>> {
    let table = ChshTable::default();
    let mut counts = ContingencyCounts::new();
    let mut log_w = 0.0;
    for row in rows {
        let (u, lambda, observed) = row.moves()?;
        if lambda.reveal(u) != observed {
            return Err(CliError::Verify(format!(
                "round {}: outcomes {},{} do not match λ = {lambda} at {u}",
                row.n, observed.a, observed.b
            )));
        }
        counts.increment(lambda, u);
        log_w += counts.log_w_factor(lambda, u);
        let closed = stats::w_closed_form(&counts);
        check(row.n, "logW_AB", row.require("logW_AB")?, closed)?;
        check(row.n, "logW_AB (recursion)", log_w, closed)?;
        let kl = stats::kl_independence(
            &counts
                .empirical()
                .map_err(|e| CliError::Verify(e.to_string()))?,
        );
        check(
            row.n,
            "kl_independence",
            row.require("kl_independence")?,
            kl,
        )?;
        check_context(row, counts.pairs().context(), &table)?;
    }
    Ok(vec![
        "outcomes reveal λ",
        "logW_AB closed form",
        "logW_AB recursion",
        "kl_independence",
        "correlations",
        "S_n",
        "max_cell_freq_error",
    ])
}

fn verify_locality(rows: &[Row]) -> Result<Vec<&'static str>> {
    let table = ChshTable::default();
    let mut tally = OutcomeTally::default();
    for row in rows {
        let (u, lambda, observed) = row.moves()?;
        if lambda.reveal(u) != observed {
            return Err(CliError::Verify(format!(
                "round {}: λ = {lambda} is not consistent with ω_A = {}, ω_B = {} at {u}",
                row.n, observed.a, observed.b
            )));
        }
        tally.record(u, observed);
        check_context(row, &tally, &table)?;
    }
    Ok(vec![
        "λ consistent with outcomes",
        "correlations",
        "S_n",
        "max_cell_freq_error",
    ])
}

pub fn verify_reader<R: Read>(input: R) -> Result<VerifyReport> {
    let rows = read_rows(input)?;
    let first = &rows[0];
    let (protocol, checked) = if !first.get("logK_AB").is_empty() {
        ("closed", verify_closed(&rows)?)
    } else if !first.get("logK_B").is_empty() {
        ("locality", verify_locality(&rows)?)
    } else {
        // The predictive CSV carries no odds, so only the round sequence is checkable.
        ("predictive", vec!["round sequence"])
    };
    Ok(VerifyReport {
        rounds: rows.len() as u64,
        protocol,
        checked,
    })
}

pub fn verify_file(path: &Path) -> Result<VerifyReport> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    verify_reader(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::write_csv;
    use chsh_core::runner::{self, GameSpec, NatureSpec, Protocol, ScientistSpec};
    use chsh_core::{BalancingRule, FillRule, RunOptions, SettingPolicy};

    fn csv_of(spec: &GameSpec, rounds: u64) -> String {
        let run = runner::run_game(spec, &RunOptions::new(rounds).stride(1), 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &run.snapshots).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn closed() -> GameSpec {
        GameSpec {
            protocol: Protocol::Closed,
            scientist: ScientistSpec::Forcing {
                setting_policy: SettingPolicy::Uniform,
            },
            nature: NatureSpec::Quantum {
                fill: FillRule::Uniform,
            },
            predictive: None,
        }
    }

    #[test]
    fn closed_run_verifies() {
        let report = verify_reader(csv_of(&closed(), 500).as_bytes()).unwrap();
        assert_eq!((report.protocol, report.rounds), ("closed", 500));
    }

    #[test]
    fn locality_run_verifies() {
        let spec = GameSpec {
            protocol: Protocol::Locality,
            scientist: ScientistSpec::Balanced {
                setting_policy: SettingPolicy::Uniform,
                balancing: BalancingRule::Count,
            },
            nature: NatureSpec::LocalityExploit,
            predictive: None,
        };
        let report = verify_reader(csv_of(&spec, 300).as_bytes()).unwrap();
        assert_eq!(report.protocol, "locality");
    }

    #[test]
    fn tampered_w_is_caught() {
        let text = csv_of(&closed(), 50);
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
        let mut cells: Vec<String> = lines[20].split(',').map(str::to_owned).collect();
        let w: f64 = cells[9].parse().unwrap();
        cells[9] = (w + 1e-3).to_string();
        lines[20] = cells.join(",");
        let err = verify_reader(lines.join("\n").as_bytes()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("round 20"), "{err}");
    }

    #[test]
    fn strided_file_is_rejected() {
        let run = runner::run_game(&closed(), &RunOptions::new(100).stride(10), 4).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &run.snapshots).unwrap();
        assert_eq!(verify_reader(buf.as_slice()).unwrap_err().exit_code(), 2);
    }
}
