//! Empirical quantities of the loopholes-closed game: the contingency
//! table `T_n(τ; u)` over `Ω^4 × Θ`, its empirical distributions, pair
//! counts, correlations and the multinomial closed form of `W_n`.

use crate::domain::{chsh_combination, ChshTable, HiddenVariable, OutcomePair, SettingPair};
use crate::error::{GameError, Result};
use crate::num::{self, CompensatedSum};

const TAUS: usize = HiddenVariable::COUNT;
const SETTINGS: usize = 4;

/// Outcome-pair counts split by setting pair: `counts[u][pair]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeTally {
    counts: [[u64; 4]; SETTINGS],
    totals: [u64; SETTINGS],
}

impl OutcomeTally {
    pub fn record(&mut self, u: SettingPair, pair: OutcomePair) {
        self.counts[u.index()][pair.index()] += 1;
        self.totals[u.index()] += 1;
    }

    pub fn count(&self, u: SettingPair, pair: OutcomePair) -> u64 {
        self.counts[u.index()][pair.index()]
    }

    pub fn row(&self, u: SettingPair) -> [u64; 4] {
        self.counts[u.index()]
    }

    pub fn total(&self, u: SettingPair) -> u64 {
        self.totals[u.index()]
    }

    pub fn rounds(&self) -> u64 {
        self.totals.iter().sum()
    }
}

/// Frequency of `(a, b)` among rounds played under `u`:
/// `Σ_i δ_{(a,b,u)} / Σ_i δ_u`.
pub fn conditional_frequency(
    tally: &OutcomeTally,
    pair: OutcomePair,
    u: SettingPair,
) -> Result<f64> {
    match tally.total(u) {
        0 => Err(GameError::EmptyContext(u.to_string())),
        total => Ok(tally.count(u, pair) as f64 / total as f64),
    }
}

/// `max |conditional frequency − p(a,b|u)|` over non-empty contexts.
pub fn max_cell_freq_error(tally: &OutcomeTally, table: &ChshTable) -> f64 {
    let mut worst = 0.0f64;
    for u in SettingPair::ALL {
        for pair in OutcomePair::ALL {
            if let Ok(f) = conditional_frequency(tally, pair, u) {
                worst = worst.max((f - table.odds(pair.a, pair.b, u)).abs());
            }
        }
    }
    worst
}

/// Pair counts `S_n(ω^s, ω^t)` over all rounds and `S_n(ω^s, ω^t; s, t)`
/// over rounds played under `(s, t)`, for every setting pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCounts {
    population: [[u64; 4]; SETTINGS],
    context: OutcomeTally,
    n: u64,
}

impl PairCounts {
    pub fn record(&mut self, tau: HiddenVariable, u: SettingPair) {
        for v in SettingPair::ALL {
            self.population[v.index()][tau.reveal(v).index()] += 1;
        }
        self.context.record(u, tau.reveal(u));
        self.n += 1;
    }

    /// `S_n(ω^s, ω^t)` for the coordinates of `u`.
    pub fn population(&self, u: SettingPair, pair: OutcomePair) -> u64 {
        self.population[u.index()][pair.index()]
    }

    /// `S_n(ω^s, ω^t; s, t)`.
    pub fn in_context(&self, u: SettingPair, pair: OutcomePair) -> u64 {
        self.context.count(u, pair)
    }

    pub fn context(&self) -> &OutcomeTally {
        &self.context
    }

    pub fn rounds(&self) -> u64 {
        self.n
    }
}

/// `C_n(s,t)` from rounds under `(s,t)` when `use_context`, otherwise the
/// λ-population analogue `Σ ω^s ω^t S_n(ω^s, ω^t) / n`.
pub fn empirical_correlation(pairs: &PairCounts, u: SettingPair, use_context: bool) -> Result<f64> {
    let (row, denom) = if use_context {
        (pairs.context.row(u), pairs.context.total(u))
    } else {
        (pairs.population[u.index()], pairs.n)
    };
    if denom == 0 {
        return Err(GameError::EmptyContext(u.to_string()));
    }
    let weighted: f64 = OutcomePair::ALL
        .iter()
        .map(|p| p.product() * row[p.index()] as f64)
        .sum();
    Ok(weighted / denom as f64)
}

/// `C13 − C14 + C23 + C24`.
pub fn chsh_statistic(c13: f64, c14: f64, c23: f64, c24: f64) -> f64 {
    chsh_combination([c13, c14, c23, c24])
}

/// Contingency counts `T_n(τ; u)` with incrementally maintained
/// marginals `T_n(τ)`, `T_n(u)` and pair counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyCounts {
    table: [[u64; SETTINGS]; TAUS],
    tau: [u64; TAUS],
    setting: [u64; SETTINGS],
    pairs: PairCounts,
    n: u64,
}

impl Default for ContingencyCounts {
    fn default() -> Self {
        ContingencyCounts {
            table: [[0; SETTINGS]; TAUS],
            tau: [0; TAUS],
            setting: [0; SETTINGS],
            pairs: PairCounts::default(),
            n: 0,
        }
    }
}

impl ContingencyCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn increment(&mut self, tau: HiddenVariable, u: SettingPair) {
        let (i, j) = (tau.index(), u.index());
        self.table[i][j] += 1;
        self.tau[i] += 1;
        self.setting[j] += 1;
        self.pairs.record(tau, u);
        self.n += 1;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `T_n(τ; u)`.
    pub fn cell(&self, tau: HiddenVariable, u: SettingPair) -> u64 {
        self.table[tau.index()][u.index()]
    }

    /// `T_n(τ)`.
    pub fn tau_count(&self, tau: HiddenVariable) -> u64 {
        self.tau[tau.index()]
    }

    /// `T_n(u)`.
    pub fn setting_count(&self, u: SettingPair) -> u64 {
        self.setting[u.index()]
    }

    pub fn table(&self) -> &[[u64; SETTINGS]; TAUS] {
        &self.table
    }

    pub fn pairs(&self) -> &PairCounts {
        &self.pairs
    }

    /// Recompute both marginals from the table and compare with the
    /// incrementally maintained ones.
    pub fn marginals_consistent(&self) -> bool {
        let tau_ok = (0..TAUS).all(|i| self.table[i].iter().sum::<u64>() == self.tau[i]);
        let set_ok =
            (0..SETTINGS).all(|j| self.table.iter().map(|r| r[j]).sum::<u64>() == self.setting[j]);
        tau_ok && set_ok && self.tau.iter().sum::<u64>() == self.n
    }

    /// `ln(P̂_n / (Q̂_n · R̂_n))` at a cell, i.e. `ln(T(τ;u)·n / (T(τ)·T(u)))`.
    /// Products stay below `2^53` for `n < 9·10^7`, so the ratio is exact
    /// up to one rounding.
    pub fn log_w_factor(&self, tau: HiddenVariable, u: SettingPair) -> f64 {
        let cell = self.cell(tau, u) as f64;
        let num = cell * self.n as f64;
        let den = self.tau_count(tau) as f64 * self.setting_count(u) as f64;
        num::ln(num / den)
    }

    pub fn empirical(&self) -> Result<EmpiricalDistributions> {
        EmpiricalDistributions::from_counts(self)
    }

    /// `max_{τ,u} |P̂(τ;u) − Q̂(τ)·R̂(u)|`.
    pub fn max_cell_gap(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        let mut worst = 0.0f64;
        for i in 0..TAUS {
            for j in 0..SETTINGS {
                let p = self.table[i][j] as f64 / n;
                let qr = (self.tau[i] as f64 / n) * (self.setting[j] as f64 / n);
                worst = worst.max((p - qr).abs());
            }
        }
        worst
    }

    /// Context correlations `[C_n(1,3), C_n(1,4), C_n(2,3), C_n(2,4)]`.
    pub fn correlations(&self) -> Result<[f64; 4]> {
        let mut c = [0.0; 4];
        for u in SettingPair::ALL {
            c[u.index()] = empirical_correlation(&self.pairs, u, true)?;
        }
        Ok(c)
    }
}

/// `P̂_n`, `Q̂_n`, `R̂_n` as plain arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistributions {
    pub p_hat: [[f64; SETTINGS]; TAUS],
    pub q_hat: [f64; TAUS],
    pub r_hat: [f64; SETTINGS],
}

impl EmpiricalDistributions {
    pub fn from_counts(counts: &ContingencyCounts) -> Result<Self> {
        if counts.n == 0 {
            return Err(GameError::Unsupported(
                "empirical distributions need at least one round".into(),
            ));
        }
        let n = counts.n as f64;
        let mut p_hat = [[0.0; SETTINGS]; TAUS];
        for (row, counts_row) in p_hat.iter_mut().zip(counts.table.iter()) {
            for (p, &c) in row.iter_mut().zip(counts_row.iter()) {
                *p = c as f64 / n;
            }
        }
        Ok(EmpiricalDistributions {
            p_hat,
            q_hat: counts.tau.map(|c| c as f64 / n),
            r_hat: counts.setting.map(|c| c as f64 / n),
        })
    }
}

/// `D(P̂ ‖ Q̂·R̂)` in nats, with `0·ln 0 = 0`.
pub fn kl_independence(emp: &EmpiricalDistributions) -> f64 {
    let mut acc = CompensatedSum::default();
    for (i, row) in emp.p_hat.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc.add(p * num::ln(p / (emp.q_hat[i] * emp.r_hat[j])));
            }
        }
    }
    // Rounding can leave a factorised table a hair below zero.
    acc.value().max(0.0)
}

/// `ln W_n = ln n! + Σ ln T(τ;u)! − Σ ln T(τ)! − Σ ln T(u)!`.
pub fn w_closed_form(counts: &ContingencyCounts) -> f64 {
    let mut acc = CompensatedSum::default();
    acc.add(num::ln_factorial(counts.n));
    for row in &counts.table {
        for &c in row {
            acc.add(num::ln_factorial(c));
        }
    }
    for &c in &counts.tau {
        acc.add(-num::ln_factorial(c));
    }
    for &c in &counts.setting {
        acc.add(-num::ln_factorial(c));
    }
    acc.value()
}

/// `|ln W_n / n − D(P̂ ‖ Q̂·R̂)|`.
pub fn stirling_gap(counts: &ContingencyCounts) -> Result<f64> {
    if counts.n < 2 {
        return Err(GameError::Unsupported(
            "the Stirling gap needs at least two rounds".into(),
        ));
    }
    let d = kl_independence(&counts.empirical()?);
    Ok((w_closed_form(counts) / counts.n as f64 - d).abs())
}
