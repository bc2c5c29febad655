//! The simple predictive game on a finite alphabet: Skeptic bets, Reality
//! moves, capital is multiplied by `q_n(ω_n) / p(ω_n)`.
//!
//! Skeptic's forcing strategy is the Krichevsky–Trofimov (add-half)
//! mixture. Its capital after `n` rounds has the closed form
//!
//! ```text
//! ln K_n = Σ_a [lnΓ(c_a + ½) − lnΓ(½)] + lnΓ(A/2) − lnΓ(n + A/2) − Σ_i ln p(ω_i)
//! ```
//!
//! so `ln K_n / n` tracks `D(p̂_n ‖ p)` up to a `((A−1)/2)·ln n` regret.

use std::f64::consts::LN_2;

use crate::error::{GameError, Result};
use crate::num;

/// A strictly positive distribution over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct BettingDistribution {
    weights: Vec<f64>,
}

impl BettingDistribution {
    const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(GameError::AlphabetTooSmall(weights.len()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
            return Err(GameError::InvalidDistribution(format!(
                "weight {w} outside the open interval (0, 1)"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(GameError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Ok(BettingDistribution { weights })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(GameError::AlphabetTooSmall(size));
        }
        Ok(BettingDistribution {
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, symbol: usize) -> f64 {
        self.weights[symbol]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_symbol(&self, symbol: usize) -> Result<()> {
        if symbol < self.len() {
            Ok(())
        } else {
            Err(GameError::InvalidSymbol {
                symbol,
                size: self.len(),
            })
        }
    }
}

/// Natural log of a capital process, optionally with the thrift rule.
///
/// With thrift enabled, each time the total capital first exceeds `2^k`
/// half of the capital still at risk is moved into `locked_log` and never
/// bet again. Total capital is `exp(log_value) + exp(locked_log)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCapital {
    log_value: f64,
    locked_log: f64,
    next_threshold: Option<u32>,
}

impl Default for LogCapital {
    fn default() -> Self {
        LogCapital::new()
    }
}

impl LogCapital {
    /// `K_0 = 1`, nothing locked, thrift off.
    pub fn new() -> Self {
        LogCapital {
            log_value: 0.0,
            locked_log: f64::NEG_INFINITY,
            next_threshold: None,
        }
    }

    pub fn with_thrift() -> Self {
        LogCapital {
            next_threshold: Some(1),
            ..LogCapital::new()
        }
    }

    /// Log of the capital still at risk.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    /// Log of the capital set aside; `-inf` when nothing is locked.
    pub fn locked_log(&self) -> f64 {
        self.locked_log
    }

    pub fn thrift_enabled(&self) -> bool {
        self.next_threshold.is_some()
    }

    /// Log of at-risk plus locked capital.
    pub fn total_log(&self) -> f64 {
        num::log_add_exp(self.log_value, self.locked_log)
    }

    /// Multiply the at-risk capital by `exp(log_factor)`.
    pub fn apply(&mut self, log_factor: f64) -> Result<()> {
        let next = self.log_value + log_factor;
        if !next.is_finite() {
            return Err(GameError::NonFinite);
        }
        self.log_value = next;
        if let Some(k) = self.next_threshold {
            let total = self.total_log();
            if total > f64::from(k) * LN_2 {
                self.log_value -= LN_2;
                self.locked_log = num::log_add_exp(self.locked_log, self.log_value);
                self.next_threshold = Some((total / LN_2).floor() as u32 + 1);
            }
        }
        Ok(())
    }
}

/// Symbol counts `c_a = Σ_i δ_a(ω_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyCounts {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyCounts {
    pub fn new(size: usize) -> Self {
        FrequencyCounts {
            counts: vec![0; size],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        FrequencyCounts { counts, total }
    }

    pub fn record(&mut self, symbol: usize) -> Result<()> {
        let size = self.counts.len();
        let slot = self
            .counts
            .get_mut(symbol)
            .ok_or(GameError::InvalidSymbol { symbol, size })?;
        *slot += 1;
        self.total += 1;
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn frequency(&self, symbol: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.counts[symbol] as f64 / self.total as f64
        }
    }

    /// `max_a |c_a / n − p(a)|`.
    pub fn max_deviation(&self, odds: &BettingDistribution) -> f64 {
        (0..self.counts.len())
            .map(|a| (self.frequency(a) - odds.weight(a)).abs())
            .fold(0.0, f64::max)
    }
}

/// One round of the predictive game: `K_n = K_{n−1} · bet(ω) / odds(ω)`.
pub fn capital_update(
    k: LogCapital,
    bet: &BettingDistribution,
    odds: &BettingDistribution,
    observed: usize,
) -> Result<LogCapital> {
    bet.check_symbol(observed)?;
    odds.check_symbol(observed)?;
    let mut next = k;
    next.apply(num::ln(bet.weight(observed)) - num::ln(odds.weight(observed)))?;
    Ok(next)
}

/// Add-half estimate `(c_a + ½) / (n + A/2)`.
pub fn kt_bet(counts: &FrequencyCounts) -> Result<BettingDistribution> {
    kt_weights(counts.counts()).map(|weights| BettingDistribution { weights })
}

/// [`kt_bet`] on a raw count slice.
pub fn kt_weights(counts: &[u64]) -> Result<Vec<f64>> {
    let size = counts.len();
    if size < 2 {
        return Err(GameError::AlphabetTooSmall(size));
    }
    let total: u64 = counts.iter().sum();
    let denom = total as f64 + size as f64 / 2.0;
    Ok(counts.iter().map(|&c| (c as f64 + 0.5) / denom).collect())
}

/// State of one Skeptic-vs-Reality game with Skeptic playing [`kt_bet`].
#[derive(Debug, Clone)]
pub struct PredictiveGame {
    odds: BettingDistribution,
    capital: LogCapital,
    counts: FrequencyCounts,
}

/// Snapshot after one predictive round.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveStep {
    pub round: u64,
    pub observed: usize,
    pub capital: LogCapital,
    pub counts: FrequencyCounts,
}

impl PredictiveGame {
    pub fn new(odds: BettingDistribution, thrift: bool) -> Self {
        let size = odds.len();
        PredictiveGame {
            odds,
            capital: if thrift {
                LogCapital::with_thrift()
            } else {
                LogCapital::new()
            },
            counts: FrequencyCounts::new(size),
        }
    }

    pub fn odds(&self) -> &BettingDistribution {
        &self.odds
    }

    pub fn capital(&self) -> LogCapital {
        self.capital
    }

    pub fn counts(&self) -> &FrequencyCounts {
        &self.counts
    }

    pub fn round(&self) -> u64 {
        self.counts.total()
    }

    /// Skeptic's bet for the coming round, fixed before Reality moves.
    pub fn next_bet(&self) -> BettingDistribution {
        kt_bet(&self.counts).expect("alphabet size checked at construction")
    }

    pub fn play(&mut self, observed: usize) -> Result<()> {
        self.play_with(&self.next_bet(), observed)
    }

    /// Play one round with an arbitrary Skeptic bet.
    pub fn play_with(&mut self, bet: &BettingDistribution, observed: usize) -> Result<()> {
        if bet.len() != self.odds.len() {
            return Err(GameError::InvalidDistribution(format!(
                "bet over {} symbols, odds over {}",
                bet.len(),
                self.odds.len()
            )));
        }
        self.capital = capital_update(self.capital, bet, &self.odds, observed)?;
        self.counts.record(observed)
    }
}

/// Run `rounds` rounds of KT-vs-Reality and return every intermediate state.
pub fn run_predictive_game<I>(
    odds: &BettingDistribution,
    reality: I,
    rounds: u64,
) -> Result<Vec<PredictiveStep>>
where
    I: IntoIterator<Item = usize>,
{
    if rounds == 0 {
        return Err(GameError::ZeroRounds);
    }
    let mut game = PredictiveGame::new(odds.clone(), false);
    let mut reality = reality.into_iter();
    let mut trajectory = Vec::with_capacity(rounds as usize);
    for n in 1..=rounds {
        let observed = reality.next().ok_or(GameError::StreamExhausted(n - 1))?;
        game.play(observed)?;
        trajectory.push(PredictiveStep {
            round: n,
            observed,
            capital: game.capital(),
            counts: game.counts().clone(),
        });
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(w: &[f64]) -> BettingDistribution {
        BettingDistribution::new(w.to_vec()).unwrap()
    }

    #[test]
    fn rejects_degenerate_distributions() {
        assert!(matches!(
            BettingDistribution::new(vec![1.0]),
            Err(GameError::AlphabetTooSmall(1))
        ));
        assert!(BettingDistribution::new(vec![1.0, 0.0]).is_err());
        assert!(BettingDistribution::new(vec![0.6, 0.6]).is_err());
        assert!(BettingDistribution::uniform(1).is_err());
    }

    #[test]
    fn identity_bet_leaves_capital_unchanged() {
        let p = dist(&[0.2, 0.3, 0.5]);
        for w in 0..3 {
            let k = capital_update(LogCapital::new(), &p, &p, w).unwrap();
            assert_eq!(k.log_value(), 0.0);
        }
    }

    #[test]
    fn doubling_bet() {
        let bet = dist(&[0.5, 0.25, 0.25]);
        let odds = dist(&[0.25, 0.25, 0.5]);
        let k = capital_update(LogCapital::new(), &bet, &odds, 0).unwrap();
        assert!((k.log_value() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn repeated_updates_telescope() {
        let bet = dist(&[0.7, 0.3]);
        let odds = dist(&[0.4, 0.6]);
        let mut k = LogCapital::new();
        for _ in 0..50 {
            k = capital_update(k, &bet, &odds, 0).unwrap();
        }
        let expected = 50.0 * (0.7f64.ln() - 0.4f64.ln());
        assert!((k.log_value() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_symbol_outside_alphabet() {
        let p = dist(&[0.5, 0.5]);
        assert!(matches!(
            capital_update(LogCapital::new(), &p, &p, 2),
            Err(GameError::InvalidSymbol { symbol: 2, size: 2 })
        ));
    }

    #[test]
    fn kt_examples() {
        let w = kt_bet(&FrequencyCounts::new(4)).unwrap();
        assert_eq!(w.weights(), &[0.25; 4]);
        let w = kt_bet(&FrequencyCounts::from_counts(vec![3, 1])).unwrap();
        assert!((w.weight(0) - 0.7).abs() < 1e-15 && (w.weight(1) - 0.3).abs() < 1e-15);
        let w = kt_bet(&FrequencyCounts::from_counts(vec![10, 0, 0, 0])).unwrap();
        assert_eq!(
            w.weights(),
            &[10.5 / 12.0, 0.5 / 12.0, 0.5 / 12.0, 0.5 / 12.0]
        );
        assert!(kt_bet(&FrequencyCounts::new(1)).is_err());
    }

    #[test]
    fn single_round_frequency() {
        let odds = BettingDistribution::uniform(3).unwrap();
        let steps = run_predictive_game(&odds, [2], 1).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].counts.frequency(2), 1.0);
    }

    #[test]
    fn stream_exhaustion_and_zero_rounds() {
        let odds = BettingDistribution::uniform(2).unwrap();
        assert_eq!(
            run_predictive_game(&odds, [0, 1], 3).unwrap_err(),
            GameError::StreamExhausted(2)
        );
        assert_eq!(
            run_predictive_game(&odds, [0], 0).unwrap_err(),
            GameError::ZeroRounds
        );
    }

    #[test]
    fn thrift_locks_half_at_each_new_power_of_two() {
        let mut k = LogCapital::with_thrift();
        // Capital 1 → 3: crosses 2, half of 3 is locked.
        k.apply(3f64.ln()).unwrap();
        assert!((k.log_value() - 1.5f64.ln()).abs() < 1e-12);
        assert!((k.locked_log() - 1.5f64.ln()).abs() < 1e-12);
        assert!((k.total_log() - 3f64.ln()).abs() < 1e-12);
        // Losing everything at risk still leaves the locked part.
        k.apply(-40.0).unwrap();
        assert!(k.total_log() > 1.5f64.ln() - 1e-9);
    }

    #[test]
    fn thrift_costs_at_most_half_the_growth_rate() {
        let mut plain = LogCapital::new();
        let mut thrifty = LogCapital::with_thrift();
        for _ in 0..2000 {
            plain.apply(0.05).unwrap();
            thrifty.apply(0.05).unwrap();
        }
        let ratio = thrifty.total_log() / plain.total_log();
        assert!(ratio > 0.45 && ratio <= 1.0, "ratio {ratio}");
    }
}
