//! Betting-game formulations of CHSH tests: the simple predictive game,
//! the hidden-variable game with the locality loophole, and the
//! loopholes-closed game with its two capital processes `K^AB` and `W^AB`.
//!
//! Shared types are re-exported at the crate root.

pub mod domain;
pub mod error;
pub mod games;
pub mod gtp;
mod num;
pub mod oracle;
pub mod runner;
pub mod stats;
pub mod strategies;

pub use domain::{
    chsh_combination, ChshTable, HiddenVariable, Outcome, OutcomePair, PairRows, SettingA,
    SettingB, SettingPair,
};
pub use error::{GameError, Result};
pub use games::{
    ClosedGame, ClosedNature, ClosedScientist, HistoryMode, LocalityGame, LocalityNature,
    RunOptions, RunSummary, ScientistA, ScientistB, Snapshot,
};
pub use gtp::{kt_bet, BettingDistribution, FrequencyCounts, LogCapital, PredictiveGame};
pub use oracle::{limiting_kl, JointDistribution, LimitingRates, NatureModel};
pub use runner::{
    run_game, GameSpec, NatureSpec, PredictiveSpec, Protocol, ScientistSpec, Trajectory,
};
pub use stats::{kl_independence, w_closed_form, ContingencyCounts, EmpiricalDistributions};
pub use strategies::{BalancingRule, FillRule, SettingPolicy};
