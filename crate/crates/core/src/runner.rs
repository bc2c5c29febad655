//! Declarative game descriptions and a single entry point that runs any of
//! the three protocols from one.

use serde::{Deserialize, Serialize};

use crate::domain::{ChshTable, HiddenVariable};
use crate::error::{GameError, Result};
use crate::games::{self, LocalityPlayers, RunOptions, RunSummary, Snapshot};
use crate::games::{ClosedNature, ClosedScientist, LocalityNature};
use crate::gtp::{BettingDistribution, PredictiveGame};
use crate::oracle::{self, JointDistribution, LimitingRates, NatureModel};
use crate::strategies::{
    BalancedScientistA, BalancedScientistB, BalancingRule, DeterministicNature, FillRule,
    ForcingScientist, IidReality, IndependentLhv, LocalityExploitNature, MixtureNature,
    PreimageViolator, QuantumNature, ReplayNature, SettingBlind, SettingPolicy, TableScientist,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Predictive,
    Locality,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScientistSpec {
    /// Closed game: add-half bets per setting pair.
    Forcing {
        #[serde(default)]
        setting_policy: SettingPolicy,
    },
    /// Closed game: bets equal to the table, `K^AB` stays at 1.
    Table {
        #[serde(default)]
        setting_policy: SettingPolicy,
    },
    /// Locality game: Scientists A and B with a balancing rule for `t`.
    Balanced {
        #[serde(default)]
        setting_policy: SettingPolicy,
        #[serde(default)]
        balancing: BalancingRule,
    },
    /// Predictive game: add-half bets, optionally with thrift.
    Kt {
        #[serde(default)]
        thrift: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NatureSpec {
    Quantum {
        #[serde(default)]
        fill: FillRule,
    },
    MdLhv {
        #[serde(default)]
        fill: FillRule,
    },
    /// `λ` iid from `weights` (uniform when absent), blind to the setting.
    Independent {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Deterministic {
        lambda: HiddenVariable,
    },
    Mixture {
        #[serde(default = "half")]
        quantum_weight: f64,
        #[serde(default)]
        fill: FillRule,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Replay {
        moves: Vec<HiddenVariable>,
    },
    LocalityExploit,
    PreimageViolator {
        violate_at: u64,
    },
    /// Predictive game: symbols iid from `weights`.
    Iid {
        weights: Vec<f64>,
    },
    /// Predictive game: a scripted symbol list.
    ReplaySymbols {
        symbols: Vec<usize>,
    },
}

fn half() -> f64 {
    0.5
}

/// Odds for the predictive game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSpec {
    pub odds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    pub protocol: Protocol,
    pub scientist: ScientistSpec,
    pub nature: NatureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictive: Option<PredictiveSpec>,
}

/// Output of [`run_game`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub protocol: Protocol,
    pub snapshots: Vec<Snapshot>,
    pub summary: RunSummary,
}

fn law(weights: &Option<Vec<f64>>) -> Result<JointDistribution> {
    match weights {
        None => Ok(JointDistribution::uniform()),
        Some(w) => {
            let arr: [f64; 16] = w.as_slice().try_into().map_err(|_| {
                GameError::InvalidDistribution(format!("λ law needs 16 weights, got {}", w.len()))
            })?;
            JointDistribution::new(arr)
        }
    }
}

fn mismatch(what: &str, protocol: Protocol) -> GameError {
    GameError::Unsupported(format!("{what} cannot play the {protocol:?} protocol"))
}

pub fn closed_scientist(spec: &ScientistSpec, seed: u64) -> Result<Box<dyn ClosedScientist>> {
    match *spec {
        ScientistSpec::Forcing { setting_policy } => {
            Ok(Box::new(ForcingScientist::new(seed, setting_policy)))
        }
        ScientistSpec::Table { setting_policy } => {
            Ok(Box::new(TableScientist::new(seed, setting_policy)))
        }
        _ => Err(mismatch(&format!("scientist {spec:?}"), Protocol::Closed)),
    }
}

pub fn closed_nature(
    spec: &NatureSpec,
    table: &ChshTable,
    seed: u64,
) -> Result<Box<dyn ClosedNature>> {
    Ok(match spec {
        NatureSpec::Quantum { fill } => {
            Box::new(QuantumNature::quantum(table.clone(), *fill, seed))
        }
        NatureSpec::MdLhv { fill } => Box::new(QuantumNature::md_lhv(table.clone(), *fill, seed)),
        NatureSpec::Independent { weights } => Box::new(SettingBlind(IndependentLhv::new(
            law(weights)?,
            crate::strategies::stream_rng(seed, IndependentLhv::ROLE),
        ))),
        NatureSpec::Deterministic { lambda } => {
            Box::new(SettingBlind(DeterministicNature(*lambda)))
        }
        NatureSpec::Mixture {
            quantum_weight,
            fill,
            weights,
        } => Box::new(MixtureNature::new(
            table.clone(),
            *quantum_weight,
            *fill,
            law(weights)?,
            seed,
        )?),
        NatureSpec::Replay { moves } => Box::new(SettingBlind(ReplayNature::new(moves.clone()))),
        other => return Err(mismatch(&format!("nature {other:?}"), Protocol::Closed)),
    })
}

pub fn locality_nature(
    spec: &NatureSpec,
    table: &ChshTable,
    seed: u64,
) -> Result<Box<dyn LocalityNature>> {
    Ok(match spec {
        NatureSpec::LocalityExploit => Box::new(LocalityExploitNature::new(table.clone(), seed)),
        NatureSpec::PreimageViolator { violate_at } => {
            Box::new(PreimageViolator::new(table.clone(), seed, *violate_at))
        }
        NatureSpec::Replay { moves } => Box::new(ReplayNature::new(moves.clone())),
        other => return Err(mismatch(&format!("nature {other:?}"), Protocol::Locality)),
    })
}

/// Run one game. The result is a pure function of `(spec, opts, seed)`.
pub fn run_game(spec: &GameSpec, opts: &RunOptions, seed: u64) -> Result<Trajectory> {
    let table = ChshTable::default();
    let (snapshots, summary) = match spec.protocol {
        Protocol::Closed => {
            let mut scientist = closed_scientist(&spec.scientist, seed)?;
            let mut nature = closed_nature(&spec.nature, &table, seed)?;
            let run = games::run_closed(
                &table,
                scientist.as_mut(),
                nature.as_mut(),
                opts,
                &mut |_, _| {},
            )?;
            (run.trajectory, run.summary)
        }
        Protocol::Locality => {
            let ScientistSpec::Balanced {
                setting_policy,
                balancing,
            } = spec.scientist
            else {
                return Err(mismatch(
                    &format!("scientist {:?}", spec.scientist),
                    Protocol::Locality,
                ));
            };
            let mut nature = locality_nature(&spec.nature, &table, seed)?;
            let mut a = BalancedScientistA::new(seed, setting_policy);
            let mut b = BalancedScientistB::new(balancing);
            let players = LocalityPlayers {
                scientist_a: &mut a,
                scientist_b: &mut b,
                nature: nature.as_mut(),
            };
            let run = games::run_locality(&table, players, opts, &mut |_| {})?;
            (run.trajectory, run.summary)
        }
        Protocol::Predictive => run_predictive(spec, opts, seed)?,
    };
    Ok(Trajectory {
        protocol: spec.protocol,
        snapshots,
        summary,
    })
}

fn run_predictive(
    spec: &GameSpec,
    opts: &RunOptions,
    seed: u64,
) -> Result<(Vec<Snapshot>, RunSummary)> {
    let ScientistSpec::Kt { thrift } = spec.scientist else {
        return Err(mismatch(
            &format!("scientist {:?}", spec.scientist),
            Protocol::Predictive,
        ));
    };
    let odds = spec.predictive.as_ref().ok_or_else(|| {
        GameError::Unsupported("predictive protocol needs a [predictive] odds table".into())
    })?;
    let odds = BettingDistribution::new(odds.odds.clone())?;
    let mut reality: Box<dyn Iterator<Item = usize>> = match &spec.nature {
        NatureSpec::Iid { weights } => Box::new(IidReality::new(
            &BettingDistribution::new(weights.clone())?,
            seed,
        )),
        NatureSpec::ReplaySymbols { symbols } => Box::new(symbols.clone().into_iter()),
        other => return Err(mismatch(&format!("nature {other:?}"), Protocol::Predictive)),
    };
    if opts.rounds == 0 {
        return Err(GameError::ZeroRounds);
    }
    if opts.snapshot_stride == 0 {
        return Err(GameError::Unsupported(
            "snapshot stride must be at least 1".into(),
        ));
    }

    let mut game = PredictiveGame::new(odds.clone(), thrift);
    let mut snapshots = Vec::new();
    let mut summary = RunSummary::default();
    for n in 1..=opts.rounds {
        let observed = reality.next().ok_or(GameError::StreamExhausted(n - 1))?;
        game.play(observed)?;
        let log_k = game.capital().total_log();
        summary.max_log_k_a = Some(summary.max_log_k_a.map_or(log_k, |m: f64| m.max(log_k)));
        if n.is_multiple_of(opts.snapshot_stride) || n == opts.rounds {
            snapshots.push(Snapshot {
                n,
                omega_a: Some(observed as i64),
                log_k_a: Some(log_k),
                max_cell_freq_error: Some(game.counts().max_deviation(&odds)),
                ..Snapshot::default()
            });
        }
    }
    summary.rounds = opts.rounds;
    summary.last = snapshots.last().cloned().unwrap_or_default();
    Ok((snapshots, summary))
}

/// Oracle limits for a closed-game Nature under a setting policy, when the
/// Nature has a stationary law.
pub fn expected_rates(spec: &GameSpec) -> Result<Option<LimitingRates>> {
    if spec.protocol != Protocol::Closed {
        return Ok(None);
    }
    let settings = match spec.scientist {
        ScientistSpec::Forcing { setting_policy } | ScientistSpec::Table { setting_policy } => {
            setting_policy.limiting_law()
        }
        _ => return Ok(None),
    };
    let weights_of = |w: &Option<Vec<f64>>| law(w).map(|d| *d.weights());
    let model = match &spec.nature {
        NatureSpec::Quantum { fill } | NatureSpec::MdLhv { fill } => {
            NatureModel::Quantum { fill: *fill }
        }
        NatureSpec::Independent { weights } => NatureModel::Independent {
            weights: weights_of(weights)?,
        },
        NatureSpec::Deterministic { lambda } => NatureModel::Deterministic { lambda: *lambda },
        NatureSpec::Mixture {
            quantum_weight,
            fill,
            weights,
        } => NatureModel::Mixture {
            quantum_weight: *quantum_weight,
            fill: *fill,
            weights: weights_of(weights)?,
        },
        _ => return Ok(None),
    };
    oracle::limiting_kl(&model, &settings, &ChshTable::default()).map(Some)
}
