//! The two hidden-variable protocols as validating state machines.
//!
//! Each round is driven through policy traits whose signatures carry
//! exactly what the protocol has revealed at that point, so a bet cannot
//! depend on a move that is announced later in the same round.

use serde::{Deserialize, Serialize};

use crate::domain::{
    ChshTable, HiddenVariable, Outcome, OutcomePair, SettingA, SettingB, SettingPair,
};
use crate::error::{GameError, Result};
use crate::gtp::{BettingDistribution, LogCapital};
use crate::num;
use crate::stats::{self, ContingencyCounts, OutcomeTally};

/// Whether per-round records are kept. Statistics are incremental either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryMode {
    Full,
    #[default]
    Summary,
}

fn check_len(bets: &[BettingDistribution], len: usize) -> Result<()> {
    match bets.iter().find(|b| b.len() != len) {
        Some(b) => Err(GameError::InvalidDistribution(format!(
            "bet over {} outcomes, expected {len}",
            b.len()
        ))),
        None => Ok(()),
    }
}

fn log_ratio(bet: f64, odds: f64) -> f64 {
    num::ln(bet) - num::ln(odds)
}

// ---------------------------------------------------------------------------
// Locality-loophole game
// ---------------------------------------------------------------------------

/// Scientist A's move: `q^A(·|s)` for both settings, then `s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AAnnouncement {
    pub bets: [BettingDistribution; 2],
    pub s: SettingA,
}

/// Scientist B's move: `q^B(·|ω^s, s, t)` for both `t`, then `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BAnnouncement {
    pub bets: [BettingDistribution; 2],
    pub t: SettingB,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityRecord {
    pub a: AAnnouncement,
    pub omega_a: Outcome,
    pub b: BAnnouncement,
    pub lambda: HiddenVariable,
    pub omega_b: Outcome,
}

/// Running counts of the locality game.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalityTally {
    /// `[s][a]`: rounds with setting `s` and A-outcome `a`.
    a_counts: [[u64; 2]; 2],
    /// `[a][s][t][b]`.
    b_counts: [[[[u64; 2]; 2]; 2]; 2],
    pairs: OutcomeTally,
}

impl LocalityTally {
    fn record(&mut self, s: SettingA, a: Outcome, t: SettingB, b: Outcome) {
        self.a_counts[s.index()][a.index()] += 1;
        self.b_counts[a.index()][s.index()][t.index()][b.index()] += 1;
        self.pairs
            .record(SettingPair::from_parts(s, t), OutcomePair::new(a, b));
    }

    /// Counts of `ω^s = +1, −1` among rounds with setting `s`.
    pub fn a_counts(&self, s: SettingA) -> [u64; 2] {
        self.a_counts[s.index()]
    }

    /// Counts of `ω^t = +1, −1` in context `(a, s, t)`.
    pub fn b_counts(&self, a: Outcome, s: SettingA, t: SettingB) -> [u64; 2] {
        self.b_counts[a.index()][s.index()][t.index()]
    }

    /// `Σ_i δ_s(s_i)`.
    pub fn setting_a_count(&self, s: SettingA) -> u64 {
        self.a_counts[s.index()].iter().sum()
    }

    /// `Σ_i δ_{(a,s)}(ω^{s_i}, s_i)`.
    pub fn outcome_a_count(&self, a: Outcome, s: SettingA) -> u64 {
        self.a_counts[s.index()][a.index()]
    }

    /// `Σ_i δ_{(a,s,t)}`.
    pub fn context_count(&self, a: Outcome, s: SettingA, t: SettingB) -> u64 {
        self.b_counts(a, s, t).iter().sum()
    }

    /// `Σ_i δ_{(s,t)}`.
    pub fn pair_count(&self, s: SettingA, t: SettingB) -> u64 {
        self.pairs.total(SettingPair::from_parts(s, t))
    }

    /// Joint outcome counts per setting pair.
    pub fn outcomes(&self) -> &OutcomeTally {
        &self.pairs
    }

    /// `|#(a,s)/#s − #(a,s,t)/#(s,t)|` for one context; `None` while
    /// either denominator is zero.
    pub fn context_discrepancy(&self, a: Outcome, s: SettingA, t: SettingB) -> Option<f64> {
        let ns = self.setting_a_count(s);
        let nst = self.pair_count(s, t);
        if ns == 0 || nst == 0 {
            return None;
        }
        let whole = self.outcome_a_count(a, s) as f64 / ns as f64;
        let part = self.context_count(a, s, t) as f64 / nst as f64;
        Some((whole - part).abs())
    }

    /// Maximum balancing discrepancy over all `(a, s, t)`; `None` while any
    /// setting pair is still unvisited.
    pub fn balance_discrepancy(&self) -> Option<f64> {
        let mut worst = 0.0f64;
        for a in Outcome::ALL {
            for s in SettingA::ALL {
                for t in SettingB::ALL {
                    worst = worst.max(self.context_discrepancy(a, s, t)?);
                }
            }
        }
        Some(worst)
    }
}

/// What every locality-game policy may see: the completed rounds.
#[derive(Debug, Clone, Copy)]
pub struct LocalityView<'a> {
    pub round: u64,
    pub table: &'a ChshTable,
    pub tally: &'a LocalityTally,
    pub history: Option<&'a [LocalityRecord]>,
}

pub trait ScientistA {
    fn announce(&mut self, view: &LocalityView<'_>) -> AAnnouncement;
}

pub trait ScientistB {
    fn announce(&mut self, view: &LocalityView<'_>, s: SettingA, omega_a: Outcome)
        -> BAnnouncement;
}

/// Natures A and B of the locality game. They may share state, which is
/// exactly the locality loophole.
pub trait LocalityNature {
    /// Nature A announces `ω^s` after seeing Scientist A's move.
    fn respond_a(&mut self, view: &LocalityView<'_>, a: &AAnnouncement) -> Result<Outcome>;

    /// Nature B moves last and sees both wings' announcements.
    fn respond_b(
        &mut self,
        view: &LocalityView<'_>,
        a: &AAnnouncement,
        omega_a: Outcome,
        b: &BAnnouncement,
    ) -> Result<HiddenVariable>;
}

/// State of the hidden-variable game with the locality loophole.
#[derive(Debug, Clone)]
pub struct LocalityGame {
    table: ChshTable,
    round: u64,
    log_k_a: LogCapital,
    log_k_b: LogCapital,
    tally: LocalityTally,
    history: Option<Vec<LocalityRecord>>,
}

impl LocalityGame {
    pub fn new(table: ChshTable, history: HistoryMode) -> Self {
        LocalityGame {
            table,
            round: 0,
            log_k_a: LogCapital::new(),
            log_k_b: LogCapital::new(),
            tally: LocalityTally::default(),
            history: (history == HistoryMode::Full).then(Vec::new),
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn table(&self) -> &ChshTable {
        &self.table
    }

    pub fn log_k_a(&self) -> LogCapital {
        self.log_k_a
    }

    pub fn log_k_b(&self) -> LogCapital {
        self.log_k_b
    }

    pub fn tally(&self) -> &LocalityTally {
        &self.tally
    }

    pub fn history(&self) -> Option<&[LocalityRecord]> {
        self.history.as_deref()
    }

    pub fn view(&self) -> LocalityView<'_> {
        LocalityView {
            round: self.round,
            table: &self.table,
            tally: &self.tally,
            history: self.history.as_deref(),
        }
    }

    /// Apply one round. On error the state is left untouched.
    pub fn play_round(
        &mut self,
        a: &AAnnouncement,
        omega_a: Outcome,
        b: &BAnnouncement,
        lambda: HiddenVariable,
    ) -> Result<Outcome> {
        check_len(&a.bets, 2)?;
        check_len(&b.bets, 2)?;
        let n = self.round + 1;
        let found = lambda.x_a(a.s);
        if found != omega_a {
            return Err(GameError::ConsistencyViolation {
                round: n,
                setting: a.s.get(),
                announced: omega_a.value(),
                found: found.value(),
                lambda: lambda.to_string(),
            });
        }
        let omega_b = lambda.x_b(b.t);
        let u = SettingPair::from_parts(a.s, b.t);

        let mut k_a = self.log_k_a;
        k_a.apply(log_ratio(
            a.bets[a.s.index()].weight(omega_a.index()),
            self.table.marginal_odds(omega_a, a.s),
        ))?;
        let mut k_b = self.log_k_b;
        k_b.apply(log_ratio(
            b.bets[b.t.index()].weight(omega_b.index()),
            self.table.conditional_odds(omega_b, omega_a, u),
        ))?;

        self.log_k_a = k_a;
        self.log_k_b = k_b;
        self.tally.record(a.s, omega_a, b.t, omega_b);
        self.round = n;
        if let Some(h) = self.history.as_mut() {
            h.push(LocalityRecord {
                a: a.clone(),
                omega_a,
                b: b.clone(),
                lambda,
                omega_b,
            });
        }
        Ok(omega_b)
    }
}

// ---------------------------------------------------------------------------
// Loopholes-closed game
// ---------------------------------------------------------------------------

/// Scientist AB's move: `q^AB(·,·|u)` for all four `u`, then `u_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedAnnouncement {
    /// Indexed by [`SettingPair::index`], each over [`OutcomePair::ALL`].
    pub bets: [BettingDistribution; 4],
    pub u: SettingPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedRecord {
    pub announcement: ClosedAnnouncement,
    pub lambda: HiddenVariable,
    pub outcomes: OutcomePair,
}

#[derive(Debug, Clone, Copy)]
pub struct ClosedView<'a> {
    pub round: u64,
    pub table: &'a ChshTable,
    pub counts: &'a ContingencyCounts,
    pub history: Option<&'a [ClosedRecord]>,
}

pub trait ClosedScientist {
    fn announce(&mut self, view: &ClosedView<'_>) -> ClosedAnnouncement;
}

pub trait ClosedNature {
    /// Nature AB moves last and sees Scientist AB's full announcement.
    fn respond(
        &mut self,
        view: &ClosedView<'_>,
        announcement: &ClosedAnnouncement,
    ) -> Result<HiddenVariable>;
}

/// Per-round log factors of the two capital processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedStep {
    pub outcomes: OutcomePair,
    pub k_factor: f64,
    pub w_factor: f64,
}

/// State of the hidden-variable game with loopholes closed.
#[derive(Debug, Clone)]
pub struct ClosedGame {
    table: ChshTable,
    log_k_ab: LogCapital,
    log_w_ab: f64,
    counts: ContingencyCounts,
    history: Option<Vec<ClosedRecord>>,
}

impl ClosedGame {
    pub fn new(table: ChshTable, history: HistoryMode) -> Self {
        ClosedGame {
            table,
            log_k_ab: LogCapital::new(),
            log_w_ab: 0.0,
            counts: ContingencyCounts::new(),
            history: (history == HistoryMode::Full).then(Vec::new),
        }
    }

    pub fn round(&self) -> u64 {
        self.counts.n()
    }

    pub fn table(&self) -> &ChshTable {
        &self.table
    }

    pub fn log_k_ab(&self) -> LogCapital {
        self.log_k_ab
    }

    pub fn log_w_ab(&self) -> f64 {
        self.log_w_ab
    }

    pub fn counts(&self) -> &ContingencyCounts {
        &self.counts
    }

    pub fn history(&self) -> Option<&[ClosedRecord]> {
        self.history.as_deref()
    }

    pub fn view(&self) -> ClosedView<'_> {
        ClosedView {
            round: self.round(),
            table: &self.table,
            counts: &self.counts,
            history: self.history.as_deref(),
        }
    }

    /// Apply one round. Counts are incremented before the `W` factor is
    /// taken, so `P̂_n`, `Q̂_n`, `R̂_n` include round `n`.
    pub fn play_round(
        &mut self,
        announcement: &ClosedAnnouncement,
        lambda: HiddenVariable,
    ) -> Result<ClosedStep> {
        check_len(&announcement.bets, 4)?;
        let u = announcement.u;
        let outcomes = lambda.reveal(u);
        let k_factor = log_ratio(
            announcement.bets[u.index()].weight(outcomes.index()),
            self.table.odds(outcomes.a, outcomes.b, u),
        );
        let mut k = self.log_k_ab;
        k.apply(k_factor)?;

        self.counts.increment(lambda, u);
        let w_factor = self.counts.log_w_factor(lambda, u);
        self.log_w_ab += w_factor;
        self.log_k_ab = k;
        if let Some(h) = self.history.as_mut() {
            h.push(ClosedRecord {
                announcement: announcement.clone(),
                lambda,
                outcomes,
            });
        }
        Ok(ClosedStep {
            outcomes,
            k_factor,
            w_factor,
        })
    }
}

// ---------------------------------------------------------------------------
// Runs and snapshots
// ---------------------------------------------------------------------------

/// One trajectory row; columns that do not apply to a protocol are `None`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Snapshot {
    pub n: u64,
    pub s: Option<u8>,
    pub t: Option<u8>,
    pub lambda: Option<HiddenVariable>,
    /// A-side outcome, or the observed symbol in the predictive game.
    pub omega_a: Option<i64>,
    pub omega_b: Option<i64>,
    pub log_k_a: Option<f64>,
    pub log_k_b: Option<f64>,
    pub log_k_ab: Option<f64>,
    pub log_w_ab: Option<f64>,
    pub kl_independence: Option<f64>,
    /// `C_n(1,3), C_n(1,4), C_n(2,3), C_n(2,4)`.
    pub correlations: [Option<f64>; 4],
    pub chsh: Option<f64>,
    pub max_cell_freq_error: Option<f64>,
}

fn context_correlations(tally: &OutcomeTally) -> ([Option<f64>; 4], Option<f64>) {
    let mut c = [None; 4];
    for u in SettingPair::ALL {
        let total = tally.total(u);
        if total > 0 {
            let row = tally.row(u);
            let weighted: f64 = OutcomePair::ALL
                .iter()
                .map(|p| p.product() * row[p.index()] as f64)
                .sum();
            c[u.index()] = Some(weighted / total as f64);
        }
    }
    let chsh = match c {
        [Some(a), Some(b), Some(x), Some(y)] => Some(stats::chsh_statistic(a, b, x, y)),
        _ => None,
    };
    (c, chsh)
}

impl LocalityGame {
    pub fn snapshot(&self, last: Option<&LocalityRecord>) -> Snapshot {
        let (correlations, chsh) = context_correlations(self.tally.outcomes());
        Snapshot {
            n: self.round,
            s: last.map(|r| r.a.s.get()),
            t: last.map(|r| r.b.t.get()),
            lambda: last.map(|r| r.lambda),
            omega_a: last.map(|r| i64::from(r.omega_a.value())),
            omega_b: last.map(|r| i64::from(r.omega_b.value())),
            log_k_a: Some(self.log_k_a.total_log()),
            log_k_b: Some(self.log_k_b.total_log()),
            correlations,
            chsh,
            max_cell_freq_error: Some(stats::max_cell_freq_error(
                self.tally.outcomes(),
                &self.table,
            )),
            ..Snapshot::default()
        }
    }
}

impl ClosedGame {
    pub fn snapshot(&self, last: Option<(SettingPair, HiddenVariable)>) -> Snapshot {
        let (correlations, chsh) = context_correlations(self.counts.pairs().context());
        let kl = self
            .counts
            .empirical()
            .ok()
            .map(|e| stats::kl_independence(&e));
        let outcomes = last.map(|(u, l)| l.reveal(u));
        Snapshot {
            n: self.round(),
            s: last.map(|(u, _)| u.a.get()),
            t: last.map(|(u, _)| u.b.get()),
            lambda: last.map(|(_, l)| l),
            omega_a: outcomes.map(|p| i64::from(p.a.value())),
            omega_b: outcomes.map(|p| i64::from(p.b.value())),
            log_k_ab: Some(self.log_k_ab.total_log()),
            log_w_ab: Some(self.log_w_ab),
            kl_independence: kl,
            correlations,
            chsh,
            max_cell_freq_error: Some(stats::max_cell_freq_error(
                self.counts.pairs().context(),
                &self.table,
            )),
            ..Snapshot::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub rounds: u64,
    pub snapshot_stride: u64,
    pub history: HistoryMode,
}

impl RunOptions {
    pub fn new(rounds: u64) -> Self {
        RunOptions {
            rounds,
            snapshot_stride: 100,
            history: HistoryMode::Summary,
        }
    }

    pub fn stride(mut self, stride: u64) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn history(mut self, history: HistoryMode) -> Self {
        self.history = history;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(GameError::ZeroRounds);
        }
        if self.snapshot_stride == 0 {
            return Err(GameError::Unsupported(
                "snapshot stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn is_snapshot_round(&self, n: u64) -> bool {
        n.is_multiple_of(self.snapshot_stride) || n == self.rounds
    }
}

/// Running maxima of every log-capital over all rounds, plus the final row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub rounds: u64,
    pub max_log_k_a: Option<f64>,
    pub max_log_k_b: Option<f64>,
    pub max_log_k_ab: Option<f64>,
    pub max_log_w_ab: Option<f64>,
    pub last: Snapshot,
}

fn bump(slot: &mut Option<f64>, v: f64) {
    *slot = Some(slot.map_or(v, |m| m.max(v)));
}

#[derive(Debug, Clone)]
pub struct LocalityRun {
    pub game: LocalityGame,
    pub trajectory: Vec<Snapshot>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct ClosedRun {
    pub game: ClosedGame,
    pub trajectory: Vec<Snapshot>,
    pub summary: RunSummary,
}

/// Drive the locality game; `observer` runs after every round.
pub fn run_locality(
    table: &ChshTable,
    players: LocalityPlayers<'_>,
    opts: &RunOptions,
    observer: &mut dyn FnMut(&LocalityGame),
) -> Result<LocalityRun> {
    opts.validate()?;
    let LocalityPlayers {
        scientist_a,
        scientist_b,
        nature,
    } = players;
    let mut game = LocalityGame::new(table.clone(), opts.history);
    let mut trajectory = Vec::new();
    let mut summary = RunSummary::default();
    for n in 1..=opts.rounds {
        let view = game.view();
        let a = scientist_a.announce(&view);
        let omega_a = nature.respond_a(&view, &a)?;
        let b = scientist_b.announce(&view, a.s, omega_a);
        let lambda = nature.respond_b(&view, &a, omega_a, &b)?;
        let omega_b = game.play_round(&a, omega_a, &b, lambda)?;

        bump(&mut summary.max_log_k_a, game.log_k_a.total_log());
        bump(&mut summary.max_log_k_b, game.log_k_b.total_log());
        observer(&game);
        if opts.is_snapshot_round(n) {
            let record = LocalityRecord {
                a,
                omega_a,
                b,
                lambda,
                omega_b,
            };
            trajectory.push(game.snapshot(Some(&record)));
        }
    }
    summary.rounds = opts.rounds;
    summary.last = trajectory.last().cloned().unwrap_or_default();
    Ok(LocalityRun {
        game,
        trajectory,
        summary,
    })
}

/// The locality-game players.
pub struct LocalityPlayers<'p> {
    pub scientist_a: &'p mut dyn ScientistA,
    pub scientist_b: &'p mut dyn ScientistB,
    pub nature: &'p mut dyn LocalityNature,
}

/// Drive the loopholes-closed game; `observer` runs after every round.
pub fn run_closed(
    table: &ChshTable,
    scientist: &mut dyn ClosedScientist,
    nature: &mut dyn ClosedNature,
    opts: &RunOptions,
    observer: &mut dyn FnMut(&ClosedGame, &ClosedStep),
) -> Result<ClosedRun> {
    opts.validate()?;
    let mut game = ClosedGame::new(table.clone(), opts.history);
    let mut trajectory = Vec::new();
    let mut summary = RunSummary::default();
    for n in 1..=opts.rounds {
        let view = game.view();
        let announcement = scientist.announce(&view);
        let lambda = nature.respond(&view, &announcement)?;
        let step = game.play_round(&announcement, lambda)?;

        bump(&mut summary.max_log_k_ab, game.log_k_ab.total_log());
        bump(&mut summary.max_log_w_ab, game.log_w_ab);
        observer(&game, &step);
        if opts.is_snapshot_round(n) {
            trajectory.push(game.snapshot(Some((announcement.u, lambda))));
        }
    }
    summary.rounds = opts.rounds;
    summary.last = trajectory.last().cloned().unwrap_or_default();
    Ok(ClosedRun {
        game,
        trajectory,
        summary,
    })
}
