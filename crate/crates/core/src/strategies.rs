//! Scientist and Nature policies.
//!
//! Every random policy owns a ChaCha8 stream derived from the run seed and
//! its role label: `ChaCha8Rng::seed_from_u64(seed)` with the stream number
//! set to the 64-bit FNV-1a hash of the label. Two policies with different
//! labels never share random numbers, and a policy's moves depend only on
//! its own stream and what the protocol lets it see.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::domain::{
    ChshTable, HiddenVariable, Outcome, OutcomePair, SettingA, SettingB, SettingPair,
};
use crate::error::{GameError, Result};
use crate::games::{
    AAnnouncement, BAnnouncement, ClosedAnnouncement, ClosedNature, ClosedScientist, ClosedView,
    LocalityNature, LocalityView, ScientistA, ScientistB,
};
use crate::gtp::{kt_weights, BettingDistribution};
use crate::oracle::JointDistribution;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// The random stream owned by the policy labelled `role` in a run seeded `seed`.
pub fn stream_rng(seed: u64, role: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a64(role.as_bytes()));
    rng
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from `weights` (assumed to sum to one).
pub fn sample_index(rng: &mut impl RngCore, weights: &[f64]) -> usize {
    let x = unit_f64(rng);
    let mut cum = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cum += w;
        if x < cum {
            return i;
        }
    }
    weights.len() - 1
}

fn coin(rng: &mut impl RngCore) -> Outcome {
    Outcome::from_index((rng.next_u64() >> 63) as usize)
}

fn kt(counts: &[u64]) -> BettingDistribution {
    let weights = kt_weights(counts).expect("outcome alphabets have at least two symbols");
    BettingDistribution::new(weights).expect("add-half weights are a valid distribution")
}

/// How Nature fills the two coordinates of `λ` that the current setting
/// does not reveal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillRule {
    /// Independent fair coins.
    #[default]
    Uniform,
    /// The unmeasured A coordinate copies `ω^s` and the unmeasured B
    /// coordinate copies `ω^t`.
    CopyPartner,
}

/// How a Scientist picks settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingPolicy {
    /// Independent uniform draws from the Scientist's own stream.
    #[default]
    Uniform,
    /// Cycle through the settings in index order.
    RoundRobin,
}

impl SettingPolicy {
    /// Limiting setting-pair frequencies, for the oracle.
    pub fn limiting_law(self) -> [f64; 4] {
        [0.25; 4]
    }
}

#[derive(Debug, Clone)]
struct SettingChooser {
    policy: SettingPolicy,
    rng: ChaCha8Rng,
}

impl SettingChooser {
    /// Index in `0..2^bits` for round `round` (zero-based).
    fn next(&mut self, round: u64, bits: u32) -> usize {
        match self.policy {
            SettingPolicy::Uniform => (self.rng.next_u64() >> (64 - bits)) as usize,
            SettingPolicy::RoundRobin => (round % (1 << bits)) as usize,
        }
    }
}

// ---------------------------------------------------------------------------
// Scientists
// ---------------------------------------------------------------------------

/// Scientist AB: add-half bets over the four outcome pairs per setting pair,
/// using only rounds played under that setting pair.
#[derive(Debug, Clone)]
pub struct ForcingScientist {
    settings: SettingChooser,
}

impl ForcingScientist {
    pub const ROLE: &'static str = "scientist_ab";

    pub fn new(seed: u64, policy: SettingPolicy) -> Self {
        ForcingScientist {
            settings: SettingChooser {
                policy,
                rng: stream_rng(seed, Self::ROLE),
            },
        }
    }

    pub fn bets(view: &ClosedView<'_>) -> [BettingDistribution; 4] {
        let context = view.counts.pairs().context();
        SettingPair::ALL.map(|u| kt(&context.row(u)))
    }
}

impl ClosedScientist for ForcingScientist {
    fn announce(&mut self, view: &ClosedView<'_>) -> ClosedAnnouncement {
        ClosedAnnouncement {
            bets: Self::bets(view),
            u: SettingPair::from_index(self.settings.next(view.round, 2)),
        }
    }
}

/// Scientist AB betting exactly the table odds, so `K^AB` stays at 1.
#[derive(Debug, Clone)]
pub struct TableScientist {
    settings: SettingChooser,
}

impl TableScientist {
    pub fn new(seed: u64, policy: SettingPolicy) -> Self {
        TableScientist {
            settings: SettingChooser {
                policy,
                rng: stream_rng(seed, ForcingScientist::ROLE),
            },
        }
    }
}

impl ClosedScientist for TableScientist {
    fn announce(&mut self, view: &ClosedView<'_>) -> ClosedAnnouncement {
        ClosedAnnouncement {
            bets: SettingPair::ALL.map(|u| {
                BettingDistribution::new(view.table.row(u).to_vec())
                    .expect("table rows are positive")
            }),
            u: SettingPair::from_index(self.settings.next(view.round, 2)),
        }
    }
}

/// Scientist A of the locality game: add-half bets per setting against
/// the marginal odds.
#[derive(Debug, Clone)]
pub struct BalancedScientistA {
    settings: SettingChooser,
}

impl BalancedScientistA {
    pub const ROLE: &'static str = "scientist_a";

    pub fn new(seed: u64, policy: SettingPolicy) -> Self {
        BalancedScientistA {
            settings: SettingChooser {
                policy,
                rng: stream_rng(seed, Self::ROLE),
            },
        }
    }
}

impl ScientistA for BalancedScientistA {
    fn announce(&mut self, view: &LocalityView<'_>) -> AAnnouncement {
        AAnnouncement {
            bets: SettingA::ALL.map(|s| kt(&view.tally.a_counts(s))),
            s: SettingA::from_index(self.settings.next(view.round, 1)),
        }
    }
}

/// How Scientist B picks `t` to keep the A-outcome frequencies balanced
/// across the two B settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalancingRule {
    /// Choose the `t` whose context `(a, s, t)` has fewer rounds.
    #[default]
    Count,
    /// Minimise the summed post-move discrepancy over both `t`.
    Greedy,
    /// Minimise the post-move discrepancy of the chosen `t` alone.
    /// Tends to starve `t = 4`; kept for comparison.
    Literal,
}

/// Scientist B of the locality game: add-half bets per context
/// `(ω^s, s, t)` against the conditional odds, with `t` chosen by a
/// [`BalancingRule`]. Ties go to `t = 3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BalancedScientistB {
    rule: BalancingRule,
}

impl BalancedScientistB {
    pub fn new(rule: BalancingRule) -> Self {
        BalancedScientistB { rule }
    }

    fn post_move_discrepancy(
        view: &LocalityView<'_>,
        a: Outcome,
        s: SettingA,
        chosen: SettingB,
        t: SettingB,
    ) -> f64 {
        let bump = |hit: bool| u64::from(hit) as f64;
        let tally = view.tally;
        let ns = tally.setting_a_count(s) as f64 + 1.0;
        let nas = tally.outcome_a_count(a, s) as f64 + 1.0;
        let nst = tally.pair_count(s, t) as f64 + bump(t == chosen);
        let nast = tally.context_count(a, s, t) as f64 + bump(t == chosen);
        if nst == 0.0 {
            return 1.0;
        }
        (nas / ns - nast / nst).abs()
    }

    pub fn choose(&self, view: &LocalityView<'_>, s: SettingA, a: Outcome) -> SettingB {
        let [three, four] = SettingB::ALL;
        let score = |t: SettingB| -> f64 {
            match self.rule {
                BalancingRule::Count => view.tally.context_count(a, s, t) as f64,
                BalancingRule::Literal => Self::post_move_discrepancy(view, a, s, t, t),
                BalancingRule::Greedy => SettingB::ALL
                    .iter()
                    .map(|&other| Self::post_move_discrepancy(view, a, s, t, other))
                    .sum(),
            }
        };
        if score(four) < score(three) {
            four
        } else {
            three
        }
    }
}

impl ScientistB for BalancedScientistB {
    fn announce(
        &mut self,
        view: &LocalityView<'_>,
        s: SettingA,
        omega_a: Outcome,
    ) -> BAnnouncement {
        BAnnouncement {
            bets: SettingB::ALL.map(|t| kt(&view.tally.b_counts(omega_a, s, t))),
            t: self.choose(view, s, omega_a),
        }
    }
}

// ---------------------------------------------------------------------------
// Natures, closed game
// ---------------------------------------------------------------------------

/// A Nature that never sees the current setting. [`SettingBlind`] turns it
/// into a [`ClosedNature`] without giving it access to `u`.
pub trait IndependentNature {
    fn sample(&mut self, round: u64) -> Result<HiddenVariable>;
}

#[derive(Debug, Clone)]
pub struct SettingBlind<N>(pub N);

impl<N: IndependentNature> ClosedNature for SettingBlind<N> {
    fn respond(&mut self, view: &ClosedView<'_>, _: &ClosedAnnouncement) -> Result<HiddenVariable> {
        self.0.sample(view.round + 1)
    }
}

/// Samples the revealed pair from the table row of the announced setting
/// and fills the other two coordinates by a [`FillRule`]. With the same
/// sampling it also serves as the measurement-dependent hidden-variable
/// model; only the stream label differs.
#[derive(Debug, Clone)]
pub struct QuantumNature {
    table: ChshTable,
    fill: FillRule,
    rng: ChaCha8Rng,
}

impl QuantumNature {
    pub const ROLE: &'static str = "nature_quantum";
    pub const MD_LHV_ROLE: &'static str = "nature_md_lhv";

    pub fn new(table: ChshTable, fill: FillRule, rng: ChaCha8Rng) -> Self {
        QuantumNature { table, fill, rng }
    }

    pub fn quantum(table: ChshTable, fill: FillRule, seed: u64) -> Self {
        Self::new(table, fill, stream_rng(seed, Self::ROLE))
    }

    pub fn md_lhv(table: ChshTable, fill: FillRule, seed: u64) -> Self {
        Self::new(table, fill, stream_rng(seed, Self::MD_LHV_ROLE))
    }

    pub fn draw(&mut self, u: SettingPair) -> HiddenVariable {
        let pair = OutcomePair::from_index(sample_index(&mut self.rng, &self.table.row(u)));
        let (fill_a, fill_b) = match self.fill {
            FillRule::Uniform => (coin(&mut self.rng), coin(&mut self.rng)),
            FillRule::CopyPartner => (pair.a, pair.b),
        };
        HiddenVariable::new([Outcome::Plus; 4])
            .with_coordinate(u.a.get(), pair.a)
            .with_coordinate(u.a.other().get(), fill_a)
            .with_coordinate(u.b.get(), pair.b)
            .with_coordinate(u.b.other().get(), fill_b)
    }
}

impl ClosedNature for QuantumNature {
    fn respond(
        &mut self,
        _: &ClosedView<'_>,
        announcement: &ClosedAnnouncement,
    ) -> Result<HiddenVariable> {
        Ok(self.draw(announcement.u))
    }
}

/// `λ` drawn iid from a fixed law on `Ω^4`.
#[derive(Debug, Clone)]
pub struct IndependentLhv {
    law: JointDistribution,
    rng: ChaCha8Rng,
}

impl IndependentLhv {
    pub const ROLE: &'static str = "nature_independent";

    pub fn new(law: JointDistribution, rng: ChaCha8Rng) -> Self {
        IndependentLhv { law, rng }
    }

    pub fn uniform(seed: u64) -> Self {
        Self::new(JointDistribution::uniform(), stream_rng(seed, Self::ROLE))
    }

    pub fn draw(&mut self) -> HiddenVariable {
        HiddenVariable::from_index(sample_index(&mut self.rng, self.law.weights()))
    }
}

impl IndependentNature for IndependentLhv {
    fn sample(&mut self, _: u64) -> Result<HiddenVariable> {
        Ok(self.draw())
    }
}

/// The same `λ` every round.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicNature(pub HiddenVariable);

impl IndependentNature for DeterministicNature {
    fn sample(&mut self, _: u64) -> Result<HiddenVariable> {
        Ok(self.0)
    }
}

/// Scripted `λ` sequence; fails once the script runs out.
#[derive(Debug, Clone)]
pub struct ReplayNature {
    moves: Vec<HiddenVariable>,
}

impl ReplayNature {
    pub fn new(moves: Vec<HiddenVariable>) -> Self {
        ReplayNature { moves }
    }

    fn at(&self, round: u64) -> Result<HiddenVariable> {
        usize::try_from(round - 1)
            .ok()
            .and_then(|i| self.moves.get(i))
            .copied()
            .ok_or(GameError::ReplayExhausted(round))
    }
}

impl IndependentNature for ReplayNature {
    fn sample(&mut self, round: u64) -> Result<HiddenVariable> {
        self.at(round)
    }
}

impl LocalityNature for ReplayNature {
    fn respond_a(&mut self, view: &LocalityView<'_>, a: &AAnnouncement) -> Result<Outcome> {
        Ok(self.at(view.round + 1)?.x_a(a.s))
    }

    fn respond_b(
        &mut self,
        view: &LocalityView<'_>,
        _: &AAnnouncement,
        _: Outcome,
        _: &BAnnouncement,
    ) -> Result<HiddenVariable> {
        self.at(view.round + 1)
    }
}

/// Each round, a quantum draw with probability `quantum_weight`, otherwise
/// an independent draw.
#[derive(Debug, Clone)]
pub struct MixtureNature {
    quantum_weight: f64,
    quantum: QuantumNature,
    independent: IndependentLhv,
    rng: ChaCha8Rng,
}

impl MixtureNature {
    pub const ROLE: &'static str = "nature_mixture";

    pub fn new(
        table: ChshTable,
        quantum_weight: f64,
        fill: FillRule,
        law: JointDistribution,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&quantum_weight) {
            return Err(GameError::Unsupported(format!(
                "mixture weight {quantum_weight} outside [0, 1]"
            )));
        }
        Ok(MixtureNature {
            quantum_weight,
            quantum: QuantumNature::new(table, fill, stream_rng(seed, "nature_mixture/quantum")),
            independent: IndependentLhv::new(law, stream_rng(seed, "nature_mixture/independent")),
            rng: stream_rng(seed, Self::ROLE),
        })
    }
}

impl ClosedNature for MixtureNature {
    fn respond(
        &mut self,
        _: &ClosedView<'_>,
        announcement: &ClosedAnnouncement,
    ) -> Result<HiddenVariable> {
        if unit_f64(&mut self.rng) < self.quantum_weight {
            Ok(self.quantum.draw(announcement.u))
        } else {
            Ok(self.independent.draw())
        }
    }
}

// ---------------------------------------------------------------------------
// Natures, locality game
// ---------------------------------------------------------------------------

/// Nature A answers with a fair coin; Nature B, knowing `(s, ω^s, t)`,
/// draws `ω^t` from the conditional odds and builds a consistent `λ`.
#[derive(Debug, Clone)]
pub struct LocalityExploitNature {
    table: ChshTable,
    rng: ChaCha8Rng,
}

impl LocalityExploitNature {
    pub const ROLE: &'static str = "nature_locality";

    pub fn new(table: ChshTable, seed: u64) -> Self {
        LocalityExploitNature {
            table,
            rng: stream_rng(seed, Self::ROLE),
        }
    }

    fn build(&mut self, s: SettingA, omega_a: Outcome, t: SettingB) -> HiddenVariable {
        let u = SettingPair::from_parts(s, t);
        let p_plus = self.table.conditional_odds(Outcome::Plus, omega_a, u);
        let omega_b = Outcome::from_index(sample_index(&mut self.rng, &[p_plus, 1.0 - p_plus]));
        HiddenVariable::new([Outcome::Plus; 4])
            .with_coordinate(s.get(), omega_a)
            .with_coordinate(s.other().get(), coin(&mut self.rng))
            .with_coordinate(t.get(), omega_b)
            .with_coordinate(t.other().get(), coin(&mut self.rng))
    }
}

impl LocalityNature for LocalityExploitNature {
    fn respond_a(&mut self, _: &LocalityView<'_>, a: &AAnnouncement) -> Result<Outcome> {
        let p_plus = self.table.marginal_odds(Outcome::Plus, a.s);
        Ok(Outcome::from_index(sample_index(
            &mut self.rng,
            &[p_plus, 1.0 - p_plus],
        )))
    }

    fn respond_b(
        &mut self,
        _: &LocalityView<'_>,
        a: &AAnnouncement,
        omega_a: Outcome,
        b: &BAnnouncement,
    ) -> Result<HiddenVariable> {
        Ok(self.build(a.s, omega_a, b.t))
    }
}

/// Test fixture: plays like [`LocalityExploitNature`] but at round
/// `violate_at` returns a `λ` outside `X_s^{-1}(ω^s)`.
#[derive(Debug, Clone)]
pub struct PreimageViolator {
    inner: LocalityExploitNature,
    violate_at: u64,
}

impl PreimageViolator {
    pub fn new(table: ChshTable, seed: u64, violate_at: u64) -> Self {
        PreimageViolator {
            inner: LocalityExploitNature::new(table, seed),
            violate_at,
        }
    }
}

impl LocalityNature for PreimageViolator {
    fn respond_a(&mut self, view: &LocalityView<'_>, a: &AAnnouncement) -> Result<Outcome> {
        self.inner.respond_a(view, a)
    }

    fn respond_b(
        &mut self,
        view: &LocalityView<'_>,
        a: &AAnnouncement,
        omega_a: Outcome,
        b: &BAnnouncement,
    ) -> Result<HiddenVariable> {
        let lambda = self.inner.respond_b(view, a, omega_a, b)?;
        if view.round + 1 == self.violate_at {
            Ok(lambda.with_coordinate(a.s.get(), -omega_a))
        } else {
            Ok(lambda)
        }
    }
}

// ---------------------------------------------------------------------------
// Reality, predictive game
// ---------------------------------------------------------------------------

/// Endless iid symbol stream from a fixed law.
#[derive(Debug, Clone)]
pub struct IidReality {
    weights: Vec<f64>,
    rng: ChaCha8Rng,
}

impl IidReality {
    pub const ROLE: &'static str = "reality";

    pub fn new(law: &BettingDistribution, seed: u64) -> Self {
        IidReality {
            weights: law.weights().to_vec(),
            rng: stream_rng(seed, Self::ROLE),
        }
    }
}

impl Iterator for IidReality {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        Some(sample_index(&mut self.rng, &self.weights))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{ClosedGame, HistoryMode, LocalityGame};

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream_rng(7, "x");
        let mut b = stream_rng(7, "x");
        let mut c = stream_rng(7, "y");
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        assert_eq!(xs, (0..8).map(|_| b.next_u64()).collect::<Vec<_>>());
        assert_ne!(xs, (0..8).map(|_| c.next_u64()).collect::<Vec<_>>());
    }

    #[test]
    fn unit_f64_in_range() {
        let mut r = stream_rng(1, "u");
        for _ in 0..10_000 {
            let x = unit_f64(&mut r);
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn forcing_scientist_starts_uniform() {
        let game = ClosedGame::new(ChshTable::default(), HistoryMode::Summary);
        let mut sci = ForcingScientist::new(1, SettingPolicy::Uniform);
        let ann = sci.announce(&game.view());
        for bet in &ann.bets {
            assert_eq!(bet.weights(), &[0.25; 4]);
        }
    }

    #[test]
    fn forcing_scientist_kt_on_context_counts() {
        let table = ChshTable::default();
        let mut game = ClosedGame::new(table.clone(), HistoryMode::Summary);
        let u13 = SettingPair::ALL[0];
        let moves = ["++++", "++++", "++++", "++-+"];
        let mut sci = TableScientist::new(0, SettingPolicy::RoundRobin);
        for m in moves {
            let mut ann = sci.announce(&game.view());
            ann.u = u13;
            game.play_round(&ann, m.parse().unwrap()).unwrap();
        }
        // A round at a different setting does not touch the (1,3) counts.
        let mut ann = sci.announce(&game.view());
        ann.u = SettingPair::ALL[3];
        game.play_round(&ann, "----".parse().unwrap()).unwrap();

        let bets = ForcingScientist::bets(&game.view());
        let expected = [3.5 / 6.0, 1.5 / 6.0, 0.5 / 6.0, 0.5 / 6.0];
        for (w, e) in bets[0].weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn round_robin_settings_are_balanced() {
        let table = ChshTable::default();
        let mut game = ClosedGame::new(table.clone(), HistoryMode::Summary);
        let mut sci = ForcingScientist::new(3, SettingPolicy::RoundRobin);
        let mut nature = QuantumNature::quantum(table, FillRule::Uniform, 3);
        for n in 1..=103u64 {
            let ann = sci.announce(&game.view());
            let lambda = nature.respond(&game.view(), &ann).unwrap();
            game.play_round(&ann, lambda).unwrap();
            for u in SettingPair::ALL {
                let c = game.counts().setting_count(u);
                assert!(c == n / 4 || c == n.div_ceil(4));
            }
        }
    }

    #[test]
    fn scientist_a_kt_example() {
        let mut game = LocalityGame::new(ChshTable::default(), HistoryMode::Summary);
        let mut a = BalancedScientistA::new(0, SettingPolicy::RoundRobin);
        let ann = a.announce(&game.view());
        assert_eq!(ann.bets[0].weights(), &[0.5, 0.5]);
        let mut b = BalancedScientistB::default();
        for _ in 0..10 {
            let mut ann = a.announce(&game.view());
            ann.s = SettingA::ONE;
            let bann = b.announce(&game.view(), ann.s, Outcome::Plus);
            game.play_round(&ann, Outcome::Plus, &bann, "++++".parse().unwrap())
                .unwrap();
        }
        let ann = a.announce(&game.view());
        assert!((ann.bets[0].weight(0) - 10.5 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn round_robin_a_settings() {
        let mut game = LocalityGame::new(ChshTable::default(), HistoryMode::Summary);
        let mut a = BalancedScientistA::new(0, SettingPolicy::RoundRobin);
        let mut b = BalancedScientistB::default();
        let mut nature = LocalityExploitNature::new(ChshTable::default(), 0);
        for n in 1..=51u64 {
            let view = game.view();
            let ann = a.announce(&view);
            let wa = nature.respond_a(&view, &ann).unwrap();
            let bann = b.announce(&view, ann.s, wa);
            let lambda = nature.respond_b(&view, &ann, wa, &bann).unwrap();
            game.play_round(&ann, wa, &bann, lambda).unwrap();
            let ones = game.tally().setting_a_count(SettingA::ONE);
            assert!(ones.abs_diff(n / 2) <= 1);
        }
    }

    #[test]
    fn scientist_b_tie_goes_to_three() {
        let game = LocalityGame::new(ChshTable::default(), HistoryMode::Summary);
        for rule in [
            BalancingRule::Count,
            BalancingRule::Greedy,
            BalancingRule::Literal,
        ] {
            let mut b = BalancedScientistB::new(rule);
            let ann = b.announce(&game.view(), SettingA::ONE, Outcome::Plus);
            assert_eq!(ann.t, SettingB::THREE, "{rule:?}");
            assert_eq!(ann.bets[0].weights(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn scientist_b_fills_underrepresented_context() {
        let table = ChshTable::default();
        let mut game = LocalityGame::new(table, HistoryMode::Summary);
        let a_ann = AAnnouncement {
            bets: [
                BettingDistribution::uniform(2).unwrap(),
                BettingDistribution::uniform(2).unwrap(),
            ],
            s: SettingA::ONE,
        };
        // Two (+,1,4) rounds and one (-,1,3): context (+,1,3) is missing.
        for (wa, t, lambda) in [
            (Outcome::Plus, 4, "++++"),
            (Outcome::Plus, 4, "++++"),
            (Outcome::Minus, 3, "-+++"),
        ] {
            let b_ann = BAnnouncement {
                bets: [
                    BettingDistribution::uniform(2).unwrap(),
                    BettingDistribution::uniform(2).unwrap(),
                ],
                t: SettingB::new(t).unwrap(),
            };
            game.play_round(&a_ann, wa, &b_ann, lambda.parse().unwrap())
                .unwrap();
        }
        for rule in [
            BalancingRule::Count,
            BalancingRule::Greedy,
            BalancingRule::Literal,
        ] {
            let b = BalancedScientistB::new(rule);
            assert_eq!(
                b.choose(&game.view(), SettingA::ONE, Outcome::Plus),
                SettingB::THREE,
                "{rule:?}"
            );
        }
    }

    #[test]
    fn quantum_nature_reveals_table_row() {
        let table = ChshTable::default();
        let game = ClosedGame::new(table.clone(), HistoryMode::Summary);
        let mut sci = ForcingScientist::new(9, SettingPolicy::Uniform);
        for fill in [FillRule::Uniform, FillRule::CopyPartner] {
            let mut nature = QuantumNature::quantum(table.clone(), fill, 9);
            let mut counts = [0u64; 4];
            let u = SettingPair::ALL[1];
            for _ in 0..40_000 {
                let mut ann = sci.announce(&game.view());
                ann.u = u;
                let l = nature.respond(&game.view(), &ann).unwrap();
                counts[l.reveal(u).index()] += 1;
                if fill == FillRule::CopyPartner {
                    assert_eq!(l.x_a(SettingA::TWO), l.x_a(SettingA::ONE));
                    assert_eq!(l.x_b(SettingB::THREE), l.x_b(SettingB::FOUR));
                }
            }
            for (c, p) in counts.iter().zip(table.row(u)) {
                assert!((*c as f64 / 40_000.0 - p).abs() < 0.01);
            }
        }
    }

    #[test]
    fn locality_exploit_is_consistent() {
        let table = ChshTable::default();
        let game = LocalityGame::new(table.clone(), HistoryMode::Summary);
        let mut nature = LocalityExploitNature::new(table, 5);
        let mut a = BalancedScientistA::new(5, SettingPolicy::Uniform);
        let mut b = BalancedScientistB::default();
        for _ in 0..2000 {
            let view = game.view();
            let ann = a.announce(&view);
            let wa = nature.respond_a(&view, &ann).unwrap();
            let bann = b.announce(&view, ann.s, wa);
            let l = nature.respond_b(&view, &ann, wa, &bann).unwrap();
            assert_eq!(l.x_a(ann.s), wa);
        }
    }

    #[test]
    fn replay_exhaustion_reports_round() {
        let mut r = ReplayNature::new(vec!["++++".parse().unwrap()]);
        assert!(r.sample(1).is_ok());
        assert_eq!(r.sample(2), Err(GameError::ReplayExhausted(2)));
    }

    #[test]
    fn iid_reality_frequencies() {
        let law = BettingDistribution::new(vec![0.2, 0.8]).unwrap();
        let n = 50_000;
        let ones = IidReality::new(&law, 4).take(n).filter(|&x| x == 1).count();
        assert!((ones as f64 / n as f64 - 0.8).abs() < 0.01);
    }
}
