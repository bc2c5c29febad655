//! Outcome and setting alphabets, the canonical hidden-variable space
//! `Ω^4`, and the CHSH odds table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// A measurement outcome, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn new(value: i8) -> Result<Self> {
        match value {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(GameError::InvalidOutcome(other)),
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    /// `0` for `+1`, `1` for `-1`.
    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn sign_char(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl std::ops::Neg for Outcome {
    type Output = Outcome;
    fn neg(self) -> Outcome {
        self.flip()
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Ordered outcome pair `(ω^A, ω^B)`, A-side first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomePair {
    pub a: Outcome,
    pub b: Outcome,
}

impl OutcomePair {
    /// Index order: `(+,+)`, `(+,-)`, `(-,+)`, `(-,-)`.
    pub const ALL: [OutcomePair; 4] = [
        OutcomePair::new(Outcome::Plus, Outcome::Plus),
        OutcomePair::new(Outcome::Plus, Outcome::Minus),
        OutcomePair::new(Outcome::Minus, Outcome::Plus),
        OutcomePair::new(Outcome::Minus, Outcome::Minus),
    ];

    pub const fn new(a: Outcome, b: Outcome) -> Self {
        OutcomePair { a, b }
    }

    pub fn index(self) -> usize {
        2 * self.a.index() + self.b.index()
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// `ω^A · ω^B`.
    pub fn product(self) -> f64 {
        f64::from(self.a.value() * self.b.value())
    }

    pub fn is_equal(self) -> bool {
        self.a == self.b
    }
}

/// Scientist A's setting `θ^A ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingA(u8);

/// Scientist B's setting `θ^B ∈ {3, 4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingB(u8);

impl SettingA {
    pub const ONE: SettingA = SettingA(1);
    pub const TWO: SettingA = SettingA(2);
    pub const ALL: [SettingA; 2] = [SettingA::ONE, SettingA::TWO];

    pub fn new(s: u8) -> Result<Self> {
        match s {
            1 | 2 => Ok(SettingA(s)),
            other => Err(GameError::InvalidSetting(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn other(self) -> Self {
        SettingA(3 - self.0)
    }
}

impl SettingB {
    pub const THREE: SettingB = SettingB(3);
    pub const FOUR: SettingB = SettingB(4);
    pub const ALL: [SettingB; 2] = [SettingB::THREE, SettingB::FOUR];

    pub fn new(t: u8) -> Result<Self> {
        match t {
            3 | 4 => Ok(SettingB(t)),
            other => Err(GameError::InvalidSetting(other)),
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        usize::from(self.0 - 3)
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn other(self) -> Self {
        SettingB(7 - self.0)
    }
}

/// Joint setting `(θ^A, θ^B) ∈ Θ = {1,2} × {3,4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingPair {
    pub a: SettingA,
    pub b: SettingB,
}

impl SettingPair {
    /// Index order: `(1,3)`, `(1,4)`, `(2,3)`, `(2,4)`.
    pub const ALL: [SettingPair; 4] = [
        SettingPair {
            a: SettingA::ONE,
            b: SettingB::THREE,
        },
        SettingPair {
            a: SettingA::ONE,
            b: SettingB::FOUR,
        },
        SettingPair {
            a: SettingA::TWO,
            b: SettingB::THREE,
        },
        SettingPair {
            a: SettingA::TWO,
            b: SettingB::FOUR,
        },
    ];

    pub fn new(a: u8, b: u8) -> Result<Self> {
        Ok(SettingPair {
            a: SettingA::new(a)?,
            b: SettingB::new(b)?,
        })
    }

    pub fn from_parts(a: SettingA, b: SettingB) -> Self {
        SettingPair { a, b }
    }

    pub fn index(self) -> usize {
        2 * self.a.index() + self.b.index()
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a.get(), self.b.get())
    }
}

/// A point of the canonical hidden-variable space `Λ = Ω^4`.
///
/// `X_s` is the projection onto coordinate `s`, so the map
/// `λ ↦ (X_1(λ), …, X_4(λ))` is the identity and trivially onto `Ω^4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HiddenVariable {
    quad: [Outcome; 4],
}

impl HiddenVariable {
    pub const COUNT: usize = 16;

    pub fn new(quad: [Outcome; 4]) -> Self {
        HiddenVariable { quad }
    }

    pub fn quad(&self) -> [Outcome; 4] {
        self.quad
    }

    /// `X_s(λ)` for `s ∈ {1,2,3,4}`.
    pub fn project(&self, s: u8) -> Result<Outcome> {
        match s {
            1..=4 => Ok(self.quad[usize::from(s - 1)]),
            other => Err(GameError::InvalidSetting(other)),
        }
    }

    pub fn x_a(&self, s: SettingA) -> Outcome {
        self.quad[usize::from(s.get() - 1)]
    }

    pub fn x_b(&self, t: SettingB) -> Outcome {
        self.quad[usize::from(t.get() - 1)]
    }

    /// The pair `(X_s(λ), X_t(λ))` revealed under setting `u = (s, t)`.
    pub fn reveal(&self, u: SettingPair) -> OutcomePair {
        OutcomePair::new(self.x_a(u.a), self.x_b(u.b))
    }

    /// Coordinate `i` is `-1` iff bit `3 - i` is set, so `++++` is 0 and
    /// `----` is 15.
    pub fn index(&self) -> usize {
        self.quad.iter().fold(0, |acc, w| (acc << 1) | w.index())
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < Self::COUNT, "hidden variable index {i} out of range");
        let mut quad = [Outcome::Plus; 4];
        for (k, w) in quad.iter_mut().enumerate() {
            *w = Outcome::from_index((i >> (3 - k)) & 1);
        }
        HiddenVariable { quad }
    }

    pub fn all() -> impl Iterator<Item = HiddenVariable> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn with_coordinate(mut self, s: u8, value: Outcome) -> Self {
        self.quad[usize::from(s - 1)] = value;
        self
    }
}

impl fmt::Display for HiddenVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in self.quad {
            write!(f, "{}", w.sign_char())?;
        }
        Ok(())
    }
}

impl FromStr for HiddenVariable {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || GameError::InvalidHiddenVariable(s.to_string());
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 4 {
            return Err(bad());
        }
        let mut quad = [Outcome::Plus; 4];
        for (slot, c) in quad.iter_mut().zip(chars) {
            *slot = match c {
                '+' => Outcome::Plus,
                '-' => Outcome::Minus,
                _ => return Err(bad()),
            };
        }
        Ok(HiddenVariable { quad })
    }
}

impl TryFrom<String> for HiddenVariable {
    type Error = GameError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HiddenVariable> for String {
    fn from(h: HiddenVariable) -> String {
        h.to_string()
    }
}

/// Four outcome-pair distributions, one per setting pair, in
/// `SettingPair::ALL` × `OutcomePair::ALL` order.
pub type PairRows = [[f64; 4]; 4];

/// The CHSH odds table `p(ω^A, ω^B | θ^A, θ^B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChshTable {
    mu: f64,
    nu: f64,
    entries: PairRows,
}

impl Default for ChshTable {
    fn default() -> Self {
        let sqrt2 = std::f64::consts::SQRT_2;
        Self::with_params((2.0 - sqrt2) / 8.0, (2.0 + sqrt2) / 8.0)
            .expect("canonical parameters are valid")
    }
}

impl ChshTable {
    /// Equal outcomes get `mu` and unequal outcomes `nu`, except under
    /// setting `(1,4)` where the roles swap.
    pub fn with_params(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && nu > 0.0) || (2.0 * mu + 2.0 * nu - 1.0).abs() > 1e-12 {
            return Err(GameError::InvalidDistribution(format!(
                "table parameters mu={mu}, nu={nu} must be positive with 2mu + 2nu = 1"
            )));
        }
        let mut entries = [[0.0; 4]; 4];
        for u in SettingPair::ALL {
            let swapped = u == SettingPair::ALL[1];
            for pair in OutcomePair::ALL {
                let equal_gets_mu = pair.is_equal() != swapped;
                entries[u.index()][pair.index()] = if equal_gets_mu { mu } else { nu };
            }
        }
        Ok(ChshTable { mu, nu, entries })
    }

    /// The canonical table with `mu` and `nu` exchanged in every column.
    pub fn swapped(&self) -> Self {
        Self::with_params(self.nu, self.mu).expect("swap preserves validity")
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rows(&self) -> &PairRows {
        &self.entries
    }

    pub fn row(&self, u: SettingPair) -> [f64; 4] {
        self.entries[u.index()]
    }

    /// `p(a, b | u)`.
    pub fn odds(&self, a: Outcome, b: Outcome, u: SettingPair) -> f64 {
        self.entries[u.index()][OutcomePair::new(a, b).index()]
    }

    /// `p(a | s)` computed as `Σ_{b'} p(a, b' | s, t)` for the given `t`.
    pub fn marginal_odds_via(&self, a: Outcome, s: SettingA, t: SettingB) -> f64 {
        let u = SettingPair::from_parts(s, t);
        self.odds(a, Outcome::Plus, u) + self.odds(a, Outcome::Minus, u)
    }

    /// `p(a | s)`; independent of the B-side setting used to compute it.
    pub fn marginal_odds(&self, a: Outcome, s: SettingA) -> f64 {
        let via3 = self.marginal_odds_via(a, s, SettingB::THREE);
        debug_assert_eq!(via3, self.marginal_odds_via(a, s, SettingB::FOUR));
        via3
    }

    /// `p(b | a, s, t) = p(a, b | s, t) / p(a | s)`.
    pub fn conditional_odds(&self, b: Outcome, a: Outcome, u: SettingPair) -> f64 {
        self.odds(a, b, u) / self.marginal_odds(a, u.a)
    }

    /// `C(s,t) = Σ_{a,b} a·b·p(a,b|s,t)`.
    pub fn correlation(&self, u: SettingPair) -> f64 {
        OutcomePair::ALL
            .iter()
            .map(|p| p.product() * self.entries[u.index()][p.index()])
            .sum()
    }

    /// `[C(1,3), C(1,4), C(2,3), C(2,4)]`.
    pub fn correlations(&self) -> [f64; 4] {
        SettingPair::ALL.map(|u| self.correlation(u))
    }
}

/// `C(1,3) − C(1,4) + C(2,3) + C(2,4)`.
pub fn chsh_combination(c: [f64; 4]) -> f64 {
    c[0] - c[1] + c[2] + c[3]
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn u(a: u8, b: u8) -> SettingPair {
        SettingPair::new(a, b).unwrap()
    }

    #[test]
    fn outcome_negation_is_involution() {
        for w in Outcome::ALL {
            assert_eq!(-(-w), w);
            assert_ne!(-w, w);
        }
        assert!(Outcome::new(0).is_err());
    }

    #[test]
    fn settings_reject_out_of_range() {
        assert_eq!(SettingA::new(3), Err(GameError::InvalidSetting(3)));
        assert_eq!(SettingB::new(2), Err(GameError::InvalidSetting(2)));
        assert!(SettingPair::new(2, 5).is_err());
        for (i, p) in SettingPair::ALL.iter().enumerate() {
            assert_eq!(p.index(), i);
        }
    }

    #[test]
    fn hidden_variables_are_sixteen_distinct_quadruples() {
        let all: Vec<_> = HiddenVariable::all().collect();
        assert_eq!(all.len(), 16);
        for (i, h) in all.iter().enumerate() {
            assert_eq!(h.index(), i);
            assert_eq!(h.to_string().parse::<HiddenVariable>().unwrap(), *h);
        }
        let h: HiddenVariable = "+-+-".parse().unwrap();
        assert_eq!(h.project(2).unwrap(), Outcome::Minus);
        assert_eq!(h.project(3).unwrap(), Outcome::Plus);
        assert!(h.project(5).is_err());
        assert!("++".parse::<HiddenVariable>().is_err());
        assert!("++x+".parse::<HiddenVariable>().is_err());
    }

    #[test]
    fn table_parameters() {
        let t = ChshTable::default();
        assert!((t.mu() - (2.0 - SQRT2) / 8.0).abs() < 1e-17);
        assert!((2.0 * t.mu() + 2.0 * t.nu() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odds_match_table_layout() {
        let t = ChshTable::default();
        let (p, m) = (Outcome::Plus, Outcome::Minus);
        assert_eq!(t.odds(p, m, u(1, 4)), t.mu());
        assert!((t.odds(p, m, u(1, 4)) - 0.0732233).abs() < 1e-7);
        assert_eq!(t.odds(p, p, u(1, 3)), t.mu());
        assert_eq!(t.odds(p, p, u(1, 4)), t.nu());
        assert_eq!(t.odds(m, p, u(2, 4)), t.nu());
        for s in SettingPair::ALL {
            let total: f64 = t.row(s).iter().sum();
            assert!((total - 1.0).abs() < 1e-15);
            assert!(t.row(s).iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn marginals_are_one_half_either_way() {
        let t = ChshTable::default();
        for a in Outcome::ALL {
            for s in SettingA::ALL {
                let via3 = t.marginal_odds_via(a, s, SettingB::THREE);
                let via4 = t.marginal_odds_via(a, s, SettingB::FOUR);
                assert_eq!(via3, via4);
                assert!((t.marginal_odds(a, s) - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditional_odds_examples() {
        let t = ChshTable::default();
        let (p, m) = (Outcome::Plus, Outcome::Minus);
        assert!((t.conditional_odds(m, p, u(1, 4)) - 0.1464466).abs() < 1e-7);
        assert!((t.conditional_odds(p, p, u(1, 3)) - 2.0 * t.mu()).abs() < 1e-15);
        for s in SettingPair::ALL {
            for a in Outcome::ALL {
                let total = t.conditional_odds(p, a, s) + t.conditional_odds(m, a, s);
                assert!((total - 1.0).abs() < 1e-15);
                for b in Outcome::ALL {
                    let joint = t.conditional_odds(b, a, s) * t.marginal_odds(a, s.a);
                    assert!((joint - t.odds(a, b, s)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn correlations_and_tsirelson_value() {
        let t = ChshTable::default();
        let c = t.correlations();
        let r = 1.0 / SQRT2;
        for (got, sign) in c.iter().zip([-1.0, 1.0, -1.0, -1.0]) {
            assert!((got - sign * r).abs() < 1e-12);
        }
        assert!((chsh_combination(c) + 2.0 * SQRT2).abs() < 1e-12);
    }
}
