mod common;

use chsh_core::games::{self, RunOptions};
use chsh_core::gtp::run_predictive_game;
use chsh_core::strategies::{
    ForcingScientist, IidReality, IndependentLhv, QuantumNature, SettingBlind,
};
use chsh_core::{
    BettingDistribution, ChshTable, FillRule, PredictiveGame, SettingPair, SettingPolicy,
};

fn dist(w: &[f64]) -> BettingDistribution {
    BettingDistribution::new(w.to_vec()).unwrap()
}

#[test]
fn predictive_capital_matches_closed_form() {
    for (odds, law) in [
        (vec![0.5, 0.5], vec![0.8, 0.2]),
        (vec![0.2, 0.3, 0.5], vec![0.2, 0.3, 0.5]),
        (vec![0.1, 0.2, 0.3, 0.4], vec![0.25; 4]),
    ] {
        let odds = dist(&odds);
        let mut game = PredictiveGame::new(odds.clone(), false);
        for (i, w) in IidReality::new(&dist(&law), 17).take(10_000).enumerate() {
            game.play(w).unwrap();
            if i % 97 == 0 || i == 9_999 {
                let expected = common::kt_log_capital(game.counts().counts(), odds.weights());
                let got = game.capital().log_value();
                assert!(
                    (got - expected).abs() <= 1e-9,
                    "n={} got {got} expected {expected}",
                    i + 1
                );
            }
        }
    }
}

#[test]
fn constant_sequence_lower_bound() {
    let odds = dist(&[0.5, 0.5]);
    let steps = run_predictive_game(&odds, std::iter::repeat(0), 2_000).unwrap();
    for s in &steps {
        let n = s.round as f64;
        let k = s.capital.log_value();
        assert!(
            k >= n * std::f64::consts::LN_2 - 0.5 * n.ln() - 2.0,
            "n={n}"
        );
        let exact = common::kt_log_capital(s.counts.counts(), odds.weights());
        assert!((k - exact).abs() < 1e-9);
    }
}

#[test]
fn null_reality_ends_below_one() {
    let odds = dist(&[0.5, 0.5]);
    let steps = run_predictive_game(&odds, IidReality::new(&odds, 1), 100_000).unwrap();
    let last = steps.last().unwrap();
    assert!(last.capital.log_value() < 1.0);
    let exact = common::kt_log_capital(last.counts.counts(), odds.weights());
    assert!((last.capital.log_value() - exact).abs() < 1e-8);
}

#[test]
fn forcing_rate_tracks_kl() {
    let p = [0.5, 0.5];
    let r = [0.7, 0.3];
    let mut game = PredictiveGame::new(dist(&p), false);
    for w in IidReality::new(&dist(&r), 9).take(100_000) {
        game.play(w).unwrap();
    }
    let rate = game.capital().log_value() / 1e5;
    let d = common::kl(&r, &p);
    assert!((rate - d).abs() <= 0.1 * d, "rate {rate} vs {d}");
}

/// Per-context forcing capital: `ln K^AB` is the sum over setting pairs of
/// the add-half capital of that context's outcome counts against the table row.
fn closed_capital_matches_per_context_kt(mut nature: impl chsh_core::ClosedNature) {
    let table = ChshTable::default();
    let mut scientist = ForcingScientist::new(4, SettingPolicy::Uniform);
    let mut worst = 0.0f64;
    let opts = RunOptions::new(10_000).stride(10_000);
    games::run_closed(
        &table,
        &mut scientist,
        &mut nature,
        &opts,
        &mut |game, _| {
            if game.round() % 50 != 0 {
                return;
            }
            let context = game.counts().pairs().context();
            let expected: f64 = SettingPair::ALL
                .iter()
                .map(|&u| common::kt_log_capital(&context.row(u), &table.row(u)))
                .sum();
            worst = worst.max((game.log_k_ab().log_value() - expected).abs());
        },
    )
    .unwrap();
    assert!(worst <= 1e-9, "worst gap {worst}");
}

#[test]
fn forcing_scientist_is_per_context_kt_quantum() {
    closed_capital_matches_per_context_kt(QuantumNature::quantum(
        ChshTable::default(),
        FillRule::Uniform,
        4,
    ));
}

#[test]
fn forcing_scientist_is_per_context_kt_independent() {
    closed_capital_matches_per_context_kt(SettingBlind(IndependentLhv::uniform(4)));
}
