use proptest::prelude::*;

use chsh_core::gtp::{kt_weights, LogCapital};
use chsh_core::oracle::{self, JointDistribution};
use chsh_core::stats::{self, ContingencyCounts};
use chsh_core::{HiddenVariable, SettingPair};

fn moves() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..16, 0usize..4), 1..400)
}

fn joint() -> impl Strategy<Value = JointDistribution> {
    prop::array::uniform16(0.001f64..1.0).prop_map(|w| {
        let total: f64 = w.iter().sum();
        JointDistribution::new(w.map(|x| x / total)).unwrap()
    })
}

fn fill(moves: &[(usize, usize)]) -> ContingencyCounts {
    let mut counts = ContingencyCounts::new();
    for &(t, u) in moves {
        counts.increment(HiddenVariable::from_index(t), SettingPair::from_index(u));
    }
    counts
}

proptest! {
    #[test]
    fn kl_is_nonnegative(m in moves()) {
        let counts = fill(&m);
        let d = stats::kl_independence(&counts.empirical().unwrap());
        prop_assert!(d >= 0.0);
        prop_assert!(counts.max_cell_gap() <= (d / 2.0).sqrt() + 1e-12);
    }

    #[test]
    fn w_recursion_telescopes(m in moves()) {
        let mut counts = ContingencyCounts::new();
        let mut rec = 0.0;
        let mut prev = 0.0;
        for &(t, u) in &m {
            let (tau, u) = (HiddenVariable::from_index(t), SettingPair::from_index(u));
            counts.increment(tau, u);
            let factor = counts.log_w_factor(tau, u);
            rec += factor;
            let closed = stats::w_closed_form(&counts);
            prop_assert!((closed - prev - factor).abs() <= 1e-10);
            prev = closed;
        }
        prop_assert!((rec - prev).abs() <= 1e-8 * prev.abs().max(1.0));
    }

    #[test]
    fn marginals_stay_consistent(m in moves()) {
        let counts = fill(&m);
        prop_assert!(counts.marginals_consistent());
        prop_assert_eq!(counts.n(), m.len() as u64);
    }

    #[test]
    fn chsh_is_linear(a in joint(), b in joint(), alpha in 0.0f64..=1.0) {
        let mixed = oracle::chsh_value(&a.mix(alpha, &b));
        let lin = alpha * oracle::chsh_value(&a) + (1.0 - alpha) * oracle::chsh_value(&b);
        prop_assert!((mixed - lin).abs() <= 1e-12);
    }

    #[test]
    fn classical_bound(d in joint()) {
        prop_assert!(oracle::chsh_value(&d).abs() <= 2.0 + 1e-12);
        prop_assert!(!oracle::joint_witness(&d.pair_marginals()).infeasible);
    }

    #[test]
    fn kt_weights_are_a_distribution(counts in prop::collection::vec(0u64..1000, 2..8)) {
        let w = kt_weights(&counts).unwrap();
        prop_assert!(w.iter().all(|&x| x > 0.0 && x < 1.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn capital_stays_finite(factors in prop::collection::vec(-5.0f64..5.0, 1..200), thrift in any::<bool>()) {
        let mut k = if thrift { LogCapital::with_thrift() } else { LogCapital::new() };
        for f in factors {
            k.apply(f).unwrap();
            prop_assert!(k.total_log().is_finite());
        }
    }

    #[test]
    fn hidden_variable_text_round_trip(i in 0usize..16) {
        let h = HiddenVariable::from_index(i);
        prop_assert_eq!(h.to_string().parse::<HiddenVariable>().unwrap(), h);
    }
}
