//! Sentinel policies that record what they were shown. The protocol must
//! hand each player only the moves made before it in the round.

use std::cell::RefCell;
use std::rc::Rc;

use chsh_core::games::{
    self, AAnnouncement, BAnnouncement, ClosedAnnouncement, ClosedView, LocalityPlayers,
    LocalityView, RunOptions,
};
use chsh_core::strategies::{
    BalancedScientistA, BalancedScientistB, ForcingScientist, LocalityExploitNature, QuantumNature,
};
use chsh_core::{
    ChshTable, ClosedNature, ClosedScientist, FillRule, HiddenVariable, HistoryMode,
    LocalityNature, Outcome, Result, ScientistA, ScientistB, SettingA, SettingPolicy,
};

#[derive(Default)]
struct Log {
    events: Vec<String>,
}

struct SentinelScientist {
    inner: ForcingScientist,
    log: Rc<RefCell<Log>>,
}

impl ClosedScientist for SentinelScientist {
    fn announce(&mut self, view: &ClosedView<'_>) -> ClosedAnnouncement {
        assert_eq!(view.counts.n(), view.round);
        assert_eq!(view.history.map(<[_]>::len), Some(view.round as usize));
        self.log
            .borrow_mut()
            .events
            .push(format!("S{}", view.round + 1));
        self.inner.announce(view)
    }
}

struct SentinelNature {
    inner: QuantumNature,
    log: Rc<RefCell<Log>>,
    announcements: Vec<ClosedAnnouncement>,
}

impl ClosedNature for SentinelNature {
    fn respond(
        &mut self,
        view: &ClosedView<'_>,
        announcement: &ClosedAnnouncement,
    ) -> Result<HiddenVariable> {
        self.log
            .borrow_mut()
            .events
            .push(format!("N{}", view.round + 1));
        self.announcements.push(announcement.clone());
        self.inner.respond(view, announcement)
    }
}

#[test]
fn closed_game_orders_scientist_before_nature() {
    let table = ChshTable::default();
    let log = Rc::new(RefCell::new(Log::default()));
    let mut scientist = SentinelScientist {
        inner: ForcingScientist::new(2, SettingPolicy::Uniform),
        log: log.clone(),
    };
    let mut nature = SentinelNature {
        inner: QuantumNature::quantum(table.clone(), FillRule::Uniform, 2),
        log: log.clone(),
        announcements: Vec::new(),
    };
    let opts = RunOptions::new(50).stride(1).history(HistoryMode::Full);
    let run =
        games::run_closed(&table, &mut scientist, &mut nature, &opts, &mut |_, _| {}).unwrap();

    let expected: Vec<String> = (1..=50)
        .flat_map(|n| [format!("S{n}"), format!("N{n}")])
        .collect();
    assert_eq!(log.borrow().events, expected);
    // Nature saw exactly the announcement that was scored.
    for (record, seen) in run
        .game
        .history()
        .unwrap()
        .iter()
        .zip(&nature.announcements)
    {
        assert_eq!(&record.announcement, seen);
    }
}

struct SentinelA {
    inner: BalancedScientistA,
    log: Rc<RefCell<Log>>,
}

impl ScientistA for SentinelA {
    fn announce(&mut self, view: &LocalityView<'_>) -> AAnnouncement {
        self.log
            .borrow_mut()
            .events
            .push(format!("SA{}", view.round + 1));
        self.inner.announce(view)
    }
}

struct SentinelB {
    inner: BalancedScientistB,
    log: Rc<RefCell<Log>>,
}

impl ScientistB for SentinelB {
    fn announce(
        &mut self,
        view: &LocalityView<'_>,
        s: SettingA,
        omega_a: Outcome,
    ) -> BAnnouncement {
        self.log
            .borrow_mut()
            .events
            .push(format!("SB{}", view.round + 1));
        self.inner.announce(view, s, omega_a)
    }
}

struct SentinelLocalityNature {
    inner: LocalityExploitNature,
    log: Rc<RefCell<Log>>,
}

impl LocalityNature for SentinelLocalityNature {
    fn respond_a(&mut self, view: &LocalityView<'_>, a: &AAnnouncement) -> Result<Outcome> {
        self.log
            .borrow_mut()
            .events
            .push(format!("NA{}", view.round + 1));
        self.inner.respond_a(view, a)
    }

    fn respond_b(
        &mut self,
        view: &LocalityView<'_>,
        a: &AAnnouncement,
        omega_a: Outcome,
        b: &BAnnouncement,
    ) -> Result<HiddenVariable> {
        self.log
            .borrow_mut()
            .events
            .push(format!("NB{}", view.round + 1));
        self.inner.respond_b(view, a, omega_a, b)
    }
}

#[test]
fn locality_game_move_order() {
    let table = ChshTable::default();
    let log = Rc::new(RefCell::new(Log::default()));
    let mut a = SentinelA {
        inner: BalancedScientistA::new(3, SettingPolicy::Uniform),
        log: log.clone(),
    };
    let mut b = SentinelB {
        inner: BalancedScientistB::default(),
        log: log.clone(),
    };
    let mut nature = SentinelLocalityNature {
        inner: LocalityExploitNature::new(table.clone(), 3),
        log: log.clone(),
    };
    let players = LocalityPlayers {
        scientist_a: &mut a,
        scientist_b: &mut b,
        nature: &mut nature,
    };
    let opts = RunOptions::new(30).history(HistoryMode::Full);
    let run = games::run_locality(&table, players, &opts, &mut |_| {}).unwrap();
    let expected: Vec<String> = (1..=30)
        .flat_map(|n| {
            [
                format!("SA{n}"),
                format!("NA{n}"),
                format!("SB{n}"),
                format!("NB{n}"),
            ]
        })
        .collect();
    assert_eq!(log.borrow().events, expected);
    let history = run.game.history().unwrap();
    assert_eq!(history.len(), 30);
    for r in history {
        assert_eq!(r.lambda.x_a(r.a.s), r.omega_a);
        assert_eq!(r.lambda.x_b(r.b.t), r.omega_b);
    }
}
