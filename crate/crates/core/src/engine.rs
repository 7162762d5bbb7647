//! The CFTM execution loop.
//!
//! One configuration is carried through the run: a tape, a head and a
//! membership value for every state. Each step collects the active
//! transitions for the symbol under the head, assigns successor values with
//! F1, merges colliding candidates with F2, writes the F3 symbol and moves the
//! head by the F4 direction.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{resolve_f3, resolve_f4, ChoiceStrategy, F1Strategy, F2Strategy};
use crate::machine::{Direction, Machine, Rule, StateId, SymbolId};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaltMode {
    /// Halt once the head reads a blank, or earlier if nothing is active.
    ConsumeInput,
    /// Halt only when no transition is active.
    Quiescent,
}

impl fmt::Display for HaltMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltMode::ConsumeInput => "consume-input",
            HaltMode::Quiescent => "quiescent",
        })
    }
}

impl FromStr for HaltMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consume-input" => Ok(HaltMode::ConsumeInput),
            "quiescent" => Ok(HaltMode::Quiescent),
            _ => Err(Error::Config(format!("unknown halt mode `{s}`"))),
        }
    }
}

/// What happens to states no active transition points at.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InactivePolicy {
    /// Their membership drops to 0.
    #[default]
    Reset,
    /// They keep their previous membership.
    Persist,
}

impl fmt::Display for InactivePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InactivePolicy::Reset => "reset",
            InactivePolicy::Persist => "persist",
        })
    }
}

impl FromStr for InactivePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reset" => Ok(InactivePolicy::Reset),
            "persist" => Ok(InactivePolicy::Persist),
            _ => Err(Error::Config(format!("unknown inactive policy `{s}`"))),
        }
    }
}

macro_rules! serialize_display {
    ($($t:ty),*) => {$(
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
    )*};
}
serialize_display!(HaltMode, InactivePolicy, HaltReason);

/// The resolution functions plus halting controls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionConfig {
    pub f1: F1Strategy,
    pub f2: F2Strategy,
    pub f3: ChoiceStrategy,
    pub f4: ChoiceStrategy,
    /// F2 used for the acceptance degree; `None` reuses `f2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_f2: Option<F2Strategy>,
    pub halt: HaltMode,
    pub max_steps: u64,
    pub inactive: InactivePolicy,
}

impl Default for ResolutionConfig {
    fn default() -> Self {
        ResolutionConfig {
            f1: F1Strategy::GMean,
            f2: F2Strategy::GMean,
            f3: ChoiceStrategy::MaxWeight,
            f4: ChoiceStrategy::MaxWeight,
            acceptance_f2: None,
            halt: HaltMode::ConsumeInput,
            max_steps: DEFAULT_MAX_STEPS,
            inactive: InactivePolicy::Reset,
        }
    }
}

impl ResolutionConfig {
    pub fn acceptance_strategy(&self) -> &F2Strategy {
        self.acceptance_f2.as_ref().unwrap_or(&self.f2)
    }
}

/// Single tape with a leftmost cell, unbounded to the right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tape {
    cells: Vec<SymbolId>,
    head: usize,
    blank: SymbolId,
}

impl Tape {
    pub fn new(input: Vec<SymbolId>, blank: SymbolId) -> Self {
        Tape { cells: input, head: 0, blank }
    }

    pub fn head(&self) -> usize {
        self.head
    }

    /// Cells written so far; everything after reads as blank.
    pub fn cells(&self) -> &[SymbolId] {
        &self.cells
    }

    pub fn read(&self) -> SymbolId {
        self.cells.get(self.head).copied().unwrap_or(self.blank)
    }

    pub fn write(&mut self, symbol: SymbolId) {
        if self.head >= self.cells.len() {
            if symbol == self.blank {
                return;
            }
            self.cells.resize(self.head + 1, self.blank);
        }
        self.cells[self.head] = symbol;
    }

    /// Moves the head. Returns `false` (and stays put) on a left move from
    /// cell 0.
    pub fn shift(&mut self, direction: Direction) -> bool {
        match direction {
            Direction::Left if self.head == 0 => false,
            Direction::Left => {
                self.head -= 1;
                true
            }
            Direction::Stay => true,
            Direction::Right => {
                self.head += 1;
                true
            }
        }
    }
}

/// Instantaneous description: tape, head, per-state membership and step.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub tape: Tape,
    /// Indexed by state declaration order.
    pub mv: Vec<f64>,
    pub t: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveEntry {
    /// Index into [`Machine::rules`].
    pub index: usize,
    pub rule: Rule,
    pub f1: f64,
    pub predecessor_mv: f64,
}

/// Transitions reading the current symbol whose source has nonzero
/// membership, each paired with its F1 value.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveTransitionSet {
    pub read: SymbolId,
    pub entries: Vec<ActiveEntry>,
}

impl ActiveTransitionSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Several candidates collided on one state and F2 merged them.
#[derive(Clone, Debug, PartialEq)]
pub struct F2Event {
    pub state: StateId,
    pub candidates: Vec<f64>,
    pub resolved: f64,
}

/// Log of one step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// Step index before the move.
    pub t: u64,
    pub head: usize,
    pub read: SymbolId,
    pub active: Vec<ActiveEntry>,
    pub f2_events: Vec<F2Event>,
    pub write: SymbolId,
    pub direction: Direction,
    /// Membership vector after the step.
    pub mv: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HaltReason {
    NoActiveTransitions,
    InputConsumed,
    StepBudget,
    HeadUnderflow,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltReason::NoActiveTransitions => "no-active-transitions",
            HaltReason::InputConsumed => "input-consumed",
            HaltReason::StepBudget => "step-budget",
            HaltReason::HeadUnderflow => "head-underflow",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Advanced(TraceRecord),
    /// The configuration was left unchanged, except that on
    /// [`HaltReason::HeadUnderflow`] the resolved symbol has been written.
    Halted { reason: HaltReason, record: Option<TraceRecord> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub config: Configuration,
    pub halt_reason: HaltReason,
    pub acceptance_degree: f64,
    pub accepted: bool,
    pub trace: Vec<TraceRecord>,
}

impl RunResult {
    pub fn steps(&self) -> u64 {
        self.config.t
    }

    /// `(state, mv)` for every final state with nonzero membership.
    pub fn nonzero_finals<'m>(&self, machine: &'m Machine) -> Vec<(&'m str, f64)> {
        nonzero_final_mvs(machine, &self.config)
            .map(|(q, mv)| (machine.state_name(q), mv))
            .collect()
    }
}

/// Writes the input from cell 0, puts the head there and loads the start
/// memberships.
pub fn initialize<S: AsRef<str>>(machine: &Machine, input: &[S]) -> Result<Configuration> {
    let cells = machine.encode_input(input)?;
    Ok(Configuration {
        tape: Tape::new(cells, machine.blank()),
        mv: machine.initial_mv().to_vec(),
        t: 0,
    })
}

pub fn active_transitions(machine: &Machine, config: &Configuration, f1: &F1Strategy) -> ActiveTransitionSet {
    let read = config.tape.read();
    let entries = machine
        .rules_reading(read)
        .iter()
        .filter_map(|&index| {
            let rule = machine.rules()[index];
            let mu = config.mv[rule.source.0];
            (mu != 0.0).then(|| ActiveEntry {
                index,
                rule,
                f1: f1.apply(mu, rule.weight, config.t),
                predecessor_mv: mu,
            })
        })
        .collect();
    ActiveTransitionSet { read, entries }
}

/// Performs one move in place.
pub fn step(machine: &Machine, config: &mut Configuration, resolution: &ResolutionConfig) -> Step {
    let active = active_transitions(machine, config, &resolution.f1);
    if active.is_empty() {
        return Step::Halted { reason: HaltReason::NoActiveTransitions, record: None };
    }

    let mut candidates: Vec<Vec<f64>> = vec![Vec::new(); machine.num_states()];
    for e in &active.entries {
        candidates[e.rule.target.0].push(e.f1);
    }
    let mut mv = match resolution.inactive {
        InactivePolicy::Reset => vec![0.0; machine.num_states()],
        InactivePolicy::Persist => config.mv.clone(),
    };
    let mut f2_events = Vec::new();
    for (q, cands) in candidates.into_iter().enumerate() {
        match cands.len() {
            0 => {}
            1 => mv[q] = cands[0],
            _ => {
                let resolved = resolution.f2.resolve(&cands);
                mv[q] = resolved;
                f2_events.push(F2Event { state: StateId(q), candidates: cands, resolved });
            }
        }
    }

    let write = resolve_f3(resolution.f3, &active).expect("active set is non-empty");
    let direction = resolve_f4(resolution.f4, &active).expect("active set is non-empty");
    let head = config.tape.head();
    config.tape.write(write);

    let moved = config.tape.shift(direction);
    let mut record = TraceRecord {
        t: config.t,
        head,
        read: active.read,
        active: active.entries,
        f2_events,
        write,
        direction,
        mv,
    };
    if !moved {
        record.mv = config.mv.clone();
        return Step::Halted { reason: HaltReason::HeadUnderflow, record: Some(record) };
    }
    config.mv.clone_from(&record.mv);
    config.t += 1;
    Step::Advanced(record)
}

fn nonzero_final_mvs<'a>(machine: &'a Machine, config: &'a Configuration) -> impl Iterator<Item = (StateId, f64)> + 'a {
    config
        .mv
        .iter()
        .enumerate()
        .map(|(i, &v)| (StateId(i), v))
        .filter(move |&(q, v)| machine.is_final(q) && v != 0.0)
}

/// F2 over the nonzero final-state memberships; 0 if there are none.
pub fn acceptance_degree(machine: &Machine, config: &Configuration, f2: &F2Strategy) -> f64 {
    let values: Vec<f64> = nonzero_final_mvs(machine, config).map(|(_, v)| v).collect();
    f2.resolve(&values)
}

/// Runs from the initial configuration until a halt condition fires.
pub fn run<S: AsRef<str>>(machine: &Machine, input: &[S], resolution: &ResolutionConfig) -> Result<RunResult> {
    if resolution.max_steps == 0 {
        return Err(Error::Config("max-steps must be at least 1".into()));
    }
    let mut config = initialize(machine, input)?;
    let mut trace = Vec::new();

    let halt_reason = loop {
        if resolution.halt == HaltMode::ConsumeInput && config.tape.read() == machine.blank() {
            break HaltReason::InputConsumed;
        }
        if config.t >= resolution.max_steps {
            break if active_transitions(machine, &config, &resolution.f1).is_empty() {
                HaltReason::NoActiveTransitions
            } else {
                HaltReason::StepBudget
            };
        }
        match step(machine, &mut config, resolution) {
            Step::Advanced(record) => trace.push(record),
            Step::Halted { reason, record } => {
                trace.extend(record);
                break reason;
            }
        }
    };

    let degree = acceptance_degree(machine, &config, resolution.acceptance_strategy());
    Ok(RunResult {
        config,
        halt_reason,
        acceptance_degree: degree,
        accepted: degree > 0.0,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{MachineDefinition, Transition};
    use Direction::*;

    fn machine(states: &[&str], input: &[&str], tape: &[&str], trans: Vec<Transition>, start: &[(&str, f64)], finals: &[&str]) -> Machine {
        Machine::new(MachineDefinition {
            states: states.iter().map(|s| s.to_string()).collect(),
            input_alphabet: input.iter().map(|&s| s.into()).collect(),
            tape_alphabet: tape.iter().map(|&s| s.into()).collect(),
            blank: "B".into(),
            transitions: trans,
            start_states: start.iter().map(|(q, v)| (q.to_string(), *v)).collect(),
            final_states: finals.iter().map(|s| s.to_string()).collect(),
        })
        .unwrap()
    }

    /// The part of the a^n b^n c^n recognizer exercised by "abc".
    fn anbncn() -> Machine {
        machine(
            &["q0", "q1", "q2", "q3", "q4", "q5"],
            &["a", "b", "c"],
            &["a", "b", "c", "x", "y", "z", "B"],
            vec![
                Transition::new("q0", "a", "q1", "x", Right, 0.1),
                Transition::new("q1", "b", "q2", "y", Right, 0.1),
                Transition::new("q2", "c", "q3", "z", Left, 0.4),
            ],
            &[("q0", 1.0)],
            &["q3", "q5"],
        )
    }

    /// Three predecessors of q2 on `a`, with memberships 0.9, 0.5 and 0.1.
    fn fan_in() -> (Machine, Configuration) {
        let m = machine(
            &["q0", "q1", "q2", "q5"],
            &["a"],
            &["a", "b", "c", "B"],
            vec![
                Transition::new("q1", "a", "q2", "a", Right, 0.4),
                Transition::new("q0", "a", "q2", "b", Left, 0.3),
                Transition::new("q5", "a", "q2", "c", Right, 0.1),
            ],
            &[("q0", 0.5), ("q1", 0.9), ("q5", 0.1)],
            &["q2"],
        );
        let mut c = initialize(&m, &["a"]).unwrap();
        c.tape.head = 0;
        (m, c)
    }

    #[test]
    fn initialize_loads_start_memberships() {
        let m = anbncn();
        let c = initialize(&m, &["a", "b", "c"]).unwrap();
        assert_eq!(c.mv, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.tape.head(), 0);
        assert_eq!(c.t, 0);
    }

    #[test]
    fn empty_input_reads_blank() {
        let m = anbncn();
        let c = initialize::<&str>(&m, &[]).unwrap();
        assert_eq!(c.tape.read(), m.blank());
    }

    #[test]
    fn initialize_rejects_foreign_symbol() {
        let m = anbncn();
        assert!(matches!(initialize(&m, &["a", "x"]), Err(Error::InputSymbol { position: 1, .. })));
    }

    #[test]
    fn anbncn_first_step() {
        let m = anbncn();
        let mut c = initialize(&m, &["a", "b", "c"]).unwrap();
        let res = ResolutionConfig { f1: F1Strategy::Mean, ..Default::default() };
        let Step::Advanced(rec) = step(&m, &mut c, &res) else { panic!() };
        assert!((c.mv[1] - 0.55).abs() < 1e-12);
        assert_eq!(m.symbol(rec.write).as_str(), "x");
        assert_eq!(rec.direction, Right);
        assert_eq!(c.tape.head(), 1);
    }

    #[test]
    fn anbncn_run() {
        let m = anbncn();
        let res = ResolutionConfig { f1: F1Strategy::Mean, ..Default::default() };
        let r = run(&m, &["a", "b", "c"], &res).unwrap();
        assert_eq!(r.steps(), 3);
        assert_eq!(r.halt_reason, HaltReason::NoActiveTransitions);
        assert!((r.config.mv[3] - 0.3625).abs() < 1e-12);
        assert!((r.acceptance_degree - 0.3625).abs() < 1e-12);
        assert!(r.accepted);
    }

    #[test]
    fn fan_in_product_f1_values() {
        let (m, c) = fan_in();
        let set = active_transitions(&m, &c, &F1Strategy::Product);
        let mut f1: Vec<f64> = set.entries.iter().map(|e| e.f1).collect();
        f1.sort_by(f64::total_cmp);
        let want = [0.1 * 0.1, 0.5 * 0.3, 0.9 * 0.4];
        for (a, b) in f1.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn fan_in_step_merges_with_f2() {
        let (m, mut c) = fan_in();
        let res = ResolutionConfig {
            f1: F1Strategy::GMean,
            f2: F2Strategy::AMean,
            f3: ChoiceStrategy::MaxWeight,
            f4: ChoiceStrategy::Cardinality,
            ..Default::default()
        };
        let Step::Advanced(rec) = step(&m, &mut c, &res) else { panic!() };
        assert!((c.mv[2] - 0.362).abs() < 5e-3, "{}", c.mv[2]);
        assert_eq!(c.mv[0], 0.0);
        assert_eq!(rec.f2_events.len(), 1);
        assert_eq!(rec.f2_events[0].candidates.len(), 3);
        assert_eq!(m.symbol(rec.write).as_str(), "a");
        assert_eq!(rec.direction, Right);
    }

    #[test]
    fn persist_policy_keeps_untargeted_states() {
        let (m, mut c) = fan_in();
        let res = ResolutionConfig { inactive: InactivePolicy::Persist, ..Default::default() };
        step(&m, &mut c, &res);
        assert_eq!(c.mv[0], 0.5);
    }

    #[test]
    fn no_matching_transition_halts() {
        let m = anbncn();
        let mut c = initialize(&m, &["b"]).unwrap();
        let before = c.clone();
        let out = step(&m, &mut c, &ResolutionConfig::default());
        assert_eq!(out, Step::Halted { reason: HaltReason::NoActiveTransitions, record: None });
        assert_eq!(c, before);
    }

    #[test]
    fn left_at_cell_zero_halts_after_writing() {
        let m = machine(
            &["p", "q"],
            &["a"],
            &["a", "b", "B"],
            vec![Transition::new("p", "a", "q", "b", Left, 0.5)],
            &[("p", 1.0)],
            &["p"],
        );
        let r = run(&m, &["a"], &ResolutionConfig::default()).unwrap();
        assert_eq!(r.halt_reason, HaltReason::HeadUnderflow);
        assert_eq!(r.config.tape.cells(), &[m.symbol_id("b").unwrap()]);
        assert_eq!(r.config.mv, vec![1.0, 0.0]);
        assert_eq!(r.steps(), 0);
        assert_eq!(r.acceptance_degree, 1.0);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn step_budget_is_a_halt_reason() {
        let m = machine(
            &["p"],
            &["a"],
            &["a", "B"],
            vec![Transition::new("p", "a", "p", "a", Stay, 0.9)],
            &[("p", 1.0)],
            &["p"],
        );
        let res = ResolutionConfig { f1: F1Strategy::Min, max_steps: 5, ..Default::default() };
        let r = run(&m, &["a"], &res).unwrap();
        assert_eq!(r.halt_reason, HaltReason::StepBudget);
        assert_eq!(r.steps(), 5);
        assert_eq!(r.acceptance_degree, 0.9);
        assert!(run(&m, &["a"], &ResolutionConfig { max_steps: 0, ..res }).is_err());
    }

    #[test]
    fn rejecting_run_has_zero_degree() {
        let m = machine(
            &["p", "q"],
            &["a"],
            &["a", "B"],
            vec![Transition::new("p", "a", "q", "a", Right, 0.9)],
            &[("p", 1.0)],
            &["p"],
        );
        let r = run(&m, &["a"], &ResolutionConfig::default()).unwrap();
        assert_eq!(r.halt_reason, HaltReason::InputConsumed);
        assert_eq!(r.acceptance_degree, 0.0);
        assert!(!r.accepted);
    }

    #[test]
    fn acceptance_over_several_finals() {
        let m = machine(
            &["q0", "q2", "q4"],
            &["a"],
            &["a", "B"],
            vec![],
            &[("q0", 0.517), ("q2", 0.605), ("q4", 0.659)],
            &["q0", "q2", "q4"],
        );
        let c = initialize::<&str>(&m, &[]).unwrap();
        let d = acceptance_degree(&m, &c, &F2Strategy::GMean);
        assert!((d - 0.590).abs() < 1e-3, "{d}");
    }

    #[test]
    fn tape_grows_with_blanks() {
        let mut t = Tape::new(vec![SymbolId(0)], SymbolId(9));
        t.shift(Right);
        t.shift(Right);
        assert_eq!(t.read(), SymbolId(9));
        t.write(SymbolId(1));
        assert_eq!(t.cells(), &[SymbolId(0), SymbolId(9), SymbolId(1)]);
    }
}
