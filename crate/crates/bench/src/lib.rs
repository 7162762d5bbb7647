//! Machines used by the benchmarks.

use cftm::{Direction, Machine, MachineDefinition, Transition};

/// Two states that each step to both states on `a`, always moving right.
/// The ID tree for `a^n` has `2^(n+1) - 1` nodes.
pub fn branching_machine() -> Machine {
    let trans = [("p", "p", 0.9), ("p", "q", 0.8), ("q", "p", 0.7), ("q", "q", 0.6)]
        .into_iter()
        .map(|(s, t, w)| Transition::new(s, "a", t, "a", Direction::Right, w))
        .collect();
    Machine::new(MachineDefinition {
        states: vec!["p".into(), "q".into()],
        input_alphabet: vec!["a".into()],
        tape_alphabet: vec!["a".into(), "B".into()],
        blank: "B".into(),
        transitions: trans,
        start_states: vec![("p".into(), 1.0)],
        final_states: vec!["p".into(), "q".into()],
    })
    .expect("valid machine")
}

pub fn input(n: usize) -> Vec<&'static str> {
    vec!["a"; n]
}
