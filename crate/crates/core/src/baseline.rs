//! Conventional fuzzy Turing machine evaluation over a tree of instantaneous
//! descriptions.
//!
//! Every nondeterministic choice spawns a child ID with its own tape copy.
//! A path's degree is the t-norm fold of the transition weights along it, and
//! the truth degree of the input is the maximum over accepting leaves. The
//! tree is expanded breadth-first under a depth bound and a node budget.

use std::collections::VecDeque;

use crate::engine::{HaltMode, Tape};
use crate::error::{Error, Result};
use crate::kernel::F1Strategy;
use crate::machine::{Machine, StateId};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// Depth bound used when none is given: `10·|input| + 10`.
pub fn default_depth_bound(input_len: usize) -> usize {
    10 * input_len + 10
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineOptions {
    /// Path-weight composition. Must be stationary.
    pub tnorm: F1Strategy,
    pub halt: HaltMode,
    /// `None` selects [`default_depth_bound`].
    pub depth_bound: Option<usize>,
    pub node_budget: usize,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            tnorm: F1Strategy::Min,
            halt: HaltMode::ConsumeInput,
            depth_bound: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdNode {
    pub state: StateId,
    pub tape: Tape,
    pub degree: f64,
    pub depth: usize,
    /// Index of the parent in the evaluation arena.
    pub parent: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub children: Vec<IdNode>,
    /// Children dropped because they would move left off cell 0.
    pub pruned: usize,
}

/// One child per transition matching the node's state and scanned symbol.
pub fn expand(machine: &Machine, node: &IdNode, node_index: usize, tnorm: &F1Strategy) -> Expansion {
    let read = node.tape.read();
    let mut out = Expansion { children: Vec::new(), pruned: 0 };
    for &i in machine.rules_reading(read) {
        let rule = machine.rules()[i];
        if rule.source != node.state {
            continue;
        }
        let mut tape = node.tape.clone();
        tape.write(rule.write);
        if !tape.shift(rule.direction) {
            out.pruned += 1;
            continue;
        }
        out.children.push(IdNode {
            state: rule.target,
            tape,
            degree: tnorm.apply(node.degree, rule.weight, 0),
            depth: node.depth + 1,
            parent: Some(node_index),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeResult {
    /// Maximum degree over accepting leaves, 0 when there are none. A lower
    /// bound when `bound_hit` is set.
    pub truth_degree: f64,
    pub accepting_leaves: usize,
    pub nodes: usize,
    pub pruned: usize,
    pub max_depth: usize,
    /// The depth bound or the node budget stopped the expansion.
    pub bound_hit: bool,
    /// States from a root to the best accepting leaf.
    pub best_path: Vec<StateId>,
}

pub fn evaluate<S: AsRef<str>>(machine: &Machine, input: &[S], opts: &BaselineOptions) -> Result<TreeResult> {
    if !opts.tnorm.is_stationary() {
        return Err(Error::Strategy(format!("{} is not a stationary t-norm", opts.tnorm)));
    }
    let cells = machine.encode_input(input)?;
    let depth_bound = opts.depth_bound.unwrap_or_else(|| default_depth_bound(cells.len()));
    if depth_bound == 0 || opts.node_budget == 0 {
        return Err(Error::Config("depth bound and node budget must be at least 1".into()));
    }

    let tape = Tape::new(cells, machine.blank());
    let mut arena: Vec<IdNode> = machine
        .initial_mv()
        .iter()
        .enumerate()
        .filter(|&(_, &mv)| mv > 0.0)
        .map(|(q, &mv)| IdNode { state: StateId(q), tape: tape.clone(), degree: mv, depth: 0, parent: None })
        .collect();
    arena.truncate(opts.node_budget);
    let mut queue: VecDeque<usize> = (0..arena.len()).collect();

    let mut result = TreeResult {
        truth_degree: 0.0,
        accepting_leaves: 0,
        nodes: 0,
        pruned: 0,
        max_depth: 0,
        bound_hit: false,
        best_path: Vec::new(),
    };
    let mut best_leaf: Option<usize> = None;

    'bfs: while let Some(i) = queue.pop_front() {
        let node = &arena[i];
        result.max_depth = result.max_depth.max(node.depth);

        let consumed = opts.halt == HaltMode::ConsumeInput && node.tape.read() == machine.blank();
        let expansion = if consumed {
            Expansion { children: Vec::new(), pruned: 0 }
        } else {
            expand(machine, node, i, &opts.tnorm)
        };
        result.pruned += expansion.pruned;

        if expansion.children.is_empty() {
            if machine.is_final(node.state) {
                result.accepting_leaves += 1;
                if best_leaf.is_none() || node.degree > result.truth_degree {
                    result.truth_degree = node.degree;
                    best_leaf = Some(i);
                }
            }
            continue;
        }
        if node.depth >= depth_bound {
            result.bound_hit = true;
            continue;
        }
        for child in expansion.children {
            if arena.len() >= opts.node_budget {
                result.bound_hit = true;
                break 'bfs;
            }
            queue.push_back(arena.len());
            arena.push(child);
        }
    }

    result.nodes = arena.len();
    let mut cursor = best_leaf;
    while let Some(i) = cursor {
        result.best_path.push(arena[i].state);
        cursor = arena[i].parent;
    }
    result.best_path.reverse();
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthPoint {
    pub length: usize,
    pub nodes: usize,
    pub bound_hit: bool,
}

/// Input of length `n` that cycles through the input alphabet in declaration
/// order.
pub fn cyclic_input(machine: &Machine, n: usize) -> Vec<String> {
    let alphabet = &machine.definition().input_alphabet;
    if alphabet.is_empty() {
        return Vec::new();
    }
    (0..n).map(|i| alphabet[i % alphabet.len()].as_str().to_owned()).collect()
}

/// Tree size for each input length, using [`cyclic_input`] inputs.
pub fn count_growth(machine: &Machine, lengths: &[usize], opts: &BaselineOptions) -> Result<Vec<GrowthPoint>> {
    lengths
        .iter()
        .map(|&length| {
            let r = evaluate(machine, &cyclic_input(machine, length), opts)?;
            Ok(GrowthPoint { length, nodes: r.nodes, bound_hit: r.bound_hit })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Direction::*, MachineDefinition, Transition};

    fn machine(trans: Vec<Transition>, states: &[&str], finals: &[&str]) -> Machine {
        Machine::new(MachineDefinition {
            states: states.iter().map(|s| s.to_string()).collect(),
            input_alphabet: vec!["0".into(), "1".into()],
            tape_alphabet: vec!["0".into(), "1".into(), "B".into()],
            blank: "B".into(),
            transitions: trans,
            start_states: vec![(states[0].to_string(), 1.0)],
            final_states: finals.iter().map(|s| s.to_string()).collect(),
        })
        .unwrap()
    }

    fn root(m: &Machine, input: &[&str]) -> IdNode {
        IdNode {
            state: StateId(0),
            tape: Tape::new(m.encode_input(input).unwrap(), m.blank()),
            degree: 1.0,
            depth: 0,
            parent: None,
        }
    }

    #[test]
    fn two_moves_from_the_root() {
        let m = machine(
            vec![
                Transition::new("q0", "0", "q1", "0", Right, 0.5),
                Transition::new("q0", "0", "q4", "0", Left, 0.6),
            ],
            &["q0", "q1", "q4"],
            &[],
        );
        // The root sits on cell 1 so the left move stays on the tape.
        let mut node = root(&m, &["1", "0", "1", "0", "1"]);
        node.tape.shift(Right);
        let e = expand(&m, &node, 0, &F1Strategy::Min);
        assert_eq!(e.children.len(), 2);
        assert_eq!(e.children[0].state, StateId(1));
        assert_eq!(e.children[0].degree, 0.5);
        assert_eq!(e.children[0].tape.head(), 2);
        assert_eq!(e.children[1].degree, 0.6);
        assert_eq!(e.children[1].tape.head(), 0);
        assert_eq!(e.children[1].parent, Some(0));

        // From cell 0 the left move is pruned.
        let e = expand(&m, &root(&m, &["0"]), 0, &F1Strategy::Min);
        assert_eq!(e.children.len(), 1);
        assert_eq!(e.pruned, 1);
    }

    #[test]
    fn no_matching_transition_is_a_leaf() {
        let m = machine(vec![Transition::new("q0", "1", "q0", "1", Right, 1.0)], &["q0"], &[]);
        assert!(expand(&m, &root(&m, &["0"]), 0, &F1Strategy::Min).children.is_empty());
    }

    #[test]
    fn single_transition_machine() {
        let m = machine(vec![Transition::new("q0", "0", "qf", "0", Right, 0.7)], &["q0", "qf"], &["qf"]);
        let r = evaluate(&m, &["0"], &BaselineOptions::default()).unwrap();
        assert_eq!(r.truth_degree, 0.7);
        assert_eq!(r.nodes, 2);
        assert_eq!(r.best_path, vec![StateId(0), StateId(1)]);
        assert!(!r.bound_hit);
    }

    #[test]
    fn chain_under_min_and_product() {
        let m = machine(
            vec![
                Transition::new("q0", "0", "q1", "0", Right, 0.8),
                Transition::new("q1", "1", "q2", "1", Right, 0.5),
            ],
            &["q0", "q1", "q2"],
            &["q2"],
        );
        let r = evaluate(&m, &["0", "1"], &BaselineOptions::default()).unwrap();
        assert_eq!(r.truth_degree, 0.5);
        assert_eq!(r.nodes, 3);
        let opts = BaselineOptions { tnorm: F1Strategy::Product, ..Default::default() };
        assert_eq!(evaluate(&m, &["0", "1"], &opts).unwrap().truth_degree, 0.8 * 0.5);
    }

    #[test]
    fn no_accepting_leaf() {
        let m = machine(vec![Transition::new("q0", "0", "q1", "0", Right, 0.8)], &["q0", "q1"], &["q0"]);
        let r = evaluate(&m, &["0"], &BaselineOptions::default()).unwrap();
        assert_eq!(r.truth_degree, 0.0);
        assert_eq!(r.accepting_leaves, 0);
    }

    #[test]
    fn looping_machine_hits_depth_bound() {
        let m = machine(vec![Transition::new("q0", "0", "q0", "0", Stay, 0.8)], &["q0"], &["q0"]);
        let r = evaluate(&m, &["0"], &BaselineOptions::default()).unwrap();
        assert!(r.bound_hit);
        assert_eq!(r.nodes, default_depth_bound(1) + 1);
        assert_eq!(r.truth_degree, 0.0);
    }

    #[test]
    fn rejects_time_dependent_tnorm() {
        let m = machine(vec![], &["q0"], &[]);
        let opts = BaselineOptions { tnorm: F1Strategy::Switched(2), ..Default::default() };
        assert!(evaluate::<&str>(&m, &[], &opts).is_err());
    }

    #[test]
    fn growth_of_branching_and_linear_machines() {
        let branching = machine(
            vec![
                Transition::new("p", "0", "p", "0", Right, 0.9),
                Transition::new("p", "0", "q", "0", Right, 0.8),
                Transition::new("q", "0", "p", "0", Right, 0.7),
                Transition::new("q", "0", "q", "0", Right, 0.6),
            ],
            &["p", "q"],
            &["p", "q"],
        );
        let opts = BaselineOptions::default();
        let mut only_zero = branching.definition().clone();
        only_zero.input_alphabet = vec!["0".into()];
        only_zero.tape_alphabet = vec!["0".into(), "B".into()];
        let branching = Machine::new(only_zero).unwrap();
        let g = count_growth(&branching, &[0, 1, 2, 3, 6], &opts).unwrap();
        assert_eq!(g[0].nodes, 1);
        for p in &g {
            assert_eq!(p.nodes, (1usize << (p.length + 1)) - 1);
            assert!(p.nodes >= 1 << p.length);
        }

        let linear = machine(
            vec![
                Transition::new("q0", "0", "q0", "0", Right, 0.9),
                Transition::new("q0", "1", "q0", "1", Right, 0.9),
            ],
            &["q0"],
            &["q0"],
        );
        let g = count_growth(&linear, &[0, 3, 7], &opts).unwrap();
        let nodes: Vec<_> = g.iter().map(|p| p.nodes).collect();
        assert_eq!(nodes, vec![1, 4, 8]);
    }

    #[test]
    fn node_budget_trips() {
        let m = machine(
            vec![
                Transition::new("q0", "0", "q0", "0", Stay, 0.9),
                Transition::new("q0", "0", "q1", "0", Stay, 0.9),
                Transition::new("q1", "0", "q0", "0", Stay, 0.9),
                Transition::new("q1", "0", "q1", "0", Stay, 0.9),
            ],
            &["q0", "q1"],
            &["q1"],
        );
        let opts = BaselineOptions { node_budget: 1000, ..Default::default() };
        let r = evaluate(&m, &["0"], &opts).unwrap();
        assert!(r.bound_hit);
        assert_eq!(r.nodes, 1000);
    }
}
