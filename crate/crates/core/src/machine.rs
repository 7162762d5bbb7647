//! Static machine description: states, alphabets, weighted transitions and
//! the start/final state sets.
//!
//! A [`MachineDefinition`] is plain data and may be inconsistent; [`validate`]
//! lists everything wrong with it. A [`Machine`] is a definition that passed
//! validation, together with the index tables the engine and the baseline
//! evaluator use at run time.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tape-alphabet element. Any non-empty token without whitespace.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    pub fn new(token: impl Into<String>) -> Self {
        Symbol(token.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn is_well_formed(&self) -> bool {
        is_token(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol(s.to_owned())
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(char::is_whitespace)
}

/// Head movement. Encoded as -1, 0, +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "S")]
    Stay,
    #[serde(rename = "R")]
    Right,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Left, Direction::Stay, Direction::Right];

    pub fn offset(self) -> i8 {
        match self {
            Direction::Left => -1,
            Direction::Stay => 0,
            Direction::Right => 1,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Direction::Left => 'L',
            Direction::Stay => 'S',
            Direction::Right => 'R',
        }
    }

    pub fn from_letter(s: &str) -> Option<Direction> {
        match s {
            "L" => Some(Direction::Left),
            "S" => Some(Direction::Stay),
            "R" => Some(Direction::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A weighted 5-tuple `(source, read, target, write, direction)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub source: String,
    pub read: Symbol,
    pub target: String,
    pub write: Symbol,
    pub direction: Direction,
    pub weight: f64,
}

impl Transition {
    pub fn new(
        source: &str,
        read: &str,
        target: &str,
        write: &str,
        direction: Direction,
        weight: f64,
    ) -> Self {
        Transition {
            source: source.to_owned(),
            read: read.into(),
            target: target.to_owned(),
            write: write.into(),
            direction,
            weight,
        }
    }

    fn key(&self) -> (&str, &Symbol, &str, &Symbol, Direction) {
        (&self.source, &self.read, &self.target, &self.write, self.direction)
    }
}

/// The unvalidated machine description.
///
/// `states` order fixes the index of every state in membership vectors, and
/// `tape_alphabet` order is the final tie-break between written symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineDefinition {
    pub states: Vec<String>,
    pub input_alphabet: Vec<Symbol>,
    pub tape_alphabet: Vec<Symbol>,
    pub blank: Symbol,
    pub transitions: Vec<Transition>,
    /// Start states with their initial membership value.
    pub start_states: Vec<(String, f64)>,
    pub final_states: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    NoStates,
    InvalidName,
    DuplicateState,
    DuplicateSymbol,
    InputNotInTape,
    BlankNotInTape,
    BlankInInput,
    NoStartState,
    DuplicateStart,
    StartMvRange,
    UnknownState,
    UnknownSymbol,
    WeightRange,
    DuplicateTransition,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::NoStates => "NO_STATES",
            ViolationCode::InvalidName => "INVALID_NAME",
            ViolationCode::DuplicateState => "DUPLICATE_STATE",
            ViolationCode::DuplicateSymbol => "DUPLICATE_SYMBOL",
            ViolationCode::InputNotInTape => "INPUT_NOT_IN_TAPE",
            ViolationCode::BlankNotInTape => "BLANK_NOT_IN_TAPE",
            ViolationCode::BlankInInput => "BLANK_IN_INPUT",
            ViolationCode::NoStartState => "NO_START_STATE",
            ViolationCode::DuplicateStart => "DUPLICATE_START",
            ViolationCode::StartMvRange => "START_MV_RANGE",
            ViolationCode::UnknownState => "UNKNOWN_STATE",
            ViolationCode::UnknownSymbol => "UNKNOWN_SYMBOL",
            ViolationCode::WeightRange => "WEIGHT_RANGE",
            ViolationCode::DuplicateTransition => "DUPLICATE_TRANSITION",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which part of the definition a violation is about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Machine,
    State(usize),
    InputSymbol(usize),
    TapeSymbol(usize),
    Blank,
    Start(usize),
    Final(usize),
    Transition(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: Location,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Lists every invariant violation of `def`. An empty list means the
/// definition is valid.
pub fn validate(def: &MachineDefinition) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |code, location, message: String| {
        out.push(Violation { code, location, message })
    };

    if def.states.is_empty() {
        push(ViolationCode::NoStates, Location::Machine, "no states declared".into());
    }
    let mut states = HashSet::new();
    for (i, q) in def.states.iter().enumerate() {
        if !is_token(q) {
            push(ViolationCode::InvalidName, Location::State(i), format!("invalid state name {q:?}"));
        }
        if !states.insert(q.as_str()) {
            push(ViolationCode::DuplicateState, Location::State(i), format!("state `{q}` declared twice"));
        }
    }

    let mut tape = HashSet::new();
    for (i, s) in def.tape_alphabet.iter().enumerate() {
        if !s.is_well_formed() {
            push(ViolationCode::InvalidName, Location::TapeSymbol(i), format!("invalid symbol {:?}", s.as_str()));
        }
        if !tape.insert(s) {
            push(ViolationCode::DuplicateSymbol, Location::TapeSymbol(i), format!("tape symbol `{s}` declared twice"));
        }
    }
    let mut input = HashSet::new();
    for (i, s) in def.input_alphabet.iter().enumerate() {
        if !input.insert(s) {
            push(ViolationCode::DuplicateSymbol, Location::InputSymbol(i), format!("input symbol `{s}` declared twice"));
        }
        if !tape.contains(s) {
            push(ViolationCode::InputNotInTape, Location::InputSymbol(i), format!("input symbol `{s}` is not in the tape alphabet"));
        }
    }
    if !tape.contains(&def.blank) {
        push(ViolationCode::BlankNotInTape, Location::Blank, format!("blank `{}` is not in the tape alphabet", def.blank));
    }
    if input.contains(&def.blank) {
        push(ViolationCode::BlankInInput, Location::Blank, format!("blank `{}` is also an input symbol", def.blank));
    }

    if def.start_states.is_empty() {
        push(ViolationCode::NoStartState, Location::Machine, "no start state declared".into());
    }
    let mut starts = HashSet::new();
    for (i, (q, mv)) in def.start_states.iter().enumerate() {
        if !states.contains(q.as_str()) {
            push(ViolationCode::UnknownState, Location::Start(i), format!("start state `{q}` is not declared"));
        }
        if !starts.insert(q.as_str()) {
            push(ViolationCode::DuplicateStart, Location::Start(i), format!("start state `{q}` listed twice"));
        }
        if !(*mv > 0.0 && *mv <= 1.0) {
            push(ViolationCode::StartMvRange, Location::Start(i), format!("initial mv {mv} of `{q}` is outside (0, 1]"));
        }
    }
    for (i, q) in def.final_states.iter().enumerate() {
        if !states.contains(q.as_str()) {
            push(ViolationCode::UnknownState, Location::Final(i), format!("final state `{q}` is not declared"));
        }
    }

    let mut seen = HashSet::new();
    for (i, t) in def.transitions.iter().enumerate() {
        let loc = || Location::Transition(i);
        for q in [&t.source, &t.target] {
            if !states.contains(q.as_str()) {
                push(ViolationCode::UnknownState, loc(), format!("transition references undeclared state `{q}`"));
            }
        }
        for s in [&t.read, &t.write] {
            if !tape.contains(s) {
                push(ViolationCode::UnknownSymbol, loc(), format!("transition references undeclared symbol `{s}`"));
            }
        }
        if !(0.0..=1.0).contains(&t.weight) {
            push(ViolationCode::WeightRange, loc(), format!("weight {} is outside [0, 1]", t.weight));
        }
        if !seen.insert(t.key()) {
            push(ViolationCode::DuplicateTransition, loc(), "duplicate transition 5-tuple".into());
        }
    }
    out
}

/// Index of a state in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub usize);

/// Index of a symbol in tape-alphabet declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolId(pub usize);

/// A transition with its states and symbols resolved to indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rule {
    pub source: StateId,
    pub read: SymbolId,
    pub target: StateId,
    pub write: SymbolId,
    pub direction: Direction,
    pub weight: f64,
}

/// A validated machine. Immutable; safe to share between concurrent runs.
#[derive(Clone, Debug)]
pub struct Machine {
    def: MachineDefinition,
    state_index: HashMap<String, StateId>,
    symbol_index: HashMap<Symbol, SymbolId>,
    rules: Vec<Rule>,
    by_read: Vec<Vec<usize>>,
    is_input: Vec<bool>,
    is_final: Vec<bool>,
    initial_mv: Vec<f64>,
    blank: SymbolId,
}

impl Machine {
    pub fn new(def: MachineDefinition) -> Result<Machine> {
        let violations = validate(&def);
        if !violations.is_empty() {
            return Err(Error::InvalidMachine(violations));
        }

        let state_index: HashMap<_, _> = def
            .states
            .iter()
            .enumerate()
            .map(|(i, q)| (q.clone(), StateId(i)))
            .collect();
        let symbol_index: HashMap<_, _> = def
            .tape_alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), SymbolId(i)))
            .collect();

        let rules: Vec<Rule> = def
            .transitions
            .iter()
            .map(|t| Rule {
                source: state_index[&t.source],
                read: symbol_index[&t.read],
                target: state_index[&t.target],
                write: symbol_index[&t.write],
                direction: t.direction,
                weight: t.weight,
            })
            .collect();
        let mut by_read = vec![Vec::new(); def.tape_alphabet.len()];
        for (i, r) in rules.iter().enumerate() {
            by_read[r.read.0].push(i);
        }

        let mut is_input = vec![false; def.tape_alphabet.len()];
        for s in &def.input_alphabet {
            is_input[symbol_index[s].0] = true;
        }
        let mut is_final = vec![false; def.states.len()];
        for q in &def.final_states {
            is_final[state_index[q].0] = true;
        }
        let mut initial_mv = vec![0.0; def.states.len()];
        for (q, mv) in &def.start_states {
            initial_mv[state_index[q].0] = *mv;
        }
        let blank = symbol_index[&def.blank];

        Ok(Machine {
            def,
            state_index,
            symbol_index,
            rules,
            by_read,
            is_input,
            is_final,
            initial_mv,
            blank,
        })
    }

    pub fn definition(&self) -> &MachineDefinition {
        &self.def
    }

    pub fn num_states(&self) -> usize {
        self.def.states.len()
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_owned()))
    }

    pub fn symbol_id(&self, name: &str) -> Result<SymbolId> {
        self.symbol_index
            .get(&Symbol::from(name))
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_owned()))
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.def.states[id.0]
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        &self.def.tape_alphabet[id.0]
    }

    pub fn blank(&self) -> SymbolId {
        self.blank
    }

    pub fn is_input_symbol(&self, id: SymbolId) -> bool {
        self.is_input[id.0]
    }

    pub fn is_final(&self, id: StateId) -> bool {
        self.is_final[id.0]
    }

    /// Initial membership vector: start states' values, zero elsewhere.
    pub fn initial_mv(&self) -> &[f64] {
        &self.initial_mv
    }

    /// All transitions, in declaration order.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Indices (into [`rules`](Self::rules)) of the transitions reading `symbol`.
    pub fn rules_reading(&self, symbol: SymbolId) -> &[usize] {
        &self.by_read[symbol.0]
    }

    /// Targets of every transition `(state, symbol, q, _, _)`.
    pub fn successor_set(&self, state: &str, symbol: &str) -> Result<BTreeSet<StateId>> {
        let q = self.state_id(state)?;
        let a = self.symbol_id(symbol)?;
        Ok(self
            .rules_reading(a)
            .iter()
            .map(|&i| &self.rules[i])
            .filter(|r| r.source == q)
            .map(|r| r.target)
            .collect())
    }

    /// Sources of every transition `(q, symbol, state, _, _)`.
    pub fn predecessor_set(&self, state: &str, symbol: &str) -> Result<BTreeSet<StateId>> {
        let q = self.state_id(state)?;
        let a = self.symbol_id(symbol)?;
        Ok(self
            .rules_reading(a)
            .iter()
            .map(|&i| &self.rules[i])
            .filter(|r| r.target == q)
            .map(|r| r.source)
            .collect())
    }

    /// One start state and at most one transition per `(state, symbol)`.
    pub fn is_deterministic(&self) -> bool {
        if self.def.start_states.len() != 1 {
            return false;
        }
        let mut seen = HashSet::new();
        self.rules.iter().all(|r| seen.insert((r.source, r.read)))
    }

    /// Converts an input string to symbol ids, rejecting anything outside the
    /// input alphabet.
    pub fn encode_input<S: AsRef<str>>(&self, input: &[S]) -> Result<Vec<SymbolId>> {
        input
            .iter()
            .enumerate()
            .map(|(position, s)| {
                let s = s.as_ref();
                match self.symbol_index.get(&Symbol::from(s)) {
                    Some(&id) if self.is_input[id.0] => Ok(id),
                    _ => Err(Error::InputSymbol { symbol: s.to_owned(), position }),
                }
            })
            .collect()
    }
}
