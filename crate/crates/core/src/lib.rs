//! Comprehensive fuzzy Turing machines.
//!
//! States carry membership values that are updated every step by pluggable
//! resolution functions ([`kernel`]), so a nondeterministic machine is run as
//! a single configuration ([`engine`]) instead of a tree of instantaneous
//! descriptions. The tree evaluator is kept in [`baseline`] as an oracle for
//! deterministic machines and as the cost reference.
//!
//! ```
//! use cftm::{format::parse_machine, engine::run};
//!
//! let doc = "
//! states: q0 q1
//! input: a
//! tape: a B
//! blank: B
//! start: q0
//! final: q1
//! trans: q0 a -> q1 a R @ 0.5
//! config: f1=min
//! ";
//! let parsed = parse_machine(doc).unwrap();
//! let result = run(&parsed.machine, &["a"], &parsed.config).unwrap();
//! assert_eq!(result.acceptance_degree, 0.5);
//! ```

pub mod baseline;
pub mod engine;
pub mod error;
pub mod format;
pub mod generate;
pub mod kernel;
pub mod machine;
pub mod trace;

pub use baseline::{BaselineOptions, TreeResult};
pub use engine::{HaltMode, HaltReason, InactivePolicy, ResolutionConfig, RunResult};
pub use error::{Error, Result};
pub use kernel::{ChoiceStrategy, F1Strategy, F2Strategy, F3Strategy, F4Strategy};
pub use machine::{Direction, Machine, MachineDefinition, StateId, Symbol, SymbolId, Transition};
pub use trace::TraceDocument;
