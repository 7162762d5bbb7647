//! Resolution strategies.
//!
//! * F1 assigns a successor's candidate membership value from the
//!   predecessor's value and the transition weight.
//! * F2 collapses several candidate values for one state into one.
//! * F3 and F4 pick the single symbol to write and the single head direction
//!   from the active transition set.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::engine::ActiveTransitionSet;
use crate::error::{Error, Result};
use crate::machine::{Direction, SymbolId};

type F1Fn = dyn Fn(f64, f64, u64) -> f64 + Send + Sync;
type F2Fn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Membership assignment function `F1(mu, delta, t)`.
#[derive(Clone)]
pub enum F1Strategy {
    Mean,
    GMean,
    Min,
    Max,
    Product,
    /// `min(1, (mu^w + delta^w)^(1/w))`, `w > 0`.
    Yager(f64),
    /// `max` before the switch step, `min` from it on.
    Switched(u64),
    /// Projection onto the transition weight: `F1(mu, delta) = delta`.
    Weight,
    Custom { name: String, f: Arc<F1Fn> },
}

impl F1Strategy {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64, f64, u64) -> f64 + Send + Sync + 'static) -> Self {
        F1Strategy::Custom { name: name.into(), f: Arc::new(f) }
    }

    /// Evaluates the strategy, rejecting arguments outside `[0, 1]`.
    pub fn eval(&self, mu: f64, delta: f64, t: u64) -> Result<f64> {
        check_unit("mu", mu)?;
        check_unit("delta", delta)?;
        Ok(self.apply(mu, delta, t))
    }

    /// Evaluates without range checks. Callers guarantee `mu, delta ∈ [0, 1]`.
    pub fn apply(&self, mu: f64, delta: f64, t: u64) -> f64 {
        match self {
            F1Strategy::Mean => (mu + delta) / 2.0,
            F1Strategy::GMean => (mu * delta).sqrt(),
            F1Strategy::Min => mu.min(delta),
            F1Strategy::Max => mu.max(delta),
            F1Strategy::Product => mu * delta,
            F1Strategy::Yager(w) => (mu.powf(*w) + delta.powf(*w)).powf(1.0 / w).min(1.0),
            F1Strategy::Switched(switch_at) => {
                if t < *switch_at {
                    mu.max(delta)
                } else {
                    mu.min(delta)
                }
            }
            F1Strategy::Weight => delta,
            F1Strategy::Custom { f, .. } => f(mu, delta, t),
        }
    }

    /// True when the result never depends on the step index.
    pub fn is_stationary(&self) -> bool {
        !matches!(self, F1Strategy::Switched(_) | F1Strategy::Custom { .. })
    }
}

fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what, value })
    }
}

impl fmt::Display for F1Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F1Strategy::Mean => f.write_str("mean"),
            F1Strategy::GMean => f.write_str("gmean"),
            F1Strategy::Min => f.write_str("min"),
            F1Strategy::Max => f.write_str("max"),
            F1Strategy::Product => f.write_str("product"),
            F1Strategy::Yager(w) => write!(f, "yager:{w}"),
            F1Strategy::Switched(t) => write!(f, "switched:{t}"),
            F1Strategy::Weight => f.write_str("weight"),
            F1Strategy::Custom { name, .. } => f.write_str(name),
        }
    }
}

impl fmt::Debug for F1Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F1Strategy({self})")
    }
}

impl PartialEq for F1Strategy {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (F1Strategy::Custom { name: a, f: fa }, F1Strategy::Custom { name: b, f: fb }) => {
                a == b && Arc::ptr_eq(fa, fb)
            }
            (F1Strategy::Yager(a), F1Strategy::Yager(b)) => a.to_bits() == b.to_bits(),
            (F1Strategy::Switched(a), F1Strategy::Switched(b)) => a == b,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl FromStr for F1Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Strategy(s.to_owned());
        let (head, param) = match s.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (s, None),
        };
        match (head, param) {
            ("mean", None) => Ok(F1Strategy::Mean),
            ("gmean", None) => Ok(F1Strategy::GMean),
            ("min", None) => Ok(F1Strategy::Min),
            ("max", None) => Ok(F1Strategy::Max),
            ("product", None) => Ok(F1Strategy::Product),
            ("weight", None) => Ok(F1Strategy::Weight),
            ("yager", Some(p)) => {
                let w: f64 = p.parse().map_err(|_| bad())?;
                if w.is_finite() && w > 0.0 {
                    Ok(F1Strategy::Yager(w))
                } else {
                    Err(bad())
                }
            }
            ("switched", Some(p)) => p.parse().map(F1Strategy::Switched).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for F1Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Multi-membership resolution function `F2: [0,1]* -> [0,1]`.
#[derive(Clone)]
pub enum F2Strategy {
    Max,
    AMean,
    GMean,
    Custom { name: String, f: Arc<F2Fn> },
}

impl F2Strategy {
    pub fn custom(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        F2Strategy::Custom { name: name.into(), f: Arc::new(f) }
    }

    /// Resolves a multiset of candidate values. The empty multiset gives 0.
    ///
    /// Built-ins are independent of the enumeration order of `values` and
    /// return `a` exactly when every candidate equals `a`.
    pub fn resolve(&self, values: &[f64]) -> f64 {
        if let F2Strategy::Custom { f, .. } = self {
            return f(values);
        }
        let Some(&first) = values.first() else {
            return 0.0;
        };
        let (lo, hi) = values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo == hi {
            return lo;
        }
        let n = values.len() as f64;
        match self {
            F2Strategy::Max => hi,
            F2Strategy::AMean => (sorted_sum(values.iter().copied()) / n).clamp(lo, hi),
            F2Strategy::GMean => {
                if lo <= 0.0 {
                    0.0
                } else {
                    (sorted_sum(values.iter().map(|v| v.ln())) / n).exp().clamp(lo, hi)
                }
            }
            F2Strategy::Custom { .. } => unreachable!(),
        }
    }
}

/// Sums after sorting so the result does not depend on input order.
pub(crate) fn sorted_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

impl fmt::Display for F2Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F2Strategy::Max => f.write_str("max"),
            F2Strategy::AMean => f.write_str("amean"),
            F2Strategy::GMean => f.write_str("gmean"),
            F2Strategy::Custom { name, .. } => f.write_str(name),
        }
    }
}

impl fmt::Debug for F2Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F2Strategy({self})")
    }
}

impl PartialEq for F2Strategy {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (F2Strategy::Custom { name: a, f: fa }, F2Strategy::Custom { name: b, f: fb }) => {
                a == b && Arc::ptr_eq(fa, fb)
            }
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl FromStr for F2Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(F2Strategy::Max),
            "amean" => Ok(F2Strategy::AMean),
            "gmean" => Ok(F2Strategy::GMean),
            _ => Err(Error::Strategy(s.to_owned())),
        }
    }
}

impl Serialize for F2Strategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Strategy for picking one suggestion (a symbol for F3, a direction for F4)
/// out of the active transition set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChoiceStrategy {
    /// Suggestion of the transition with the largest F1 value.
    MaxWeight,
    /// Suggestion whose supporting transitions have the largest F1 sum.
    SigmaCount,
    /// Suggestion supported by the most transitions with nonzero F1.
    Cardinality,
}

pub type F3Strategy = ChoiceStrategy;
pub type F4Strategy = ChoiceStrategy;

impl fmt::Display for ChoiceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChoiceStrategy::MaxWeight => "max-weight",
            ChoiceStrategy::SigmaCount => "sigma-count",
            ChoiceStrategy::Cardinality => "cardinality",
        })
    }
}

impl FromStr for ChoiceStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-weight" => Ok(ChoiceStrategy::MaxWeight),
            "sigma-count" => Ok(ChoiceStrategy::SigmaCount),
            "cardinality" => Ok(ChoiceStrategy::Cardinality),
            _ => Err(Error::Strategy(s.to_owned())),
        }
    }
}

impl Serialize for ChoiceStrategy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Something an active transition can suggest.
pub trait Choice: Copy + Eq + Hash {
    /// Final tie-break rank; lower wins.
    fn rank(self) -> usize;
}

/// Symbols rank by their declaration order in the tape alphabet.
impl Choice for SymbolId {
    fn rank(self) -> usize {
        self.0
    }
}

/// RIGHT, then STAY, then LEFT.
impl Choice for Direction {
    fn rank(self) -> usize {
        match self {
            Direction::Right => 0,
            Direction::Stay => 1,
            Direction::Left => 2,
        }
    }
}

/// One active transition's vote.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Suggestion<K> {
    pub choice: K,
    pub f1: f64,
    pub predecessor_mv: f64,
}

struct Group<K> {
    choice: K,
    f1s: Vec<f64>,
    best_f1: f64,
    // Largest predecessor mv among the transitions attaining `best_f1`.
    best_f1_pred: f64,
    max_pred: f64,
}

/// Picks one suggestion. `None` only for an empty slice.
///
/// Ties on the primary criterion fall through to the larger predecessor mv,
/// then the larger sigma-count of the tied groups, then [`Choice::rank`].
pub fn resolve_choice<K: Choice>(strategy: ChoiceStrategy, suggestions: &[Suggestion<K>]) -> Option<K> {
    let mut groups: Vec<Group<K>> = Vec::new();
    for s in suggestions {
        let g = match groups.iter_mut().position(|g| g.choice == s.choice) {
            Some(i) => &mut groups[i],
            None => {
                groups.push(Group {
                    choice: s.choice,
                    f1s: Vec::new(),
                    best_f1: f64::NEG_INFINITY,
                    best_f1_pred: f64::NEG_INFINITY,
                    max_pred: f64::NEG_INFINITY,
                });
                groups.last_mut().unwrap()
            }
        };
        g.f1s.push(s.f1);
        g.max_pred = g.max_pred.max(s.predecessor_mv);
        if s.f1 > g.best_f1 {
            g.best_f1 = s.f1;
            g.best_f1_pred = s.predecessor_mv;
        } else if s.f1 == g.best_f1 {
            g.best_f1_pred = g.best_f1_pred.max(s.predecessor_mv);
        }
    }

    let keyed = groups.into_iter().map(|g| {
        let sigma = sorted_sum(g.f1s.iter().copied());
        let (primary, pred) = match strategy {
            ChoiceStrategy::MaxWeight => (g.best_f1, g.best_f1_pred),
            ChoiceStrategy::SigmaCount => (sigma, g.max_pred),
            ChoiceStrategy::Cardinality => {
                (g.f1s.iter().filter(|&&v| v > 0.0).count() as f64, g.max_pred)
            }
        };
        (g.choice, [primary, pred, sigma])
    });

    keyed
        .max_by(|(ca, ka), (cb, kb)| {
            ka.iter()
                .zip(kb)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or_else(|| cb.rank().cmp(&ca.rank()))
        })
        .map(|(c, _)| c)
}

/// Multi-symbol resolution: the symbol written at the head.
pub fn resolve_f3(strategy: F3Strategy, active: &ActiveTransitionSet) -> Result<SymbolId> {
    let votes: Vec<_> = active
        .entries
        .iter()
        .map(|e| Suggestion { choice: e.rule.write, f1: e.f1, predecessor_mv: e.predecessor_mv })
        .collect();
    resolve_choice(strategy, &votes).ok_or(Error::EmptyActiveSet)
}

/// Multi-direction resolution: where the head moves.
pub fn resolve_f4(strategy: F4Strategy, active: &ActiveTransitionSet) -> Result<Direction> {
    let votes: Vec<_> = active
        .entries
        .iter()
        .map(|e| Suggestion { choice: e.rule.direction, f1: e.f1, predecessor_mv: e.predecessor_mv })
        .collect();
    resolve_choice(strategy, &votes).ok_or(Error::EmptyActiveSet)
}

/// A broken axiom together with the arguments that broke it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub axiom: u8,
    pub inputs: Vec<f64>,
    /// Step index, for F1 checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    pub value: f64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AxiomReport {
    pub strategy: String,
    pub checks: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Strategy handle for [`validate_strategy_axioms`].
#[derive(Clone, Debug)]
pub enum StrategyRef<'a> {
    F1(&'a F1Strategy),
    F2(&'a F2Strategy),
}

/// Checks axioms 1–2 (F1) or 3–5 (F2).
pub fn validate_strategy_axioms(strategy: StrategyRef<'_>, samples: usize) -> AxiomReport {
    match strategy {
        StrategyRef::F1(s) => check_f1_axioms(s, samples),
        StrategyRef::F2(s) => check_f2_axioms(s, samples),
    }
}

/// Step indices probed for time-dependent F1 strategies.
fn probe_steps(strategy: &F1Strategy) -> Vec<u64> {
    if strategy.is_stationary() {
        return vec![0];
    }
    let mut ts = vec![0, 1, 2, 3, 5, 10, 100, 1_000, 1_000_000];
    if let F1Strategy::Switched(at) = strategy {
        ts.extend([at.saturating_sub(1), *at, at.saturating_add(1)]);
    }
    ts.sort_unstable();
    ts.dedup();
    ts
}

/// Axiom 1 on a `samples × samples` grid over `[0,1]²` plus axiom 2 at the
/// corners.
pub fn check_f1_axioms(strategy: &F1Strategy, samples: usize) -> AxiomReport {
    let samples = samples.max(1);
    let grid: Vec<f64> = if samples == 1 {
        vec![0.0]
    } else {
        (0..samples).map(|i| i as f64 / (samples - 1) as f64).collect()
    };
    let mut report = AxiomReport { strategy: strategy.to_string(), ..Default::default() };
    for t in probe_steps(strategy) {
        for &mu in &grid {
            for &delta in &grid {
                let v = strategy.apply(mu, delta, t);
                report.checks += 1;
                if !(0.0..=1.0).contains(&v) {
                    report.violations.push(AxiomViolation {
                        axiom: 1,
                        inputs: vec![mu, delta],
                        t: Some(t),
                        value: v,
                        message: format!("F1({mu}, {delta}) = {v} is outside [0, 1]"),
                    });
                }
            }
        }
        for corner in [0.0, 1.0] {
            let v = strategy.apply(corner, corner, t);
            report.checks += 1;
            if v != corner {
                report.violations.push(AxiomViolation {
                    axiom: 2,
                    inputs: vec![corner, corner],
                    t: Some(t),
                    value: v,
                    message: format!("F1({corner}, {corner}) = {v}, expected {corner}"),
                });
            }
        }
    }
    report
}

const F2_SEED: u64 = 0x00F2_5EED;
const CORNER_VALUES: [f64; 9] = [0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.7, 0.9, 0.999, 1.0];

/// Axioms 3–5 on `samples` random multisets from a fixed-seed generator,
/// the empty multiset, and all-equal multisets.
pub fn check_f2_axioms(strategy: &F2Strategy, samples: usize) -> AxiomReport {
    let mut report = AxiomReport { strategy: strategy.to_string(), ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(F2_SEED);

    let check = |values: &[f64], report: &mut AxiomReport| {
        let v = strategy.resolve(values);
        report.checks += 1;
        if !(0.0..=1.0).contains(&v) {
            report.violations.push(AxiomViolation {
                axiom: 3,
                inputs: values.to_vec(),
                t: None,
                value: v,
                message: format!("F2 = {v} is outside [0, 1]"),
            });
        }
        if values.is_empty() && v != 0.0 {
            report.violations.push(AxiomViolation {
                axiom: 4,
                inputs: Vec::new(),
                t: None,
                value: v,
                message: format!("F2(∅) = {v}, expected 0"),
            });
        }
        if let Some(&a) = values.first() {
            if values.iter().all(|&x| x == a) && v != a {
                report.violations.push(AxiomViolation {
                    axiom: 5,
                    inputs: values.to_vec(),
                    t: None,
                    value: v,
                    message: format!("all candidates equal {a} but F2 = {v}"),
                });
            }
        }
    };

    check(&[], &mut report);
    for &a in &CORNER_VALUES {
        for n in 1..=6 {
            check(&vec![a; n], &mut report);
        }
    }
    for _ in 0..samples {
        let n = rng.gen_range(1..=8);
        let values: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen::<f64>(),
            })
            .collect();
        check(&values, &mut report);
        check(&vec![values[0]; n], &mut report);
    }
    report
}
