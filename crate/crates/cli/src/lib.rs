//! Command implementations behind the `cftm` binary.
//!
//! Every command returns an [`Outcome`] instead of printing, so the binary
//! and the tests share one code path. Exit codes: 0 accepted or clean, 1
//! rejected, mismatched or violated, 2 usage, parse or input errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cftm::baseline::{evaluate, BaselineOptions};
use cftm::format::{apply_config, parse_machine, split_input, ParsedMachine};
use cftm::kernel::{check_f1_axioms, check_f2_axioms, AxiomReport};
use cftm::trace::trace_run;
use cftm::{F1Strategy, F2Strategy};

pub mod strategy_file;

use strategy_file::{parse_strategy_file, CustomStrategy};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub const DEFAULT_GRID: usize = 101;
pub const DEFAULT_MULTISETS: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "cftm", version, about = "Run and check comprehensive fuzzy Turing machines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a machine and print its trace as JSON Lines
    Run(RunArgs),
    /// Compare the engine with the ID-tree evaluator
    Compare(CompareArgs),
    /// Check a machine file
    Validate(ValidateArgs),
    /// Check a strategy against the resolution axioms
    Axioms(AxiomsArgs),
}

/// Overrides for the file's `config:` line.
#[derive(Debug, Default, Clone, Args)]
pub struct ResolutionArgs {
    #[arg(long)]
    pub f1: Option<String>,
    #[arg(long)]
    pub f2: Option<String>,
    #[arg(long)]
    pub f3: Option<String>,
    #[arg(long)]
    pub f4: Option<String>,
    /// consume-input or quiescent
    #[arg(long)]
    pub halt: Option<String>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// F2 used for the acceptance degree
    #[arg(long)]
    pub accept_f2: Option<String>,
    /// reset or persist
    #[arg(long)]
    pub inactive: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    pub file: PathBuf,
    /// Input words. Split on whitespace if present, otherwise per character
    #[arg(required = true)]
    pub inputs: Vec<String>,
    #[command(flatten)]
    pub resolution: ResolutionArgs,
    /// Print only the acceptance degree
    #[arg(long, short)]
    pub quiet: bool,
    /// Write the trace here instead of standard output
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Worker threads when several inputs are given
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    pub file: PathBuf,
    pub input: String,
    #[command(flatten)]
    pub resolution: ResolutionArgs,
    /// Depth bound of the tree, default 10·|input| + 10
    #[arg(long)]
    pub depth: Option<usize>,
    /// Node budget of the tree
    #[arg(long, default_value_t = cftm::baseline::DEFAULT_NODE_BUDGET)]
    pub nodes: usize,
    /// T-norm composing path degrees in the tree
    #[arg(long, default_value = "min")]
    pub tnorm: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub file: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AxiomsArgs {
    /// Built-in name (`mean`, `yager:0.5`, `f2:amean`, ...) or a strategy file
    pub strategy: String,
    /// Grid points per axis for F1
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Random multisets for F2
    #[arg(long, default_value_t = DEFAULT_MULTISETS)]
    pub multisets: usize,
    #[arg(long)]
    pub json: bool,
}

/// What a command would print and its exit code.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome { code: EXIT_USAGE, stdout: String::new(), stderr }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Axioms(a) => cmd_axioms(a),
    }
}

/// Formats a degree with six fractional digits. Exact ties round to even.
pub fn format_degree(d: f64) -> String {
    format!("{d:.6}")
}

fn load(path: &Path, overrides: &ResolutionArgs) -> Result<ParsedMachine, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::usage(format!("{}: {e}", path.display())))?;
    let mut parsed = parse_machine(&text).map_err(|diags| {
        let mut msg = String::new();
        for d in diags {
            writeln!(msg, "{}:{d}", path.display()).unwrap();
        }
        Outcome::usage(msg)
    })?;
    let pairs = [
        ("f1", overrides.f1.clone()),
        ("f2", overrides.f2.clone()),
        ("f3", overrides.f3.clone()),
        ("f4", overrides.f4.clone()),
        ("halt", overrides.halt.clone()),
        ("max-steps", overrides.max_steps.map(|n| n.to_string())),
        ("accept-f2", overrides.accept_f2.clone()),
        ("inactive", overrides.inactive.clone()),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            apply_config(&mut parsed.config, key, &v).map_err(|e| Outcome::usage(format!("--{key}: {e}")))?;
        }
    }
    Ok(parsed)
}

struct RunOne {
    accepted: bool,
    degree: f64,
    trace: String,
}

pub fn cmd_run(args: &RunArgs) -> Outcome {
    let parsed = match load(&args.file, &args.resolution) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let runs = run_inputs(&parsed, &args.inputs, args.jobs.max(1));

    let mut out = Outcome::default();
    let mut traces = String::new();
    let mut all_accepted = true;
    for (word, r) in args.inputs.iter().zip(runs) {
        match r {
            Ok(r) => {
                all_accepted &= r.accepted;
                if args.quiet {
                    writeln!(out.stdout, "{}", format_degree(r.degree)).unwrap();
                }
                traces.push_str(&r.trace);
            }
            Err(e) => return Outcome::usage(format!("input `{word}`: {e}")),
        }
    }
    if let Some(path) = &args.trace {
        if let Err(e) = std::fs::write(path, &traces) {
            return Outcome::usage(format!("{}: {e}", path.display()));
        }
    } else if !args.quiet {
        out.stdout = traces;
    }
    out.code = if all_accepted { EXIT_OK } else { EXIT_REJECTED };
    out
}

/// Runs every input, at most `jobs` at a time. Results keep input order.
fn run_inputs(parsed: &ParsedMachine, inputs: &[String], jobs: usize) -> Vec<cftm::Result<RunOne>> {
    let one = |word: &String| {
        let input = split_input(word);
        trace_run(&parsed.machine, &input, &parsed.config).map(|(r, doc)| RunOne {
            accepted: r.accepted,
            degree: r.acceptance_degree,
            trace: doc.to_jsonl(),
        })
    };
    if jobs <= 1 || inputs.len() <= 1 {
        return inputs.iter().map(one).collect();
    }
    let chunk = inputs.len().div_ceil(jobs);
    std::thread::scope(|s| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(one).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSide {
    pub steps: u64,
    pub degree: f64,
    pub halt_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSide {
    pub nodes: usize,
    pub degree: f64,
    pub accepting_leaves: usize,
    pub pruned: usize,
    pub max_depth: usize,
    pub bound_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub cftm: EngineSide,
    pub baseline: TreeSide,
    pub deterministic: bool,
    /// `MATCH` or `MISMATCH`, only for deterministic machines under
    /// `f1=min` whose tree finished within its bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl CompareReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{:<10} {:>10} {:>10}  status", "", "work", "degree").unwrap();
        writeln!(
            s,
            "{:<10} {:>10} {:>10}  {}",
            "cftm",
            format!("{} steps", self.cftm.steps),
            format_degree(self.cftm.degree),
            self.cftm.halt_reason
        )
        .unwrap();
        writeln!(
            s,
            "{:<10} {:>10} {:>10}  {}",
            "id-tree",
            format!("{} nodes", self.baseline.nodes),
            format_degree(self.baseline.degree),
            if self.baseline.bound_hit { "bound-hit" } else { "complete" }
        )
        .unwrap();
        match &self.verdict {
            Some(v) => writeln!(s, "verdict: {v}").unwrap(),
            None if self.baseline.bound_hit => {
                writeln!(s, "verdict: none (tree stopped at its bound, degree is a lower bound)").unwrap()
            }
            None => writeln!(s, "verdict: none (needs a deterministic machine and f1=min)").unwrap(),
        }
        s
    }
}

pub fn compare(parsed: &ParsedMachine, input: &[String], opts: &BaselineOptions) -> cftm::Result<CompareReport> {
    let r = cftm::engine::run(&parsed.machine, input, &parsed.config)?;
    let t = evaluate(&parsed.machine, input, opts)?;
    let deterministic = parsed.machine.is_deterministic();
    let verdict = (deterministic && parsed.config.f1 == F1Strategy::Min && !t.bound_hit).then(|| {
        if r.acceptance_degree.to_bits() == t.truth_degree.to_bits() { "MATCH" } else { "MISMATCH" }.to_owned()
    });
    Ok(CompareReport {
        cftm: EngineSide { steps: r.steps(), degree: r.acceptance_degree, halt_reason: r.halt_reason.to_string() },
        baseline: TreeSide {
            nodes: t.nodes,
            degree: t.truth_degree,
            accepting_leaves: t.accepting_leaves,
            pruned: t.pruned,
            max_depth: t.max_depth,
            bound_hit: t.bound_hit,
        },
        deterministic,
        verdict,
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Outcome {
    let parsed = match load(&args.file, &args.resolution) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let tnorm = match args.tnorm.parse::<F1Strategy>() {
        Ok(t) => t,
        Err(e) => return Outcome::usage(format!("--tnorm: {e}")),
    };
    let opts = BaselineOptions { tnorm, halt: parsed.config.halt, depth_bound: args.depth, node_budget: args.nodes };
    let report = match compare(&parsed, &split_input(&args.input), &opts) {
        Ok(r) => r,
        Err(e) => return Outcome::usage(e.to_string()),
    };
    let stdout = if args.json {
        serde_json::to_string(&report).expect("report serializes") + "\n"
    } else {
        report.to_table()
    };
    let code = if report.verdict.as_deref() == Some("MISMATCH") { EXIT_REJECTED } else { EXIT_OK };
    Outcome { code, stdout, stderr: String::new() }
}

pub fn cmd_validate(args: &ValidateArgs) -> Outcome {
    match load(&args.file, &ResolutionArgs::default()) {
        Ok(p) => {
            let def = p.machine.definition();
            let kind = if p.machine.is_deterministic() { "deterministic" } else { "nondeterministic" };
            Outcome {
                code: EXIT_OK,
                stdout: format!(
                    "ok: {} states, {} transitions, {kind}\n",
                    def.states.len(),
                    def.transitions.len()
                ),
                stderr: String::new(),
            }
        }
        Err(o) => o,
    }
}

/// Strategies named by an `axioms` argument.
pub fn resolve_strategies(spec: &str) -> Result<Vec<CustomStrategy>, String> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{spec}: {e}"))?;
        return parse_strategy_file(&text).map(|s| vec![s]).map_err(|e| format!("{spec}: {e:#}"));
    }
    let f1 = |s: &str| s.parse::<F1Strategy>().ok().map(CustomStrategy::F1);
    let f2 = |s: &str| s.parse::<F2Strategy>().ok().map(CustomStrategy::F2);
    let found: Vec<CustomStrategy> = match spec.split_once(':') {
        Some(("f1", rest)) => f1(rest).into_iter().collect(),
        Some(("f2", rest)) => f2(rest).into_iter().collect(),
        _ => f1(spec).into_iter().chain(f2(spec)).collect(),
    };
    if found.is_empty() {
        Err(format!("unknown strategy `{spec}`"))
    } else {
        Ok(found)
    }
}

pub fn axiom_reports(strategies: &[CustomStrategy], grid: usize, multisets: usize) -> Vec<(&'static str, AxiomReport)> {
    strategies
        .iter()
        .map(|s| match s {
            CustomStrategy::F1(f) => ("f1", check_f1_axioms(f, grid)),
            CustomStrategy::F2(f) => ("f2", check_f2_axioms(f, multisets)),
        })
        .collect()
}

const LISTED_VIOLATIONS: usize = 20;

pub fn cmd_axioms(args: &AxiomsArgs) -> Outcome {
    let strategies = match resolve_strategies(&args.strategy) {
        Ok(s) => s,
        Err(e) => return Outcome::usage(e),
    };
    let reports = axiom_reports(&strategies, args.grid, args.multisets);
    let clean = reports.iter().all(|(_, r)| r.is_clean());

    let mut stdout = String::new();
    if args.json {
        for (kind, r) in &reports {
            let v = serde_json::json!({ "kind": kind, "report": r });
            writeln!(stdout, "{v}").unwrap();
        }
    } else {
        for (kind, r) in &reports {
            let status = if r.is_clean() { "clean" } else { "VIOLATED" };
            writeln!(stdout, "{kind} {}: {status}, {} checks, {} violations", r.strategy, r.checks, r.violations.len())
                .unwrap();
            for v in r.violations.iter().take(LISTED_VIOLATIONS) {
                writeln!(stdout, "  axiom {}: {}", v.axiom, v.message).unwrap();
            }
            if r.violations.len() > LISTED_VIOLATIONS {
                writeln!(stdout, "  ... and {} more", r.violations.len() - LISTED_VIOLATIONS).unwrap();
            }
        }
    }
    Outcome { code: if clean { EXIT_OK } else { EXIT_REJECTED }, stdout, stderr: String::new() }
}
