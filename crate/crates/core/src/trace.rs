//! JSON-lines run log.
//!
//! One `header` record, one `step` record per move, one `footer` record.
//! The header carries everything needed to rerun: the machine digest, the
//! input and the resolution config. Rerunning it against the same machine
//! reproduces the document byte for byte.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{run, ResolutionConfig, RunResult};
use crate::error::{Error, Result};
use crate::format::{apply_config, serialize_definition};
use crate::machine::Machine;

pub const SCHEMA_VERSION: u32 = 1;

/// SHA-256 of the canonical machine text, hex encoded.
pub fn machine_hash(machine: &Machine) -> String {
    hex::encode(Sha256::digest(serialize_definition(machine.definition()).as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionHeader {
    pub f1: String,
    pub f2: String,
    pub f3: String,
    pub f4: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept_f2: Option<String>,
    pub halt: String,
    pub max_steps: u64,
    pub inactive: String,
}

impl ResolutionHeader {
    pub fn from_config(c: &ResolutionConfig) -> Self {
        ResolutionHeader {
            f1: c.f1.to_string(),
            f2: c.f2.to_string(),
            f3: c.f3.to_string(),
            f4: c.f4.to_string(),
            accept_f2: c.acceptance_f2.as_ref().map(ToString::to_string),
            halt: c.halt.to_string(),
            max_steps: c.max_steps,
            inactive: c.inactive.to_string(),
        }
    }

    pub fn to_config(&self) -> Result<ResolutionConfig> {
        let mut c = ResolutionConfig::default();
        let mut set = |k: &str, v: &str| apply_config(&mut c, k, v).map_err(Error::Config);
        set("f1", &self.f1)?;
        set("f2", &self.f2)?;
        set("f3", &self.f3)?;
        set("f4", &self.f4)?;
        if let Some(a) = &self.accept_f2 {
            set("accept-f2", a)?;
        }
        set("halt", &self.halt)?;
        set("max-steps", &self.max_steps.to_string())?;
        set("inactive", &self.inactive)?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema: u32,
    pub machine_hash: String,
    pub input: Vec<String>,
    pub states: Vec<String>,
    pub resolution: ResolutionHeader,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveLine {
    /// Index of the transition in declaration order.
    pub transition: usize,
    pub source: String,
    pub target: String,
    pub write: String,
    pub direction: String,
    pub weight: f64,
    pub predecessor_mv: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F2Line {
    pub state: String,
    pub candidates: Vec<f64>,
    pub resolved: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLine {
    pub t: u64,
    pub head: usize,
    pub read: String,
    pub active: Vec<ActiveLine>,
    pub f2: Vec<F2Line>,
    pub write: String,
    pub direction: String,
    pub mv: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalMv {
    pub state: String,
    pub mv: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub halt_reason: String,
    pub steps: u64,
    pub final_mvs: Vec<FinalMv>,
    pub acceptance_degree: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Header(Header),
    Step(StepLine),
    Footer(Footer),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceDocument {
    pub records: Vec<Record>,
}

impl TraceDocument {
    pub fn from_run<S: AsRef<str>>(machine: &Machine, input: &[S], config: &ResolutionConfig, result: &RunResult) -> Self {
        let name = |q: crate::StateId| machine.state_name(q).to_owned();
        let sym = |s: crate::SymbolId| machine.symbol(s).to_string();

        let mut records = vec![Record::Header(Header {
            schema: SCHEMA_VERSION,
            machine_hash: machine_hash(machine),
            input: input.iter().map(|s| s.as_ref().to_owned()).collect(),
            states: machine.definition().states.clone(),
            resolution: ResolutionHeader::from_config(config),
        })];
        records.extend(result.trace.iter().map(|r| {
            Record::Step(StepLine {
                t: r.t,
                head: r.head,
                read: sym(r.read),
                active: r
                    .active
                    .iter()
                    .map(|e| ActiveLine {
                        transition: e.index,
                        source: name(e.rule.source),
                        target: name(e.rule.target),
                        write: sym(e.rule.write),
                        direction: e.rule.direction.to_string(),
                        weight: e.rule.weight,
                        predecessor_mv: e.predecessor_mv,
                        f1: e.f1,
                    })
                    .collect(),
                f2: r
                    .f2_events
                    .iter()
                    .map(|ev| F2Line { state: name(ev.state), candidates: ev.candidates.clone(), resolved: ev.resolved })
                    .collect(),
                write: sym(r.write),
                direction: r.direction.to_string(),
                mv: r.mv.clone(),
            })
        }));
        records.push(Record::Footer(Footer {
            halt_reason: result.halt_reason.to_string(),
            steps: result.steps(),
            final_mvs: result
                .nonzero_finals(machine)
                .into_iter()
                .map(|(q, mv)| FinalMv { state: q.to_owned(), mv })
                .collect(),
            acceptance_degree: result.acceptance_degree,
            accepted: result.accepted,
        }));
        TraceDocument { records }
    }

    pub fn header(&self) -> Option<&Header> {
        match self.records.first() {
            Some(Record::Header(h)) => Some(h),
            _ => None,
        }
    }

    pub fn footer(&self) -> Option<&Footer> {
        match self.records.last() {
            Some(Record::Footer(f)) => Some(f),
            _ => None,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Config(format!("trace line {}: {e}", i + 1))))
            .collect::<Result<Vec<Record>>>()?;
        Ok(TraceDocument { records })
    }
}

/// Runs `machine` and returns the trace document.
pub fn trace_run<S: AsRef<str>>(machine: &Machine, input: &[S], config: &ResolutionConfig) -> Result<(RunResult, TraceDocument)> {
    let result = run(machine, input, config)?;
    let doc = TraceDocument::from_run(machine, input, config, &result);
    Ok((result, doc))
}

/// Reruns the header of `doc` against `machine`.
pub fn replay(machine: &Machine, doc: &TraceDocument) -> Result<TraceDocument> {
    let header = doc.header().ok_or_else(|| Error::Config("trace has no header".into()))?;
    if header.schema != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported trace schema {}", header.schema)));
    }
    if header.machine_hash != machine_hash(machine) {
        return Err(Error::Config("trace was produced by a different machine".into()));
    }
    let config = header.resolution.to_config()?;
    trace_run(machine, &header.input, &config).map(|(_, d)| d)
}
