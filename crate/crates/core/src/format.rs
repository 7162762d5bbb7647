//! Line-oriented machine description files.
//!
//! ```text
//! # comment
//! states: q0 q1 q2
//! input:  a b
//! tape:   a b x B
//! blank:  B
//! start:  q0            # `q@mv` sets an initial membership, default 1
//! final:  q2
//! trans:  q0 a -> q1 x R @ 0.5
//! config: f1=min f2=amean halt=quiescent
//! ```
//!
//! Directives may appear in any order and list directives may repeat; state
//! declaration order fixes membership-vector indexing. `#` starts a comment,
//! so it cannot be used as a symbol.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::ResolutionConfig;
use crate::kernel::{ChoiceStrategy, F1Strategy, F2Strategy};
use crate::machine::{validate, Direction, Location, Machine, MachineDefinition, Symbol, Transition};

/// A parse or validation problem. `line` and `column` are 1-based; 0 means
/// the whole document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub code: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.code, self.message)
        } else {
            write!(f, "{}:{}: {}: {}", self.line, self.column, self.code, self.message)
        }
    }
}

fn diag(line: usize, column: usize, code: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line, column, code: code.to_owned(), message: message.into() }
}

#[derive(Clone, Debug)]
pub struct ParsedMachine {
    pub machine: Machine,
    pub config: ResolutionConfig,
}

type Pos = (usize, usize);

/// Where each element of the definition came from.
#[derive(Default)]
struct SourceMap {
    states: Vec<Pos>,
    input: Vec<Pos>,
    tape: Vec<Pos>,
    blank: Option<Pos>,
    start: Vec<Pos>,
    finals: Vec<Pos>,
    transitions: Vec<Pos>,
}

impl SourceMap {
    fn locate(&self, loc: &Location) -> Pos {
        let at = |v: &[Pos], i: usize| v.get(i).copied().unwrap_or((0, 0));
        match *loc {
            Location::Machine => (0, 0),
            Location::State(i) => at(&self.states, i),
            Location::InputSymbol(i) => at(&self.input, i),
            Location::TapeSymbol(i) => at(&self.tape, i),
            Location::Blank => self.blank.unwrap_or((0, 0)),
            Location::Start(i) => at(&self.start, i),
            Location::Final(i) => at(&self.finals, i),
            Location::Transition(i) => at(&self.transitions, i),
        }
    }
}

/// Whitespace-separated tokens with their 1-based character columns.
fn tokens<'a>(line: &'a str, byte_offset: usize, full: &str) -> Vec<(usize, &'a str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                let col = full[..byte_offset + s].chars().count() + 1;
                out.push((col, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

/// Parses and validates a machine file.
pub fn parse_machine(text: &str) -> Result<ParsedMachine, Vec<Diagnostic>> {
    let (def, config, map) = parse_raw(text)?;
    let violations = validate(&def);
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|v| {
                let (line, column) = map.locate(&v.location);
                diag(line, column, v.code.as_str(), v.message)
            })
            .collect());
    }
    let machine = Machine::new(def).expect("validated above");
    Ok(ParsedMachine { machine, config })
}

fn parse_raw(text: &str) -> Result<(MachineDefinition, ResolutionConfig, SourceMap), Vec<Diagnostic>> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut diags = Vec::new();
    let mut map = SourceMap::default();
    let mut def = MachineDefinition {
        states: Vec::new(),
        input_alphabet: Vec::new(),
        tape_alphabet: Vec::new(),
        blank: Symbol::new(""),
        transitions: Vec::new(),
        start_states: Vec::new(),
        final_states: Vec::new(),
    };
    let mut config = ResolutionConfig::default();
    let mut config_keys_seen: Vec<String> = Vec::new();

    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(colon) = content.find(':') else {
            let col = content.len() - content.trim_start().len() + 1;
            diags.push(diag(lineno, col, "MALFORMED_LINE", "expected `directive: ...`"));
            continue;
        };
        let key = content[..colon].trim();
        let rest = &content[colon + 1..];
        let toks = tokens(rest, colon + 1, content);
        let key_col = content.len() - content.trim_start().len() + 1;

        match key {
            "states" => {
                for (col, t) in toks {
                    def.states.push(t.to_owned());
                    map.states.push((lineno, col));
                }
            }
            "input" => {
                for (col, t) in toks {
                    def.input_alphabet.push(t.into());
                    map.input.push((lineno, col));
                }
            }
            "tape" => {
                for (col, t) in toks {
                    def.tape_alphabet.push(t.into());
                    map.tape.push((lineno, col));
                }
            }
            "blank" => {
                if let Some((line, _)) = map.blank {
                    diags.push(diag(lineno, key_col, "DUPLICATE_BLANK", format!("blank already declared on line {line}")));
                } else if toks.len() != 1 {
                    diags.push(diag(lineno, key_col, "MALFORMED_BLANK", "expected exactly one blank symbol"));
                } else {
                    def.blank = toks[0].1.into();
                    map.blank = Some((lineno, toks[0].0));
                }
            }
            "start" => {
                for (col, t) in toks {
                    let (q, mv) = match t.split_once('@') {
                        Some((q, v)) => match v.parse::<f64>() {
                            Ok(mv) => (q, mv),
                            Err(_) => {
                                diags.push(diag(lineno, col, "BAD_NUMBER", format!("bad membership value `{v}`")));
                                continue;
                            }
                        },
                        None => (t, 1.0),
                    };
                    def.start_states.push((q.to_owned(), mv));
                    map.start.push((lineno, col));
                }
            }
            "final" => {
                for (col, t) in toks {
                    def.final_states.push(t.to_owned());
                    map.finals.push((lineno, col));
                }
            }
            "trans" => match parse_transition(&toks) {
                Ok(t) => {
                    def.transitions.push(t);
                    map.transitions.push((lineno, toks[0].0));
                }
                Err((col, msg)) => diags.push(diag(lineno, col.unwrap_or(key_col), "MALFORMED_TRANSITION", msg)),
            },
            "config" => {
                for (col, t) in toks {
                    let Some((k, v)) = t.split_once('=') else {
                        diags.push(diag(lineno, col, "MALFORMED_CONFIG", format!("expected key=value, got `{t}`")));
                        continue;
                    };
                    if config_keys_seen.iter().any(|s| s == k) {
                        diags.push(diag(lineno, col, "DUPLICATE_CONFIG", format!("`{k}` set twice")));
                        continue;
                    }
                    config_keys_seen.push(k.to_owned());
                    if let Err(msg) = apply_config(&mut config, k, v) {
                        diags.push(diag(lineno, col, "BAD_CONFIG", msg));
                    }
                }
            }
            other => diags.push(diag(lineno, key_col, "UNKNOWN_DIRECTIVE", format!("unknown directive `{other}`"))),
        }
    }

    if map.blank.is_none() && diags.is_empty() {
        diags.push(diag(0, 0, "MISSING_BLANK", "no `blank:` directive"));
    }
    if diags.is_empty() {
        Ok((def, config, map))
    } else {
        Err(diags)
    }
}

fn parse_transition(toks: &[(usize, &str)]) -> Result<Transition, (Option<usize>, String)> {
    const SHAPE: &str = "expected `<src> <read> -> <dst> <write> <L|S|R> @ <weight>`";
    let [(_, src), (_, read), (arrow_col, arrow), (_, dst), (_, write), (dir_col, dir), (at_col, at), (w_col, w)] = toks else {
        return Err((toks.first().map(|t| t.0), SHAPE.to_owned()));
    };
    if *arrow != "->" {
        return Err((Some(*arrow_col), SHAPE.to_owned()));
    }
    if *at != "@" {
        return Err((Some(*at_col), SHAPE.to_owned()));
    }
    let direction = Direction::from_letter(dir).ok_or((Some(*dir_col), format!("bad direction `{dir}`, expected L, S or R")))?;
    let weight: f64 = w.parse().map_err(|_| (Some(*w_col), format!("bad weight `{w}`")))?;
    Ok(Transition::new(src, read, dst, write, direction, weight))
}

/// Sets one `config:` key. Also used for command-line overrides.
pub fn apply_config(config: &mut ResolutionConfig, key: &str, value: &str) -> Result<(), String> {
    let bad = |e: crate::Error| format!("{key}: {e}");
    match key {
        "f1" => config.f1 = value.parse::<F1Strategy>().map_err(bad)?,
        "f2" => config.f2 = value.parse::<F2Strategy>().map_err(bad)?,
        "f3" => config.f3 = value.parse::<ChoiceStrategy>().map_err(bad)?,
        "f4" => config.f4 = value.parse::<ChoiceStrategy>().map_err(bad)?,
        "accept-f2" => config.acceptance_f2 = Some(value.parse::<F2Strategy>().map_err(bad)?),
        "halt" => config.halt = value.parse().map_err(bad)?,
        "inactive" => config.inactive = value.parse().map_err(bad)?,
        "max-steps" => {
            let n: u64 = value.parse().map_err(|_| format!("max-steps: bad number `{value}`"))?;
            if n == 0 {
                return Err("max-steps must be at least 1".into());
            }
            config.max_steps = n;
        }
        _ => return Err(format!("unknown config key `{key}`")),
    }
    Ok(())
}

/// Canonical text of the machine part (everything except `config:`).
pub fn serialize_definition(def: &MachineDefinition) -> String {
    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = &str>| xs.collect::<Vec<_>>().join(" ");
    let line = |out: &mut String, key: &str, body: String| {
        if body.is_empty() {
            writeln!(out, "{key}:").unwrap();
        } else {
            writeln!(out, "{key}: {body}").unwrap();
        }
    };
    line(&mut out, "states", join(&mut def.states.iter().map(String::as_str)));
    line(&mut out, "input", join(&mut def.input_alphabet.iter().map(Symbol::as_str)));
    line(&mut out, "tape", join(&mut def.tape_alphabet.iter().map(Symbol::as_str)));
    line(&mut out, "blank", def.blank.to_string());
    let starts: Vec<String> = def
        .start_states
        .iter()
        .map(|(q, mv)| if *mv == 1.0 { q.clone() } else { format!("{q}@{mv}") })
        .collect();
    line(&mut out, "start", starts.join(" "));
    line(&mut out, "final", def.final_states.join(" "));
    for t in &def.transitions {
        writeln!(
            out,
            "trans: {} {} -> {} {} {} @ {}",
            t.source, t.read, t.target, t.write, t.direction, t.weight
        )
        .unwrap();
    }
    out
}

/// Canonical text of a resolution config as a `config:` line.
pub fn serialize_config(config: &ResolutionConfig) -> String {
    let mut line = format!(
        "config: f1={} f2={} f3={} f4={}",
        config.f1, config.f2, config.f3, config.f4
    );
    if let Some(a) = &config.acceptance_f2 {
        write!(line, " accept-f2={a}").unwrap();
    }
    writeln!(line, " halt={} max-steps={} inactive={}", config.halt, config.max_steps, config.inactive).unwrap();
    line
}

pub fn serialize(def: &MachineDefinition, config: &ResolutionConfig) -> String {
    serialize_definition(def) + &serialize_config(config)
}

/// Parses `text` and re-emits it in canonical form.
pub fn canonicalize(text: &str) -> Result<String, Vec<Diagnostic>> {
    let p = parse_machine(text)?;
    Ok(serialize(p.machine.definition(), &p.config))
}

/// Splits a command-line input word into symbols: on whitespace when it has
/// any, otherwise one symbol per character.
pub fn split_input(word: &str) -> Vec<String> {
    if word.chars().any(char::is_whitespace) {
        word.split_whitespace().map(str::to_owned).collect()
    } else {
        word.chars().map(String::from).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::HaltMode;

    const SMALL: &str = "\
# tiny machine
states: q0 q1
input: 0
tape: 0 1 B
blank: B
start: q0
final: q1
trans: q0 0 -> q1 1 R @ 0.5
";

    #[test]
    fn parses_small_machine_with_defaults() {
        let p = parse_machine(SMALL).unwrap();
        assert_eq!(p.machine.num_states(), 2);
        assert_eq!(p.config, ResolutionConfig::default());
        assert_eq!(p.config.f1, F1Strategy::GMean);
        assert_eq!(p.config.halt, HaltMode::ConsumeInput);
        assert_eq!(p.config.max_steps, 1_000_000);
    }

    #[test]
    fn weight_range_reported_at_line() {
        let doc = SMALL.replace("@ 0.5", "@ 1.3");
        let err = parse_machine(&doc).unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].code, "WEIGHT_RANGE");
        assert_eq!(err[0].line, 8);
        assert_eq!(err[0].column, 8);
    }

    #[test]
    fn structural_errors() {
        let err = parse_machine(&format!("{SMALL}blank: 1\n")).unwrap_err();
        assert_eq!(err[0].code, "DUPLICATE_BLANK");
        assert_eq!(err[0].line, 9);

        let err = parse_machine(&format!("{SMALL}bogus: 1\n")).unwrap_err();
        assert_eq!(err[0].code, "UNKNOWN_DIRECTIVE");

        let err = parse_machine(&SMALL.replace(" R @", " X @")).unwrap_err();
        assert_eq!(err[0].code, "MALFORMED_TRANSITION");
        assert_eq!(err[0].column, 21);

        let err = parse_machine(&SMALL.replace("-> q1", "q1")).unwrap_err();
        assert_eq!(err[0].code, "MALFORMED_TRANSITION");

        let err = parse_machine(&SMALL.replace("blank: B\n", "")).unwrap_err();
        assert_eq!(err[0].code, "MISSING_BLANK");

        let err = parse_machine(&format!("{SMALL}config: f1=median\n")).unwrap_err();
        assert_eq!(err[0].code, "BAD_CONFIG");

        let err = parse_machine(&format!("{SMALL}config: f1=min f1=max\n")).unwrap_err();
        assert_eq!(err[0].code, "DUPLICATE_CONFIG");
    }

    #[test]
    fn undeclared_state_and_symbol() {
        let err = parse_machine(&SMALL.replace("-> q1 1", "-> q7 z")).unwrap_err();
        let codes: Vec<_> = err.iter().map(|d| d.code.as_str()).collect();
        assert_eq!(codes, vec!["UNKNOWN_STATE", "UNKNOWN_SYMBOL"]);
        assert!(err.iter().all(|d| d.line == 8));
    }

    #[test]
    fn start_memberships_and_config() {
        let doc = SMALL.replace("start: q0", "start: q0@0.25 q1")
            + "config: f1=yager:2 f2=amean f3=cardinality f4=sigma-count\nconfig: halt=quiescent max-steps=9 inactive=persist accept-f2=max\n";
        let p = parse_machine(&doc).unwrap();
        assert_eq!(p.machine.initial_mv(), &[0.25, 1.0]);
        assert_eq!(p.config.f1, F1Strategy::Yager(2.0));
        assert_eq!(p.config.f3, ChoiceStrategy::Cardinality);
        assert_eq!(p.config.halt, HaltMode::Quiescent);
        assert_eq!(p.config.max_steps, 9);
        assert_eq!(p.config.acceptance_f2, Some(F2Strategy::Max));
    }

    #[test]
    fn crlf_and_order_insensitive() {
        let shuffled = "trans: q0 0 -> q1 1 R @ 0.5\r\nfinal: q1\r\nblank: B\r\nstart: q0\r\ntape: 0 1 B\r\ninput: 0\r\nstates: q0 q1\r\n";
        assert_eq!(canonicalize(shuffled).unwrap(), canonicalize(SMALL).unwrap());
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let once = canonicalize(SMALL).unwrap();
        assert_eq!(canonicalize(&once).unwrap(), once);
        assert!(once.contains("trans: q0 0 -> q1 1 R @ 0.5\n"));
    }

    #[test]
    fn split_input_modes() {
        assert_eq!(split_input("abc"), vec!["a", "b", "c"]);
        assert_eq!(split_input("ab c"), vec!["ab", "c"]);
        assert!(split_input("").is_empty());
    }
}
