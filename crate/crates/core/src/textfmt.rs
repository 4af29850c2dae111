//! Line-oriented text format for explicit automata and supervisors.
//!
//! Layout:
//!
//! ```text
//! states N initial I alphabet <event> <event> ...
//! mark S
//! trans S <event> S'
//! ```
//!
//! Supervisor files add a `robot <i>` header line and a
//! `certificate trim=<b> taskobs=<b> reciprocal=<b>` footer. The format is
//! the interchange between CLI subcommands and round-trips bit-exactly:
//! parsing a serialized automaton and re-serializing reproduces the bytes.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::event::Event;
use crate::explicit::{ExplicitAutomaton, StateId, StateMeta};
use crate::synthesis::{Certificate, Supervisor};

pub fn serialize_automaton(a: &ExplicitAutomaton) -> String {
    let mut out = String::new();
    write!(out, "states {} initial ", a.n_states()).unwrap();
    match a.initial() {
        Some(i) => write!(out, "{i}").unwrap(),
        None => out.push('-'),
    }
    out.push_str(" alphabet");
    for e in &a.alphabet {
        write!(out, " {e}").unwrap();
    }
    out.push('\n');
    for (s, &m) in a.marked.iter().enumerate() {
        if m {
            writeln!(out, "mark {s}").unwrap();
        }
    }
    for (s, row) in a.transitions.iter().enumerate() {
        for &(e, t) in row {
            writeln!(out, "trans {s} {e} {t}").unwrap();
        }
    }
    out
}

pub fn parse_automaton(text: &str) -> Result<ExplicitAutomaton> {
    let mut lines = text.lines().enumerate();
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty automaton file"))?;
    let automaton = parse_header(lineno + 1, header)?;
    finish_parse(automaton, lines, |_, _| Ok(()))
}

fn parse_header(lineno: usize, header: &str) -> Result<ParsedAutomaton> {
    let mut tokens = header.split_whitespace();
    let expect = |tokens: &mut dyn Iterator<Item = &str>, word: &str| -> Result<()> {
        match tokens.next() {
            Some(t) if t == word => Ok(()),
            other => Err(Error::parse(
                lineno,
                format!("expected `{word}`, found `{}`", other.unwrap_or("")),
            )),
        }
    };
    expect(&mut tokens, "states")?;
    let n: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(lineno, "bad state count"))?;
    expect(&mut tokens, "initial")?;
    let initial = tokens
        .next()
        .ok_or_else(|| Error::parse(lineno, "missing initial state"))?;
    if initial == "-" {
        if n != 0 {
            return Err(Error::parse(lineno, "missing initial state"));
        }
    } else {
        let i: usize = initial
            .parse()
            .map_err(|_| Error::parse(lineno, "bad initial state"))?;
        if n == 0 || i != 0 {
            return Err(Error::parse(lineno, "initial state must be 0"));
        }
    }
    expect(&mut tokens, "alphabet")?;
    let mut alphabet = BTreeSet::new();
    for tok in tokens {
        let e: Event = tok.parse().map_err(|m: String| Error::parse(lineno, m))?;
        alphabet.insert(e);
    }
    Ok(ParsedAutomaton { n, alphabet })
}

struct ParsedAutomaton {
    n: usize,
    alphabet: BTreeSet<Event>,
}

fn finish_parse<'a>(
    parsed: ParsedAutomaton,
    lines: impl Iterator<Item = (usize, &'a str)>,
    mut on_extra: impl FnMut(usize, &str) -> Result<()>,
) -> Result<ExplicitAutomaton> {
    let n = parsed.n;
    let mut marked = vec![false; n];
    let mut transitions: Vec<Vec<(Event, StateId)>> = vec![Vec::new(); n];
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("mark") => {
                let s: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&s| s < n)
                    .ok_or_else(|| Error::parse(lineno, "bad mark line"))?;
                marked[s] = true;
            }
            Some("trans") => {
                let s: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&s| s < n)
                    .ok_or_else(|| Error::parse(lineno, "bad source state"))?;
                let e: Event = tokens
                    .next()
                    .ok_or_else(|| Error::parse(lineno, "missing event"))?
                    .parse()
                    .map_err(|m: String| Error::parse(lineno, m))?;
                let t: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&t| t < n)
                    .ok_or_else(|| Error::parse(lineno, "bad target state"))?;
                if !parsed.alphabet.contains(&e) {
                    return Err(Error::parse(lineno, format!("event `{e}` not in alphabet")));
                }
                if transitions[s].iter().any(|&(pe, _)| pe == e) {
                    return Err(Error::parse(
                        lineno,
                        format!("duplicate transition on `{e}` from state {s}"),
                    ));
                }
                transitions[s].push((e, t as StateId));
            }
            Some(_) => on_extra(lineno, line)?,
            None => {}
        }
    }
    for row in &mut transitions {
        row.sort_by_key(|&(e, _)| e);
    }
    let meta = (0..n)
        .map(|i| StateMeta {
            locations: vec![i as u32].into_boxed_slice(),
            valuation: None,
        })
        .collect();
    Ok(ExplicitAutomaton {
        alphabet: parsed.alphabet,
        meta,
        marked,
        transitions,
        variables: None,
    })
}

pub fn serialize_supervisor(s: &Supervisor) -> String {
    let mut out = format!("robot {}\n", s.robot);
    out.push_str(&serialize_automaton(&s.automaton));
    let c = &s.certificate;
    writeln!(
        out,
        "certificate trim={} taskobs={} reciprocal={}",
        c.trim as u8, c.task_observer as u8, c.totally_reciprocal as u8
    )
    .unwrap();
    out
}

/// Parses a supervisor file back into its automaton, robot index and
/// certificate. Macrostate indices are not stored in the file; callers that
/// need them recompute from the structure.
pub fn parse_supervisor(text: &str) -> Result<(ExplicitAutomaton, u8, Certificate)> {
    let mut lines = text.lines().enumerate();
    let (lineno, robot_line) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty supervisor file"))?;
    let robot: u8 = robot_line
        .strip_prefix("robot ")
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| Error::parse(lineno + 1, "expected `robot <i>` header"))?;
    let (lineno, header) = lines
        .next()
        .ok_or_else(|| Error::parse(2, "missing automaton header"))?;
    let parsed = parse_header(lineno + 1, header)?;
    let mut certificate = None;
    let automaton = finish_parse(parsed, lines, |lineno, line| {
        let rest = line
            .strip_prefix("certificate ")
            .ok_or_else(|| Error::parse(lineno, format!("unexpected line `{line}`")))?;
        let mut cert = Certificate {
            trim: false,
            task_observer: false,
            totally_reciprocal: false,
        };
        for field in rest.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "bad certificate field"))?;
            let value = value == "1";
            match key {
                "trim" => cert.trim = value,
                "taskobs" => cert.task_observer = value,
                "reciprocal" => cert.totally_reciprocal = value,
                _ => return Err(Error::parse(lineno, format!("unknown field `{key}`"))),
            }
        }
        certificate = Some(cert);
        Ok(())
    })?;
    let certificate = certificate.ok_or_else(|| Error::parse(0, "missing certificate footer"))?;
    Ok((automaton, robot, certificate))
}
