//! Plain-text machine format.
//!
//! ```text
//! machine eq
//! alphabet a b
//! counters blind testable
//! copying
//! states p q
//! initial p
//! accepting q
//! t p a -> q guard * z delta +1 -1 copy 1<-0
//! ```
//!
//! Acceptance is either one `accepting` line (Büchi), any number of
//! `muller-set` lines, or any number of `rabin avoid … visit …` lines.
//! Guards are `*` (any), `z` (zero) and `+` (positive); `guard`, `delta`
//! and `copy` clauses are optional and default to no constraint, no change
//! and no copies. A token starting with `//` begins a comment running to
//! the end of the line.

use std::collections::BTreeSet;
use std::fmt::Write;

use blindcount_core::sigma11::{FiniteTreeSet, TreeNode};
use blindcount_core::{
    Acceptance, CounterKind, CounterMachine, Guard, MullerFamily, RabinPair, StateId, SymbolId, Transition,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error(transparent)]
    Semantic(#[from] blindcount_core::Error),
}

/// A whitespace-separated token with its 1-based column.
#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain([(line.len(), ' ')]) {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token { text: &line[s..i], col: line[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Cursor<'a> {
    line: usize,
    toks: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col, message: message.into() }
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, ParseError> {
        let t = self.toks.get(self.pos).copied().ok_or_else(|| self.err(self.end_col, format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).map(|t| t.text)
    }

    fn rest(&mut self) -> Vec<Token<'a>> {
        let out = self.toks[self.pos..].to_vec();
        self.pos = self.toks.len();
        out
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => Err(self.err(t.col, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    alphabet: Option<Vec<String>>,
    kinds: Option<Vec<CounterKind>>,
    copying: bool,
    states: Option<Vec<String>>,
    initial: Option<StateId>,
    buchi: Option<BTreeSet<StateId>>,
    sets: Vec<BTreeSet<StateId>>,
    pairs: Vec<RabinPair>,
    transitions: Vec<Transition>,
}

impl Draft {
    fn state(&self, c: &Cursor<'_>, t: Token<'_>) -> Result<StateId, ParseError> {
        let states = self.states.as_ref().ok_or_else(|| c.err(t.col, "`states` must come before state references"))?;
        states
            .iter()
            .position(|s| s == t.text)
            .map(StateId)
            .ok_or_else(|| c.err(t.col, format!("unknown state `{}`", t.text)))
    }

    fn state_set(&self, c: &Cursor<'_>, toks: &[Token<'_>]) -> Result<BTreeSet<StateId>, ParseError> {
        toks.iter().map(|&t| self.state(c, t)).collect()
    }

    fn k(&self, c: &Cursor<'_>, col: usize) -> Result<usize, ParseError> {
        self.kinds.as_ref().map(Vec::len).ok_or_else(|| c.err(col, "`counters` must come before transitions"))
    }
}

fn parse_guard(c: &Cursor<'_>, t: Token<'_>, kind: CounterKind) -> Result<Guard, ParseError> {
    let g = match t.text {
        "*" => Guard::Any,
        "z" => Guard::Zero,
        "+" => Guard::Positive,
        other => return Err(c.err(t.col, format!("unknown guard `{other}`"))),
    };
    if g != Guard::Any && kind == CounterKind::Blind {
        return Err(c.err(t.col, "zero test on a blind counter"));
    }
    Ok(g)
}

fn parse_delta(c: &Cursor<'_>, t: Token<'_>) -> Result<i8, ParseError> {
    match t.text {
        "+1" | "1" => Ok(1),
        "0" => Ok(0),
        "-1" => Ok(-1),
        other => Err(c.err(t.col, format!("delta must be -1, 0 or +1, found `{other}`"))),
    }
}

fn parse_copy(c: &Cursor<'_>, t: Token<'_>, k: usize) -> Result<(usize, usize), ParseError> {
    let bad = || c.err(t.col, format!("copy must look like `dst<-src`, found `{}`", t.text));
    let (d, s) = t.text.split_once("<-").ok_or_else(bad)?;
    let (d, s): (usize, usize) = (d.parse().map_err(|_| bad())?, s.parse().map_err(|_| bad())?);
    if d >= k || s >= k {
        return Err(c.err(t.col, format!("copy `{}` names a counter outside 0..{k}", t.text)));
    }
    Ok((d, s))
}

fn parse_transition(d: &Draft, c: &mut Cursor<'_>) -> Result<Transition, ParseError> {
    let src = c.next("source state")?;
    let source = d.state(c, src)?;
    let letter = c.next("letter")?;
    let alphabet = d.alphabet.as_ref().ok_or_else(|| c.err(letter.col, "`alphabet` must come before transitions"))?;
    let letter_id = alphabet
        .iter()
        .position(|a| a == letter.text)
        .ok_or_else(|| c.err(letter.col, format!("unknown letter `{}`", letter.text)))?;
    let arrow = c.next("`->`")?;
    if arrow.text != "->" {
        return Err(c.err(arrow.col, format!("expected `->`, found `{}`", arrow.text)));
    }
    let dst = c.next("target state")?;
    let target = d.state(c, dst)?;
    let k = d.k(c, src.col)?;
    let kinds = d.kinds.as_ref().expect("checked by k");
    let mut t = Transition::new(source, SymbolId(letter_id), target, k);
    let mut seen = BTreeSet::new();
    while let Some(word) = c.peek() {
        let kw = c.next("clause")?;
        if !seen.insert(word) {
            return Err(c.err(kw.col, format!("duplicate `{word}` clause")));
        }
        match word {
            "guard" => {
                for (j, kind) in kinds.iter().enumerate() {
                    let g = c.next(&format!("guard for counter {j}"))?;
                    t.guard[j] = parse_guard(c, g, *kind)?;
                }
            }
            "delta" => {
                for j in 0..k {
                    let x = c.next(&format!("delta for counter {j}"))?;
                    t.delta[j] = parse_delta(c, x)?;
                }
            }
            "copy" => {
                while let Some(x) = c.peek() {
                    if matches!(x, "guard" | "delta" | "copy") {
                        break;
                    }
                    let tok = c.next("copy")?;
                    t.copies.push(parse_copy(c, tok, k)?);
                }
                if t.copies.is_empty() {
                    return Err(c.err(c.here(), "`copy` needs at least one `dst<-src`"));
                }
            }
            other => return Err(c.err(kw.col, format!("unknown clause `{other}`"))),
        }
    }
    Ok(t)
}

fn set_once<T>(slot: &mut Option<T>, value: T, c: &Cursor<'_>, col: usize, what: &str) -> Result<(), ParseError> {
    if slot.is_some() {
        return Err(c.err(col, format!("duplicate `{what}` line")));
    }
    *slot = Some(value);
    Ok(())
}

/// Parse and validate a machine.
pub fn parse_machine(text: &str) -> Result<CounterMachine, FormatError> {
    let mut d = Draft::default();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        last_line = i + 1;
        let toks: Vec<Token> = tokens(raw).into_iter().take_while(|t| !t.text.starts_with("//")).collect();
        let Some(&head) = toks.first() else { continue };
        let mut c = Cursor { line: i + 1, toks, pos: 1, end_col: raw.chars().count() + 1 };
        match head.text {
            "machine" => {
                let name = c.next("machine name")?.text.to_string();
                set_once(&mut d.name, name, &c, head.col, "machine")?;
            }
            "alphabet" => {
                let symbols: Vec<String> = c.rest().iter().map(|t| t.text.to_string()).collect();
                if symbols.is_empty() {
                    return Err(c.err(c.end_col, "empty alphabet").into());
                }
                let mut seen = BTreeSet::new();
                if let Some(s) = symbols.iter().find(|s| !seen.insert(s.as_str())) {
                    return Err(c.err(head.col, format!("duplicate symbol `{s}`")).into());
                }
                set_once(&mut d.alphabet, symbols, &c, head.col, "alphabet")?;
            }
            "counters" => {
                let kinds = c
                    .rest()
                    .iter()
                    .map(|t| match t.text {
                        "blind" => Ok(CounterKind::Blind),
                        "testable" => Ok(CounterKind::Testable),
                        other => Err(c.err(t.col, format!("unknown counter kind `{other}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if kinds.is_empty() {
                    return Err(c.err(c.end_col, "at least one counter is required").into());
                }
                set_once(&mut d.kinds, kinds, &c, head.col, "counters")?;
            }
            "copying" => {
                if d.copying {
                    return Err(c.err(head.col, "duplicate `copying` line").into());
                }
                d.copying = true;
            }
            "states" => {
                let states: Vec<String> = c.rest().iter().map(|t| t.text.to_string()).collect();
                if states.is_empty() {
                    return Err(c.err(c.end_col, "at least one state is required").into());
                }
                let mut seen = BTreeSet::new();
                if let Some(s) = states.iter().find(|s| !seen.insert(s.as_str())) {
                    return Err(c.err(head.col, format!("duplicate state `{s}`")).into());
                }
                set_once(&mut d.states, states, &c, head.col, "states")?;
            }
            "initial" => {
                let t = c.next("initial state")?;
                let s = d.state(&c, t)?;
                set_once(&mut d.initial, s, &c, head.col, "initial")?;
            }
            "accepting" => {
                let toks = c.rest();
                let set = d.state_set(&c, &toks)?;
                set_once(&mut d.buchi, set, &c, head.col, "accepting")?;
            }
            "muller-set" => {
                let toks = c.rest();
                if toks.is_empty() {
                    return Err(c.err(c.end_col, "a Muller set must be non-empty").into());
                }
                let set = d.state_set(&c, &toks)?;
                d.sets.push(set);
            }
            "rabin" => {
                let kw = c.next("`avoid`")?;
                if kw.text != "avoid" {
                    return Err(c.err(kw.col, format!("expected `avoid`, found `{}`", kw.text)).into());
                }
                let toks = c.rest();
                let split =
                    toks.iter().position(|t| t.text == "visit").ok_or_else(|| c.err(c.end_col, "expected `visit`"))?;
                let avoid = d.state_set(&c, &toks[..split])?;
                let visit = d.state_set(&c, &toks[split + 1..])?;
                d.pairs.push(RabinPair { avoid, visit });
            }
            "t" => {
                let t = parse_transition(&d, &mut c)?;
                d.transitions.push(t);
            }
            other => return Err(c.err(head.col, format!("unknown directive `{other}`")).into()),
        }
        c.finish()?;
    }
    let missing = |what: &str| ParseError { line: last_line.max(1), col: 1, message: format!("missing `{what}` line") };
    let acceptance = match (d.buchi, d.sets.is_empty(), d.pairs.is_empty()) {
        (Some(f), true, true) => Acceptance::Buchi(f),
        (None, false, true) => Acceptance::Muller(MullerFamily::Sets(d.sets)),
        (None, true, false) => Acceptance::Muller(MullerFamily::Pairs(d.pairs)),
        (None, true, true) => return Err(missing("accepting").into()),
        _ => {
            return Err(
                ParseError { line: last_line.max(1), col: 1, message: "mixed acceptance conditions".into() }.into()
            )
        }
    };
    let machine = CounterMachine {
        name: d.name.ok_or_else(|| missing("machine"))?,
        alphabet: d.alphabet.ok_or_else(|| missing("alphabet"))?,
        counter_kinds: d.kinds.ok_or_else(|| missing("counters"))?,
        states: d.states.ok_or_else(|| missing("states"))?,
        initial: d.initial.ok_or_else(|| missing("initial"))?,
        transitions: d.transitions,
        acceptance,
        copy_capable: d.copying,
    };
    machine.ensure_valid()?;
    Ok(machine)
}

fn join_states(m: &CounterMachine, set: &BTreeSet<StateId>) -> String {
    set.iter().map(|s| format!(" {}", m.state_name(*s))).collect()
}

/// Canonical text of a machine; `parse_machine` inverts it.
pub fn serialize_machine(m: &CounterMachine) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "machine {}", m.name);
    let _ = writeln!(out, "alphabet {}", m.alphabet.join(" "));
    let kinds: Vec<&str> =
        m.counter_kinds.iter().map(|k| if *k == CounterKind::Blind { "blind" } else { "testable" }).collect();
    let _ = writeln!(out, "counters {}", kinds.join(" "));
    if m.copy_capable {
        out.push_str("copying\n");
    }
    let _ = writeln!(out, "states {}", m.states.join(" "));
    let _ = writeln!(out, "initial {}", m.state_name(m.initial));
    match &m.acceptance {
        Acceptance::Buchi(f) => {
            let _ = writeln!(out, "accepting{}", join_states(m, f));
        }
        Acceptance::Muller(MullerFamily::Sets(sets)) => {
            for s in sets {
                let _ = writeln!(out, "muller-set{}", join_states(m, s));
            }
        }
        Acceptance::Muller(MullerFamily::Pairs(pairs)) => {
            for p in pairs {
                let _ = writeln!(out, "rabin avoid{} visit{}", join_states(m, &p.avoid), join_states(m, &p.visit));
            }
        }
    }
    for t in &m.transitions {
        let _ = write!(out, "t {} {} -> {}", m.state_name(t.source), m.symbol_name(t.letter), m.state_name(t.target));
        if t.guard.iter().any(|g| *g != Guard::Any) {
            out.push_str(" guard");
            for g in &t.guard {
                out.push_str(match g {
                    Guard::Any => " *",
                    Guard::Zero => " z",
                    Guard::Positive => " +",
                });
            }
        }
        if t.delta.iter().any(|d| *d != 0) {
            out.push_str(" delta");
            for d in &t.delta {
                out.push_str(match d {
                    1 => " +1",
                    -1 => " -1",
                    _ => " 0",
                });
            }
        }
        if !t.copies.is_empty() {
            out.push_str(" copy");
            for (dst, src) in &t.copies {
                let _ = write!(out, " {dst}<-{src}");
            }
        }
        out.push('\n');
    }
    out
}

/// Split a word given on the command line: whitespace-separated tokens
/// when it contains whitespace, single characters otherwise.
pub fn parse_word(machine: &CounterMachine, word: &str) -> Result<Vec<SymbolId>, blindcount_core::Error> {
    if word.chars().any(char::is_whitespace) {
        machine.encode(word.split_whitespace())
    } else {
        machine.encode_chars(word)
    }
}

/// Render a word for display, separating symbols only when some symbol is
/// longer than one character.
pub fn render_word(machine: &CounterMachine, word: &[SymbolId]) -> String {
    let sep = if machine.alphabet.iter().any(|s| s.chars().count() > 1) { " " } else { "" };
    machine.decode(word).join(sep)
}

/// A finite tree set file: one node per line (`ε` or `.` for the root,
/// otherwise a string over `L` and `R`), `//` comments allowed.
pub fn parse_tree_set(text: &str, depth: usize) -> Result<FiniteTreeSet, FormatError> {
    let mut members = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let node: TreeNode = line.parse().map_err(|_| ParseError {
            line: i + 1,
            col: raw.find(line).map_or(1, |p| raw[..p].chars().count() + 1),
            message: format!("`{line}` is not a tree node"),
        })?;
        members.insert(node);
    }
    let deepest = members.iter().map(TreeNode::len).max().unwrap_or(0);
    Ok(FiniteTreeSet::new(members, depth.max(deepest))?)
}

/// Human-readable description of a transition.
pub fn describe_transition(m: &CounterMachine, index: usize) -> String {
    let t = &m.transitions[index];
    let mut out =
        format!("#{index} {} -{}-> {}", m.state_name(t.source), m.symbol_name(t.letter), m.state_name(t.target));
    let delta: Vec<String> = t.delta.iter().map(|d| format!("{d:+}")).collect();
    let _ = write!(out, " ({})", delta.join(","));
    out
}
