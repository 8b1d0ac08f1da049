//! The zero-block coding `h`, the four-blind-counter automaton `𝓑` that
//! simulates a one-counter automaton on `h`-codes, the shape classifier,
//! the guard language automaton `𝓛`, the union `𝒫_𝒜` and the shuffle
//! product.
//!
//! `h(x) = A 0 x(1) B 0² x(2) A 0³ x(3) B …`: segment `i` starts with a
//! separator (`A` for odd `i`, `B` for even `i`), then `i` zeros, then
//! `x(i)`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::error::{Error, Result};
use crate::model::{
    Acceptance, Configuration, CounterKind, CounterMachine, Guard, MachineBuilder, StateId, SymbolId, Transition,
};
use crate::semantics::RunPrefix;

pub const SEP_A: &str = "A";
pub const SEP_B: &str = "B";
pub const ZERO: &str = "0";
const RESERVED: [&str; 3] = [SEP_A, SEP_B, ZERO];

fn check_sigma<S: AsRef<str>>(sigma: &[S]) -> Result<()> {
    if let Some(s) = sigma.iter().find(|s| RESERVED.contains(&s.as_ref())) {
        return Err(Error::ReservedSymbol(s.as_ref().to_string()));
    }
    Ok(())
}

/// `Σ ∪ {A, B, 0}` in that order.
pub fn gamma<S: AsRef<str>>(sigma: &[S]) -> Vec<String> {
    sigma.iter().map(|s| s.as_ref().to_string()).chain(RESERVED.iter().map(|s| s.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HCodePrefix {
    pub x: Vec<String>,
    pub encoded: Vec<String>,
    /// Index in `encoded` of each segment's separator.
    pub boundaries: Vec<usize>,
}

impl fmt::Display for HCodePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.encoded.iter().try_for_each(|s| f.write_str(s))
    }
}

/// The prefix of `h(x)` through segment `segments`.
pub fn h_encode_prefix<S: AsRef<str>>(sigma: &[S], x: &[&str], segments: usize) -> Result<HCodePrefix> {
    check_sigma(sigma)?;
    if segments > x.len() {
        return Err(Error::InvalidArgument(format!("{segments} segments requested from a word of length {}", x.len())));
    }
    if let Some(a) = x.iter().find(|a| !sigma.iter().any(|s| s.as_ref() == **a)) {
        return Err(Error::UnknownLetter(a.to_string()));
    }
    let mut encoded = Vec::new();
    let mut boundaries = Vec::new();
    for (i, a) in x[..segments].iter().enumerate() {
        boundaries.push(encoded.len());
        encoded.push(if i % 2 == 0 { SEP_A } else { SEP_B }.to_string());
        encoded.extend(core::iter::repeat_n(ZERO.to_string(), i + 1));
        encoded.push(a.to_string());
    }
    Ok(HCodePrefix { x: x.iter().map(|s| s.to_string()).collect(), encoded, boundaries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeReport {
    /// The word is a prefix of some word of the shape language.
    pub matches_r: bool,
    /// Lengths `n_i` of the completed zero runs (those followed by a letter).
    pub runs: Vec<usize>,
    /// First (1-based) index with `n_i ≠ i`.
    pub i0: Option<usize>,
}

/// Parse `A 0^{n₁} x(1) B 0^{n₂} x(2) A …`.
pub fn classify_shape<S: AsRef<str>>(sigma: &[S], y: &[&str]) -> ShapeReport {
    #[derive(PartialEq)]
    enum Expect {
        Sep,
        FirstZero,
        ZeroOrLetter,
    }
    let is_letter = |a: &str| sigma.iter().any(|s| s.as_ref() == a);
    let mut runs = Vec::new();
    let mut expect = Expect::Sep;
    let mut zeros = 0usize;
    let mut matches_r = true;
    for &a in y {
        let next_sep = if runs.len() % 2 == 0 { SEP_A } else { SEP_B };
        match expect {
            Expect::Sep if a == next_sep => expect = Expect::FirstZero,
            Expect::FirstZero if a == ZERO => {
                zeros = 1;
                expect = Expect::ZeroOrLetter;
            }
            Expect::ZeroOrLetter if a == ZERO => zeros += 1,
            Expect::ZeroOrLetter if is_letter(a) => {
                runs.push(zeros);
                expect = Expect::Sep;
            }
            _ => {
                matches_r = false;
                break;
            }
        }
    }
    let i0 = runs.iter().enumerate().find(|(i, n)| **n != i + 1).map(|(i, _)| i + 1);
    ShapeReport { matches_r, runs, i0 }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sep {
    A,
    B,
}

/// Progress through the draining pair of the current segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Drain {
    /// Decrementing the first counter of the pair.
    First,
    /// Decrementing the second counter of the pair.
    Second,
    /// The last zero of the segment has been read.
    Closed,
}

/// Progress through the filling pair: `U` counts `u_i`, `V` counts `v_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fill {
    U,
    V,
}

/// Finite control of `𝓑`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BState {
    /// After a letter of `Σ` (or at the start): the stored state of `𝒜`, the
    /// counter change `N` still to be realized, and the expected separator.
    Await { q: StateId, pending: i8, next: Sep },
    /// Inside a zero run. `offset` is the number of `u`-increments minus the
    /// number of first-counter decrements so far; it ends equal to `pending`.
    Zeros { q: StateId, pending: i8, odd: bool, drain: Drain, fill: Fill, offset: i8, u_nonempty: bool },
}

impl BState {
    fn name(&self, a: &CounterMachine) -> String {
        match *self {
            BState::Await { q, pending, next } => format!("await({},{pending:+},{next:?})", a.state_name(q)),
            BState::Zeros { q, pending, odd, drain, fill, offset, u_nonempty } => format!(
                "zeros({},{pending:+},{},{},{},{offset:+},{})",
                a.state_name(q),
                if odd { "odd" } else { "even" },
                match drain {
                    Drain::First => "first",
                    Drain::Second => "second",
                    Drain::Closed => "closed",
                },
                if fill == Fill::U { "u" } else { "v" },
                if u_nonempty { "u+" } else { "u0" }
            ),
        }
    }
}

/// `𝓑` with the bookkeeping needed to translate runs.
#[derive(Clone, Debug)]
pub struct SimulationAutomaton {
    pub machine: CounterMachine,
    /// The simulated transition of `𝒜` behind each transition on a letter of `Σ`.
    pub source_transition: Vec<Option<usize>>,
    pub states: Vec<BState>,
}

/// Counter indices `(first, second)` filled during odd and drained during
/// even segments, and the other pair.
const PAIR_ODD_FILL: (usize, usize) = (0, 1);
const PAIR_EVEN_FILL: (usize, usize) = (2, 3);

fn pairs(odd: bool) -> ((usize, usize), (usize, usize)) {
    if odd {
        (PAIR_ODD_FILL, PAIR_EVEN_FILL)
    } else {
        (PAIR_EVEN_FILL, PAIR_ODD_FILL)
    }
}

fn require_one_counter_buchi(a: &CounterMachine) -> Result<&BTreeSet<StateId>> {
    if a.k() != 1 {
        return Err(Error::NotOneCounter(a.k()));
    }
    let Acceptance::Buchi(f) = &a.acceptance else {
        return Err(Error::NotBuchi(a.acceptance.kind_name()));
    };
    if a.transitions.iter().any(|t| !t.copies.is_empty()) {
        return Err(Error::InvalidArgument("the simulated automaton may not copy counters".into()));
    }
    check_sigma(&a.alphabet)?;
    Ok(f)
}

/// Build `𝓑` for a one-counter Büchi automaton `𝒜` (zero tests allowed).
pub fn build_b(a: &CounterMachine) -> Result<SimulationAutomaton> {
    let accepting = require_one_counter_buchi(a)?;
    let alphabet = gamma(&a.alphabet);
    let sigma_len = a.alphabet.len();
    let (sep_a, sep_b, zero) = (SymbolId(sigma_len), SymbolId(sigma_len + 1), SymbolId(sigma_len + 2));
    let mut b = MachineBuilder::new(&format!("{}|B", a.name), &alphabet, vec![CounterKind::Blind; 4]);
    let mut index: BTreeMap<BState, StateId> = BTreeMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut source_transition = Vec::new();
    let mut intern =
        |s: BState, b: &mut MachineBuilder, states: &mut Vec<BState>, queue: &mut VecDeque<BState>| -> StateId {
            *index.entry(s).or_insert_with(|| {
                let id = b.state(&s.name(a));
                states.push(s);
                queue.push_back(s);
                id
            })
        };
    let start = BState::Await { q: a.initial, pending: 0, next: Sep::A };
    let initial = intern(start, &mut b, &mut states, &mut queue);
    b.initial(initial);
    while let Some(s) = queue.pop_front() {
        let from = intern(s, &mut b, &mut states, &mut queue);
        let mut out: Vec<(SymbolId, BState, Vec<i8>, Option<usize>)> = Vec::new();
        match s {
            BState::Await { q, pending, next } => {
                let letter = if next == Sep::A { sep_a } else { sep_b };
                let odd = next == Sep::A;
                let z =
                    BState::Zeros { q, pending, odd, drain: Drain::First, fill: Fill::U, offset: 0, u_nonempty: false };
                out.push((letter, z, vec![0; 4], None));
            }
            BState::Zeros { q, pending, odd, drain, fill, offset, u_nonempty } => {
                if drain == Drain::Closed && offset == pending {
                    for letter in (0..sigma_len).map(SymbolId) {
                        for ti in a.outgoing(q, letter) {
                            let t = &a.transitions[ti];
                            if !t.guard[0].admits_bit(u_nonempty) || (t.delta[0] < 0 && !u_nonempty) {
                                continue;
                            }
                            let next = if odd { Sep::B } else { Sep::A };
                            out.push((
                                letter,
                                BState::Await { q: t.target, pending: t.delta[0], next },
                                vec![0; 4],
                                Some(ti),
                            ));
                        }
                    }
                }
                if drain != Drain::Closed {
                    let (fill_pair, drain_pair) = pairs(odd);
                    for d in [Drain::First, Drain::Second, Drain::Closed].into_iter().filter(|d| *d >= drain) {
                        for f in [Fill::U, Fill::V].into_iter().filter(|f| *f >= fill) {
                            let off = offset - i8::from(d == Drain::First && f == Fill::V)
                                + i8::from(d != Drain::First && f == Fill::U);
                            if off != 0 && off != pending {
                                continue;
                            }
                            let mut delta = vec![0i8; 4];
                            match d {
                                Drain::First => delta[drain_pair.0] = -1,
                                Drain::Second => delta[drain_pair.1] = -1,
                                Drain::Closed => {}
                            }
                            delta[if f == Fill::U { fill_pair.0 } else { fill_pair.1 }] += 1;
                            let next = BState::Zeros {
                                q,
                                pending,
                                odd,
                                drain: d,
                                fill: f,
                                offset: off,
                                u_nonempty: u_nonempty || f == Fill::U,
                            };
                            out.push((zero, next, delta, None));
                        }
                    }
                }
            }
        }
        out.sort_by_key(|(letter, ..)| *letter);
        for (letter, next, delta, src) in out {
            let to = intern(next, &mut b, &mut states, &mut queue);
            b.push(Transition::new(from, letter, to, 4).with_delta(&delta));
            source_transition.push(src);
        }
    }
    for (i, s) in states.iter().enumerate() {
        if let BState::Await { q, .. } = s {
            if accepting.contains(q) {
                b.accepting(StateId(i));
            }
        }
    }
    Ok(SimulationAutomaton { machine: b.build(), source_transition, states })
}

impl SimulationAutomaton {
    fn step(&self, run: &mut RunPrefix, letter: SymbolId, pick: impl Fn(usize, &BState) -> bool) -> Result<()> {
        let last = run.last().clone();
        let ti = self
            .machine
            .outgoing(last.state, letter)
            .find(|&ti| pick(ti, &self.states[self.machine.transitions[ti].target.0]))
            .ok_or_else(|| {
                Error::InvalidRun(format!("no matching transition on `{}`", self.machine.symbol_name(letter)))
            })?;
        let t = &self.machine.transitions[ti];
        let next =
            t.fire(&last.counters)?.ok_or_else(|| Error::InvalidRun("counter underflow in the lifted run".into()))?;
        run.configs.push(Configuration::new(t.target, next));
        run.transitions.push(ti);
        Ok(())
    }

    fn sigma_len(&self) -> usize {
        self.machine.alphabet.len() - 3
    }
}

/// Lift a run of `𝒜` (from its initial configuration) to the run of `𝓑`
/// on the `h`-code of the same word, one segment per step.
pub fn lift_run(sa: &SimulationAutomaton, a: &CounterMachine, run_a: &RunPrefix) -> Result<RunPrefix> {
    run_a.check(a)?;
    if run_a.configs[0] != a.initial_config() {
        return Err(Error::InvalidRun("the run does not start in the initial configuration".into()));
    }
    let n_letters = sa.sigma_len();
    let (sep_a, sep_b, zero) = (SymbolId(n_letters), SymbolId(n_letters + 1), SymbolId(n_letters + 2));
    let c = |i: usize| run_a.configs[i].counters[0];
    let mut run = RunPrefix::seed(sa.machine.initial_config());
    for i in 1..=run_a.steps() {
        let sep = if i % 2 == 1 { sep_a } else { sep_b };
        sa.step(&mut run, sep, |_, _| true)?;
        let u = c(i - 1);
        let k = if i >= 2 { c(i - 2) } else { 0 };
        for j in 1..=i as u64 {
            let want_drain = if j == i as u64 {
                Drain::Closed
            } else if j <= k {
                Drain::First
            } else {
                Drain::Second
            };
            let want_fill = if j <= u { Fill::U } else { Fill::V };
            sa.step(
                &mut run,
                zero,
                |_, s| matches!(s, BState::Zeros { drain, fill, .. } if *drain == want_drain && *fill == want_fill),
            )?;
        }
        let ta = run_a.transitions[i - 1];
        sa.step(&mut run, a.transitions[ta].letter, |ti, _| sa.source_transition[ti] == Some(ta))?;
    }
    Ok(run)
}

/// Project a run of `𝓑` on an `h`-prefix made of complete segments back to
/// the run of `𝒜` it simulates.
pub fn project_run(sa: &SimulationAutomaton, a: &CounterMachine, run_b: &RunPrefix) -> Result<RunPrefix> {
    run_b.check(&sa.machine)?;
    if run_b.configs[0] != sa.machine.initial_config() {
        return Err(Error::InvalidRun("the run does not start in the initial configuration".into()));
    }
    let word = run_b.word(&sa.machine);
    let tokens = sa.machine.decode(&word);
    let shape = classify_shape(&a.alphabet, &tokens);
    if !shape.matches_r || shape.i0.is_some() {
        return Err(Error::OutOfShape("the word is not a prefix of an h-code".into()));
    }
    let complete: usize = shape.runs.iter().map(|n| n + 2).sum();
    if complete != tokens.len() {
        return Err(Error::OutOfShape("the run ends inside a segment".into()));
    }
    let mut run = RunPrefix::seed(a.initial_config());
    let mut u = 0u64;
    for (i, &tb) in run_b.transitions.iter().enumerate() {
        match sa.states[sa.machine.transitions[tb].target.0] {
            BState::Zeros { fill: Fill::U, .. } if tokens[i] == ZERO => u += 1,
            BState::Await { .. } => {
                let ta = sa.source_transition[tb]
                    .ok_or_else(|| Error::InvalidRun(format!("step {i} simulates no transition")))?;
                let last = run.last().clone();
                if last.counters[0] != u {
                    return Err(Error::InvalidRun(format!(
                        "segment {} stores {u} but the counter is {}",
                        run.steps() + 1,
                        last.counters[0]
                    )));
                }
                let t = &a.transitions[ta];
                let next = t.fire(&last.counters)?.ok_or_else(|| Error::InvalidRun("projected run blocks".into()))?;
                run.configs.push(Configuration::new(t.target, next));
                run.transitions.push(ta);
                u = 0;
            }
            _ => {}
        }
    }
    run.check(a)?;
    Ok(run)
}

/// Union by a fresh initial state duplicating both initial states' moves.
/// The second machine's counters are mapped onto the first ones.
pub fn union(m1: &CounterMachine, m2: &CounterMachine, name: &str, prefixes: (&str, &str)) -> Result<CounterMachine> {
    if m1.alphabet != m2.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    let (f1, f2) = match (&m1.acceptance, &m2.acceptance) {
        (Acceptance::Buchi(f1), Acceptance::Buchi(f2)) => (f1, f2),
        (Acceptance::Buchi(_), other) | (other, _) => return Err(Error::NotBuchi(other.kind_name())),
    };
    let k = m1.k().max(m2.k());
    let mut kinds = m1.counter_kinds.clone();
    kinds.extend(m2.counter_kinds.iter().skip(m1.k()));
    let mut b = MachineBuilder::new(name, &m1.alphabet, kinds);
    let init = b.state("init");
    b.initial(init);
    let s1: Vec<StateId> = m1.states.iter().map(|s| b.state(&format!("{}{s}", prefixes.0))).collect();
    let s2: Vec<StateId> = m2.states.iter().map(|s| b.state(&format!("{}{s}", prefixes.1))).collect();
    let widen = |t: &Transition, source: StateId, target: StateId| {
        let mut guard = t.guard.clone();
        guard.resize(k, Guard::Any);
        let mut delta = t.delta.clone();
        delta.resize(k, 0);
        Transition { source, target, guard, delta, copies: t.copies.clone(), letter: t.letter }
    };
    for (m, map) in [(m1, &s1), (m2, &s2)] {
        for t in m.transitions.iter().filter(|t| t.source == m.initial) {
            b.push(widen(t, init, map[t.target.0]));
        }
    }
    for (m, map) in [(m1, &s1), (m2, &s2)] {
        for t in &m.transitions {
            b.push(widen(t, map[t.source.0], map[t.target.0]));
        }
    }
    for q in f1 {
        b.accepting(s1[q.0]);
    }
    for q in f2 {
        b.accepting(s2[q.0]);
    }
    Ok(b.build())
}

/// Words with no initial segment in `A·0·Σ·B`.
fn build_l1<S: AsRef<str>>(sigma: &[S]) -> CounterMachine {
    let alphabet = gamma(sigma);
    let mut b = MachineBuilder::new("L1", &alphabet, vec![CounterKind::Blind]);
    let s: Vec<StateId> = (0..4).map(|i| b.state(&format!("s{i}"))).collect();
    let sink = b.state("sink");
    b.initial(s[0]);
    b.accepting(sink);
    let letters: Vec<String> = alphabet.clone();
    let in_sigma = |x: &str| sigma.iter().any(|s| s.as_ref() == x);
    for x in &letters {
        let a = b.letter(x);
        let expected = [x == SEP_A, x == ZERO, in_sigma(x), x == SEP_B];
        for i in 0..4 {
            if !expected[i] {
                b.push(Transition::new(s[i], a, sink, 1));
            } else if i < 3 {
                b.push(Transition::new(s[i], a, s[i + 1], 1));
            }
        }
        b.push(Transition::new(sink, a, sink, 1));
    }
    b.build()
}

/// Words containing `X·0ⁿ·a·Y·0ᵐ·b` with `{X, Y} = {A, B}` and `1 ≤ m ≤ n`.
fn build_l2<S: AsRef<str>>(sigma: &[S]) -> CounterMachine {
    let alphabet = gamma(sigma);
    let mut b = MachineBuilder::new("L2", &alphabet, vec![CounterKind::Blind]);
    let wait = b.state("wait");
    b.initial(wait);
    let sink = b.state("sink");
    b.accepting(sink);
    for x in &alphabet {
        let a = b.letter(x);
        b.push(Transition::new(wait, a, wait, 1));
    }
    for (x, y) in [(SEP_A, SEP_B), (SEP_B, SEP_A)] {
        let st: Vec<StateId> = (1..=5).map(|i| b.state(&format!("{x}{i}"))).collect();
        let zero = b.letter(ZERO);
        b.push(Transition::new(wait, b.letter(x), st[0], 1));
        b.push(Transition::new(st[0], zero, st[1], 1).with_delta(&[1]));
        b.push(Transition::new(st[1], zero, st[1], 1).with_delta(&[1]));
        for s in sigma {
            b.push(Transition::new(st[1], b.letter(s.as_ref()), st[2], 1));
        }
        b.push(Transition::new(st[2], b.letter(y), st[3], 1));
        b.push(Transition::new(st[3], zero, st[4], 1).with_delta(&[-1]));
        b.push(Transition::new(st[4], zero, st[4], 1).with_delta(&[-1]));
        for s in sigma {
            b.push(Transition::new(st[4], b.letter(s.as_ref()), sink, 1));
        }
    }
    for x in &alphabet {
        let a = b.letter(x);
        b.push(Transition::new(sink, a, sink, 1));
    }
    b.build()
}

/// One-blind-counter Büchi automaton for `𝓛 = 𝓛₁ ∪ 𝓛₂` over `Σ ∪ {A, B, 0}`.
pub fn build_l<S: AsRef<str>>(sigma: &[S]) -> Result<CounterMachine> {
    check_sigma(sigma)?;
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("empty alphabet".into()));
    }
    union(&build_l1(sigma), &build_l2(sigma), "L", ("l1.", "l2."))
}

/// `𝒫_𝒜`: the union of `𝓑` and `𝓛`, with `𝓛`'s counter on counter 0.
pub fn build_pa(a: &CounterMachine) -> Result<CounterMachine> {
    let sa = build_b(a)?;
    let l = build_l(&a.alphabet)?;
    union(&sa.machine, &l, &format!("{}|PA", a.name), ("b.", "l."))
}

/// Automaton for `Sh(L(A), L(B)) = {x(1)y(1)x(2)y(2)… : x ∈ L(A), y ∈ L(B)}`.
pub fn shuffle(ma: &CounterMachine, mb: &CounterMachine) -> Result<CounterMachine> {
    if ma.alphabet != mb.alphabet {
        return Err(Error::AlphabetMismatch);
    }
    let (fa, fb) = match (&ma.acceptance, &mb.acceptance) {
        (Acceptance::Buchi(fa), Acceptance::Buchi(fb)) => (fa, fb),
        (Acceptance::Buchi(_), other) | (other, _) => return Err(Error::NotBuchi(other.kind_name())),
    };
    let (ka, kb) = (ma.k(), mb.k());
    let mut kinds = ma.counter_kinds.clone();
    kinds.extend(mb.counter_kinds.iter().copied());
    let mut b = MachineBuilder::new(&format!("{}|{}|shuffle", ma.name, mb.name), &ma.alphabet, kinds);
    type S = (StateId, StateId, bool, bool);
    let name = |s: &S| format!("({},{},{},{})", ma.state_name(s.0), mb.state_name(s.1), u8::from(s.2), u8::from(s.3));
    let mut index: BTreeMap<S, StateId> = BTreeMap::new();
    let mut order = Vec::new();
    let start: S = (ma.initial, mb.initial, false, false);
    let mut queue = VecDeque::from([start]);
    index.insert(start, b.state(&name(&start)));
    order.push(start);
    b.initial(index[&start]);
    while let Some(s) = queue.pop_front() {
        let (qa, qb, second, flag) = s;
        let next_flag = if !flag && fa.contains(&qa) {
            true
        } else if flag && fb.contains(&qb) {
            false
        } else {
            flag
        };
        let moves: Vec<(Transition, S)> = if !second {
            ma.transitions
                .iter()
                .filter(|t| t.source == qa)
                .map(|t| {
                    let mut guard = t.guard.clone();
                    guard.extend(core::iter::repeat_n(Guard::Any, kb));
                    let mut delta = t.delta.clone();
                    delta.extend(core::iter::repeat_n(0, kb));
                    let tr = Transition { guard, delta, ..t.clone() };
                    (tr, (t.target, qb, true, next_flag))
                })
                .collect()
        } else {
            mb.transitions
                .iter()
                .filter(|t| t.source == qb)
                .map(|t| {
                    let mut guard = vec![Guard::Any; ka];
                    guard.extend(t.guard.iter().copied());
                    let mut delta = vec![0; ka];
                    delta.extend(t.delta.iter().copied());
                    let copies = t.copies.iter().map(|&(d, s)| (d + ka, s + ka)).collect();
                    let tr = Transition { guard, delta, copies, ..t.clone() };
                    (tr, (qa, t.target, false, next_flag))
                })
                .collect()
        };
        let from = index[&s];
        for (t, target) in moves {
            let to = *index.entry(target).or_insert_with(|| {
                queue.push_back(target);
                order.push(target);
                b.state(&name(&target))
            });
            b.push(Transition { source: from, target: to, ..t });
        }
    }
    for s in &order {
        if !s.3 && fa.contains(&s.0) {
            b.accepting(index[s]);
        }
    }
    let mut m = b.build();
    m.copy_capable = ma.copy_capable || mb.copy_capable;
    Ok(m)
}
