//! Machines, transitions, configurations and acceptance conditions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CounterKind {
    /// Never tested against zero.
    Blind,
    /// May carry zero / positive guards.
    Testable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Guard {
    Zero,
    Positive,
    Any,
}

impl Guard {
    pub fn admits(self, value: u64) -> bool {
        match self {
            Guard::Zero => value == 0,
            Guard::Positive => value > 0,
            Guard::Any => true,
        }
    }

    /// Whether the guard allows the zero/positive bit `positive`.
    pub fn admits_bit(self, positive: bool) -> bool {
        match self {
            Guard::Zero => !positive,
            Guard::Positive => positive,
            Guard::Any => true,
        }
    }
}

/// One transition. Copies `(dst, src)` read the values before the step and
/// are applied before the deltas, so `dst` ends at `old[src] + delta[dst]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub letter: SymbolId,
    pub guard: Vec<Guard>,
    pub delta: Vec<i8>,
    pub copies: Vec<(usize, usize)>,
    pub target: StateId,
}

impl Transition {
    /// A transition with "any" guards, zero deltas and no copies.
    pub fn new(source: StateId, letter: SymbolId, target: StateId, counters: usize) -> Self {
        Transition {
            source,
            letter,
            guard: vec![Guard::Any; counters],
            delta: vec![0; counters],
            copies: Vec::new(),
            target,
        }
    }

    pub fn with_delta(mut self, delta: &[i8]) -> Self {
        self.delta = delta.to_vec();
        self
    }

    pub fn with_guard(mut self, guard: &[Guard]) -> Self {
        self.guard = guard.to_vec();
        self
    }

    pub fn with_copies(mut self, copies: &[(usize, usize)]) -> Self {
        self.copies = copies.to_vec();
        self
    }

    /// Counter values after firing from `counters`, or `None` when a guard
    /// fails or a counter would become negative.
    pub fn fire(&self, counters: &[u64]) -> Result<Option<Vec<u64>>> {
        if counters.len() != self.delta.len() {
            return Err(Error::ArityMismatch { expected: self.delta.len(), found: counters.len() });
        }
        if !self.guard.iter().zip(counters).all(|(g, &c)| g.admits(c)) {
            return Ok(None);
        }
        let mut next = counters.to_vec();
        for &(dst, src) in &self.copies {
            next[dst] = counters[src];
        }
        for (value, &d) in next.iter_mut().zip(&self.delta) {
            match d {
                0 => {}
                1 => *value = value.checked_add(1).ok_or(Error::CounterOverflow)?,
                _ => match value.checked_sub(1) {
                    Some(v) => *value = v,
                    None => return Ok(None),
                },
            }
        }
        Ok(Some(next))
    }

    /// Whether the transition rewrites counter `m` by a copy.
    pub fn copies_into(&self, m: usize) -> bool {
        self.copies.iter().any(|&(dst, _)| dst == m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub counters: Vec<u64>,
}

impl Configuration {
    pub fn new(state: StateId, counters: Vec<u64>) -> Self {
        Configuration { state, counters }
    }

    pub fn zero(state: StateId, k: usize) -> Self {
        Configuration { state, counters: vec![0; k] }
    }
}

/// Simulation order: same state and coordinate-wise at least as large.
pub fn simulates(c1: &Configuration, c2: &Configuration) -> Result<bool> {
    if c1.counters.len() != c2.counters.len() {
        return Err(Error::ArityMismatch { expected: c1.counters.len(), found: c2.counters.len() });
    }
    Ok(c1.state == c2.state && c1.counters.iter().zip(&c2.counters).all(|(a, b)| a >= b))
}

/// A Rabin pair: a state set is accepted by the pair when it avoids `avoid`
/// and meets `visit`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RabinPair {
    pub avoid: BTreeSet<StateId>,
    pub visit: BTreeSet<StateId>,
}

/// A Muller family, either listed set by set or described by Rabin pairs
/// (the family of all sets accepted by at least one pair).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MullerFamily {
    Sets(Vec<BTreeSet<StateId>>),
    Pairs(Vec<RabinPair>),
}

impl MullerFamily {
    pub fn contains(&self, set: &BTreeSet<StateId>) -> bool {
        match self {
            MullerFamily::Sets(sets) => sets.iter().any(|s| s == set),
            MullerFamily::Pairs(pairs) => pairs.iter().any(|p| p.avoid.is_disjoint(set) && !p.visit.is_disjoint(set)),
        }
    }

    /// All non-empty subsets of `states` in the family, when there are at
    /// most `max_states` of them to enumerate.
    pub fn expand(&self, states: usize, max_states: usize) -> Option<Vec<BTreeSet<StateId>>> {
        match self {
            MullerFamily::Sets(sets) => Some(sets.clone()),
            MullerFamily::Pairs(_) if states > max_states || states >= 63 => None,
            MullerFamily::Pairs(_) => {
                let mut out = Vec::new();
                for mask in 1u64..(1u64 << states) {
                    let set: BTreeSet<StateId> = (0..states).filter(|i| mask >> i & 1 == 1).map(StateId).collect();
                    if self.contains(&set) {
                        out.push(set);
                    }
                }
                Some(out)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Acceptance {
    Buchi(BTreeSet<StateId>),
    Muller(MullerFamily),
}

impl Acceptance {
    /// Decide acceptance from the set of states visited infinitely often.
    pub fn accepts(&self, infinitely_often: &BTreeSet<StateId>) -> bool {
        match self {
            Acceptance::Buchi(f) => !f.is_disjoint(infinitely_often),
            Acceptance::Muller(family) => family.contains(infinitely_often),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Acceptance::Buchi(_) => "Büchi",
            Acceptance::Muller(_) => "Muller",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    pub name: String,
    pub alphabet: Vec<String>,
    pub counter_kinds: Vec<CounterKind>,
    pub states: Vec<String>,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
    pub acceptance: Acceptance,
    pub copy_capable: bool,
}

/// A breach of the machine invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoCounters,
    EmptyAlphabet,
    NoStates,
    DuplicateSymbol(String),
    DuplicateState(String),
    InitialOutOfRange,
    StateOutOfRange { transition: usize },
    LetterOutOfRange { transition: usize },
    ArityMismatch { transition: usize },
    DeltaOutOfRange { transition: usize, counter: usize },
    GuardOnBlindCounter { transition: usize, counter: usize },
    DecrementUnderZeroGuard { transition: usize, counter: usize },
    CopyWithoutCapability { transition: usize },
    CopyOutOfRange { transition: usize },
    DuplicateCopyTarget { transition: usize, counter: usize },
    AcceptanceStateOutOfRange,
    EmptyMullerSet,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoCounters => write!(f, "machine has no counters"),
            Violation::EmptyAlphabet => write!(f, "empty alphabet"),
            Violation::NoStates => write!(f, "machine has no states"),
            Violation::DuplicateSymbol(s) => write!(f, "duplicate symbol `{s}`"),
            Violation::DuplicateState(s) => write!(f, "duplicate state `{s}`"),
            Violation::InitialOutOfRange => write!(f, "initial state does not exist"),
            Violation::StateOutOfRange { transition } => {
                write!(f, "transition {transition} references a missing state")
            }
            Violation::LetterOutOfRange { transition } => {
                write!(f, "transition {transition} reads a letter outside the alphabet")
            }
            Violation::ArityMismatch { transition } => {
                write!(f, "transition {transition} has the wrong number of guard or delta entries")
            }
            Violation::DeltaOutOfRange { transition, counter } => {
                write!(f, "delta out of range (transition {transition}, counter {counter})")
            }
            Violation::GuardOnBlindCounter { transition, counter } => {
                write!(f, "guard on blind counter (transition {transition}, counter {counter})")
            }
            Violation::DecrementUnderZeroGuard { transition, counter } => {
                write!(f, "decrement under zero guard (transition {transition}, counter {counter})")
            }
            Violation::CopyWithoutCapability { transition } => {
                write!(f, "copy on a machine without copying (transition {transition})")
            }
            Violation::CopyOutOfRange { transition } => {
                write!(f, "copy references a missing counter (transition {transition})")
            }
            Violation::DuplicateCopyTarget { transition, counter } => {
                write!(f, "counter {counter} copied twice (transition {transition})")
            }
            Violation::AcceptanceStateOutOfRange => {
                write!(f, "acceptance condition references a missing state")
            }
            Violation::EmptyMullerSet => write!(f, "empty set in Muller family"),
        }
    }
}

impl CounterMachine {
    pub fn k(&self) -> usize {
        self.counter_kinds.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn is_blind(&self) -> bool {
        self.counter_kinds.iter().all(|&c| c == CounterKind::Blind)
    }

    pub fn is_buchi(&self) -> bool {
        matches!(self.acceptance, Acceptance::Buchi(_))
    }

    pub fn accepting_states(&self) -> Option<&BTreeSet<StateId>> {
        match &self.acceptance {
            Acceptance::Buchi(f) => Some(f),
            Acceptance::Muller(_) => None,
        }
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn symbol(&self, name: &str) -> Option<SymbolId> {
        self.alphabet.iter().position(|s| s == name).map(SymbolId)
    }

    pub fn symbol_name(&self, a: SymbolId) -> &str {
        &self.alphabet[a.0]
    }

    /// Encode a word given as symbol tokens.
    pub fn encode<'a, I: IntoIterator<Item = &'a str>>(&self, tokens: I) -> Result<Vec<SymbolId>> {
        tokens.into_iter().map(|t| self.symbol(t).ok_or_else(|| Error::UnknownLetter(t.to_string()))).collect()
    }

    /// Encode a word whose symbols are single characters.
    pub fn encode_chars(&self, word: &str) -> Result<Vec<SymbolId>> {
        let mut buf = [0u8; 4];
        word.chars()
            .map(|c| {
                let t: &str = c.encode_utf8(&mut buf);
                self.symbol(t).ok_or_else(|| Error::UnknownLetter(t.to_string()))
            })
            .collect()
    }

    pub fn decode(&self, word: &[SymbolId]) -> Vec<&str> {
        word.iter().map(|&a| self.symbol_name(a)).collect()
    }

    pub fn initial_config(&self) -> Configuration {
        Configuration::zero(self.initial, self.k())
    }

    /// Transitions leaving `state` on `letter`, as indices in declaration order.
    pub fn outgoing(&self, state: StateId, letter: SymbolId) -> impl Iterator<Item = usize> + '_ {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.source == state && t.letter == letter)
            .map(|(i, _)| i)
    }

    /// Transition indices grouped by source state.
    pub fn by_source(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source.0 < out.len() {
                out[t.source.0].push(i);
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let k = self.k();
        let n = self.states.len();
        if k == 0 {
            out.push(Violation::NoCounters);
        }
        if self.alphabet.is_empty() {
            out.push(Violation::EmptyAlphabet);
        }
        if n == 0 {
            out.push(Violation::NoStates);
        }
        let mut seen = BTreeSet::new();
        for s in &self.alphabet {
            if !seen.insert(s.as_str()) {
                out.push(Violation::DuplicateSymbol(s.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                out.push(Violation::DuplicateState(s.clone()));
            }
        }
        if self.initial.0 >= n {
            out.push(Violation::InitialOutOfRange);
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source.0 >= n || t.target.0 >= n {
                out.push(Violation::StateOutOfRange { transition: i });
            }
            if t.letter.0 >= self.alphabet.len() {
                out.push(Violation::LetterOutOfRange { transition: i });
            }
            if t.guard.len() != k || t.delta.len() != k {
                out.push(Violation::ArityMismatch { transition: i });
                continue;
            }
            if !t.copies.is_empty() && !self.copy_capable {
                out.push(Violation::CopyWithoutCapability { transition: i });
            }
            let mut targets = BTreeSet::new();
            for &(dst, src) in &t.copies {
                if dst >= k || src >= k {
                    out.push(Violation::CopyOutOfRange { transition: i });
                } else if !targets.insert(dst) {
                    out.push(Violation::DuplicateCopyTarget { transition: i, counter: dst });
                }
            }
            for m in 0..k {
                if !(-1..=1).contains(&t.delta[m]) {
                    out.push(Violation::DeltaOutOfRange { transition: i, counter: m });
                }
                if self.counter_kinds[m] == CounterKind::Blind && t.guard[m] != Guard::Any {
                    out.push(Violation::GuardOnBlindCounter { transition: i, counter: m });
                }
                if t.guard[m] == Guard::Zero && t.delta[m] == -1 && !t.copies_into(m) {
                    out.push(Violation::DecrementUnderZeroGuard { transition: i, counter: m });
                }
            }
        }
        match &self.acceptance {
            Acceptance::Buchi(f) => {
                if f.iter().any(|s| s.0 >= n) {
                    out.push(Violation::AcceptanceStateOutOfRange);
                }
            }
            Acceptance::Muller(MullerFamily::Sets(sets)) => {
                for s in sets {
                    if s.is_empty() {
                        out.push(Violation::EmptyMullerSet);
                    }
                    if s.iter().any(|x| x.0 >= n) {
                        out.push(Violation::AcceptanceStateOutOfRange);
                    }
                }
            }
            Acceptance::Muller(MullerFamily::Pairs(pairs)) => {
                if pairs.iter().any(|p| p.avoid.iter().chain(&p.visit).any(|x| x.0 >= n)) {
                    out.push(Violation::AcceptanceStateOutOfRange);
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Exactly one transition applies for every state, letter and
    /// zero/positive valuation of the counters.
    pub fn is_deterministic(&self) -> bool {
        let k = self.k();
        let mut groups: BTreeMap<(StateId, SymbolId), Vec<&Transition>> = BTreeMap::new();
        for t in &self.transitions {
            groups.entry((t.source, t.letter)).or_default().push(t);
        }
        for q in 0..self.states.len() {
            for a in 0..self.alphabet.len() {
                let Some(ts) = groups.get(&(StateId(q), SymbolId(a))) else {
                    return false;
                };
                for (i, t) in ts.iter().enumerate() {
                    for u in &ts[i + 1..] {
                        if guards_overlap(&t.guard, &u.guard) {
                            return false;
                        }
                    }
                }
                // Disjoint cubes cover {0,1}^k iff their sizes add up to 2^k.
                let mut sizes: BTreeMap<usize, u64> = BTreeMap::new();
                for t in ts {
                    let free = t.guard.iter().filter(|&&g| g == Guard::Any).count();
                    *sizes.entry(free).or_default() += 1;
                }
                if !sums_to_power(sizes, k) {
                    return false;
                }
            }
        }
        true
    }

    pub fn simulates(&self, c1: &Configuration, c2: &Configuration) -> Result<bool> {
        simulates(c1, c2)
    }
}

fn guards_overlap(a: &[Guard], b: &[Guard]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !matches!((x, y), (Guard::Zero, Guard::Positive) | (Guard::Positive, Guard::Zero)))
}

/// Whether Σ count·2^exp over the map equals 2^k exactly.
fn sums_to_power(mut sizes: BTreeMap<usize, u64>, k: usize) -> bool {
    let mut exp = 0;
    while let Some((&e, _)) = sizes.range(exp..).next() {
        let c = sizes.remove(&e).unwrap_or(0);
        if e == k {
            return c == 1 && sizes.is_empty();
        }
        if e > k || c % 2 == 1 {
            return false;
        }
        if c > 0 {
            *sizes.entry(e + 1).or_default() += c / 2;
        }
        exp = e + 1;
    }
    false
}

/// Incremental construction of machines with named states.
#[derive(Clone, Debug)]
pub struct MachineBuilder {
    name: String,
    alphabet: Vec<String>,
    kinds: Vec<CounterKind>,
    states: Vec<String>,
    index: BTreeMap<String, StateId>,
    transitions: Vec<Transition>,
    initial: Option<StateId>,
    accepting: BTreeSet<StateId>,
}

impl MachineBuilder {
    pub fn new<S: AsRef<str>>(name: &str, alphabet: &[S], kinds: Vec<CounterKind>) -> Self {
        MachineBuilder {
            name: name.to_string(),
            alphabet: alphabet.iter().map(|s| s.as_ref().to_string()).collect(),
            kinds,
            states: Vec::new(),
            index: BTreeMap::new(),
            transitions: Vec::new(),
            initial: None,
            accepting: BTreeSet::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.kinds.len()
    }

    /// The state called `name`, created on first use.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = StateId(self.states.len());
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), s);
        s
    }

    pub fn letter(&self, name: &str) -> SymbolId {
        SymbolId(
            self.alphabet.iter().position(|s| s == name).unwrap_or_else(|| panic!("letter `{name}` not in alphabet")),
        )
    }

    pub fn initial(&mut self, s: StateId) -> &mut Self {
        self.initial = Some(s);
        self
    }

    pub fn accepting(&mut self, s: StateId) -> &mut Self {
        self.accepting.insert(s);
        self
    }

    pub fn push(&mut self, t: Transition) -> usize {
        self.transitions.push(t);
        self.transitions.len() - 1
    }

    /// Shorthand: transition with "any" guards and the given deltas.
    pub fn edge(&mut self, from: &str, letter: &str, to: &str, delta: &[i8]) -> usize {
        let (s, t, a) = (self.state(from), self.state(to), self.letter(letter));
        let k = self.k();
        self.push(Transition::new(s, a, t, k).with_delta(delta))
    }

    pub fn build(self) -> CounterMachine {
        CounterMachine {
            name: self.name,
            alphabet: self.alphabet,
            counter_kinds: self.kinds,
            states: self.states,
            initial: self.initial.unwrap_or(StateId(0)),
            transitions: self.transitions,
            acceptance: Acceptance::Buchi(self.accepting),
            copy_capable: false,
        }
    }
}
