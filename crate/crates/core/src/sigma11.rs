//! Binary tree nodes with the infix and lexicographic orders, correct
//! chains, the `b`/`m`/`e` encodings, the phase word `α(X)`, the one-counter
//! automaton `𝒜₁` and the translations between its runs and correct chains.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{CounterKind, CounterMachine, MachineBuilder, StateId, SymbolId, Transition};
use crate::semantics::RunPrefix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    L,
    R,
}

/// A node of the infinite binary tree, as its word of directions. The
/// derived order is `≤_lex` (a prefix precedes its extensions).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeNode(pub Vec<Dir>);

impl TreeNode {
    pub fn root() -> Self {
        TreeNode(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, d: Dir) -> Self {
        let mut w = self.0.clone();
        w.push(d);
        TreeNode(w)
    }

    /// The prefix of length `n`.
    pub fn prefix(&self, n: usize) -> Self {
        TreeNode(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The node of length `n` with binary value `b`.
    pub fn from_value(n: usize, b: u64) -> Self {
        TreeNode((0..n).rev().map(|i| if b >> i & 1 == 1 { Dir::R } else { Dir::L }).collect())
    }

    /// All nodes of length `n` in lexicographic order.
    pub fn level(n: usize) -> impl Iterator<Item = TreeNode> {
        (0..1u64 << n).map(move |b| TreeNode::from_value(n, b))
    }

    fn padded(&self, i: usize) -> u8 {
        match self.0.get(i) {
            Some(Dir::L) => 0,
            None => 1,
            Some(Dir::R) => 2,
        }
    }

    /// Compare `self·M^ω` with `other·M^ω` where `L < M < R`.
    pub fn cmp_inf(&self, other: &TreeNode) -> Ordering {
        let n = self.len().max(other.len());
        (0..n).map(|i| self.padded(i).cmp(&other.padded(i))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ε");
        }
        for d in &self.0 {
            write!(f, "{}", if *d == Dir::L { 'L' } else { 'R' })?;
        }
        Ok(())
    }
}

impl FromStr for TreeNode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" || s == "." {
            return Ok(TreeNode::root());
        }
        s.chars()
            .map(|c| match c {
                'L' => Ok(Dir::L),
                'R' => Ok(Dir::R),
                _ => Err(Error::InvalidArgument(format!("tree node `{s}` may only contain L and R"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(TreeNode)
    }
}

pub fn leq_inf(v: &TreeNode, x: &TreeNode) -> bool {
    v.cmp_inf(x) != Ordering::Greater
}

pub fn leq_lex(v: &TreeNode, x: &TreeNode) -> bool {
    v <= x
}

/// A finite set of tree nodes, all of length at most `max_depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTreeSet {
    pub members: BTreeSet<TreeNode>,
    pub max_depth: usize,
}

impl FiniteTreeSet {
    pub fn new(members: BTreeSet<TreeNode>, max_depth: usize) -> Result<Self> {
        if let Some(v) = members.iter().find(|v| v.len() > max_depth) {
            return Err(Error::InvalidArgument(format!("node {v} is deeper than {max_depth}")));
        }
        Ok(FiniteTreeSet { members, max_depth })
    }

    pub fn contains(&self, v: &TreeNode) -> bool {
        self.members.contains(v)
    }

    /// `{ε, L, LL, …}` up to `depth`.
    pub fn left_spine(depth: usize) -> Self {
        Self::spine(Dir::L, depth)
    }

    pub fn right_spine(depth: usize) -> Self {
        Self::spine(Dir::R, depth)
    }

    fn spine(d: Dir, depth: usize) -> Self {
        let members = (0..=depth).map(|n| TreeNode(vec![d; n])).collect();
        FiniteTreeSet { members, max_depth: depth }
    }

    pub fn full(depth: usize) -> Self {
        let members = (0..=depth).flat_map(TreeNode::level).collect();
        FiniteTreeSet { members, max_depth: depth }
    }

    pub fn empty(depth: usize) -> Self {
        FiniteTreeSet { members: BTreeSet::new(), max_depth: depth }
    }

    /// A named generator: `left-spine`, `right-spine`, `full` or `empty`.
    pub fn generator(name: &str, depth: usize) -> Option<Self> {
        match name {
            "left-spine" => Some(Self::left_spine(depth)),
            "right-spine" => Some(Self::right_spine(depth)),
            "full" => Some(Self::full(depth)),
            "empty" => Some(Self::empty(depth)),
            _ => None,
        }
    }
}

/// `b(ε) = 0`, `b(vL) = 2·b(v)`, `b(vR) = 2·b(v) + 1`.
pub fn b_value(v: &TreeNode) -> Result<u64> {
    v.0.iter().try_fold(0u64, |acc, d| {
        acc.checked_mul(2).and_then(|x| x.checked_add(u64::from(*d == Dir::R))).ok_or(Error::ArithmeticOverflow("b"))
    })
}

/// `m(−1) = 1`, `m(n) = m(n−1)·2^n`.
pub fn m_value(n: i64) -> Result<u64> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("m is undefined at {n}")));
    }
    (0..=n).try_fold(1u64, |acc, i| {
        1u64.checked_shl(i as u32)
            .filter(|_| i < 64)
            .and_then(|p| acc.checked_mul(p))
            .ok_or(Error::ArithmeticOverflow("m"))
    })
}

/// `e(v) = m(|v|−1)·b(v)`.
pub fn e_value(v: &TreeNode) -> Result<u64> {
    m_value(v.len() as i64 - 1)?.checked_mul(b_value(v)?).ok_or(Error::ArithmeticOverflow("e"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// The block `B^s(−n, +m)` = `< dⁿ | iᵐ s >`.
pub fn block_encode(sign: Sign, n: u64, m: u64) -> String {
    let mut out = String::with_capacity(n as usize + m as usize + 4);
    write_block(&mut out, sign, n, m);
    out
}

fn write_block(out: &mut String, sign: Sign, n: u64, m: u64) {
    out.push('<');
    out.extend(core::iter::repeat_n('d', n as usize));
    out.push('|');
    out.extend(core::iter::repeat_n('i', m as usize));
    out.push_str(sign.symbol());
    out.push('>');
}

/// A block of a phase: node, direction, sign, decrement and increment.
pub type PhaseBlock = (TreeNode, Dir, Sign, u64, u64);

/// The blocks of phase `n` in lexicographic order of `(v, d)`.
pub fn phase_blocks(set: &FiniteTreeSet, n: usize) -> Result<Vec<PhaseBlock>> {
    if n > set.max_depth {
        return Err(Error::DepthExceeded { phase: n, max_depth: set.max_depth });
    }
    let mut out = Vec::with_capacity(2 << n);
    for v in TreeNode::level(n) {
        for d in [Dir::L, Dir::R] {
            let sign = if d == Dir::L && set.contains(&v) { Sign::Plus } else { Sign::Minus };
            let vd = v.child(d);
            out.push((v.clone(), d, sign, e_value(&v)?, e_value(&vd)?));
        }
    }
    Ok(out)
}

/// The phase word `u_n`.
pub fn alpha_phase(set: &FiniteTreeSet, n: usize) -> Result<String> {
    let mut out = String::new();
    for (_, _, s, dec, inc) in phase_blocks(set, n)? {
        write_block(&mut out, s, dec, inc);
    }
    Ok(out)
}

/// `u_0 ♯ u_1 ♯ … u_{phases−1} ♯`, with `♯` written as `#`.
pub fn alpha_prefix(set: &FiniteTreeSet, phases: usize) -> Result<String> {
    let mut out = String::new();
    write_alpha_prefix(set, phases, &mut out)?;
    Ok(out)
}

/// Stream the prefix phase by phase into `out`.
pub fn write_alpha_prefix<W: fmt::Write>(set: &FiniteTreeSet, phases: usize, out: &mut W) -> Result<()> {
    for n in 0..phases {
        let phase = alpha_phase(set, n)?;
        out.write_str(&phase).map_err(|_| Error::InvalidArgument("write failed".to_string()))?;
        out.write_char('#').map_err(|_| Error::InvalidArgument("write failed".to_string()))?;
    }
    Ok(())
}

/// The alphabet of `𝒜₁`: the block symbols `Σ₀` followed by the separator.
pub const A1_ALPHABET: [&str; 8] = ["<", "d", "|", "i", "+", "-", ">", "#"];

mod a1 {
    pub const CHOOSE: usize = 7;
    pub const DEC: usize = 8;
    pub const BAR: usize = 9;
    pub const INC: usize = 10;
    pub const ACCEPT: usize = 11;
    pub const REJECT: usize = 12;
    pub const CLOSE_ACCEPT: usize = 13;
    pub const CLOSE_REJECT: usize = 14;
    pub const SKIP_AFTER: usize = 15;
    pub const SEPARATOR: usize = 22;
}

/// The automaton `𝒜₁` with one blind counter.
pub fn build_a1() -> CounterMachine {
    let mut b = MachineBuilder::new("A1", &A1_ALPHABET, vec![CounterKind::Blind]);
    let [q0, q1, q2, qa, qr, q3] = ["q0", "q1", "q2", "qa", "qr", "q3"].map(|s| b.state(s));
    b.initial(q0);
    b.accepting(qa);
    let sym = |s: &str| SymbolId(A1_ALPHABET.iter().position(|x| *x == s).expect("A1 symbol"));
    let t = |from: StateId, s: &str, to: StateId, d: i8| Transition::new(from, sym(s), to, 1).with_delta(&[d]);
    for s in &A1_ALPHABET[..7] {
        b.push(t(q0, s, q0, 0));
    }
    b.push(t(q0, "<", q1, 0));
    b.push(t(q1, "d", q1, -1));
    b.push(t(q1, "|", q2, 0));
    b.push(t(q2, "i", q2, 1));
    b.push(t(q2, "+", qa, 0));
    b.push(t(q2, "-", qr, 0));
    b.push(t(qa, ">", q3, 0));
    b.push(t(qr, ">", q3, 0));
    for s in &A1_ALPHABET[..7] {
        b.push(t(q3, s, q3, 0));
    }
    b.push(t(q3, "#", q0, 0));
    b.build()
}

/// `v₀ = ε`, `|v_{n+1}| = |v_n| + 1` and `v_{n+1} ≤_inf v_n·R`.
pub fn is_correct_chain(chain: &[TreeNode]) -> bool {
    chain.first().is_some_and(TreeNode::is_empty)
        && chain.windows(2).all(|w| w[1].len() == w[0].len() + 1 && leq_inf(&w[1], &w[0].child(Dir::R)))
}

/// Every hit `n` has `v_n ∈ X` and, when `v_{n+1}` is present,
/// `v_{n+1} ≤_inf v_n·L`.
pub fn is_witnessing(chain: &[TreeNode], set: &FiniteTreeSet, hits: &BTreeSet<usize>) -> bool {
    hits.iter().all(|&n| {
        n < chain.len()
            && set.contains(&chain[n])
            && chain.get(n + 1).is_none_or(|next| leq_inf(next, &chain[n].child(Dir::L)))
    })
}

/// Interpolate a strictly `≤_inf`-descending sequence with increasing
/// lengths into a correct chain; the hits are the positions `|x_i|`.
pub fn chain_from_descending(xs: &[TreeNode]) -> Result<(Vec<TreeNode>, BTreeSet<usize>)> {
    let last = xs.last().ok_or_else(|| Error::InvalidChain("empty descending sequence".into()))?;
    for w in xs.windows(2) {
        if w[1].len() <= w[0].len() || w[1].cmp_inf(&w[0]) != Ordering::Less {
            return Err(Error::InvalidChain(format!(
                "{} does not strictly descend below {} with greater length",
                w[1], w[0]
            )));
        }
    }
    let mut chain = Vec::with_capacity(last.len() + 1);
    let mut i = 0;
    for n in 0..=last.len() {
        if n > xs[i].len() {
            i += 1;
        }
        chain.push(xs[i].prefix(n));
    }
    Ok((chain, xs.iter().map(TreeNode::len).collect()))
}

/// Longest strictly descending chain of increasing lengths in `set`.
pub fn oracle_if_inf(set: &FiniteTreeSet) -> usize {
    crate::oracles::descending_chain_oracle(set).len()
}

/// A run of `𝒜₁` over the phase word from a chain choosing block
/// `(v_n, L)` at hits and `(v_n, R)` elsewhere, one phase per chain node.
pub fn chain_to_run(chain: &[TreeNode], hits: &BTreeSet<usize>, set: &FiniteTreeSet) -> Result<RunPrefix> {
    if !is_correct_chain(chain) {
        return Err(Error::InvalidChain("not a correct chain".into()));
    }
    if !is_witnessing(chain, set, hits) {
        return Err(Error::InvalidChain("hits are not witnessing for the set".into()));
    }
    let machine = build_a1();
    let mut run = RunPrefix::seed(machine.initial_config());
    for (n, v) in chain.iter().enumerate() {
        let d = if hits.contains(&n) { Dir::L } else { Dir::R };
        let chosen = 2 * b_value(v)? as usize + usize::from(d == Dir::R);
        let phase = alpha_phase(set, n)?;
        let mut block = 0usize;
        let mut mode = Mode::Before;
        for c in phase.chars().chain(core::iter::once('#')) {
            let s = A1_ALPHABET.iter().position(|x| x.starts_with(c)).expect("phase symbol");
            let ti = match (mode, c) {
                (Mode::Before, '<') if block == chosen => {
                    mode = Mode::Dec;
                    a1::CHOOSE
                }
                (Mode::Before, _) => {
                    if c == '>' {
                        block += 1;
                    }
                    s
                }
                (Mode::Dec, 'd') => a1::DEC,
                (Mode::Dec, '|') => {
                    mode = Mode::Inc;
                    a1::BAR
                }
                (Mode::Inc, 'i') => a1::INC,
                (Mode::Inc, '+') => {
                    mode = Mode::Close;
                    a1::ACCEPT
                }
                (Mode::Inc, '-') => {
                    mode = Mode::Close;
                    a1::REJECT
                }
                (Mode::Close, '>') => {
                    mode = Mode::After;
                    if run.transitions.last() == Some(&a1::ACCEPT) {
                        a1::CLOSE_ACCEPT
                    } else {
                        a1::CLOSE_REJECT
                    }
                }
                (Mode::After, '#') => a1::SEPARATOR,
                (Mode::After, _) => a1::SKIP_AFTER + s,
                _ => return Err(Error::InvalidChain(format!("phase {n} does not match the block structure"))),
            };
            push_step(&machine, &mut run, ti)
                .map_err(|_| Error::InvalidChain(format!("counter underflow in phase {n}")))?;
        }
    }
    Ok(run)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Before,
    Dec,
    Inc,
    Close,
    After,
}

fn push_step(machine: &CounterMachine, run: &mut RunPrefix, ti: usize) -> Result<()> {
    let t = &machine.transitions[ti];
    let last = run.last();
    if t.source != last.state {
        return Err(Error::InvalidRun(format!("transition {ti} does not leave {}", last.state)));
    }
    let next = t.fire(&last.counters)?.ok_or_else(|| Error::InvalidRun("counter underflow".into()))?;
    run.configs.push(crate::model::Configuration::new(t.target, next));
    run.transitions.push(ti);
    Ok(())
}

/// Chain, hits and phase-start counters read off a run of `𝒜₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseTrace {
    pub chain: Vec<TreeNode>,
    pub hits: BTreeSet<usize>,
    /// Counter value at the start of every phase, including the one after
    /// the last complete phase.
    pub counters: Vec<u64>,
}

/// Read the chosen blocks off a run of `𝒜₁` over a phase word. A run with
/// no complete phase yields the chain `(ε)`.
pub fn run_to_chain(run: &RunPrefix) -> Result<PhaseTrace> {
    let machine = build_a1();
    run.check(&machine)?;
    let word = run.word(&machine);
    let sym = |i: usize| machine.symbol_name(word[i]);
    let mut chain = Vec::new();
    let mut hits = BTreeSet::new();
    let mut counters = vec![run.configs[0].counters[0]];
    let mut phase = 0usize;
    let mut blocks = 0u64;
    let mut chosen: Option<(u64, bool)> = None;
    for (i, &ti) in run.transitions.iter().enumerate() {
        match ti {
            a1::CHOOSE => chosen = Some((blocks, false)),
            a1::ACCEPT => chosen = chosen.map(|(b, _)| (b, true)),
            a1::SEPARATOR => {
                let (index, accepted) =
                    chosen.take().ok_or_else(|| Error::InvalidRun(format!("phase {phase} has no chosen block")))?;
                if phase >= 64 || index >= 2u64 << phase {
                    return Err(Error::InvalidRun(format!("phase {phase} has too many blocks")));
                }
                chain.push(TreeNode::from_value(phase, index / 2));
                if accepted {
                    hits.insert(phase);
                }
                counters.push(run.configs[i + 1].counters[0]);
                phase += 1;
                blocks = 0;
            }
            _ => {}
        }
        if sym(i) == ">" {
            blocks += 1;
        }
    }
    if chain.is_empty() {
        chain.push(TreeNode::root());
    }
    Ok(PhaseTrace { chain, hits, counters })
}
