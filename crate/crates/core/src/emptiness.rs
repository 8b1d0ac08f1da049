//! Lasso patterns, bounded lasso search with an emptiness certificate, and
//! club-language emptiness through the club test automaton.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::club::Club;
use crate::error::{Error, Result};
use crate::model::{
    Acceptance, Configuration, CounterKind, CounterMachine, Guard, MachineBuilder, StateId, Transition,
};
use crate::oracles;

/// A transition sequence `δ₀ … δ_ℓ` with looping point `ℓ'`, read from
/// `origin` (the initial all-zero configuration unless seeded elsewhere).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoPattern {
    pub origin: Configuration,
    pub transitions: Vec<usize>,
    /// Zero/positive valuation chosen for each step's guard (`true` = positive).
    pub bits: Vec<Vec<bool>>,
    pub looping_point: usize,
}

impl LassoPattern {
    /// A pattern using the weakest guard valuation each transition admits.
    pub fn new(machine: &CounterMachine, origin: Configuration, transitions: Vec<usize>, looping_point: usize) -> Self {
        let bits = transitions
            .iter()
            .map(|&t| machine.transitions[t].guard.iter().map(|g| *g == Guard::Positive).collect())
            .collect();
        LassoPattern { origin, transitions, bits, looping_point }
    }

    pub fn from_initial(machine: &CounterMachine, transitions: Vec<usize>, looping_point: usize) -> Self {
        Self::new(machine, machine.initial_config(), transitions, looping_point)
    }

    /// Index `ℓ` of the last transition.
    pub fn last(&self) -> usize {
        self.transitions.len().saturating_sub(1)
    }

    pub fn spoke(&self) -> &[usize] {
        &self.transitions[..self.looping_point]
    }

    pub fn cycle(&self) -> &[usize] {
        &self.transitions[self.looping_point..]
    }
}

/// The pattern conditions, numbered as usual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PatternCondition {
    /// Empty pattern, looping point out of range, unknown transition, or a
    /// guard valuation the transition does not admit.
    Malformed,
    /// `δ₀` leaves the origin state.
    Start,
    /// Consecutive transitions are chained.
    Chain,
    /// The last transition returns to the looping state.
    Loop,
    /// Every partial sum is non-negative.
    PartialSums,
    /// The cycle sum is non-negative.
    CycleSum,
    /// Positive guards are backed by strictly positive partial sums.
    PositiveGuards,
}

impl PatternCondition {
    pub fn number(self) -> u8 {
        match self {
            PatternCondition::Malformed => 0,
            PatternCondition::Start => 1,
            PatternCondition::Chain => 2,
            PatternCondition::Loop => 3,
            PatternCondition::PartialSums => 4,
            PatternCondition::CycleSum => 5,
            PatternCondition::PositiveGuards => 6,
        }
    }
}

impl fmt::Display for PatternCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition {}", self.number())
    }
}

/// Check the six pattern conditions, reporting the first one violated.
///
/// With the all-zero origin, condition 6 at step 0 is exactly the
/// all-zero-guard requirement on `δ₀`.
pub fn check_lasso_pattern(
    machine: &CounterMachine,
    pattern: &LassoPattern,
) -> core::result::Result<(), PatternCondition> {
    let ts = &pattern.transitions;
    let k = machine.k();
    if ts.is_empty()
        || pattern.looping_point >= ts.len()
        || pattern.bits.len() != ts.len()
        || pattern.origin.counters.len() != k
        || ts.iter().any(|&t| t >= machine.transitions.len())
    {
        return Err(PatternCondition::Malformed);
    }
    let trans = |i: usize| &machine.transitions[ts[i]];
    for (i, bits) in pattern.bits.iter().enumerate() {
        let g = &trans(i).guard;
        if bits.len() != k || g.iter().zip(bits).any(|(g, &b)| !g.admits_bit(b)) {
            return Err(PatternCondition::Malformed);
        }
    }
    if trans(0).source != pattern.origin.state {
        return Err(PatternCondition::Start);
    }
    if (1..ts.len()).any(|i| trans(i - 1).target != trans(i).source) {
        return Err(PatternCondition::Chain);
    }
    if trans(ts.len() - 1).target != trans(pattern.looping_point).source {
        return Err(PatternCondition::Loop);
    }
    let origin: Vec<i64> = pattern.origin.counters.iter().map(|&c| c as i64).collect();
    let mut sum = origin.clone();
    let mut first_negative = None;
    let mut first_unbacked = None;
    for i in 0..ts.len() {
        if first_unbacked.is_none() && (0..k).any(|c| pattern.bits[i][c] && sum[c] <= 0) {
            first_unbacked = Some(i);
        }
        for (s, &d) in sum.iter_mut().zip(&trans(i).delta) {
            *s += i64::from(d);
        }
        if first_negative.is_none() && sum.iter().any(|&s| s < 0) {
            first_negative = Some(i);
        }
    }
    if first_negative.is_some() {
        return Err(PatternCondition::PartialSums);
    }
    let mut cycle = vec![0i64; k];
    for i in pattern.looping_point..ts.len() {
        for (s, &d) in cycle.iter_mut().zip(&trans(i).delta) {
            *s += i64::from(d);
        }
    }
    if cycle.iter().any(|&s| s < 0) {
        return Err(PatternCondition::CycleSum);
    }
    if first_unbacked.is_some() {
        return Err(PatternCondition::PositiveGuards);
    }
    Ok(())
}

/// Some state `q_i` with `ℓ' ≤ i ≤ ℓ` is accepting.
pub fn is_accepting_pattern(machine: &CounterMachine, pattern: &LassoPattern) -> bool {
    let Acceptance::Buchi(f) = &machine.acceptance else {
        return false;
    };
    pattern.cycle().iter().any(|&t| f.contains(&machine.transitions[t].source))
}

/// Replay the pattern from its origin, going around the cycle `cycles`
/// times; `None` on a guard failure or counter underflow.
pub fn replay(machine: &CounterMachine, pattern: &LassoPattern, cycles: usize) -> Result<Option<Vec<Configuration>>> {
    let mut config = pattern.origin.clone();
    let mut out = vec![config.clone()];
    let steps = pattern.spoke().iter().chain(pattern.cycle().iter().cycle().take(cycles * pattern.cycle().len()));
    for &ti in steps {
        let t = &machine.transitions[ti];
        if t.source != config.state {
            return Ok(None);
        }
        match t.fire(&config.counters)? {
            Some(c) => config = Configuration::new(t.target, c),
            None => return Ok(None),
        }
        out.push(config.clone());
    }
    Ok(Some(out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmptinessVerdict {
    NonEmpty(LassoPattern),
    EmptyUpTo(usize),
    EmptyCertified,
}

impl EmptinessVerdict {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, EmptinessVerdict::NonEmpty(_))
    }
}

pub const DEFAULT_BOUND: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub node_budget: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { node_budget: 4_000_000 }
    }
}

/// Search for an accepting lasso pattern with `ℓ ≤ length_bound` from the
/// initial configuration.
pub fn find_accepting_lasso(machine: &CounterMachine, length_bound: usize) -> Result<EmptinessVerdict> {
    find_accepting_lasso_with(machine, &machine.initial_config(), length_bound, SearchLimits::default())
}

/// Search from an arbitrary origin configuration.
///
/// Returns a shortest pattern (fewest transitions). Before searching, a
/// structural certificate is tried: if no strongly connected part of the
/// control graph reachable from the origin admits a closed walk through an
/// accepting state with non-negative total effect (even ignoring the
/// intermediate counter values), the language is empty.
pub fn find_accepting_lasso_with(
    machine: &CounterMachine,
    origin: &Configuration,
    length_bound: usize,
    limits: SearchLimits,
) -> Result<EmptinessVerdict> {
    let accepting = require_blind_buchi(machine)?;
    if origin.counters.len() != machine.k() {
        return Err(Error::ArityMismatch { expected: machine.k(), found: origin.counters.len() });
    }
    if certify_empty(machine, origin.state) {
        return Ok(EmptinessVerdict::EmptyCertified);
    }
    let mut search = Search::new(machine, accepting, limits);
    Ok(match search.run(origin, length_bound)? {
        Some((transitions, looping_point)) => {
            EmptinessVerdict::NonEmpty(LassoPattern::new(machine, origin.clone(), transitions, looping_point))
        }
        None => EmptinessVerdict::EmptyUpTo(length_bound),
    })
}

fn require_blind_buchi(machine: &CounterMachine) -> Result<&BTreeSet<StateId>> {
    let Acceptance::Buchi(f) = &machine.acceptance else {
        return Err(Error::NotBuchi(machine.acceptance.kind_name()));
    };
    if let Some(m) = machine.counter_kinds.iter().position(|&c| c != CounterKind::Blind) {
        return Err(Error::NotBlind(m));
    }
    if machine.transitions.iter().any(|t| !t.copies.is_empty()) {
        return Err(Error::InvalidArgument("lasso search does not support counter copies".into()));
    }
    Ok(f)
}

fn charge(used: &mut usize, budget: usize) -> Result<()> {
    *used += 1;
    if *used > budget {
        Err(Error::BudgetExceeded(budget))
    } else {
        Ok(())
    }
}

struct Node {
    state: StateId,
    sums: Vec<i64>,
    seen_accepting: bool,
    parent: usize,
    via: usize,
}

struct Search<'a> {
    machine: &'a CounterMachine,
    accepting: &'a BTreeSet<StateId>,
    by_source: Vec<Vec<usize>>,
    budget: usize,
    used: usize,
}

const ROOT: usize = usize::MAX;

fn dominated(records: &[(Vec<i64>, bool)], sums: &[i64], flag: bool) -> bool {
    records.iter().any(|(s, f)| (*f || !flag) && s.iter().zip(sums).all(|(a, b)| a >= b))
}

impl<'a> Search<'a> {
    fn new(machine: &'a CounterMachine, accepting: &'a BTreeSet<StateId>, limits: SearchLimits) -> Self {
        Search { machine, accepting, by_source: machine.by_source(), budget: limits.node_budget, used: 0 }
    }

    fn step(&self, sums: &[i64], t: &Transition) -> Option<Vec<i64>> {
        let next: Vec<i64> = sums.iter().zip(&t.delta).map(|(&s, &d)| s + i64::from(d)).collect();
        next.iter().all(|&s| s >= 0).then_some(next)
    }

    fn path(nodes: &[Node], mut i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while nodes[i].parent != ROOT {
            out.push(nodes[i].via);
            i = nodes[i].parent;
        }
        out.reverse();
        out
    }

    /// Shortest lasso with at most `bound + 1` transitions.
    fn run(&mut self, origin: &Configuration, bound: usize) -> Result<Option<(Vec<usize>, usize)>> {
        let n = self.machine.state_count();
        let start: Vec<i64> = origin.counters.iter().map(|&c| c as i64).collect();
        let mut spokes =
            vec![Node { state: origin.state, sums: start.clone(), seen_accepting: false, parent: ROOT, via: 0 }];
        let mut depth_of = vec![0usize];
        let mut records: Vec<Vec<(Vec<i64>, bool)>> = vec![Vec::new(); n];
        records[origin.state.0].push((start, false));
        let mut layer = vec![0usize];
        for d in 1..=bound {
            let mut next_layer = Vec::new();
            for &i in &layer {
                let q = spokes[i].state;
                for &ti in &self.by_source[q.0] {
                    let t = &self.machine.transitions[ti];
                    let Some(sums) = self.step(&spokes[i].sums, t) else { continue };
                    if dominated(&records[t.target.0], &sums, false) {
                        continue;
                    }
                    charge(&mut self.used, self.budget)?;
                    records[t.target.0].push((sums.clone(), false));
                    spokes.push(Node { state: t.target, sums, seen_accepting: false, parent: i, via: ti });
                    depth_of.push(d);
                    next_layer.push(spokes.len() - 1);
                }
            }
            layer = next_layer;
        }
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut failures: Vec<Vec<(Vec<i64>, usize)>> = vec![Vec::new(); n];
        for i in 0..spokes.len() {
            let d = depth_of[i];
            let best_total = best.as_ref().map(|(s, c)| depth_of[*s] + c.len());
            let max_len = match best_total {
                Some(total) if d + 1 >= total => break,
                Some(total) => total - 1 - d,
                None => bound + 1 - d,
            };
            let (q, sums) = (spokes[i].state, spokes[i].sums.clone());
            if failures[q.0].iter().any(|(s, l)| *l >= max_len && s.iter().zip(&sums).all(|(a, b)| a >= b)) {
                continue;
            }
            match self.cycle(q, &sums, max_len)? {
                Some(c) => best = Some((i, c)),
                None => failures[q.0].push((sums, max_len)),
            }
        }
        Ok(best.map(|(s, cycle)| {
            let mut ts = Self::path(&spokes, s);
            let lp = ts.len();
            ts.extend(cycle);
            (ts, lp)
        }))
    }

    /// Shortest cycle from `p` back to `p` of length ≤ `max_len`, staying
    /// non-negative from `sums`, ending at least at `sums` and passing an
    /// accepting state.
    fn cycle(&mut self, p: StateId, sums: &[i64], max_len: usize) -> Result<Option<Vec<usize>>> {
        let n = self.machine.state_count();
        let acc0 = self.accepting.contains(&p);
        let mut nodes = vec![Node { state: p, sums: sums.to_vec(), seen_accepting: acc0, parent: ROOT, via: 0 }];
        let mut records: Vec<Vec<(Vec<i64>, bool)>> = vec![Vec::new(); n];
        records[p.0].push((sums.to_vec(), acc0));
        let mut layer = vec![0usize];
        for _ in 0..max_len {
            let mut next_layer = Vec::new();
            for &i in &layer {
                let q = nodes[i].state;
                for &ti in &self.by_source[q.0] {
                    let t = &self.machine.transitions[ti];
                    let Some(next) = self.step(&nodes[i].sums, t) else { continue };
                    let flag = nodes[i].seen_accepting || self.accepting.contains(&t.target);
                    if t.target == p && flag && next.iter().zip(sums).all(|(a, b)| a >= b) {
                        let mut path = Self::path(&nodes, i);
                        path.push(ti);
                        return Ok(Some(path));
                    }
                    if dominated(&records[t.target.0], &next, flag) {
                        continue;
                    }
                    charge(&mut self.used, self.budget)?;
                    records[t.target.0].push((next.clone(), flag));
                    nodes.push(Node { state: t.target, sums: next, seen_accepting: flag, parent: i, via: ti });
                    next_layer.push(nodes.len() - 1);
                }
            }
            if next_layer.is_empty() {
                break;
            }
            layer = next_layer;
        }
        Ok(None)
    }
}

/// Structural emptiness certificate from `from`: no reachable strongly
/// connected part of the control graph has a closed walk through an
/// accepting state whose total effect is non-negative. Sound for blind
/// machines with Büchi acceptance.
pub fn certify_empty(machine: &CounterMachine, from: StateId) -> bool {
    let Acceptance::Buchi(accepting) = &machine.acceptance else {
        return false;
    };
    let n = machine.state_count();
    let by_source = machine.by_source();
    let mut reach = vec![false; n];
    let mut stack = vec![from];
    reach[from.0] = true;
    while let Some(q) = stack.pop() {
        for &ti in &by_source[q.0] {
            let t = machine.transitions[ti].target;
            if !reach[t.0] {
                reach[t.0] = true;
                stack.push(t);
            }
        }
    }
    if !accepting.iter().any(|q| reach[q.0]) {
        return true;
    }
    let comp = oracles::scc(n, |q| by_source[q].iter().map(|&t| machine.transitions[t].target.0).collect());
    let k = machine.k();
    let groups = comp.iter().copied().max().map_or(0, |m| m + 1);
    for g in 0..groups {
        let members: Vec<usize> = (0..n).filter(|&q| comp[q] == g && reach[q]).collect();
        if !members.iter().any(|&q| accepting.contains(&StateId(q))) {
            continue;
        }
        let edges: Vec<&Transition> = machine
            .transitions
            .iter()
            .filter(|t| comp[t.source.0] == g && comp[t.target.0] == g && reach[t.source.0])
            .collect();
        if edges.is_empty() {
            continue;
        }
        if closed_walk_relaxation(&members, &edges, accepting, k) {
            return false;
        }
    }
    true
}

/// Non-negative circulation over `edges` using an accepting source with
/// non-negative total effect.
fn closed_walk_relaxation(members: &[usize], edges: &[&Transition], accepting: &BTreeSet<StateId>, k: usize) -> bool {
    let m = edges.len();
    let cols = m + k + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &v in members {
        let mut r = vec![0i64; cols];
        for (j, t) in edges.iter().enumerate() {
            if t.target.0 == v {
                r[j] += 1;
            }
            if t.source.0 == v {
                r[j] -= 1;
            }
        }
        rows.push(r);
        rhs.push(0);
    }
    for c in 0..k {
        let mut r = vec![0i64; cols];
        for (j, t) in edges.iter().enumerate() {
            r[j] = i64::from(t.delta[c]);
        }
        r[m + c] = -1;
        rows.push(r);
        rhs.push(0);
    }
    let mut r = vec![0i64; cols];
    for (j, t) in edges.iter().enumerate() {
        if accepting.contains(&t.source) {
            r[j] = 1;
        }
    }
    r[m + k] = -1;
    rows.push(r);
    rhs.push(1);
    crate::lp::feasible(&rows, &rhs)
}

/// The club test automaton: a chain adding the minimal configuration's
/// counters, a pumping loop on the unbounded coordinates, and a bridge into
/// a copy of the machine at the club's state.
#[derive(Clone, Debug)]
pub struct ClubTest {
    pub machine: CounterMachine,
    /// Length `Z` of the chain (largest coordinate of the minimal configuration).
    pub chain: u64,
    /// Index of the pumping loop, absent for dimension 0.
    pub pump: Option<usize>,
    pub bridge: usize,
}

pub fn club_test_automaton(machine: &CounterMachine, club: &Club) -> Result<ClubTest> {
    let k = machine.k();
    if club.gamma.len() != k {
        return Err(Error::ArityMismatch { expected: k, found: club.gamma.len() });
    }
    if club.state.0 >= machine.state_count() {
        return Err(Error::UnknownState(format!("{}", club.state)));
    }
    let tau0 = club.minimal_config().counters;
    let z = tau0.iter().copied().max().unwrap_or(0);
    let letter = machine.alphabet.first().ok_or(Error::InvalidArgument("empty alphabet".into()))?;
    let mut b =
        MachineBuilder::new(&format!("{}|club", machine.name), &machine.alphabet, machine.counter_kinds.clone());
    let chain: Vec<StateId> = (0..=z).map(|j| b.state(&format!("chain{j}"))).collect();
    let copy: Vec<StateId> = machine.states.iter().map(|s| b.state(&format!("m.{s}"))).collect();
    b.initial(chain[0]);
    let a = b.letter(letter);
    for j in 1..=z {
        let step: Vec<i8> = tau0.iter().map(|&t| i8::from(t >= j)).collect();
        b.push(Transition::new(chain[(j - 1) as usize], a, chain[j as usize], k).with_delta(&step));
    }
    let last = chain[z as usize];
    let pump =
        (club.dimension() > 0).then(|| b.push(Transition::new(last, a, last, k).with_delta(&club.pump_vector())));
    let bridge = b.push(Transition::new(last, a, copy[club.state.0], k));
    for t in &machine.transitions {
        b.push(Transition { source: copy[t.source.0], target: copy[t.target.0], ..t.clone() });
    }
    if let Acceptance::Buchi(f) = &machine.acceptance {
        for q in f {
            b.accepting(copy[q.0]);
        }
    }
    Ok(ClubTest { machine: b.build(), chain: z, pump, bridge })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClubEmptiness {
    pub verdict: EmptinessVerdict,
    /// Threshold `M ≥ N`: when the club's language is non-empty, so is the
    /// language of the minimal configuration of the club restricted to `M`.
    pub threshold: u64,
    /// Pump iterations used by the witness, if any.
    pub pumps: Option<u64>,
}

pub fn club_empty(machine: &CounterMachine, club: &Club, length_bound: usize) -> Result<ClubEmptiness> {
    club_empty_with(machine, club, length_bound, SearchLimits::default())
}

pub fn club_empty_with(
    machine: &CounterMachine,
    club: &Club,
    length_bound: usize,
    limits: SearchLimits,
) -> Result<ClubEmptiness> {
    let test = club_test_automaton(machine, club)?;
    let verdict = find_accepting_lasso_with(&test.machine, &test.machine.initial_config(), length_bound, limits)?;
    let n = club.threshold;
    let (threshold, pumps) = match &verdict {
        EmptinessVerdict::NonEmpty(w) => {
            let pumps =
                w.transitions.iter().take_while(|&&t| t != test.bridge).filter(|&&t| Some(t) == test.pump).count()
                    as u64;
            (n + pumps, Some(pumps))
        }
        EmptinessVerdict::EmptyUpTo(b) => (n + *b as u64, None),
        EmptinessVerdict::EmptyCertified => (n, None),
    };
    Ok(ClubEmptiness { verdict, threshold, pumps })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    NonEmpty(LassoPattern),
    NoAcceptingCycleWithinCaps,
}

/// Brute-force check over configurations with counters capped at
/// `counter_cap`, exploring `depth_cap` steps from the initial configuration.
pub fn oracle_bfs_empty(machine: &CounterMachine, counter_cap: u64, depth_cap: usize) -> OracleVerdict {
    oracle_bfs_empty_from(machine, &machine.initial_config(), counter_cap, depth_cap)
}

pub fn oracle_bfs_empty_from(
    machine: &CounterMachine,
    seed: &Configuration,
    counter_cap: u64,
    depth_cap: usize,
) -> OracleVerdict {
    let system = oracles::capped_graph_from(machine, seed, counter_cap, depth_cap);
    match oracles::capped_buchi_nonempty(&system) {
        Some(w) => OracleVerdict::NonEmpty(LassoPattern::new(machine, seed.clone(), w.transitions, w.looping_point)),
        None => OracleVerdict::NoAcceptingCycleWithinCaps,
    }
}
