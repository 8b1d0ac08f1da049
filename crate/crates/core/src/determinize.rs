//! Optimal clubs, club families, and the determinisation of unambiguous
//! blind counter Büchi automata into deterministic Muller machines with
//! zero tests and counter copying.
//!
//! The deterministic machine keeps one bank of `k` counters per club of the
//! family. A club is inhabited when exactly one tracked configuration lies
//! in it; its bank stores `max(τ_j − N, 0)` for the common threshold `N`.
//! Control states pair the set of inhabited clubs with a state of the
//! path-tracking automaton `D`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::club::{Club, Coord};
use crate::emptiness::{club_empty_with, find_accepting_lasso_with, EmptinessVerdict, SearchLimits};
use crate::error::{Error, Result};
use crate::model::{
    Acceptance, Configuration, CounterKind, CounterMachine, Guard, MachineBuilder, MullerFamily, RabinPair, StateId,
    SymbolId, Transition,
};
use crate::safra::{build_path_muller, PathMuller, Theta};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriState {
    Yes,
    No,
    Unknown,
}

fn require_blind_buchi(machine: &CounterMachine) -> Result<&BTreeSet<StateId>> {
    let Acceptance::Buchi(f) = &machine.acceptance else {
        return Err(Error::NotBuchi(machine.acceptance.kind_name()));
    };
    if let Some(m) = machine.counter_kinds.iter().position(|&c| c != CounterKind::Blind) {
        return Err(Error::NotBlind(m));
    }
    Ok(f)
}

fn minimal_verdict(machine: &CounterMachine, club: &Club, bound: usize) -> Result<EmptinessVerdict> {
    find_accepting_lasso_with(machine, &club.minimal_config(), bound, SearchLimits::default())
}

/// Whether every configuration of the club accepts nothing.
pub fn is_trivial(machine: &CounterMachine, club: &Club, bound: usize) -> Result<TriState> {
    require_blind_buchi(machine)?;
    Ok(match club_empty_with(machine, club, bound, SearchLimits::default())?.verdict {
        EmptinessVerdict::EmptyCertified => TriState::Yes,
        EmptinessVerdict::NonEmpty(_) => TriState::No,
        EmptinessVerdict::EmptyUpTo(_) => TriState::Unknown,
    })
}

/// Whether non-emptiness of the club implies non-emptiness of its minimal
/// configuration.
pub fn is_optimal(machine: &CounterMachine, club: &Club, bound: usize) -> Result<TriState> {
    require_blind_buchi(machine)?;
    if club.dimension() == 0 {
        return Ok(TriState::Yes);
    }
    let minimal = minimal_verdict(machine, club, bound)?;
    if minimal != EmptinessVerdict::EmptyUpTo(bound) {
        // Either the minimal configuration accepts, or the certificate
        // (which depends only on the state) covers the whole club.
        return Ok(TriState::Yes);
    }
    Ok(match club_empty_with(machine, club, bound, SearchLimits::default())?.verdict {
        EmptinessVerdict::EmptyCertified => TriState::Yes,
        _ => TriState::Unknown,
    })
}

/// A threshold `M ≥ N` making the restricted club optimal, when one can be
/// certified within the bound.
pub fn optimalize(machine: &CounterMachine, club: &Club, bound: usize) -> Result<Option<u64>> {
    require_blind_buchi(machine)?;
    let n = club.threshold;
    if club.dimension() == 0 || minimal_verdict(machine, club, bound)? != EmptinessVerdict::EmptyUpTo(bound) {
        return Ok(Some(n));
    }
    let result = club_empty_with(machine, club, bound, SearchLimits::default())?;
    Ok(match result.verdict {
        EmptinessVerdict::EmptyCertified => Some(n),
        EmptinessVerdict::NonEmpty(_) => Some(result.threshold),
        EmptinessVerdict::EmptyUpTo(_) => None,
    })
}

/// A decomposition into clubs; the listed uncertified members are included
/// in `clubs` unsplit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Split {
    pub clubs: Vec<Club>,
    pub uncertified: Vec<Club>,
}

/// All clubs obtained by replacing each unbounded coordinate with either an
/// exact value in `from..to` or `≥to`, in lexicographic order.
fn refine(club: &Club, to: u64) -> Vec<Club> {
    let options: Vec<Vec<Coord>> = club
        .gamma
        .iter()
        .map(|c| match c {
            Coord::Exact(e) => vec![Coord::Exact(*e)],
            Coord::AtLeast => (club.threshold..to).map(Coord::Exact).chain([Coord::AtLeast]).collect(),
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        out.push(Club::new(club.state, pick.iter().zip(&options).map(|(&i, o)| o[i]).collect(), to));
        let Some(j) = (0..pick.len()).rev().find(|&j| pick[j] + 1 < options[j].len()) else {
            return out;
        };
        pick[j] += 1;
        pick[j + 1..].iter_mut().for_each(|p| *p = 0);
    }
}

/// Write the club as a disjoint union of optimal clubs, recursing on
/// dimension.
pub fn split_optimal(machine: &CounterMachine, club: &Club, bound: usize) -> Result<Split> {
    let mut out = Split::default();
    split_into(machine, club, bound, &mut out)?;
    Ok(out)
}

fn split_into(machine: &CounterMachine, club: &Club, bound: usize, out: &mut Split) -> Result<()> {
    if club.dimension() == 0 {
        out.clubs.push(club.clone());
        return Ok(());
    }
    let Some(m) = optimalize(machine, club, bound)? else {
        out.clubs.push(club.clone());
        out.uncertified.push(club.clone());
        return Ok(());
    };
    for sub in refine(club, m) {
        if sub.dimension() == club.dimension() {
            out.clubs.push(sub);
        } else {
            split_into(machine, &sub, bound, out)?;
        }
    }
    Ok(())
}

/// A partition of all configurations into optimal clubs sharing one
/// threshold `N > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClubFamily {
    pub clubs: Vec<Club>,
    pub threshold: u64,
    pub by_state: Vec<Vec<usize>>,
    index: BTreeMap<(StateId, Vec<Coord>), usize>,
}

impl ClubFamily {
    pub fn new(clubs: Vec<Club>, threshold: u64, states: usize) -> Self {
        let mut by_state = vec![Vec::new(); states];
        let mut index = BTreeMap::new();
        for (i, c) in clubs.iter().enumerate() {
            by_state[c.state.0].push(i);
            index.insert((c.state, c.gamma.clone()), i);
        }
        ClubFamily { clubs, threshold, by_state, index }
    }

    pub fn locate(&self, config: &Configuration) -> Option<usize> {
        self.by_state.get(config.state.0)?.iter().copied().find(|&i| self.clubs[i].contains(config))
    }

    fn locate_pattern(&self, state: StateId, gamma: Vec<Coord>) -> Option<usize> {
        self.index.get(&(state, gamma)).copied()
    }

    /// Bank contents `max(τ_j − N, 0)` for a configuration.
    pub fn stored(&self, config: &Configuration) -> Vec<u64> {
        config.counters.iter().map(|&t| t.saturating_sub(self.threshold)).collect()
    }

    /// The configuration represented by a bank of the given club.
    pub fn config_of(&self, club: usize, stored: &[u64]) -> Configuration {
        let c = &self.clubs[club];
        let counters = c
            .gamma
            .iter()
            .zip(stored)
            .map(|(g, &s)| match g {
                Coord::Exact(e) => *e,
                Coord::AtLeast => self.threshold + s,
            })
            .collect();
        Configuration::new(c.state, counters)
    }

    pub fn names(&self, machine: &CounterMachine) -> Vec<String> {
        self.clubs.iter().map(|c| c.display(machine)).collect()
    }
}

/// Split `[q, (≥0, …, ≥0)]` for every state into optimal clubs, then raise
/// every threshold to the largest one (at least 1).
pub fn build_family(machine: &CounterMachine, bound: usize) -> Result<ClubFamily> {
    require_blind_buchi(machine)?;
    let mut split = Split::default();
    for q in 0..machine.state_count() {
        split_into(machine, &Club::full(StateId(q), machine.k()), bound, &mut split)?;
    }
    if !split.uncertified.is_empty() {
        return Err(Error::Uncertified(split.uncertified.iter().map(|c| c.display(machine)).collect()));
    }
    let n = split.clubs.iter().map(|c| c.threshold).max().unwrap_or(0).max(1);
    let clubs = split
        .clubs
        .iter()
        .flat_map(|c| if c.dimension() == 0 { vec![Club { threshold: n, ..c.clone() }] } else { refine(c, n) })
        .collect();
    Ok(ClubFamily::new(clubs, n, machine.state_count()))
}

/// A state of the deterministic machine in explicit form: per club, the
/// stored bank when inhabited.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DetState {
    pub banks: Vec<Option<Vec<u64>>>,
}

impl DetState {
    pub fn initial(machine: &CounterMachine, family: &ClubFamily) -> Result<Self> {
        let start = machine.initial_config();
        let club = family
            .locate(&start)
            .ok_or_else(|| Error::InvalidArgument("family does not cover the initial configuration".into()))?;
        let mut banks = vec![None; family.clubs.len()];
        banks[club] = Some(family.stored(&start));
        Ok(DetState { banks })
    }

    pub fn inhabited(&self) -> BTreeSet<usize> {
        self.banks.iter().enumerate().filter(|(_, b)| b.is_some()).map(|(i, _)| i).collect()
    }

    /// The tracked configurations, by club.
    pub fn configs(&self, family: &ClubFamily) -> Vec<(usize, Configuration)> {
        self.banks.iter().enumerate().filter_map(|(i, b)| b.as_ref().map(|s| (i, family.config_of(i, s)))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetStep {
    pub next: DetState,
    pub theta: Theta,
    pub discarded: Vec<Configuration>,
}

/// One step of the explicit deterministic machine: advance every tracked
/// configuration along every transition on `letter` and keep a target club
/// only if exactly one successor lands in it.
pub fn det_step(machine: &CounterMachine, family: &ClubFamily, state: &DetState, letter: SymbolId) -> Result<DetStep> {
    let mut groups: BTreeMap<usize, Vec<(usize, Configuration)>> = BTreeMap::new();
    for (c, config) in state.configs(family) {
        for ti in machine.outgoing(config.state, letter) {
            let t = &machine.transitions[ti];
            let Some(next) = t.fire(&config.counters)? else { continue };
            let target = Configuration::new(t.target, next);
            let tc = family
                .locate(&target)
                .ok_or_else(|| Error::InvalidArgument("family does not cover a successor".into()))?;
            groups.entry(tc).or_default().push((c, target));
        }
    }
    let mut banks = vec![None; family.clubs.len()];
    let mut theta = Theta::new();
    let mut discarded = Vec::new();
    for (tc, mut group) in groups {
        if group.len() == 1 {
            let (c, target) = group.pop().expect("singleton group");
            banks[tc] = Some(family.stored(&target));
            theta.insert((c, tc));
        } else {
            discarded.extend(group.into_iter().map(|(_, t)| t));
        }
    }
    Ok(DetStep { next: DetState { banks }, theta, discarded })
}

/// The deterministic Muller machine with its construction data.
#[derive(Clone, Debug)]
pub struct DetMachine {
    pub machine: CounterMachine,
    pub family: ClubFamily,
    /// Per control state: the inhabited clubs and the state of `D`.
    pub control: Vec<(BTreeSet<usize>, usize)>,
    pub path: PathMuller,
}

/// Zero tests per step are enumerated exhaustively; more than this many is
/// refused.
const MAX_TESTS: usize = 16;

/// Build the deterministic machine. The input must be unambiguous; see
/// [`unambiguity_lint`] for a bounded check.
pub fn determinize(machine: &CounterMachine, bound: usize) -> Result<DetMachine> {
    machine.ensure_valid()?;
    let accepting = require_blind_buchi(machine)?.clone();
    let family = build_family(machine, bound)?;
    let k = machine.k();
    let n = family.threshold;
    let nf = family.clubs.len();
    let accepting_clubs: BTreeSet<usize> =
        family.clubs.iter().enumerate().filter(|(_, c)| accepting.contains(&c.state)).map(|(i, _)| i).collect();
    let mut path = build_path_muller(nf, &accepting_clubs);
    let mut b =
        MachineBuilder::new(&format!("{}|det", machine.name), &machine.alphabet, vec![CounterKind::Testable; nf * k]);
    let mut control: Vec<(BTreeSet<usize>, usize)> = Vec::new();
    let mut index: BTreeMap<(BTreeSet<usize>, usize), StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let name = |s: &BTreeSet<usize>, d: usize| {
        let clubs: Vec<String> = s.iter().map(|c| format!("{c}")).collect();
        format!("i{}/d{d}", clubs.join("."))
    };
    let mut intern =
        |s: BTreeSet<usize>, d: usize, b: &mut MachineBuilder, control: &mut Vec<_>, queue: &mut VecDeque<_>| {
            *index.entry((s.clone(), d)).or_insert_with(|| {
                let id = b.state(&name(&s, d));
                control.push((s.clone(), d));
                queue.push_back((s, d, id));
                id
            })
        };
    let start = family
        .locate(&machine.initial_config())
        .ok_or_else(|| Error::InvalidArgument("family does not cover the initial configuration".into()))?;
    let init = intern(BTreeSet::from([start]), path.initial(), &mut b, &mut control, &mut queue);
    b.initial(init);
    let clubs = &family.clubs;
    while let Some((inhabited, d, from)) = queue.pop_front() {
        for letter in (0..machine.alphabet.len()).map(SymbolId) {
            let moves: Vec<(usize, &Transition)> = inhabited
                .iter()
                .flat_map(|&c| machine.outgoing(clubs[c].state, letter).map(move |ti| (c, &machine.transitions[ti])))
                .collect();
            let tested: Vec<(usize, usize)> = moves
                .iter()
                .flat_map(|&(c, t)| {
                    (0..k).filter(move |&j| clubs[c].gamma[j] == Coord::AtLeast && t.delta[j] < 0).map(move |j| (c, j))
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if tested.len() > MAX_TESTS {
                return Err(Error::InvalidArgument(format!(
                    "{} simultaneous zero tests exceed the limit of {MAX_TESTS}",
                    tested.len()
                )));
            }
            for mask in 0u32..(1 << tested.len()) {
                let positive = |c: usize, j: usize| {
                    let i = tested.iter().position(|&x| x == (c, j)).expect("tested coordinate");
                    mask >> i & 1 == 1
                };
                let mut groups: BTreeMap<usize, Vec<(usize, Vec<i8>)>> = BTreeMap::new();
                'moves: for &(c, t) in &moves {
                    let mut gamma = Vec::with_capacity(k);
                    let mut adjust = Vec::with_capacity(k);
                    for j in 0..k {
                        let delta = t.delta[j];
                        let (g, a) = match clubs[c].gamma[j] {
                            Coord::Exact(e) => match e.checked_add_signed(i64::from(delta)) {
                                None => continue 'moves,
                                Some(v) if v >= n => (Coord::AtLeast, 0),
                                Some(v) => (Coord::Exact(v), 0),
                            },
                            Coord::AtLeast if delta < 0 && !positive(c, j) => (Coord::Exact(n - 1), 0),
                            Coord::AtLeast => (Coord::AtLeast, delta),
                        };
                        gamma.push(g);
                        adjust.push(a);
                    }
                    let tc = family
                        .locate_pattern(t.target, gamma)
                        .ok_or_else(|| Error::InvalidArgument("family does not cover a successor".into()))?;
                    groups.entry(tc).or_default().push((c, adjust));
                }
                let mut guard = vec![Guard::Any; nf * k];
                for (i, &(c, j)) in tested.iter().enumerate() {
                    guard[c * k + j] = if mask >> i & 1 == 1 { Guard::Positive } else { Guard::Zero };
                }
                let mut delta = vec![0i8; nf * k];
                let mut copies = Vec::new();
                let mut theta = Theta::new();
                let mut next = BTreeSet::new();
                for (tc, group) in groups {
                    let [(c, adjust)] = group.as_slice() else { continue };
                    theta.insert((*c, tc));
                    next.insert(tc);
                    for (j, &a) in adjust.iter().enumerate() {
                        let (dst, src) = (tc * k + j, c * k + j);
                        if dst != src {
                            copies.push((dst, src));
                        }
                        delta[dst] = a;
                    }
                }
                let d2 = path.step(d, &theta);
                let to = intern(next, d2, &mut b, &mut control, &mut queue);
                b.push(Transition { source: from, letter, target: to, guard, delta, copies });
            }
        }
    }
    let pairs = (0..path.pair_count())
        .map(|i| path.pair(i))
        .filter(|(_, visit)| !visit.is_empty())
        .map(|(avoid, visit)| {
            let lift = |ds: &BTreeSet<usize>| -> BTreeSet<StateId> {
                control.iter().enumerate().filter(|(_, (_, d))| ds.contains(d)).map(|(i, _)| StateId(i)).collect()
            };
            RabinPair { avoid: lift(&avoid), visit: lift(&visit) }
        })
        .collect();
    let mut m = b.build();
    m.acceptance = Acceptance::Muller(MullerFamily::Pairs(pairs));
    m.copy_capable = true;
    Ok(DetMachine { machine: m, family, control, path })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LintOutcome {
    NoViolationFound,
    /// Two distinct accepting runs on `u · v^ω`, as transition index
    /// sequences over the lasso `u · v` (the second repeating `v`).
    Violation {
        u: Vec<SymbolId>,
        v: Vec<SymbolId>,
        first: Vec<usize>,
        second: Vec<usize>,
    },
}

/// Search for a lasso word with two distinct accepting runs: a lasso of
/// length at most `word_bound` in the self-product, exploring at most
/// `run_bound` search nodes.
pub fn unambiguity_lint(machine: &CounterMachine, word_bound: usize, run_bound: usize) -> Result<LintOutcome> {
    let accepting = require_blind_buchi(machine)?;
    let k = machine.k();
    let mut kinds = machine.counter_kinds.clone();
    kinds.extend(machine.counter_kinds.iter().copied());
    let mut b = MachineBuilder::new(&format!("{}|pair", machine.name), &machine.alphabet, kinds);
    type P = (StateId, StateId, bool, bool);
    let mut index: BTreeMap<P, StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut origin: Vec<(usize, usize)> = Vec::new();
    let start: P = (machine.initial, machine.initial, false, false);
    index.insert(start, b.state("p0"));
    queue.push_back(start);
    b.initial(index[&start]);
    let by_source = machine.by_source();
    while let Some(p) = queue.pop_front() {
        let (q1, q2, diverged, flag) = p;
        let next_flag = if !flag && accepting.contains(&q1) {
            true
        } else if flag && accepting.contains(&q2) {
            false
        } else {
            flag
        };
        for &i in &by_source[q1.0] {
            for &j in &by_source[q2.0] {
                let (t1, t2) = (&machine.transitions[i], &machine.transitions[j]);
                if t1.letter != t2.letter {
                    continue;
                }
                let split = diverged || t1.target != t2.target || t1.delta != t2.delta;
                let target: P = (t1.target, t2.target, split, next_flag);
                let to = match index.get(&target) {
                    Some(&s) => s,
                    None => {
                        let s = b.state(&format!("p{}", index.len()));
                        index.insert(target, s);
                        queue.push_back(target);
                        s
                    }
                };
                let mut delta = t1.delta.clone();
                delta.extend(t2.delta.iter().copied());
                b.push(Transition::new(index[&p], t1.letter, to, 2 * k).with_delta(&delta));
                origin.push((i, j));
            }
        }
    }
    for (&(q1, _, diverged, flag), &s) in &index {
        if diverged && !flag && accepting.contains(&q1) {
            b.accepting(s);
        }
    }
    let product = b.build();
    match find_accepting_lasso_with(
        &product,
        &product.initial_config(),
        word_bound,
        SearchLimits { node_budget: run_bound },
    ) {
        Ok(EmptinessVerdict::NonEmpty(w)) => {
            let letters: Vec<SymbolId> = w.transitions.iter().map(|&t| product.transitions[t].letter).collect();
            Ok(LintOutcome::Violation {
                u: letters[..w.looping_point].to_vec(),
                v: letters[w.looping_point..].to_vec(),
                first: w.transitions.iter().map(|&t| origin[t].0).collect(),
                second: w.transitions.iter().map(|&t| origin[t].1).collect(),
            })
        }
        Ok(_) | Err(Error::BudgetExceeded(_)) => Ok(LintOutcome::NoViolationFound),
        Err(e) => Err(e),
    }
}
