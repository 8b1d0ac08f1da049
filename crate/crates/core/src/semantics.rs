//! Run semantics: successors, bounded run enumeration, deterministic
//! execution on lasso words and membership of ultimately periodic words.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::emptiness::{EmptinessVerdict, SearchLimits};
use crate::error::{Error, Result};
use crate::model::{Acceptance, Configuration, CounterMachine, MachineBuilder, StateId, SymbolId, Transition};

/// The ω-word `u·v^ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub u: Vec<SymbolId>,
    pub v: Vec<SymbolId>,
}

impl LassoWord {
    pub fn new(u: Vec<SymbolId>, v: Vec<SymbolId>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("lasso cycle must be non-empty".into()));
        }
        Ok(LassoWord { u, v })
    }

    /// Letter at position `i` of `u·v^ω`.
    pub fn letter(&self, i: usize) -> SymbolId {
        if i < self.u.len() {
            self.u[i]
        } else {
            self.v[(i - self.u.len()) % self.v.len()]
        }
    }

    /// Position in the finite structure `u·v` that generates the word.
    pub fn position(&self, i: usize) -> usize {
        if i < self.u.len() {
            i
        } else {
            self.u.len() + (i - self.u.len()) % self.v.len()
        }
    }

    fn check_alphabet(&self, machine: &CounterMachine) -> Result<()> {
        match self.u.iter().chain(&self.v).find(|a| a.0 >= machine.alphabet.len()) {
            Some(a) => Err(Error::LetterOutOfRange(a.0)),
            None => Ok(()),
        }
    }
}

/// A finite run: `configs[i+1]` results from firing `transitions[i]` at `configs[i]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunPrefix {
    pub configs: Vec<Configuration>,
    pub transitions: Vec<usize>,
}

impl RunPrefix {
    pub fn seed(config: Configuration) -> Self {
        RunPrefix { configs: vec![config], transitions: Vec::new() }
    }

    pub fn steps(&self) -> usize {
        self.transitions.len()
    }

    pub fn last(&self) -> &Configuration {
        self.configs.last().expect("a run has at least its seed")
    }

    /// The letters read by the run.
    pub fn word(&self, machine: &CounterMachine) -> Vec<SymbolId> {
        self.transitions.iter().map(|&t| machine.transitions[t].letter).collect()
    }

    /// Replay the run and check every step.
    pub fn check(&self, machine: &CounterMachine) -> Result<()> {
        if self.configs.len() != self.transitions.len() + 1 {
            return Err(Error::InvalidRun("configuration and transition counts disagree".into()));
        }
        for (i, &ti) in self.transitions.iter().enumerate() {
            let t = machine.transitions.get(ti).ok_or_else(|| Error::InvalidRun(format!("unknown transition {ti}")))?;
            let here = &self.configs[i];
            if t.source != here.state {
                return Err(Error::InvalidRun(format!("step {i} leaves from the wrong state")));
            }
            match t.fire(&here.counters)? {
                Some(c) if t.target == self.configs[i + 1].state && c == self.configs[i + 1].counters => {}
                _ => return Err(Error::InvalidRun(format!("step {i} does not follow transition {ti}"))),
            }
        }
        Ok(())
    }
}

/// All `(transition index, next configuration)` pairs enabled at `config` on `letter`.
pub fn successors(
    machine: &CounterMachine,
    config: &Configuration,
    letter: SymbolId,
) -> Result<Vec<(usize, Configuration)>> {
    if letter.0 >= machine.alphabet.len() {
        return Err(Error::LetterOutOfRange(letter.0));
    }
    if config.counters.len() != machine.k() {
        return Err(Error::ArityMismatch { expected: machine.k(), found: config.counters.len() });
    }
    let mut out = Vec::new();
    for i in machine.outgoing(config.state, letter) {
        let t = &machine.transitions[i];
        if let Some(c) = t.fire(&config.counters)? {
            out.push((i, Configuration::new(t.target, c)));
        }
    }
    Ok(out)
}

/// Successors on a letter given by name.
pub fn successors_named(
    machine: &CounterMachine,
    config: &Configuration,
    letter: &str,
) -> Result<Vec<(usize, Configuration)>> {
    let a = machine.symbol(letter).ok_or_else(|| Error::UnknownLetter(letter.into()))?;
    successors(machine, config, a)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunSet {
    pub runs: Vec<RunPrefix>,
    /// Some branch was cut because a counter exceeded the cap.
    pub pruned: bool,
}

/// All runs of `machine` on `word` from `seed`.
pub fn run_prefixes(
    machine: &CounterMachine,
    word: &[SymbolId],
    seed: &Configuration,
    cap: Option<u64>,
    node_budget: usize,
) -> Result<RunSet> {
    let mut runs = Vec::new();
    let pruned = for_each_run(machine, word, seed, cap, node_budget, |r| runs.push(r.clone()))?;
    Ok(RunSet { runs, pruned })
}

/// Depth-first enumeration of the complete runs on `word`, handing each to
/// `visit` without materializing the whole set. Returns whether any branch
/// was pruned by the cap.
pub fn for_each_run<F: FnMut(&RunPrefix)>(
    machine: &CounterMachine,
    word: &[SymbolId],
    seed: &Configuration,
    cap: Option<u64>,
    node_budget: usize,
    mut visit: F,
) -> Result<bool> {
    if let Some(a) = word.iter().find(|a| a.0 >= machine.alphabet.len()) {
        return Err(Error::LetterOutOfRange(a.0));
    }
    let mut run = RunPrefix::seed(seed.clone());
    let mut pending: Vec<Vec<(usize, Configuration)>> = Vec::new();
    let mut pruned = false;
    let mut nodes = 0usize;
    let expand = |config: &Configuration, depth: usize, pruned: &mut bool| -> Result<Vec<(usize, Configuration)>> {
        let mut next = successors(machine, config, word[depth])?;
        if let Some(cap) = cap {
            let before = next.len();
            next.retain(|(_, c)| c.counters.iter().all(|&x| x <= cap));
            *pruned |= next.len() != before;
        }
        next.reverse();
        Ok(next)
    };
    if word.is_empty() {
        visit(&run);
        return Ok(false);
    }
    pending.push(expand(&run.configs[0], 0, &mut pruned)?);
    while let Some(options) = pending.last_mut() {
        match options.pop() {
            None => {
                pending.pop();
                if !pending.is_empty() {
                    run.configs.pop();
                    run.transitions.pop();
                }
            }
            Some((t, c)) => {
                nodes += 1;
                if nodes > node_budget {
                    return Err(Error::BudgetExceeded(node_budget));
                }
                run.transitions.push(t);
                run.configs.push(c);
                let depth = run.transitions.len();
                if depth == word.len() {
                    visit(&run);
                    run.configs.pop();
                    run.transitions.pop();
                } else {
                    let next = expand(run.last(), depth, &mut pruned)?;
                    pending.push(next);
                }
            }
        }
    }
    Ok(pruned)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetTrace {
    pub verdict: Verdict,
    /// Configurations visited, starting with the initial one.
    pub configs: Vec<Configuration>,
    /// `(start, length)` of the detected configuration cycle.
    pub cycle: Option<(usize, usize)>,
    pub diagnostic: Option<String>,
}

/// Execute a deterministic machine on `u·v^ω` for at most `step_budget`
/// letters, deciding acceptance once a configuration repeats at the same
/// position of `v`.
pub fn run_deterministic(machine: &CounterMachine, lasso: &LassoWord, step_budget: usize) -> Result<DetTrace> {
    if !machine.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    lasso.check_alphabet(machine)?;
    let mut configs = vec![machine.initial_config()];
    let mut seen: BTreeMap<(usize, Configuration), usize> = BTreeMap::new();
    for step in 0..=step_budget {
        let here = configs[step].clone();
        if step >= lasso.u.len() {
            let key = ((step - lasso.u.len()) % lasso.v.len(), here.clone());
            if let Some(&start) = seen.get(&key) {
                let inf: BTreeSet<StateId> = configs[start..step].iter().map(|c| c.state).collect();
                let verdict = if machine.acceptance.accepts(&inf) { Verdict::Accept } else { Verdict::Reject };
                return Ok(DetTrace { verdict, configs, cycle: Some((start, step - start)), diagnostic: None });
            }
            seen.insert(key, step);
        }
        if step == step_budget {
            break;
        }
        let next = successors(machine, &here, lasso.letter(step))?;
        match next.into_iter().next() {
            Some((_, c)) => configs.push(c),
            None => {
                let diagnostic = format!(
                    "blocked at step {step} in state {} reading `{}`",
                    machine.state_name(here.state),
                    machine.symbol_name(lasso.letter(step))
                );
                return Ok(DetTrace { verdict: Verdict::Reject, configs, cycle: None, diagnostic: Some(diagnostic) });
            }
        }
    }
    Ok(DetTrace { verdict: Verdict::Unknown, configs, cycle: None, diagnostic: None })
}

/// Outcome of a membership query on a lasso word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// An accepting lasso pattern of the machine reading `u·v^ω`, as
    /// transition indices of the original machine with its looping point.
    Member {
        transitions: Vec<usize>,
        looping_point: usize,
    },
    NonMemberUpToBound(usize),
    NonMember,
}

/// Synchronous product of `machine` with the deterministic structure that
/// generates `u·v^ω`; also returns the original transition behind each
/// product transition.
pub fn lasso_product(machine: &CounterMachine, lasso: &LassoWord) -> Result<(CounterMachine, Vec<usize>)> {
    lasso.check_alphabet(machine)?;
    let len = lasso.u.len() + lasso.v.len();
    let word: Vec<SymbolId> = lasso.u.iter().chain(&lasso.v).copied().collect();
    let next_pos = |p: usize| if p + 1 < len { p + 1 } else { lasso.u.len() };
    let accepting = match &machine.acceptance {
        Acceptance::Buchi(f) => f,
        Acceptance::Muller(_) => return Err(Error::NotBuchi("Muller")),
    };
    let mut b =
        MachineBuilder::new(&format!("{}*lasso", machine.name), &machine.alphabet, machine.counter_kinds.clone());
    let name = |q: StateId, p: usize| format!("{}@{p}", machine.state_name(q));
    let init = b.state(&name(machine.initial, 0));
    b.initial(init);
    let mut origin = Vec::new();
    let mut queue = alloc::collections::VecDeque::from([(machine.initial, 0usize)]);
    let mut seen = BTreeSet::from([(machine.initial, 0usize)]);
    let by_source = machine.by_source();
    while let Some((q, p)) = queue.pop_front() {
        let here = b.state(&name(q, p));
        if accepting.contains(&q) {
            b.accepting(here);
        }
        for &ti in &by_source[q.0] {
            let t = &machine.transitions[ti];
            if t.letter != word[p] {
                continue;
            }
            let np = next_pos(p);
            let there = b.state(&name(t.target, np));
            b.push(Transition { source: here, target: there, ..t.clone() });
            origin.push(ti);
            if seen.insert((t.target, np)) {
                queue.push_back((t.target, np));
            }
        }
    }
    Ok((b.build(), origin))
}

/// Bounded membership of `u·v^ω` via lasso search on the product.
pub fn membership_upw(machine: &CounterMachine, lasso: &LassoWord, bound: usize) -> Result<Membership> {
    membership_upw_with(machine, lasso, bound, SearchLimits::default())
}

pub fn membership_upw_with(
    machine: &CounterMachine,
    lasso: &LassoWord,
    bound: usize,
    limits: SearchLimits,
) -> Result<Membership> {
    let (product, origin) = lasso_product(machine, lasso)?;
    let verdict = crate::emptiness::find_accepting_lasso_with(&product, &product.initial_config(), bound, limits)?;
    Ok(match verdict {
        EmptinessVerdict::NonEmpty(w) => Membership::Member {
            transitions: w.transitions.iter().map(|&t| origin[t]).collect(),
            looping_point: w.looping_point,
        },
        EmptinessVerdict::EmptyUpTo(b) => Membership::NonMemberUpToBound(b),
        EmptinessVerdict::EmptyCertified => Membership::NonMember,
    })
}

/// Convenience wrapper mirroring the emptiness entry point.
pub fn is_member(machine: &CounterMachine, lasso: &LassoWord, bound: usize) -> Result<bool> {
    Ok(matches!(membership_upw(machine, lasso, bound)?, Membership::Member { .. }))
}
