//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, ExitCode};
use std::time::Instant;

use blindcount::format::{parse_machine, serialize_machine};
use blindcount_core::club::{Club, Coord};
use blindcount_core::determinize::{
    build_family, det_step, determinize, is_optimal, split_optimal, unambiguity_lint, DetState, LintOutcome, TriState,
};
use blindcount_core::emptiness::{
    check_lasso_pattern, find_accepting_lasso, find_accepting_lasso_with, oracle_bfs_empty_from, replay,
    EmptinessVerdict, LassoPattern, OracleVerdict, SearchLimits,
};
use blindcount_core::hsim::{
    build_b, build_l, build_pa, classify_shape, h_encode_prefix, lift_run, project_run, shuffle,
};
use blindcount_core::oracles::{capped_buchi_nonempty, capped_graph, descending_chain_oracle, theta_path_oracle};
use blindcount_core::safra::{build_path_muller, Theta};
use blindcount_core::semantics::{
    for_each_run, membership_upw, run_deterministic, LassoWord, Membership, RunPrefix, Verdict,
};
use blindcount_core::sigma11::{
    alpha_prefix, b_value, build_a1, chain_from_descending, chain_to_run, e_value, is_correct_chain, is_witnessing,
    leq_inf, m_value, run_to_chain, Dir, FiniteTreeSet, TreeNode,
};
use blindcount_core::{
    Configuration, CounterKind, CounterMachine, Guard, MachineBuilder, StateId, SymbolId, Transition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const RUN_BUDGET: usize = 1 << 26;

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("lasso search vs capped-graph oracle", criterion_1),
        ("coding counter-phase invariant", criterion_2),
        ("lift/project round trip", criterion_3),
        ("shape property of surviving runs", criterion_4),
        ("tree encoding identities", criterion_5),
        ("chain/run round trip", criterion_6),
        ("club algebra", criterion_7),
        ("determinisation end to end", criterion_8),
        ("path automaton vs relational oracle", criterion_9),
        ("CLI goldens and format round trip", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail}; {secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({detail}; {secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn verdict(violations: usize, detail: String) -> Outcome {
    if violations == 0 {
        Ok(detail)
    } else {
        Err(format!("{violations} violations; {detail}"))
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// All words of length `n` over `letters` symbols.
fn words(letters: usize, n: usize) -> Vec<Vec<SymbolId>> {
    (0..n).fold(vec![vec![]], |acc, _| {
        acc.iter().flat_map(|w| (0..letters).map(move |a| [w.as_slice(), &[SymbolId(a)]].concat())).collect()
    })
}

fn words_up_to(letters: usize, n: usize) -> Vec<Vec<SymbolId>> {
    (0..=n).flat_map(|i| words(letters, i)).collect()
}

fn unit_deltas(k: usize) -> Vec<Vec<i8>> {
    (0..k).fold(vec![vec![]], |acc, _| {
        acc.iter().flat_map(|d| [-1i8, 0, 1].map(|x| [d.as_slice(), &[x]].concat())).collect()
    })
}

// ---------------------------------------------------------------- criterion 1

/// Exhaustive one-letter, one-counter machines with at most two states.
fn tiny_machines() -> Vec<CounterMachine> {
    let mut out = Vec::new();
    for n in 1..=2usize {
        let candidates: Vec<(usize, usize, i8)> =
            (0..n).flat_map(|s| (0..n).flat_map(move |t| [-1i8, 0, 1].map(|d| (s, t, d)))).collect();
        for mask in 0u32..1 << candidates.len() {
            for acc in 0u32..1 << n {
                let mut b = MachineBuilder::new("tiny", &["a"], vec![CounterKind::Blind]);
                (0..n).for_each(|q| {
                    b.state(&format!("q{q}"));
                });
                b.initial(StateId(0));
                (0..n).filter(|q| acc >> q & 1 == 1).for_each(|q| {
                    b.accepting(StateId(q));
                });
                for (i, &(s, t, d)) in candidates.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        b.push(Transition::new(StateId(s), SymbolId(0), StateId(t), 1).with_delta(&[d]));
                    }
                }
                out.push(b.build());
            }
        }
    }
    out
}

/// Random blind machines with up to `states` states, `k` counters, two
/// letters and unit deltas.
fn random_blind(rng: &mut ChaCha8Rng, states: usize, k: usize, density: f64) -> CounterMachine {
    let deltas = unit_deltas(k);
    let mut b = MachineBuilder::new("rnd", &["a", "b"], vec![CounterKind::Blind; k]);
    for q in 0..states {
        b.state(&format!("q{q}"));
        if rng.gen_bool(0.4) {
            b.accepting(StateId(q));
        }
    }
    b.initial(StateId(0));
    for s in 0..states {
        for a in 0..2 {
            for t in 0..states {
                while rng.gen_bool(density) {
                    let d = &deltas[rng.gen_range(0..deltas.len())];
                    b.push(Transition::new(StateId(s), SymbolId(a), StateId(t), k).with_delta(d));
                    if rng.gen_bool(0.7) {
                        break;
                    }
                }
            }
        }
    }
    b.build()
}

fn criterion_1() -> Outcome {
    const BOUND: usize = 12;
    const CAP: u64 = 12;
    let mut machines = tiny_machines();
    let exhaustive = machines.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a55_0001);
    for i in 0..6000 {
        let states = 1 + i % 3;
        let k = 1 + (i / 3) % 2;
        machines.push(random_blind(&mut rng, states, k, 0.3));
    }
    let mut problems: Vec<String> = Vec::new();
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, m) in machines.iter().enumerate() {
        let oracle = capped_buchi_nonempty(&capped_graph(m, CAP));
        let found = match find_accepting_lasso(m, BOUND) {
            Ok(v) => v,
            Err(e) => {
                *tally.entry("search errors").or_default() += 1;
                problems.push(format!("machine {i}: {e}"));
                continue;
            }
        };
        match &found {
            EmptinessVerdict::NonEmpty(p) => {
                *tally.entry("nonempty").or_default() += 1;
                if check_lasso_pattern(m, p).is_err() {
                    problems.push(format!("machine {i}: witness fails the pattern check"));
                }
                match replay(m, p, 3).map_err(fail)? {
                    None => problems.push(format!("machine {i}: witness underflows on replay")),
                    Some(configs) => {
                        let once = &configs[..=p.transitions.len()];
                        let closed = once[p.looping_point] == once[p.transitions.len()];
                        let capped = once.iter().all(|c| c.counters.iter().all(|&x| x <= CAP));
                        if closed && capped && oracle.is_none() {
                            problems.push(format!("machine {i}: closed capped witness missed by the oracle"));
                        }
                    }
                }
            }
            EmptinessVerdict::EmptyCertified => {
                *tally.entry("certified empty").or_default() += 1;
                if oracle.is_some() {
                    problems.push(format!("machine {i}: certified empty but the oracle accepts"));
                }
            }
            EmptinessVerdict::EmptyUpTo(_) => {
                *tally.entry("empty up to bound").or_default() += 1;
            }
        }
        if let Some(w) = &oracle {
            *tally.entry("oracle nonempty").or_default() += 1;
            if w.transitions.len() <= BOUND + 1 && !found.is_nonempty() {
                problems.push(format!("machine {i}: short oracle witness but search found none"));
            }
        }
    }
    let summary = format!("{} machines ({exhaustive} exhaustive), {tally:?}", machines.len());
    if let Some(first) = problems.first() {
        return Err(format!("{} violations, first: {first}; {summary}", problems.len()));
    }
    Ok(summary)
}

// ------------------------------------------------------- criteria 2, 3 and 4

fn guarded(b: &mut MachineBuilder, from: &str, letter: &str, to: &str, guard: Guard, delta: i8) {
    let (s, t, a) = (b.state(from), b.state(to), b.letter(letter));
    b.push(Transition::new(s, a, t, 1).with_guard(&[guard]).with_delta(&[delta]));
}

/// Five one-counter Büchi automata over `{a, b}` with zero tests.
fn one_counter_automata() -> Vec<CounterMachine> {
    use Guard::{Any, Positive, Zero};
    type Edge = (&'static str, &'static str, &'static str, Guard, i8);
    let specs: [(&str, &[&str], &[Edge]); 5] = [
        ("up-down", &["q"], &[("q", "a", "q", Any, 1), ("q", "b", "q", Positive, -1)]),
        (
            "zero-exit",
            &["r"],
            &[
                ("p", "a", "p", Any, 1),
                ("p", "b", "r", Zero, 0),
                ("p", "b", "p", Positive, -1),
                ("r", "a", "p", Any, 1),
                ("r", "b", "r", Zero, 0),
            ],
        ),
        (
            "guess",
            &["q", "s"],
            &[
                ("q", "a", "q", Any, 0),
                ("q", "a", "q", Any, 1),
                ("q", "b", "q", Positive, -1),
                ("q", "b", "s", Zero, 0),
                ("s", "a", "q", Any, 0),
                ("s", "b", "s", Any, 0),
            ],
        ),
        (
            "two-phase",
            &["c"],
            &[
                ("p", "a", "p", Any, 1),
                ("p", "b", "c", Any, 0),
                ("c", "a", "c", Positive, -1),
                ("c", "a", "p", Zero, 0),
                ("c", "b", "c", Any, 0),
            ],
        ),
        (
            "branching",
            &["q1"],
            &[
                ("q0", "a", "q0", Any, 1),
                ("q0", "a", "q1", Any, 1),
                ("q0", "b", "q0", Any, 0),
                ("q1", "a", "q1", Positive, -1),
                ("q1", "b", "q0", Zero, 0),
                ("q1", "b", "q1", Positive, 0),
            ],
        ),
    ];
    specs
        .iter()
        .map(|(name, accepting, edges)| {
            let mut b = MachineBuilder::new(name, &["a", "b"], vec![CounterKind::Testable]);
            let init = b.state(edges[0].0);
            b.initial(init);
            for &(s, a, t, g, d) in edges.iter() {
                guarded(&mut b, s, a, t, g, d);
            }
            for q in accepting.iter() {
                let s = b.state(q);
                b.accepting(s);
            }
            let m = b.build();
            m.ensure_valid().expect("fixture is valid");
            m
        })
        .collect()
}

fn letters_of(m: &CounterMachine, w: &[SymbolId]) -> Vec<String> {
    m.decode(w).into_iter().map(str::to_string).collect()
}

/// The encoded `h`-prefix of `x` over `B`'s alphabet with its boundaries.
fn encoded(a: &CounterMachine, b: &CounterMachine, x: &[SymbolId]) -> Result<(Vec<SymbolId>, Vec<usize>), String> {
    let xs = letters_of(a, x);
    let refs: Vec<&str> = xs.iter().map(String::as_str).collect();
    let h = h_encode_prefix(&a.alphabet, &refs, refs.len()).map_err(fail)?;
    let word = b.encode(h.encoded.iter().map(String::as_str)).map_err(fail)?;
    Ok((word, h.boundaries))
}

fn criterion_2() -> Outcome {
    let mut runs = 0usize;
    let mut checks = 0usize;
    let mut violations = 0usize;
    for a in one_counter_automata() {
        let sa = build_b(&a).map_err(fail)?;
        for x in (1..=5).flat_map(|i| words(2, i)) {
            let (word, boundaries) = encoded(&a, &sa.machine, &x)?;
            for_each_run(&sa.machine, &word, &sa.machine.initial_config(), None, RUN_BUDGET, |r| {
                runs += 1;
                for (j, &start) in boundaries.iter().enumerate() {
                    let n = j + 1;
                    let end = start + n + 2;
                    // After the segment's letter and, when present, after the next separator.
                    for at in [end, end + 1].into_iter().filter(|&i| i < r.configs.len()) {
                        let c = &r.configs[at].counters;
                        let (fill, other) = if n % 2 == 1 { ((0, 1), (2, 3)) } else { ((2, 3), (0, 1)) };
                        checks += 1;
                        if c[other.0] != 0 || c[other.1] != 0 || c[fill.0] + c[fill.1] != n as u64 {
                            violations += 1;
                        }
                    }
                }
            })
            .map_err(fail)?;
        }
    }
    verdict(violations, format!("{runs} runs, {checks} boundary checks"))
}

fn criterion_3() -> Outcome {
    let mut violations = 0usize;
    let (mut a_runs, mut b_runs) = (0usize, 0usize);
    for a in one_counter_automata() {
        let sa = build_b(&a).map_err(fail)?;
        for x in words_up_to(2, 6) {
            let mut from_a: BTreeSet<RunPrefix> = BTreeSet::new();
            for_each_run(&a, &x, &a.initial_config(), None, RUN_BUDGET, |r| {
                from_a.insert(r.clone());
            })
            .map_err(fail)?;
            let mut lifted = BTreeSet::new();
            for r in &from_a {
                a_runs += 1;
                let ok = lift_run(&sa, &a, r)
                    .and_then(|l| {
                        l.check(&sa.machine)?;
                        let back = project_run(&sa, &a, &l)?;
                        lifted.insert(l);
                        Ok(back == *r)
                    })
                    .unwrap_or(false);
                violations += usize::from(!ok);
            }
            let (word, _) = encoded(&a, &sa.machine, &x)?;
            let mut from_b = BTreeSet::new();
            for_each_run(&sa.machine, &word, &sa.machine.initial_config(), None, RUN_BUDGET, |r| {
                from_b.insert(r.clone());
            })
            .map_err(fail)?;
            for r in &from_b {
                b_runs += 1;
                let ok = project_run(&sa, &a, r).and_then(|p| lift_run(&sa, &a, &p)).is_ok_and(|l| l == *r);
                violations += usize::from(!ok);
            }
            violations += usize::from(from_b != lifted);
        }
    }
    verdict(violations, format!("{a_runs} runs of the input automata, {b_runs} simulating runs"))
}

fn criterion_4() -> Outcome {
    let mut violations = 0usize;
    let (mut words_checked, mut alive_before) = (0usize, 0usize);
    for a in one_counter_automata() {
        let sa = build_b(&a).map_err(fail)?;
        for len in 1..=4usize {
            let profiles: Vec<Vec<usize>> = (0..len).fold(vec![vec![]], |acc, _| {
                acc.iter().flat_map(|p| (1..=4).map(move |n| [p.as_slice(), &[n]].concat())).collect()
            });
            for profile in profiles {
                for x in words(2, len) {
                    let xs = letters_of(&a, &x);
                    let mut tokens: Vec<&str> = Vec::new();
                    let mut ends = Vec::new();
                    for (i, (n, letter)) in profile.iter().zip(&xs).enumerate() {
                        tokens.push(if i % 2 == 0 { "A" } else { "B" });
                        tokens.extend(std::iter::repeat_n("0", *n));
                        tokens.push(letter);
                        ends.push(tokens.len());
                    }
                    let shape = classify_shape(&a.alphabet, &tokens);
                    let Some(i0) = shape.i0 else { continue };
                    if i0 == 1 || profile[i0 - 1] <= i0 {
                        continue;
                    }
                    words_checked += 1;
                    let count = |n: usize| -> Result<usize, String> {
                        let w = sa.machine.encode(tokens[..n].iter().copied()).map_err(fail)?;
                        let mut c = 0;
                        for_each_run(&sa.machine, &w, &sa.machine.initial_config(), None, RUN_BUDGET, |_| c += 1)
                            .map_err(fail)?;
                        Ok(c)
                    };
                    violations += usize::from(count(ends[i0 - 1])? > 0);
                    alive_before += usize::from(count(ends[i0 - 2])? > 0);
                }
            }
        }
    }
    verdict(violations, format!("{words_checked} shape words, {alive_before} with runs through segment i0-1"))
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Outcome {
    let mut violations = 0usize;
    let mut pairs = 0usize;
    for n in 0..=8usize {
        let level: Vec<TreeNode> = TreeNode::level(n).collect();
        let mut bs: Vec<u64> = level.iter().map(b_value).collect::<Result<_, _>>().map_err(fail)?;
        bs.sort_unstable();
        violations += usize::from(bs != (0..1u64 << n).collect::<Vec<_>>());
        let below = m_value(n as i64 - 1).map_err(fail)?;
        let cap = m_value(n as i64).map_err(fail)?;
        let es: Vec<u64> = level.iter().map(e_value).collect::<Result<_, _>>().map_err(fail)?;
        for e in &es {
            let sum = e.checked_add(below).ok_or("e(v) + m(|v|-1) overflows")?;
            violations += usize::from(sum > cap);
        }
        for (i, v) in level.iter().enumerate() {
            for (j, w) in level.iter().enumerate().filter(|(j, _)| *j != i) {
                pairs += 1;
                violations += usize::from(leq_inf(v, w) != (es[i] < es[j]));
            }
        }
    }
    verdict(violations, format!("levels 0..=8, {pairs} ordered pairs, m(8) = {}", m_value(8).map_err(fail)?))
}

// ---------------------------------------------------------------- criterion 6

fn node(s: &str) -> TreeNode {
    s.parse().expect("tree node literal")
}

fn sample_sets() -> Vec<(&'static str, FiniteTreeSet)> {
    let set = |nodes: &[&str]| FiniteTreeSet::new(nodes.iter().map(|s| node(s)).collect(), 4).expect("depth 4 set");
    vec![
        ("empty", FiniteTreeSet::empty(4)),
        ("full", FiniteTreeSet::full(4)),
        ("left-spine", FiniteTreeSet::left_spine(4)),
        ("right-spine", FiniteTreeSet::right_spine(4)),
        ("{ε,L}", set(&["ε", "L"])),
        ("mixed", set(&["ε", "R", "RL", "RLL", "RLLR", "LR", "LRL"])),
    ]
}

/// Correct chains with exactly `len` nodes.
fn correct_chains(len: usize) -> Vec<Vec<TreeNode>> {
    let mut chains = vec![vec![TreeNode::root()]];
    for n in 1..len {
        chains = chains
            .iter()
            .flat_map(|c| {
                let bound = c[n - 1].child(Dir::R);
                TreeNode::level(n).filter(move |v| leq_inf(v, &bound)).map(move |v| [c.as_slice(), &[v]].concat())
            })
            .collect();
    }
    chains
}

fn witnessing_hit_sets(chain: &[TreeNode], set: &FiniteTreeSet) -> Vec<BTreeSet<usize>> {
    let candidates: Vec<usize> =
        (0..chain.len()).filter(|&n| is_witnessing(chain, set, &BTreeSet::from([n]))).collect();
    (0u32..1 << candidates.len())
        .map(|mask| candidates.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &n)| n).collect())
        .collect()
}

fn criterion_6() -> Outcome {
    let a1 = build_a1();
    let mut violations = 0usize;
    let (mut runs, mut canonical, mut round_trips) = (0usize, 0usize, 0usize);
    for (_, set) in sample_sets() {
        // Chain side: every correct chain through phase 3 with every witnessing hit set.
        for chain in (1..=4).flat_map(correct_chains) {
            for hits in witnessing_hit_sets(&chain, &set) {
                round_trips += 1;
                let ok = chain_to_run(&chain, &hits, &set)
                    .and_then(|r| run_to_chain(&r))
                    .is_ok_and(|t| t.chain == chain && t.hits == hits);
                violations += usize::from(!ok);
            }
        }
        // One chain through phase 4: the longest descending chain, interpolated.
        let xs = descending_chain_oracle(&set);
        if !xs.is_empty() {
            let (chain, hits) = chain_from_descending(&xs).map_err(fail)?;
            if chain.len() == 5 {
                round_trips += 1;
                let ok = chain_to_run(&chain, &hits, &set)
                    .and_then(|r| run_to_chain(&r))
                    .is_ok_and(|t| t.chain == chain && t.hits == hits);
                violations += usize::from(!ok);
            }
        }
        // Run side: every run over the first four phases.
        let text = alpha_prefix(&set, 4).map_err(fail)?;
        let word = a1.encode_chars(&text).map_err(fail)?;
        let mut err: Option<String> = None;
        for_each_run(&a1, &word, &a1.initial_config(), None, RUN_BUDGET, |r| {
            runs += 1;
            let trace = match run_to_chain(r) {
                Ok(t) => t,
                Err(e) => {
                    violations += 1;
                    err.get_or_insert(e.to_string());
                    return;
                }
            };
            let e = |v: &TreeNode| e_value(v).expect("small e");
            let bounds_hold =
                trace.chain.len() == 4
                    && is_correct_chain(&trace.chain)
                    && trace.chain.iter().enumerate().all(|(n, v)| {
                        e(v) <= trace.counters[n] && trace.counters[n] < m_value(n as i64).expect("small m")
                    })
                    && trace.counters[4] < m_value(4).expect("small m");
            violations += usize::from(!bounds_hold);
            // Runs that take the R block at every non-accepting phase are
            // determined by their chain and hits.
            let takes_r = trace
                .chain
                .iter()
                .enumerate()
                .filter(|(n, _)| !trace.hits.contains(n))
                .all(|(n, v)| trace.counters[n + 1] + e(v) == trace.counters[n] + e(&v.child(Dir::R)));
            if takes_r {
                canonical += 1;
                let ok = chain_to_run(&trace.chain, &trace.hits, &set).is_ok_and(|back| back == *r);
                violations += usize::from(!ok);
            }
        })
        .map_err(fail)?;
        if let Some(e) = err {
            return Err(e);
        }
    }
    verdict(violations, format!("6 sets, {round_trips} chain round trips, {runs} runs ({canonical} canonical)"))
}

// ---------------------------------------------------------------- criterion 7

/// Every counter vector in `[0, side]^k`.
fn grid(k: usize, side: u64) -> Vec<Vec<u64>> {
    (0..k).fold(vec![vec![]], |acc, _| {
        acc.iter().flat_map(|v| (0..=side).map(move |x| [v.as_slice(), &[x]].concat())).collect()
    })
}

fn criterion_7() -> Outcome {
    const BOUND: usize = 10;
    const CAP: u64 = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a55_0007);
    let mut violations = 0usize;
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..40 {
        let m = random_blind(&mut rng, 2 + i % 2, 1 + (i / 2) % 2, 0.35);
        let k = m.k();
        for q in 0..m.state_count() {
            let split = split_optimal(&m, &Club::full(StateId(q), k), BOUND).map_err(fail)?;
            *tally.entry("clubs").or_default() += split.clubs.len();
            *tally.entry("uncertified").or_default() += split.uncertified.len();
            let side = split.clubs.iter().map(|c| c.threshold).max().unwrap_or(0) + 2;
            for v in grid(k, side) {
                let c = Configuration::new(StateId(q), v);
                violations += usize::from(split.clubs.iter().filter(|club| club.contains(&c)).count() != 1);
            }
            for club in &split.clubs {
                match is_optimal(&m, club, BOUND).map_err(fail)? {
                    TriState::Yes => *tally.entry("certified optimal").or_default() += 1,
                    TriState::Unknown => *tally.entry("reported unknown").or_default() += 1,
                    TriState::No => violations += 1,
                }
                if club.dimension() == 0 || split.uncertified.contains(club) {
                    continue;
                }
                // Sub-clubs of an optimal club stay optimal.
                for _ in 0..2 {
                    let sub = random_subclub(&mut rng, club);
                    match subclub_check(&m, &sub, BOUND, CAP)? {
                        Some(true) => *tally.entry("sub-clubs confirmed").or_default() += 1,
                        Some(false) => violations += 1,
                        None => *tally.entry("sub-clubs inconclusive").or_default() += 1,
                    }
                }
            }
        }
    }
    verdict(violations, format!("40 machines, {tally:?}"))
}

fn random_subclub(rng: &mut ChaCha8Rng, club: &Club) -> Club {
    let n = club.threshold;
    if rng.gen_bool(0.5) {
        return club.restrict(n + rng.gen_range(1..=2)).expect("raised threshold");
    }
    let free: Vec<usize> = (0..club.gamma.len()).filter(|&j| club.gamma[j] == Coord::AtLeast).collect();
    let mut gamma = club.gamma.clone();
    gamma[free[rng.gen_range(0..free.len())]] = Coord::Exact(n + rng.gen_range(0..=2));
    Club::new(club.state, gamma, n)
}

/// `Some(false)` when some grid member of `sub` accepts per the oracle while
/// its minimal configuration is certified empty or `is_optimal` says no;
/// `Some(true)` when the minimal configuration is found non-empty or the
/// club holds no accepting grid member.
fn subclub_check(m: &CounterMachine, sub: &Club, bound: usize, cap: u64) -> Result<Option<bool>, String> {
    if is_optimal(m, sub, bound).map_err(fail)? == TriState::No {
        return Ok(Some(false));
    }
    let side = sub.threshold + 3;
    let accepting_member = grid(sub.gamma.len(), side)
        .into_iter()
        .map(|v| Configuration::new(sub.state, v))
        .filter(|c| sub.contains(c))
        .any(|c| matches!(oracle_bfs_empty_from(m, &c, cap, 10_000), OracleVerdict::NonEmpty(_)));
    if !accepting_member {
        return Ok(Some(true));
    }
    Ok(match find_accepting_lasso_with(m, &sub.minimal_config(), bound, SearchLimits::default()).map_err(fail)? {
        EmptinessVerdict::NonEmpty(_) => Some(true),
        EmptinessVerdict::EmptyCertified => Some(false),
        EmptinessVerdict::EmptyUpTo(_) => None,
    })
}

// ---------------------------------------------------------------- criterion 8

/// Unambiguous blind Büchi inputs over `{a, b}`.
fn unambiguous_inputs() -> Vec<CounterMachine> {
    let mut out = Vec::new();

    let mut b = MachineBuilder::new("balanced-b", &["a", "b"], vec![CounterKind::Blind]);
    b.state("p");
    let r = b.state("r");
    b.accepting(r);
    b.edge("p", "a", "p", &[1]);
    b.edge("p", "b", "r", &[-1]);
    b.edge("r", "a", "p", &[1]);
    b.edge("r", "b", "r", &[-1]);
    out.push(b.build());

    let mut b = MachineBuilder::new("all", &["a", "b"], vec![CounterKind::Blind]);
    let q = b.state("q");
    b.accepting(q);
    b.edge("q", "a", "q", &[1]);
    b.edge("q", "b", "q", &[0]);
    out.push(b.build());

    let mut b = MachineBuilder::new("b-runs", &["a", "b"], vec![CounterKind::Blind]);
    b.state("q");
    let r = b.state("r");
    b.accepting(r);
    b.edge("q", "a", "q", &[1]);
    b.edge("q", "b", "r", &[0]);
    b.edge("r", "b", "r", &[-1]);
    b.edge("r", "a", "q", &[0]);
    out.push(b.build());

    let mut b = MachineBuilder::new("two-counters", &["a", "b"], vec![CounterKind::Blind, CounterKind::Blind]);
    let p = b.state("p");
    b.accepting(p);
    b.edge("p", "a", "p", &[1, -1]);
    b.edge("p", "b", "s", &[-1, 1]);
    b.edge("s", "a", "p", &[0, 1]);
    b.edge("s", "b", "s", &[0, 0]);
    out.push(b.build());

    // Nondeterministic: after `a` the run guesses the next letter, and a
    // wrong guess blocks; `b` from `p` forks into a dead state.
    let mut b = MachineBuilder::new("guess-next", &["a", "b"], vec![CounterKind::Blind]);
    let p = b.state("p");
    b.accepting(p);
    b.edge("p", "a", "x", &[1]);
    b.edge("p", "a", "y", &[0]);
    b.edge("x", "a", "p", &[0]);
    b.edge("y", "b", "p", &[0]);
    b.edge("p", "b", "p", &[-1]);
    b.edge("p", "b", "d", &[0]);
    b.edge("p", "b", "d", &[1]);
    b.edge("d", "a", "d", &[0]);
    b.edge("d", "b", "d", &[0]);
    out.push(b.build());

    out
}

fn lasso_words(max: usize) -> Vec<LassoWord> {
    let all = words_up_to(2, max);
    let mut out = Vec::new();
    for u in &all {
        for v in all.iter().filter(|v| !v.is_empty()) {
            out.push(LassoWord::new(u.clone(), v.clone()).expect("non-empty period"));
        }
    }
    out
}

fn criterion_8() -> Outcome {
    const BOUND: usize = 16;
    const MEMBERSHIP_BOUND: usize = 24;
    let mut violations = 0usize;
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    let mut first: Option<String> = None;
    let mut note = |violations: &mut usize, msg: String| {
        *violations += 1;
        first.get_or_insert(msg);
    };
    let inputs = unambiguous_inputs();
    for m in &inputs {
        m.ensure_valid().map_err(fail)?;
        if unambiguity_lint(m, 8, 500_000).map_err(fail)? != LintOutcome::NoViolationFound {
            return Err(format!("{} fails the unambiguity lint", m.name));
        }
        let det = determinize(m, BOUND).map_err(|e| format!("{}: {e}", m.name))?;
        if !det.machine.is_deterministic() || !det.machine.validate().is_empty() {
            note(&mut violations, format!("{}: output is not a valid deterministic machine", m.name));
        }
        let family = build_family(m, BOUND).map_err(fail)?;
        let mut discarded: BTreeSet<Configuration> = BTreeSet::new();
        for w in lasso_words(4) {
            let expected = membership_upw(m, &w, MEMBERSHIP_BOUND).map_err(fail)?;
            let got = run_deterministic(&det.machine, &w, 20_000).map_err(fail)?.verdict;
            match (got, &expected) {
                (Verdict::Unknown, _) => *tally.entry("undecided").or_default() += 1,
                (Verdict::Accept, Membership::Member { .. }) => *tally.entry("accept").or_default() += 1,
                (Verdict::Reject, Membership::NonMember | Membership::NonMemberUpToBound(_)) => {
                    *tally.entry("reject").or_default() += 1
                }
                (g, e) => note(&mut violations, format!("{} on {w:?}: {g:?} vs {e:?}", m.name)),
            }
            // Shadow the certified accepting run through the explicit det steps.
            if let Membership::Member { transitions, looping_point } = &expected {
                let pattern = LassoPattern::from_initial(m, transitions.clone(), *looping_point);
                let Some(configs) = replay(m, &pattern, 3).map_err(fail)? else {
                    note(&mut violations, format!("{} on {w:?}: membership witness does not replay", m.name));
                    continue;
                };
                let letters: Vec<SymbolId> = pattern
                    .spoke()
                    .iter()
                    .chain(pattern.cycle().iter().cycle().take(3 * pattern.cycle().len()))
                    .map(|&t| m.transitions[t].letter)
                    .collect();
                let mut state = DetState::initial(m, &family).map_err(fail)?;
                for (i, &a) in letters.iter().enumerate() {
                    let step = det_step(m, &family, &state, a).map_err(fail)?;
                    discarded.extend(step.discarded.iter().cloned());
                    if !step.next.configs(&family).iter().any(|(_, c)| *c == configs[i + 1]) {
                        note(&mut violations, format!("{} on {w:?}: accepting run discarded at step {i}", m.name));
                        break;
                    }
                    state = step.next;
                }
                *tally.entry("shadowed runs").or_default() += 1;
            }
            // Collect collisions along u·v³.
            let mut state = DetState::initial(m, &family).map_err(fail)?;
            for &a in w.u.iter().chain(w.v.iter().cycle().take(3 * w.v.len())) {
                let step = det_step(m, &family, &state, a).map_err(fail)?;
                discarded.extend(step.discarded.iter().cloned());
                state = step.next;
            }
        }
        for c in &discarded {
            if let OracleVerdict::NonEmpty(_) = oracle_bfs_empty_from(m, c, 12, 10_000) {
                note(&mut violations, format!("{}: discarded {c:?} accepts", m.name));
            }
        }
        *tally.entry("discarded configurations").or_default() += discarded.len();
    }
    let detail = format!("{} inputs x {} lasso words, {tally:?}", inputs.len(), lasso_words(4).len());
    match first {
        Some(f) => Err(format!("{violations} violations, first: {f}; {detail}")),
        None => Ok(detail),
    }
}

// ---------------------------------------------------------------- criterion 9

fn random_theta(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Theta {
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a55_0009);
    let mut violations = 0usize;
    let mut accepted = 0usize;
    const WORDS: usize = 2000;
    for _ in 0..WORDS {
        let n = rng.gen_range(1..=4);
        let accepting: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        let density = [0.15, 0.3, 0.5][rng.gen_range(0..3)];
        let u: Vec<Theta> = (0..rng.gen_range(0..=3)).map(|_| random_theta(&mut rng, n, density)).collect();
        let v: Vec<Theta> = (0..rng.gen_range(1..=4)).map(|_| random_theta(&mut rng, n, density)).collect();
        let expected = theta_path_oracle(n, &u, &v, &accepting);
        let got = build_path_muller(n, &accepting).accepts_lasso(&u, &v);
        violations += usize::from(got != expected);
        accepted += usize::from(expected);
    }
    verdict(violations, format!("{WORDS} θ-words, {accepted} accepted"))
}

// --------------------------------------------------------------- criterion 10

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_blindcount")).args(args).output().map_err(fail)?;
    if !out.status.success() {
        return Err(format!(
            "blindcount {args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(fail)
}

fn criterion_10() -> Outcome {
    let input = format!("{GOLDEN}/ab1.machine");
    let set = format!("{GOLDEN}/eps_l.set");
    let cases: [(&str, Vec<&str>); 5] = [
        ("a1.txt", vec!["a1"]),
        ("hsim_ab1_B.txt", vec!["hsim", &input, "--emit", "B"]),
        ("hsim_ab1_L.txt", vec!["hsim", &input, "--emit", "L"]),
        ("hsim_ab1_PA.txt", vec!["hsim", &input, "--emit", "PA"]),
        ("alpha_eps_l_2.txt", vec!["alpha", "--set", &set, "--phases", "2"]),
    ];
    let mut mismatches = Vec::new();
    for (file, args) in &cases {
        let golden = std::fs::read_to_string(format!("{GOLDEN}/{file}")).map_err(fail)?;
        if run_cli(args)? != golden {
            mismatches.push(*file);
        }
        if file.ends_with(".txt") && !file.starts_with("alpha") {
            let m = parse_machine(&golden).map_err(fail)?;
            if serialize_machine(&m) != golden {
                mismatches.push(*file);
            }
        }
    }
    // Parse after serialize is the identity on constructed machines.
    let ab1 = parse_machine(&std::fs::read_to_string(&input).map_err(fail)?).map_err(fail)?;
    let mut machines = vec![build_a1(), build_l(&["a", "b"]).map_err(fail)?, build_pa(&ab1).map_err(fail)?];
    machines.push(build_b(&ab1).map_err(fail)?.machine);
    machines.push(shuffle(&unambiguous_inputs()[0], &unambiguous_inputs()[1]).map_err(fail)?);
    machines.extend(one_counter_automata());
    for m in unambiguous_inputs().iter().take(2) {
        machines.push(determinize(m, 16).map_err(fail)?.machine);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a55_0010);
    machines.extend((0..50).map(|i| random_blind(&mut rng, 3, 1 + i % 2, 0.3)));
    let round_trip_failures =
        machines.iter().filter(|m| parse_machine(&serialize_machine(m)).map_or(true, |back| back != **m)).count();
    let detail = format!("{} goldens, {} machine round trips", cases.len(), machines.len());
    if mismatches.is_empty() && round_trip_failures == 0 {
        Ok(detail)
    } else {
        Err(format!("golden mismatches {mismatches:?}, {round_trip_failures} round-trip failures; {detail}"))
    }
}
