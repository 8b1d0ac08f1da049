//! Brute-force reference implementations for differential testing. These
//! avoid the main algorithms on purpose: their own step function, explicit
//! finite graphs and plain exhaustive search.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Acceptance, Configuration, CounterMachine, Guard};
use crate::sigma11::{Dir, FiniteTreeSet, TreeNode};

/// The finite configuration graph with counters capped at `cap`.
#[derive(Clone, Debug)]
pub struct CappedSystem {
    pub cap: u64,
    pub nodes: Vec<Configuration>,
    /// `(transition index, target node)` per node.
    pub edges: Vec<Vec<(usize, usize)>>,
    pub accepting: Vec<bool>,
    /// Exploration stopped at the depth cap before the graph closed.
    pub truncated: bool,
}

/// Step a single transition: guards on pre-values, copies from pre-values,
/// then deltas.
fn step(machine: &CounterMachine, ti: usize, counters: &[u64]) -> Option<Vec<u64>> {
    let t = &machine.transitions[ti];
    for (g, &v) in t.guard.iter().zip(counters) {
        let ok = match g {
            Guard::Zero => v == 0,
            Guard::Positive => v > 0,
            Guard::Any => true,
        };
        if !ok {
            return None;
        }
    }
    let mut next = counters.to_vec();
    for &(dst, src) in &t.copies {
        next[dst] = counters[src];
    }
    for (v, &d) in next.iter_mut().zip(&t.delta) {
        let x = *v as i128 + i128::from(d);
        if x < 0 {
            return None;
        }
        *v = x as u64;
    }
    Some(next)
}

pub fn capped_graph(machine: &CounterMachine, cap: u64) -> CappedSystem {
    capped_graph_from(machine, &machine.initial_config(), cap, usize::MAX)
}

/// Breadth-first exploration from `seed`, at most `depth_cap` steps deep.
pub fn capped_graph_from(machine: &CounterMachine, seed: &Configuration, cap: u64, depth_cap: usize) -> CappedSystem {
    let accepting_states = match &machine.acceptance {
        Acceptance::Buchi(f) => f.clone(),
        Acceptance::Muller(_) => BTreeSet::new(),
    };
    let mut index: BTreeMap<Configuration, usize> = BTreeMap::new();
    let mut nodes = vec![seed.clone()];
    let mut depth = vec![0usize];
    let mut edges: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    index.insert(seed.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        if depth[i] >= depth_cap {
            truncated = true;
            continue;
        }
        let config = nodes[i].clone();
        for (ti, t) in machine.transitions.iter().enumerate() {
            if t.source != config.state {
                continue;
            }
            let Some(next) = step(machine, ti, &config.counters) else { continue };
            if next.iter().any(|&v| v > cap) {
                continue;
            }
            let target = Configuration::new(t.target, next);
            let j = match index.get(&target) {
                Some(&j) => j,
                None => {
                    let j = nodes.len();
                    index.insert(target.clone(), j);
                    nodes.push(target);
                    depth.push(depth[i] + 1);
                    edges.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            edges[i].push((ti, j));
        }
    }
    let accepting = nodes.iter().map(|c| accepting_states.contains(&c.state)).collect();
    CappedSystem { cap, nodes, edges, accepting, truncated }
}

/// An accepting lasso in the capped graph, as transition indices from the
/// graph's first node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CappedWitness {
    pub transitions: Vec<usize>,
    pub looping_point: usize,
}

/// Strongly connected components (iterative Tarjan); returns a component
/// id per vertex.
pub fn scc<F: Fn(usize) -> Vec<usize>>(n: usize, succ: F) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>, usize)> = vec![(root, succ(root), 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, succs, pos)) = call.last_mut() {
            let v = *v;
            if *pos < succs.len() {
                let w = succs[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ(w), 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some((parent, _, _)) = call.last() {
                    low[*parent] = low[*parent].min(low[v]);
                }
                if low[v] == index[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

fn bfs_path(
    system: &CappedSystem,
    from: usize,
    to: usize,
    allowed: impl Fn(usize) -> bool,
    nonempty: bool,
) -> Option<Vec<usize>> {
    let n = system.nodes.len();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    if !nonempty {
        if from == to {
            return Some(Vec::new());
        }
        seen[from] = true;
    }
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        for &(t, w) in &system.edges[v] {
            if !allowed(w) || seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = Some((v, t));
            if w == to {
                let mut path = Vec::new();
                let mut x = to;
                loop {
                    let (p, t) = parent[x].expect("bfs parent");
                    path.push(t);
                    x = p;
                    if x == from {
                        break;
                    }
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(w);
        }
    }
    None
}

/// Accepting node on a cycle of the capped graph, with a shortest path to
/// it and a shortest cycle back.
pub fn capped_buchi_nonempty(system: &CappedSystem) -> Option<CappedWitness> {
    let n = system.nodes.len();
    let comp = scc(n, |v| system.edges[v].iter().map(|&(_, w)| w).collect());
    let mut cyclic = vec![false; n];
    for (u, es) in system.edges.iter().enumerate() {
        for &(_, w) in es {
            if comp[u] == comp[w] {
                cyclic[comp[u]] = true;
            }
        }
    }
    let target = (0..n).find(|&v| system.accepting[v] && cyclic[comp[v]])?;
    let spoke = bfs_path(system, 0, target, |_| true, false)?;
    let cycle = bfs_path(system, target, target, |w| comp[w] == comp[target], true)?;
    let looping_point = spoke.len();
    let mut transitions = spoke;
    transitions.extend(cycle);
    Some(CappedWitness { transitions, looping_point })
}

/// Whether the ultimately periodic word `thetas_u · thetas_v^ω` over
/// relations on `clubs` points contains a path visiting `accepting`
/// infinitely often.
pub fn theta_path_oracle(
    clubs: usize,
    thetas_u: &[BTreeSet<(usize, usize)>],
    thetas_v: &[BTreeSet<(usize, usize)>],
    accepting: &BTreeSet<usize>,
) -> bool {
    if thetas_v.is_empty() {
        return false;
    }
    let mut start: BTreeSet<usize> = (0..clubs).collect();
    for theta in thetas_u {
        start = theta.iter().filter(|(a, _)| start.contains(a)).map(|&(_, b)| b).collect();
    }
    // Period relation: (a, b, visited) where `visited` records an accepting
    // club among the positions before the period's end.
    let mut period: BTreeSet<(usize, usize, bool)> = BTreeSet::new();
    for a in 0..clubs {
        let mut cur: BTreeSet<(usize, bool)> = BTreeSet::from([(a, accepting.contains(&a))]);
        for (j, theta) in thetas_v.iter().enumerate() {
            let last = j + 1 == thetas_v.len();
            cur = cur
                .iter()
                .flat_map(|&(c, f)| {
                    theta
                        .iter()
                        .filter(move |(x, _)| *x == c)
                        .map(move |&(_, d)| (d, f || (!last && accepting.contains(&d))))
                })
                .collect();
        }
        period.extend(cur.into_iter().map(|(b, f)| (a, b, f)));
    }
    let reach = |from: &BTreeSet<usize>| -> BTreeSet<usize> {
        let mut seen = from.clone();
        let mut stack: Vec<usize> = from.iter().copied().collect();
        while let Some(a) = stack.pop() {
            for &(x, b, _) in &period {
                if x == a && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    };
    let reachable = reach(&start);
    period
        .iter()
        .filter(|(_, _, f)| *f)
        .any(|&(a, b, _)| reachable.contains(&a) && reach(&BTreeSet::from([b])).contains(&a))
}

fn padded(v: &TreeNode, i: usize) -> u8 {
    match v.0.get(i) {
        Some(Dir::L) => 0,
        None => 1,
        Some(Dir::R) => 2,
    }
}

fn inf_less(a: &TreeNode, b: &TreeNode) -> bool {
    let n = a.0.len().max(b.0.len());
    (0..n).map(|i| padded(a, i).cmp(&padded(b, i))).find(|o| o.is_ne()) == Some(core::cmp::Ordering::Less)
}

/// Longest sequence of members of `set` with strictly increasing lengths
/// that strictly descends in the infix order.
pub fn descending_chain_oracle(set: &FiniteTreeSet) -> Vec<TreeNode> {
    let xs: Vec<&TreeNode> = set.members.iter().collect();
    let n = xs.len();
    let mut best: Vec<Option<Vec<TreeNode>>> = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| xs[i].0.len());
    let mut answer = Vec::new();
    for &i in &order {
        let mut chain: Vec<TreeNode> = Vec::new();
        for &j in &order {
            if xs[j].0.len() < xs[i].0.len() && inf_less(xs[i], xs[j]) {
                if let Some(c) = &best[j] {
                    if c.len() > chain.len() {
                        chain = c.clone();
                    }
                }
            }
        }
        chain.push(xs[i].clone());
        if chain.len() > answer.len() {
            answer = chain.clone();
        }
        best[i] = Some(chain);
    }
    answer
}
