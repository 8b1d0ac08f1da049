//! The path-tracking automaton `D`: a deterministic Rabin automaton over
//! letters `θ ⊆ F × F` accepting the θ-words that contain a path visiting
//! accepting clubs infinitely often. Built lazily by Safra's construction
//! from the nondeterministic Büchi path tracker whose states are the clubs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

/// A letter of `D`: a relation on club indices.
pub type Theta = BTreeSet<(usize, usize)>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    name: usize,
    label: BTreeSet<usize>,
    mark: bool,
    /// Oldest first.
    children: Vec<Node>,
}

impl Node {
    fn names(&self, out: &mut BTreeSet<usize>) {
        out.insert(self.name);
        self.children.iter().for_each(|c| c.names(out));
    }

    fn unmark(&mut self) {
        self.mark = false;
        self.children.iter_mut().for_each(Node::unmark);
    }

    fn spawn(&mut self, accepting: &BTreeSet<usize>, free: &mut impl Iterator<Item = usize>) {
        self.children.iter_mut().for_each(|c| c.spawn(accepting, free));
        let hit: BTreeSet<usize> = self.label.intersection(accepting).copied().collect();
        if !hit.is_empty() {
            let name = free.next().expect("a Safra tree has fewer nodes than twice the state count");
            self.children.push(Node { name, label: hit, mark: false, children: Vec::new() });
        }
    }

    fn advance(&mut self, succ: &BTreeMap<usize, BTreeSet<usize>>) {
        self.label = self.label.iter().filter_map(|q| succ.get(q)).flatten().copied().collect();
        self.children.iter_mut().for_each(|c| c.advance(succ));
    }

    fn remove(&mut self, states: &BTreeSet<usize>) {
        self.label.retain(|q| !states.contains(q));
        self.children.iter_mut().for_each(|c| c.remove(states));
    }

    /// States claimed by older siblings are removed from younger subtrees.
    fn merge_horizontal(&mut self) {
        let mut seen = BTreeSet::new();
        for c in self.children.iter_mut() {
            c.remove(&seen);
            seen.extend(c.label.iter().copied());
            c.merge_horizontal();
        }
    }

    fn prune(&mut self) {
        self.children.retain(|c| !c.label.is_empty());
        self.children.iter_mut().for_each(Node::prune);
    }

    fn merge_vertical(&mut self) {
        let below: BTreeSet<usize> = self.children.iter().flat_map(|c| c.label.iter().copied()).collect();
        if !self.children.is_empty() && below == self.label {
            self.children.clear();
            self.mark = true;
        } else {
            self.children.iter_mut().for_each(Node::merge_vertical);
        }
    }

    fn find(&self, name: usize) -> Option<&Node> {
        if self.name == name {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(name))
    }

    fn render(&self, out: &mut String) {
        let _ = write!(out, "{}{:?}", self.name, self.label);
        if self.mark {
            out.push('!');
        }
        if !self.children.is_empty() {
            out.push('(');
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                c.render(out);
            }
            out.push(')');
        }
    }
}

/// `D`, with states discovered on demand and numbered from 0 (the initial
/// tree labelled by every club).
#[derive(Clone, Debug)]
pub struct PathMuller {
    clubs: usize,
    accepting: BTreeSet<usize>,
    trees: Vec<Option<Node>>,
    index: BTreeMap<Option<Node>, usize>,
    memo: BTreeMap<(usize, Theta), usize>,
}

pub fn build_path_muller(clubs: usize, accepting: &BTreeSet<usize>) -> PathMuller {
    let root = (clubs > 0).then(|| Node { name: 1, label: (0..clubs).collect(), mark: false, children: Vec::new() });
    PathMuller {
        clubs,
        accepting: accepting.clone(),
        index: BTreeMap::from([(root.clone(), 0)]),
        trees: Vec::from([root]),
        memo: BTreeMap::new(),
    }
}

impl PathMuller {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn state_count(&self) -> usize {
        self.trees.len()
    }

    /// Number of tree names, hence of Rabin pairs.
    pub fn pair_count(&self) -> usize {
        2 * self.clubs
    }

    pub fn step(&mut self, d: usize, theta: &Theta) -> usize {
        if let Some(&next) = self.memo.get(&(d, theta.clone())) {
            return next;
        }
        let tree = self.trees[d].clone().and_then(|mut root| {
            let mut used = BTreeSet::new();
            root.names(&mut used);
            let mut free = (1..=2 * self.clubs).filter(|n| !used.contains(n));
            let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            for &(a, b) in theta {
                succ.entry(a).or_default().insert(b);
            }
            root.unmark();
            root.spawn(&self.accepting, &mut free);
            root.advance(&succ);
            root.merge_horizontal();
            root.prune();
            root.merge_vertical();
            (!root.label.is_empty()).then_some(root)
        });
        let next = match self.index.get(&tree) {
            Some(&i) => i,
            None => {
                self.trees.push(tree.clone());
                self.index.insert(tree, self.trees.len() - 1);
                self.trees.len() - 1
            }
        };
        self.memo.insert((d, theta.clone()), next);
        next
    }

    /// Pair `i` (name `i + 1`): the trees lacking the name, and the trees
    /// where it is marked, among the states discovered so far.
    pub fn pair(&self, i: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let name = i + 1;
        let mut avoid = BTreeSet::new();
        let mut visit = BTreeSet::new();
        for (d, t) in self.trees.iter().enumerate() {
            match t.as_ref().and_then(|r| r.find(name)) {
                None => {
                    avoid.insert(d);
                }
                Some(n) if n.mark => {
                    visit.insert(d);
                }
                Some(_) => {}
            }
        }
        (avoid, visit)
    }

    /// Rabin acceptance of the set of states visited infinitely often.
    pub fn accepts_set(&self, inf: &BTreeSet<usize>) -> bool {
        (1..=2 * self.clubs).any(|name| {
            let found: Vec<Option<&Node>> =
                inf.iter().map(|&d| self.trees[d].as_ref().and_then(|r| r.find(name))).collect();
            found.iter().all(Option::is_some) && found.iter().any(|n| n.is_some_and(|n| n.mark))
        })
    }

    /// The verdict of `D` on `u · v^ω`.
    pub fn accepts_lasso(&mut self, u: &[Theta], v: &[Theta]) -> bool {
        if v.is_empty() {
            return false;
        }
        let mut d = u.iter().fold(self.initial(), |d, t| self.step(d, t));
        let mut starts: Vec<usize> = Vec::new();
        let mut visited: Vec<Vec<usize>> = Vec::new();
        loop {
            if let Some(p) = starts.iter().position(|&s| s == d) {
                let inf: BTreeSet<usize> = visited[p..].iter().flatten().copied().collect();
                return self.accepts_set(&inf);
            }
            starts.push(d);
            let mut round = Vec::with_capacity(v.len());
            for t in v {
                d = self.step(d, t);
                round.push(d);
            }
            visited.push(round);
        }
    }

    pub fn describe(&self, d: usize) -> String {
        let mut out = String::new();
        match &self.trees[d] {
            None => out.push('∅'),
            Some(root) => root.render(&mut out),
        }
        out
    }
}
