//! Maximum-cardinality matching in general graphs (Edmonds' blossom
//! shrinking, O(V^3)).
//!
//! The leaf graph handed to the solver is usually not bipartite, so an
//! augmenting-path search has to contract odd cycles.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Disjoint unordered pairs with a per-node mate lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
    mate: BTreeMap<usize, usize>,
}

impl Matching {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matching from pairs; panics if two pairs share a node.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = Self::new();
        for (a, b) in pairs {
            assert!(m.insert(a, b), "pairs must be disjoint");
        }
        m
    }

    /// Adds `{a, b}` unless either end is already matched.
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        if a == b || self.mate.contains_key(&a) || self.mate.contains_key(&b) {
            return false;
        }
        let pair = (a.min(b), a.max(b));
        self.pairs.push(pair);
        self.mate.insert(a, b);
        self.mate.insert(b, a);
        true
    }

    pub fn remove(&mut self, a: usize) -> Option<(usize, usize)> {
        let b = self.mate.remove(&a)?;
        self.mate.remove(&b);
        let pair = (a.min(b), a.max(b));
        self.pairs.retain(|&p| p != pair);
        Some(pair)
    }

    pub fn mate(&self, node: usize) -> Option<usize> {
        self.mate.get(&node).copied()
    }

    pub fn is_matched(&self, node: usize) -> bool {
        self.mate.contains_key(&node)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.mate(a) == Some(b)
    }

    /// Pairs `(min, max)` in insertion order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Image of the matching under a node map; pairs collapsing onto one
    /// node are dropped.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Matching {
        let mut out = Matching::new();
        for &(a, b) in &self.pairs {
            let (x, y) = (f(a), f(b));
            if x != y {
                let inserted = out.insert(x, y);
                debug_assert!(inserted, "mapped matching stays disjoint");
            }
        }
        out
    }
}

const NONE: usize = usize::MAX;

struct Blossom<'a> {
    adj: &'a [Vec<usize>],
    mate: Vec<usize>,
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Blossom<'_> {
    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; self.adj.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if self.mate[a] == NONE {
                break;
            }
            a = self.parent[self.mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[self.mate[b]];
        }
    }

    fn mark_path(&mut self, mut v: usize, top: usize, mut child: usize) {
        while self.base[v] != top {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[self.mate[v]]] = true;
            self.parent[v] = child;
            child = self.mate[v];
            v = self.parent[self.mate[v]];
        }
    }

    /// Searches an augmenting path from `root`; returns its free far end.
    fn find_path(&mut self, root: usize) -> Option<usize> {
        let n = self.adj.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.used[root] = true;
        self.queue.clear();
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for idx in 0..self.adj[v].len() {
                let to = self.adj[v][idx];
                if self.base[v] == self.base[to] || self.mate[v] == to {
                    continue;
                }
                if to == root || (self.mate[to] != NONE && self.parent[self.mate[to]] != NONE) {
                    let top = self.lca(v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(v, top, to);
                    self.mark_path(to, top, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = top;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if self.mate[to] == NONE {
                        return Some(to);
                    }
                    let m = self.mate[to];
                    self.used[m] = true;
                    self.queue.push_back(m);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let next = self.mate[pv];
            self.mate[v] = pv;
            self.mate[pv] = v;
            v = next;
        }
    }
}

/// A maximum-cardinality matching of the graph `(nodes, edges)`.
///
/// Edges are scanned in sorted order: a greedy pass seeds the matching and
/// augmenting paths are then searched from free nodes in increasing order,
/// so the result depends only on the edge set.
pub fn max_matching(nodes: &BTreeSet<usize>, edges: &[(usize, usize)]) -> Matching {
    let ids: Vec<usize> = nodes.iter().copied().collect();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut sorted: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .filter(|&(a, b)| a != b)
        .collect();
    sorted.sort_unstable();
    sorted.dedup();

    let n = ids.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &sorted {
        let (x, y) = (index[&a], index[&b]);
        adj[x].push(y);
        adj[y].push(x);
    }
    let mut state = Blossom {
        adj: &adj,
        mate: vec![NONE; n],
        parent: vec![NONE; n],
        base: (0..n).collect(),
        used: vec![false; n],
        in_blossom: vec![false; n],
        queue: VecDeque::new(),
    };
    for &(a, b) in &sorted {
        let (x, y) = (index[&a], index[&b]);
        if state.mate[x] == NONE && state.mate[y] == NONE {
            state.mate[x] = y;
            state.mate[y] = x;
        }
    }
    for v in 0..n {
        if state.mate[v] == NONE {
            if let Some(end) = state.find_path(v) {
                state.augment(end);
            }
        }
    }
    let mut out = Matching::new();
    for x in 0..n {
        let y = state.mate[x];
        if y != NONE && x < y {
            out.insert(ids[x], ids[y]);
        }
    }
    out
}
