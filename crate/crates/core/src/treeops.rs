//! Rooted-tree primitives: ancestry, LCA, paths, shadow completion and
//! up-links.
//!
//! A [`RootedTree`] is indexed by node id up to a fixed capacity so the
//! contracted trees of the solver can keep using original node ids for their
//! super-nodes; ids not present in the tree are simply absent.
//!
//! Tree edges are identified by their child endpoint.

use std::collections::HashMap;

use crate::instance::Instance;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    root: usize,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    order: Vec<usize>,
}

impl RootedTree {
    /// Builds the tree spanned by `edges` (which must form a tree containing
    /// `root`) over node ids `< capacity`.
    pub fn from_edges(capacity: usize, root: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); capacity];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut tree = Self {
            root,
            parent: vec![ABSENT; capacity],
            children: vec![Vec::new(); capacity],
            depth: vec![0; capacity],
            tin: vec![ABSENT; capacity],
            tout: vec![ABSENT; capacity],
            order: Vec::with_capacity(edges.len() + 1),
        };
        tree.parent[root] = root;
        let mut bfs = vec![root];
        let mut head = 0;
        while head < bfs.len() {
            let x = bfs[head];
            head += 1;
            let mut kids: Vec<usize> = adj[x]
                .iter()
                .copied()
                .filter(|&y| tree.parent[y] == ABSENT)
                .collect();
            kids.sort_unstable();
            for &y in &kids {
                tree.parent[y] = x;
                tree.depth[y] = tree.depth[x] + 1;
                bfs.push(y);
            }
            tree.children[x] = kids;
        }
        assert_eq!(bfs.len(), edges.len() + 1, "edges must form a tree");
        // iterative preorder: children in increasing id order
        let mut stack = vec![(root, false)];
        while let Some((x, done)) = stack.pop() {
            if done {
                tree.tout[x] = tree.order.len();
                continue;
            }
            tree.tin[x] = tree.order.len();
            tree.order.push(x);
            stack.push((x, true));
            for &c in tree.children[x].iter().rev() {
                stack.push((c, false));
            }
        }
        tree
    }

    pub fn build(inst: &Instance, root: usize) -> Self {
        Self::from_edges(inst.node_count(), root, inst.tree_edges())
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn capacity(&self) -> usize {
        self.parent.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.parent.len() && self.parent[v] != ABSENT
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Nodes in preorder.
    pub fn nodes(&self) -> &[usize] {
        &self.order
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != self.root).then(|| self.parent[v])
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn preorder_in(&self, v: usize) -> usize {
        self.tin[v]
    }

    pub fn preorder_out(&self, v: usize) -> usize {
        self.tout[v]
    }

    /// Leaves exclude the root, even when it has degree one.
    pub fn is_leaf(&self, v: usize) -> bool {
        v != self.root && self.children[v].is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.order
            .iter()
            .copied()
            .filter(|&v| self.is_leaf(v))
            .collect()
    }

    /// True when `u` is an ancestor of `v` (every node is its own ancestor).
    pub fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.tin[u] <= self.tin[v] && self.tin[v] < self.tout[u]
    }

    /// Nodes of the rooted subtree at `v`, in preorder.
    pub fn subtree(&self, v: usize) -> &[usize] {
        &self.order[self.tin[v]..self.tout[v]]
    }

    pub fn subtree_size(&self, v: usize) -> usize {
        self.tout[v] - self.tin[v]
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u];
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v];
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
        }
        u
    }

    /// Nodes of the path from `u` to `v`, in order.
    pub fn path_nodes(&self, u: usize, v: usize) -> Vec<usize> {
        let top = self.lca(u, v);
        let mut left = Vec::new();
        let mut x = u;
        while x != top {
            left.push(x);
            x = self.parent[x];
        }
        left.push(top);
        let mut right = Vec::new();
        let mut y = v;
        while y != top {
            right.push(y);
            y = self.parent[y];
        }
        left.extend(right.into_iter().rev());
        left
    }

    /// Edges (by child endpoint) on the path between `u` and `v`.
    pub fn path_edges(&self, u: usize, v: usize) -> Vec<usize> {
        let top = self.lca(u, v);
        let mut edges = Vec::new();
        for mut x in [u, v] {
            while x != top {
                edges.push(x);
                x = self.parent[x];
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Edges (by child endpoint) covered by a link, as `(child, parent)` pairs.
    pub fn covered_edges(&self, u: usize, v: usize) -> Vec<(usize, usize)> {
        self.path_edges(u, v)
            .into_iter()
            .map(|c| (c, self.parent[c]))
            .collect()
    }
}

pub type LinkId = usize;

/// Where an image link comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// An input link, by index into [`Instance::links`].
    Original(usize),
    /// Carried over from a previous link set, after endpoint remapping.
    /// `source` is the original link it de-shadows to; `chain` the number of
    /// shadow steps between them.
    Carried { source: usize, chain: usize },
    /// Added by shadow completion; the path lies within that of the parent.
    ShadowOf(LinkId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub u: usize,
    pub v: usize,
    pub provenance: Provenance,
}

impl Link {
    pub fn ends(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Links with at most one member per unordered endpoint pair.
#[derive(Debug, Clone, Default)]
pub struct LinkSet {
    links: Vec<Link>,
    index: HashMap<(usize, usize), LinkId>,
    incidence: Vec<Vec<LinkId>>,
}

impl LinkSet {
    pub fn new(capacity: usize) -> Self {
        Self {
            links: Vec::new(),
            index: HashMap::new(),
            incidence: vec![Vec::new(); capacity],
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let mut set = Self::new(inst.node_count());
        for (i, &(u, v)) in inst.links().iter().enumerate() {
            set.insert(u, v, Provenance::Original(i));
        }
        set
    }

    /// Adds a link unless its endpoint pair is already present.
    pub fn insert(&mut self, u: usize, v: usize, provenance: Provenance) -> Option<LinkId> {
        debug_assert_ne!(u, v, "self-loop link");
        let key = (u.min(v), u.max(v));
        if self.index.contains_key(&key) {
            return None;
        }
        let id = self.links.len();
        self.links.push(Link { u, v, provenance });
        self.index.insert(key, id);
        self.incidence[u].push(id);
        self.incidence[v].push(id);
        Some(id)
    }

    pub fn find(&self, u: usize, v: usize) -> Option<LinkId> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.find(u, v).is_some()
    }

    pub fn get(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkId, &Link)> {
        self.links.iter().enumerate()
    }

    pub fn incident(&self, node: usize) -> &[LinkId] {
        &self.incidence[node]
    }

    /// Follows the provenance chain to an original link index.
    pub fn source(&self, mut id: LinkId) -> usize {
        loop {
            match self.links[id].provenance {
                Provenance::Original(i) => return i,
                Provenance::Carried { source, .. } => return source,
                Provenance::ShadowOf(parent) => id = parent,
            }
        }
    }

    /// Number of shadow steps between a link and its original.
    pub fn chain_len(&self, mut id: LinkId) -> usize {
        let mut steps = 0;
        loop {
            match self.links[id].provenance {
                Provenance::Original(_) => return steps,
                Provenance::Carried { chain, .. } => return steps + chain,
                Provenance::ShadowOf(parent) => {
                    steps += 1;
                    id = parent;
                }
            }
        }
    }
}

/// Closes `raw` under shadows in `t`: every pair of distinct nodes on a link
/// path becomes a link. New links point at the earliest link containing them.
pub fn shadow_complete(t: &RootedTree, raw: &LinkSet) -> LinkSet {
    let mut closed = raw.clone();
    close_in_place(t, &mut closed);
    closed
}

pub(crate) fn close_in_place(t: &RootedTree, links: &mut LinkSet) {
    // Shadows appended here have paths inside their parent's, so only the
    // links present on entry need scanning.
    let initial = links.len();
    for id in 0..initial {
        let Link { u, v, .. } = *links.get(id);
        let path = t.path_nodes(u, v);
        for i in 0..path.len() {
            for j in i + 1..path.len() {
                links.insert(path[i], path[j], Provenance::ShadowOf(id));
            }
        }
    }
}

/// The incident link of `a` whose other endpoint is closest to the root
/// (lowest link id on ties), if `a` has any link.
pub fn up_link(t: &RootedTree, links: &LinkSet, a: usize) -> Option<LinkId> {
    links
        .incident(a)
        .iter()
        .copied()
        .min_by_key(|&id| (t.depth(links.get(id).other(a)), id))
}

/// The up-node of `a`: far endpoint of [`up_link`].
pub fn up_node(t: &RootedTree, links: &LinkSet, a: usize) -> Option<usize> {
    up_link(t, links, a).map(|id| links.get(id).other(a))
}
