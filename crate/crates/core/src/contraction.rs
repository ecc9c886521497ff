//! The evolving tree `T/I`.
//!
//! Super-nodes are classes of original nodes, each labelled by its shallowest
//! original node, so a super-node id is always an original node id and the
//! root keeps its id throughout. After every contraction the image tree and
//! image links are rebuilt from scratch: endpoints are remapped, self-loops
//! dropped, parallel links collapsed onto the one with the shortest
//! provenance chain (lowest original index on ties), and shadow closure is
//! re-established.
//!
//! Coupons are tracked in doubled units: an unmatched leaf or a compound node
//! holds 2, a matching pair holds 3.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, TapError};
use crate::instance::Instance;
use crate::matching::Matching;
use crate::treeops::{close_in_place, up_link, LinkId, LinkSet, Provenance, RootedTree};
use crate::unionfind::DisjointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContractionKind {
    /// Greedy locking-tree contraction.
    Locking,
    /// Greedy link contraction of a path between two unmatched leaves.
    Link,
    /// Minimally semi-closed tree with its exact cover.
    SemiClosed,
    /// Semi-closed tree found when every minimal one is dangerous.
    FindTree,
    /// Temporary contraction on a scratch copy; never traced.
    Scratch,
}

impl ContractionKind {
    pub fn name(self) -> &'static str {
        match self {
            ContractionKind::Locking => "locking",
            ContractionKind::Link => "link",
            ContractionKind::SemiClosed => "semi-closed",
            ContractionKind::FindTree => "find-tree",
            ContractionKind::Scratch => "scratch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionRecord {
    pub kind: ContractionKind,
    pub leaf_count: usize,
    pub cover_size: usize,
    pub coupons_spent_x2: u64,
}

impl fmt::Display for ContractionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k {} {} {}",
            self.leaf_count, self.cover_size, self.coupons_spent_x2
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Holder {
    Node(usize),
    Pair(usize, usize),
}

#[derive(Debug, Clone)]
pub struct ContractionState {
    original: Arc<RootedTree>,
    original_links: Arc<Vec<(usize, usize)>>,
    partition: DisjointSet,
    tree: RootedTree,
    links: LinkSet,
    compound: Vec<bool>,
    matching: Matching,
    coupons: BTreeMap<Holder, u64>,
    accepted: BTreeSet<usize>,
    trace: Vec<ContractionRecord>,
    scratch: bool,
}

/// First tree edge (by child, in preorder) that no link path covers.
pub fn uncovered_edge(t: &RootedTree, links: &[(usize, usize)]) -> Option<(usize, usize)> {
    let mut covered = vec![false; t.capacity()];
    for &(u, v) in links {
        for c in t.path_edges(u, v) {
            covered[c] = true;
        }
    }
    t.nodes()
        .iter()
        .copied()
        .find(|&c| c != t.root() && !covered[c])
        .map(|c| (t.parent(c).expect("non-root"), c))
}

impl ContractionState {
    /// Identity partition over `inst`, rooted at `root`, with `closed` as the
    /// (shadow-closed) image links and no matching installed yet.
    pub fn new(inst: &Instance, root: usize, closed: LinkSet) -> Result<Self> {
        let tree = RootedTree::build(inst, root);
        if let Some(edge) = uncovered_edge(&tree, inst.links()) {
            return Err(TapError::Infeasible { edge });
        }
        let n = inst.node_count();
        let mut compound = vec![false; n];
        compound[root] = true;
        let mut state = Self {
            original: Arc::new(tree.clone()),
            original_links: Arc::new(inst.links().to_vec()),
            partition: DisjointSet::new(n),
            tree,
            links: closed,
            compound,
            matching: Matching::new(),
            coupons: BTreeMap::new(),
            accepted: BTreeSet::new(),
            trace: Vec::new(),
            scratch: false,
        };
        state.coupons = state.expected_coupons();
        Ok(state)
    }

    /// Installs the leaf matching and redistributes coupons.
    pub fn install_matching(&mut self, matching: Matching) -> Result<()> {
        for &(a, b) in matching.pairs() {
            if !self.tree.is_leaf(a) || !self.tree.is_leaf(b) || !self.links.contains(a, b) {
                return Err(TapError::internal(format!(
                    "matching pair {}-{} is not a leaf-to-leaf link",
                    a + 1,
                    b + 1
                )));
            }
        }
        self.matching = matching;
        self.coupons = self.expected_coupons();
        Ok(())
    }

    /// A copy whose contractions skip the ledger and the accepted set; used
    /// for the temporary twin-link contractions of dangerous-tree handling.
    pub fn scratch_copy(&self) -> Self {
        let mut copy = self.clone();
        copy.scratch = true;
        copy.trace.clear();
        copy
    }

    pub fn is_scratch(&self) -> bool {
        self.scratch
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn original_tree(&self) -> &RootedTree {
        &self.original
    }

    pub fn links(&self) -> &LinkSet {
        &self.links
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn node_count(&self) -> usize {
        self.tree.len()
    }

    /// Super-node holding an original node.
    pub fn find(&self, original: usize) -> usize {
        self.partition.find(original)
    }

    pub fn is_compound(&self, node: usize) -> bool {
        self.compound[node]
    }

    /// True for a node that has never been part of a contraction.
    pub fn is_original(&self, node: usize) -> bool {
        !self.compound[node] && self.partition.class_size(node) == 1
    }

    /// Original nodes merged into `node`.
    pub fn members(&self, node: usize) -> Vec<usize> {
        (0..self.compound.len())
            .filter(|&x| self.partition.find(x) == node)
            .collect()
    }

    pub fn is_unmatched_leaf(&self, node: usize) -> bool {
        self.tree.is_leaf(node) && !self.matching.is_matched(node)
    }

    pub fn unmatched_leaves(&self) -> Vec<usize> {
        self.tree
            .leaves()
            .into_iter()
            .filter(|&x| !self.matching.is_matched(x))
            .collect()
    }

    pub fn up_link(&self, node: usize) -> Option<LinkId> {
        up_link(&self.tree, &self.links, node)
    }

    /// Original link index an image link de-shadows to.
    pub fn deshadow(&self, id: LinkId) -> usize {
        self.links.source(id)
    }

    pub fn coupons(&self) -> &BTreeMap<Holder, u64> {
        &self.coupons
    }

    /// Doubled coupons held inside a node set.
    pub fn coupons_in(&self, nodes: &BTreeSet<usize>) -> u64 {
        self.coupons
            .iter()
            .filter(|(holder, _)| match **holder {
                Holder::Node(x) => nodes.contains(&x),
                Holder::Pair(a, b) => nodes.contains(&a) && nodes.contains(&b),
            })
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn accepted(&self) -> &BTreeSet<usize> {
        &self.accepted
    }

    pub fn trace(&self) -> &[ContractionRecord] {
        &self.trace
    }

    /// The coupon distribution the credit invariant prescribes for the
    /// current tree and matching.
    pub fn expected_coupons(&self) -> BTreeMap<Holder, u64> {
        let mut out = BTreeMap::new();
        for &x in self.tree.nodes() {
            if self.compound[x] || self.is_unmatched_leaf(x) {
                out.insert(Holder::Node(x), 2);
            }
        }
        for &(a, b) in self.matching.pairs() {
            out.insert(Holder::Pair(a, b), 3);
        }
        out
    }

    /// Contracts a connected node set of the current tree with a cover whose
    /// covered edges are exactly the edges inside the set. Returns the id of
    /// the new compound node.
    pub fn contract(
        &mut self,
        nodes: &[usize],
        cover: &[LinkId],
        kind: ContractionKind,
    ) -> Result<usize> {
        let set: BTreeSet<usize> = nodes.iter().copied().collect();
        if set.is_empty() || set.iter().any(|&x| !self.tree.contains(x)) {
            return Err(TapError::internal(
                "contraction set is not a set of current nodes",
            ));
        }
        let tops: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&x| self.tree.parent(x).is_none_or(|p| !set.contains(&p)))
            .collect();
        let [top] = tops[..] else {
            return Err(TapError::internal("contraction set is not connected"));
        };
        let inner_edges: BTreeSet<usize> = set.iter().copied().filter(|&x| x != top).collect();
        let mut covered = BTreeSet::new();
        for &id in cover {
            let link = self.links.get(id);
            covered.extend(self.tree.path_edges(link.u, link.v));
        }
        if covered != inner_edges {
            return Err(TapError::internal(format!(
                "cover of {} links is not an exact cover of the {}-node subtree at {}",
                cover.len(),
                set.len(),
                top + 1
            )));
        }
        if !self.scratch {
            for &(a, b) in self.matching.pairs() {
                if set.contains(&a) != set.contains(&b) {
                    return Err(TapError::internal(format!(
                        "contraction splits matching pair {}-{}",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }

        let leaf_count = set.iter().filter(|&&x| self.tree.is_leaf(x)).count();
        let spent = self.coupons_in(&set);
        if !self.scratch {
            for &id in cover {
                self.accepted.insert(self.links.source(id));
            }
        }

        for &x in &set {
            self.partition.union(top, x, top);
        }
        self.compound[top] = true;
        let partition = &self.partition;
        self.matching = self.matching.map(|x| partition.find(x));
        self.rebuild();

        if self.scratch {
            self.coupons = self.expected_coupons();
        } else {
            self.coupons.retain(|holder, _| match *holder {
                Holder::Node(x) => !set.contains(&x),
                Holder::Pair(a, b) => !(set.contains(&a) && set.contains(&b)),
            });
            self.coupons.insert(Holder::Node(top), 2);
            self.trace.push(ContractionRecord {
                kind,
                leaf_count,
                cover_size: cover.len(),
                coupons_spent_x2: spent,
            });
            self.check_invariants()?;
        }
        Ok(top)
    }

    fn rebuild(&mut self) {
        let original = &self.original;
        let n = original.capacity();
        let edges: Vec<(usize, usize)> = original
            .nodes()
            .iter()
            .filter_map(|&c| {
                let p = original.parent(c)?;
                let (a, b) = (self.partition.find(c), self.partition.find(p));
                (a != b).then_some((b, a))
            })
            .collect();
        self.tree = RootedTree::from_edges(n, original.root(), &edges);

        let mut kept: Vec<(usize, usize, usize, usize)> = Vec::new();
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, link) in self.links.iter() {
            let (a, b) = (self.partition.find(link.u), self.partition.find(link.v));
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            let source = self.links.source(id);
            let chain = self.links.chain_len(id);
            match slot.get(&key) {
                None => {
                    slot.insert(key, kept.len());
                    kept.push((key.0, key.1, chain, source));
                }
                Some(&i) => {
                    if (chain, source) < (kept[i].2, kept[i].3) {
                        kept[i] = (key.0, key.1, chain, source);
                    }
                }
            }
        }
        let mut links = LinkSet::new(n);
        for (u, v, chain, source) in kept {
            links.insert(u, v, Provenance::Carried { source, chain });
        }
        close_in_place(&self.tree, &mut links);
        self.links = links;
    }

    /// Recomputes the structural invariants from scratch.
    pub fn check_invariants(&self) -> Result<()> {
        let labels: BTreeSet<usize> = (0..self.compound.len())
            .map(|x| self.partition.find(x))
            .collect();
        let present: BTreeSet<usize> = self.tree.nodes().iter().copied().collect();
        if labels != present {
            return Err(TapError::internal(
                "tree nodes differ from partition classes",
            ));
        }
        for (id, link) in self.links.iter() {
            let (u, v) = self.original_links[self.links.source(id)];
            let (fu, fv) = (self.find(u), self.find(v));
            let on_path = |x: usize| {
                let top = self.tree.lca(fu, fv);
                self.tree.is_ancestor(top, x)
                    && (self.tree.is_ancestor(x, fu) || self.tree.is_ancestor(x, fv))
            };
            if !on_path(link.u) || !on_path(link.v) {
                return Err(TapError::internal(format!(
                    "image link {}-{} escapes the path of its source link",
                    link.u + 1,
                    link.v + 1
                )));
            }
        }
        if !self.scratch {
            for &(a, b) in self.matching.pairs() {
                for x in [a, b] {
                    if !self.tree.is_leaf(x) || self.compound[x] {
                        return Err(TapError::internal(format!(
                            "matched node {} is not an original leaf",
                            x + 1
                        )));
                    }
                }
            }
            if self.coupons != self.expected_coupons() {
                return Err(TapError::internal(
                    "coupon ledger drifted from the credit invariant",
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dtree, lock, p3, star4};
    use crate::treeops::shadow_complete;

    fn state_for(inst: &Instance, root: usize) -> ContractionState {
        let t = RootedTree::build(inst, root);
        let closed = shadow_complete(&t, &LinkSet::from_instance(inst));
        ContractionState::new(inst, root, closed).unwrap()
    }

    fn node_coupons(state: &ContractionState) -> Vec<(usize, u64)> {
        state
            .coupons()
            .iter()
            .filter_map(|(h, &c)| match h {
                Holder::Node(x) => Some((*x, c)),
                Holder::Pair(..) => None,
            })
            .collect()
    }

    #[test]
    fn p3_initial_coupons() {
        let state = state_for(&p3(), 1);
        assert_eq!(state.node_count(), 3);
        assert!(state.is_compound(1));
        assert_eq!(node_coupons(&state), vec![(0, 2), (1, 2), (2, 2)]);
    }

    #[test]
    fn star4_coupons_with_matching() {
        use crate::fixtures::star4::*;
        let mut state = state_for(&star4(), R);
        state
            .install_matching(Matching::from_pairs([(A, B), (C, D)]))
            .unwrap();
        let want: BTreeMap<Holder, u64> = [
            (Holder::Node(R), 2),
            (Holder::Pair(A, B), 3),
            (Holder::Pair(C, D), 3),
        ]
        .into_iter()
        .collect();
        assert_eq!(state.coupons(), &want);
    }

    #[test]
    fn lock_initial_coupons() {
        use crate::fixtures::lock::*;
        let state = state_for(&lock(), R);
        assert_eq!(node_coupons(&state), vec![(R, 2), (A, 2), (B, 2), (B2, 2)]);
    }

    #[test]
    fn lock_locking_tree_contraction() {
        use crate::fixtures::lock::*;
        let inst = lock();
        let mut state = state_for(&inst, R);
        let bb = state.links().find(B, B2).unwrap();
        let au = state.links().find(A, U).unwrap();
        let subtree = state.tree().subtree(U).to_vec();
        let c = state
            .contract(&subtree, &[bb, au], ContractionKind::Locking)
            .unwrap();
        assert_eq!(c, U);
        assert_eq!(state.node_count(), 3);
        assert!(state.tree().is_leaf(U));
        assert_eq!(state.tree().parent(U), Some(V));
        let mut ends: Vec<_> = state.links().iter().map(|(_, l)| l.ends()).collect();
        ends.sort_unstable();
        assert_eq!(ends, vec![(R, V), (R, U), (V, U)]);
        // compound-r de-shadows to b'r
        let cr = state.links().find(U, R).unwrap();
        assert_eq!(state.deshadow(cr), inst.link_index(B2, R).unwrap());
        let rec = &state.trace()[0];
        assert_eq!(
            (rec.leaf_count, rec.cover_size, rec.coupons_spent_x2),
            (3, 2, 6)
        );
        assert_eq!(rec.to_string(), "k 3 2 6");
        assert_eq!(node_coupons(&state), vec![(R, 2), (U, 2)]);
        let expected: BTreeSet<usize> = [
            inst.link_index(B, B2).unwrap(),
            inst.link_index(A, U).unwrap(),
        ]
        .into();
        assert_eq!(state.accepted(), &expected);
    }

    #[test]
    fn p3_whole_tree_contraction() {
        let mut state = state_for(&p3(), 1);
        state
            .install_matching(Matching::from_pairs([(0, 2)]))
            .unwrap();
        let id = state.links().find(0, 2).unwrap();
        state
            .contract(&[0, 1, 2], &[id], ContractionKind::SemiClosed)
            .unwrap();
        assert_eq!(state.node_count(), 1);
        assert!(state.links().is_empty());
        assert_eq!(
            state.accepted().iter().copied().collect::<Vec<_>>(),
            vec![0]
        );
        assert!(state.matching().is_empty());
        assert_eq!(state.trace()[0].coupons_spent_x2, 5);
    }

    #[test]
    fn link_contraction_keeps_one_coupon() {
        // a-x-b below root r: r-x, x-a, x-b
        let inst = Instance::new(4, vec![(0, 1), (1, 2), (1, 3)], vec![(2, 3), (1, 0)]).unwrap();
        let mut state = state_for(&inst, 0);
        let id = state.links().find(2, 3).unwrap();
        let path = state.tree().path_nodes(2, 3);
        let spent_before = state.coupons_in(&path.iter().copied().collect());
        assert_eq!(spent_before, 4);
        let c = state.contract(&path, &[id], ContractionKind::Link).unwrap();
        assert_eq!(state.coupons()[&Holder::Node(c)], 2);
        assert!(state.tree().is_leaf(c));
    }

    #[test]
    fn rejects_inexact_cover() {
        use crate::fixtures::lock::*;
        let mut state = state_for(&lock(), R);
        let bb = state.links().find(B, B2).unwrap();
        let subtree = state.tree().subtree(U).to_vec();
        let err = state
            .contract(&subtree, &[bb], ContractionKind::Locking)
            .unwrap_err();
        assert!(matches!(err, TapError::Internal(_)));
    }

    #[test]
    fn rejects_split_matching_pair() {
        use crate::fixtures::dtree::*;
        let mut state = state_for(&dtree(), R);
        state
            .install_matching(Matching::from_pairs([(B, B2)]))
            .unwrap();
        let ab = state.links().find(A, B2).unwrap();
        let path = state.tree().path_nodes(A, B2);
        assert!(state.contract(&path, &[ab], ContractionKind::Link).is_err());
    }

    #[test]
    fn infeasible_instance_is_rejected() {
        let inst = Instance::new(3, vec![(0, 1), (1, 2)], vec![(0, 1)]).unwrap();
        let t = RootedTree::build(&inst, 1);
        let closed = shadow_complete(&t, &LinkSet::from_instance(&inst));
        assert!(matches!(
            ContractionState::new(&inst, 1, closed),
            Err(TapError::Infeasible { edge: (1, 2) })
        ));
    }

    #[test]
    fn original_links_deshadow_to_themselves() {
        let inst = lock();
        let state = state_for(&inst, lock::R);
        for i in 0..inst.links().len() {
            let (u, v) = inst.links()[i];
            assert_eq!(state.deshadow(state.links().find(u, v).unwrap()), i);
        }
        // synthesized shadow a-s of ab
        let a_s = state.links().find(lock::A, lock::S).unwrap();
        assert_eq!(
            state.deshadow(a_s),
            inst.link_index(lock::A, lock::B).unwrap()
        );
    }
}
