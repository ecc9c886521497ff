//! Twin links, stems, locked leaves and the excluded link set `W`.
//!
//! A leaf-to-leaf link `ab` is a twin link when contracting it produces a new
//! leaf: the subtree of `s = lca(a, b)` is exactly the two paths `s..a` and
//! `s..b`, and `s` is not the root. A leaf `a` with twin `b` is locked by a
//! link `bb'` when some proper rooted subtree has leaf set `{a, b, b'}` and
//! contains the up-node of `a`; the deepest such subtree is the locking tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::treeops::{up_node, LinkId, LinkSet, RootedTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockInfo {
    pub twin: usize,
    /// The third leaf `b'` of the locking tree.
    pub third: usize,
    pub locking_links: BTreeSet<LinkId>,
    pub locking_tree_root: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub twin_links: BTreeSet<LinkId>,
    /// Stem node to its twin pair.
    pub stems: BTreeMap<usize, (usize, usize)>,
    pub locked: BTreeMap<usize, LockInfo>,
    pub w: BTreeSet<LinkId>,
}

/// The stem of `a` and `b` if they are twins in `t`.
pub fn twin_stem(t: &RootedTree, a: usize, b: usize) -> Option<usize> {
    if a == b || !t.is_leaf(a) || !t.is_leaf(b) {
        return None;
    }
    let s = t.lca(a, b);
    if s == t.root() {
        return None;
    }
    let path_nodes = t.depth(a) + t.depth(b) - 2 * t.depth(s) + 1;
    (t.subtree_size(s) == path_nodes).then_some(s)
}

pub fn find_twins(
    t: &RootedTree,
    links: &LinkSet,
) -> (BTreeSet<LinkId>, BTreeMap<usize, (usize, usize)>) {
    let mut twins = BTreeSet::new();
    let mut stems = BTreeMap::new();
    for (id, link) in links.iter() {
        if let Some(s) = twin_stem(t, link.u, link.v) {
            twins.insert(id);
            stems.insert(s, link.ends());
        }
    }
    (twins, stems)
}

pub(crate) fn leaf_counts(t: &RootedTree) -> Vec<usize> {
    let mut count = vec![0; t.capacity()];
    for &v in t.nodes().iter().rev() {
        if t.is_leaf(v) {
            count[v] = 1;
        }
        if let Some(p) = t.parent(v) {
            count[p] += count[v];
        }
    }
    count
}

pub fn find_locking(
    t: &RootedTree,
    links: &LinkSet,
    twins: &BTreeSet<LinkId>,
) -> BTreeMap<usize, LockInfo> {
    let counts = leaf_counts(t);
    let mut locked = BTreeMap::new();
    for &tid in twins {
        let (p, q) = links.get(tid).ends();
        let s = t.lca(p, q);
        for (a, b) in [(p, q), (q, p)] {
            let Some(up) = up_node(t, links, a) else {
                continue;
            };
            let mut v = s;
            while let Some(w) = t.parent(v) {
                v = w;
                if v == t.root() || counts[v] > 3 {
                    break;
                }
                if counts[v] < 3 || !t.is_ancestor(v, up) {
                    continue;
                }
                let third = t
                    .subtree(v)
                    .iter()
                    .copied()
                    .find(|&x| t.is_leaf(x) && x != a && x != b)
                    .expect("three leaves below");
                if let Some(lid) = links.find(b, third) {
                    locked.insert(
                        a,
                        LockInfo {
                            twin: b,
                            third,
                            locking_links: BTreeSet::from([lid]),
                            locking_tree_root: v,
                        },
                    );
                }
                break;
            }
        }
    }
    locked
}

pub fn forbidden_set(report: &StructureReport) -> BTreeSet<LinkId> {
    let mut w = report.twin_links.clone();
    for info in report.locked.values() {
        w.extend(info.locking_links.iter().copied());
    }
    w
}

/// Full structure report on a shadow-closed link set.
pub fn analyze(t: &RootedTree, links: &LinkSet) -> StructureReport {
    let (twin_links, stems) = find_twins(t, links);
    let locked = find_locking(t, links, &twin_links);
    let mut report = StructureReport {
        twin_links,
        stems,
        locked,
        w: BTreeSet::new(),
    };
    report.w = forbidden_set(&report);
    report
}
