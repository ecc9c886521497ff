//! Exhaustive ground truth: cover verification, the exact optimum, the
//! canonical optimal cover `F`, the doubled lower bound built from it, and
//! the per-contraction credit audit.
//!
//! Everything here enumerates subsets and is meant for small instances.
//! Credit arithmetic is done in doubled integers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::contraction::ContractionState;
use crate::error::{Result, TapError};
use crate::instance::Instance;
use crate::solver::Preprocessed;
use crate::treeops::{LinkId, LinkSet, RootedTree};

pub const DEFAULT_EXACT_LIMIT: usize = 26;
pub const DEFAULT_CANONICAL_LIMIT: usize = 64;

/// True iff every tree edge lies on the path of some listed link.
pub fn verify_cover(inst: &Instance, links: &[(usize, usize)]) -> bool {
    let n = inst.node_count();
    if links.iter().any(|&(u, v)| u >= n || v >= n || u == v) {
        return false;
    }
    if n <= 1 {
        return true;
    }
    let t = RootedTree::build(inst, 0);
    let mut covered = vec![false; n];
    for &(u, v) in links {
        for c in t.path_edges(u, v) {
            covered[c] = true;
        }
    }
    t.nodes().iter().all(|&c| c == t.root() || covered[c])
}

/// Edge-incidence bitsets of a link family over the edges of one tree.
/// Edge `c` is the edge from node `c` to its parent.
struct CoverSystem {
    words: usize,
    masks: Vec<u64>,
    suffix: Vec<u64>,
    full: Vec<u64>,
    leaf_edges: Vec<u64>,
    count: usize,
}

impl CoverSystem {
    fn new(t: &RootedTree, paths: &[(usize, usize)]) -> Self {
        let words = t.capacity().div_ceil(64).max(1);
        let count = paths.len();
        let mut masks = vec![0u64; count * words];
        for (i, &(u, v)) in paths.iter().enumerate() {
            for c in t.path_edges(u, v) {
                masks[i * words + c / 64] |= 1 << (c % 64);
            }
        }
        let mut suffix = vec![0u64; (count + 1) * words];
        for i in (0..count).rev() {
            for w in 0..words {
                suffix[i * words + w] = suffix[(i + 1) * words + w] | masks[i * words + w];
            }
        }
        let mut full = vec![0u64; words];
        let mut leaf_edges = vec![0u64; words];
        for &c in t.nodes() {
            if c == t.root() {
                continue;
            }
            full[c / 64] |= 1 << (c % 64);
            // an edge next to a degree-one node is covered only by links ending there
            if t.children(c).is_empty() {
                leaf_edges[c / 64] |= 1 << (c % 64);
            }
        }
        let root = t.root();
        if let [only] = t.children(root) {
            leaf_edges[only / 64] |= 1 << (only % 64);
        }
        Self {
            words,
            masks,
            suffix,
            full,
            leaf_edges,
            count,
        }
    }

    fn mask(&self, i: usize) -> &[u64] {
        &self.masks[i * self.words..(i + 1) * self.words]
    }

    fn coverable(&self) -> bool {
        (0..self.words).all(|w| self.suffix[w] & self.full[w] == self.full[w])
    }

    /// A lower bound on the cover size: each link covers at most two edges at
    /// degree-one nodes.
    fn leaf_bound(&self) -> usize {
        let ones: u32 = self.leaf_edges.iter().map(|w| w.count_ones()).sum();
        (ones as usize).div_ceil(2)
    }

    /// Visits every `k`-subset (in lexicographic order) whose union covers
    /// all edges. The visitor returns `false` to stop; the return value says
    /// whether enumeration ran to completion.
    fn for_each_cover(&self, k: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let mut acc = vec![0u64; (k + 1) * self.words];
        let mut chosen = Vec::with_capacity(k);
        self.descend(0, k, &mut acc, &mut chosen, visit)
    }

    fn descend(
        &self,
        start: usize,
        k: usize,
        acc: &mut [u64],
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let d = chosen.len();
        let w = self.words;
        if d == k {
            let done = (0..w).all(|i| acc[d * w + i] == self.full[i]);
            return !done || visit(chosen);
        }
        let left = k - d;
        let uncovered_leaf_edges: u32 = (0..w)
            .map(|i| (self.leaf_edges[i] & !acc[d * w + i]).count_ones())
            .sum();
        if uncovered_leaf_edges as usize > 2 * left {
            return true;
        }
        if self.count < left {
            return true;
        }
        for i in start..=self.count - left {
            let reachable = (0..w)
                .all(|j| (acc[d * w + j] | self.suffix[i * w + j]) & self.full[j] == self.full[j]);
            if !reachable {
                break;
            }
            let m = self.mask(i);
            for j in 0..w {
                acc[(d + 1) * w + j] = acc[d * w + j] | m[j];
            }
            chosen.push(i);
            let go_on = self.descend(i + 1, k, acc, chosen, visit);
            chosen.pop();
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Smallest `k` with a cover, and the lexicographically least cover of
    /// that size.
    fn minimum(&self) -> Option<(usize, Vec<usize>)> {
        if !self.coverable() {
            return None;
        }
        let mut k = self.leaf_bound();
        loop {
            let mut found = None;
            self.for_each_cover(k, &mut |c| {
                found = Some(c.to_vec());
                false
            });
            if let Some(c) = found {
                return Some((k, c));
            }
            k += 1;
        }
    }
}

/// Minimum cover size and the lexicographically least optimal cover, as
/// indices into `inst.links()`.
pub fn exact_opt(inst: &Instance, limit: usize) -> Result<(usize, Vec<usize>)> {
    if inst.links().len() > limit {
        return Err(TapError::LimitExceeded {
            count: inst.links().len(),
            limit,
        });
    }
    if inst.node_count() <= 1 {
        return Ok((0, Vec::new()));
    }
    let t = RootedTree::build(inst, 0);
    let system = CoverSystem::new(&t, inst.links());
    system.minimum().ok_or_else(|| {
        let edge = crate::contraction::uncovered_edge(&t, inst.links()).expect("uncoverable");
        TapError::Infeasible { edge }
    })
}

/// Whether `g` overlaps `f`: their paths share an edge and an endpoint of
/// `f` lies on the path of `g`.
pub fn overlaps(t: &RootedTree, f: (usize, usize), g: (usize, usize)) -> bool {
    let fe: BTreeSet<usize> = t.path_edges(f.0, f.1).into_iter().collect();
    let shares = t.path_edges(g.0, g.1).iter().any(|c| fe.contains(c));
    shares && (on_path(t, f.0, g) || on_path(t, f.1, g))
}

pub fn on_path(t: &RootedTree, x: usize, (u, v): (usize, usize)) -> bool {
    let top = t.lca(u, v);
    t.is_ancestor(top, x) && (t.is_ancestor(x, u) || t.is_ancestor(x, v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalF {
    /// Ids in the shadow-closed link set, sorted.
    pub links: Vec<LinkId>,
    pub twin_count: usize,
    /// Leaf-to-leaf members of `F` outside `W`.
    pub m_f: Vec<LinkId>,
    /// Matching pairs whose ends are both untouched by `m_f`.
    pub n: Vec<(usize, usize)>,
    /// Members of `F` not incident to a locked leaf.
    pub j: Vec<LinkId>,
}

impl CanonicalF {
    pub fn pairs(&self, links: &LinkSet) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self.links.iter().map(|&id| links.get(id).ends()).collect();
        out.sort_unstable();
        out
    }

    /// `d_J(x)` for every node.
    pub fn j_degrees(&self, links: &LinkSet, capacity: usize) -> Vec<u64> {
        let mut d = vec![0; capacity];
        for &id in &self.j {
            let (u, v) = links.get(id).ends();
            d[u] += 1;
            d[v] += 1;
        }
        d
    }
}

/// Ordered pairs `(f, g)` of members where `g` overlaps `f`.
pub fn overlapping_pairs(t: &RootedTree, links: &LinkSet, f: &[LinkId]) -> Vec<(LinkId, LinkId)> {
    let mut out = Vec::new();
    for &x in f {
        for &y in f {
            if x != y && overlaps(t, links.get(x).ends(), links.get(y).ends()) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Leaves whose degree in `f` is not exactly one.
pub fn leaf_degree_violations(t: &RootedTree, links: &LinkSet, f: &[LinkId]) -> Vec<usize> {
    let mut deg = BTreeMap::new();
    for &id in f {
        let (u, v) = links.get(id).ends();
        *deg.entry(u).or_insert(0usize) += 1;
        *deg.entry(v).or_insert(0usize) += 1;
    }
    t.leaves()
        .into_iter()
        .filter(|x| deg.get(x).copied().unwrap_or(0) != 1)
        .collect()
}

/// The optimal shadows-minimal cover over the closed link set with the most
/// twin links, first in lexicographic order of link ids among ties.
pub fn canonical_f(pre: &Preprocessed, limit: usize) -> Result<CanonicalF> {
    let t = &pre.tree;
    let links = &pre.links;
    if links.len() > limit {
        return Err(TapError::LimitExceeded {
            count: links.len(),
            limit,
        });
    }
    let ends: Vec<(usize, usize)> = links.iter().map(|(_, l)| l.ends()).collect();
    let system = CoverSystem::new(t, &ends);
    let Some((opt, _)) = system.minimum() else {
        let edge = crate::contraction::uncovered_edge(t, &ends).expect("uncoverable");
        return Err(TapError::Infeasible { edge });
    };

    let shadows: Vec<Vec<usize>> = ends
        .iter()
        .map(|&f| {
            (0..ends.len())
                .filter(|&g| ends[g] != f && on_path(t, ends[g].0, f) && on_path(t, ends[g].1, f))
                .collect()
        })
        .collect();
    let w = system.words;
    let shadows_minimal = |cover: &[usize]| {
        cover.iter().enumerate().all(|(pos, &f)| {
            let mut rest = vec![0u64; w];
            for (q, &g) in cover.iter().enumerate() {
                if q != pos {
                    for (r, m) in rest.iter_mut().zip(system.mask(g)) {
                        *r |= m;
                    }
                }
            }
            shadows[f].iter().all(|&g| {
                let m = system.mask(g);
                !(0..w).all(|i| (rest[i] | m[i]) & system.full[i] == system.full[i])
            })
        })
    };

    let mut best: Option<(usize, Vec<usize>)> = None;
    system.for_each_cover(opt, &mut |cover| {
        if shadows_minimal(cover) {
            let twins = cover
                .iter()
                .filter(|id| pre.report.twin_links.contains(id))
                .count();
            if best.as_ref().is_none_or(|(b, _)| twins > *b) {
                best = Some((twins, cover.to_vec()));
            }
        }
        true
    });
    let Some((twin_count, f)) = best else {
        return Err(TapError::internal("no shadows-minimal optimal cover"));
    };

    let overlapping = overlapping_pairs(t, links, &f);
    if let Some(&(x, y)) = overlapping.first() {
        let (a, b) = (links.get(x).ends(), links.get(y).ends());
        return Err(TapError::internal(format!(
            "canonical cover has overlapping links {}-{} and {}-{}",
            a.0 + 1,
            a.1 + 1,
            b.0 + 1,
            b.1 + 1
        )));
    }
    if let Some(&leaf) = leaf_degree_violations(t, links, &f).first() {
        return Err(TapError::internal(format!(
            "leaf {} does not have degree one in the canonical cover",
            leaf + 1
        )));
    }

    let m_f: Vec<LinkId> = f
        .iter()
        .copied()
        .filter(|&id| {
            let (u, v) = links.get(id).ends();
            t.is_leaf(u) && t.is_leaf(v) && !pre.report.w.contains(&id)
        })
        .collect();
    let touched: BTreeSet<usize> = m_f
        .iter()
        .flat_map(|&id| {
            let (u, v) = links.get(id).ends();
            [u, v]
        })
        .collect();
    let n = pre
        .matching
        .pairs()
        .iter()
        .copied()
        .filter(|(a, b)| !touched.contains(a) && !touched.contains(b))
        .collect();
    let j = f
        .iter()
        .copied()
        .filter(|&id| {
            let (u, v) = links.get(id).ends();
            !pre.report.locked.contains_key(&u) && !pre.report.locked.contains_key(&v)
        })
        .collect();
    Ok(CanonicalF {
        links: f,
        twin_count,
        m_f,
        n,
        j,
    })
}

/// Nodes that are neither leaves nor stems of the original tree.
pub fn x_nodes(pre: &Preprocessed) -> BTreeSet<usize> {
    pre.tree
        .nodes()
        .iter()
        .copied()
        .filter(|&x| !pre.tree.is_leaf(x) && !pre.report.stems.contains_key(&x))
        .collect()
}

/// Twice the right-hand side of the lower bound:
/// `3|M| + 2|U| + |N| + sum over X of d_J`.
pub fn lower_bound_rhs(pre: &Preprocessed, f: &CanonicalF) -> u64 {
    let m = pre.matching.len() as u64;
    let u = pre
        .tree
        .leaves()
        .into_iter()
        .filter(|&x| !pre.matching.is_matched(x))
        .count() as u64;
    let d = f.j_degrees(&pre.links, pre.tree.capacity());
    let tickets: u64 = x_nodes(pre).into_iter().map(|x| d[x]).sum();
    3 * m + 2 * u + f.n.len() as u64 + tickets
}

/// Ticket data derived from `F`, fixed for one solve.
#[derive(Debug, Clone)]
pub struct AuditContext {
    x_nodes: BTreeSet<usize>,
    d_j: Vec<u64>,
    n_pairs: BTreeSet<(usize, usize)>,
}

impl AuditContext {
    pub fn new(pre: &Preprocessed, f: &CanonicalF) -> Self {
        Self {
            x_nodes: x_nodes(pre),
            d_j: f.j_degrees(&pre.links, pre.tree.capacity()),
            n_pairs: f.n.iter().copied().collect(),
        }
    }

    /// Twice the credit held by a node set of the current tree: coupons,
    /// half a ticket per surviving `N` pair, and `d_J(x)` half-tickets on
    /// every original (never contracted) node of `X`.
    pub fn credit_x2(&self, state: &ContractionState, nodes: &BTreeSet<usize>) -> u64 {
        let coupons = state.coupons_in(nodes);
        let n_tickets = state
            .matching()
            .pairs()
            .iter()
            .filter(|&&(a, b)| {
                self.n_pairs.contains(&(a, b)) && nodes.contains(&a) && nodes.contains(&b)
            })
            .count() as u64;
        let x_tickets: u64 = nodes
            .iter()
            .filter(|&&x| state.is_original(x) && self.x_nodes.contains(&x))
            .map(|&x| self.d_j[x])
            .sum();
        coupons + n_tickets + x_tickets
    }

    pub fn total_credit_x2(&self, state: &ContractionState) -> u64 {
        let all: BTreeSet<usize> = state.tree().nodes().iter().copied().collect();
        self.credit_x2(state, &all)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditRecord {
    pub ok: bool,
    pub credit_x2: u64,
    pub cost_x2: u64,
}

impl fmt::Display for AuditRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok { "ok" } else { "FAIL" };
        write!(f, "a {} {} {}", verdict, self.credit_x2, self.cost_x2)
    }
}

/// Legality of contracting `nodes` with a cover of `cover_len` links:
/// `2 credit >= 2 (|cover| + 1)`.
pub fn audit_contraction(
    state: &ContractionState,
    ctx: &AuditContext,
    nodes: &[usize],
    cover_len: usize,
) -> AuditRecord {
    let set: BTreeSet<usize> = nodes.iter().copied().collect();
    let credit_x2 = ctx.credit_x2(state, &set);
    let cost_x2 = 2 * (cover_len as u64 + 1);
    AuditRecord {
        ok: credit_x2 >= cost_x2,
        credit_x2,
        cost_x2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dtree, lock, p3, star4};
    use crate::solver::preprocess;
    use crate::treeops::shadow_complete;

    #[test]
    fn verify_examples() {
        assert!(verify_cover(&p3(), &[(0, 2)]));
        assert!(!verify_cover(&p3(), &[]));
        use lock::*;
        assert!(verify_cover(&lock(), &[(A, B), (S, U), (B2, R)]));
        assert!(!verify_cover(&lock(), &[(A, B), (B2, R)]));
    }

    #[test]
    fn exact_examples() {
        assert_eq!(exact_opt(&p3(), 26).unwrap().0, 1);
        assert_eq!(exact_opt(&dtree(), 26).unwrap().0, 2);
        assert_eq!(exact_opt(&lock(), 26).unwrap().0, 3);
        assert_eq!(exact_opt(&star4(), 26).unwrap(), (2, vec![0, 1]));
    }

    #[test]
    fn exact_limit() {
        assert!(matches!(
            exact_opt(&lock(), 3),
            Err(TapError::LimitExceeded { count: 4, limit: 3 })
        ));
    }

    #[test]
    fn exact_infeasible() {
        let inst = Instance::new(3, vec![(0, 1), (1, 2)], vec![(1, 2)]).unwrap();
        assert!(matches!(
            exact_opt(&inst, 26),
            Err(TapError::Infeasible { .. })
        ));
    }

    #[test]
    fn exact_invariant_under_closure() {
        for inst in [p3(), star4(), lock(), dtree()] {
            let t = RootedTree::build(&inst, 0);
            let closed = shadow_complete(&t, &LinkSet::from_instance(&inst));
            let pairs: Vec<_> = closed.iter().map(|(_, l)| l.ends()).collect();
            let closed_inst =
                Instance::new(inst.node_count(), inst.tree_edges().to_vec(), pairs).unwrap();
            assert_eq!(
                exact_opt(&inst, 64).unwrap().0,
                exact_opt(&closed_inst, 64).unwrap().0
            );
        }
    }

    #[test]
    fn lock_canonical() {
        use lock::*;
        let pre = preprocess(&lock(), R);
        let f = canonical_f(&pre, 64).unwrap();
        assert_eq!(f.pairs(&pre.links), vec![(R, B2), (U, S), (A, B)]);
        assert_eq!(f.twin_count, 1);
        let j: BTreeSet<_> = f.j.iter().map(|&id| pre.links.get(id).ends()).collect();
        assert_eq!(j, BTreeSet::from([(U, S), (R, B2)]));
        assert!(f.n.is_empty());
        assert_eq!(lower_bound_rhs(&pre, &f), 8);
    }

    #[test]
    fn star4_canonical() {
        let pre = preprocess(&star4(), star4::R);
        let f = canonical_f(&pre, 64).unwrap();
        assert_eq!(f.pairs(&pre.links), vec![(1, 2), (3, 4)]);
        assert_eq!(f.twin_count, 0);
        assert!(f.n.is_empty());
        assert_eq!(lower_bound_rhs(&pre, &f), 6);
    }

    #[test]
    fn p3_canonical() {
        let pre = preprocess(&p3(), 1);
        let f = canonical_f(&pre, 64).unwrap();
        assert_eq!(f.pairs(&pre.links), vec![(0, 2)]);
    }

    #[test]
    fn overlap_cases() {
        // path 0-1-2-3
        let inst = Instance::new(4, vec![(0, 1), (1, 2), (2, 3)], vec![]).unwrap();
        let t = RootedTree::build(&inst, 0);
        assert!(overlaps(&t, (1, 3), (0, 2)));
        assert!(!overlaps(&t, (0, 1), (2, 3)));
        // shared endpoint only, no shared edge
        assert!(!overlaps(&t, (0, 1), (1, 3)));
        assert!(overlaps(&t, (0, 3), (1, 2)) || overlaps(&t, (1, 2), (0, 3)));
    }

    #[test]
    fn audit_arithmetic() {
        let rec = AuditRecord {
            ok: false,
            credit_x2: 4,
            cost_x2: 8,
        };
        assert_eq!(rec.to_string(), "a FAIL 4 8");
    }
}
