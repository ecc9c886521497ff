//! The main 1.5-approximation loop.
//!
//! After shadow completion the solver fixes a maximum matching `M` on the
//! leaf-to-leaf links outside `W`, hands out coupons, and contracts locking
//! trees whose three leaves are unmatched. It then alternates between greedy
//! link contractions (two unmatched leaves joined by a link) and contracting
//! a minimally semi-closed tree with its exact cover, falling back to
//! [`find_tree`] when every such tree is dangerous, until one node is left.

use std::collections::BTreeSet;

use crate::contraction::{uncovered_edge, ContractionKind, ContractionState};
use crate::error::{Result, TapError};
use crate::instance::{Instance, Solution, SolveStats};
use crate::matching::{max_matching, Matching};
use crate::oracle::{self, audit_contraction, AuditContext, AuditRecord};
use crate::semiclosed::{classify_dangerous, exact_cover, find_tree, minimal_semi_closed};
use crate::structures::{analyze, StructureReport};
use crate::treeops::{shadow_complete, LinkId, LinkSet, RootedTree};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub root_override: Option<usize>,
    /// Check every contraction against the credit derived from an optimal
    /// cover. Exponential; small instances only.
    pub audit: bool,
    pub trace: bool,
    pub seed: u64,
}

/// The rooted, shadow-closed instance with its structures and matching.
#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub root: usize,
    pub tree: RootedTree,
    pub links: LinkSet,
    pub report: StructureReport,
    pub matching: Matching,
}

/// Lowest-id node of degree at least two; node 0 when there is none.
pub fn default_root(inst: &Instance) -> usize {
    let mut degree = vec![0usize; inst.node_count()];
    for &(u, v) in inst.tree_edges() {
        degree[u] += 1;
        degree[v] += 1;
    }
    degree.iter().position(|&d| d >= 2).unwrap_or(0)
}

pub fn preprocess(inst: &Instance, root: usize) -> Preprocessed {
    let tree = RootedTree::build(inst, root);
    let links = shadow_complete(&tree, &LinkSet::from_instance(inst));
    let report = analyze(&tree, &links);
    let leaves: BTreeSet<usize> = tree.leaves().into_iter().collect();
    let edges: Vec<(usize, usize)> = links
        .iter()
        .filter(|(id, l)| leaves.contains(&l.u) && leaves.contains(&l.v) && !report.w.contains(id))
        .map(|(_, l)| l.ends())
        .collect();
    let matching = max_matching(&leaves, &edges);
    Preprocessed {
        root,
        tree,
        links,
        report,
        matching,
    }
}

struct Audit {
    ctx: AuditContext,
    initial_x2: u64,
    spent_x2: u64,
}

struct Run {
    state: ContractionState,
    audit: Option<Audit>,
    records: Vec<AuditRecord>,
}

impl Run {
    fn apply(&mut self, nodes: &[usize], cover: &[LinkId], kind: ContractionKind) -> Result<()> {
        if let Some(audit) = &self.audit {
            let rec = audit_contraction(&self.state, &audit.ctx, nodes, cover.len());
            self.records.push(rec);
            if !rec.ok {
                return Err(TapError::internal(format!(
                    "illegal {} contraction: 2credit {} < 2cost {}",
                    kind.name(),
                    rec.credit_x2,
                    rec.cost_x2
                )));
            }
        }
        let before = self.state.node_count();
        self.state.contract(nodes, cover, kind)?;
        if self.state.node_count() >= before {
            return Err(TapError::internal("contraction made no progress"));
        }
        if let Some(audit) = &mut self.audit {
            audit.spent_x2 += 2 * cover.len() as u64;
            let left = audit.ctx.total_credit_x2(&self.state);
            if audit.spent_x2 + left > audit.initial_x2 {
                return Err(TapError::internal(format!(
                    "credit ledger overdrawn: spent {} + remaining {} > initial {}",
                    audit.spent_x2, left, audit.initial_x2
                )));
            }
        }
        Ok(())
    }
}

/// Contracts locking trees whose leaves `a`, `b`, `b'` are all unmatched,
/// using `bb'` and the up-link of `a`. When `b` is locked as well, only the
/// larger of the two locking trees is used.
fn exhaust_greedy_locking(run: &mut Run, report: &StructureReport) -> Result<usize> {
    let mut count = 0;
    for (&a, info) in &report.locked {
        let b = info.twin;
        if let Some(other) = report.locked.get(&b) {
            let (mine, theirs) = (info.locking_tree_root, other.locking_tree_root);
            let t = run.state.original_tree();
            if theirs != mine && t.is_ancestor(theirs, mine) || theirs == mine && b < a {
                continue;
            }
        }
        let m = run.state.matching();
        if [a, b, info.third].iter().any(|&x| m.is_matched(x)) {
            continue;
        }
        let v = info.locking_tree_root;
        let t = run.state.tree();
        let untouched = t.contains(v) && t.subtree(v).iter().all(|&x| run.state.is_original(x));
        if !untouched {
            continue;
        }
        let bb = run
            .state
            .links()
            .find(b, info.third)
            .ok_or_else(|| TapError::internal("locking link missing"))?;
        let up = run
            .state
            .up_link(a)
            .ok_or_else(|| TapError::internal("locked leaf without an up-link"))?;
        let nodes = t.subtree(v).to_vec();
        run.apply(&nodes, &[bb, up], ContractionKind::Locking)?;
        count += 1;
    }
    Ok(count)
}

/// Contracts paths between unmatched leaves joined by a link, smallest
/// endpoint pair first, until none is left.
fn exhaust_greedy_links(run: &mut Run) -> Result<usize> {
    let mut count = 0;
    loop {
        let state = &run.state;
        let next = state
            .links()
            .iter()
            .filter(|(_, l)| state.is_unmatched_leaf(l.u) && state.is_unmatched_leaf(l.v))
            .map(|(id, l)| (l.ends(), id))
            .min();
        let Some(((u, v), id)) = next else {
            return Ok(count);
        };
        let path = state.tree().path_nodes(u, v);
        run.apply(&path, &[id], ContractionKind::Link)?;
        count += 1;
    }
}

/// Covers every tree edge of `inst` with at most 1.5 times the optimum
/// number of links.
pub fn tree_cover(inst: &Instance, opts: &SolveOptions) -> Result<Solution> {
    let n = inst.node_count();
    if n <= 1 {
        return Ok(Solution::default());
    }
    if let Some(root) = opts.root_override {
        if root >= n {
            return Err(TapError::InvalidInstance(format!(
                "root {} is not a node",
                root + 1
            )));
        }
    }
    let root = opts.root_override.unwrap_or_else(|| default_root(inst));
    let check_tree = RootedTree::build(inst, root);
    if let Some(edge) = uncovered_edge(&check_tree, inst.links()) {
        return Err(TapError::Infeasible { edge });
    }
    if n == 2 && opts.root_override.is_none() {
        let links = vec![inst.link_index(0, 1).expect("feasible two-node instance")];
        return Ok(Solution {
            links,
            stats: SolveStats {
                size: 1,
                ..SolveStats::default()
            },
        });
    }

    let pre = preprocess(inst, root);
    let mut state = ContractionState::new(inst, root, pre.links.clone())?;
    state.install_matching(pre.matching.clone())?;
    let audit = if opts.audit {
        let f = oracle::canonical_f(&pre, oracle::DEFAULT_CANONICAL_LIMIT)?;
        let ctx = AuditContext::new(&pre, &f);
        let initial_x2 = ctx.total_credit_x2(&state);
        Some(Audit {
            ctx,
            initial_x2,
            spent_x2: 0,
        })
    } else {
        None
    };
    let mut run = Run {
        state,
        audit,
        records: Vec::new(),
    };

    exhaust_greedy_locking(&mut run, &pre.report)?;
    let mut iterations = 0;
    while run.state.node_count() > 1 {
        iterations += 1;
        exhaust_greedy_links(&mut run)?;
        if run.state.node_count() == 1 {
            break;
        }
        let m = run.state.matching().clone();
        let family = minimal_semi_closed(&run.state, &m);
        let mut chosen = None;
        for view in &family {
            if !classify_dangerous(&run.state, &m, view)?.is_dangerous() {
                chosen = Some((
                    view.clone(),
                    exact_cover(&run.state, &m, view)?,
                    ContractionKind::SemiClosed,
                ));
                break;
            }
        }
        let (view, cover, kind) = match chosen {
            Some(c) => c,
            None => {
                let (view, cover) = find_tree(&run.state, &m, &family)?;
                (view, cover, ContractionKind::FindTree)
            }
        };
        let nodes = run.state.tree().subtree(view.root).to_vec();
        run.apply(&nodes, &cover, kind)?;
    }

    if let Some(audit) = &run.audit {
        let size = run.state.accepted().len() as u64;
        if 2 * size + 2 > audit.initial_x2 {
            return Err(TapError::internal(format!(
                "solution of size {} exceeds initial credit {}/2 - 1",
                size, audit.initial_x2
            )));
        }
    }
    let links: Vec<usize> = run.state.accepted().iter().copied().collect();
    let pairs: Vec<(usize, usize)> = links.iter().map(|&i| inst.links()[i]).collect();
    if !oracle::verify_cover(inst, &pairs) {
        return Err(TapError::internal("solution does not cover the tree"));
    }
    let stats = SolveStats {
        size: links.len(),
        iterations,
        trace: run.state.trace().to_vec(),
        audit: run.records,
    };
    Ok(Solution { links, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{dtree, dtree4, lock, p3, star4};

    fn solve_at(inst: &Instance, root: usize) -> Solution {
        let opts = SolveOptions {
            root_override: Some(root),
            audit: true,
            ..SolveOptions::default()
        };
        tree_cover(inst, &opts).unwrap()
    }

    fn kinds(sol: &Solution) -> Vec<ContractionKind> {
        sol.stats.trace.iter().map(|r| r.kind).collect()
    }

    #[test]
    fn p3_solution() {
        let sol = tree_cover(&p3(), &SolveOptions::default()).unwrap();
        assert_eq!(sol.links, vec![0]);
        assert_eq!(sol.to_text(&p3()), "s tap 1\nl 1 3\n");
    }

    #[test]
    fn star4_solution() {
        let sol = solve_at(&star4(), star4::R);
        assert_eq!(sol.size(), 2);
        assert_eq!(kinds(&sol), vec![ContractionKind::SemiClosed]);
    }

    #[test]
    fn dtree_solution() {
        let inst = dtree();
        let sol = solve_at(&inst, dtree::R);
        assert_eq!(sol.size(), 2);
        assert_eq!(kinds(&sol), vec![ContractionKind::FindTree]);
        let pairs: Vec<_> = sol.links.iter().map(|&i| inst.links()[i]).collect();
        assert_eq!(pairs, vec![(dtree::A, dtree::B2), (dtree::B, dtree::R)]);
    }

    #[test]
    fn dtree4_solution() {
        let sol = solve_at(&dtree4(), dtree4::R);
        assert_eq!(sol.size(), 3);
        assert_eq!(kinds(&sol), vec![ContractionKind::FindTree]);
    }

    #[test]
    fn lock_solution() {
        let sol = solve_at(&lock(), lock::R);
        assert_eq!(sol.size(), 3);
        let k = kinds(&sol);
        assert_eq!(k[0], ContractionKind::Locking);
        assert_eq!(
            k.iter().filter(|&&x| x == ContractionKind::Locking).count(),
            1
        );
        let rec = sol.stats.audit[0];
        assert_eq!((rec.credit_x2, rec.cost_x2, rec.ok), (7, 6, true));
    }

    #[test]
    fn locking_needs_unmatched_leaves() {
        // LOCK plus a leaf c under v linked to b', so b' gets matched
        let base = lock();
        let mut edges = base.tree_edges().to_vec();
        edges.push((lock::V, 7));
        let mut links = base.links().to_vec();
        links.push((lock::B2, 7));
        links.push((7, lock::R));
        let inst = Instance::new(8, edges, links).unwrap();
        let pre = preprocess(&inst, lock::R);
        assert!(pre.matching.is_matched(lock::B2));
        let sol = solve_at(&inst, lock::R);
        assert!(!kinds(&sol).contains(&ContractionKind::Locking));
    }

    #[test]
    fn greedy_link_on_cherry() {
        let inst = Instance::new(4, vec![(0, 1), (1, 2), (1, 3)], vec![(2, 3), (1, 0)]).unwrap();
        let sol = solve_at(&inst, 0);
        assert_eq!(kinds(&sol)[0], ContractionKind::Link);
        assert_eq!(sol.size(), 2);
    }

    #[test]
    fn trivial_and_infeasible() {
        let one = Instance::new(1, vec![], vec![]).unwrap();
        assert_eq!(
            tree_cover(&one, &SolveOptions::default()).unwrap().size(),
            0
        );
        let two = Instance::new(2, vec![(0, 1)], vec![(0, 1)]).unwrap();
        assert_eq!(
            tree_cover(&two, &SolveOptions::default()).unwrap().links,
            vec![0]
        );
        let bad = Instance::new(3, vec![(0, 1), (1, 2)], vec![(0, 1)]).unwrap();
        assert!(matches!(
            tree_cover(&bad, &SolveOptions::default()),
            Err(TapError::Infeasible { .. })
        ));
    }

    #[test]
    fn default_root_is_lowest_internal() {
        assert_eq!(default_root(&p3()), 1);
        assert_eq!(default_root(&lock()), 1);
        assert_eq!(default_root(&star4()), 0);
    }
}
