//! Semi-closed subtrees of `T/I`, their exact covers, and the dangerous-tree
//! patterns that the main loop has to route around.
//!
//! A rooted subtree is semi-closed w.r.t. a matching when no matching pair
//! straddles its boundary and every unmatched leaf inside has its up-node
//! inside as well. A minimally semi-closed tree has an exact cover made of
//! its matching links plus the up-links of its unmatched leaves.

use std::collections::BTreeSet;

use crate::contraction::{ContractionKind, ContractionState};
use crate::error::{Result, TapError};
use crate::matching::Matching;
use crate::structures::find_twins;
use crate::treeops::{up_node, LinkId, RootedTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtreeView {
    pub root: usize,
    pub leaves: Vec<usize>,
    /// Matching pairs with both ends inside.
    pub matched: Vec<(usize, usize)>,
    pub unmatched_leaves: Vec<usize>,
    /// Compound nodes inside that are not leaves.
    pub compound_inside: Vec<usize>,
    pub stems_inside: Vec<usize>,
}

impl SubtreeView {
    pub fn new(state: &ContractionState, m: &Matching, root: usize) -> Self {
        let t = state.tree();
        let inside = |x: usize| t.is_ancestor(root, x);
        let leaves: Vec<usize> = t
            .subtree(root)
            .iter()
            .copied()
            .filter(|&x| t.is_leaf(x))
            .collect();
        let matched = m
            .pairs()
            .iter()
            .copied()
            .filter(|&(a, b)| inside(a) && inside(b))
            .collect();
        let unmatched_leaves = leaves
            .iter()
            .copied()
            .filter(|&x| !m.is_matched(x))
            .collect();
        let compound_inside = t
            .subtree(root)
            .iter()
            .copied()
            .filter(|&x| state.is_compound(x) && !t.is_leaf(x))
            .collect();
        let (_, stems) = find_twins(t, state.links());
        let stems_inside = stems.keys().copied().filter(|&s| inside(s)).collect();
        Self {
            root,
            leaves,
            matched,
            unmatched_leaves,
            compound_inside,
            stems_inside,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DangerKind {
    NotDangerous,
    ThreeLeaf,
    FourLeaf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DangerVerdict {
    pub kind: DangerKind,
    /// `(a, b, b')`: the unmatched leaf and the ordered matched pair, taken
    /// in the contracted tree for the 4-leaf case.
    pub ordering: Option<(usize, usize, usize)>,
    pub stem_twin: Option<LinkId>,
}

impl DangerVerdict {
    fn not() -> Self {
        Self {
            kind: DangerKind::NotDangerous,
            ordering: None,
            stem_twin: None,
        }
    }

    pub fn is_dangerous(&self) -> bool {
        self.kind != DangerKind::NotDangerous
    }
}

pub fn is_m_compatible(t: &RootedTree, m: &Matching, v: usize) -> bool {
    m.pairs()
        .iter()
        .all(|&(a, b)| t.is_ancestor(v, a) == t.is_ancestor(v, b))
}

pub fn is_semi_closed(state: &ContractionState, m: &Matching, v: usize) -> bool {
    let t = state.tree();
    if !is_m_compatible(t, m, v) {
        return false;
    }
    t.subtree(v).iter().all(|&x| {
        if !t.is_leaf(x) || m.is_matched(x) {
            return true;
        }
        up_node(t, state.links(), x).is_none_or(|up| t.is_ancestor(v, up))
    })
}

/// All minimally semi-closed subtrees, ordered by preorder of their roots.
pub fn minimal_semi_closed(state: &ContractionState, m: &Matching) -> Vec<SubtreeView> {
    let t = state.tree();
    let mut below = vec![false; t.capacity()];
    let mut minimal = Vec::new();
    for &v in t.nodes().iter().rev() {
        let has_below = t.children(v).iter().any(|&c| below[c]);
        let here = !has_below && is_semi_closed(state, m, v);
        if here {
            minimal.push(v);
        }
        below[v] = has_below || here;
    }
    minimal.sort_by_key(|&v| t.preorder_in(v));
    minimal
        .into_iter()
        .map(|v| SubtreeView::new(state, m, v))
        .collect()
}

fn check_exact(state: &ContractionState, root: usize, cover: &[LinkId]) -> Result<()> {
    let t = state.tree();
    let want: BTreeSet<usize> = t
        .subtree(root)
        .iter()
        .copied()
        .filter(|&x| x != root)
        .collect();
    let mut got = BTreeSet::new();
    for &id in cover {
        let link = state.links().get(id);
        got.extend(t.path_edges(link.u, link.v));
    }
    if got == want {
        Ok(())
    } else {
        Err(TapError::internal(format!(
            "cover of size {} is not exact on the subtree at {}",
            cover.len(),
            root + 1
        )))
    }
}

/// The matching links inside plus the up-links of the unmatched leaves.
pub fn exact_cover(
    state: &ContractionState,
    m: &Matching,
    view: &SubtreeView,
) -> Result<Vec<LinkId>> {
    let _ = m;
    let mut cover = BTreeSet::new();
    for &(a, b) in &view.matched {
        let id = state.links().find(a, b).ok_or_else(|| {
            TapError::internal(format!("matching pair {}-{} has no link", a + 1, b + 1))
        })?;
        cover.insert(id);
    }
    for &a in &view.unmatched_leaves {
        let id = state
            .up_link(a)
            .ok_or_else(|| TapError::internal(format!("leaf {} has no incident link", a + 1)))?;
        cover.insert(id);
    }
    let cover: Vec<LinkId> = cover.into_iter().collect();
    check_exact(state, view.root, &cover)?;
    Ok(cover)
}

/// Whether contracting the path between `x` and `y` turns the merged node
/// into a leaf.
fn merge_makes_leaf(t: &RootedTree, x: usize, y: usize) -> bool {
    let path = t.path_nodes(x, y);
    let set: BTreeSet<usize> = path.iter().copied().collect();
    if set.contains(&t.root()) {
        return false;
    }
    path.iter()
        .all(|&p| t.children(p).iter().all(|c| set.contains(c)))
}

fn three_leaf(state: &ContractionState, m: &Matching, view: &SubtreeView) -> Result<DangerVerdict> {
    if view.leaves.len() != 3
        || !view.stems_inside.is_empty()
        || !view.compound_inside.is_empty()
        || view.matched.len() != 1
        || view.unmatched_leaves.len() != 1
        || !is_semi_closed(state, m, view.root)
    {
        return Ok(DangerVerdict::not());
    }
    let t = state.tree();
    let links = state.links();
    let a = view.unmatched_leaves[0];
    let (p, q) = view.matched[0];
    let open = |x: usize| up_node(t, links, x).is_some_and(|up| !t.is_ancestor(view.root, up));
    let fits =
        |b: usize, b2: usize| links.contains(a, b2) && !merge_makes_leaf(t, a, b2) && open(b);
    let ordering = match (fits(p, q), fits(q, p)) {
        (false, false) => return Ok(DangerVerdict::not()),
        (true, false) => (p, q),
        (false, true) => (q, p),
        (true, true) => {
            let (up_p, up_q) = (up_node(t, links, p), up_node(t, links, q));
            let (Some(up_p), Some(up_q)) = (up_p, up_q) else {
                return Err(TapError::internal("open leaf without an up-node"));
            };
            if t.is_ancestor(up_p, up_q) {
                (p, q)
            } else if t.is_ancestor(up_q, up_p) {
                (q, p)
            } else {
                return Err(TapError::internal(format!(
                    "up-nodes {} and {} are incomparable",
                    up_p + 1,
                    up_q + 1
                )));
            }
        }
    };
    Ok(DangerVerdict {
        kind: DangerKind::ThreeLeaf,
        ordering: Some((a, ordering.0, ordering.1)),
        stem_twin: None,
    })
}

fn four_leaf(state: &ContractionState, m: &Matching, view: &SubtreeView) -> Result<DangerVerdict> {
    if view.leaves.len() != 4
        || view.stems_inside.len() != 1
        || !view.compound_inside.is_empty()
        || view.matched.len() != 1
        || !is_semi_closed(state, m, view.root)
    {
        return Ok(DangerVerdict::not());
    }
    let t = state.tree();
    let (_, stems) = find_twins(t, state.links());
    let (x, y) = stems[&view.stems_inside[0]];
    if m.is_matched(x) == m.is_matched(y) {
        return Ok(DangerVerdict::not());
    }
    let twin = state
        .links()
        .find(x, y)
        .ok_or_else(|| TapError::internal("twin pair without a link"))?;
    let mut scratch = state.scratch_copy();
    scratch.contract(&t.path_nodes(x, y), &[twin], ContractionKind::Scratch)?;
    let m2 = m.map(|p| scratch.find(p));
    let inner = three_leaf(&scratch, &m2, &SubtreeView::new(&scratch, &m2, view.root))?;
    if inner.kind != DangerKind::ThreeLeaf {
        return Ok(DangerVerdict::not());
    }
    Ok(DangerVerdict {
        kind: DangerKind::FourLeaf,
        ordering: inner.ordering,
        stem_twin: Some(twin),
    })
}

pub fn classify_dangerous(
    state: &ContractionState,
    m: &Matching,
    view: &SubtreeView,
) -> Result<DangerVerdict> {
    match view.leaves.len() {
        3 => three_leaf(state, m, view),
        4 => four_leaf(state, m, view),
        _ => Ok(DangerVerdict::not()),
    }
}

/// Builds a non-dangerous semi-closed tree and its exact cover when every
/// minimally semi-closed tree is dangerous.
///
/// The stem twin links of the 4-leaf members are contracted on a scratch
/// copy, the matching is switched from `bb'` to `ab'` inside each member,
/// and a minimally semi-closed tree under the switched matching is covered
/// exactly there. Its cover is mapped back to real links and the twin links
/// inside it are added back.
pub fn find_tree(
    state: &ContractionState,
    m: &Matching,
    dangerous: &[SubtreeView],
) -> Result<(SubtreeView, Vec<LinkId>)> {
    if dangerous.is_empty() {
        return Err(TapError::internal(
            "find_tree needs at least one dangerous tree",
        ));
    }
    let mut twins = Vec::new();
    for view in dangerous {
        let verdict = classify_dangerous(state, m, view)?;
        match verdict.kind {
            DangerKind::NotDangerous => {
                return Err(TapError::internal(format!(
                    "subtree at {} is not dangerous",
                    view.root + 1
                )))
            }
            DangerKind::FourLeaf => {
                twins.push(verdict.stem_twin.expect("4-leaf verdict has a twin"))
            }
            DangerKind::ThreeLeaf => {}
        }
    }

    let mut scratch = state.scratch_copy();
    for &id in &twins {
        let (x, y) = state.links().get(id).ends();
        let (px, py) = (scratch.find(x), scratch.find(y));
        let sid = scratch
            .links()
            .find(px, py)
            .ok_or_else(|| TapError::internal("twin link lost on the scratch copy"))?;
        let path = scratch.tree().path_nodes(px, py);
        scratch.contract(&path, &[sid], ContractionKind::Scratch)?;
    }
    let m_scratch = m.map(|p| scratch.find(p));
    let mut switched = m_scratch.clone();
    for view in dangerous {
        let sview = SubtreeView::new(&scratch, &m_scratch, view.root);
        let verdict = three_leaf(&scratch, &m_scratch, &sview)?;
        let Some((a, b, b2)) = verdict.ordering else {
            return Err(TapError::internal(format!(
                "subtree at {} is not 3-leaf dangerous after twin contraction",
                view.root + 1
            )));
        };
        switched.remove(b);
        if !switched.insert(a, b2) {
            return Err(TapError::internal("matching switch collided"));
        }
    }

    let family = minimal_semi_closed(&scratch, &switched);
    let Some(chosen) = family.first() else {
        return Err(TapError::internal(
            "no semi-closed tree under the switched matching",
        ));
    };
    let scratch_cover = exact_cover(&scratch, &switched, chosen)?;
    let root = chosen.root;

    let mut cover = BTreeSet::new();
    for sid in scratch_cover {
        let (p, q) = scratch.links().get(sid).ends();
        let id = state.links().find(p, q).ok_or_else(|| {
            TapError::internal(format!("no real link for scratch link {}-{}", p + 1, q + 1))
        })?;
        cover.insert(id);
    }
    for &id in &twins {
        let (x, _) = state.links().get(id).ends();
        if state.tree().is_ancestor(root, x) {
            cover.insert(id);
        }
    }
    let cover: Vec<LinkId> = cover.into_iter().collect();

    let view = SubtreeView::new(state, m, root);
    if !is_semi_closed(state, m, root) {
        return Err(TapError::internal("found tree is not semi-closed"));
    }
    if classify_dangerous(state, m, &view)?.is_dangerous() {
        return Err(TapError::internal("found tree is dangerous"));
    }
    if cover.len() != view.matched.len() + view.unmatched_leaves.len() {
        return Err(TapError::internal(format!(
            "found cover has {} links, expected {}",
            cover.len(),
            view.matched.len() + view.unmatched_leaves.len()
        )));
    }
    let t = state.tree();
    if !dangerous
        .iter()
        .any(|d| d.root != root && t.is_ancestor(root, d.root))
    {
        return Err(TapError::internal("found tree contains no dangerous tree"));
    }
    check_exact(state, root, &cover)?;
    Ok((view, cover))
}
