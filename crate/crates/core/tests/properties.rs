use std::collections::BTreeSet;

use proptest::prelude::*;

use tap_core::contraction::ContractionState;
use tap_core::instance::{
    find_bridges, generate, parse_instance, reduce_graph, GenParams, GraphInput, Instance,
    TreeModel,
};
use tap_core::oracle::{exact_opt, verify_cover};
use tap_core::semiclosed::{
    classify_dangerous, exact_cover, is_semi_closed, minimal_semi_closed, DangerKind, SubtreeView,
};
use tap_core::solver::{default_root, preprocess};
use tap_core::treeops::RootedTree;

fn model() -> impl Strategy<Value = TreeModel> {
    prop::sample::select(TreeModel::ALL.to_vec())
}

fn instance(max_nodes: usize, max_extra: usize) -> impl Strategy<Value = Instance> {
    (2..=max_nodes, 0..=max_extra, model(), any::<u64>()).prop_map(|(nodes, extra, model, seed)| {
        let params = GenParams {
            nodes,
            extra_link_count: extra,
            model,
            ensure_feasible: true,
        };
        generate(&params, seed)
    })
}

fn initial_state(inst: &Instance) -> ContractionState {
    let pre = preprocess(inst, default_root(inst));
    let mut state = ContractionState::new(inst, pre.root, pre.links.clone()).unwrap();
    state.install_matching(pre.matching.clone()).unwrap();
    state
}

fn connected_without(n: usize, edges: &[(usize, usize)], skip: usize) -> bool {
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if i != skip {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// A connected multigraph: a random spanning tree plus extra edges.
fn multigraph() -> impl Strategy<Value = GraphInput> {
    (1usize..=12)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
            (
                Just(n),
                parents,
                prop::collection::vec((0..n, 0..n), 0..10),
                prop::collection::vec((0..n, 0..n), 0..6),
            )
        })
        .prop_map(|(n, parents, extra, links)| {
            let mut edges: Vec<(usize, usize)> = parents
                .into_iter()
                .enumerate()
                .map(|(i, p)| (p, i + 1))
                .collect();
            edges.extend(extra.into_iter().filter(|(u, v)| u != v));
            GraphInput {
                node_count: n,
                edges,
                links: links.into_iter().filter(|(u, v)| u != v).collect(),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_round_trip(inst in instance(30, 40)) {
        prop_assert_eq!(parse_instance(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn generated_instances_are_feasible(inst in instance(30, 20)) {
        prop_assert!(verify_cover(&inst, inst.links()));
    }

    #[test]
    fn bridges_match_brute_force(g in multigraph()) {
        let bridges = find_bridges(g.node_count, &g.edges);
        for (i, &b) in bridges.iter().enumerate() {
            prop_assert_eq!(b, !connected_without(g.node_count, &g.edges, i));
        }
        let red = reduce_graph(&g).unwrap();
        let count = bridges.iter().filter(|&&b| b).count();
        prop_assert_eq!(red.instance.node_count(), count + 1);
        let expected: BTreeSet<(usize, usize)> = g
            .edges
            .iter()
            .zip(&bridges)
            .filter(|(_, &b)| b)
            .map(|(&(u, v), _)| {
                let (a, b) = (red.node_map[u], red.node_map[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let got: BTreeSet<(usize, usize)> = red
            .instance
            .tree_edges()
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        prop_assert_eq!(got, expected);
        // nodes share a tree node iff no bridge separates them
        let mut comp: Vec<usize> = (0..g.node_count).collect();
        fn root(c: &mut [usize], x: usize) -> usize {
            if c[x] == x { x } else { let r = root(c, c[x]); c[x] = r; r }
        }
        for (&(a, b), &bridge) in g.edges.iter().zip(&bridges) {
            if !bridge {
                let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
                comp[ra] = rb;
            }
        }
        for u in 0..g.node_count {
            for v in 0..g.node_count {
                let same = root(&mut comp, u) == root(&mut comp, v);
                prop_assert_eq!(same, red.node_map[u] == red.node_map[v]);
            }
        }
    }

    #[test]
    fn minimal_semi_closed_family(inst in instance(14, 16)) {
        let state = initial_state(&inst);
        let m = state.matching().clone();
        let family = minimal_semi_closed(&state, &m);
        prop_assert!(!family.is_empty());
        let t = state.tree();
        let mut seen = BTreeSet::new();
        for view in &family {
            prop_assert!(is_semi_closed(&state, &m, view.root));
            for &x in t.subtree(view.root) {
                prop_assert!(seen.insert(x), "members overlap");
            }
            prop_assert_eq!(view.leaves.len(), 2 * view.matched.len() + view.unmatched_leaves.len());
            let cover = exact_cover(&state, &m, view).unwrap();
            prop_assert_eq!(cover.len(), view.matched.len() + view.unmatched_leaves.len());
        }
    }

    /// A 4-leaf dangerous tree has no 3-leaf dangerous rooted subtree.
    #[test]
    fn four_leaf_trees_contain_no_three_leaf_tree(inst in instance(14, 16)) {
        let state = initial_state(&inst);
        let m = state.matching().clone();
        let t = state.tree();
        for &v in t.nodes() {
            let verdict = classify_dangerous(&state, &m, &SubtreeView::new(&state, &m, v)).unwrap();
            if verdict.kind != DangerKind::FourLeaf {
                continue;
            }
            for &w in t.subtree(v) {
                let inner = classify_dangerous(&state, &m, &SubtreeView::new(&state, &m, w)).unwrap();
                prop_assert_ne!(inner.kind, DangerKind::ThreeLeaf);
            }
        }
    }

    /// De-shadowing a closed link set yields original links covering at
    /// least the same edges.
    #[test]
    fn deshadow_preserves_coverage(inst in instance(16, 12)) {
        let state = initial_state(&inst);
        let t = RootedTree::build(&inst, state.tree().root());
        for (id, link) in state.links().iter() {
            let (u, v) = inst.links()[state.deshadow(id)];
            let orig: BTreeSet<usize> = t.path_edges(u, v).into_iter().collect();
            for c in t.path_edges(link.u, link.v) {
                prop_assert!(orig.contains(&c));
            }
        }
    }

    #[test]
    fn exact_opt_ignores_closure(inst in instance(9, 6)) {
        let pre = preprocess(&inst, default_root(&inst));
        let pairs: Vec<(usize, usize)> = pre.links.iter().map(|(_, l)| l.ends()).collect();
        let closed = Instance::new(inst.node_count(), inst.tree_edges().to_vec(), pairs).unwrap();
        prop_assert_eq!(exact_opt(&inst, 64).unwrap().0, exact_opt(&closed, 64).unwrap().0);
    }
}
