//! Problem data model, the line-oriented text formats, random instance
//! generation, and the reduction from general 2-edge-connectivity
//! augmentation to the tree case.
//!
//! Files use 1-based node ids; everything in memory is 0-based.
//!
//! ```text
//! c a comment
//! p tap <n> <k>          followed by n-1 `e u v` lines and k `l u v` lines
//! p graph <n> <m> <k>    followed by m `e u v` lines and k `l u v` lines
//! s tap <size>           followed by `size` lines `l u v` (solutions)
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ParseError, Result, TapError};

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// An immutable tree augmentation instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    node_count: usize,
    tree_edges: Vec<(usize, usize)>,
    links: Vec<(usize, usize)>,
    names: Option<Vec<String>>,
}

impl Instance {
    /// Validates the tree and deduplicates parallel links, keeping the first
    /// occurrence. A link parallel to a tree edge is kept.
    pub fn new(
        node_count: usize,
        tree_edges: Vec<(usize, usize)>,
        links: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(TapError::InvalidInstance(
                "a tree needs at least one node".into(),
            ));
        }
        if tree_edges.len() + 1 != node_count {
            return Err(TapError::InvalidInstance(format!(
                "expected {} tree edges, got {}",
                node_count - 1,
                tree_edges.len()
            )));
        }
        for &(u, v) in tree_edges.iter().chain(links.iter()) {
            if u >= node_count || v >= node_count {
                return Err(TapError::InvalidInstance(format!(
                    "node id {} out of range 1..={node_count}",
                    u.max(v) + 1
                )));
            }
        }
        if !spans(node_count, &tree_edges) {
            return Err(TapError::InvalidInstance(
                "tree edges do not form a spanning tree".into(),
            ));
        }
        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(links.len());
        for (u, v) in links {
            if u == v {
                return Err(TapError::InvalidInstance(format!(
                    "self-loop link at node {}",
                    u + 1
                )));
            }
            if seen.insert(ordered(u, v)) {
                kept.push((u, v));
            }
        }
        Ok(Self {
            node_count,
            tree_edges,
            links: kept,
            names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.node_count, "one name per node");
        self.names = Some(names);
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.tree_edges
    }

    pub fn links(&self) -> &[(usize, usize)] {
        &self.links
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Display label for a node: its name when present, else its 1-based id.
    pub fn label(&self, node: usize) -> String {
        match &self.names {
            Some(names) => names[node].clone(),
            None => (node + 1).to_string(),
        }
    }

    /// Index of the link joining `u` and `v`, in either orientation.
    pub fn link_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = ordered(u, v);
        self.links.iter().position(|&(a, b)| ordered(a, b) == key)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p tap {} {}\n", self.node_count, self.links.len());
        for &(u, v) in &self.tree_edges {
            let _ = writeln!(out, "e {} {}", u + 1, v + 1);
        }
        for &(u, v) in &self.links {
            let _ = writeln!(out, "l {} {}", u + 1, v + 1);
        }
        out
    }
}

fn spans(node_count: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); node_count];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; node_count];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == node_count
}

/// A connected graph plus candidate links, before bridge-tree reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphInput {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Tap(Instance),
    Graph(GraphInput),
}

/// Statistics gathered while solving.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub size: usize,
    pub iterations: usize,
    pub trace: Vec<crate::contraction::ContractionRecord>,
    pub audit: Vec<crate::oracle::AuditRecord>,
}

/// A set of link indices into [`Instance::links`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Solution {
    pub links: Vec<usize>,
    pub stats: SolveStats,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.links.len()
    }

    /// The `s tap` text form, links in original node ids sorted lexicographically.
    pub fn to_text(&self, inst: &Instance) -> String {
        let pairs: Vec<(usize, usize)> = self.links.iter().map(|&i| inst.links()[i]).collect();
        solution_text(&pairs)
    }
}

/// Renders endpoint pairs (0-based) in the solution format.
pub fn solution_text(pairs: &[(usize, usize)]) -> String {
    let mut sorted: Vec<(usize, usize)> =
        pairs.iter().map(|&(u, v)| ordered(u + 1, v + 1)).collect();
    sorted.sort_unstable();
    let mut out = format!("s tap {}\n", sorted.len());
    for (u, v) in sorted {
        let _ = writeln!(out, "l {u} {v}");
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<&'a str>);

    fn next(&mut self) -> Option<Self::Item> {
        for (idx, line) in self.inner.by_ref() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() || fields[0] == "c" {
                continue;
            }
            return Some((idx + 1, fields));
        }
        None
    }
}

fn parse_count(line: usize, field: &str, what: &str) -> std::result::Result<usize, ParseError> {
    field
        .parse::<usize>()
        .map_err(|_| ParseError::new(line, format!("invalid {what} '{field}'")))
}

fn parse_pair(
    line: usize,
    fields: &[&str],
    node_count: usize,
) -> std::result::Result<(usize, usize), ParseError> {
    if fields.len() != 3 {
        return Err(ParseError::new(
            line,
            format!("expected '{} <u> <v>'", fields[0]),
        ));
    }
    let mut ids = [0usize; 2];
    for (slot, field) in ids.iter_mut().zip(&fields[1..]) {
        let id = parse_count(line, field, "node id")?;
        if id == 0 || id > node_count {
            return Err(ParseError::new(
                line,
                format!("node id {id} out of range 1..={node_count}"),
            ));
        }
        *slot = id - 1;
    }
    Ok((ids[0], ids[1]))
}

/// Parses a `p tap` or `p graph` problem.
pub fn parse_problem(text: &str) -> std::result::Result<Problem, ParseError> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "missing problem line"))?;
    if header[0] != "p" || header.len() < 2 {
        return Err(ParseError::new(
            hline,
            "expected problem line 'p tap' or 'p graph'",
        ));
    }
    let (is_tap, node_count, edge_count, link_count) = match (header[1], header.len()) {
        ("tap", 4) => {
            let n = parse_count(hline, header[2], "node count")?;
            let k = parse_count(hline, header[3], "link count")?;
            (true, n, n.saturating_sub(1), k)
        }
        ("graph", 5) => {
            let n = parse_count(hline, header[2], "node count")?;
            let m = parse_count(hline, header[3], "edge count")?;
            let k = parse_count(hline, header[4], "link count")?;
            (false, n, m, k)
        }
        _ => return Err(ParseError::new(hline, "malformed problem line")),
    };
    if node_count == 0 {
        return Err(ParseError::new(hline, "node count must be positive"));
    }
    let mut edges = Vec::with_capacity(edge_count);
    let mut links = Vec::with_capacity(link_count);
    let mut last_line = hline;
    for (line, fields) in lines {
        last_line = line;
        match fields[0] {
            "e" => {
                if edges.len() == edge_count {
                    let noun = if is_tap { "tree edges" } else { "edges" };
                    return Err(ParseError::new(
                        line,
                        format!("expected {edge_count} {noun}"),
                    ));
                }
                edges.push(parse_pair(line, &fields, node_count)?);
            }
            "l" => {
                if links.len() == link_count {
                    return Err(ParseError::new(
                        line,
                        format!("expected {link_count} links"),
                    ));
                }
                let (u, v) = parse_pair(line, &fields, node_count)?;
                if u == v {
                    return Err(ParseError::new(line, "self-loop link"));
                }
                links.push((u, v));
            }
            "p" => return Err(ParseError::new(line, "duplicate problem line")),
            other => {
                return Err(ParseError::new(
                    line,
                    format!("unknown line type '{other}'"),
                ))
            }
        }
    }
    if edges.len() != edge_count {
        let noun = if is_tap { "tree edges" } else { "edges" };
        return Err(ParseError::new(
            last_line,
            format!("expected {edge_count} {noun}, found {}", edges.len()),
        ));
    }
    if links.len() != link_count {
        return Err(ParseError::new(
            last_line,
            format!("expected {link_count} links, found {}", links.len()),
        ));
    }
    if is_tap {
        if !spans(node_count, &edges) {
            return Err(ParseError::new(
                last_line,
                "tree edges do not form a spanning tree",
            ));
        }
        let inst = Instance::new(node_count, edges, links)
            .map_err(|e| ParseError::new(last_line, e.to_string()))?;
        Ok(Problem::Tap(inst))
    } else {
        Ok(Problem::Graph(GraphInput {
            node_count,
            edges,
            links,
        }))
    }
}

/// Parses a `p tap` file, rejecting `p graph` input.
pub fn parse_instance(text: &str) -> std::result::Result<Instance, ParseError> {
    match parse_problem(text)? {
        Problem::Tap(inst) => Ok(inst),
        Problem::Graph(_) => Err(ParseError::new(1, "expected 'p tap' instance")),
    }
}

/// Parses an `s tap` solution into 0-based endpoint pairs.
pub fn parse_solution(
    text: &str,
    node_count: usize,
) -> std::result::Result<Vec<(usize, usize)>, ParseError> {
    let mut lines = Lines::new(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "missing solution line"))?;
    if header.len() != 3 || header[0] != "s" || header[1] != "tap" {
        return Err(ParseError::new(hline, "expected 's tap <size>'"));
    }
    let size = parse_count(hline, header[2], "solution size")?;
    let mut pairs = Vec::with_capacity(size);
    let mut last_line = hline;
    for (line, fields) in lines {
        last_line = line;
        if fields[0] != "l" {
            return Err(ParseError::new(
                line,
                format!("unknown line type '{}'", fields[0]),
            ));
        }
        if pairs.len() == size {
            return Err(ParseError::new(line, format!("expected {size} links")));
        }
        pairs.push(parse_pair(line, &fields, node_count)?);
    }
    if pairs.len() != size {
        return Err(ParseError::new(
            last_line,
            format!("expected {size} links, found {}", pairs.len()),
        ));
    }
    Ok(pairs)
}

/// Output of [`reduce_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub instance: Instance,
    /// Tree node of every input node.
    pub node_map: Vec<usize>,
    /// Input link index of every instance link.
    pub link_origin: Vec<usize>,
}

/// Contracts the 2-edge-connected components of `g` into single nodes.
///
/// Components are numbered by their smallest input node, bridges become tree
/// edges in input order, and links are remapped with self-loops dropped and
/// parallels collapsed onto the lowest input index.
pub fn reduce_graph(g: &GraphInput) -> Result<Reduction> {
    let n = g.node_count;
    let bridges = find_bridges(n, &g.edges);
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in g.edges.iter().enumerate() {
        if !bridges[i] && u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = comps;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if comp[y] == usize::MAX {
                    comp[y] = comps;
                    stack.push(y);
                }
            }
        }
        comps += 1;
    }
    let tree_edges: Vec<(usize, usize)> = g
        .edges
        .iter()
        .zip(&bridges)
        .filter(|(_, &b)| b)
        .map(|(&(u, v), _)| (comp[u], comp[v]))
        .collect();
    if tree_edges.len() + 1 != comps {
        return Err(TapError::Disconnected);
    }
    let mut seen = HashSet::new();
    let mut links = Vec::new();
    let mut link_origin = Vec::new();
    for (i, &(u, v)) in g.links.iter().enumerate() {
        let (a, b) = (comp[u], comp[v]);
        if a != b && seen.insert(ordered(a, b)) {
            links.push((a, b));
            link_origin.push(i);
        }
    }
    let instance = Instance::new(comps, tree_edges, links)?;
    Ok(Reduction {
        instance,
        node_map: comp,
        link_origin,
    })
}

/// Marks the bridges of a multigraph (parallel edges are never bridges).
pub fn find_bridges(node_count: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); node_count];
    for (i, &(u, v)) in edges.iter().enumerate() {
        if u != v {
            adj[u].push((v, i));
            adj[v].push((u, i));
        }
    }
    let mut is_bridge = vec![false; edges.len()];
    let mut disc = vec![usize::MAX; node_count];
    let mut low = vec![0; node_count];
    let mut clock = 0;
    for start in 0..node_count {
        if disc[start] != usize::MAX {
            continue;
        }
        disc[start] = clock;
        low[start] = clock;
        clock += 1;
        // (node, edge used to enter it, next adjacency position)
        let mut stack = vec![(start, usize::MAX, 0usize)];
        while let Some(&mut (x, via, ref mut pos)) = stack.last_mut() {
            if let Some(&(y, e)) = adj[x].get(*pos) {
                *pos += 1;
                if e == via {
                    continue;
                }
                if disc[y] == usize::MAX {
                    disc[y] = clock;
                    low[y] = clock;
                    clock += 1;
                    stack.push((y, e, 0));
                } else {
                    low[x] = low[x].min(disc[y]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[x]);
                    if low[x] > disc[p] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Tree shapes produced by [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeModel {
    /// Each node picks a uniformly random parent among the earlier nodes.
    Random,
    Star,
    Caterpillar,
    /// Complete binary tree in heap order.
    Binary,
}

impl TreeModel {
    pub const ALL: [TreeModel; 4] = [
        TreeModel::Random,
        TreeModel::Star,
        TreeModel::Caterpillar,
        TreeModel::Binary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TreeModel::Random => "random",
            TreeModel::Star => "star",
            TreeModel::Caterpillar => "caterpillar",
            TreeModel::Binary => "binary",
        }
    }
}

impl std::str::FromStr for TreeModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        TreeModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown tree model '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub nodes: usize,
    pub extra_link_count: usize,
    pub model: TreeModel,
    pub ensure_feasible: bool,
}

/// Deterministic random instance for `(params, seed)`.
pub fn generate(params: &GenParams, seed: u64) -> Instance {
    let n = params.nodes.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parent: Vec<usize> = match params.model {
        TreeModel::Random => std::iter::once(0)
            .chain((1..n).map(|i| rng.gen_range(0..i)))
            .collect(),
        TreeModel::Star => vec![0; n],
        TreeModel::Binary => (0..n).map(|i| i.saturating_sub(1) / 2).collect(),
        TreeModel::Caterpillar => {
            let spine = (n / 2).max(2).min(n);
            (0..n)
                .map(|i| match i {
                    0 => 0,
                    i if i < spine => i - 1,
                    _ => rng.gen_range(0..spine),
                })
                .collect()
        }
    };
    let tree_edges: Vec<(usize, usize)> = (1..n).map(|i| (parent[i], i)).collect();

    let max_pairs = n * (n - 1) / 2;
    let target = params.extra_link_count.min(max_pairs);
    let mut seen = HashSet::new();
    let mut links = Vec::new();
    let mut attempts = 0;
    while links.len() < target && attempts < 20 * target + 20 {
        attempts += 1;
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert(ordered(u, v)) {
            links.push((u, v));
        }
    }

    if params.ensure_feasible {
        repair(n, &parent, &mut links, &mut rng);
    }
    Instance::new(n, tree_edges, links).expect("generated instances are valid")
}

/// For every uncovered tree edge (parent[c], c), in order of c, adds a link
/// from a random leaf below c to a random node outside c's subtree.
fn repair(n: usize, parent: &[usize], links: &mut Vec<(usize, usize)>, rng: &mut ChaCha8Rng) {
    // parent[i] < i for every generator model, so ancestors precede descendants.
    let mut children = vec![Vec::new(); n];
    for c in 1..n {
        children[parent[c]].push(c);
    }
    let mut depth = vec![0; n];
    for c in 1..n {
        depth[c] = depth[parent[c]] + 1;
    }
    let subtree = |c: usize| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = vec![c];
        while let Some(x) = stack.pop() {
            out.insert(x);
            stack.extend(&children[x]);
        }
        out
    };
    let mut covered = vec![false; n];
    let mark = |u: usize, v: usize, covered: &mut Vec<bool>| {
        let (mut a, mut b) = (u, v);
        while a != b {
            if depth[a] < depth[b] {
                std::mem::swap(&mut a, &mut b);
            }
            covered[a] = true;
            a = parent[a];
        }
    };
    for &(u, v) in links.iter() {
        mark(u, v, &mut covered);
    }
    for c in 1..n {
        if covered[c] {
            continue;
        }
        let below = subtree(c);
        let leaves: Vec<usize> = below
            .iter()
            .copied()
            .filter(|&x| children[x].is_empty())
            .collect();
        let outside: Vec<usize> = (0..n).filter(|x| !below.contains(x)).collect();
        let leaf = *leaves.choose(rng).expect("every subtree has a leaf");
        let other = *outside.choose(rng).expect("the root lies outside");
        links.push((leaf, other));
        mark(leaf, other, &mut covered);
    }
}

/// Maps instance-level link indices back to a graph's input links.
pub fn origin_pairs(g: &GraphInput, red: &Reduction, links: &[usize]) -> Vec<(usize, usize)> {
    links.iter().map(|&i| g.links[red.link_origin[i]]).collect()
}

/// Lookup from unordered pair to link index.
pub fn link_lookup(inst: &Instance) -> HashMap<(usize, usize), usize> {
    inst.links()
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| (ordered(u, v), i))
        .collect()
}
