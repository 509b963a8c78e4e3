//! Undirected simple graphs, BFS hop distances, components, descriptive
//! statistics and the plain-text edge-list format.
//!
//! Edge-list files are ASCII, one `u v` pair per line. Lines starting with
//! `#` are comments; the writer emits a `# nodes N` header so isolated
//! trailing nodes survive a round trip, and the reader honours it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: node {node} exceeds declared node count {declared}")]
    InconsistentNodeCount {
        line: usize,
        node: usize,
        declared: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![BTreeSet::new(); n],
            edge_count: 0,
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::new(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_unchecked(u, v);
            }
        }
        g
    }

    /// Ring lattice where each node links to its `k/2` nearest neighbours on each side.
    pub fn ring_lattice(n: usize, k: usize) -> Self {
        let mut g = Self::new(n);
        for j in 1..=k / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if u != v && !g.has_edge(u, v) {
                    g.insert_unchecked(u, v);
                }
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.insert_unchecked(u, v);
        Ok(())
    }

    pub(crate) fn insert_unchecked(&mut self, u: usize, v: usize) {
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.edge_count += 1;
    }

    /// Removes an edge, returning whether it was present.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if u >= self.node_count() || v >= self.node_count() {
            return false;
        }
        let removed = self.adj[u].remove(&v);
        if removed {
            self.adj[v].remove(&u);
            self.edge_count -= 1;
        }
        removed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|s| s.contains(&v))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().copied()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(BTreeSet::len).collect()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.range(u + 1..).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `nodes`, relabelled to `0..nodes.len()` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut g = Graph::new(nodes.len());
        for (new_u, &old_u) in nodes.iter().enumerate() {
            for old_v in self.neighbors(old_u) {
                let new_v = index[old_v];
                if new_v != usize::MAX && new_u < new_v {
                    g.insert_unchecked(new_u, new_v);
                }
            }
        }
        g
    }
}

/// All-pairs hop counts. Unreachable pairs are stored as `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    hops: Vec<u32>,
}

const UNREACHABLE: u32 = u32::MAX;

impl DistanceMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        match self.hops[i * self.n + j] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn is_reachable(&self, i: usize, j: usize) -> bool {
        self.hops[i * self.n + j] != UNREACHABLE
    }

    pub fn all_reachable(&self) -> bool {
        self.hops.iter().all(|&d| d != UNREACHABLE)
    }

    /// Builds a matrix from explicit entries; used for testing embeddings on
    /// metrics that do not come from a graph.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Option<u32>) -> Self {
        let mut hops = vec![UNREACHABLE; n * n];
        for i in 0..n {
            for j in 0..n {
                hops[i * n + j] = f(i, j).unwrap_or(UNREACHABLE);
            }
        }
        Self { n, hops }
    }
}

fn bfs(g: &Graph, source: usize, out: &mut [u32]) {
    out.fill(UNREACHABLE);
    out[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let next = out[u] + 1;
        for v in g.neighbors(u) {
            if out[v] == UNREACHABLE {
                out[v] = next;
                queue.push_back(v);
            }
        }
    }
}

pub fn shortest_paths(g: &Graph) -> DistanceMatrix {
    let n = g.node_count();
    let mut hops = vec![UNREACHABLE; n * n];
    for (source, row) in hops.chunks_mut(n.max(1)).enumerate().take(n) {
        bfs(g, source, row);
    }
    DistanceMatrix { n, hops }
}

/// Connected components, each sorted ascending, ordered by smallest member.
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    members.push(v);
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Induced subgraph on the largest connected component.
///
/// Returns the subgraph and the map from new node ids to original ids
/// (ascending). Ties go to the component with the smallest node id.
pub fn largest_component(g: &Graph) -> (Graph, Vec<usize>) {
    let mut best: Vec<usize> = Vec::new();
    for comp in connected_components(g) {
        if comp.len() > best.len() {
            best = comp;
        }
    }
    (g.induced_subgraph(&best), best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub degrees: Vec<usize>,
    pub average_clustering: f64,
    /// Mean hop distance over ordered pairs of distinct nodes in the largest component.
    pub mean_path_length: f64,
}

/// Local clustering coefficient; nodes of degree below two count as zero.
pub fn local_clustering(g: &Graph, u: usize) -> f64 {
    let k = g.degree(u);
    if k < 2 {
        return 0.0;
    }
    let nb: Vec<usize> = g.neighbors(u).collect();
    let mut links = 0usize;
    for (a, &v) in nb.iter().enumerate() {
        for &w in &nb[a + 1..] {
            if g.has_edge(v, w) {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (k * (k - 1)) as f64
}

pub fn average_clustering(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    (0..n).map(|u| local_clustering(g, u)).sum::<f64>() / n as f64
}

pub fn descriptive_stats(g: &Graph) -> GraphStats {
    let (core, _) = largest_component(g);
    let m = core.node_count();
    let mean_path_length = if m < 2 {
        0.0
    } else {
        let d = shortest_paths(&core);
        let total: u64 = d.hops.iter().map(|&h| h as u64).sum();
        total as f64 / (m * (m - 1)) as f64
    };
    GraphStats {
        degrees: g.degrees(),
        average_clustering: average_clustering(g),
        mean_path_length,
    }
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes {}", g.node_count());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("nodes") {
                let count = words.next().and_then(|w| w.parse::<usize>().ok());
                match (count, words.next()) {
                    (Some(c), None) if declared.is_none() => declared = Some(c),
                    (Some(_), None) => {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: "repeated node-count header".into(),
                        })
                    }
                    _ => {
                        return Err(GraphError::Parse {
                            line: line_no,
                            message: format!("malformed node-count header {line:?}"),
                        })
                    }
                }
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut next_id = || -> Result<usize, GraphError> {
            let word = fields.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            })?;
            word.parse::<usize>().map_err(|_| GraphError::Parse {
                line: line_no,
                message: format!("invalid node id {word:?}"),
            })
        };
        let u = next_id()?;
        let v = next_id()?;
        if fields.next().is_some() {
            return Err(GraphError::Parse {
                line: line_no,
                message: "expected exactly two node ids".into(),
            });
        }
        edges.push((line_no, u, v));
    }

    let n = match declared {
        Some(n) => n,
        None => edges
            .iter()
            .map(|&(_, u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0),
    };
    let mut g = Graph::new(n);
    for (line, u, v) in edges {
        if let Some(declared) = declared {
            let node = u.max(v);
            if node >= declared {
                return Err(GraphError::InconsistentNodeCount {
                    line,
                    node,
                    declared,
                });
            }
        }
        g.add_edge(u, v).map_err(|e| match e {
            GraphError::SelfLoop(_) | GraphError::DuplicateEdge(..) => GraphError::Parse {
                line,
                message: e.to_string(),
            },
            other => other,
        })?;
    }
    Ok(g)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph, GraphError> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn graph_rejects_bad_edges() {
        let mut g = Graph::new(3);
        assert!(matches!(g.add_edge(1, 1), Err(GraphError::SelfLoop(1))));
        g.add_edge(0, 2).unwrap();
        assert!(matches!(
            g.add_edge(2, 0),
            Err(GraphError::DuplicateEdge(0, 2))
        ));
        assert!(matches!(
            g.add_edge(0, 3),
            Err(GraphError::NodeOutOfRange { node: 3, n: 3 })
        ));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn shortest_path_examples() {
        let d = shortest_paths(&path3());
        assert_eq!(d.get(0, 2), Some(2));
        assert_eq!(d.get(2, 0), Some(2));
        assert_eq!(d.get(1, 1), Some(0));

        let d = shortest_paths(&Graph::complete(5));
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(d.get(i, j), Some(u32::from(i != j)));
            }
        }

        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let d = shortest_paths(&g);
        assert_eq!(d.get(0, 1), Some(1));
        assert!(!d.is_reachable(0, 2));
        assert!(!d.is_reachable(3, 1));
        assert!(!d.all_reachable());
    }

    #[test]
    fn shortest_paths_of_empty_graph() {
        let d = shortest_paths(&Graph::new(0));
        assert_eq!(d.size(), 0);
        assert!(d.all_reachable());
    }

    #[test]
    fn largest_component_examples() {
        let g = path3();
        let (h, map) = largest_component(&g);
        assert_eq!(h, g);
        assert_eq!(map, vec![0, 1, 2]);

        let g = Graph::from_edges(4, [(1, 2), (2, 3), (1, 3)]).unwrap();
        let (h, map) = largest_component(&g);
        assert_eq!(h, Graph::complete(3));
        assert_eq!(map, vec![1, 2, 3]);

        // component {0,1,2} of size 3 and {3..7} of size 5
        let g = Graph::from_edges(8, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6), (6, 7)]).unwrap();
        let (h, map) = largest_component(&g);
        assert_eq!(h.node_count(), 5);
        assert_eq!(map, vec![3, 4, 5, 6, 7]);
    }

    #[test]
    fn largest_component_tie_prefers_smallest_id() {
        let g = Graph::from_edges(5, [(3, 4), (0, 2)]).unwrap();
        let (_, map) = largest_component(&g);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(average_clustering(&Graph::complete(3)), 1.0);
        let star = Graph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(average_clustering(&star), 0.0);
        let stats = descriptive_stats(&star);
        assert_eq!(stats.degrees, vec![4, 1, 1, 1, 1]);
        // 8 ordered pairs at distance 1, 12 at distance 2
        assert!((stats.mean_path_length - 32.0 / 20.0).abs() < 1e-12);
    }

    /// Counts triangles through each node by brute force over node triples.
    fn brute_force_clustering(g: &Graph) -> f64 {
        let n = g.node_count();
        let mut total = 0.0;
        for u in 0..n {
            let k = g.degree(u);
            if k < 2 {
                continue;
            }
            let mut t = 0usize;
            for v in 0..n {
                for w in v + 1..n {
                    if g.has_edge(u, v) && g.has_edge(u, w) && g.has_edge(v, w) {
                        t += 1;
                    }
                }
            }
            total += t as f64 / (k * (k - 1) / 2) as f64;
        }
        total / n as f64
    }

    #[test]
    fn ring_lattice_clustering_matches_closed_form() {
        let g = Graph::ring_lattice(85, 40);
        assert_eq!(g.edge_count(), 1700);
        assert!(g.degrees().iter().all(|&d| d == 40));
        let brute = brute_force_clustering(&g);
        let closed = 3.0 * 38.0 / (4.0 * 39.0);
        assert!((brute - closed).abs() < 1e-12);
        assert!((closed - 0.7308).abs() < 1e-4);
        assert!((descriptive_stats(&g).average_clustering - brute).abs() < 1e-12);
    }

    #[test]
    fn parse_examples() {
        let g = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(g, path3());

        match parse_edge_list("0 0\n") {
            Err(GraphError::Parse { line: 1, message }) => assert!(message.contains("self-loop")),
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("# hello\n0 1\n1 0\n") {
            Err(GraphError::Parse { line: 3, message }) => assert!(message.contains("duplicate")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("0 1\nx 2\n"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 2\n"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("# nodes 3\n0 1\n2 3\n"),
            Err(GraphError::InconsistentNodeCount {
                line: 3,
                node: 3,
                declared: 3
            })
        ));
    }

    #[test]
    fn header_preserves_isolated_nodes() {
        let g = Graph::from_edges(6, [(0, 1)]).unwrap();
        let text = format_edge_list(&g);
        assert_eq!(text, "# nodes 6\n0 1\n");
        assert_eq!(parse_edge_list(&text).unwrap(), g);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..30).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..80).prop_map(move |pairs| {
                let mut g = Graph::new(n);
                for (u, v) in pairs {
                    if u != v && !g.has_edge(u, v) {
                        g.add_edge(u, v).unwrap();
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(g in arb_graph()) {
            let back = parse_edge_list(&format_edge_list(&g)).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn hop_distances_are_a_metric(g in arb_graph()) {
            let d = shortest_paths(&g);
            let n = g.node_count();
            for i in 0..n {
                prop_assert_eq!(d.get(i, i), Some(0));
                for j in 0..n {
                    prop_assert_eq!(d.get(i, j), d.get(j, i));
                    prop_assert_eq!(d.get(i, j) == Some(1), g.has_edge(i, j));
                    for k in 0..n {
                        if let (Some(ij), Some(ik), Some(kj)) = (d.get(i, j), d.get(i, k), d.get(k, j)) {
                            prop_assert!(ij <= ik + kj);
                        }
                    }
                }
            }
        }
    }
}
