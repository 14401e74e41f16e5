//! Undirected simple graphs in compressed adjacency form.
//!
//! Vertex ids are dense `u32` indices in `[0, n)`. Every neighbor list is
//! sorted ascending, which keeps every traversal in this crate deterministic.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

pub type VertexId = u32;

const MAX_VERTICES: usize = i32::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    /// External id of each internal vertex, when the graph was loaded from
    /// (or derived from) a labelled source.
    labels: Option<Vec<u64>>,
}

/// Counts of input lines the loader discarded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadDiagnostics {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Build a simple graph on `n` vertices. Self-loops and repeated pairs
    /// (in either orientation) are dropped and counted.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<(Self, LoadDiagnostics)> {
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices(n));
        }
        let mut diag = LoadDiagnostics::default();
        let mut pairs: Vec<(VertexId, VertexId)> = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::config(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                diag.self_loops += 1;
                continue;
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        diag.duplicates = before - pairs.len();

        let mut degree = vec![0usize; n];
        for &(u, v) in &pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0 as VertexId; 2 * pairs.len()];
        // Pairs are sorted by (min, max): appending in that order leaves each
        // list sorted for the smaller endpoint, but not for the larger one.
        for &(u, v) in &pairs {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok((
            Graph {
                offsets,
                neighbors,
                labels: None,
            },
            diag,
        ))
    }

    pub fn empty() -> Self {
        Graph {
            offsets: vec![0],
            neighbors: Vec::new(),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<u64>) -> Self {
        assert_eq!(labels.len(), self.n());
        self.labels = Some(labels);
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[VertexId] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as VertexId)).is_ok()
    }

    pub fn labels(&self) -> Option<&[u64]> {
        self.labels.as_deref()
    }

    /// External id of internal vertex `v` (the internal id when unlabelled).
    pub fn label(&self, v: usize) -> u64 {
        self.labels.as_ref().map_or(v as u64, |l| l[v])
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| (v as usize) > u)
                .map(move |v| (u as VertexId, v))
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || connected_components(self).component_sizes.len() == 1
    }

    /// Write the graph as a `u v` edge list using external labels.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{} {}", self.label(u as usize), self.label(v as usize))?;
        }
        Ok(())
    }
}

/// Parse a whitespace-separated edge list. `#` starts a comment line; blank
/// lines are skipped. External ids are remapped to `[0, n)` in order of first
/// appearance and kept as labels.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadDiagnostics)> {
    let mut ids: HashMap<u64, VertexId> = HashMap::new();
    let mut labels: Vec<u64> = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64> {
            let tok = toks.next().ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected two vertex ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("malformed vertex id {tok:?}"),
            })
        };
        let a = next_id()?;
        let b = next_id()?;
        let mut intern = |x: u64| -> Result<VertexId> {
            if let Some(&id) = ids.get(&x) {
                return Ok(id);
            }
            if labels.len() >= MAX_VERTICES {
                return Err(Error::TooManyVertices(labels.len() + 1));
            }
            let id = labels.len() as VertexId;
            ids.insert(x, id);
            labels.push(x);
            Ok(id)
        };
        let (u, v) = (intern(a)?, intern(b)?);
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let (g, diag) = Graph::from_edges(labels.len(), edges)?;
    Ok((g.with_labels(labels), diag))
}

pub fn load_edge_list_file(path: &std::path::Path) -> Result<(Graph, LoadDiagnostics)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_edge_list(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub component_id: Vec<usize>,
    pub component_sizes: Vec<usize>,
    pub lcc_index: usize,
}

/// Label components by BFS from the lowest unvisited vertex, so component
/// indices increase with their smallest member.
pub fn connected_components(g: &Graph) -> ComponentLabeling {
    let n = g.n();
    let mut component_id = vec![usize::MAX; n];
    let mut component_sizes = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        if component_id[s] != usize::MAX {
            continue;
        }
        let c = component_sizes.len();
        component_id[s] = c;
        queue.push_back(s);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                let w = w as usize;
                if component_id[w] == usize::MAX {
                    component_id[w] = c;
                    queue.push_back(w);
                }
            }
        }
        component_sizes.push(size);
    }
    // max_by_key keeps the last maximum; scan manually to keep the first.
    let mut lcc_index = 0;
    for (i, &s) in component_sizes.iter().enumerate() {
        if s > component_sizes[lcc_index] {
            lcc_index = i;
        }
    }
    ComponentLabeling {
        component_id,
        component_sizes,
        lcc_index,
    }
}

/// Subgraph induced on the largest connected component. Vertices keep their
/// relative order; labels compose so external ids survive.
pub fn largest_connected_component(g: &Graph) -> Graph {
    if g.n() == 0 {
        return Graph::empty();
    }
    let comps = connected_components(g);
    if comps.component_sizes.len() == 1 {
        return g.clone();
    }
    let keep: Vec<usize> = (0..g.n())
        .filter(|&v| comps.component_id[v] == comps.lcc_index)
        .collect();
    induced_subgraph(g, &keep)
}

/// Subgraph induced on `keep` (ascending internal ids).
pub fn induced_subgraph(g: &Graph, keep: &[usize]) -> Graph {
    let mut new_id = vec![VertexId::MAX; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        new_id[v] = i as VertexId;
    }
    let edges = keep.iter().flat_map(|&u| {
        let new_id = &new_id;
        g.neighbors(u)
            .iter()
            .filter(move |&&w| (w as usize) > u && new_id[w as usize] != VertexId::MAX)
            .map(move |&w| (new_id[u], new_id[w as usize]))
    });
    let (sub, _) = Graph::from_edges(keep.len(), edges.collect::<Vec<_>>())
        .expect("induced subgraph of a valid graph is valid");
    let labels = keep.iter().map(|&v| g.label(v)).collect();
    sub.with_labels(labels)
}

/// Number of triangles, each counted once.
pub fn triangle_count(g: &Graph) -> u64 {
    let mut count = 0u64;
    for u in 0..g.n() {
        let nu = g.neighbors(u);
        let hi_u = nu.partition_point(|&x| (x as usize) <= u);
        for &v in &nu[hi_u..] {
            let nv = g.neighbors(v as usize);
            let hi_v = nv.partition_point(|&x| x <= v);
            count += sorted_intersection_len(&nu[hi_u..], &nv[hi_v..]) as u64;
        }
    }
    count
}

fn sorted_intersection_len(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Global clustering coefficient: 3 × triangles / connected triples, or 0
/// when the graph has no connected triple.
pub fn global_clustering_coefficient(g: &Graph) -> f64 {
    let wedges: u64 = (0..g.n())
        .map(|v| {
            let d = g.degree(v) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if wedges == 0 {
        return 0.0;
    }
    3.0 * triangle_count(g) as f64 / wedges as f64
}

/// Printable load summary.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub dropped_self_loops: usize,
    pub dropped_duplicates: usize,
    pub lcc_n: usize,
    pub lcc_fraction: f64,
}

impl GraphSummary {
    pub fn new(g: &Graph, diag: LoadDiagnostics) -> Self {
        let lcc_n = if g.n() == 0 {
            0
        } else {
            let c = connected_components(g);
            c.component_sizes[c.lcc_index]
        };
        GraphSummary {
            n: g.n(),
            m: g.m(),
            dropped_self_loops: diag.self_loops,
            dropped_duplicates: diag.duplicates,
            lcc_n,
            lcc_fraction: if g.n() == 0 {
                0.0
            } else {
                lcc_n as f64 / g.n() as f64
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> Result<(Graph, LoadDiagnostics)> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn path_of_three() {
        let (g, _) = load("0 1\n1 2\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 2));
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn self_loop_dropped_and_counted() {
        let (g, d) = load("5 5\n5 7\n").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
        assert_eq!(d.self_loops, 1);
        assert_eq!(g.labels().unwrap(), &[5, 7]);
    }

    #[test]
    fn duplicates_in_both_orientations() {
        let (g, d) = load("1 2\n2 1\n1 2\n").unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(d.duplicates, 2);
    }

    #[test]
    fn malformed_token_reports_line() {
        match load("a b") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match load("# header\n0 1\n2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(load("7\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_input() {
        assert!(matches!(load(""), Err(Error::NoEdges)));
        assert!(matches!(load("# only a comment\n\n"), Err(Error::NoEdges)));
    }

    #[test]
    fn offsets_invariants() {
        let (g, _) = load("0 1\n0 2\n0 3\n2 3\n").unwrap();
        assert_eq!(*g.offsets().last().unwrap(), 2 * g.m());
        for v in 0..g.n() {
            assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
            for &w in g.neighbors(v) {
                assert!(g.has_edge(w as usize, v));
            }
        }
    }

    #[test]
    fn lcc_picks_triangle() {
        let (g, _) = load("0 1\n2 3\n4 5\n5 6\n6 4\n").unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!((lcc.n(), lcc.m()), (3, 3));
        assert_eq!(lcc.labels().unwrap(), &[4, 5, 6]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let (g, _) = load("0 1\n1 2\n2 3\n").unwrap();
        assert_eq!(largest_connected_component(&g), g);
    }

    #[test]
    fn lcc_tie_goes_to_lowest_internal_id() {
        let (g, _) = load("10 11\n20 21\n").unwrap();
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.labels().unwrap(), &[10, 11]);
        assert_eq!(largest_connected_component(&Graph::empty()).n(), 0);
    }

    #[test]
    fn lcc_labels_compose() {
        let (g, _) = load("9 8\n1 2\n2 3\n3 1\n").unwrap();
        let lcc = largest_connected_component(&g);
        let again = largest_connected_component(&lcc);
        assert_eq!(again.labels().unwrap(), &[1, 2, 3]);
    }

    #[test]
    fn clustering_small_cases() {
        let (k3, _) = load("0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(global_clustering_coefficient(&k3), 1.0);
        let (p3, _) = load("0 1\n1 2\n").unwrap();
        assert_eq!(global_clustering_coefficient(&p3), 0.0);
        let (single, _) = load("0 1\n").unwrap();
        assert_eq!(global_clustering_coefficient(&single), 0.0);
    }

    #[test]
    fn clustering_k4_minus_edge() {
        // Brute force over all vertex triples: a triple contributes one
        // connected triple per center adjacent to both others, and a closed
        // triple contributes 3 of them.
        let (g, _) = load("0 1\n0 2\n0 3\n1 2\n1 3\n").unwrap();
        let mut closed = 0;
        let mut connected = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                for c in b + 1..4 {
                    let e = [g.has_edge(a, b), g.has_edge(b, c), g.has_edge(a, c)];
                    let k = e.iter().filter(|&&x| x).count();
                    if k == 3 {
                        closed += 3;
                        connected += 3;
                    } else if k == 2 {
                        connected += 1;
                    }
                }
            }
        }
        let oracle = closed as f64 / connected as f64;
        assert_eq!(oracle, 0.75);
        assert_eq!(global_clustering_coefficient(&g), oracle);
    }
}
