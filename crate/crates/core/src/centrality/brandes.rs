//! Merged betweenness/closeness pass: one BFS plus dependency accumulation
//! per source vertex.

use super::{CentralityScores, Metric};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::par;

/// Sources per work unit. Partial betweenness sums are merged chunk by
/// chunk in ascending order, so this constant (not the worker count) fixes
/// the floating-point summation order.
pub const SOURCE_CHUNK: usize = 32;

/// Reusable single-source shortest-path state.
///
/// After [`SourceState::run`], `dist`, `sigma` and `order` describe the BFS
/// DAG rooted at `source`, and `delta` holds the dependency of the source on
/// every vertex. Predecessors are not stored: `p` precedes `w` exactly when
/// they are adjacent and `dist[p] + 1 == dist[w]`.
#[derive(Debug, Clone)]
pub struct SourceState {
    pub source: usize,
    pub dist: Vec<i32>,
    pub sigma: Vec<f64>,
    pub order: Vec<VertexId>,
    pub delta: Vec<f64>,
}

impl SourceState {
    pub fn new(n: usize) -> Self {
        SourceState {
            source: 0,
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            order: Vec::with_capacity(n),
            delta: vec![0.0; n],
        }
    }

    /// Run BFS and dependency accumulation from `source`. Returns the sum of
    /// distances to every reached vertex.
    pub fn run(&mut self, g: &Graph, source: usize) -> u64 {
        self.source = source;
        self.dist.fill(-1);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.order.clear();

        self.dist[source] = 0;
        self.sigma[source] = 1.0;
        self.order.push(source as VertexId);
        let mut head = 0;
        let mut farness = 0u64;
        while head < self.order.len() {
            let v = self.order[head] as usize;
            head += 1;
            let dv = self.dist[v];
            farness += dv as u64;
            let sv = self.sigma[v];
            for &w in g.neighbors(v) {
                let w = w as usize;
                if self.dist[w] < 0 {
                    self.dist[w] = dv + 1;
                    self.order.push(w as VertexId);
                }
                if self.dist[w] == dv + 1 {
                    self.sigma[w] += sv;
                }
            }
        }

        for &w in self.order.iter().rev() {
            let w = w as usize;
            let dw = self.dist[w];
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in g.neighbors(w) {
                let v = v as usize;
                if self.dist[v] == dw - 1 {
                    self.delta[v] += self.sigma[v] * coeff;
                }
            }
        }
        farness
    }

    pub fn reached(&self) -> usize {
        self.order.len()
    }
}

struct ChunkPartial {
    betweenness: Vec<f64>,
    farness: Vec<(usize, u64)>,
}

fn accumulate_sources(g: &Graph, sources: &[usize]) -> Result<ChunkPartial> {
    let n = g.n();
    let mut state = SourceState::new(n);
    let mut betweenness = vec![0.0; n];
    let mut farness = Vec::with_capacity(sources.len());
    for &s in sources {
        let f = state.run(g, s);
        if state.reached() != n {
            return Err(Error::NotConnected);
        }
        for (v, (&d, b)) in state.delta.iter().zip(betweenness.iter_mut()).enumerate() {
            if v != s {
                *b += d;
            }
        }
        farness.push((s, f));
    }
    Ok(ChunkPartial {
        betweenness,
        farness,
    })
}

fn merged_pass(g: &Graph, workers: usize) -> Result<(Vec<f64>, Vec<u64>)> {
    let n = g.n();
    let sources: Vec<usize> = (0..n).collect();
    par::with_workers(workers, || {
        par::ordered_chunk_fold(
            n,
            SOURCE_CHUNK,
            Ok((vec![0.0; n], vec![0u64; n])),
            |range| accumulate_sources(g, &sources[range]),
            |acc: Result<(Vec<f64>, Vec<u64>)>, part| {
                let (mut bc, mut far) = acc?;
                let part = part?;
                for (a, b) in bc.iter_mut().zip(&part.betweenness) {
                    *a += b;
                }
                for (s, f) in part.farness {
                    far[s] = f;
                }
                Ok((bc, far))
            },
        )
    })
    .map(|(mut bc, far)| {
        // Each unordered pair was accumulated from both endpoints.
        bc.iter_mut().for_each(|b| *b *= 0.5);
        (bc, far)
    })
}

/// Exact betweenness (each unordered pair counted once) and closeness
/// `1 / Σ_i d(i, w)` of a connected graph.
pub fn betweenness_closeness(
    g: &Graph,
    workers: usize,
) -> Result<(CentralityScores, CentralityScores)> {
    if g.n() == 1 {
        return Err(Error::ClosenessUndefined);
    }
    if g.n() == 0 {
        return Err(Error::config("empty graph"));
    }
    let (bc, far) = merged_pass(g, workers)?;
    Ok((
        CentralityScores {
            metric: Metric::Betweenness,
            values: bc,
        },
        CentralityScores {
            metric: Metric::Closeness,
            values: far.into_iter().map(|f| 1.0 / f as f64).collect(),
        },
    ))
}

/// Exact betweenness alone; defined (all zero) for a single vertex.
pub fn betweenness(g: &Graph, workers: usize) -> Result<CentralityScores> {
    if g.n() <= 1 {
        return Ok(CentralityScores {
            metric: Metric::Betweenness,
            values: vec![0.0; g.n()],
        });
    }
    let (bc, _) = merged_pass(g, workers)?;
    Ok(CentralityScores {
        metric: Metric::Betweenness,
        values: bc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap().0
    }

    #[test]
    fn path_of_three() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let (b, c) = betweenness_closeness(&g, 1).unwrap();
        assert_eq!(b.values, vec![0.0, 1.0, 0.0]);
        assert_eq!(c.values, vec![1.0 / 3.0, 0.5, 1.0 / 3.0]);
    }

    #[test]
    fn star_hub() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let (b, _) = betweenness_closeness(&g, 2).unwrap();
        assert_eq!(b.values[0], 6.0);
        assert!(b.values[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn four_cycle() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let (b, c) = betweenness_closeness(&g, 1).unwrap();
        assert_eq!(b.values, vec![0.5; 4]);
        assert_eq!(c.values, vec![0.25; 4]);
    }

    #[test]
    fn sigma_invariants_hold() {
        let g = graph(6, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (3, 5), (4, 5)]);
        let mut st = SourceState::new(6);
        st.run(&g, 0);
        assert_eq!(st.sigma[0], 1.0);
        assert_eq!(st.dist[0], 0);
        for w in 1..6 {
            let from_preds: f64 = g
                .neighbors(w)
                .iter()
                .filter(|&&p| st.dist[p as usize] + 1 == st.dist[w])
                .map(|&p| st.sigma[p as usize])
                .sum();
            assert_eq!(st.sigma[w], from_preds);
        }
        assert!(st.delta.iter().all(|&d| d >= 0.0));
        assert_eq!(st.sigma[3], 2.0);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            betweenness_closeness(&g, 1),
            Err(Error::NotConnected)
        ));
    }

    #[test]
    fn single_vertex() {
        let g = graph(1, &[]);
        assert!(matches!(
            betweenness_closeness(&g, 1),
            Err(Error::ClosenessUndefined)
        ));
        assert_eq!(betweenness(&g, 1).unwrap().values, vec![0.0]);
    }

    #[test]
    fn tree_betweenness_counts_separated_pairs() {
        // In a tree, removing w splits the other vertices into branches;
        // every pair in different branches has its unique path through w.
        let edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6), (5, 7)];
        let g = graph(8, &edges);
        let (b, _) = betweenness_closeness(&g, 1).unwrap();
        for w in 0..8 {
            let mut branch_sizes = Vec::new();
            for &start in g.neighbors(w) {
                let mut seen = vec![false; 8];
                seen[w] = true;
                let mut stack = vec![start as usize];
                seen[start as usize] = true;
                let mut size = 0;
                while let Some(v) = stack.pop() {
                    size += 1;
                    for &x in g.neighbors(v) {
                        if !seen[x as usize] {
                            seen[x as usize] = true;
                            stack.push(x as usize);
                        }
                    }
                }
                branch_sizes.push(size);
            }
            let total: usize = branch_sizes.iter().sum();
            let same: usize = branch_sizes.iter().map(|s| s * (s - 1) / 2).sum();
            let separated = total * (total - 1) / 2 - same;
            assert_eq!(b.values[w], separated as f64, "vertex {w}");
        }
    }
}
