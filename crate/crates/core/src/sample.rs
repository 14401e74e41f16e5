//! Source-sampling approximation of betweenness and closeness.
//!
//! Sources are drawn uniformly without replacement. For a vertex `v` let
//! `k_v` be the number of sampled sources other than `v`. Then
//!
//! * estimated farness is `(n - 1) / k_v · Σ_{s ∈ S} d(s, v)`,
//! * estimated betweenness is `½ · (n - 1) / k_v · Σ_{s ∈ S, s ≠ v} δ_s(v)`.
//!
//! Both are unbiased for every vertex and reduce to the exact values when
//! every vertex is sampled.

use rand::seq::SliceRandom;

use crate::centrality::{CentralityScores, Metric, SourceState, SOURCE_CHUNK};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::{par, seed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub fraction: f64,
    pub seed: u64,
    pub trials: usize,
}

impl SampleConfig {
    pub fn new(fraction: f64, seed: u64) -> Self {
        SampleConfig {
            fraction,
            seed,
            trials: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::config(format!(
                "sample fraction must be in (0, 1], got {}",
                self.fraction
            )));
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be positive"));
        }
        Ok(())
    }

    pub fn sample_size(&self, n: usize) -> usize {
        ((self.fraction * n as f64).round() as usize).clamp(1, n.max(1))
    }

    /// Config for trial `t`: the seed is derived from the base seed.
    pub fn trial(&self, t: usize) -> SampleConfig {
        SampleConfig {
            seed: seed::derive_seed(self.seed, t as u64),
            trials: 1,
            ..*self
        }
    }
}

/// Distinct vertices drawn uniformly without replacement (partial
/// Fisher-Yates on a ChaCha8 stream), returned in ascending order.
pub fn sample_vertices(g: &Graph, cfg: &SampleConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let n = g.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = cfg.sample_size(n);
    let mut all: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(cfg.seed);
    let (picked, _) = all.partial_shuffle(&mut rng, k);
    let mut picked = picked.to_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[derive(Debug, Clone)]
pub struct SampleEstimate {
    pub betweenness: CentralityScores,
    pub closeness: CentralityScores,
    /// Sampled sources, ascending.
    pub sources: Vec<usize>,
    /// Exact farness of every sampled source, from its own BFS.
    pub source_farness: Vec<u64>,
}

struct Partial {
    delta_sum: Vec<f64>,
    dist_sum: Vec<u64>,
    farness: Vec<u64>,
}

fn accumulate(g: &Graph, sources: &[usize]) -> Result<Partial> {
    let n = g.n();
    let mut st = SourceState::new(n);
    let mut p = Partial {
        delta_sum: vec![0.0; n],
        dist_sum: vec![0; n],
        farness: Vec::with_capacity(sources.len()),
    };
    for &s in sources {
        let f = st.run(g, s);
        if st.reached() != n {
            return Err(Error::NotConnected);
        }
        for v in 0..n {
            if v != s {
                p.delta_sum[v] += st.delta[v];
            }
            p.dist_sum[v] += st.dist[v] as u64;
        }
        p.farness.push(f);
    }
    Ok(p)
}

/// Estimate betweenness and closeness from the sources sampled by `cfg`
/// (a single trial; `cfg.trials` is ignored here).
pub fn approx_betweenness_closeness(
    g: &Graph,
    cfg: &SampleConfig,
    workers: usize,
) -> Result<SampleEstimate> {
    let sources = sample_vertices(g, cfg)?;
    estimate_from_sources(g, sources, workers)
}

pub fn estimate_from_sources(
    g: &Graph,
    sources: Vec<usize>,
    workers: usize,
) -> Result<SampleEstimate> {
    let n = g.n();
    if n < 2 {
        return Err(Error::ClosenessUndefined);
    }
    let init = Partial {
        delta_sum: vec![0.0; n],
        dist_sum: vec![0; n],
        farness: Vec::with_capacity(sources.len()),
    };
    let total = par::with_workers(workers, || {
        par::ordered_chunk_fold(
            sources.len(),
            SOURCE_CHUNK,
            Ok(init),
            |range| accumulate(g, &sources[range]),
            |acc: Result<Partial>, part| {
                let mut acc = acc?;
                let part = part?;
                for (a, b) in acc.delta_sum.iter_mut().zip(&part.delta_sum) {
                    *a += b;
                }
                for (a, b) in acc.dist_sum.iter_mut().zip(&part.dist_sum) {
                    *a += b;
                }
                acc.farness.extend(part.farness);
                Ok(acc)
            },
        )
    })?;

    let k = sources.len();
    let mut sampled = vec![false; n];
    for &s in &sources {
        sampled[s] = true;
    }
    let mut bc = vec![0.0; n];
    let mut cc = vec![0.0; n];
    for v in 0..n {
        let k_v = k - sampled[v] as usize;
        if k_v == 0 {
            // Only possible when v is the single sampled source.
            cc[v] = 1.0 / total.farness[0] as f64;
            continue;
        }
        let scale = (n - 1) as f64 / k_v as f64;
        bc[v] = 0.5 * scale * total.delta_sum[v];
        cc[v] = 1.0 / (scale * total.dist_sum[v] as f64);
    }
    Ok(SampleEstimate {
        betweenness: CentralityScores {
            metric: Metric::Betweenness,
            values: bc,
        },
        closeness: CentralityScores {
            metric: Metric::Closeness,
            values: cc,
        },
        sources,
        source_farness: total.farness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::betweenness_closeness;

    fn graph(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(n, edges.iter().copied()).unwrap().0
    }

    fn ring(n: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        graph(n, &edges)
    }

    #[test]
    fn full_sample_is_every_vertex() {
        let g = ring(20);
        let s = sample_vertices(&g, &SampleConfig::new(1.0, 3)).unwrap();
        assert_eq!(s, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn sample_size_arithmetic() {
        let g = ring(1000);
        let s = sample_vertices(&g, &SampleConfig::new(0.05, 11)).unwrap();
        assert_eq!(s.len(), 50);
        let mut d = s.clone();
        d.dedup();
        assert_eq!(d.len(), 50);
        assert_eq!(SampleConfig::new(0.0001, 1).sample_size(100), 1);
    }

    #[test]
    fn seeds_vary_and_repeat() {
        let g = ring(1000);
        for pair in 0..5u64 {
            let a = sample_vertices(&g, &SampleConfig::new(0.05, 2 * pair)).unwrap();
            let b = sample_vertices(&g, &SampleConfig::new(0.05, 2 * pair + 1)).unwrap();
            assert_ne!(a, b);
            assert_eq!(a, sample_vertices(&g, &SampleConfig::new(0.05, 2 * pair)).unwrap());
        }
    }

    #[test]
    fn bad_fraction() {
        let g = ring(10);
        for f in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                sample_vertices(&g, &SampleConfig::new(f, 1)),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn full_fraction_on_path() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let est = approx_betweenness_closeness(&g, &SampleConfig::new(1.0, 9), 1).unwrap();
        let (b, c) = betweenness_closeness(&g, 1).unwrap();
        assert_eq!(est.betweenness.values, b.values);
        assert_eq!(est.closeness.values, c.values);
    }

    #[test]
    fn single_hub_source_on_star() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let est = estimate_from_sources(&g, vec![0], 1).unwrap();
        for leaf in 1..5 {
            assert_eq!(1.0 / est.closeness.values[leaf], 4.0);
        }
        // The hub's own farness comes from its BFS.
        assert_eq!(est.source_farness, vec![4]);
        assert_eq!(est.closeness.values[0], 0.25);
    }

    #[test]
    fn source_farness_is_exact() {
        let g = ring(15);
        let est = approx_betweenness_closeness(&g, &SampleConfig::new(0.2, 5), 1).unwrap();
        let (_, c) = betweenness_closeness(&g, 1).unwrap();
        for (&s, &f) in est.sources.iter().zip(&est.source_farness) {
            assert_eq!(1.0 / f as f64, c.values[s]);
        }
    }

    #[test]
    fn disconnected_rejected() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            approx_betweenness_closeness(&g, &SampleConfig::new(1.0, 1), 1),
            Err(Error::NotConnected)
        ));
    }
}
