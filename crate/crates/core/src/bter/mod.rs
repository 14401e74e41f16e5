//! Block Two-Level Erdős–Rényi (BTER) generator and training corpora.
//!
//! Generation runs in three phases:
//!
//! 1. Vertices with target degree `d >= 2` are packed, class by class, into
//!    affinity blocks of `d + 1` consecutive vertices (the last block of a
//!    class may be smaller). Degree-1 vertices get no block.
//! 2. Inside every block each pair is linked with probability equal to the
//!    clustering target.
//! 3. Excess degree `e_v = max(0, target(v) - phase2_degree(v))` is spent on
//!    Chung–Lu edges: `round(Σ e / 2)` edges whose endpoints are drawn with
//!    probability proportional to the excess each vertex still has left
//!    (every placed edge consumes one unit at both ends). Self-loops and
//!    repeated edges are redrawn until 10× the requested edge count has been
//!    drawn.

mod corpus;
mod degree;

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use corpus::{
    build_training_corpus, manifest_hash, read_manifest, render_network, write_manifest,
    MANIFEST_FILE,
    write_network, CorpusEntry, CorpusSpec,
    Manifest, ManifestRow, NetworkMetadata,
};
pub use degree::{
    realize_degree_sequence, DegreeDistributionSpec, DegreeFamily, DegreeSequence,
};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::seed;

const RETRY_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BterConfig {
    pub n: usize,
    pub dist: DegreeDistributionSpec,
    /// Within-block link probability.
    pub clustering_target: f64,
    pub seed: u64,
}

impl BterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config("BTER needs n >= 2"));
        }
        if !(0.0..=1.0).contains(&self.clustering_target) {
            return Err(Error::config(format!(
                "clustering target {} outside [0, 1]",
                self.clustering_target
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BterDiagnostics {
    pub target_degree_total: usize,
    pub blocks: usize,
    pub phase2_edges: usize,
    pub excess_total: usize,
    pub phase3_requested: usize,
    pub phase3_placed: usize,
    pub phase3_draws: usize,
}

impl BterDiagnostics {
    /// Phase-3 edges that could not be placed within the retry budget.
    pub fn unplaced(&self) -> usize {
        self.phase3_requested - self.phase3_placed
    }
}

#[derive(Debug, Clone)]
pub struct BterGraph {
    pub graph: Graph,
    pub target_degrees: Vec<usize>,
    /// Affinity blocks as `(first vertex, size)`.
    pub blocks: Vec<(usize, usize)>,
    pub diagnostics: BterDiagnostics,
}

/// Phase 1: pack each degree class (degree >= 2) into blocks of `d + 1`.
pub fn affinity_blocks(degrees: &[usize]) -> Vec<(usize, usize)> {
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < degrees.len() {
        let d = degrees[i];
        let mut end = i;
        while end < degrees.len() && degrees[end] == d {
            end += 1;
        }
        if d >= 2 {
            let mut start = i;
            while start < end {
                let size = (d + 1).min(end - start);
                blocks.push((start, size));
                start += size;
            }
        }
        i = end;
    }
    blocks
}

pub fn generate_bter(cfg: &BterConfig) -> Result<BterGraph> {
    cfg.validate()?;
    let n = cfg.n;
    let seq = realize_degree_sequence(n, &cfg.dist)?;
    let targets = seq.degrees;
    let mut rng = seed::rng(cfg.seed);
    let mut diag = BterDiagnostics {
        target_degree_total: targets.iter().sum(),
        ..Default::default()
    };

    let blocks = affinity_blocks(&targets);
    diag.blocks = blocks.len();
    let mut edges: HashSet<(VertexId, VertexId)> = HashSet::new();
    let mut edge_list: Vec<(VertexId, VertexId)> = Vec::new();
    let mut realized = vec![0usize; n];
    for &(start, size) in &blocks {
        for u in start..start + size {
            for v in u + 1..start + size {
                if rng.random::<f64>() < cfg.clustering_target {
                    let e = (u as VertexId, v as VertexId);
                    edges.insert(e);
                    edge_list.push(e);
                    realized[u] += 1;
                    realized[v] += 1;
                }
            }
        }
    }
    diag.phase2_edges = edge_list.len();

    let excess: Vec<usize> = targets
        .iter()
        .zip(&realized)
        .map(|(&t, &r)| t.saturating_sub(r))
        .collect();
    diag.excess_total = excess.iter().sum();
    diag.phase3_requested = (diag.excess_total as f64 / 2.0).round() as usize;
    if diag.phase3_requested > 0 {
        let mut picker = StubSampler::new(&excess);
        let budget = RETRY_FACTOR * diag.phase3_requested;
        while diag.phase3_placed < diag.phase3_requested
            && diag.phase3_draws < budget
            && picker.total() > 1
        {
            diag.phase3_draws += 1;
            let u = picker.sample(&mut rng);
            let v = picker.sample(&mut rng);
            if u == v {
                continue;
            }
            let e = (u.min(v) as VertexId, u.max(v) as VertexId);
            if edges.insert(e) {
                edge_list.push(e);
                picker.take(u);
                picker.take(v);
                diag.phase3_placed += 1;
            }
        }
        if diag.unplaced() > 0 {
            log::debug!(
                "BTER: {} of {} phase-3 edges unplaced after {} draws",
                diag.unplaced(),
                diag.phase3_requested,
                diag.phase3_draws
            );
        }
    }

    let (graph, _) = Graph::from_edges(n, edge_list)?;
    Ok(BterGraph {
        graph,
        target_degrees: targets,
        blocks,
        diagnostics: diag,
    })
}

/// Fenwick tree over integer weights: sample an index with probability
/// proportional to its weight, and decrement weights, in O(log n).
struct StubSampler {
    tree: Vec<u64>,
    weights: Vec<u64>,
    total: u64,
    top: usize,
}

impl StubSampler {
    fn new(weights: &[usize]) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut j = i + 1;
            while j <= n {
                tree[j] += w as u64;
                j += j & j.wrapping_neg();
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        StubSampler {
            tree,
            weights: weights.iter().map(|&w| w as u64).collect(),
            total: weights.iter().map(|&w| w as u64).sum(),
            top,
        }
    }

    fn total(&self) -> u64 {
        self.total
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let mut target = rng.random_range(0..self.total);
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }

    fn take(&mut self, i: usize) {
        debug_assert!(self.weights[i] > 0);
        self.weights[i] -= 1;
        self.total -= 1;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] -= 1;
            j += j & j.wrapping_neg();
        }
    }
}
