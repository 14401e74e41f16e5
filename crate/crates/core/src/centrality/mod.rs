//! Exact degree, betweenness, closeness and eigenvector centrality.

mod brandes;
mod eigen;

use serde::{Deserialize, Serialize};

pub use brandes::{betweenness, betweenness_closeness, SourceState, SOURCE_CHUNK};
pub use eigen::{eigenvector_centrality, EigenConfig, EigenResult};

use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Degree,
    Betweenness,
    Closeness,
    Eigenvector,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::Betweenness => "betweenness",
            Metric::Closeness => "closeness",
            Metric::Eigenvector => "eigenvector",
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Metric {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "degree" => Ok(Metric::Degree),
            "betweenness" => Ok(Metric::Betweenness),
            "closeness" => Ok(Metric::Closeness),
            "eigenvector" => Ok(Metric::Eigenvector),
            other => Err(crate::Error::config(format!("unknown metric {other:?}"))),
        }
    }
}

/// Raw per-vertex values of one metric, indexed by internal vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub metric: Metric,
    pub values: Vec<f64>,
}

impl CentralityScores {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Number of adjacencies of each vertex.
pub fn degree_centrality(g: &Graph) -> CentralityScores {
    CentralityScores {
        metric: Metric::Degree,
        values: (0..g.n()).map(|v| g.degree(v) as f64).collect(),
    }
}
