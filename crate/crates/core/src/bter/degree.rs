use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree-distribution family with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DegreeFamily {
    /// Weight `k^-λ`.
    HeavyTailed { lambda: f64 },
    /// Weight `exp(-(ln k)² / S)`.
    Lognormal { s: f64 },
}

impl DegreeFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DegreeFamily::HeavyTailed { .. } => "heavy_tailed",
            DegreeFamily::Lognormal { .. } => "lognormal",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            DegreeFamily::HeavyTailed { lambda } => lambda,
            DegreeFamily::Lognormal { s } => s,
        }
    }

    pub fn from_name(name: &str, parameter: f64) -> Result<Self> {
        match name {
            "heavy_tailed" | "heavy" => Ok(DegreeFamily::HeavyTailed { lambda: parameter }),
            "lognormal" => Ok(DegreeFamily::Lognormal { s: parameter }),
            other => Err(Error::config(format!("unknown degree family {other:?}"))),
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        let k = k as f64;
        match *self {
            DegreeFamily::HeavyTailed { lambda } => k.powf(-lambda),
            DegreeFamily::Lognormal { s } => (-(k.ln() * k.ln()) / s).exp(),
        }
    }

    /// The six configurations used for training corpora.
    pub fn training_set() -> [DegreeFamily; 6] {
        [
            DegreeFamily::HeavyTailed { lambda: 1.5 },
            DegreeFamily::HeavyTailed { lambda: 2.0 },
            DegreeFamily::HeavyTailed { lambda: 2.5 },
            DegreeFamily::Lognormal { s: 5.0 },
            DegreeFamily::Lognormal { s: 10.0 },
            DegreeFamily::Lognormal { s: 15.0 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistributionSpec {
    pub family: DegreeFamily,
    pub k_min: usize,
    /// Defaults to `n - 1` when absent.
    pub k_max: Option<usize>,
}

impl DegreeDistributionSpec {
    pub fn new(family: DegreeFamily) -> Self {
        DegreeDistributionSpec {
            family,
            k_min: 1,
            k_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSequence {
    /// degree -> number of vertices
    pub counts: BTreeMap<usize, usize>,
    /// Target degree of each vertex, ascending.
    pub degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn total_degree(&self) -> usize {
        self.degrees.iter().sum()
    }
}

/// Largest-remainder apportionment of `n` over `weights` (not necessarily
/// normalized). Remainder ties go to the earlier entry.
pub(crate) fn largest_remainder(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Turn distribution weights into an exact per-vertex degree sequence.
///
/// Weights are evaluated at each integer `k` in `[k_min, k_max]`, vertex
/// counts are apportioned by largest remainder so they sum to `n`, and an
/// odd degree total is fixed by moving one vertex of the most populous class
/// up (or, at the top of the range, down) by one.
pub fn realize_degree_sequence(n: usize, spec: &DegreeDistributionSpec) -> Result<DegreeSequence> {
    if n < 2 {
        return Err(Error::config("degree sequence needs n >= 2"));
    }
    let k_max = spec.k_max.unwrap_or(n - 1);
    if spec.k_min < 1 || k_max < spec.k_min || k_max > n - 1 {
        return Err(Error::config(format!(
            "degree bounds [{}, {k_max}] invalid for n = {n}",
            spec.k_min
        )));
    }
    let ks: Vec<usize> = (spec.k_min..=k_max).collect();
    let weights: Vec<f64> = ks.iter().map(|&k| spec.family.weight(k)).collect();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::config(format!(
            "degree weights of {:?} are degenerate on [{}, {k_max}]",
            spec.family, spec.k_min
        )));
    }
    let counts = largest_remainder(n, &weights);
    let mut map: BTreeMap<usize, usize> = ks
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(&k, &c)| (k, c))
        .collect();

    let total: usize = map.iter().map(|(k, c)| k * c).sum();
    if total % 2 == 1 {
        // Most populous class; the smallest degree wins ties.
        let (&d, _) = map
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .expect("n >= 2 vertices were apportioned");
        let to = if d < n - 1 { d + 1 } else { d - 1 };
        *map.get_mut(&d).unwrap() -= 1;
        if map[&d] == 0 {
            map.remove(&d);
        }
        *map.entry(to).or_insert(0) += 1;
    }
    let degrees = map
        .iter()
        .flat_map(|(&k, &c)| std::iter::repeat_n(k, c))
        .collect();
    Ok(DegreeSequence {
        counts: map,
        degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class() {
        let spec = DegreeDistributionSpec {
            family: DegreeFamily::HeavyTailed { lambda: 2.0 },
            k_min: 3,
            k_max: Some(3),
        };
        let seq = realize_degree_sequence(4, &spec).unwrap();
        assert_eq!(seq.degrees, vec![3; 4]);
    }

    #[test]
    fn heavy_tailed_n10() {
        let spec = DegreeDistributionSpec::new(DegreeFamily::HeavyTailed { lambda: 2.0 });
        let seq = realize_degree_sequence(10, &spec).unwrap();
        // Oracle: quotas 10 w_k with w_k ∝ 1/k², floors plus one vertex for
        // each of the three largest remainders.
        let w: Vec<f64> = (1..=9).map(|k| 1.0 / (k * k) as f64).collect();
        let s: f64 = w.iter().sum();
        let q: Vec<f64> = w.iter().map(|x| 10.0 * x / s).collect();
        let mut expected: Vec<usize> = q.iter().map(|x| x.floor() as usize).collect();
        let missing = 10 - expected.iter().sum::<usize>();
        let mut by_rem: Vec<usize> = (0..9).collect();
        by_rem.sort_by(|&a, &b| (q[b] - q[b].floor()).partial_cmp(&(q[a] - q[a].floor())).unwrap());
        for &i in &by_rem[..missing] {
            expected[i] += 1;
        }
        assert_eq!(expected[..3], [7, 2, 1]);
        let got: Vec<usize> = (1..=9).map(|k| seq.counts.get(&k).copied().unwrap_or(0)).collect();
        assert_eq!(got, expected);
        assert_eq!(seq.degrees.len(), 10);
    }

    #[test]
    fn parity_is_even() {
        for family in DegreeFamily::training_set() {
            for n in [10, 37, 100, 555, 1000] {
                let seq = realize_degree_sequence(n, &DegreeDistributionSpec::new(family)).unwrap();
                assert_eq!(seq.total_degree() % 2, 0, "{family:?} n={n}");
                assert_eq!(seq.counts.values().sum::<usize>(), n);
                assert!(seq.degrees.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_weights_rejected() {
        let spec = DegreeDistributionSpec {
            family: DegreeFamily::HeavyTailed { lambda: f64::NAN },
            k_min: 1,
            k_max: None,
        };
        assert!(realize_degree_sequence(10, &spec).is_err());
        let spec = DegreeDistributionSpec {
            family: DegreeFamily::HeavyTailed { lambda: 2.0 },
            k_min: 1,
            k_max: Some(10),
        };
        assert!(realize_degree_sequence(10, &spec).is_err());
    }
}
