//! Applying a trained model to a graph.

use crate::error::{Error, Result};
use crate::graph::{connected_components, largest_connected_component, Graph};
use crate::nn::MlpModel;
use crate::par;
use crate::rank::{rank_transform, unscale_rank, RankVector};

use super::dataset::model_inputs;

const SCORE_CHUNK: usize = 8192;

/// Model output for every vertex of the (possibly reduced) graph, in vertex
/// order.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Original label of each scored vertex.
    pub labels: Vec<u64>,
    /// Predicted rank, `1` for the most central vertex. Not necessarily
    /// integral or within `[1, n]`.
    pub scores: Vec<f64>,
    /// Tie-averaged ranks of the predictions.
    pub ranks: RankVector,
    /// The input was disconnected and only its largest component was scored.
    pub reduced_to_lcc: bool,
    pub eigen_warning: bool,
}

/// Standardize rank-scaled input rows with the model's statistics, evaluate
/// the network and undo the output standardization. The result is a scaled
/// rank `2 r / n - 1` per row.
pub fn score_inputs(model: &MlpModel, scaled: &[f64]) -> Result<Vec<f64>> {
    let k = model.arch.num_inputs();
    if k != model.input_stats.len() {
        return Err(Error::Schema("model input statistics do not match its inputs".into()));
    }
    if !scaled.len().is_multiple_of(k) {
        return Err(Error::Schema(format!(
            "{} input values do not split into rows of {k}",
            scaled.len()
        )));
    }
    let rows = scaled.len() / k;
    let chunks = par::map_indexed(rows.div_ceil(SCORE_CHUNK), |c| {
        let lo = c * SCORE_CHUNK * k;
        let hi = ((c + 1) * SCORE_CHUNK * k).min(scaled.len());
        let standardized: Vec<f64> = scaled[lo..hi]
            .iter()
            .enumerate()
            .map(|(i, &x)| model.input_stats[i % k].apply(x))
            .collect();
        model.forward_batch(&standardized).map(|ys| {
            ys.into_iter()
                .map(|y| model.output_stats.invert(y))
                .collect::<Vec<_>>()
        })
    });
    let mut out = Vec::with_capacity(rows);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Predict centrality ranks for every vertex of `g`. A disconnected graph is
/// reduced to its largest connected component with a warning.
pub fn predict(g: &Graph, model: &MlpModel) -> Result<Prediction> {
    if model.arch.num_inputs() != 2 {
        return Err(Error::Schema(format!(
            "model takes {} inputs; degree and eigenvector ranks make 2",
            model.arch.num_inputs()
        )));
    }
    if g.n() == 0 {
        return Err(Error::config("empty graph"));
    }
    let reduced = connected_components(g).component_sizes.len() > 1;
    let lcc;
    let g = if reduced {
        lcc = largest_connected_component(g);
        log::warn!(
            "graph is disconnected; scoring its largest component ({} of {} vertices)",
            lcc.n(),
            g.n()
        );
        &lcc
    } else {
        g
    };
    let n = g.n();
    let inputs = model_inputs(g)?;
    let scores: Vec<f64> = score_inputs(model, &inputs.scaled)?
        .into_iter()
        .map(|s| unscale_rank(s, n))
        .collect();
    // A smaller predicted rank means more central, so rank the negation.
    let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
    let ranks = rank_transform(&negated)?;
    Ok(Prediction {
        labels: (0..n).map(|v| g.label(v)).collect(),
        scores,
        ranks,
        reduced_to_lcc: reduced,
        eigen_warning: inputs.eigen_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::nn::{Activation, Architecture, DEFAULT_LAYER_SIZES};

    fn random_model() -> MlpModel {
        let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        MlpModel::new(arch, 3)
    }

    #[test]
    fn cycle_ranks_all_tie() {
        let n = 9;
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let (g, _) = Graph::from_edges(n as usize, edges).unwrap();
        let p = predict(&g, &random_model()).unwrap();
        assert!(p.ranks.ranks.iter().all(|&r| r == (n as f64 + 1.0) / 2.0));
    }

    #[test]
    fn disconnected_input_is_reduced_in_order() {
        let (g, _) = Graph::from_edges(6, [(0, 1), (2, 3), (3, 4), (4, 5)]).unwrap();
        let g = g.with_labels(vec![10, 11, 12, 13, 14, 15]);
        let p = predict(&g, &random_model()).unwrap();
        assert!(p.reduced_to_lcc);
        assert_eq!(p.labels, vec![12, 13, 14, 15]);
        assert_eq!(p.scores.len(), 4);
    }

    #[test]
    fn rank_follows_predicted_score() {
        let (g, _) = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let p = predict(&g, &random_model()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if p.scores[i] < p.scores[j] {
                    assert!(p.ranks.ranks[i] < p.ranks.ranks[j]);
                }
            }
        }
    }

    #[test]
    fn wrong_input_width_is_a_schema_error() {
        let arch = Architecture::new(&[3, 4, 1], Activation::Tanh).unwrap();
        let m = MlpModel::new(arch, 1);
        let (g, _) = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(predict(&g, &m), Err(Error::Schema(_))));
    }

    #[test]
    fn chunked_scoring_matches_single_rows() {
        let m = random_model();
        let rows: Vec<f64> = (0..2 * (SCORE_CHUNK + 17)).map(|i| ((i * 37 % 101) as f64) / 50.0 - 1.0).collect();
        let all = score_inputs(&m, &rows).unwrap();
        for (i, y) in all.iter().enumerate().step_by(997) {
            let one = score_inputs(&m, &rows[2 * i..2 * i + 2]).unwrap();
            assert_eq!(one[0], *y);
        }
    }
}
