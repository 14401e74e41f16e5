//! Exact, sampling and model rankings evaluated against one exact reference.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::centrality::{betweenness_closeness, Metric};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nn::MlpModel;
use crate::rank::{self, kendall_tau_b, mean_ci99, rank_transform, scale_rank, EvalReport, RankVector};
use crate::sample::{approx_betweenness_closeness, SampleConfig};

use super::predict::predict;

/// Exact betweenness and closeness of the graph under comparison.
#[derive(Debug, Clone)]
pub struct ExactReference {
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub seconds: f64,
}

impl ExactReference {
    pub fn compute(g: &Graph, workers: usize) -> Result<Self> {
        let t = Instant::now();
        let (b, c) = betweenness_closeness(g, workers)?;
        Ok(ExactReference {
            betweenness: b.values,
            closeness: c.values,
            seconds: t.elapsed().as_secs_f64(),
        })
    }

    pub fn values(&self, metric: Metric) -> Result<&[f64]> {
        match metric {
            Metric::Betweenness => Ok(&self.betweenness),
            Metric::Closeness => Ok(&self.closeness),
            other => Err(Error::config(format!("no exact reference for {other}"))),
        }
    }
}

/// A method that ranks the vertices of a connected graph for one metric.
pub trait RankPredictor {
    fn method_name(&self) -> String;
    fn target(&self) -> Metric;
    fn predict_ranks(&self, g: &Graph) -> Result<RankVector>;
}

/// A trained model under a display name.
pub struct NamedModel {
    pub name: String,
    pub model: MlpModel,
}

impl RankPredictor for NamedModel {
    fn method_name(&self) -> String {
        format!("model-{}", self.name)
    }

    fn target(&self) -> Metric {
        self.model.target_metric.unwrap_or(Metric::Betweenness)
    }

    fn predict_ranks(&self, g: &Graph) -> Result<RankVector> {
        Ok(predict(g, &self.model)?.ranks)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    /// Report wall times. When false every `seconds` field is 0 so that
    /// repeated runs produce identical reports.
    pub record_timings: bool,
}

impl CompareConfig {
    /// Fractions 2.5% and 5%, five seeds each.
    pub fn new(seed: u64, workers: usize) -> Self {
        CompareConfig {
            fractions: vec![0.025, 0.05],
            trials: 5,
            seed,
            workers,
            record_timings: true,
        }
    }
}

/// Mean τ-b of one method on one metric, with a 99% interval over trials
/// (or networks, when aggregating several runs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub metric: String,
    pub count: usize,
    pub mean_tau_b: f64,
    pub ci99: f64,
    pub mean_seconds: f64,
}

pub const SUMMARY_CSV_HEADER: &str = "method,metric,count,mean_tau_b,ci99,mean_seconds";

impl MethodSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.method, self.metric, self.count, self.mean_tau_b, self.ci99, self.mean_seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRun {
    pub network: String,
    pub reports: Vec<EvalReport>,
    pub summary: Vec<MethodSummary>,
}

/// Method name without its trial suffix: `sample-0.05:3` becomes
/// `sample-0.05`.
pub fn method_family(method: &str) -> &str {
    method.split(':').next().unwrap_or(method)
}

/// Group reports by method family and metric, in order of first
/// appearance.
pub fn summarize(reports: &[EvalReport]) -> Vec<MethodSummary> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in reports {
        let k = (method_family(&r.method), r.metric.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(method, metric)| {
            let group: Vec<&EvalReport> = reports
                .iter()
                .filter(|r| method_family(&r.method) == method && r.metric == metric)
                .collect();
            let taus: Vec<f64> = group.iter().map(|r| r.tau_b).collect();
            let (mean, ci) = mean_ci99(&taus);
            MethodSummary {
                method: method.to_string(),
                metric: metric.to_string(),
                count: group.len(),
                mean_tau_b: mean,
                ci99: ci,
                mean_seconds: group.iter().map(|r| r.seconds).sum::<f64>() / group.len() as f64,
            }
        })
        .collect()
}

fn evaluate(
    network: &str,
    method: &str,
    metric: Metric,
    predicted: &RankVector,
    exact: &RankVector,
    seconds: f64,
) -> Result<Option<EvalReport>> {
    let tau = match kendall_tau_b(&predicted.ranks, &exact.ranks) {
        Ok(t) => t,
        Err(Error::TauUndefined) => {
            log::warn!("{network}: {method} {metric}: τ-b undefined for constant ranks; row skipped");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let n = exact.len();
    let p: Vec<f64> = predicted.ranks.iter().map(|&r| scale_rank(r, n)).collect();
    let t: Vec<f64> = exact.ranks.iter().map(|&r| scale_rank(r, n)).collect();
    Ok(Some(EvalReport {
        network: network.to_string(),
        method: method.to_string(),
        metric: metric.to_string(),
        tau_b: tau,
        r2: rank::r_squared(&p, &t)?,
        mse: rank::mse(&p, &t)?,
        seconds,
    }))
}

/// Compare every method on the connected graph `g`. `reference` is called
/// exactly once and its result is shared by all methods.
pub fn compare<F>(
    network: &str,
    g: &Graph,
    reference: F,
    predictors: &[&dyn RankPredictor],
    cfg: &CompareConfig,
) -> Result<ComparisonRun>
where
    F: FnOnce(&Graph) -> Result<ExactReference>,
{
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    let exact = reference(g)?;
    let metrics = [Metric::Betweenness, Metric::Closeness];
    let mut exact_ranks = Vec::new();
    for m in metrics {
        exact_ranks.push(rank_transform(exact.values(m)?)?);
    }
    let mut reports = Vec::new();
    let record = cfg.record_timings;
    let mut push = |r: Option<EvalReport>| {
        reports.extend(r.map(|mut r| {
            if !record {
                r.seconds = 0.0;
            }
            r
        }))
    };

    for (m, er) in metrics.iter().zip(&exact_ranks) {
        push(evaluate(network, "exact", *m, er, er, exact.seconds)?);
    }
    for &fraction in &cfg.fractions {
        let base = SampleConfig {
            trials: cfg.trials,
            ..SampleConfig::new(fraction, cfg.seed)
        };
        base.validate()?;
        for t in 0..cfg.trials {
            let start = Instant::now();
            let est = approx_betweenness_closeness(g, &base.trial(t), cfg.workers)?;
            let seconds = start.elapsed().as_secs_f64();
            let method = format!("sample-{fraction}:{t}");
            for (m, er) in metrics.iter().zip(&exact_ranks) {
                let values = match m {
                    Metric::Betweenness => &est.betweenness.values,
                    _ => &est.closeness.values,
                };
                push(evaluate(network, &method, *m, &rank_transform(values)?, er, seconds)?);
            }
        }
    }
    for p in predictors {
        let m = p.target();
        let i = metrics
            .iter()
            .position(|&x| x == m)
            .ok_or_else(|| Error::config(format!("cannot compare predictions of {m}")))?;
        let start = Instant::now();
        let ranks = p.predict_ranks(g)?;
        let seconds = start.elapsed().as_secs_f64();
        if ranks.len() != g.n() {
            return Err(Error::LengthMismatch(ranks.len(), g.n()));
        }
        push(evaluate(network, &p.method_name(), m, &ranks, &exact_ranks[i], seconds)?);
    }

    let summary = summarize(&reports);
    Ok(ComparisonRun {
        network: network.to_string(),
        reports,
        summary,
    })
}
