//! Eigenvector centrality by the power method.

use super::{CentralityScores, Metric};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par;

const PARALLEL_MIN_N: usize = 20_000;
const STALL_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    /// L1 change between consecutive sum-normalized iterates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-12,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub scores: CentralityScores,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Set when the iterates settled into a period-2 cycle (bipartite
    /// graphs) and the result was recovered from the last two iterates.
    pub oscillation: bool,
}

impl EigenResult {
    /// True when the caller should be warned about the result.
    pub fn warning(&self) -> bool {
        !self.converged || self.oscillation
    }
}

fn multiply(g: &Graph, x: &[f64], out: &mut Vec<f64>) {
    let row = |w: usize| g.neighbors(w).iter().map(|&i| x[i as usize]).sum::<f64>();
    if g.n() >= PARALLEL_MIN_N {
        *out = par::map_indexed(g.n(), row);
    } else {
        out.clear();
        out.extend((0..g.n()).map(row));
    }
}

/// Principal eigenvector of the adjacency matrix, sum-normalized.
///
/// Starts from the all-ones vector and repeats `E <- A E / sum(A E)` until
/// the L1 change drops below `tol` or `max_iter` is reached. If the residual
/// fails to decrease for 10 consecutive iterations the iteration is treated
/// as oscillating: with `y = A E` and `λ² = sum(A y) / sum(E)`, the
/// returned vector is `E + y / λ`, normalized, which cancels the component
/// along the `-λ` eigenvector.
pub fn eigenvector_centrality(g: &Graph, cfg: EigenConfig) -> Result<EigenResult> {
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::config("eigenvector needs tol > 0 and max_iter > 0"));
    }
    let n = g.n();
    if n == 0 {
        return Err(Error::config("empty graph"));
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    if n == 1 {
        return Ok(EigenResult {
            scores: CentralityScores {
                metric: Metric::Eigenvector,
                values: vec![1.0],
            },
            iterations: 0,
            residual: 0.0,
            converged: true,
            oscillation: false,
        });
    }

    let mut e = vec![1.0; n];
    let mut y = Vec::with_capacity(n);
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;
    let mut converged = false;
    let mut oscillation = false;

    while iterations < cfg.max_iter {
        multiply(g, &e, &mut y);
        let sum: f64 = y.iter().sum();
        let mut change = 0.0;
        for (yi, ei) in y.iter_mut().zip(e.iter()) {
            *yi /= sum;
            change += (*yi - ei).abs();
        }
        std::mem::swap(&mut e, &mut y);
        iterations += 1;
        residual = change;
        if residual < cfg.tol {
            converged = true;
            break;
        }
        if residual < best {
            best = residual;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= STALL_WINDOW {
                oscillation = true;
                break;
            }
        }
    }

    if oscillation {
        multiply(g, &e, &mut y);
        let mut z = Vec::with_capacity(n);
        multiply(g, &y, &mut z);
        let lambda = (z.iter().sum::<f64>() / e.iter().sum::<f64>()).sqrt();
        for (ei, yi) in e.iter_mut().zip(&y) {
            *ei += yi / lambda;
        }
        let sum: f64 = e.iter().sum();
        e.iter_mut().for_each(|x| *x /= sum);
        multiply(g, &e, &mut y);
        let sum: f64 = y.iter().sum();
        residual = y.iter().zip(&e).map(|(a, b)| (a / sum - b).abs()).sum();
        converged = residual < cfg.tol.max(1e-9);
        log::warn!(
            "power method oscillates (bipartite graph?); recovered from last two iterates, residual {residual:.3e}"
        );
    } else if !converged {
        log::warn!(
            "power method did not converge in {} iterations (residual {residual:.3e})",
            cfg.max_iter
        );
    }

    Ok(EigenResult {
        scores: CentralityScores {
            metric: Metric::Eigenvector,
            values: e,
        },
        iterations,
        residual,
        converged,
        oscillation,
    })
}
