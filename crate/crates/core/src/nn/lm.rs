//! Levenberg-Marquardt: solve `(JᵀJ + μI) Δ = -Jᵀe`, accept the step when it
//! lowers the sum of squared residuals, and adapt μ.

use nalgebra::{Cholesky, DVector};
use serde::{Deserialize, Serialize};

use super::backprop::NormalEquations;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub mu0: f64,
    pub mu_max: f64,
    pub mu_increase: f64,
    /// μ is multiplied by `mu_decrease_fraction × mu_increase` after an
    /// accepted step.
    pub mu_decrease_fraction: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            mu0: 0.005,
            mu_max: 1e10,
            mu_increase: 1.5,
            mu_decrease_fraction: 0.1,
        }
    }
}

impl LmConfig {
    pub fn mu_decrease(&self) -> f64 {
        self.mu_decrease_fraction * self.mu_increase
    }

    pub fn validate(&self) -> Result<()> {
        let dec = self.mu_decrease();
        if !(dec > 0.0 && dec < 1.0 && self.mu_increase > 1.0) {
            return Err(Error::config(format!(
                "need 0 < μ decrease ({dec}) < 1 < μ increase ({})",
                self.mu_increase
            )));
        }
        if !(self.mu0 > 0.0 && self.mu0 < self.mu_max) {
            return Err(Error::config("need 0 < mu0 < mu_max"));
        }
        Ok(())
    }
}

/// A least-squares objective `Σ e_i(θ)²`.
pub trait LeastSquares {
    fn normal_equations(&self, params: &[f64]) -> NormalEquations;
    fn sse(&self, params: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmState {
    pub mu: f64,
    /// Set once μ exceeded `mu_max` without an acceptable step.
    pub terminated: bool,
}

impl LmState {
    pub fn new(cfg: &LmConfig) -> Self {
        LmState {
            mu: cfg.mu0,
            terminated: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmEpoch {
    pub accepted: bool,
    pub sse_before: f64,
    /// SSE of the parameters after the epoch (unchanged when rejected).
    pub sse_after: f64,
    pub solves: usize,
}

/// Solve `(JᵀJ + μI) Δ = -Jᵀe`; `None` if the damped matrix is not
/// numerically positive definite.
pub fn damped_step(ne: &NormalEquations, mu: f64) -> Option<DVector<f64>> {
    let mut a = ne.jtj.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += mu;
    }
    let chol = Cholesky::new(a)?;
    let step = chol.solve(&(-&ne.jte));
    step.iter().all(|x| x.is_finite()).then_some(step)
}

/// One full-batch LM epoch. Rejected steps raise μ and re-solve with the
/// same normal equations until a step lowers the SSE or μ passes `mu_max`,
/// in which case the parameters are left unchanged and the state is
/// marked terminated.
pub fn lm_epoch<P: LeastSquares + ?Sized>(
    problem: &P,
    params: &mut [f64],
    state: &mut LmState,
    cfg: &LmConfig,
) -> LmEpoch {
    let ne = problem.normal_equations(params);
    let sse_before = ne.sse;
    let mut solves = 0;
    let mut candidate = vec![0.0; params.len()];
    loop {
        if state.mu > cfg.mu_max {
            state.terminated = true;
            return LmEpoch {
                accepted: false,
                sse_before,
                sse_after: sse_before,
                solves,
            };
        }
        solves += 1;
        if let Some(step) = damped_step(&ne, state.mu) {
            for ((c, p), d) in candidate.iter_mut().zip(params.iter()).zip(step.iter()) {
                *c = p + d;
            }
            let sse = problem.sse(&candidate);
            if sse < sse_before {
                params.copy_from_slice(&candidate);
                state.mu *= cfg.mu_decrease();
                return LmEpoch {
                    accepted: true,
                    sse_before,
                    sse_after: sse,
                    solves,
                };
            }
        }
        state.mu *= cfg.mu_increase;
    }
}
