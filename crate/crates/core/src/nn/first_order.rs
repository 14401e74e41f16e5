//! Full-batch first-order trainers: gradient descent, gradient descent with
//! momentum, and resilient backpropagation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstOrderAlgorithm {
    Gd,
    Gdm,
    Rprop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderConfig {
    pub algorithm: FirstOrderAlgorithm,
    pub learning_rate: f64,
    pub momentum: f64,
    pub rprop_initial_step: f64,
    pub rprop_inc: f64,
    pub rprop_dec: f64,
    pub rprop_max_step: f64,
    pub rprop_min_step: f64,
}

impl FirstOrderConfig {
    pub fn new(algorithm: FirstOrderAlgorithm) -> Self {
        FirstOrderConfig {
            algorithm,
            learning_rate: 0.01,
            momentum: 0.9,
            rprop_initial_step: 0.07,
            rprop_inc: 1.2,
            rprop_dec: 0.5,
            rprop_max_step: 50.0,
            rprop_min_step: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.learning_rate,
            self.rprop_initial_step,
            self.rprop_max_step,
            self.rprop_min_step,
        ];
        if positive.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::config("rates and step sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("momentum must be in [0, 1)"));
        }
        if !(self.rprop_dec > 0.0 && self.rprop_dec < 1.0 && self.rprop_inc > 1.0) {
            return Err(Error::config("need 0 < rprop_dec < 1 < rprop_inc"));
        }
        Ok(())
    }
}

/// Optimizer memory between epochs.
#[derive(Debug, Clone)]
pub struct FirstOrderState {
    velocity: Vec<f64>,
    steps: Vec<f64>,
    prev_grad: Vec<f64>,
}

impl FirstOrderState {
    pub fn new(cfg: &FirstOrderConfig, num_params: usize) -> Self {
        FirstOrderState {
            velocity: vec![0.0; num_params],
            steps: vec![cfg.rprop_initial_step; num_params],
            prev_grad: vec![0.0; num_params],
        }
    }

    pub fn rprop_steps(&self) -> &[f64] {
        &self.steps
    }
}

/// Apply one update given the full-batch gradient.
///
/// Momentum follows the smoothed form `Δ ← mc·Δ - lr·(1 - mc)·g`. Rprop
/// grows a parameter's step while its gradient keeps its sign, shrinks it
/// and skips the update on a sign change, and clamps steps to
/// `[rprop_min_step, rprop_max_step]`.
pub fn first_order_step(
    cfg: &FirstOrderConfig,
    state: &mut FirstOrderState,
    params: &mut [f64],
    grad: &[f64],
) {
    match cfg.algorithm {
        FirstOrderAlgorithm::Gd => {
            for (p, g) in params.iter_mut().zip(grad) {
                *p -= cfg.learning_rate * g;
            }
        }
        FirstOrderAlgorithm::Gdm => {
            let mc = cfg.momentum;
            for ((p, v), g) in params.iter_mut().zip(&mut state.velocity).zip(grad) {
                *v = mc * *v - cfg.learning_rate * (1.0 - mc) * g;
                *p += *v;
            }
        }
        FirstOrderAlgorithm::Rprop => {
            for i in 0..params.len() {
                let g = grad[i];
                let sign = g * state.prev_grad[i];
                if sign > 0.0 {
                    state.steps[i] = (state.steps[i] * cfg.rprop_inc).min(cfg.rprop_max_step);
                } else if sign < 0.0 {
                    state.steps[i] = (state.steps[i] * cfg.rprop_dec).max(cfg.rprop_min_step);
                    state.prev_grad[i] = 0.0;
                    continue;
                }
                params[i] -= g.signum() * state.steps[i] * (g != 0.0) as u8 as f64;
                state.prev_grad[i] = g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_defaults() {
        let c = FirstOrderConfig::new(FirstOrderAlgorithm::Rprop);
        assert_eq!(
            (c.learning_rate, c.momentum, c.rprop_initial_step, c.rprop_inc, c.rprop_dec, c.rprop_max_step),
            (0.01, 0.9, 0.07, 1.2, 0.5, 50.0)
        );
        c.validate().unwrap();
    }

    #[test]
    fn gd_moves_against_gradient() {
        let c = FirstOrderConfig::new(FirstOrderAlgorithm::Gd);
        let mut st = FirstOrderState::new(&c, 2);
        let mut p = [1.0, -1.0];
        first_order_step(&c, &mut st, &mut p, &[2.0, -4.0]);
        assert_eq!(p, [0.98, -0.96]);
    }

    #[test]
    fn rprop_steps_stay_bounded() {
        let c = FirstOrderConfig::new(FirstOrderAlgorithm::Rprop);
        let mut st = FirstOrderState::new(&c, 1);
        let mut p = [0.0];
        for _ in 0..200 {
            first_order_step(&c, &mut st, &mut p, &[1.0]);
            assert!(st.rprop_steps()[0] <= 50.0);
        }
        assert_eq!(st.rprop_steps()[0], 50.0);
        for k in 0..400 {
            let g = if k % 2 == 0 { 1.0 } else { -1.0 };
            first_order_step(&c, &mut st, &mut p, &[g]);
            assert!(st.rprop_steps()[0] >= 1e-12);
        }
    }

    #[test]
    fn rprop_minimizes_quadratic() {
        let c = FirstOrderConfig::new(FirstOrderAlgorithm::Rprop);
        let mut st = FirstOrderState::new(&c, 1);
        let mut p = [5.0];
        for _ in 0..200 {
            let g = [p[0] - 2.0];
            first_order_step(&c, &mut st, &mut p, &g);
        }
        assert!((p[0] - 2.0).abs() < 1e-6);
    }
}
