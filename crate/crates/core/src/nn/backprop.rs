//! Loss gradients and Gauss-Newton normal equations for an [`Architecture`].

use nalgebra::{DMatrix, DVector};

use super::model::Architecture;
use crate::par;

/// Normalized inputs (row-major, `dim` per sample) and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub dim: usize,
}

impl TrainingSet {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, dim: usize) -> Self {
        assert_eq!(inputs.len(), targets.len() * dim);
        TrainingSet {
            inputs,
            targets,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }
}

/// Samples per Jacobian block. Fixed, so the accumulation order does not
/// depend on the worker count.
const JACOBIAN_BLOCK: usize = 512;

/// Sum of squared residuals `Σ (y_i - t_i)²`.
pub fn sse(arch: &Architecture, params: &[f64], data: &TrainingSet) -> f64 {
    let outputs = par::ordered_chunk_fold(
        data.len(),
        JACOBIAN_BLOCK,
        Vec::with_capacity(data.len()),
        |range| {
            let mut scratch = arch.scratch();
            range
                .map(|i| arch.forward(params, data.input(i), &mut scratch))
                .collect::<Vec<_>>()
        },
        |mut acc, part| {
            acc.extend(part);
            acc
        },
    );
    outputs
        .iter()
        .zip(&data.targets)
        .map(|(y, t)| (y - t) * (y - t))
        .sum()
}

pub fn mse(arch: &Architecture, params: &[f64], data: &TrainingSet) -> f64 {
    sse(arch, params, data) / data.len() as f64
}

/// Gradient of `½ · mean((y - t)²)` with respect to the parameters.
pub fn gradient(arch: &Architecture, params: &[f64], data: &TrainingSet) -> Vec<f64> {
    let p = arch.num_params();
    let mut grad = par::ordered_chunk_fold(
        data.len(),
        JACOBIAN_BLOCK,
        vec![0.0; p],
        |range| {
            let mut scratch = arch.scratch();
            let mut row = vec![0.0; p];
            let mut g = vec![0.0; p];
            for i in range {
                let y = arch.output_gradient(params, data.input(i), &mut scratch, &mut row);
                let e = y - data.targets[i];
                for (gi, ri) in g.iter_mut().zip(&row) {
                    *gi += e * ri;
                }
            }
            g
        },
        |mut acc, part| {
            for (a, b) in acc.iter_mut().zip(&part) {
                *a += b;
            }
            acc
        },
    );
    let n = data.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    grad
}

/// `JᵀJ`, `Jᵀe` and the SSE of residuals `e = y - t`, where row `i` of `J`
/// is the derivative of output `i` with respect to the parameters.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    pub jtj: DMatrix<f64>,
    pub jte: DVector<f64>,
    pub sse: f64,
}

/// Accumulate the normal equations block by block; `J` is never held in
/// full. Jacobian rows inside a block are computed in parallel, the block
/// products are added in block order, and the lower triangle is mirrored
/// into the upper one at the end so `JᵀJ` is exactly symmetric.
pub fn jacobian_accumulate(
    arch: &Architecture,
    params: &[f64],
    data: &TrainingSet,
) -> NormalEquations {
    let p = arch.num_params();
    let mut jtj = DMatrix::<f64>::zeros(p, p);
    let mut jte = DVector::<f64>::zeros(p);
    let mut sse = 0.0;
    let mut start = 0;
    while start < data.len() {
        let end = (start + JACOBIAN_BLOCK).min(data.len());
        let rows = par::map_indexed(end - start, |k| {
            let i = start + k;
            let mut scratch = arch.scratch();
            let mut row = vec![0.0; p];
            let y = arch.output_gradient(params, data.input(i), &mut scratch, &mut row);
            (row, y - data.targets[i])
        });
        // Column k of the block is the Jacobian row of sample start + k.
        let block = DMatrix::from_fn(p, rows.len(), |r, c| rows[c].0[r]);
        let resid = DVector::from_iterator(rows.len(), rows.iter().map(|(_, e)| *e));
        jtj.gemm(1.0, &block, &block.transpose(), 1.0);
        jte.gemv(1.0, &block, &resid, 1.0);
        sse += resid.iter().map(|e| e * e).sum::<f64>();
        start = end;
    }
    for c in 1..p {
        for r in 0..c {
            jtj[(r, c)] = jtj[(c, r)];
        }
    }
    NormalEquations { jtj, jte, sse }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::model::{Activation, DEFAULT_LAYER_SIZES};
    use rand::Rng;

    fn random_set(n: usize, seed: u64) -> TrainingSet {
        let mut rng = crate::seed::rng(seed);
        let inputs = (0..2 * n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let targets = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        TrainingSet::new(inputs, targets, 2)
    }

    #[test]
    fn zero_residual_gives_zero_gradient() {
        let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        let params = arch.init_params(5);
        let mut data = random_set(40, 1);
        let mut scratch = arch.scratch();
        for i in 0..data.len() {
            data.targets[i] = arch.forward(&params, data.input(i), &mut scratch);
        }
        assert!(gradient(&arch, &params, &data).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn negated_targets_negate_output_bias_gradient() {
        // With a linear output, ∂/∂b_out of ½·mean(e²) is mean(e). For
        // targets t and -t and a network whose outputs are all zero, the
        // residuals flip sign.
        let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        let mut params = arch.init_params(8);
        let (w, b) = arch.layer_ranges(arch.num_layers() - 1);
        params[w.start..b.end].iter_mut().for_each(|x| *x = 0.0);
        let data = random_set(30, 2);
        let neg = TrainingSet {
            targets: data.targets.iter().map(|t| -t).collect(),
            ..data.clone()
        };
        let g = gradient(&arch, &params, &data);
        let gn = gradient(&arch, &params, &neg);
        for i in w.start..b.end {
            assert_eq!(g[i], -gn[i]);
        }
    }

    #[test]
    fn scalar_linear_normal_equations() {
        // y = w·x without bias is not expressible; use [1, 1] (w, b) with
        // b pinned at 0 and check the w entries: JᵀJ_ww = x², Jᵀe_w = x(wx - t).
        let arch = Architecture::new(&[1, 1], Activation::Identity).unwrap();
        let (x, w, t) = (1.5, 0.8, 2.0);
        let data = TrainingSet::new(vec![x], vec![t], 1);
        let ne = jacobian_accumulate(&arch, &[w, 0.0], &data);
        assert_eq!(ne.jtj[(0, 0)], x * x);
        assert_eq!(ne.jte[0], x * (w * x - t));
        assert_eq!(ne.sse, (w * x - t) * (w * x - t));
    }

    #[test]
    fn jtj_symmetric_and_jte_matches_gradient() {
        let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        let params = arch.init_params(11);
        let data = random_set(700, 3);
        let ne = jacobian_accumulate(&arch, &params, &data);
        let asym = (&ne.jtj - ne.jtj.transpose()).abs().max();
        assert!(asym < 1e-12);
        assert_eq!(asym, 0.0);
        let g = gradient(&arch, &params, &data);
        let n = data.len() as f64;
        for (a, b) in ne.jte.iter().zip(&g) {
            assert!((a - b * n).abs() < 1e-9, "{a} vs {}", b * n);
        }
        assert!((ne.sse - sse(&arch, &params, &data)).abs() < 1e-9);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let arch = Architecture::new(&DEFAULT_LAYER_SIZES, Activation::Tanh).unwrap();
        for draw in 0..10u64 {
            let mut params = arch.init_params(100 + draw);
            let data = random_set(5, 200 + draw);
            let g = gradient(&arch, &params, &data);
            let loss = |p: &[f64]| 0.5 * mse(&arch, p, &data);
            let h = 1e-5;
            let mut worst: f64 = 0.0;
            for i in 0..params.len() {
                let x = params[i];
                params[i] = x + h;
                let up = loss(&params);
                params[i] = x - h;
                let down = loss(&params);
                params[i] = x;
                worst = worst.max((g[i] - (up - down) / (2.0 * h)).abs());
            }
            let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(worst / scale < 1e-5, "draw {draw}: {}", worst / scale);
        }
    }
}
