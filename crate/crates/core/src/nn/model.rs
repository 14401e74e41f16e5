use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::centrality::Metric;
use crate::error::{Error, Result};
use crate::rank::NormalizationStats;
use crate::seed;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Default hidden layout: three hidden layers of 20 units.
pub const DEFAULT_LAYER_SIZES: [usize; 5] = [2, 20, 20, 20, 1];

/// Weight/bias init bound is `INIT_SCALE / sqrt(fan_in)`.
pub const INIT_SCALE: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

/// `1 - 2 / (exp(2z) + 1)`: several times cheaper than `f64::tanh`, with
/// absolute error around one ulp of 1.
#[inline]
fn tanh(z: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * z).exp() + 1.0)
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => tanh(z),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Layer sizes and activations; parameters live in a flat vector laid out
/// per layer as the `out × in` weight matrix (row-major) followed by the
/// `out` biases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    layer_sizes: Vec<usize>,
    hidden: Activation,
    /// Start of each layer's weights in the flat parameter vector.
    offsets: Vec<usize>,
    num_params: usize,
}

/// Reusable per-thread buffers for forward/backward passes.
#[derive(Debug, Clone)]
pub struct Scratch {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Architecture {
    pub fn new(layer_sizes: &[usize], hidden: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::config(format!("invalid layer sizes {layer_sizes:?}")));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::config("regression networks have a single output"));
        }
        let mut offsets = Vec::with_capacity(layer_sizes.len() - 1);
        let mut p = 0;
        for w in layer_sizes.windows(2) {
            offsets.push(p);
            p += w[0] * w[1] + w[1];
        }
        Ok(Architecture {
            layer_sizes: layer_sizes.to_vec(),
            hidden,
            offsets,
            num_params: p,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_inputs(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `(weights, biases)` ranges of layer `l` in the flat vector.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let w = self.offsets[l];
        (w..w + i * o, w + i * o..w + i * o + o)
    }

    fn activation(&self, l: usize) -> Activation {
        if l + 1 == self.num_layers() {
            Activation::Identity
        } else {
            self.hidden
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            acts: self.layer_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            deltas: self.layer_sizes.iter().map(|&s| vec![0.0; s]).collect(),
        }
    }

    /// Uniform init in `±INIT_SCALE / sqrt(fan_in)` for weights and biases.
    pub fn init_params(&self, model_seed: u64) -> Vec<f64> {
        let mut rng = seed::rng(model_seed);
        let mut params = vec![0.0; self.num_params];
        for l in 0..self.num_layers() {
            let bound = INIT_SCALE / (self.layer_sizes[l] as f64).sqrt();
            let (w, b) = self.layer_ranges(l);
            for x in &mut params[w.start..b.end] {
                *x = rng.random_range(-bound..=bound);
            }
        }
        params
    }

    /// Forward pass, leaving every layer's activations in `scratch`.
    pub fn forward(&self, params: &[f64], input: &[f64], scratch: &mut Scratch) -> f64 {
        debug_assert_eq!(input.len(), self.num_inputs());
        scratch.acts[0].copy_from_slice(input);
        for l in 0..self.num_layers() {
            let (wr, br) = self.layer_ranges(l);
            let w = &params[wr];
            let b = &params[br];
            let n_in = self.layer_sizes[l];
            let act = self.activation(l);
            let (head, tail) = scratch.acts.split_at_mut(l + 1);
            let x = &head[l];
            let out = &mut tail[0];
            for (j, o) in out.iter_mut().enumerate() {
                let row = &w[j * n_in..(j + 1) * n_in];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(x.iter()) {
                    acc += wi * xi;
                }
                *o = act.apply(b[j] + acc);
            }
        }
        scratch.acts[self.num_layers()][0]
    }

    /// Forward pass over row-major `inputs`, appending one output per row.
    /// Rows are processed in feature-major blocks so the inner loops run
    /// across samples; every row's arithmetic is the same as in
    /// [`Architecture::forward`], so the outputs are bit-identical.
    pub fn forward_many(&self, params: &[f64], inputs: &[f64], out: &mut Vec<f64>) {
        const BLOCK: usize = 256;
        let k = self.num_inputs();
        let widest = *self.layer_sizes.iter().max().unwrap_or(&1);
        let mut cur = vec![0.0; widest * BLOCK];
        let mut next = vec![0.0; widest * BLOCK];
        for block in inputs.chunks(k * BLOCK) {
            let nb = block.len() / k;
            for (s, row) in block.chunks_exact(k).enumerate() {
                for (i, &x) in row.iter().enumerate() {
                    cur[i * nb + s] = x;
                }
            }
            for l in 0..self.num_layers() {
                let (wr, br) = self.layer_ranges(l);
                let (w, b) = (&params[wr], &params[br]);
                let n_in = self.layer_sizes[l];
                let act = self.activation(l);
                for (j, &bj) in b.iter().enumerate() {
                    let acc = &mut next[j * nb..(j + 1) * nb];
                    acc.fill(0.0);
                    for i in 0..n_in {
                        let wji = w[j * n_in + i];
                        for (a, x) in acc.iter_mut().zip(&cur[i * nb..(i + 1) * nb]) {
                            *a += wji * x;
                        }
                    }
                    for a in acc.iter_mut() {
                        *a = act.apply(bj + *a);
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
            out.extend_from_slice(&cur[..nb]);
        }
    }

    /// Output and its derivative with respect to every parameter
    /// (`row.len() == num_params`).
    pub fn output_gradient(
        &self,
        params: &[f64],
        input: &[f64],
        scratch: &mut Scratch,
        row: &mut [f64],
    ) -> f64 {
        let y = self.forward(params, input, scratch);
        let last = self.num_layers();
        scratch.deltas[last][0] = 1.0;
        for l in (0..last).rev() {
            let (wr, br) = self.layer_ranges(l);
            let n_in = self.layer_sizes[l];
            let n_out = self.layer_sizes[l + 1];
            let (dlo, dhi) = scratch.deltas.split_at_mut(l + 1);
            let delta = &dhi[0];
            let x = &scratch.acts[l];
            let (grad_w, grad_b) = row[wr.start..br.end].split_at_mut(n_in * n_out);
            for j in 0..n_out {
                let d = delta[j];
                grad_b[j] = d;
                for (g, &xi) in grad_w[j * n_in..(j + 1) * n_in].iter_mut().zip(x) {
                    *g = d * xi;
                }
            }
            if l > 0 {
                let w = &params[wr];
                let prev = &mut dlo[l];
                let act = self.activation(l - 1);
                for (i, p) in prev.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for j in 0..n_out {
                        s += w[j * n_in + i] * delta[j];
                    }
                    *p = s * act.derivative_from_output(x[i]);
                }
            }
        }
        y
    }
}

/// Provenance recorded by the trainer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProvenance {
    pub model_seed: u64,
    pub split_seed: u64,
    pub corpus_manifest_hash: Option<String>,
    pub algorithm: String,
    pub config: serde_json::Value,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stop_reason: String,
}

/// A trained regression network together with the statistics needed to
/// normalize its inputs and denormalize its output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub arch: Architecture,
    pub params: Vec<f64>,
    pub input_stats: Vec<NormalizationStats>,
    pub output_stats: NormalizationStats,
    pub target_metric: Option<Metric>,
    pub provenance: Option<TrainingProvenance>,
}

const IDENTITY_STATS: NormalizationStats = NormalizationStats { mean: 0.0, std: 1.0 };

impl MlpModel {
    /// Randomly initialized model with identity normalization.
    pub fn new(arch: Architecture, model_seed: u64) -> Self {
        let params = arch.init_params(model_seed);
        Self::with_params(arch, params)
    }

    pub fn with_params(arch: Architecture, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), arch.num_params());
        let k = arch.num_inputs();
        MlpModel {
            arch,
            params,
            input_stats: vec![IDENTITY_STATS; k],
            output_stats: IDENTITY_STATS,
            target_metric: None,
            provenance: None,
        }
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        &self.params[self.arch.layer_ranges(l).0]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.params[self.arch.layer_ranges(l).1]
    }

    /// Evaluate on an already-normalized input.
    pub fn forward(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.arch.num_inputs() {
            return Err(Error::Schema(format!(
                "model takes {} inputs, got {}",
                self.arch.num_inputs(),
                input.len()
            )));
        }
        if let Some(x) = input.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("model input {x}")));
        }
        Ok(self.arch.forward(&self.params, input, &mut self.arch.scratch()))
    }

    /// Evaluate a flat row-major batch of normalized inputs.
    pub fn forward_batch(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let k = self.arch.num_inputs();
        if !inputs.len().is_multiple_of(k) {
            return Err(Error::Schema(format!(
                "batch length {} is not a multiple of {k}",
                inputs.len()
            )));
        }
        if let Some(x) = inputs.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("model input {x}")));
        }
        let mut out = Vec::with_capacity(inputs.len() / k);
        self.arch.forward_many(&self.params, inputs, &mut out);
        Ok(out)
    }

    pub fn to_file(&self) -> ModelFile {
        let layers = 0..self.arch.num_layers();
        ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            target_metric: self.target_metric,
            layer_sizes: self.arch.layer_sizes().to_vec(),
            hidden_activation: self.arch.hidden_activation(),
            output_activation: Activation::Identity,
            weights: layers.clone().map(|l| self.weights(l).to_vec()).collect(),
            biases: layers.map(|l| self.biases(l).to_vec()).collect(),
            input_stats: self.input_stats.clone(),
            output_stats: self.output_stats,
            training_provenance: self.provenance.clone(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model schema version {}",
                file.schema_version
            )));
        }
        if file.output_activation != Activation::Identity {
            return Err(Error::Schema("output activation must be identity".into()));
        }
        let arch = Architecture::new(&file.layer_sizes, file.hidden_activation)
            .map_err(|e| Error::Schema(e.to_string()))?;
        if file.weights.len() != arch.num_layers() || file.biases.len() != arch.num_layers() {
            return Err(Error::Schema("layer count does not match layer_sizes".into()));
        }
        if file.input_stats.len() != arch.num_inputs() {
            return Err(Error::Schema("input_stats length does not match inputs".into()));
        }
        let mut params = Vec::with_capacity(arch.num_params());
        for l in 0..arch.num_layers() {
            let (wr, br) = arch.layer_ranges(l);
            if file.weights[l].len() != wr.len() || file.biases[l].len() != br.len() {
                return Err(Error::Schema(format!("layer {l} has the wrong shape")));
            }
            params.extend_from_slice(&file.weights[l]);
            params.extend_from_slice(&file.biases[l]);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Schema("non-finite parameter".into()));
        }
        Ok(MlpModel {
            arch,
            params,
            input_stats: file.input_stats,
            output_stats: file.output_stats,
            target_metric: file.target_metric,
            provenance: file.training_provenance,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_file(file)
    }
}

/// On-disk model layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub target_metric: Option<Metric>,
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    /// Row-major `out × in` matrix per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input_stats: Vec<NormalizationStats>,
    pub output_stats: NormalizationStats,
    pub training_provenance: Option<TrainingProvenance>,
}
