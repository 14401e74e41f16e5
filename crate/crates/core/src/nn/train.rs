//! Full-batch training with a held-out validation split and early stopping.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::backprop::{self, jacobian_accumulate, NormalEquations, TrainingSet};
use super::first_order::{first_order_step, FirstOrderAlgorithm, FirstOrderConfig, FirstOrderState};
use super::lm::{lm_epoch, LeastSquares, LmConfig, LmState};
use super::model::{Activation, Architecture, MlpModel, TrainingProvenance, DEFAULT_LAYER_SIZES};
use crate::error::{Error, Result};
use crate::rank::NormalizationStats;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trainer {
    Lm(LmConfig),
    FirstOrder(FirstOrderConfig),
}

impl Trainer {
    pub fn name(&self) -> &'static str {
        match self {
            Trainer::Lm(_) => "lm",
            Trainer::FirstOrder(c) => match c.algorithm {
                FirstOrderAlgorithm::Gd => "gd",
                FirstOrderAlgorithm::Gdm => "gdm",
                FirstOrderAlgorithm::Rprop => "rprop",
            },
        }
    }

    /// `lm`, `gd`, `gdm` or `rprop` with default settings.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "lm" => Trainer::Lm(LmConfig::default()),
            "gd" => Trainer::FirstOrder(FirstOrderConfig::new(FirstOrderAlgorithm::Gd)),
            "gdm" => Trainer::FirstOrder(FirstOrderConfig::new(FirstOrderAlgorithm::Gdm)),
            "rprop" => Trainer::FirstOrder(FirstOrderConfig::new(FirstOrderAlgorithm::Rprop)),
            other => return Err(Error::config(format!("unknown training algorithm {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub layer_sizes: Vec<usize>,
    pub trainer: Trainer,
    pub max_epochs: usize,
    pub patience: usize,
    pub train_fraction: f64,
    /// Master seed; the init and split seeds are derived from it.
    pub seed: u64,
    /// Optional wall-clock limit. Runs cut short by it are not reproducible.
    pub time_budget_secs: Option<f64>,
}

impl TrainConfig {
    pub fn new(trainer: Trainer, seed: u64) -> Self {
        TrainConfig {
            layer_sizes: DEFAULT_LAYER_SIZES.to_vec(),
            trainer,
            max_epochs: 1000,
            patience: 10,
            train_fraction: 0.85,
            seed,
            time_budget_secs: None,
        }
    }

    pub fn model_seed(&self) -> u64 {
        seed::derive_seed(self.seed, 0)
    }

    pub fn split_seed(&self) -> u64 {
        seed::derive_seed(self.seed, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train fraction must be in (0, 1)"));
        }
        if self.patience == 0 {
            return Err(Error::config("patience must be positive"));
        }
        if let Some(t) = self.time_budget_secs {
            if !(t > 0.0) {
                return Err(Error::config("time budget must be positive"));
            }
        }
        match &self.trainer {
            Trainer::Lm(c) => c.validate(),
            Trainer::FirstOrder(c) => c.validate(),
        }
    }
}

/// One row of the training history. Epoch 0 is the initial model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    /// Damping after the epoch; LM only.
    pub mu: Option<f64>,
    /// Whether the epoch changed the parameters.
    pub accepted: bool,
}

pub const HISTORY_CSV_HEADER: &str = "epoch,train_mse,val_mse,mu";

pub fn write_history_csv<W: Write>(mut out: W, history: &[EpochRecord]) -> std::io::Result<()> {
    writeln!(out, "{HISTORY_CSV_HEADER}")?;
    for r in history {
        let mu = r.mu.map(|m| m.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.epoch, r.train_mse, r.val_mse, mu)?;
    }
    Ok(())
}

/// Patience-based early stopping on validation MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Record an epoch's validation MSE; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, val_mse: f64) -> bool {
        if val_mse < self.best {
            self.best = val_mse;
            self.best_epoch = epoch;
            self.since_best = 0;
            true
        } else {
            self.since_best += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.since_best >= self.patience
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
    MuMax,
    TimeBudget,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Patience => "patience",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::MuMax => "mu_max",
            StopReason::TimeBudget => "time_budget",
        }
    }
}

/// What one optimizer epoch reports back to the driver.
struct StepOutcome {
    train_mse: f64,
    mu: Option<f64>,
    accepted: bool,
    terminated: bool,
}

struct RunResult {
    best_params: Vec<f64>,
    history: Vec<EpochRecord>,
    best_epoch: usize,
    best_val: f64,
    stop: StopReason,
}

/// Epoch loop shared by all optimizers: evaluate validation after each
/// epoch, snapshot the best parameters, stop on patience, `max_epochs`,
/// optimizer termination or the time budget.
fn run_epochs(
    mut params: Vec<f64>,
    initial_train_mse: f64,
    initial_mu: Option<f64>,
    max_epochs: usize,
    patience: usize,
    deadline: Option<Instant>,
    mut step: impl FnMut(&mut Vec<f64>) -> StepOutcome,
    mut val_mse: impl FnMut(&[f64]) -> f64,
) -> RunResult {
    let mut stopper = EarlyStopping::new(patience);
    let v0 = val_mse(&params);
    stopper.observe(0, v0);
    let mut best_params = params.clone();
    let mut history = vec![EpochRecord {
        epoch: 0,
        train_mse: initial_train_mse,
        val_mse: v0,
        mu: initial_mu,
        accepted: false,
    }];
    let mut stop = StopReason::MaxEpochs;
    for epoch in 1..=max_epochs {
        let out = step(&mut params);
        if out.terminated {
            stop = StopReason::MuMax;
            break;
        }
        let v = val_mse(&params);
        history.push(EpochRecord {
            epoch,
            train_mse: out.train_mse,
            val_mse: v,
            mu: out.mu,
            accepted: out.accepted,
        });
        if stopper.observe(epoch, v) {
            best_params.copy_from_slice(&params);
        }
        if stopper.should_stop() {
            stop = StopReason::Patience;
            break;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            stop = StopReason::TimeBudget;
            break;
        }
    }
    RunResult {
        best_params,
        history,
        best_epoch: stopper.best_epoch(),
        best_val: stopper.best(),
        stop,
    }
}

/// Least-squares view of an MLP on a fixed training set.
pub struct MlpProblem<'a> {
    pub arch: &'a Architecture,
    pub data: &'a TrainingSet,
}

impl LeastSquares for MlpProblem<'_> {
    fn normal_equations(&self, params: &[f64]) -> NormalEquations {
        jacobian_accumulate(self.arch, params, self.data)
    }

    fn sse(&self, params: &[f64]) -> f64 {
        backprop::sse(self.arch, params, self.data)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Best-validation snapshot, with normalization stats and provenance.
    pub model: MlpModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stop_reason: StopReason,
}

/// Split row indices into training and validation sets.
pub fn split_indices(n: usize, train_fraction: f64, split_seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::config(format!(
            "a {train_fraction} split of {n} rows leaves an empty side"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::rng(split_seed));
    let val = idx.split_off(n_train);
    Ok((idx, val))
}

fn gather(data: &TrainingSet, rows: &[usize]) -> TrainingSet {
    let mut inputs = Vec::with_capacity(rows.len() * data.dim);
    let mut targets = Vec::with_capacity(rows.len());
    for &i in rows {
        inputs.extend_from_slice(data.input(i));
        targets.push(data.targets[i]);
    }
    TrainingSet::new(inputs, targets, data.dim)
}

fn fit_column(values: impl Iterator<Item = f64>, what: &str) -> Result<NormalizationStats> {
    let v: Vec<f64> = values.collect();
    NormalizationStats::fit(&v).map_err(|_| Error::DegenerateFeature(what.to_string()))
}

fn standardize(data: &TrainingSet, inputs: &[NormalizationStats], output: NormalizationStats) -> TrainingSet {
    let x = data
        .inputs
        .iter()
        .enumerate()
        .map(|(k, &v)| inputs[k % data.dim].apply(v))
        .collect();
    let t = data.targets.iter().map(|&v| output.apply(v)).collect();
    TrainingSet::new(x, t, data.dim)
}

/// Train a model on rows that have been rank-scaled but not yet
/// standardized. Standardization statistics are fitted on the training
/// split only and stored in the returned model.
pub fn train(data: &TrainingSet, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let arch = Architecture::new(&cfg.layer_sizes, Activation::Tanh)?;
    if data.dim != arch.num_inputs() {
        return Err(Error::Schema(format!(
            "dataset has {} inputs, network takes {}",
            data.dim,
            arch.num_inputs()
        )));
    }
    if let Some(x) = data.inputs.iter().chain(&data.targets).find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("training value {x}")));
    }
    let (train_rows, val_rows) = split_indices(data.len(), cfg.train_fraction, cfg.split_seed())?;
    let raw_train = gather(data, &train_rows);
    let raw_val = gather(data, &val_rows);

    let input_stats = (0..data.dim)
        .map(|k| {
            fit_column(
                (0..raw_train.len()).map(|i| raw_train.input(i)[k]),
                &format!("input column {k}"),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let output_stats = NormalizationStats::fit(&raw_train.targets).map_err(|_| Error::ConstantTarget)?;
    let train_set = standardize(&raw_train, &input_stats, output_stats);
    let val_set = standardize(&raw_val, &input_stats, output_stats);

    let params = arch.init_params(cfg.model_seed());
    let deadline = cfg
        .time_budget_secs
        .map(|s| Instant::now() + Duration::from_secs_f64(s));
    let val_mse = |p: &[f64]| backprop::mse(&arch, p, &val_set);
    let n_train = train_set.len() as f64;
    let initial_train = backprop::mse(&arch, &params, &train_set);

    let run = match &cfg.trainer {
        Trainer::Lm(lm) => {
            let problem = MlpProblem {
                arch: &arch,
                data: &train_set,
            };
            let mut state = LmState::new(lm);
            run_epochs(
                params,
                initial_train,
                Some(state.mu),
                cfg.max_epochs,
                cfg.patience,
                deadline,
                |p| {
                    let e = lm_epoch(&problem, p, &mut state, lm);
                    StepOutcome {
                        train_mse: e.sse_after / n_train,
                        mu: Some(state.mu),
                        accepted: e.accepted,
                        terminated: state.terminated,
                    }
                },
                val_mse,
            )
        }
        Trainer::FirstOrder(fo) => {
            let mut state = FirstOrderState::new(fo, arch.num_params());
            run_epochs(
                params,
                initial_train,
                None,
                cfg.max_epochs,
                cfg.patience,
                deadline,
                |p| {
                    let g = backprop::gradient(&arch, p, &train_set);
                    first_order_step(fo, &mut state, p, &g);
                    StepOutcome {
                        train_mse: backprop::mse(&arch, p, &train_set),
                        mu: None,
                        accepted: true,
                        terminated: false,
                    }
                },
                val_mse,
            )
        }
    };

    let mut model = MlpModel::with_params(arch, run.best_params);
    model.input_stats = input_stats;
    model.output_stats = output_stats;
    let config = serde_json::to_value(cfg).map_err(|e| Error::config(e.to_string()))?;
    model.provenance = Some(TrainingProvenance {
        model_seed: cfg.model_seed(),
        split_seed: cfg.split_seed(),
        corpus_manifest_hash: None,
        algorithm: cfg.trainer.name().to_string(),
        config,
        epochs_run: run.history.last().map_or(0, |r| r.epoch),
        best_epoch: run.best_epoch,
        best_val_mse: run.best_val,
        stop_reason: run.stop.as_str().to_string(),
    });
    Ok(TrainOutcome {
        model,
        history: run.history,
        best_epoch: run.best_epoch,
        best_val_mse: run.best_val,
        stop_reason: run.stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn toy_data(n: usize, seed: u64) -> TrainingSet {
        let mut rng = seed::rng(seed);
        let mut x = Vec::new();
        let mut t = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            x.extend([a, b]);
            t.push((1.5 * a).tanh() - 0.5 * b * b);
        }
        TrainingSet::new(x, t, 2)
    }

    #[test]
    fn early_stopping_contract() {
        // Validation improves until epoch 3 and worsens afterwards.
        let vals = [10.0, 5.0, 3.0, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0];
        let mut epoch = 0;
        let run = run_epochs(
            vec![0.0],
            0.0,
            None,
            100,
            10,
            None,
            |p| {
                epoch += 1;
                p[0] = epoch as f64;
                StepOutcome {
                    train_mse: 0.0,
                    mu: None,
                    accepted: true,
                    terminated: false,
                }
            },
            |p| vals[p[0] as usize],
        );
        assert_eq!(run.stop, StopReason::Patience);
        assert_eq!(run.history.last().unwrap().epoch, 13);
        assert_eq!(run.best_epoch, 3);
        assert_eq!(run.best_params, vec![3.0]);
        assert_eq!(run.best_val, 2.0);
    }

    #[test]
    fn stopper_counts_ties_as_no_improvement() {
        let mut s = EarlyStopping::new(2);
        assert!(s.observe(0, 1.0));
        assert!(!s.observe(1, 1.0));
        assert!(!s.should_stop());
        assert!(!s.observe(2, 1.5));
        assert!(s.should_stop());
    }

    #[test]
    fn split_is_a_seeded_partition() {
        let (a, b) = split_indices(100, 0.85, 9).unwrap();
        assert_eq!((a.len(), b.len()), (85, 15));
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_indices(100, 0.85, 9).unwrap(), (a, b));
        assert!(matches!(split_indices(1, 0.85, 0), Err(Error::Config(_))));
    }

    fn small_cfg(trainer: Trainer) -> TrainConfig {
        let mut cfg = TrainConfig::new(trainer, 42);
        cfg.layer_sizes = vec![2, 5, 1];
        cfg.max_epochs = 40;
        cfg
    }

    #[test]
    fn lm_run_is_deterministic_and_descends() {
        let data = toy_data(200, 1);
        let cfg = small_cfg(Trainer::from_name("lm").unwrap());
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.history, b.history);
        let accepted: Vec<f64> = a.history.iter().filter(|r| r.accepted).map(|r| r.train_mse).collect();
        assert!(accepted.windows(2).all(|w| w[1] < w[0]));
        assert!(a.history.last().unwrap().train_mse < 0.5 * a.history[0].train_mse);
        let prov = a.model.provenance.as_ref().unwrap();
        let min_val = a.history.iter().map(|r| r.val_mse).fold(f64::INFINITY, f64::min);
        assert_eq!(prov.best_val_mse, min_val);
        assert_eq!(a.best_val_mse, a.history[a.best_epoch].val_mse);
    }

    #[test]
    fn first_order_trainers_reduce_loss() {
        let data = toy_data(200, 2);
        for name in ["gd", "gdm", "rprop"] {
            let mut cfg = small_cfg(Trainer::from_name(name).unwrap());
            cfg.max_epochs = 30;
            let out = train(&data, &cfg).unwrap();
            assert!(out.best_val_mse <= out.history[0].val_mse, "{name}");
            assert_eq!(out.model.provenance.unwrap().algorithm, name);
        }
    }

    #[test]
    fn stats_come_from_the_training_split() {
        let data = toy_data(100, 3);
        let cfg = small_cfg(Trainer::from_name("rprop").unwrap());
        let out = train(&data, &cfg).unwrap();
        let (rows, _) = split_indices(100, 0.85, cfg.split_seed()).unwrap();
        let t: Vec<f64> = rows.iter().map(|&i| data.targets[i]).collect();
        assert_eq!(out.model.output_stats, NormalizationStats::fit(&t).unwrap());
    }

    #[test]
    fn constant_target_is_rejected() {
        let data = TrainingSet::new(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], vec![1.0; 4], 2);
        let cfg = small_cfg(Trainer::from_name("gd").unwrap());
        assert!(matches!(train(&data, &cfg), Err(Error::ConstantTarget)));
    }

    #[test]
    fn history_csv_layout() {
        let mut buf = Vec::new();
        let rec = EpochRecord {
            epoch: 1,
            train_mse: 0.5,
            val_mse: 0.25,
            mu: Some(0.00075),
            accepted: true,
        };
        write_history_csv(&mut buf, &[rec]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epoch,train_mse,val_mse,mu\n1,0.5,0.25,0.00075\n");
    }
}
