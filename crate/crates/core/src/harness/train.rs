use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetStats, HyperConfig};
use crate::data::{train_test_split, EncodedDataset, EncodedSample};
use crate::neural::{
    backward, bce_loss, forward, init_params, optimizer_step, Mode, ModelDims, ModelParams, OptimizerState, Precision,
    Scalar, TrainSettings,
};
use crate::seed::derive_seed;
use crate::{Error, Result};

/// Train/test split shared by every config of a grid.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub vocab_size: usize,
    pub stats: DatasetStats,
    pub train: Vec<EncodedSample>,
    pub test: Vec<EncodedSample>,
}

impl ExperimentData {
    /// Stratified `train_ratio` split of `dataset` seeded from
    /// `derive_seed(seed, "split")`.
    pub fn from_dataset(dataset: &EncodedDataset, train_ratio: f64, seed: u64) -> Result<Self> {
        let stats = DatasetStats::from_dataset(dataset)?;
        let (train, test) = train_test_split(dataset.samples.clone(), train_ratio, derive_seed(seed, "split"))?;
        Ok(ExperimentData {
            vocab_size: dataset.vocab_size,
            stats,
            train,
            test,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub precision: Precision,
    pub learning_rate: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            precision: Precision::F32,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Infeasible,
    /// Training stopped at `epoch` (0-based).
    Failed { epoch: usize, reason: String },
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Infeasible => "infeasible",
            Status::Failed { .. } => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: HyperConfig,
    pub epochs: Vec<EpochMetrics>,
    pub wall_time_s: f64,
    pub status: Status,
}

impl ExperimentResult {
    pub fn infeasible(config: HyperConfig) -> Self {
        ExperimentResult {
            config,
            epochs: Vec::new(),
            wall_time_s: 0.0,
            status: Status::Infeasible,
        }
    }

    pub fn failed(config: HyperConfig, epoch: usize, reason: impl Into<String>) -> Self {
        ExperimentResult {
            config,
            epochs: Vec::new(),
            wall_time_s: 0.0,
            status: Status::Failed {
                epoch,
                reason: reason.into(),
            },
        }
    }

    /// Validation loss after the last epoch of a successful run.
    pub fn final_val_loss(&self) -> Option<f64> {
        match self.status {
            Status::Ok => self.epochs.last().map(|e| e.val_loss),
            _ => None,
        }
    }
}

/// Mean BCE and accuracy (cutoff 0.5) of `params` on `samples`, evaluated in
/// batches with every unit active.
pub fn evaluate<T: Scalar>(params: &ModelParams<T>, samples: &[EncodedSample], batch_size: usize) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::data("evaluation set is empty"));
    }
    let settings = TrainSettings::default();
    // Eval mode draws no masks; the generator is never consulted.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut loss, mut correct) = (0.0, 0usize);
    for chunk in samples.chunks(batch_size.max(1)) {
        let batch: Vec<&[u32]> = chunk.iter().map(|s| s.ids.as_slice()).collect();
        let labels: Vec<u8> = chunk.iter().map(|s| s.label.as_u8()).collect();
        let (probs, _) = forward(params, &batch, &settings, Mode::Eval, &mut rng)?;
        loss += bce_loss(&probs, &labels)?.to_f64().unwrap_or(f64::NAN) * chunk.len() as f64;
        correct += count_correct(&probs, &labels);
    }
    let n = samples.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

fn count_correct<T: Scalar>(probs: &[T], labels: &[u8]) -> usize {
    probs
        .iter()
        .zip(labels)
        .filter(|(&p, &y)| (p >= T::lit(0.5)) == (y == 1))
        .count()
}

/// Trains `config` for its epoch count and evaluates on the test split after
/// every epoch. Never panics on numerical trouble: a non-finite loss or
/// gradient yields [`Status::Failed`].
pub fn run_experiment(config: &HyperConfig, data: &ExperimentData, opts: &RunOptions) -> ExperimentResult {
    let started = Instant::now();
    let outcome = match opts.precision {
        Precision::F32 => train::<f32>(config, data, opts),
        Precision::F64 => train::<f64>(config, data, opts),
    };
    let mut result = match outcome {
        Ok(epochs) => ExperimentResult {
            config: config.clone(),
            epochs,
            wall_time_s: 0.0,
            status: Status::Ok,
        },
        Err((epoch, err)) => ExperimentResult::failed(config.clone(), epoch, err.to_string()),
    };
    result.wall_time_s = started.elapsed().as_secs_f64();
    result
}

fn train<T: Scalar>(
    config: &HyperConfig,
    data: &ExperimentData,
    opts: &RunOptions,
) -> std::result::Result<Vec<EpochMetrics>, (usize, Error)> {
    let setup = |e: Error| (0, e);
    config.validate().map_err(setup)?;
    let settings = TrainSettings {
        optimizer: config.optimizer,
        learning_rate: opts.learning_rate,
        dropout_out: config.dropout,
        dropout_recurrent: config.dropout,
        batch_size: config.batch_size,
        epochs: config.epochs,
        seed: config.seed,
        precision: opts.precision,
    };
    settings.validate().map_err(setup)?;
    let seq_len = data.stats.padding(config.padding);
    let train: Vec<EncodedSample> = data.train.iter().map(|s| s.repadded(seq_len)).collect();
    let test: Vec<EncodedSample> = data.test.iter().map(|s| s.repadded(seq_len)).collect();
    if train.is_empty() || test.is_empty() {
        return Err(setup(Error::data("train and test splits must be non-empty")));
    }

    let dims = ModelDims::for_config(data.vocab_size, config).map_err(setup)?;
    let mut params = init_params::<T>(dims, derive_seed(config.seed, "init"));
    let mut state = OptimizerState::for_params(&params);
    let opt_cfg = settings.optimizer_config();
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, "dropout"));

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let fail = |e: Error| (epoch, e);
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("shuffle/{epoch}")));
        order.shuffle(&mut shuffle_rng);

        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&[u32]> = chunk.iter().map(|&i| train[i].ids.as_slice()).collect();
            let labels: Vec<u8> = chunk.iter().map(|&i| train[i].label.as_u8()).collect();
            let (probs, tape) = forward(&params, &batch, &settings, Mode::Train, &mut dropout_rng).map_err(fail)?;
            let loss = bce_loss(&probs, &labels).map_err(fail)?.to_f64().unwrap_or(f64::NAN);
            if !loss.is_finite() {
                return Err(fail(Error::NonFinite(format!("training loss at epoch {epoch}"))));
            }
            loss_sum += loss * chunk.len() as f64;
            correct += count_correct(&probs, &labels);
            let grads = backward(&params, &tape, &labels).map_err(fail)?;
            optimizer_step(&mut params, &grads, &mut state, &opt_cfg).map_err(fail)?;
        }

        let (val_loss, val_acc) = evaluate(&params, &test, config.batch_size).map_err(fail)?;
        if !val_loss.is_finite() {
            return Err(fail(Error::NonFinite(format!("validation loss at epoch {epoch}"))));
        }
        let n = train.len() as f64;
        history.push(EpochMetrics {
            train_loss: loss_sum / n,
            train_acc: correct as f64 / n,
            val_loss,
            val_acc,
        });
    }
    Ok(history)
}

/// `⌈n / batch⌉`, the optimizer steps per epoch.
pub fn iterations_per_epoch(n: usize, batch: usize) -> usize {
    n.div_ceil(batch)
}
