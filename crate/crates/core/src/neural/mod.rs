//! Embedding + stacked LSTM + dense head, trained with BPTT.
//!
//! Everything is generic over [`Scalar`] so the same code trains in single
//! precision and is checked against finite differences in double precision.

mod cell;
mod network;
mod optim;
mod params;
mod snapshot;
mod tensor;

pub use cell::{lstm_cell_forward, CellOutput};
pub use network::{backward, bce_loss, forward, LayerTape, LstmState, Mode, Tape, BCE_EPSILON};
pub use optim::{optimizer_step, OptimizerConfig, OptimizerKind, OptimizerState};
pub use params::{init_params, LstmLayer, ModelDims, ModelParams, FC_UNITS};
pub use snapshot::{read_snapshot, write_snapshot};
pub use tensor::{Matrix, Scalar};

/// Floating point width used for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

/// Per-run training knobs that are not part of the network shape.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// Inverted dropout on connections leaving an LSTM layer.
    pub dropout_out: f64,
    /// Variational dropout on the recurrent connection.
    pub dropout_recurrent: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.001,
            dropout_out: 0.0,
            dropout_recurrent: 0.0,
            batch_size: 64,
            epochs: 5,
            seed: 0,
            precision: Precision::F32,
        }
    }
}

impl TrainSettings {
    pub fn validate(&self) -> crate::Result<()> {
        let in_unit = |p: f64| (0.0..1.0).contains(&p);
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(crate::Error::config("learning rate must be positive"));
        }
        if !in_unit(self.dropout_out) || !in_unit(self.dropout_recurrent) {
            return Err(crate::Error::config("dropout must lie in [0, 1)"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(crate::Error::config("batch size and epochs must be positive"));
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.learning_rate,
            ..OptimizerConfig::new(self.optimizer)
        }
    }
}
