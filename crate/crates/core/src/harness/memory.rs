use std::collections::BTreeMap;

use super::HyperConfig;
use crate::data::{padding_length, EncodedDataset, Percentile};
use crate::Result;

/// What the feasibility model needs to know about the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub vocab_size: usize,
    pub padding_lengths: BTreeMap<Percentile, usize>,
}

impl DatasetStats {
    pub fn from_dataset(ds: &EncodedDataset) -> Result<Self> {
        let lengths = ds.lengths();
        let padding_lengths = Percentile::ALL
            .iter()
            .map(|&p| padding_length(&lengths, p).map(|l| (p, l)))
            .collect::<Result<_>>()?;
        Ok(DatasetStats {
            vocab_size: ds.vocab_size,
            padding_lengths,
        })
    }

    pub fn padding(&self, p: Percentile) -> usize {
        self.padding_lengths[&p]
    }
}

/// Crude activation-memory model:
/// `bytes_per_scalar · B · L · (d_embed + c_act · layers · units) · safety`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryModel {
    pub bytes_per_scalar: f64,
    /// Activation tensors cached per LSTM cell and step.
    pub c_act: f64,
    pub safety: f64,
}

impl Default for MemoryModel {
    fn default() -> Self {
        MemoryModel {
            bytes_per_scalar: 4.0,
            c_act: 8.0,
            safety: 2.0,
        }
    }
}

impl MemoryModel {
    pub fn estimated_bytes(&self, config: &HyperConfig, stats: &DatasetStats) -> f64 {
        let per_step = config.n_embedding as f64 + self.c_act * (config.n_layers * config.n_units) as f64;
        self.bytes_per_scalar
            * config.batch_size as f64
            * stats.padding(config.padding) as f64
            * per_step
            * self.safety
    }
}

/// `true` when the estimated footprint fits `budget_bytes` (may be infinite).
pub fn feasibility_filter(config: &HyperConfig, stats: &DatasetStats, budget_bytes: f64, model: &MemoryModel) -> bool {
    model.estimated_bytes(config, stats) <= budget_bytes
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::harness::{enumerate_grid, GridSpec};

    fn stats() -> DatasetStats {
        DatasetStats {
            vocab_size: 50,
            padding_lengths: [(Percentile::P25, 40), (Percentile::P50, 60), (Percentile::P75, 90), (Percentile::P100, 200)]
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn infinite_and_zero_budgets() {
        let grid = enumerate_grid(&GridSpec::full(0)).unwrap();
        let m = MemoryModel::default();
        assert!(grid.iter().all(|c| feasibility_filter(c, &stats(), f64::INFINITY, &m)));
        assert!(grid.iter().all(|c| !feasibility_filter(c, &stats(), 0.0, &m)));
    }

    #[test]
    fn hand_computed_estimate() {
        let c = &enumerate_grid(&GridSpec::parse("n_layers=2\nn_units=64\ndropout=0\nn_embedding=16\npadding_percentile=P50\nbatch_size=128\noptimizer=adam", 0).unwrap()).unwrap()[0];
        let bytes = MemoryModel::default().estimated_bytes(c, &stats());
        assert_eq!(bytes, 4.0 * 128.0 * 60.0 * (16.0 + 8.0 * 128.0) * 2.0);
    }

    proptest! {
        #[test]
        fn stats_lengths_monotone(lengths in proptest::collection::vec(1usize..500, 1..50)) {
            let ds = crate::data::EncodedDataset::new(
                2,
                500,
                lengths.iter().enumerate().map(|(i, &n)| crate::data::EncodedSample {
                    file_id: i.to_string(),
                    label: crate::data::Label::ALL[i % 2],
                    ids: crate::data::pad_or_truncate(&vec![1; n], 500),
                }).collect(),
            ).unwrap();
            let s = DatasetStats::from_dataset(&ds).unwrap();
            let v: Vec<usize> = s.padding_lengths.values().copied().collect();
            prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(v[3], *lengths.iter().max().unwrap());
        }
    }
}
