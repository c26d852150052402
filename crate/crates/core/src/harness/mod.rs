//! Grid enumeration, memory-feasibility modelling, deterministic short
//! training runs and the per-epoch results CSV.

mod config;
mod grid;
mod memory;
mod results;
mod train;

pub use config::{enumerate_grid, GridSpec, HyperConfig};
pub use grid::{run_grid, run_grid_with, GridOptions};
pub use memory::{feasibility_filter, DatasetStats, MemoryModel};
pub use results::{load_results, write_results, LoadedResults, ResultsWriter, RESULTS_HEADER};
pub use train::{evaluate, iterations_per_epoch, run_experiment, EpochMetrics, ExperimentData, ExperimentResult, RunOptions, Status};
