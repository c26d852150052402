//! Parallel grid execution with resume.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Mutex;

use rayon::prelude::*;

use super::memory::{feasibility_filter, MemoryModel};
use super::results::{load_results, write_results, ResultsWriter};
use super::train::{run_experiment, ExperimentData, ExperimentResult, RunOptions};
use super::HyperConfig;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct GridOptions {
    pub workers: usize,
    pub budget_bytes: f64,
    pub memory: MemoryModel,
    pub run: RunOptions,
    pub record_wall_time: bool,
    /// Appended to as configs finish; existing complete configs are skipped.
    pub results_path: PathBuf,
}

/// Runs every config (feasibility check, then training) and returns results
/// in the order of `configs`.
pub fn run_grid(configs: &[HyperConfig], data: &ExperimentData, opts: &GridOptions) -> Result<Vec<ExperimentResult>> {
    run_grid_with(configs, opts, |config| {
        if feasibility_filter(config, &data.stats, opts.budget_bytes, &opts.memory) {
            run_experiment(config, data, &opts.run)
        } else {
            ExperimentResult::infeasible(config.clone())
        }
    })
}

pub fn run_grid_with<F>(configs: &[HyperConfig], opts: &GridOptions, runner: F) -> Result<Vec<ExperimentResult>>
where
    F: Fn(&HyperConfig) -> ExperimentResult + Sync,
{
    if opts.workers == 0 {
        return Err(Error::config("workers must be at least 1"));
    }
    let path = &opts.results_path;
    let mut done: HashMap<String, ExperimentResult> = HashMap::new();
    if path.exists() && std::fs::metadata(path).map_err(Error::at(path))?.len() > 0 {
        let loaded = load_results(path)?;
        let torn = !loaded.incomplete.is_empty();
        if torn {
            write_results(path, &loaded.results, opts.record_wall_time)?;
        }
        done.extend(loaded.results.into_iter().map(|r| (r.config.id(), r)));
    }

    let pending: Vec<&HyperConfig> = configs.iter().filter(|c| !done.contains_key(&c.id())).collect();
    let writer = Mutex::new(ResultsWriter::open(path, opts.record_wall_time)?);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;

    let fresh: Vec<Result<ExperimentResult>> = pool.install(|| {
        pending
            .par_iter()
            .map(|config| {
                let result = catch_unwind(AssertUnwindSafe(|| runner(config))).unwrap_or_else(|panic| {
                    let reason = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "panic".into());
                    ExperimentResult::failed((*config).clone(), 0, reason)
                });
                writer.lock().map_err(|_| Error::Internal("results writer poisoned".into()))?.append(&result)?;
                Ok(result)
            })
            .collect()
    });
    for r in fresh {
        let r = r?;
        done.insert(r.config.id(), r);
    }
    // Canonical on-disk order, independent of worker scheduling.
    let ordered: Vec<ExperimentResult> = configs.iter().map(|c| done[&c.id()].clone()).collect();
    write_results(path, &ordered, opts.record_wall_time)?;
    Ok(ordered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{enumerate_grid, EpochMetrics, GridSpec, Status};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn configs() -> Vec<HyperConfig> {
        let spec = GridSpec::parse("n_layers=1,2\nn_units=32\ndropout=0,0.1\nn_embedding=16\npadding_percentile=P25\nbatch_size=64\noptimizer=adam\nepochs=1", 0).unwrap();
        enumerate_grid(&spec).unwrap()
    }

    fn opts(path: PathBuf, workers: usize) -> GridOptions {
        GridOptions {
            workers,
            budget_bytes: 1e12,
            memory: MemoryModel::default(),
            run: RunOptions::default(),
            record_wall_time: false,
            results_path: path,
        }
    }

    fn fake(c: &HyperConfig) -> ExperimentResult {
        let v = c.n_layers as f64 * 0.1 + c.dropout;
        ExperimentResult {
            config: c.clone(),
            epochs: vec![EpochMetrics { train_loss: v, train_acc: 0.5, val_loss: v, val_acc: 0.5 }],
            wall_time_s: 0.0,
            status: Status::Ok,
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        run_grid_with(&configs(), &opts(a.clone(), 1), fake).unwrap();
        run_grid_with(&configs(), &opts(b.clone(), 4), fake).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn resume_skips_finished_configs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let cs = configs();
        run_grid_with(&cs[..2], &opts(path.clone(), 2), fake).unwrap();
        let calls = AtomicUsize::new(0);
        let all = run_grid_with(&cs, &opts(path.clone(), 2), |c| {
            calls.fetch_add(1, Ordering::SeqCst);
            fake(c)
        })
        .unwrap();
        assert_eq!(calls.load(Ordering::SeqCst), cs.len() - 2);
        assert_eq!(all.len(), cs.len());
    }

    #[test]
    fn panic_becomes_failed_row() {
        let dir = tempfile::tempdir().unwrap();
        let cs = configs();
        let out = run_grid_with(&cs, &opts(dir.path().join("r.csv"), 2), |c| {
            if c.n_layers == 2 {
                panic!("boom");
            }
            fake(c)
        })
        .unwrap();
        for r in out {
            assert_eq!(matches!(r.status, Status::Failed { .. }), r.config.n_layers == 2);
        }
    }
}
