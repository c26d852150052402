use opseq_core::data::{generate_synthetic_corpus, preprocess, Percentile, PreprocessOptions, SynthParams};
use opseq_core::harness::{run_experiment, run_grid, ExperimentData, GridOptions, HyperConfig, MemoryModel, RunOptions, Status};
use opseq_core::neural::{OptimizerKind, Precision};

fn data() -> ExperimentData {
    let corpus = generate_synthetic_corpus(&SynthParams { n_per_class: 60, seed: 4, ..SynthParams::default() }).unwrap();
    let pre = preprocess(corpus.sequences, Vec::new(), &PreprocessOptions { seed: 4, ..PreprocessOptions::default() }).unwrap();
    ExperimentData::from_dataset(&pre.dataset, 0.7, 4).unwrap()
}

fn config(dropout: f64, optimizer: OptimizerKind) -> HyperConfig {
    HyperConfig {
        n_layers: 1,
        n_units: 32,
        dropout,
        n_embedding: 16,
        padding: Percentile::P25,
        batch_size: 64,
        optimizer,
        epochs: 2,
        seed: 3,
    }
}

fn strip_time(mut r: opseq_core::harness::ExperimentResult) -> opseq_core::harness::ExperimentResult {
    r.wall_time_s = 0.0;
    r
}

#[test]
fn same_seed_same_history() {
    let data = data();
    for precision in [Precision::F32, Precision::F64] {
        let opts = RunOptions { precision, ..RunOptions::default() };
        let cfg = config(0.2, OptimizerKind::Adam);
        let a = strip_time(run_experiment(&cfg, &data, &opts));
        let b = strip_time(run_experiment(&cfg, &data, &opts));
        assert_eq!(a.status, Status::Ok);
        assert_eq!(a.epochs.len(), cfg.epochs);
        assert_eq!(a, b);
    }
}

#[test]
fn grid_order_does_not_change_results() {
    let data = data();
    let configs = vec![config(0.0, OptimizerKind::Adam), config(0.1, OptimizerKind::Rmsprop), config(0.3, OptimizerKind::Adam)];
    let dir = tempfile::tempdir().unwrap();
    let run = |configs: &[HyperConfig], name: &str| {
        let opts = GridOptions {
            workers: 2,
            budget_bytes: f64::INFINITY,
            memory: MemoryModel::default(),
            run: RunOptions::default(),
            record_wall_time: false,
            results_path: dir.path().join(name),
        };
        let mut out: Vec<_> = run_grid(configs, &data, &opts).unwrap().into_iter().map(strip_time).collect();
        out.sort_by_key(|r| r.config.id());
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines.sort();
        (out, lines)
    };
    let forward = run(&configs, "a.csv");
    let reversed: Vec<_> = configs.iter().rev().cloned().collect();
    let backward = run(&reversed, "b.csv");
    assert_eq!(forward, backward);
}

#[test]
fn divergent_learning_rate_fails_cleanly() {
    let data = data();
    let opts = RunOptions { precision: Precision::F32, learning_rate: 1e30 };
    let r = run_experiment(&config(0.0, OptimizerKind::Rmsprop), &data, &opts);
    match r.status {
        Status::Ok => assert!(r.epochs.iter().all(|e| e.val_loss.is_finite())),
        Status::Failed { .. } => assert!(r.epochs.is_empty() && r.final_val_loss().is_none()),
        Status::Infeasible => panic!("unexpected infeasible"),
    }
}
