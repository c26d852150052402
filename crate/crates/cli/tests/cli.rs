use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use opseq_core::harness::{enumerate_grid, write_results, EpochMetrics, ExperimentResult, GridSpec, Status};

fn opseq(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opseq"))
        .args(args)
        .env("OPSEQ_WORKSPACE", ws)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixture_corpus_balances_to_four_samples() {
    let ws = tempfile::tempdir().unwrap();
    let out = opseq(ws.path(), &["preprocess", "--input", s(&fixture())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(ws.path().join("prep/dataset.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[2], "4");
    let labels: Vec<&str> = lines.map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(labels.iter().filter(|l| **l == "0").count(), 2);
    assert_eq!(labels.iter().filter(|l| **l == "1").count(), 2);
    assert!(ws.path().join("prep/vocab.csv").is_file());
    assert!(ws.path().join("prep/run.json").is_file());
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("2 per class"), "{report}");
}

#[test]
fn preprocess_is_byte_identical_on_rerun() {
    let ws = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let dir = ws.path().join(out);
        assert_eq!(code(&opseq(ws.path(), &["preprocess", "--input", s(&fixture()), "--seed", "5", "--out", s(&dir)])), 0);
    }
    for f in ["dataset.csv", "vocab.csv", "report.txt"] {
        assert_eq!(std::fs::read(ws.path().join("a").join(f)).unwrap(), std::fs::read(ws.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn empty_input_dir_is_a_data_error() {
    let ws = tempfile::tempdir().unwrap();
    let empty = ws.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&opseq(ws.path(), &["preprocess", "--input", s(&empty)])), 2);
}

#[test]
fn usage_errors_exit_one() {
    let ws = tempfile::tempdir().unwrap();
    assert_eq!(code(&opseq(ws.path(), &["preprocess"])), 1);
    assert_eq!(code(&opseq(ws.path(), &["frobnicate"])), 1);
    assert_eq!(code(&opseq(ws.path(), &["--help"])), 0);
}

#[test]
fn synth_writes_counted_reproducible_corpus() {
    let ws = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let dir = ws.path().join(out);
        assert_eq!(code(&opseq(ws.path(), &["synth", "--n-per-class", "50", "--seed", "9", "--out", s(&dir)])), 0);
    }
    let asm: Vec<_> = std::fs::read_dir(ws.path().join("a"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "asm"))
        .collect();
    assert_eq!(asm.len(), 100);
    for f in ["manifest.csv", "ben_00007.asm", "mal_00049.asm"] {
        assert_eq!(std::fs::read(ws.path().join("a").join(f)).unwrap(), std::fs::read(ws.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn synth_preprocess_grid_analyze_report() {
    let ws = tempfile::tempdir().unwrap();
    let w = ws.path();
    assert_eq!(code(&opseq(w, &["synth", "--n-per-class", "40", "--min-len", "10", "--max-len", "20", "--seed", "3"])), 0);
    let manifest = w.join("corpus/manifest.csv");
    assert_eq!(code(&opseq(w, &["preprocess", "--manifest", s(&manifest), "--seed", "3"])), 0);
    let spec = w.join("grid.txt");
    std::fs::write(&spec, "n_layers=1,2\nn_units=32\ndropout=0,0.1\nn_embedding=16\npadding_percentile=P50\nbatch_size=64\noptimizer=adam,rmsprop\n").unwrap();
    let out = opseq(w, &["grid", "--grid-spec", s(&spec), "--workers", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(w.join("prep/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 8 * 5);

    // Resume: nothing left to run, file unchanged.
    assert_eq!(code(&opseq(w, &["grid", "--grid-spec", s(&spec), "--workers", "2"])), 0);
    assert_eq!(std::fs::read_to_string(w.join("prep/results.csv")).unwrap(), results);

    let out = opseq(w, &["analyze", "--min-support", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("selected configuration:"));
    assert!(w.join("prep/analysis/ranking.csv").is_file());
    assert!(w.join("prep/analysis/plots/step_1.csv").is_file());
    let out = opseq(w, &["report"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("configuration with selected hyper-parameters"));
}

fn planted_results(path: &Path) {
    let spec = GridSpec::parse(
        "n_layers=1,2\nn_units=32,64\ndropout=0,0.1,0.2\nn_embedding=16\npadding_percentile=P25\nbatch_size=64,512\noptimizer=adam\nepochs=1",
        0,
    )
    .unwrap();
    let results: Vec<ExperimentResult> = enumerate_grid(&spec)
        .unwrap()
        .into_iter()
        .map(|c| {
            let loss = 0.5 + if c.batch_size == 512 { -0.3 } else { 0.3 } + 0.05 * c.dropout + 0.01 * c.n_layers as f64;
            ExperimentResult {
                config: c,
                epochs: vec![EpochMetrics { train_loss: loss, train_acc: 0.5, val_loss: loss, val_acc: 0.5 }],
                wall_time_s: 0.0,
                status: Status::Ok,
            }
        })
        .collect();
    write_results(path, &results, false).unwrap();
}

#[test]
fn analyze_puts_planted_factor_first() {
    let ws = tempfile::tempdir().unwrap();
    let results = ws.path().join("planted.csv");
    planted_results(&results);
    let out_dir = ws.path().join("an");
    let out = opseq(ws.path(), &["analyze", "--input", s(&results), "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ranking = std::fs::read_to_string(out_dir.join("ranking.csv")).unwrap();
    let first = ranking.lines().nth(1).unwrap();
    assert!(first.starts_with("1,batch_size,512,"), "{first}");
}

#[test]
fn tampered_results_are_rejected() {
    let ws = tempfile::tempdir().unwrap();
    let results = ws.path().join("planted.csv");
    planted_results(&results);
    let text = std::fs::read_to_string(&results).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[3] = lines[3].replacen(",adam,", ",rmsprop,", 1);
    std::fs::write(&results, lines.join("\n") + "\n").unwrap();
    let out = opseq(ws.path(), &["analyze", "--input", s(&results)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn missing_inputs_are_data_errors() {
    let ws = tempfile::tempdir().unwrap();
    assert_eq!(code(&opseq(ws.path(), &["grid"])), 2);
    assert_eq!(code(&opseq(ws.path(), &["analyze"])), 2);
    let empty = ws.path().join("analysis");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&opseq(ws.path(), &["report", "--input", s(&empty)])), 2);
}

#[test]
fn bad_grid_spec_is_a_usage_error() {
    let ws = tempfile::tempdir().unwrap();
    assert_eq!(code(&opseq(ws.path(), &["preprocess", "--input", s(&fixture())])), 0);
    let spec = ws.path().join("g.txt");
    std::fs::write(&spec, "n_layers=7\n").unwrap();
    assert_eq!(code(&opseq(ws.path(), &["grid", "--grid-spec", s(&spec)])), 1);
}
