use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use opseq_core::analysis::{
    hierarchical_select, render_conditioning, standardize, trail_interactions, write_interactions_csv, write_plot_data, write_ranking_csv,
    ResultTable,
};
use opseq_core::data::{
    generate_synthetic_corpus, load_corpus_dir, load_manifest, preprocess as run_pipeline, write_corpus, EncodedDataset, PreprocessOptions,
    SynthParams,
};
use opseq_core::harness::{enumerate_grid, load_results, run_grid, ExperimentData, GridOptions, GridSpec, MemoryModel, RunOptions, Status};
use opseq_core::neural::Precision;
use opseq_core::seed::derive_seed;
use opseq_core::{Error, Result};

use crate::manifest::{resolve, RunManifest, MANIFEST_NAME};
use crate::{AnalyzeArgs, GridArgs, PreprocessArgs, ReportArgs, SynthArgs};

const TRAIN_RATIO: f64 = 0.7;
const GIB: f64 = 1024.0 * 1024.0 * 1024.0;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Path {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn default_prep(ws: &Path) -> PathBuf {
    ws.join("prep")
}

pub fn synth(ws: &Path, a: SynthArgs) -> Result<()> {
    let out = a.out.unwrap_or_else(|| ws.join("corpus"));
    let params = SynthParams {
        n_per_class: a.n_per_class,
        vocab_size: a.vocab_size,
        min_len: a.min_len,
        max_len: a.max_len,
        seed: derive_seed(a.seed, "synth"),
        ..SynthParams::default()
    };
    let corpus = generate_synthetic_corpus(&params)?;
    let manifest = write_corpus(&corpus.sequences, &out)?;
    println!("wrote {} files and {}", corpus.sequences.len(), manifest.display());
    Ok(())
}

pub fn preprocess(ws: &Path, a: PreprocessArgs) -> Result<()> {
    let loaded = match (&a.input, &a.manifest) {
        (Some(dir), _) => load_corpus_dir(dir)?,
        (None, Some(m)) => load_manifest(m)?,
        (None, None) => return Err(Error::Config("one of --input or --manifest is required".into())),
    };
    let opts = PreprocessOptions {
        n_bins: a.bins,
        iqr_mult_malicious: a.iqr_mult_mal,
        iqr_mult_benign: a.iqr_mult_ben,
        seed: a.seed,
    };
    let pre = run_pipeline(loaded.sequences, loaded.discarded, &opts)?;

    let out = a.out.unwrap_or_else(|| default_prep(ws));
    fs::create_dir_all(&out).map_err(io_err(&out))?;
    let manifest = RunManifest::new(ws.to_path_buf(), a.seed);
    let mut w = create(&out.join(&manifest.dataset))?;
    pre.dataset.write(&mut w)?;
    w.flush()?;
    let mut w = create(&out.join(&manifest.vocabulary))?;
    pre.vocab.write_csv(&mut w)?;
    w.flush()?;
    let report = pre.report.render();
    fs::write(out.join("report.txt"), &report).map_err(io_err(&out))?;
    manifest.save(&out.join(MANIFEST_NAME))?;
    print!("{report}");
    println!("wrote {}", out.display());
    Ok(())
}

pub fn grid(ws: &Path, a: GridArgs) -> Result<()> {
    let manifest_path = a.manifest.unwrap_or_else(|| default_prep(ws).join(MANIFEST_NAME));
    let manifest = RunManifest::load(&manifest_path)?;
    let seed = a.seed.unwrap_or(manifest.seed);

    let dataset_path = resolve(&manifest_path, &manifest.dataset);
    let file = File::open(&dataset_path).map_err(io_err(&dataset_path))?;
    let dataset = EncodedDataset::read(BufReader::new(file))?;
    let data = ExperimentData::from_dataset(&dataset, TRAIN_RATIO, seed)?;

    let spec_path = a.grid_spec.or_else(|| manifest.grid_spec.as_ref().map(|p| resolve(&manifest_path, p)));
    let mut spec = match &spec_path {
        Some(p) => GridSpec::parse(&fs::read_to_string(p).map_err(io_err(p))?, seed)?,
        None => GridSpec::full(seed),
    };
    if let Some(e) = a.epochs {
        spec.epochs = e;
    }
    let configs = enumerate_grid(&spec)?;

    let results_path = a.out.unwrap_or_else(|| resolve(&manifest_path, &manifest.results));
    if let Some(dir) = results_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let opts = GridOptions {
        workers: a.workers,
        budget_bytes: a.memory_budget_gb * GIB,
        memory: MemoryModel::default(),
        run: RunOptions {
            precision: if a.precision == "f64" { Precision::F64 } else { Precision::F32 },
            ..RunOptions::default()
        },
        record_wall_time: a.record_wall_time,
        results_path: results_path.clone(),
    };
    println!(
        "{} configs, {} train / {} test samples, {} worker(s)",
        configs.len(),
        data.train.len(),
        data.test.len(),
        a.workers
    );
    let results = run_grid(&configs, &data, &opts)?;

    let count = |s: &str| results.iter().filter(|r| r.status.as_str() == s).count();
    println!("ok {}  infeasible {}  failed {}", count("ok"), count("infeasible"), count("failed"));
    for r in &results {
        if let Status::Failed { epoch, reason } = &r.status {
            eprintln!("failed at epoch {epoch}: {} ({reason})", r.config.canonical());
        }
    }
    let best = results
        .iter()
        .filter_map(|r| Some((r.final_val_loss()?, r)))
        .min_by(|x, y| x.0.total_cmp(&y.0));
    if let Some((loss, r)) = best {
        let acc = r.epochs.last().map_or(0.0, |m| m.val_acc);
        println!("best val loss {loss:.4} (acc {acc:.4}): {}", r.config.canonical());
    }
    println!("wrote {}", results_path.display());
    Ok(())
}

pub fn analyze(ws: &Path, a: AnalyzeArgs) -> Result<()> {
    let input = a.input.unwrap_or_else(|| default_prep(ws).join("results.csv"));
    let out = a.out.unwrap_or_else(|| default_prep(ws).join("analysis"));
    let loaded = load_results(&input)?;
    if !loaded.incomplete.is_empty() {
        eprintln!("warning: ignoring {} incomplete config(s)", loaded.incomplete.len());
    }
    let st = standardize(ResultTable::from_results(&loaded.results)?)?;
    let ranking = hierarchical_select(&st, a.min_support)?;
    let interactions = trail_interactions(&st, &ranking)?;

    fs::create_dir_all(&out).map_err(io_err(&out))?;
    write_ranking_csv(&out.join("ranking.csv"), &ranking)?;
    write_plot_data(&out.join("plots"), &ranking)?;
    write_interactions_csv(&out.join("interactions.csv"), &interactions)?;

    println!("{} configs, loss mean {:.6}, population sd {:.6}", st.table().len(), st.mean(), st.sd());
    println!("{:<5} {:<20} {:<10} {:>10} {:>10} {:>8}", "step", "factor", "level", "score", "range", "support");
    for (k, s) in ranking.steps.iter().enumerate() {
        let flag = if s.low_support { "  (low support)" } else { "" };
        println!("{:<5} {:<20} {:<10} {:>10.4} {:>10.4} {:>8}{flag}", k + 1, s.factor, s.level, s.score, s.range, s.support);
    }
    let selected: Vec<String> = ranking.steps.iter().map(|s| format!("{}={}", s.factor, s.level)).collect();
    println!("selected configuration: {}", selected.join(", "));
    for r in interactions.iter().filter(|r| r.flagged) {
        let shifts: Vec<String> = r.entries.iter().map(|e| format!("{} under {}", e.level, render_conditioning(&e.conditioning))).collect();
        println!("interaction: argmin of {} shifts: {}", r.factor, shifts.join("; "));
    }
    println!("wrote {}", out.display());
    Ok(())
}

pub fn report(ws: &Path, a: ReportArgs) -> Result<()> {
    let dir = a.input.unwrap_or_else(|| default_prep(ws).join("analysis"));
    let ranking_path = dir.join("ranking.csv");
    if !ranking_path.is_file() {
        return Err(Error::Data(format!("{} has no ranking.csv; run `opseq analyze` first", dir.display())));
    }
    let mut reader = csv::Reader::from_path(&ranking_path)?;
    println!("Hyper-parameter importance ({})", dir.display());
    println!("{:<5} {:<20} {:<10} {:>10} {:>10} {:>12} {:>8}", "rank", "hyper-parameter", "level", "score", "range", "std_variance", "support");
    let mut selected = Vec::new();
    for row in reader.records() {
        let row = row?;
        if row.len() != 8 {
            return Err(Error::Data(format!("{}: malformed ranking row", ranking_path.display())));
        }
        let num = |i: usize| row[i].parse::<f64>().map_err(|_| Error::Data(format!("{}: bad number `{}`", ranking_path.display(), &row[i])));
        let flag = if &row[7] == "true" { "  (low support)" } else { "" };
        println!(
            "{:<5} {:<20} {:<10} {:>10.4} {:>10.4} {:>12.4} {:>8}{flag}",
            &row[0],
            &row[1],
            &row[2],
            num(3)?,
            num(4)?,
            num(5)?,
            &row[6]
        );
        selected.push(format!("{}={}", &row[1], &row[2]));
    }
    if selected.is_empty() {
        return Err(Error::Data(format!("{} is empty", ranking_path.display())));
    }
    println!("configuration with selected hyper-parameters: {}", selected.join(", "));

    let inter_path = dir.join("interactions.csv");
    if inter_path.is_file() {
        let mut reader = csv::Reader::from_path(&inter_path)?;
        let mut flagged: Vec<(String, String)> = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.get(5) == Some("true") {
                flagged.push((row[0].to_string(), format!("{} under {}", &row[2], &row[1])));
            }
        }
        if flagged.is_empty() {
            println!("no argmin shifts across conditionings");
        }
        for (factor, entry) in flagged {
            println!("interaction-affected {factor}: {entry}");
        }
    }
    Ok(())
}
