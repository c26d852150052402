//! Results CSV: one row per (config, epoch), each carrying a checksum of its
//! other fields so torn or edited files are detected on load.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::train::{EpochMetrics, ExperimentResult, Status};
use super::HyperConfig;
use crate::seed::short_hash;
use crate::{Error, Result};

pub const RESULTS_HEADER: [&str; 18] = [
    "config_id",
    "n_layers",
    "n_units",
    "dropout",
    "n_embedding",
    "padding_percentile",
    "batch_size",
    "optimizer",
    "epochs",
    "seed",
    "epoch_idx",
    "train_loss",
    "train_acc",
    "val_loss",
    "val_acc",
    "wall_time_s",
    "status",
    "checksum",
];

fn row_checksum(fields: &[String]) -> String {
    short_hash(fields.join(",").as_bytes(), 8)
}

/// Rows for one result. Non-ok results produce a single row without metrics;
/// its `epoch_idx` is the failing epoch (0 for infeasible configs).
pub(crate) fn result_rows(result: &ExperimentResult, record_wall_time: bool) -> Vec<Vec<String>> {
    let c = &result.config;
    let prefix = vec![
        c.id(),
        c.n_layers.to_string(),
        c.n_units.to_string(),
        c.dropout.to_string(),
        c.n_embedding.to_string(),
        c.padding.to_string(),
        c.batch_size.to_string(),
        c.optimizer.to_string(),
        c.epochs.to_string(),
        c.seed.to_string(),
    ];
    let wall = if record_wall_time { result.wall_time_s } else { 0.0 }.to_string();
    let finish = |mut row: Vec<String>| {
        let sum = row_checksum(&row);
        row.push(sum);
        row
    };
    match &result.status {
        Status::Ok => result
            .epochs
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let mut row = prefix.clone();
                row.extend([
                    k.to_string(),
                    m.train_loss.to_string(),
                    m.train_acc.to_string(),
                    m.val_loss.to_string(),
                    m.val_acc.to_string(),
                    wall.clone(),
                    "ok".into(),
                ]);
                finish(row)
            })
            .collect(),
        status => {
            let epoch = match status {
                Status::Failed { epoch, .. } => *epoch,
                _ => 0,
            };
            let mut row = prefix;
            row.extend([epoch.to_string(), String::new(), String::new(), String::new(), String::new(), wall, status.as_str().into()]);
            vec![finish(row)]
        }
    }
}

/// Append-only sink. Writes the header when the file is new or empty.
pub struct ResultsWriter {
    writer: csv::Writer<File>,
    record_wall_time: bool,
}

impl ResultsWriter {
    pub fn open(path: &Path, record_wall_time: bool) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(Error::at(path))?;
        let empty = file.metadata().map_err(Error::at(path))?.len() == 0;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if empty {
            writer.write_record(RESULTS_HEADER)?;
            writer.flush().map_err(Error::at(path))?;
        }
        Ok(ResultsWriter {
            writer,
            record_wall_time,
        })
    }

    /// Writes all rows of one result and flushes.
    pub fn append(&mut self, result: &ExperimentResult) -> Result<()> {
        for row in result_rows(result, self.record_wall_time) {
            self.writer.write_record(&row)?;
        }
        self.writer.flush()?;
        Ok(())
    }
}

/// Rewrites `path` with exactly `results`.
pub fn write_results(path: &Path, results: &[ExperimentResult], record_wall_time: bool) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(RESULTS_HEADER)?;
        for r in results {
            for row in result_rows(r, record_wall_time) {
                w.write_record(&row)?;
            }
        }
        w.flush()?;
    }
    let mut f = File::create(path).map_err(Error::at(path))?;
    f.write_all(&buf).map_err(Error::at(path))?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct LoadedResults {
    /// Complete results in order of first appearance.
    pub results: Vec<ExperimentResult>,
    /// Ids of configs with fewer epoch rows than announced.
    pub incomplete: Vec<String>,
}

/// Reads a results CSV, verifying every row checksum and config id.
pub fn load_results(path: &Path) -> Result<LoadedResults> {
    let file = File::open(path).map_err(Error::at(path))?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER.iter().copied()) {
        return Err(Error::data(format!("{}: unexpected results header", path.display())));
    }

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, ExperimentResult> = HashMap::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record?;
        let checksum_err = || Error::Checksum {
            path: PathBuf::from(path),
            line,
        };
        if record.len() != RESULTS_HEADER.len() {
            return Err(checksum_err());
        }
        let fields: Vec<String> = record.iter().map(String::from).collect();
        if row_checksum(&fields[..17]) != fields[17] {
            return Err(checksum_err());
        }
        let bad = |what: &str| Error::data(format!("{} line {line}: bad {what}", path.display()));
        let num = |i: usize, what: &str| fields[i].parse::<f64>().map_err(|_| bad(what));
        let int = |i: usize, what: &str| fields[i].parse::<usize>().map_err(|_| bad(what));

        let config = HyperConfig {
            n_layers: int(1, "n_layers")?,
            n_units: int(2, "n_units")?,
            dropout: num(3, "dropout")?,
            n_embedding: int(4, "n_embedding")?,
            padding: fields[5].parse()?,
            batch_size: int(6, "batch_size")?,
            optimizer: fields[7].parse()?,
            epochs: int(8, "epochs")?,
            seed: fields[9].parse().map_err(|_| bad("seed"))?,
        };
        if config.id() != fields[0] {
            return Err(bad("config_id (does not match the config fields)"));
        }
        let epoch_idx = int(10, "epoch_idx")?;
        let wall = num(15, "wall_time_s")?;
        let entry = groups.entry(fields[0].clone()).or_insert_with(|| {
            order.push(fields[0].clone());
            ExperimentResult {
                config: config.clone(),
                epochs: Vec::new(),
                wall_time_s: wall,
                status: Status::Ok,
            }
        });
        match fields[16].as_str() {
            "ok" => {
                if epoch_idx != entry.epochs.len() {
                    return Err(bad("epoch_idx (rows out of order)"));
                }
                entry.epochs.push(EpochMetrics {
                    train_loss: num(11, "train_loss")?,
                    train_acc: num(12, "train_acc")?,
                    val_loss: num(13, "val_loss")?,
                    val_acc: num(14, "val_acc")?,
                });
            }
            "infeasible" => entry.status = Status::Infeasible,
            "failed" => {
                entry.status = Status::Failed {
                    epoch: epoch_idx,
                    reason: String::new(),
                }
            }
            _ => return Err(bad("status")),
        }
    }

    let mut loaded = LoadedResults::default();
    for id in order {
        let r = groups.remove(&id).expect("grouped");
        if r.status == Status::Ok && r.epochs.len() != r.config.epochs {
            loaded.incomplete.push(id);
        } else {
            loaded.results.push(r);
        }
    }
    Ok(loaded)
}
