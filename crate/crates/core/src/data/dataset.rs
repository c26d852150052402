use std::io::{Read, Write};

use super::stats::quantile;
use super::vocab::PAD_ID;
use super::{Label, Labelled};
use crate::{Error, Result};

/// Padding-length percentile of the corpus length distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Percentile {
    P25,
    P50,
    P75,
    P100,
}

impl Percentile {
    pub const ALL: [Percentile; 4] = [Percentile::P25, Percentile::P50, Percentile::P75, Percentile::P100];

    pub fn fraction(self) -> f64 {
        match self {
            Percentile::P25 => 0.25,
            Percentile::P50 => 0.5,
            Percentile::P75 => 0.75,
            Percentile::P100 => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Percentile::P25 => "P25",
            Percentile::P50 => "P50",
            Percentile::P75 => "P75",
            Percentile::P100 => "P100",
        }
    }
}

impl std::fmt::Display for Percentile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Percentile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P25" | "25" => Ok(Percentile::P25),
            "P50" | "50" => Ok(Percentile::P50),
            "P75" | "75" => Ok(Percentile::P75),
            "P100" | "100" => Ok(Percentile::P100),
            other => Err(Error::config(format!("unknown padding percentile `{other}`"))),
        }
    }
}

/// Percentile of `lengths` (linear interpolation), rounded up.
pub fn padding_length(lengths: &[usize], percentile: Percentile) -> Result<usize> {
    if lengths.is_empty() {
        return Err(Error::data("padding length of an empty corpus"));
    }
    let mut sorted: Vec<f64> = lengths.iter().map(|&n| n as f64).collect();
    sorted.sort_by(f64::total_cmp);
    let len = quantile(&sorted, percentile.fraction()).ceil() as usize;
    Ok(len.max(1))
}

/// Pre-pads with PAD or keeps the first `len` ids.
pub fn pad_or_truncate(ids: &[u32], len: usize) -> Vec<u32> {
    if ids.len() >= len {
        ids[..len].to_vec()
    } else {
        let mut out = vec![PAD_ID; len - ids.len()];
        out.extend_from_slice(ids);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSample {
    pub file_id: String,
    pub label: Label,
    pub ids: Vec<u32>,
}

impl EncodedSample {
    /// The ids with leading PAD removed.
    pub fn unpadded(&self) -> &[u32] {
        let start = self.ids.iter().position(|&id| id != PAD_ID).unwrap_or(self.ids.len());
        &self.ids[start..]
    }

    pub fn repadded(&self, len: usize) -> EncodedSample {
        EncodedSample {
            file_id: self.file_id.clone(),
            label: self.label,
            ids: pad_or_truncate(self.unpadded(), len),
        }
    }
}

impl Labelled for EncodedSample {
    fn label(&self) -> Label {
        self.label
    }

    fn seq_len(&self) -> usize {
        self.unpadded().len()
    }
}

/// The preprocessed corpus: every sample padded to the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDataset {
    pub vocab_size: usize,
    pub seq_len: usize,
    pub samples: Vec<EncodedSample>,
}

impl EncodedDataset {
    pub fn new(vocab_size: usize, seq_len: usize, samples: Vec<EncodedSample>) -> Result<Self> {
        let ds = EncodedDataset {
            vocab_size,
            seq_len,
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if self.seq_len == 0 {
            return Err(Error::data("dataset padding length must be at least 1"));
        }
        for s in &self.samples {
            if s.ids.len() != self.seq_len {
                return Err(Error::data(format!(
                    "sample {} has {} ids, expected {}",
                    s.file_id,
                    s.ids.len(),
                    self.seq_len
                )));
            }
            if let Some(bad) = s.ids.iter().find(|&&id| id as usize >= self.vocab_size) {
                return Err(Error::data(format!(
                    "sample {} holds id {bad} outside vocabulary of size {}",
                    s.file_id, self.vocab_size
                )));
            }
        }
        Ok(())
    }

    /// Unpadded lengths, the series padding percentiles are taken over.
    pub fn lengths(&self) -> Vec<usize> {
        self.samples.iter().map(Labelled::seq_len).collect()
    }

    /// Header `V,L,n`, then `file_id,label,id0 id1 …` per sample.
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record([
            self.vocab_size.to_string(),
            self.seq_len.to_string(),
            self.samples.len().to_string(),
        ])?;
        let mut ids = String::new();
        for s in &self.samples {
            ids.clear();
            for (k, id) in s.ids.iter().enumerate() {
                if k > 0 {
                    ids.push(' ');
                }
                ids.push_str(&id.to_string());
            }
            w.write_record([s.file_id.as_str(), &s.label.as_u8().to_string(), &ids])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = r.records();
        let header = records
            .next()
            .ok_or_else(|| Error::data("dataset file is empty"))??;
        let field = |k: usize| -> Result<usize> {
            header
                .get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::data("dataset header must be `V,L_padding,n_samples`"))
        };
        let (vocab_size, seq_len, n) = (field(0)?, field(1)?, field(2)?);
        let mut samples = Vec::with_capacity(n);
        for (k, record) in records.enumerate() {
            let record = record?;
            let line = k + 2;
            if record.len() != 3 {
                return Err(Error::data(format!("dataset line {line}: expected 3 fields")));
            }
            let label = record[1]
                .trim()
                .parse::<u8>()
                .map_err(|_| Error::data(format!("dataset line {line}: bad label")))
                .and_then(Label::from_u8)?;
            let ids = record[2]
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::data(format!("dataset line {line}: bad id list")))?;
            samples.push(EncodedSample {
                file_id: record[0].to_string(),
                label,
                ids,
            });
        }
        if samples.len() != n {
            return Err(Error::data(format!(
                "dataset header announces {n} samples, found {}",
                samples.len()
            )));
        }
        EncodedDataset::new(vocab_size, seq_len, samples)
    }
}
