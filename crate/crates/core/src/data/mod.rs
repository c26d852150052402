//! From disassembly text to balanced, encoded, fixed-length samples.

mod balance;
mod dataset;
mod parse;
mod pipeline;
mod split;
mod stats;
mod synth;
mod vocab;

pub use balance::{iqr_filter, per_bin_undersample, BinReport, FilterSummary};
pub use dataset::{pad_or_truncate, padding_length, EncodedDataset, EncodedSample, Percentile};
pub use parse::{load_corpus_dir, load_manifest, parse_disassembly, render_disassembly, write_corpus, LoadedCorpus};
pub use pipeline::{preprocess, PreprocessOptions, PreprocessReport, Preprocessed};
pub use split::train_test_split;
pub use stats::{bin_index, bin_width, length_histogram, quantile, quartiles, HistogramBin, LengthHistogram, QuartileSummary};
pub use synth::{generate_synthetic_corpus, MarkovChain, SynthParams, SyntheticCorpus};
pub use vocab::{encode, Vocabulary, PAD_ID};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Benign, Label::Malicious];

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Benign => 0,
            Label::Malicious => 1,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Benign),
            1 => Ok(Label::Malicious),
            other => Err(Error::data(format!("label must be 0 or 1, got {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Malicious => "malicious",
        }
    }

    pub fn file_prefix(self) -> &'static str {
        match self {
            Label::Benign => "ben_",
            Label::Malicious => "mal_",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "benign" | "ben" | "b" => Ok(Label::Benign),
            "1" | "malicious" | "mal" | "m" => Ok(Label::Malicious),
            other => Err(Error::data(format!("unrecognised label `{other}`"))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Anything the class-aware filters can operate on.
pub trait Labelled {
    fn label(&self) -> Label;
    fn seq_len(&self) -> usize;
}

impl Labelled for (Label, usize) {
    fn label(&self) -> Label {
        self.0
    }

    fn seq_len(&self) -> usize {
        self.1
    }
}

/// One disassembled file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpcodeSequence {
    pub file_id: String,
    pub label: Label,
    pub opcodes: Vec<String>,
}

impl Labelled for OpcodeSequence {
    fn label(&self) -> Label {
        self.label
    }

    fn seq_len(&self) -> usize {
        self.opcodes.len()
    }
}
