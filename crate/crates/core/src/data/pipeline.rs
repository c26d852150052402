use std::fmt::Write as _;

use super::balance::{iqr_filter, per_bin_undersample, BinReport, FilterSummary};
use super::dataset::{pad_or_truncate, padding_length, EncodedDataset, EncodedSample, Percentile};
use super::vocab::{encode, Vocabulary};
use super::{Label, Labelled, OpcodeSequence};
use crate::seed::derive_seed;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessOptions {
    pub n_bins: usize,
    pub iqr_mult_malicious: f64,
    pub iqr_mult_benign: f64,
    /// Global seed; the under-sampling stream is derived from it.
    pub seed: u64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            n_bins: 100,
            iqr_mult_malicious: 1.5,
            iqr_mult_benign: 5.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    pub n_input: usize,
    pub discarded: Vec<String>,
    pub max_len_raw: [usize; 2],
    pub max_len_filtered: [usize; 2],
    pub filter: FilterSummary,
    pub bin_width: usize,
    pub bins: Vec<BinReport>,
    pub per_class: usize,
    pub vocab_size: usize,
    pub padding_lengths: Vec<(Percentile, usize)>,
}

impl PreprocessReport {
    /// Plain-text summary including the per-bin balancing table.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "files parsed: {} ({} discarded with no instructions)", self.n_input, self.discarded.len());
        for id in &self.discarded {
            let _ = writeln!(s, "  discarded: {id}");
        }
        let _ = writeln!(s, "max length (raw): benign {} malicious {}", self.max_len_raw[0], self.max_len_raw[1]);
        for label in Label::ALL {
            let q = self.filter.quartiles(label);
            let _ = writeln!(
                s,
                "{label}: Q1={:.2} Q2={:.2} Q3={:.2} IQR={:.2} multiplier={} threshold={:.2}",
                q.q1,
                q.q2,
                q.q3,
                q.iqr,
                q.multiplier.unwrap_or(f64::NAN),
                q.threshold.unwrap_or(f64::NAN)
            );
        }
        let _ = writeln!(
            s,
            "after IQR filter: benign {} malicious {}; max length benign {} malicious {}",
            self.filter.benign_after, self.filter.malicious_after, self.max_len_filtered[0], self.max_len_filtered[1]
        );
        let kept: Vec<&BinReport> = self.bins.iter().filter(|b| b.kept_per_class > 0).collect();
        let _ = writeln!(s, "bin width {} over {} populated bins ({} with both classes)", self.bin_width, self.bins.len(), kept.len());
        let _ = writeln!(s, "{:>5} {:>15} {:>8} {:>8} {:>6}", "bin", "lengths", "benign", "malic.", "M/B");
        for b in &self.bins {
            let _ = writeln!(
                s,
                "{:>5} {:>15} {:>8} {:>8} {:>6}",
                b.bin,
                format!("{}-{}", b.lo, b.hi),
                b.benign_before,
                b.malicious_before,
                b.kept_per_class
            );
        }
        let _ = writeln!(s, "balanced corpus: {} per class, vocabulary {} (incl. PAD)", self.per_class, self.vocab_size);
        let pads: Vec<String> = self.padding_lengths.iter().map(|(p, l)| format!("{p}={l}")).collect();
        let _ = writeln!(s, "padding lengths: {}", pads.join(" "));
        s
    }
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub dataset: EncodedDataset,
    pub vocab: Vocabulary,
    pub report: PreprocessReport,
}

fn max_len_per_class<S: Labelled>(items: &[S]) -> [usize; 2] {
    let mut out = [0; 2];
    for s in items {
        let k = s.label().as_u8() as usize;
        out[k] = out[k].max(s.seq_len());
    }
    out
}

/// IQR filter → per-bin under-sampling → vocabulary → encoding. Samples are
/// padded to the longest kept sequence, so any shorter padding length can be
/// derived later without loss.
pub fn preprocess(sequences: Vec<OpcodeSequence>, discarded: Vec<String>, opts: &PreprocessOptions) -> Result<Preprocessed> {
    let n_input = sequences.len() + discarded.len();
    let max_len_raw = max_len_per_class(&sequences);
    let (filtered, filter) = iqr_filter(sequences, opts.iqr_mult_malicious, opts.iqr_mult_benign)?;
    let max_len_filtered = max_len_per_class(&filtered);
    let (balanced, bins) = per_bin_undersample(filtered, opts.n_bins, derive_seed(opts.seed, "rus"))?;
    let bin_width = super::stats::bin_width(max_len_filtered[0].max(max_len_filtered[1]), opts.n_bins);

    let vocab = Vocabulary::build(&balanced);
    let lengths: Vec<usize> = balanced.iter().map(Labelled::seq_len).collect();
    let padding_lengths = Percentile::ALL
        .iter()
        .map(|&p| padding_length(&lengths, p).map(|l| (p, l)))
        .collect::<Result<Vec<_>>>()?;
    let seq_len = padding_lengths.last().expect("P100 present").1;

    let samples = balanced
        .iter()
        .map(|s| {
            Ok(EncodedSample {
                file_id: s.file_id.clone(),
                label: s.label,
                ids: pad_or_truncate(&encode(&s.opcodes, &vocab)?, seq_len),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_class = samples.len() / 2;
    let dataset = EncodedDataset::new(vocab.size(), seq_len, samples)?;

    Ok(Preprocessed {
        dataset,
        report: PreprocessReport {
            n_input,
            discarded,
            max_len_raw,
            max_len_filtered,
            filter,
            bin_width,
            bins,
            per_class,
            vocab_size: vocab.size(),
            padding_lengths,
        },
        vocab,
    })
}
