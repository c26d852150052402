use super::Label;
use crate::{Error, Result};

/// Linear-interpolation quantile of already sorted values, at fractional rank
/// `q·(n-1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuartileSummary {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub iqr: f64,
    pub multiplier: Option<f64>,
    /// `q2 + multiplier · iqr` once a multiplier is attached.
    pub threshold: Option<f64>,
}

impl QuartileSummary {
    pub fn with_multiplier(mut self, multiplier: f64) -> Self {
        self.multiplier = Some(multiplier);
        self.threshold = Some(self.q2 + multiplier * self.iqr);
        self
    }
}

pub fn quartiles(values: &[f64]) -> Result<QuartileSummary> {
    if values.is_empty() {
        return Err(Error::data("quartiles of an empty series"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::data("quartiles of a series containing NaN"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q1, q2, q3) = (
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.5),
        quantile(&sorted, 0.75),
    );
    Ok(QuartileSummary {
        q1,
        q2,
        q3,
        iqr: q3 - q1,
        multiplier: None,
        threshold: None,
    })
}

/// `ceil(max_len / n_bins)`, at least 1.
pub fn bin_width(max_len: usize, n_bins: usize) -> usize {
    max_len.div_ceil(n_bins).max(1)
}

/// Bin `k` covers lengths `[k·w + 1, (k+1)·w]`.
pub fn bin_index(len: usize, width: usize) -> usize {
    len.saturating_sub(1) / width
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub lo: usize,
    pub hi: usize,
    pub benign: usize,
    pub malicious: usize,
}

impl HistogramBin {
    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Benign => self.benign,
            Label::Malicious => self.malicious,
        }
    }

    /// Natural log of the count, `None` for an empty bin.
    pub fn log_count(&self, label: Label) -> Option<f64> {
        match self.count(label) {
            0 => None,
            n => Some((n as f64).ln()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LengthHistogram {
    pub width: usize,
    pub bins: Vec<HistogramBin>,
}

/// Equal-width histogram of sequence lengths per class.
pub fn length_histogram(lengths: &[(Label, usize)], n_bins: usize) -> Result<LengthHistogram> {
    if n_bins == 0 {
        return Err(Error::config("histogram needs at least one bin"));
    }
    let max = lengths
        .iter()
        .map(|&(_, n)| n)
        .max()
        .ok_or_else(|| Error::data("histogram of an empty length list"))?;
    let width = bin_width(max, n_bins);
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|k| HistogramBin {
            lo: k * width + 1,
            hi: (k + 1) * width,
            benign: 0,
            malicious: 0,
        })
        .collect();
    for &(label, len) in lengths {
        let bin = &mut bins[bin_index(len, width)];
        match label {
            Label::Benign => bin.benign += 1,
            Label::Malicious => bin.malicious += 1,
        }
    }
    Ok(LengthHistogram { width, bins })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_one_to_eight() {
        let v: Vec<f64> = (1..=8).map(f64::from).collect();
        let q = quartiles(&v).unwrap();
        assert_eq!((q.q1, q.q2, q.q3), (2.75, 4.5, 6.25));
        assert_eq!(q.iqr, 3.5);
        assert_eq!(q.with_multiplier(1.5).threshold, Some(9.75));
    }

    #[test]
    fn quartiles_of_constant_and_odd_series() {
        let q = quartiles(&[4.0; 6]).unwrap();
        assert_eq!((q.q1, q.q2, q.q3, q.iqr), (4.0, 4.0, 4.0, 0.0));
        let q = quartiles(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(q.q2, 3.0);
        assert!(quartiles(&[]).is_err());
    }

    #[test]
    fn full_corpus_bin_width() {
        assert_eq!(bin_width(238_918, 100), 2_390);
    }

    #[test]
    fn histogram_small_cases() {
        let h = length_histogram(&[(Label::Benign, 1), (Label::Benign, 2), (Label::Benign, 3)], 3).unwrap();
        assert_eq!(h.width, 1);
        assert_eq!(h.bins.iter().map(|b| b.benign).collect::<Vec<_>>(), vec![1, 1, 1]);

        let same: Vec<(Label, usize)> = (0..5).map(|i| (Label::ALL[i % 2], 37)).collect();
        let h = length_histogram(&same, 10).unwrap();
        let nonempty: Vec<_> = h.bins.iter().filter(|b| b.benign + b.malicious > 0).collect();
        assert_eq!(nonempty.len(), 1);
        assert_eq!(nonempty[0].malicious, 2);
        assert!((nonempty[0].log_count(Label::Benign).unwrap() - 3f64.ln()).abs() < 1e-15);

        assert!(length_histogram(&[], 3).is_err());
        assert!(length_histogram(&same, 0).is_err());
    }

    #[test]
    fn bins_partition_lengths() {
        let w = bin_width(100, 7);
        assert_eq!(w, 15);
        for len in 1..=100 {
            let k = bin_index(len, w);
            assert!(k < 7);
            assert!(k * w < len && len <= (k + 1) * w);
        }
    }
}
