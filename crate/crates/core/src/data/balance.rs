use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::stats::{bin_index, bin_width, quartiles, QuartileSummary};
use super::{Label, Labelled};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSummary {
    pub benign: QuartileSummary,
    pub malicious: QuartileSummary,
    pub benign_before: usize,
    pub malicious_before: usize,
    pub benign_after: usize,
    pub malicious_after: usize,
}

impl FilterSummary {
    pub fn quartiles(&self, label: Label) -> &QuartileSummary {
        match label {
            Label::Benign => &self.benign,
            Label::Malicious => &self.malicious,
        }
    }
}

/// Upper-side outlier removal per class: drops items whose length exceeds
/// `Q2 + multiplier · IQR` of their own class. Order is preserved.
pub fn iqr_filter<S: Labelled>(
    items: Vec<S>,
    multiplier_malicious: f64,
    multiplier_benign: f64,
) -> Result<(Vec<S>, FilterSummary)> {
    let lengths = |label: Label| -> Vec<f64> {
        items
            .iter()
            .filter(|s| s.label() == label)
            .map(|s| s.seq_len() as f64)
            .collect()
    };
    let (ben, mal) = (lengths(Label::Benign), lengths(Label::Malicious));
    if ben.is_empty() || mal.is_empty() {
        return Err(Error::data("IQR filtering needs both benign and malicious samples"));
    }
    let benign = quartiles(&ben)?.with_multiplier(multiplier_benign);
    let malicious = quartiles(&mal)?.with_multiplier(multiplier_malicious);
    let threshold = |label: Label| match label {
        Label::Benign => benign.threshold.unwrap(),
        Label::Malicious => malicious.threshold.unwrap(),
    };

    let kept: Vec<S> = items
        .into_iter()
        .filter(|s| s.seq_len() as f64 <= threshold(s.label()))
        .collect();
    let count = |label| kept.iter().filter(|s| s.label() == label).count();
    let summary = FilterSummary {
        benign,
        malicious,
        benign_before: ben.len(),
        malicious_before: mal.len(),
        benign_after: count(Label::Benign),
        malicious_after: count(Label::Malicious),
    };
    for label in Label::ALL {
        if count(label) == 0 {
            return Err(Error::data(format!("IQR filter removed every {label} sample")));
        }
    }
    Ok((kept, summary))
}

/// One row of the per-bin balancing table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinReport {
    /// 1-based bin number.
    pub bin: usize,
    pub lo: usize,
    pub hi: usize,
    pub benign_before: usize,
    pub malicious_before: usize,
    /// Samples kept per class; 0 when the bin lacks one class and is dropped.
    pub kept_per_class: usize,
}

/// Random under-sampling of the majority class inside each equal-width length
/// bin. Bins missing either class are dropped. Output keeps input order.
pub fn per_bin_undersample<S: Labelled>(
    items: Vec<S>,
    n_bins: usize,
    seed: u64,
) -> Result<(Vec<S>, Vec<BinReport>)> {
    if n_bins == 0 {
        return Err(Error::config("undersampling needs at least one bin"));
    }
    let max = items
        .iter()
        .map(Labelled::seq_len)
        .max()
        .ok_or_else(|| Error::data("undersampling an empty corpus"))?;
    let width = bin_width(max, n_bins);

    // members[bin][class] = indices into items, ascending
    let mut members = vec![[Vec::new(), Vec::new()]; n_bins];
    for (idx, item) in items.iter().enumerate() {
        members[bin_index(item.seq_len(), width)][item.label().as_u8() as usize].push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; items.len()];
    let mut report = Vec::new();
    for (k, [ben, mal]) in members.iter().enumerate() {
        if ben.is_empty() && mal.is_empty() {
            continue;
        }
        let n = ben.len().min(mal.len());
        for class in [ben, mal] {
            let picked = sample(&mut rng, class.len(), n);
            for i in picked {
                keep[class[i]] = true;
            }
        }
        report.push(BinReport {
            bin: k + 1,
            lo: k * width + 1,
            hi: (k + 1) * width,
            benign_before: ben.len(),
            malicious_before: mal.len(),
            kept_per_class: n,
        });
    }
    if report.iter().all(|r| r.kept_per_class == 0) {
        return Err(Error::data("no length bin contains both classes"));
    }
    let kept = items
        .into_iter()
        .zip(keep)
        .filter_map(|(item, k)| k.then_some(item))
        .collect();
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(ben: &[usize], mal: &[usize]) -> Vec<(Label, usize)> {
        ben.iter()
            .map(|&n| (Label::Benign, n))
            .chain(mal.iter().map(|&n| (Label::Malicious, n)))
            .collect()
    }

    #[test]
    fn one_to_eight_keeps_everything() {
        let v: Vec<usize> = (1..=8).collect();
        let (kept, summary) = iqr_filter(items(&v, &v), 1.5, 5.0).unwrap();
        assert_eq!(kept.len(), 16);
        assert_eq!(summary.malicious.threshold, Some(9.75));
        assert_eq!(summary.benign.threshold, Some(4.5 + 5.0 * 3.5));
    }

    #[test]
    fn constant_lengths_survive_zero_iqr() {
        let (kept, s) = iqr_filter(items(&[7; 4], &[3; 5]), 1.5, 5.0).unwrap();
        assert_eq!(kept.len(), 9);
        assert_eq!(s.benign.iqr, 0.0);
    }

    #[test]
    fn drops_only_upper_outliers() {
        let mal = [10, 11, 12, 13, 14, 500];
        let (kept, s) = iqr_filter(items(&[5, 6], &mal), 1.5, 5.0).unwrap();
        assert_eq!(s.malicious_after, 5);
        assert!(kept.iter().all(|&(_, n)| n != 500));
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(iqr_filter(items(&[1, 2], &[]), 1.5, 5.0).is_err());
    }

    #[test]
    fn single_bin_undersamples_majority() {
        let input = items(&[5; 4], &[5; 10]);
        let (kept, report) = per_bin_undersample(input, 1, 3).unwrap();
        assert_eq!(kept.len(), 8);
        assert_eq!(kept.iter().filter(|s| s.0 == Label::Malicious).count(), 4);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].kept_per_class, 4);
    }

    #[test]
    fn balanced_bin_is_unchanged() {
        let input = items(&[1, 2, 3], &[3, 2, 1]);
        let (kept, _) = per_bin_undersample(input.clone(), 1, 9).unwrap();
        assert_eq!(kept, input);
    }

    #[test]
    fn one_class_bins_are_dropped() {
        // width 10: bin 1 has both classes, bin 10 only malicious
        let input = items(&[3, 4], &[5, 6, 7, 100]);
        let (kept, report) = per_bin_undersample(input, 10, 0).unwrap();
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().all(|&(_, n)| n < 100));
        assert_eq!(report.last().unwrap().kept_per_class, 0);
        assert!(per_bin_undersample(items(&[1], &[100]), 10, 0).is_err());
    }
}
