use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Label, Labelled};
use crate::{Error, Result};

/// Stratified split: each class contributes `round(n·ratio)` items to the
/// training side. Both sides keep input order.
pub fn train_test_split<S: Labelled>(items: Vec<S>, ratio: f64, seed: u64) -> Result<(Vec<S>, Vec<S>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut to_train = vec![false; items.len()];
    for label in Label::ALL {
        let mut idx: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label() == label)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < 2 {
            return Err(Error::data(format!(
                "class {label} has {} samples; stratified split needs at least 2",
                idx.len()
            )));
        }
        let n_train = ((idx.len() as f64 * ratio).round() as usize).clamp(1, idx.len() - 1);
        idx.shuffle(&mut rng);
        for &i in &idx[..n_train] {
            to_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (item, t) in items.into_iter().zip(to_train) {
        if t {
            train.push(item);
        } else {
            test.push(item);
        }
    }
    Ok((train, test))
}
