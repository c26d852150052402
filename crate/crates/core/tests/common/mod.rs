#![allow(dead_code)]

use opseq_core::neural::{backward, bce_loss, forward, Mode, ModelDims, ModelParams, TrainSettings, init_params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random small net and batch for gradient checking.
pub struct GradCase {
    pub params: ModelParams<f64>,
    pub batch: Vec<Vec<u32>>,
    pub labels: Vec<u8>,
    pub settings: TrainSettings,
    pub mask_seed: u64,
}

/// Draws cases until every FC-256 pre-activation is at least `1e-3` away
/// from the ReLU hinge, where central differences are invalid.
pub fn random_case(seed: u64, dropout: f64) -> GradCase {
    (0..)
        .map(|k| draw_case(seed, k, dropout))
        .find(|c| c.relu_margin() > 1e-3)
        .unwrap()
}

fn draw_case(seed: u64, attempt: u64, dropout: f64) -> GradCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1000).wrapping_add(attempt));
    let dims = ModelDims::new(
        rng.random_range(3..=8),
        rng.random_range(1..=4),
        rng.random_range(1..=2),
        rng.random_range(1..=4),
    )
    .unwrap();
    let mut params = init_params::<f64>(dims, seed);
    // Non-zero biases exercise every term.
    for layer in &mut params.layers {
        for b in &mut layer.b {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    for b in &mut params.fc1_b {
        *b = rng.random_range(-0.1..0.1);
    }
    params.fc2_b = rng.random_range(-0.5..0.5);
    // Larger head weights so the head gradient is not vanishingly small.
    for w in params.fc2_w.as_mut_slice() {
        *w *= 3.0;
    }
    let (b, l) = (rng.random_range(1..=3), rng.random_range(1..=8));
    let batch: Vec<Vec<u32>> = (0..b)
        .map(|_| (0..l).map(|_| rng.random_range(0..dims.vocab as u32)).collect())
        .collect();
    let labels = (0..b).map(|_| rng.random_range(0..=1u8)).collect();
    GradCase {
        params,
        batch,
        labels,
        settings: TrainSettings {
            dropout_out: dropout,
            dropout_recurrent: dropout,
            ..TrainSettings::default()
        },
        mask_seed: seed ^ 0x5eed,
    }
}

impl GradCase {
    fn batch_refs(&self) -> Vec<&[u32]> {
        self.batch.iter().map(|s| s.as_slice()).collect()
    }

    /// Loss with dropout masks replayed from a fixed seed.
    pub fn loss(&self, params: &ModelParams<f64>) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.mask_seed);
        let (p, _) = forward(params, &self.batch_refs(), &self.settings, Mode::Train, &mut rng).unwrap();
        bce_loss(&p, &self.labels).unwrap()
    }

    /// Smallest |pre-activation| of the 256-unit ReLU layer over the batch.
    pub fn relu_margin(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.mask_seed);
        let (_, tape) = forward(&self.params, &self.batch_refs(), &self.settings, Mode::Train, &mut rng).unwrap();
        let mut margin = f64::INFINITY;
        for s in 0..self.batch.len() {
            let x = tape.head_input(s);
            for k in 0..self.params.fc1_b.len() {
                let pre: f64 = self.params.fc1_b[k]
                    + self.params.fc1_w.row(k).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                margin = margin.min(pre.abs());
            }
        }
        margin
    }

    pub fn analytic(&self) -> ModelParams<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.mask_seed);
        let (_, tape) = forward(&self.params, &self.batch_refs(), &self.settings, Mode::Train, &mut rng).unwrap();
        backward(&self.params, &tape, &self.labels).unwrap()
    }
}


/// Central-difference gradient of every tensor (double precision).
pub fn numeric_gradient(case: &GradCase, delta: f64) -> Vec<Vec<f64>> {
    let mut probe = case.params.clone();
    let lens: Vec<usize> = probe.tensors().iter().map(|(_, t)| t.len()).collect();
    let mut out = Vec::with_capacity(lens.len());
    for (k, &len) in lens.iter().enumerate() {
        let mut grad = vec![0.0; len];
        for (j, g) in grad.iter_mut().enumerate() {
            let orig = probe.tensors()[k].1[j];
            probe.tensors_mut()[k][j] = orig + delta;
            let up = case.loss(&probe);
            probe.tensors_mut()[k][j] = orig - delta;
            let down = case.loss(&probe);
            probe.tensors_mut()[k][j] = orig;
            *g = (up - down) / (2.0 * delta);
        }
        out.push(grad);
    }
    out
}

/// Largest relative error between `analytic` and `numeric` over every
/// trainable entry (the frozen PAD embedding row is skipped).
pub fn compare<T: Copy + Into<f64>>(
    analytic: &ModelParams<T>,
    numeric: &[Vec<f64>],
    floor: f64,
) -> (f64, String)
where
    T: opseq_core::neural::Scalar,
{
    let embed = analytic.dims().embed;
    let mut worst = (0.0, String::new());
    for (k, (name, tensor)) in analytic.tensors().into_iter().enumerate() {
        for (j, &a) in tensor.iter().enumerate() {
            if k == 0 && j < embed {
                continue;
            }
            let (a, n) = (a.into(), numeric[k][j]);
            let err = (a - n).abs() / a.abs().max(n.abs()).max(floor);
            if err > worst.0 {
                worst = (err, format!("{name}[{j}] analytic={a:e} numeric={n:e}"));
            }
        }
    }
    worst
}

/// Double-precision backprop vs central differences.
pub fn max_gradient_error(case: &GradCase, delta: f64) -> (f64, String) {
    compare(&case.analytic(), &numeric_gradient(case, delta), 1e-6)
}

/// Single-precision backprop (same weights rounded to f32) vs double-precision
/// central differences.
pub fn max_gradient_error_f32(case: &GradCase, delta: f64) -> (f64, String) {
    let params32 = case.params.map(|v| v as f32);
    let batch: Vec<&[u32]> = case.batch.iter().map(|s| s.as_slice()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(case.mask_seed);
    let (_, tape) = forward(&params32, &batch, &case.settings, Mode::Train, &mut rng).unwrap();
    let grads = backward(&params32, &tape, &case.labels).unwrap();
    compare(&grads, &numeric_gradient(case, delta), 1e-4)
}
