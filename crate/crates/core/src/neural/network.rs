use rand::Rng;

use super::cell::cell_step;
use super::params::{ModelDims, ModelParams, FC_UNITS};
use super::tensor::{sigmoid, Scalar};
use super::TrainSettings;
use crate::{Error, Result};

/// Probability clamp used by [`bce_loss`].
pub const BCE_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active, masks recorded on the tape.
    Train,
    /// All units active.
    Eval,
}

/// Cached activations of one LSTM layer over a whole sequence.
#[derive(Debug, Clone)]
pub struct LayerTape<T> {
    units: usize,
    input_dim: usize,
    steps: usize,
    /// `L × d_in`, the (dropped-out) inputs the cell saw.
    inputs: Vec<T>,
    /// `L × 4h`, activated `(i, f, g, o)`.
    gates: Vec<T>,
    /// `(L+1) × h`, row 0 is the zero initial state.
    cells: Vec<T>,
    /// `L × h`
    tanh_c: Vec<T>,
    /// `(L+1) × h`, row 0 is the zero initial state.
    hidden: Vec<T>,
    /// Variational mask on the recurrent connection, fixed for the sequence.
    rec_mask: Option<Vec<T>>,
    /// Mask on the connection leaving the layer: one row per emitted step.
    out_mask: Option<Vec<T>>,
}

/// Read-only view of one cached timestep.
#[derive(Debug, Clone, Copy)]
pub struct LstmState<'a, T> {
    pub input_gate: &'a [T],
    pub forget_gate: &'a [T],
    pub output_gate: &'a [T],
    pub candidate: &'a [T],
    pub c: &'a [T],
    pub tanh_c: &'a [T],
    pub h: &'a [T],
}

impl<T: Scalar> LayerTape<T> {
    fn new(units: usize, input_dim: usize, steps: usize) -> Self {
        LayerTape {
            units,
            input_dim,
            steps,
            inputs: vec![T::zero(); steps * input_dim],
            gates: vec![T::zero(); steps * 4 * units],
            cells: vec![T::zero(); (steps + 1) * units],
            tanh_c: vec![T::zero(); steps * units],
            hidden: vec![T::zero(); (steps + 1) * units],
            rec_mask: None,
            out_mask: None,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self, t: usize) -> LstmState<'_, T> {
        let h = self.units;
        let g = &self.gates[t * 4 * h..(t + 1) * 4 * h];
        LstmState {
            input_gate: &g[..h],
            forget_gate: &g[h..2 * h],
            candidate: &g[2 * h..3 * h],
            output_gate: &g[3 * h..],
            c: &self.cells[(t + 1) * h..(t + 2) * h],
            tanh_c: &self.tanh_c[t * h..(t + 1) * h],
            h: &self.hidden[(t + 1) * h..(t + 2) * h],
        }
    }

    /// Recurrent dropout mask (`h` entries), present only in training mode.
    pub fn rec_mask(&self) -> Option<&[T]> {
        self.rec_mask.as_deref()
    }

    /// Output dropout mask, `h` entries per emitted step.
    pub fn out_mask(&self) -> Option<&[T]> {
        self.out_mask.as_deref()
    }

    fn input(&self, t: usize) -> &[T] {
        &self.inputs[t * self.input_dim..(t + 1) * self.input_dim]
    }

    fn hidden_row(&self, t: usize) -> &[T] {
        &self.hidden[t * self.units..(t + 1) * self.units]
    }
}

#[derive(Debug, Clone)]
struct HeadTape<T> {
    /// Final hidden state after output dropout.
    input: Vec<T>,
    /// ReLU activations of the 256-unit layer.
    hidden: Vec<T>,
    probability: T,
}

#[derive(Debug, Clone)]
struct SampleTape<T> {
    ids: Vec<u32>,
    layers: Vec<LayerTape<T>>,
    head: HeadTape<T>,
}

/// Everything [`backward`] needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    dims: ModelDims,
    seq_len: usize,
    samples: Vec<SampleTape<T>>,
}

impl<T: Scalar> Tape<T> {
    pub fn batch_size(&self) -> usize {
        self.samples.len()
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn layers(&self, sample: usize) -> &[LayerTape<T>] {
        &self.samples[sample].layers
    }

    /// Input of the dense head for `sample`: the top layer's last hidden
    /// state after output dropout.
    pub fn head_input(&self, sample: usize) -> &[T] {
        &self.samples[sample].head.input
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.head.probability).collect()
    }
}

fn dropout_mask<T: Scalar, R: Rng>(rng: &mut R, len: usize, p: f64) -> Vec<T> {
    let keep = T::lit(1.0 / (1.0 - p));
    (0..len)
        .map(|_| {
            if rng.random::<f64>() < p {
                T::zero()
            } else {
                keep
            }
        })
        .collect()
}

/// Runs embedding → LSTM stack → FC-256-ReLU → FC-1-sigmoid on a batch of
/// equal-length id sequences.
///
/// In [`Mode::Train`] inverted dropout is applied with rates from
/// `settings`: the connection leaving each layer gets a fresh mask per step,
/// the recurrent connection one mask per sequence. Masks are drawn from `rng`
/// in sample order.
pub fn forward<T: Scalar, R: Rng>(
    params: &ModelParams<T>,
    batch: &[&[u32]],
    settings: &TrainSettings,
    mode: Mode,
    rng: &mut R,
) -> Result<(Vec<T>, Tape<T>)> {
    let dims = params.dims();
    let seq_len = batch.first().map(|s| s.len()).unwrap_or(0);
    if batch.is_empty() || seq_len == 0 {
        return Err(Error::data("forward needs a non-empty batch of non-empty sequences"));
    }
    for seq in batch {
        if seq.len() != seq_len {
            return Err(Error::Dimension {
                context: "batch sequence length",
                expected: seq_len,
                actual: seq.len(),
            });
        }
        if let Some(&bad) = seq.iter().find(|&&id| id as usize >= dims.vocab) {
            return Err(Error::data(format!(
                "opcode id {bad} outside vocabulary of size {}",
                dims.vocab
            )));
        }
    }

    let train = mode == Mode::Train;
    let samples = batch
        .iter()
        .map(|seq| forward_sample(params, seq, settings, train, rng))
        .collect::<Vec<_>>();
    let tape = Tape {
        dims,
        seq_len,
        samples,
    };
    Ok((tape.probabilities(), tape))
}

fn forward_sample<T: Scalar, R: Rng>(
    params: &ModelParams<T>,
    ids: &[u32],
    settings: &TrainSettings,
    train: bool,
    rng: &mut R,
) -> SampleTape<T> {
    let dims = params.dims();
    let (h, steps) = (dims.units, ids.len());
    let mut layers: Vec<LayerTape<T>> = Vec::with_capacity(dims.layers);

    for (l, layer) in params.layers.iter().enumerate() {
        let input_dim = dims.layer_input(l);
        let mut tape = LayerTape::new(h, input_dim, steps);
        let last = l + 1 == dims.layers;
        if train && settings.dropout_recurrent > 0.0 {
            tape.rec_mask = Some(dropout_mask(rng, h, settings.dropout_recurrent));
        }
        if train && settings.dropout_out > 0.0 {
            let rows = if last { 1 } else { steps };
            tape.out_mask = Some(dropout_mask(rng, rows * h, settings.dropout_out));
        }

        match layers.last() {
            None => {
                for (t, &id) in ids.iter().enumerate() {
                    tape.inputs[t * input_dim..(t + 1) * input_dim]
                        .copy_from_slice(params.embedding.row(id as usize));
                }
            }
            Some(below) => {
                for t in 0..steps {
                    let dst = &mut tape.inputs[t * h..(t + 1) * h];
                    dst.copy_from_slice(below.state(t).h);
                    if let Some(mask) = &below.out_mask {
                        for (v, &m) in dst.iter_mut().zip(&mask[t * h..(t + 1) * h]) {
                            *v = *v * m;
                        }
                    }
                }
            }
        }

        let mut h_rec = vec![T::zero(); h];
        for t in 0..steps {
            h_rec.copy_from_slice(tape.hidden_row(t));
            if let Some(mask) = &tape.rec_mask {
                for (v, &m) in h_rec.iter_mut().zip(mask) {
                    *v = *v * m;
                }
            }
            let LayerTape {
                inputs,
                gates,
                cells,
                tanh_c,
                hidden,
                ..
            } = &mut tape;
            let (c_prev, c_next) = cells[t * h..(t + 2) * h].split_at_mut(h);
            cell_step(
                layer,
                &inputs[t * input_dim..(t + 1) * input_dim],
                &h_rec,
                c_prev,
                &mut gates[t * 4 * h..(t + 1) * 4 * h],
                c_next,
                &mut tanh_c[t * h..(t + 1) * h],
                &mut hidden[(t + 1) * h..(t + 2) * h],
            );
        }
        layers.push(tape);
    }

    let top = layers.last().expect("at least one layer");
    let mut input = top.state(steps - 1).h.to_vec();
    if let Some(mask) = &top.out_mask {
        for (v, &m) in input.iter_mut().zip(mask) {
            *v = *v * m;
        }
    }
    let mut hidden = params.fc1_b.clone();
    params.fc1_w.matvec_acc(&input, &mut hidden);
    for v in &mut hidden {
        *v = v.max(T::zero());
    }
    let mut logit = [params.fc2_b];
    params.fc2_w.matvec_acc(&hidden, &mut logit);

    SampleTape {
        ids: ids.to_vec(),
        layers,
        head: HeadTape {
            input,
            hidden,
            probability: sigmoid(logit[0]),
        },
    }
}

/// Mean binary cross-entropy with probabilities clamped to `[ε, 1-ε]`.
pub fn bce_loss<T: Scalar>(probabilities: &[T], labels: &[u8]) -> Result<T> {
    if probabilities.len() != labels.len() {
        return Err(Error::Dimension {
            context: "bce labels",
            expected: probabilities.len(),
            actual: labels.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(Error::data("bce over an empty batch"));
    }
    let eps = T::lit(BCE_EPSILON);
    let one = T::one();
    let total = probabilities
        .iter()
        .zip(labels)
        .fold(T::zero(), |acc, (&p, &y)| {
            let p = p.max(eps).min(one - eps);
            acc - if y == 1 { p.ln() } else { (one - p).ln() }
        });
    Ok(total / T::lit(probabilities.len() as f64))
}

/// Exact gradients of the mean BCE of the taped batch with respect to every
/// parameter, with full (untruncated) BPTT. The PAD embedding row gets no
/// gradient.
pub fn backward<T: Scalar>(
    params: &ModelParams<T>,
    tape: &Tape<T>,
    labels: &[u8],
) -> Result<ModelParams<T>> {
    if labels.len() != tape.samples.len() {
        return Err(Error::Internal(format!(
            "tape holds {} samples but {} labels were given",
            tape.samples.len(),
            labels.len()
        )));
    }
    if params.dims() != tape.dims {
        return Err(Error::Internal("tape was recorded with different model dims".into()));
    }
    let mut grads = ModelParams::zeros(tape.dims);
    let scale = T::lit(1.0 / labels.len() as f64);
    for (sample, &y) in tape.samples.iter().zip(labels) {
        backward_sample(params, sample, y, scale, &mut grads);
    }
    grads.embedding.row_mut(0).fill(T::zero());
    Ok(grads)
}

fn backward_sample<T: Scalar>(
    params: &ModelParams<T>,
    sample: &SampleTape<T>,
    label: u8,
    scale: T,
    grads: &mut ModelParams<T>,
) {
    let dims = params.dims();
    let (h, steps) = (dims.units, sample.ids.len());
    let one = T::one();

    // Sigmoid + BCE: d/dlogit = p - y, zero where the clamp is active.
    let p = sample.head.probability;
    let eps = T::lit(BCE_EPSILON);
    let dlogit = if p > eps && p < one - eps {
        (p - T::lit(label as f64)) * scale
    } else {
        T::zero()
    };

    let head = &sample.head;
    grads.fc2_b = grads.fc2_b + dlogit;
    grads.fc2_w.outer_acc(&[dlogit], &head.hidden);
    let mut dhidden = vec![T::zero(); FC_UNITS];
    params.fc2_w.matvec_t_acc(&[dlogit], &mut dhidden);
    for (d, &a) in dhidden.iter_mut().zip(&head.hidden) {
        if a <= T::zero() {
            *d = T::zero();
        }
    }
    grads.fc1_w.outer_acc(&dhidden, &head.input);
    for (b, &d) in grads.fc1_b.iter_mut().zip(&dhidden) {
        *b = *b + d;
    }
    let mut dtop = vec![T::zero(); h];
    params.fc1_w.matvec_t_acc(&dhidden, &mut dtop);

    // Gradient arriving at each layer's emitted h_t from above.
    let mut dh_above = vec![T::zero(); steps * h];
    let top = sample.layers.last().expect("at least one layer");
    let last_row = &mut dh_above[(steps - 1) * h..];
    last_row.copy_from_slice(&dtop);
    if let Some(mask) = &top.out_mask {
        for (v, &m) in last_row.iter_mut().zip(mask) {
            *v = *v * m;
        }
    }

    let mut dz = vec![T::zero(); 4 * h];
    let mut dh_next = vec![T::zero(); h];
    let mut dc_next = vec![T::zero(); h];
    let mut dh_rec = vec![T::zero(); h];
    let mut h_rec = vec![T::zero(); h];

    for l in (0..dims.layers).rev() {
        let tape = &sample.layers[l];
        let weights = &params.layers[l];
        let grad = &mut grads.layers[l];
        let input_dim = tape.input_dim;
        let mut dinputs = vec![T::zero(); steps * input_dim];
        dh_next.fill(T::zero());
        dc_next.fill(T::zero());

        for t in (0..steps).rev() {
            let st = tape.state(t);
            let c_prev = &tape.cells[t * h..(t + 1) * h];
            for k in 0..h {
                let dh = dh_above[t * h + k] + dh_next[k];
                let (i, f, g, o) = (
                    st.input_gate[k],
                    st.forget_gate[k],
                    st.candidate[k],
                    st.output_gate[k],
                );
                let tc = st.tanh_c[k];
                let dc = dc_next[k] + dh * o * (one - tc * tc);
                dz[k] = dc * g * i * (one - i);
                dz[h + k] = dc * c_prev[k] * f * (one - f);
                dz[2 * h + k] = dc * i * (one - g * g);
                dz[3 * h + k] = dh * tc * o * (one - o);
                dc_next[k] = dc * f;
            }

            h_rec.copy_from_slice(tape.hidden_row(t));
            if let Some(mask) = &tape.rec_mask {
                for (v, &m) in h_rec.iter_mut().zip(mask) {
                    *v = *v * m;
                }
            }
            grad.w.outer_acc(&dz, tape.input(t));
            grad.u.outer_acc(&dz, &h_rec);
            for (b, &d) in grad.b.iter_mut().zip(&dz) {
                *b = *b + d;
            }
            weights
                .w
                .matvec_t_acc(&dz, &mut dinputs[t * input_dim..(t + 1) * input_dim]);
            dh_rec.fill(T::zero());
            weights.u.matvec_t_acc(&dz, &mut dh_rec);
            match &tape.rec_mask {
                Some(mask) => {
                    for ((n, &r), &m) in dh_next.iter_mut().zip(&dh_rec).zip(mask) {
                        *n = r * m;
                    }
                }
                None => dh_next.copy_from_slice(&dh_rec),
            }
        }

        if l == 0 {
            for (t, &id) in sample.ids.iter().enumerate() {
                if id == 0 {
                    continue;
                }
                let row = grads.embedding.row_mut(id as usize);
                for (g, &d) in row.iter_mut().zip(&dinputs[t * input_dim..(t + 1) * input_dim]) {
                    *g = *g + d;
                }
            }
        } else {
            let below = &sample.layers[l - 1];
            dh_above.copy_from_slice(&dinputs);
            if let Some(mask) = &below.out_mask {
                for (v, &m) in dh_above.iter_mut().zip(mask) {
                    *v = *v * m;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::neural::init_params;

    fn settings(p: f64) -> TrainSettings {
        TrainSettings {
            dropout_out: p,
            dropout_recurrent: p,
            ..TrainSettings::default()
        }
    }

    #[test]
    fn zero_params_give_half_probability() {
        let dims = ModelDims::new(6, 3, 2, 4).unwrap();
        let params = ModelParams::<f64>::zeros(dims);
        let seqs: Vec<Vec<u32>> = vec![vec![1, 2, 3], vec![0, 5, 4]];
        let batch: Vec<&[u32]> = seqs.iter().map(|s| s.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p, _) = forward(&params, &batch, &settings(0.0), Mode::Eval, &mut rng).unwrap();
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn no_dropout_train_equals_eval() {
        let dims = ModelDims::new(8, 3, 2, 3).unwrap();
        let params = init_params::<f64>(dims, 5);
        let seqs: Vec<Vec<u32>> = vec![vec![1, 2, 3, 7], vec![0, 0, 4, 4]];
        let batch: Vec<&[u32]> = seqs.iter().map(|s| s.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, _) = forward(&params, &batch, &settings(0.0), Mode::Train, &mut rng).unwrap();
        let (b, _) = forward(&params, &batch, &settings(0.0), Mode::Eval, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tape_shape_contract() {
        let dims = ModelDims::new(10, 2, 2, 3).unwrap();
        let params = init_params::<f32>(dims, 1);
        let seqs: Vec<Vec<u32>> = (0..4).map(|i| (0..7).map(|t| (i + t) % 10).collect()).collect();
        let batch: Vec<&[u32]> = seqs.iter().map(|s| s.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (p, tape) = forward(&params, &batch, &settings(0.2), Mode::Train, &mut rng).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(tape.batch_size(), 4);
        assert_eq!(tape.seq_len(), 7);
        for s in 0..4 {
            assert_eq!(tape.layers(s).len(), 2);
            assert!(tape.layers(s).iter().all(|l| l.steps() == 7));
        }
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn out_of_range_id_is_data_error() {
        let dims = ModelDims::new(4, 2, 1, 2).unwrap();
        let params = ModelParams::<f64>::zeros(dims);
        let seq = [1u32, 4];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = forward(&params, &[&seq[..]], &settings(0.0), Mode::Eval, &mut rng).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        let empty: [u32; 0] = [];
        assert!(forward(&params, &[&empty[..]], &settings(0.0), Mode::Eval, &mut rng).is_err());
    }

    #[test]
    fn bce_hand_values() {
        let l = bce_loss(&[0.5f64, 0.5, 0.5], &[0, 1, 1]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        let l = bce_loss(&[1.0f64, 0.0], &[1, 0]).unwrap();
        assert!((l - 1e-7).abs() < 1e-12);
        let l = bce_loss(&[0.9f64, 0.2], &[1, 0]).unwrap();
        assert!((l - 0.164_252_033_486_018).abs() < 1e-12);
        assert!(matches!(
            bce_loss(&[0.5f64], &[0, 1]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn backward_rejects_label_mismatch() {
        let dims = ModelDims::new(4, 2, 1, 2).unwrap();
        let params = init_params::<f64>(dims, 0);
        let seq = [1u32, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, tape) = forward(&params, &[&seq[..]], &settings(0.0), Mode::Train, &mut rng).unwrap();
        assert!(matches!(backward(&params, &tape, &[0, 1]), Err(Error::Internal(_))));
    }
}
