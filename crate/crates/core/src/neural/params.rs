use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::{Matrix, Scalar};
use crate::harness::HyperConfig;
use crate::{Error, Result};

/// Width of the first dense layer of the classification head.
pub const FC_UNITS: usize = 256;

/// Shape of a network. All tensor shapes follow from these four numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelDims {
    /// Vocabulary size including the PAD id 0.
    pub vocab: usize,
    pub embed: usize,
    pub layers: usize,
    pub units: usize,
}

impl ModelDims {
    pub fn new(vocab: usize, embed: usize, layers: usize, units: usize) -> Result<Self> {
        if vocab < 2 {
            return Err(Error::config(format!(
                "vocabulary must hold PAD plus at least one opcode, got {vocab}"
            )));
        }
        if embed == 0 || layers == 0 || units == 0 {
            return Err(Error::config(format!(
                "network dimensions must be positive (embed={embed}, layers={layers}, units={units})"
            )));
        }
        Ok(ModelDims {
            vocab,
            embed,
            layers,
            units,
        })
    }

    pub fn for_config(vocab: usize, config: &HyperConfig) -> Result<Self> {
        Self::new(vocab, config.n_embedding, config.n_layers, config.n_units)
    }

    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            self.embed
        } else {
            self.units
        }
    }

    pub fn parameter_count(&self) -> usize {
        let h = self.units;
        let lstm: usize = (0..self.layers)
            .map(|l| 4 * h * (self.layer_input(l) + h + 1))
            .sum();
        self.vocab * self.embed + lstm + FC_UNITS * h + FC_UNITS + FC_UNITS + 1
    }
}

/// Weights of one LSTM layer. Gate blocks are stacked in `(i, f, c, o)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<T> {
    /// Input weights, `4h × d_in`.
    pub w: Matrix<T>,
    /// Recurrent weights, `4h × h`.
    pub u: Matrix<T>,
    /// Biases, `4h`.
    pub b: Vec<T>,
}

impl<T: Scalar> LstmLayer<T> {
    pub fn zeros(input: usize, units: usize) -> Self {
        LstmLayer {
            w: Matrix::zeros(4 * units, input),
            u: Matrix::zeros(4 * units, units),
            b: vec![T::zero(); 4 * units],
        }
    }

    pub fn units(&self) -> usize {
        self.u.cols()
    }

    pub fn input(&self) -> usize {
        self.w.cols()
    }
}

/// Every trainable tensor of the network. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    dims: ModelDims,
    /// `V × d`; row 0 is the PAD row and stays zero.
    pub embedding: Matrix<T>,
    pub layers: Vec<LstmLayer<T>>,
    /// `256 × h`
    pub fc1_w: Matrix<T>,
    pub fc1_b: Vec<T>,
    /// `1 × 256`
    pub fc2_w: Matrix<T>,
    pub fc2_b: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(dims: ModelDims) -> Self {
        ModelParams {
            dims,
            embedding: Matrix::zeros(dims.vocab, dims.embed),
            layers: (0..dims.layers)
                .map(|l| LstmLayer::zeros(dims.layer_input(l), dims.units))
                .collect(),
            fc1_w: Matrix::zeros(FC_UNITS, dims.units),
            fc1_b: vec![T::zero(); FC_UNITS],
            fc2_w: Matrix::zeros(1, FC_UNITS),
            fc2_b: T::zero(),
        }
    }

    /// Assembles parameters from explicit tensors, checking every shape.
    pub fn from_parts(
        dims: ModelDims,
        embedding: Matrix<T>,
        layers: Vec<LstmLayer<T>>,
        fc1_w: Matrix<T>,
        fc1_b: Vec<T>,
        fc2_w: Matrix<T>,
        fc2_b: T,
    ) -> Result<Self> {
        let out = ModelParams {
            dims,
            embedding,
            layers,
            fc1_w,
            fc1_b,
            fc2_w,
            fc2_b,
        };
        out.check_shapes()?;
        Ok(out)
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let d = self.dims;
        let expect = |context: &'static str, expected: usize, actual: usize| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::Dimension {
                    context,
                    expected,
                    actual,
                })
            }
        };
        expect("embedding rows", d.vocab, self.embedding.rows())?;
        expect("embedding cols", d.embed, self.embedding.cols())?;
        expect("lstm layer count", d.layers, self.layers.len())?;
        for (l, layer) in self.layers.iter().enumerate() {
            expect("lstm W rows", 4 * d.units, layer.w.rows())?;
            expect("lstm W cols", d.layer_input(l), layer.w.cols())?;
            expect("lstm U rows", 4 * d.units, layer.u.rows())?;
            expect("lstm U cols", d.units, layer.u.cols())?;
            expect("lstm bias", 4 * d.units, layer.b.len())?;
        }
        expect("fc1 rows", FC_UNITS, self.fc1_w.rows())?;
        expect("fc1 cols", d.units, self.fc1_w.cols())?;
        expect("fc1 bias", FC_UNITS, self.fc1_b.len())?;
        expect("fc2 rows", 1, self.fc2_w.rows())?;
        expect("fc2 cols", FC_UNITS, self.fc2_w.cols())?;
        Ok(())
    }

    /// Named views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &[T])> {
        let mut out: Vec<(String, &[T])> = vec![("embedding".into(), self.embedding.as_slice())];
        for (l, layer) in self.layers.iter().enumerate() {
            out.push((format!("lstm{l}.w"), layer.w.as_slice()));
            out.push((format!("lstm{l}.u"), layer.u.as_slice()));
            out.push((format!("lstm{l}.b"), &layer.b));
        }
        out.push(("fc1.w".into(), self.fc1_w.as_slice()));
        out.push(("fc1.b".into(), &self.fc1_b));
        out.push(("fc2.w".into(), self.fc2_w.as_slice()));
        out.push(("fc2.b".into(), std::slice::from_ref(&self.fc2_b)));
        out
    }

    /// Mutable counterpart of [`tensors`](Self::tensors), same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = vec![self.embedding.as_mut_slice()];
        for layer in &mut self.layers {
            out.push(layer.w.as_mut_slice());
            out.push(layer.u.as_mut_slice());
            out.push(&mut layer.b);
        }
        out.push(self.fc1_w.as_mut_slice());
        out.push(&mut self.fc1_b);
        out.push(self.fc2_w.as_mut_slice());
        out.push(std::slice::from_mut(&mut self.fc2_b));
        out
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> ModelParams<U> {
        let mut out = ModelParams::<U>::zeros(self.dims);
        for ((_, src), dst) in self.tensors().into_iter().zip(out.tensors_mut()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = f(s);
            }
        }
        out
    }
}

/// Glorot-uniform limit `sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Glorot-uniform weights, zero biases, zero PAD row. Deterministic in `seed`.
///
/// Values are drawn in double precision and rounded, so an `f32` and an `f64`
/// network from the same seed agree to `f32` rounding.
pub fn init_params<T: Scalar>(dims: ModelDims, seed: u64) -> ModelParams<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::<T>::zeros(dims);

    let fill = |m: &mut Matrix<T>, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng| {
        let lim = glorot_limit(fan_in, fan_out);
        for v in m.as_mut_slice() {
            *v = T::lit(rng.random_range(-lim..=lim));
        }
    };

    fill(&mut params.embedding, dims.vocab, dims.embed, &mut rng);
    params.embedding.row_mut(0).fill(T::zero());
    for layer in &mut params.layers {
        let (input, gates) = (layer.w.cols(), layer.w.rows());
        fill(&mut layer.w, input, gates, &mut rng);
        fill(&mut layer.u, dims.units, gates, &mut rng);
    }
    fill(&mut params.fc1_w, dims.units, FC_UNITS, &mut rng);
    fill(&mut params.fc2_w, FC_UNITS, 1, &mut rng);
    params
}
