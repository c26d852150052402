use super::params::LstmLayer;
use super::tensor::{sigmoid, Scalar};
use crate::{Error, Result};

/// One LSTM step with its gate activations.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput<T> {
    pub h: Vec<T>,
    pub c: Vec<T>,
    pub input_gate: Vec<T>,
    pub forget_gate: Vec<T>,
    pub output_gate: Vec<T>,
    /// `tanh(W_c x + U_c h + b_c)`
    pub candidate: Vec<T>,
}

/// Computes one LSTM step:
///
/// ```text
/// i = σ(W_i x + U_i h + b_i)      f = σ(W_f x + U_f h + b_f)
/// o = σ(W_o x + U_o h + b_o)      g = tanh(W_c x + U_c h + b_c)
/// c' = f ∘ c + i ∘ g              h' = o ∘ tanh(c')
/// ```
pub fn lstm_cell_forward<T: Scalar>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    layer: &LstmLayer<T>,
) -> Result<CellOutput<T>> {
    let h = layer.units();
    let check = |context, expected, actual| {
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
    check("cell input", layer.input(), x.len())?;
    check("cell hidden state", h, h_prev.len())?;
    check("cell state", h, c_prev.len())?;

    let mut gates = vec![T::zero(); 4 * h];
    let mut c = vec![T::zero(); h];
    let mut tanh_c = vec![T::zero(); h];
    let mut h_out = vec![T::zero(); h];
    cell_step(layer, x, h_prev, c_prev, &mut gates, &mut c, &mut tanh_c, &mut h_out);
    Ok(CellOutput {
        h: h_out,
        c,
        input_gate: gates[..h].to_vec(),
        forget_gate: gates[h..2 * h].to_vec(),
        output_gate: gates[3 * h..].to_vec(),
        candidate: gates[2 * h..3 * h].to_vec(),
    })
}

/// Buffer-writing core of [`lstm_cell_forward`]. `gates` receives the
/// activated `(i, f, g, o)` blocks.
#[allow(clippy::too_many_arguments)]
#[inline]
pub(crate) fn cell_step<T: Scalar>(
    layer: &LstmLayer<T>,
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    gates: &mut [T],
    c: &mut [T],
    tanh_c: &mut [T],
    h: &mut [T],
) {
    let n = c.len();
    gates.copy_from_slice(&layer.b);
    layer.w.matvec_acc(x, gates);
    layer.u.matvec_acc(h_prev, gates);
    for v in &mut gates[..2 * n] {
        *v = sigmoid(*v);
    }
    for v in &mut gates[2 * n..3 * n] {
        *v = v.tanh();
    }
    for v in &mut gates[3 * n..] {
        *v = sigmoid(*v);
    }
    for k in 0..n {
        let (i, f, g, o) = (gates[k], gates[n + k], gates[2 * n + k], gates[3 * n + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = c[k].tanh();
        h[k] = o * tanh_c[k];
    }
}
