use super::params::ModelParams;
use super::tensor::Scalar;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OptimizerKind {
    Adam,
    Rmsprop,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Rmsprop => "rmsprop",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "rmsprop" => Ok(OptimizerKind::Rmsprop),
            other => Err(Error::config(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// RMSprop decay.
    pub rho: f64,
    pub epsilon: f64,
}

impl OptimizerConfig {
    /// The usual published defaults with lr = 0.001.
    pub fn new(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            epsilon: 1e-7,
        }
    }
}

/// Moment buffers, one pair per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn for_shapes(lens: impl IntoIterator<Item = usize>) -> Self {
        let lens: Vec<usize> = lens.into_iter().collect();
        OptimizerState {
            step: 0,
            first: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
            second: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn for_params(params: &ModelParams<T>) -> Self {
        Self::for_shapes(params.tensors().iter().map(|(_, t)| t.len()))
    }

    /// Second-moment buffers (RMSprop's running mean square, Adam's `v`).
    pub fn second_moments(&self) -> &[Vec<T>] {
        &self.second
    }

    /// Applies one update to a list of parameter slices.
    pub fn apply(
        &mut self,
        params: &mut [&mut [T]],
        grads: &[&[T]],
        cfg: &OptimizerConfig,
    ) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(Error::Dimension {
                context: "optimizer tensor count",
                expected: self.first.len(),
                actual: params.len(),
            });
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != g.len() || p.len() != self.first[k].len() {
                return Err(Error::Dimension {
                    context: "optimizer tensor length",
                    expected: self.first[k].len(),
                    actual: g.len(),
                });
            }
            if let Some(pos) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient tensor {k} entry {pos} is {}",
                    g[pos]
                )));
            }
        }

        self.step += 1;
        let lr = T::lit(cfg.learning_rate);
        let eps = T::lit(cfg.epsilon);
        let one = T::one();
        match cfg.kind {
            OptimizerKind::Adam => {
                let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
                let t = self.step as i32;
                let c1 = one - T::lit(cfg.beta1.powi(t));
                let c2 = one - T::lit(cfg.beta2.powi(t));
                for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    let (m, v) = (&mut self.first[k], &mut self.second[k]);
                    for j in 0..p.len() {
                        m[j] = b1 * m[j] + (one - b1) * g[j];
                        v[j] = b2 * v[j] + (one - b2) * g[j] * g[j];
                        let m_hat = m[j] / c1;
                        let v_hat = v[j] / c2;
                        p[j] = p[j] - lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
            OptimizerKind::Rmsprop => {
                let rho = T::lit(cfg.rho);
                for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    let v = &mut self.second[k];
                    for j in 0..p.len() {
                        v[j] = rho * v[j] + (one - rho) * g[j] * g[j];
                        p[j] = p[j] - lr * g[j] / (v[j].sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}

/// One Adam or RMSprop step over every tensor of the model.
///
/// Fails without touching `params` if any gradient entry is NaN or infinite.
pub fn optimizer_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut OptimizerState<T>,
    cfg: &OptimizerConfig,
) -> Result<()> {
    if params.dims() != grads.dims() {
        return Err(Error::Internal("gradient dims differ from parameter dims".into()));
    }
    let grad_views = grads.tensors();
    let grad_slices: Vec<&[T]> = grad_views.iter().map(|(_, t)| *t).collect();
    let mut param_slices = params.tensors_mut();
    state.apply(&mut param_slices, &grad_slices, cfg)
}
