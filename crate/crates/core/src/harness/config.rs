use std::fmt::Write as _;

use crate::data::Percentile;
use crate::neural::OptimizerKind;
use crate::seed::short_hash;
use crate::{Error, Result};

pub const LAYERS_DOMAIN: [usize; 4] = [1, 2, 3, 4];
pub const UNITS_DOMAIN: [usize; 3] = [32, 64, 128];
pub const DROPOUT_DOMAIN: [f64; 4] = [0.0, 0.1, 0.2, 0.3];
pub const EMBEDDING_DOMAIN: [usize; 4] = [16, 32, 64, 129];
pub const BATCH_DOMAIN: [usize; 5] = [64, 128, 256, 512, 1024];
pub const OPTIMIZER_DOMAIN: [OptimizerKind; 2] = [OptimizerKind::Adam, OptimizerKind::Rmsprop];

/// One point of the hyper-parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperConfig {
    pub n_layers: usize,
    pub n_units: usize,
    /// Applied to both the output and the recurrent connections.
    pub dropout: f64,
    pub n_embedding: usize,
    pub padding: Percentile,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub epochs: usize,
    pub seed: u64,
}

impl HyperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, value: String| {
            Err(Error::config(format!("{field}={value} is outside its grid domain")))
        };
        if !LAYERS_DOMAIN.contains(&self.n_layers) {
            return bad("n_layers", self.n_layers.to_string());
        }
        if !UNITS_DOMAIN.contains(&self.n_units) {
            return bad("n_units", self.n_units.to_string());
        }
        if !DROPOUT_DOMAIN.contains(&self.dropout) {
            return bad("dropout", self.dropout.to_string());
        }
        if !EMBEDDING_DOMAIN.contains(&self.n_embedding) {
            return bad("n_embedding", self.n_embedding.to_string());
        }
        if !BATCH_DOMAIN.contains(&self.batch_size) {
            return bad("batch_size", self.batch_size.to_string());
        }
        if self.epochs == 0 {
            return bad("epochs", "0".into());
        }
        Ok(())
    }

    /// Canonical `key=value;…` form; the config id hashes this string.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "n_layers={};n_units={};dropout={};n_embedding={};padding_percentile={};batch_size={};optimizer={};epochs={};seed={}",
            self.n_layers,
            self.n_units,
            self.dropout,
            self.n_embedding,
            self.padding,
            self.batch_size,
            self.optimizer,
            self.epochs,
            self.seed
        );
        s
    }

    /// Stable 16-hex-digit id over every field.
    pub fn id(&self) -> String {
        short_hash(self.canonical().as_bytes(), 16)
    }

    fn sort_key(&self) -> (usize, usize, u64, usize, Percentile, usize, OptimizerKind) {
        (
            self.n_layers,
            self.n_units,
            self.dropout.to_bits(),
            self.n_embedding,
            self.padding,
            self.batch_size,
            self.optimizer,
        )
    }
}

/// Value lists per factor plus the run-wide epoch count and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_layers: Vec<usize>,
    pub n_units: Vec<usize>,
    pub dropout: Vec<f64>,
    pub n_embedding: Vec<usize>,
    pub padding: Vec<Percentile>,
    pub batch_size: Vec<usize>,
    pub optimizer: Vec<OptimizerKind>,
    pub epochs: usize,
    pub seed: u64,
}

impl GridSpec {
    /// Every domain value for every factor.
    pub fn full(seed: u64) -> Self {
        GridSpec {
            n_layers: LAYERS_DOMAIN.to_vec(),
            n_units: UNITS_DOMAIN.to_vec(),
            dropout: DROPOUT_DOMAIN.to_vec(),
            n_embedding: EMBEDDING_DOMAIN.to_vec(),
            padding: Percentile::ALL.to_vec(),
            batch_size: BATCH_DOMAIN.to_vec(),
            optimizer: OPTIMIZER_DOMAIN.to_vec(),
            epochs: 5,
            seed,
        }
    }

    /// Parses `key = v1, v2, …` lines. `#` starts a comment; keys not given
    /// keep the full domain. Recognised keys are the factor names plus
    /// `epochs` and `seed`.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let mut spec = GridSpec::full(default_seed);
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, values) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("grid spec line {}: expected key = values", n + 1)))?;
            let items: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            if items.is_empty() {
                return Err(Error::config(format!("grid spec line {}: empty value list", n + 1)));
            }
            let ctx = |e: String| Error::config(format!("grid spec line {}: {e}", n + 1));
            fn nums<T: std::str::FromStr>(items: &[&str]) -> std::result::Result<Vec<T>, String> {
                items.iter().map(|v| v.parse::<T>().map_err(|_| format!("bad value `{v}`"))).collect()
            }
            match key.trim() {
                "n_layers" => spec.n_layers = nums(&items).map_err(ctx)?,
                "n_units" => spec.n_units = nums(&items).map_err(ctx)?,
                "dropout" => spec.dropout = nums(&items).map_err(ctx)?,
                "n_embedding" => spec.n_embedding = nums(&items).map_err(ctx)?,
                "batch_size" => spec.batch_size = nums(&items).map_err(ctx)?,
                "padding_percentile" => {
                    spec.padding = items.iter().map(|v| v.parse()).collect::<Result<_>>()?;
                }
                "optimizer" => {
                    spec.optimizer = items.iter().map(|v| v.parse()).collect::<Result<_>>()?;
                }
                "epochs" | "seed" if items.len() != 1 => {
                    return Err(ctx(format!("`{}` takes a single value", key.trim())));
                }
                "epochs" => spec.epochs = nums(&items).map_err(ctx)?[0],
                "seed" => spec.seed = nums(&items).map_err(ctx)?[0],
                other => return Err(ctx(format!("unknown key `{other}`"))),
            }
        }
        Ok(spec)
    }

    pub fn raw_size(&self) -> usize {
        self.n_layers.len()
            * self.n_units.len()
            * self.dropout.len()
            * self.n_embedding.len()
            * self.padding.len()
            * self.batch_size.len()
            * self.optimizer.len()
    }
}

/// Cartesian product of the spec, sorted by factor tuple and deduplicated.
/// Every config shares the spec's seed and epoch count.
pub fn enumerate_grid(spec: &GridSpec) -> Result<Vec<HyperConfig>> {
    let mut out = Vec::with_capacity(spec.raw_size());
    for &n_layers in &spec.n_layers {
        for &n_units in &spec.n_units {
            for &dropout in &spec.dropout {
                for &n_embedding in &spec.n_embedding {
                    for &padding in &spec.padding {
                        for &batch_size in &spec.batch_size {
                            for &optimizer in &spec.optimizer {
                                let c = HyperConfig {
                                    n_layers,
                                    n_units,
                                    dropout,
                                    n_embedding,
                                    padding,
                                    batch_size,
                                    optimizer,
                                    epochs: spec.epochs,
                                    seed: spec.seed,
                                };
                                c.validate()?;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(HyperConfig::sort_key);
    out.dedup_by_key(|c| c.sort_key());
    Ok(out)
}
