//! Flat little-endian parameter snapshots.
//!
//! Layout: magic `OPSQ`, then seven `u32` header fields (format version,
//! bytes per scalar, vocab, embed, layers, units, FC width), then every tensor
//! in [`ModelParams::tensors`] order, row-major.

use std::io::{Read, Write};

use super::params::{ModelDims, ModelParams, FC_UNITS};
use super::tensor::Scalar;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"OPSQ";
const VERSION: u32 = 1;

pub fn write_snapshot<T: Scalar, W: Write>(params: &ModelParams<T>, mut out: W) -> Result<()> {
    let d = params.dims();
    let mut buf = Vec::with_capacity(32 + d.parameter_count() * T::BYTES);
    buf.extend_from_slice(MAGIC);
    for v in [VERSION, T::BYTES as u32, d.vocab as u32, d.embed as u32, d.layers as u32, d.units as u32, FC_UNITS as u32] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for (_, tensor) in params.tensors() {
        for &v in tensor {
            v.put_le(&mut buf);
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot written with the same scalar type.
pub fn read_snapshot<T: Scalar, R: Read>(mut input: R) -> Result<ModelParams<T>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || &bytes[..4] != MAGIC {
        return Err(Error::data("not a parameter snapshot"));
    }
    let field = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    if field(0) != VERSION as usize {
        return Err(Error::data(format!("unsupported snapshot version {}", field(0))));
    }
    if field(1) != T::BYTES {
        return Err(Error::data(format!(
            "snapshot stores {}-byte scalars, expected {}",
            field(1),
            T::BYTES
        )));
    }
    if field(6) != FC_UNITS {
        return Err(Error::data(format!("snapshot head width {} unsupported", field(6))));
    }
    let dims = ModelDims::new(field(2), field(3), field(4), field(5))?;
    let mut params = ModelParams::<T>::zeros(dims);
    let payload = &bytes[32..];
    let expected = dims.parameter_count() * T::BYTES;
    if payload.len() != expected {
        return Err(Error::Dimension {
            context: "snapshot payload bytes",
            expected,
            actual: payload.len(),
        });
    }
    let mut chunks = payload.chunks_exact(T::BYTES);
    for tensor in params.tensors_mut() {
        for v in tensor.iter_mut() {
            *v = T::get_le(chunks.next().expect("length checked"));
        }
    }
    if !params.all_finite() {
        return Err(Error::NonFinite("snapshot contains NaN or infinite weights".into()));
    }
    Ok(params)
}
