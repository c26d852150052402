use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating point element type of the network.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Width in bytes, also used as the precision tag in snapshots.
    const BYTES: usize;

    fn lit(x: f64) -> Self;
    fn put_le(self, out: &mut Vec<u8>);
    fn get_le(bytes: &[u8]) -> Self;
}

impl Scalar for f32 {
    const BYTES: usize = 4;

    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn get_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("4 bytes"))
    }
}

impl Scalar for f64 {
    const BYTES: usize = 8;

    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn get_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("8 bytes"))
    }
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    // Split on sign so exp never overflows.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> crate::Result<Self> {
        if data.len() != rows * cols {
            return Err(crate::Error::Dimension {
                context: "matrix data",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `out += self · x`
    #[inline]
    pub(crate) fn matvec_acc(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = T::zero();
            for (&w, &v) in row.iter().zip(x) {
                acc = acc + w * v;
            }
            *o = *o + acc;
        }
    }

    /// `out += selfᵀ · y`
    #[inline]
    pub(crate) fn matvec_t_acc(&self, y: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for (&g, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            if g == T::zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + g * w;
            }
        }
    }

    /// `self += y · xᵀ`
    #[inline]
    pub(crate) fn outer_acc(&mut self, y: &[T], x: &[T]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (&g, row) in y.iter().zip(self.data.chunks_exact_mut(self.cols)) {
            if g == T::zero() {
                continue;
            }
            for (w, &v) in row.iter_mut().zip(x) {
                *w = *w + g * v;
            }
        }
    }
}
