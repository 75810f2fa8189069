use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::error::{Error, Result};
use crate::vector;

/// Order-N dense tensor, first index fastest.
///
/// Entry `(i_0, ..., i_{N-1})` lives at `i_0 + I_0 (i_1 + I_1 (i_2 + ...))`.
/// The mode-n unfolding places index `n` along rows; its column index is the
/// linear index of the remaining modes in the same first-fastest order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Extents before mode `n`, at mode `n`, and after mode `n`.
#[inline]
pub(crate) fn split_extents(shape: &[usize], n: usize) -> (usize, usize, usize) {
    let left: usize = shape[..n].iter().product();
    let right: usize = shape[n + 1..].iter().product();
    (left, shape[n], right)
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::InvalidShape { shape: shape.to_vec(), reason: "order must be at least 1" });
    }
    if shape.iter().any(|&e| e == 0) {
        return Err(Error::InvalidShape { shape: shape.to_vec(), reason: "extents must be positive" });
    }
    Ok(())
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::dims(
                "DenseTensor::new",
                format!("shape {shape:?} needs {n} entries, got {}", data.len()),
            ));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Ok(Self { shape: shape.to_vec(), data: vec![0.0; shape.iter().product()] })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_shape(shape)?;
        let total: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(total);
        for _ in 0..total {
            data.push(f(&idx));
            for (d, e) in idx.iter_mut().zip(shape) {
                *d += 1;
                if *d < *e {
                    break;
                }
                *d = 0;
            }
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Self { shape: vec![m.rows(), m.cols()], data: m.data().to_vec() }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.shape.len());
        let mut lin = 0;
        let mut stride = 1;
        for (i, e) in idx.iter().zip(&self.shape) {
            debug_assert!(i < e);
            lin += i * stride;
            stride *= e;
        }
        lin
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.linear_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let l = self.linear_index(idx);
        self.data[l] = v;
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.order() {
            return Err(Error::ModeOutOfRange { mode: n, order: self.order() });
        }
        Ok(())
    }

    /// Mode-n unfolding `X_(n)`.
    pub fn matricize(&self, n: usize) -> Result<Matrix> {
        self.check_mode(n)?;
        let (left, mid, right) = split_extents(&self.shape, n);
        let cols = left * right;
        let mut out = vec![0.0; mid * cols];
        for r in 0..right {
            for i in 0..mid {
                let src = &self.data[left * (i + mid * r)..left * (i + mid * r + 1)];
                for (l, v) in src.iter().enumerate() {
                    out[i + mid * (l + left * r)] = *v;
                }
            }
        }
        Matrix::new(mid, cols, out)
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn tensorize(m: &Matrix, shape: &[usize], n: usize) -> Result<Self> {
        check_shape(shape)?;
        if n >= shape.len() {
            return Err(Error::ModeOutOfRange { mode: n, order: shape.len() });
        }
        let (left, mid, right) = split_extents(shape, n);
        if m.rows() != mid || m.cols() != left * right {
            return Err(Error::dims(
                "tensorize",
                format!("{}x{} matrix cannot fold into {shape:?} along mode {n}", m.rows(), m.cols()),
            ));
        }
        let md = m.data();
        let mut data = vec![0.0; mid * left * right];
        for r in 0..right {
            for i in 0..mid {
                let dst = &mut data[left * (i + mid * r)..left * (i + mid * r + 1)];
                for (l, v) in dst.iter_mut().enumerate() {
                    *v = md[i + mid * (l + left * r)];
                }
            }
        }
        Ok(Self { shape: shape.to_vec(), data })
    }

    /// `a ×_n self`, whose mode-n unfolding is `a · X_(n)`.
    pub fn mode_product(&self, a: &Matrix, n: usize) -> Result<Self> {
        self.check_mode(n)?;
        let (left, mid, right) = split_extents(&self.shape, n);
        if a.cols() != mid {
            return Err(Error::dims(
                "mode_product",
                format!("matrix has {} columns but mode {n} has extent {mid}", a.cols()),
            ));
        }
        let j_out = a.rows();
        let mut shape = self.shape.clone();
        shape[n] = j_out;
        let mut out = vec![0.0; left * j_out * right];
        if left == 1 {
            // Each fiber is contiguous: out column block = A * x column.
            for r in 0..right {
                let x = &self.data[mid * r..mid * (r + 1)];
                let y = &mut out[j_out * r..j_out * (r + 1)];
                for (i, xi) in x.iter().enumerate() {
                    if *xi != 0.0 {
                        vector::axpy(*xi, a.col(i), y);
                    }
                }
            }
        } else {
            for r in 0..right {
                for i in 0..mid {
                    let x = &self.data[left * (i + mid * r)..left * (i + mid * r + 1)];
                    for j in 0..j_out {
                        let aji = a.get(j, i);
                        if aji != 0.0 {
                            let y = &mut out[left * (j + j_out * r)..left * (j + j_out * r + 1)];
                            vector::axpy(aji, x, y);
                        }
                    }
                }
            }
        }
        Ok(Self { shape, data: out })
    }

    /// `a ×_n self` with `a` given transposed, i.e. multiplies by `atᵀ`.
    pub fn mode_product_t(&self, at: &Matrix, n: usize) -> Result<Self> {
        self.mode_product(&at.transpose(), n)
    }

    /// Applies `mats[n]` in every mode where it is `Some`; `None` is the identity.
    pub fn multi_mode_product(&self, mats: &[Option<&Matrix>]) -> Result<Self> {
        if mats.len() != self.order() {
            return Err(Error::dims(
                "multi_mode_product",
                format!("{} matrices for an order-{} tensor", mats.len(), self.order()),
            ));
        }
        let mut cur: Option<Self> = None;
        for (n, m) in mats.iter().enumerate() {
            if let Some(a) = m {
                let next = cur.as_ref().unwrap_or(self).mode_product(a, n)?;
                cur = Some(next);
            }
        }
        Ok(cur.unwrap_or_else(|| self.clone()))
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::dims(op, format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other, "inner_product")?;
        Ok(vector::dot(&self.data, &other.data))
    }

    pub fn frob_norm(&self) -> f64 {
        vector::norm(&self.data)
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "hadamard")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { shape: self.shape.clone(), data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(Self { shape: self.shape.clone(), data: vector::add(&self.data, &other.data) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(Self { shape: self.shape.clone(), data: vector::sub(&self.data, &other.data) })
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self { shape: self.shape.clone(), data: vector::scaled(alpha, &self.data) }
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, alpha: f64, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add_scaled")?;
        Ok(Self { shape: self.shape.clone(), data: vector::add_scaled(&self.data, alpha, &other.data) })
    }
}
