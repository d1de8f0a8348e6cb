//! Dense square complex matrices and the elementary norm estimates.

mod eigen;
mod estimates;
pub mod linalg;
pub mod random;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use estimates::{
    polar_unitary, projection_intertwiner, spectral_window_projection, SPECTRAL_PAD,
};
pub use random::random_unitary_near_identity;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense `dim × dim` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix unit `e_{ij}`.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real rows; panics on ragged input (test/fixture helper).
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| {
            assert_eq!(rows[i].len(), dim, "ragged rows");
            C64::new(rows[i][j], 0.0)
        })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: C64, other: &CMatrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Normalized trace `tr = Tr / n`.
    pub fn normalized_trace(&self) -> C64 {
        self.trace() / self.dim as f64
    }

    /// Hilbert–Schmidt inner product `Tr(self* other)`, conjugate-linear in `self`.
    pub fn hs_inner(&self, other: &CMatrix) -> C64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator norm: the largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.data.iter().all(|z| *z == ZERO) {
            return 0.0;
        }
        let gram = &self.adjoint() * self;
        let eig = hermitian_eigen(&gram);
        eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn commutator(&self, other: &CMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let (p, q) = (self.dim, other.dim);
        Self::from_fn(p * q, |i, j| self[(i / q, j / q)] * other[(i % q, j % q)])
    }

    /// `U self U*`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        debug_assert_eq!(v.len(), n);
        (0..n).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn hermitian_residual(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    pub fn unitary_residual(&self) -> f64 {
        (&(&self.adjoint() * self) - &CMatrix::identity(self.dim)).op_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_residual() <= tol
    }

    pub fn projection_residual(&self) -> f64 {
        (&(self * self) - self).op_norm() + self.hermitian_residual()
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.projection_residual() <= tol
    }

    /// Apply `f` to the spectrum of a Hermitian matrix.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> C64) -> Self {
        hermitian_eigen(self).apply_fn(f)
    }

    /// Inverse of a Hermitian positive-definite matrix; fails below `floor`.
    pub fn hpd_inverse(&self, floor: f64) -> Result<Self> {
        let eig = hermitian_eigen(self);
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min <= floor {
            return Err(Error::NotInvertible { sigma_min: min });
        }
        Ok(eig.apply_fn(|x| C64::new(1.0 / x, 0.0)))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|a| -a).collect() }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        CMatrix { dim: n, data: out }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: CMatrix) -> CMatrix {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: &CMatrix) -> CMatrix {
                (&self).$f(rhs)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $f(self, rhs: CMatrix) -> CMatrix {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Euclidean inner product `Σ conj(a_i) b_i`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
