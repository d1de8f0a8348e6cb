//! Polar unitary, spectral window projection and projection intertwiner.

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::{hermitian_eigen, CMatrix, C64};
use crate::error::{Error, Result, Stage};

/// Padding added to both ends of a spectral window to absorb eigenvalue drift.
pub const SPECTRAL_PAD: f64 = 1e-12;

const SINGULAR_FLOOR: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-9;

/// Unitary part `u` of the polar decomposition `x = u |x|`.
///
/// `|x|` comes from the Hermitian eigendecomposition of `x* x`, so `x` must be
/// invertible; near the identity (`‖x − I‖ < 1`) this always holds.
pub fn polar_unitary(x: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(&(&x.adjoint() * x));
    let min = eig.min().max(0.0).sqrt();
    if min <= SINGULAR_FLOOR {
        return Err(Error::NotInvertible { sigma_min: min });
    }
    let abs_inv = eig.apply_fn(|l| C64::new(1.0 / l.sqrt(), 0.0));
    Ok(x * &abs_inv)
}

/// Projection onto the eigenspaces of `a` with eigenvalues in
/// `[lo − pad, hi + pad]`.
pub fn spectral_window_projection(a: &CMatrix, lo: f64, hi: f64) -> Result<CMatrix> {
    let residual = a.hermitian_residual();
    if residual > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    if lo > hi {
        return Err(Error::PreconditionFailed("spectral window requires lo <= hi"));
    }
    let eig = hermitian_eigen(a);
    Ok(eig.spectral_projection(lo - SPECTRAL_PAD, hi + SPECTRAL_PAD))
}

/// Unitary `w` with `w p w* = q`, built as the polar part of
/// `qp + (I − q)(I − p)`.
pub fn projection_intertwiner(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let dist = (p - q).op_norm();
    if dist >= 1.0 {
        return Err(Error::TooFar { stage: Stage::ProjectionIntertwiner, value: dist, limit: 1.0 });
    }
    let id = CMatrix::identity(p.dim());
    let x = &(q * p) + &(&(&id - q) * &(&id - p));
    polar_unitary(&x)
}
