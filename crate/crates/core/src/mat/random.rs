//! Seeded random generators for test scenarios.

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{hermitian_eigen, polar_unitary, CMatrix, C64};
use crate::error::{Error, Result, Stage};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sample (Box–Muller).
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (core::f64::consts::TAU * v).cos()
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng)) * core::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, |_, _| complex_normal(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_matrix(dim, rng).hermitian_part()
}

/// Haar-distributed unitary: polar part of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    loop {
        if let Ok(u) = polar_unitary(&random_matrix(dim, rng)) {
            return u;
        }
    }
}

/// Uniformly rotated rank-`rank` projection.
pub fn random_projection<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let diag: alloc::vec::Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
    CMatrix::from_real_diag(&diag).conjugate_by(&random_unitary(dim, rng))
}

/// `exp(i t H)` for Hermitian `H`, with `t` chosen so that `‖u − I‖ = eps`.
///
/// `H` is normalized to `‖H‖ = 1`; then `‖exp(itH) − I‖ = 2 sin(t/2)` for
/// `t ∈ [0, π]`, which is inverted in closed form.
pub fn unitary_from_generator(h: &CMatrix, eps: f64) -> Result<CMatrix> {
    if !(0.0..2.0).contains(&eps) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let n = h.dim();
    if eps == 0.0 {
        return Ok(CMatrix::identity(n));
    }
    let eig = hermitian_eigen(h);
    let norm = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if norm == 0.0 {
        return Err(Error::TooFar { stage: Stage::RandomUnitary, value: 0.0, limit: 0.0 });
    }
    let t = 2.0 * (eps / 2.0).asin() / norm;
    Ok(eig.apply_fn(|x| C64::new(0.0, t * x).exp()))
}

/// Seeded unitary `u = exp(i t H)` with `‖u − I‖ = eps`.
pub fn random_unitary_near_identity(dim: usize, eps: f64, seed: u64) -> Result<CMatrix> {
    if !(0.0..2.0).contains(&eps) {
        return Err(Error::EpsOutOfRange { eps });
    }
    let h = random_hermitian(dim, &mut rng(seed));
    unitary_from_generator(&h, eps)
}
