//! Linear maps out of a subalgebra, their norms, and unital *-homomorphisms.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::error::{Error, Result};
use crate::mat::random::rng;
use crate::mat::{hermitian_eigen, CMatrix};

/// Samples used when a norm is estimated without an explicit budget.
pub const DEFAULT_NORM_SAMPLES: usize = 64;

/// Tolerances a [`HomomorphismMap`] must meet to count as a unital
/// *-homomorphism fixing `C`.
pub const MULT_TOL: f64 = 1e-7;
pub const UNITAL_TOL: f64 = 1e-8;
pub const FIXES_C_TOL: f64 = 1e-8;

/// A linear map `L: A → M_n` stored by its values on the HS basis of `A`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    domain: Subalgebra,
    images: Vec<CMatrix>,
}

/// Bracket for the norm of a map over the unit ball of its domain.
///
/// `lower` is the largest `‖L(x)‖` seen on sampled contractions and the
/// normalized basis; `upper` is certified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapNorm {
    pub lower: f64,
    pub upper: f64,
}

/// `‖x‖_1`, the sum of the singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    hermitian_eigen(&(&x.adjoint() * x)).values.iter().map(|l| l.max(0.0).sqrt()).sum()
}

impl LinearMap {
    pub fn from_fn(domain: &Subalgebra, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { domain: domain.clone(), images: domain.basis().iter().map(f).collect() }
    }

    pub fn from_images(domain: &Subalgebra, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), actual: images.len() });
        }
        let n = domain.ambient_dim();
        if let Some(bad) = images.iter().find(|m| m.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: bad.dim() });
        }
        Ok(Self { domain: domain.clone(), images })
    }

    /// The inclusion of the domain into `M_n`.
    pub fn inclusion(domain: &Subalgebra) -> Self {
        Self::from_fn(domain, CMatrix::clone)
    }

    pub fn domain(&self) -> &Subalgebra {
        &self.domain
    }

    /// Values on the HS basis of the domain.
    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    /// `L(x)` for the component of `x` in the domain.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.domain.ambient_dim());
        for (c, img) in self.domain.coords(x).into_iter().zip(&self.images) {
            out.axpy(c, img);
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { domain: self.domain.clone(), images: self.images.iter().map(|m| m.scale_re(s)).collect() }
    }

    /// `self − other` on the domain of `self`.
    pub fn sub(&self, other: &LinearMap) -> Result<Self> {
        if !self.domain.same_span(&other.domain, NESTING_TOL) {
            return Err(Error::PreconditionFailed("maps have different domains"));
        }
        let images = self.domain.basis().iter().zip(&self.images).map(|(b, img)| img - &other.apply(b)).collect();
        Ok(Self { domain: self.domain.clone(), images })
    }

    /// Certified upper bound on `sup_{‖x‖≤1} ‖L(x)‖`.
    ///
    /// Minimum of `√n·σ_max` (HS operator norm of `L`, using `‖x‖_HS ≤ √n‖x‖`)
    /// and `Σ_k ‖a_k‖_1 ‖L(a_k)‖` (Hölder on the coordinates).
    pub fn norm_upper(&self) -> f64 {
        let k = self.images.len();
        if k == 0 {
            return 0.0;
        }
        let gram = CMatrix::from_fn(k, |i, j| self.images[i].hs_inner(&self.images[j]));
        let sigma = hermitian_eigen(&gram.hermitian_part()).max().max(0.0).sqrt();
        let hs_bound = (self.domain.ambient_dim() as f64).sqrt() * sigma;
        let holder: f64 =
            self.domain.basis().iter().zip(&self.images).map(|(b, img)| trace_norm(b) * img.op_norm()).sum();
        hs_bound.min(holder)
    }

    /// Sampled lower bound on the norm over the unit ball.
    pub fn norm_lower(&self, samples: usize, seed: u64) -> f64 {
        let mut best = self
            .domain
            .basis()
            .iter()
            .zip(&self.images)
            .map(|(b, img)| img.op_norm() / b.op_norm())
            .fold(0.0, f64::max);
        let mut r = rng(seed);
        for _ in 0..samples {
            let x = self.domain.random_contraction(&mut r);
            best = best.max(self.apply(&x).op_norm());
        }
        best
    }

    pub fn norm(&self, samples: usize, seed: u64) -> MapNorm {
        MapNorm { lower: self.norm_lower(samples, seed), upper: self.norm_upper() }
    }
}

/// A map `ψ: A → B` together with how far it is from being a unital
/// *-homomorphism that fixes `C`.
#[derive(Clone, Debug)]
pub struct HomomorphismMap {
    map: LinearMap,
    codomain: Subalgebra,
    mult_residual: f64,
    unital_residual: f64,
    fixes_c_residual: f64,
}

impl HomomorphismMap {
    /// Wraps `map` and measures its residuals; `c` is the subalgebra that
    /// should be fixed pointwise.
    pub fn new(map: LinearMap, codomain: &Subalgebra, c: &Subalgebra) -> Self {
        let basis = map.domain().basis();
        let images = map.images();
        let mut mult_residual = 0.0f64;
        for (x, px) in basis.iter().zip(images) {
            for (y, py) in basis.iter().zip(images) {
                mult_residual = mult_residual.max((&map.apply(&(x * y)) - &(px * py)).op_norm());
            }
        }
        let n = map.domain().ambient_dim();
        let unital_residual = (&map.apply(&CMatrix::identity(n)) - &CMatrix::identity(n)).op_norm();
        let fixes_c_residual = c.basis().iter().map(|x| (&map.apply(x) - x).op_norm()).fold(0.0, f64::max);
        Self { map, codomain: codomain.clone(), mult_residual, unital_residual, fixes_c_residual }
    }

    /// `id_A` viewed as a homomorphism `A → A`.
    pub fn inclusion(a: &Subalgebra, c: &Subalgebra) -> Self {
        Self::new(LinearMap::inclusion(a), a, c)
    }

    pub fn domain(&self) -> &Subalgebra {
        self.map.domain()
    }

    pub fn codomain(&self) -> &Subalgebra {
        &self.codomain
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.map.apply(x)
    }

    /// Max over domain-basis pairs of `‖ψ(xy) − ψ(x)ψ(y)‖`.
    pub fn mult_residual(&self) -> f64 {
        self.mult_residual
    }

    /// `‖ψ(I) − I‖`.
    pub fn unital_residual(&self) -> f64 {
        self.unital_residual
    }

    /// Max over the basis of `C` of `‖ψ(c) − c‖`.
    pub fn fixes_c_residual(&self) -> f64 {
        self.fixes_c_residual
    }

    /// Max distance from an image to the codomain span.
    pub fn codomain_residual(&self) -> f64 {
        self.map.images().iter().map(|m| self.codomain.hs_distance(m)).fold(0.0, f64::max)
    }

    pub fn is_homomorphism(&self) -> bool {
        self.mult_residual <= MULT_TOL && self.unital_residual <= UNITAL_TOL && self.fixes_c_residual <= FIXES_C_TOL
    }

    /// Certified bracket for `‖self − other‖` over the unit ball of the domain.
    pub fn distance(&self, other: &HomomorphismMap, samples: usize, seed: u64) -> Result<MapNorm> {
        Ok(self.map.sub(&other.map)?.norm(samples, seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::random_unitary_near_identity;

    #[test]
    fn trace_norm_of_matrix_unit_and_identity() {
        assert!((trace_norm(&CMatrix::unit(3, 0, 2)) - 1.0).abs() < 1e-12);
        assert!((trace_norm(&CMatrix::identity(4)) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn inclusion_has_norm_one() {
        for a in [Subalgebra::full(3), Subalgebra::diagonal(4), Subalgebra::tensor_left(2, 2)] {
            let nrm = LinearMap::inclusion(&a).norm(50, 1);
            assert!((nrm.lower - 1.0).abs() < 1e-9, "{}", nrm.lower);
            assert!(nrm.upper >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn upper_dominates_lower() {
        let a = Subalgebra::full(3);
        let u = random_unitary_near_identity(3, 0.3, 4).unwrap();
        let l = LinearMap::from_fn(&a, |x| x - &x.conjugate_by(&u));
        let nrm = l.norm(200, 2);
        assert!(nrm.lower <= nrm.upper + 1e-12);
        // ‖x − uxu*‖ ≤ 2‖u − I‖
        assert!(nrm.lower <= 2.0 * (&u - &CMatrix::identity(3)).op_norm() + 1e-12);
    }

    #[test]
    fn identity_is_a_homomorphism_fixing_scalars() {
        let a = Subalgebra::tensor_left(2, 2);
        let id = HomomorphismMap::inclusion(&a, &Subalgebra::scalars(4));
        assert!(id.is_homomorphism());
        assert!(id.mult_residual() < 1e-14);
        assert!(id.codomain_residual() < 1e-14);
        assert!(id.distance(&id, 10, 0).unwrap().upper < 1e-14);
    }

    #[test]
    fn scaled_map_is_not_a_homomorphism() {
        let a = Subalgebra::diagonal(2);
        let half = HomomorphismMap::new(LinearMap::inclusion(&a).scale_re(0.5), &a, &Subalgebra::scalars(2));
        assert!(!half.is_homomorphism());
        assert!((half.unital_residual() - 0.5).abs() < 1e-12);
        assert!((half.fixes_c_residual() - 0.5 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = LinearMap::inclusion(&Subalgebra::diagonal(2));
        let b = LinearMap::inclusion(&Subalgebra::full(2));
        assert!(matches!(a.sub(&b), Err(Error::PreconditionFailed(_))));
        assert!(matches!(
            LinearMap::from_images(&Subalgebra::diagonal(2), alloc::vec![CMatrix::identity(2)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
