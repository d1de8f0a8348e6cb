//! Conditional expectations between subalgebras of `M_n`, quasi-bases and
//! the Watatani index, and Izumi's formula for compatible expectations onto
//! intermediate subalgebras.

mod izumi;
mod quasi;

use alloc::vec::Vec;

use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::error::{Error, Result};
use crate::mat::random::rng;
use crate::mat::{hermitian_eigen, CMatrix, C64, ZERO};

pub use izumi::{
    compatibility_residual, izumi, izumi_expectation, uniqueness_check, COMPATIBILITY_TOL,
};
pub use quasi::{pimsner_popa_audit, pimsner_popa_margin, quasi_basis, watatani_index, QuasiBasis, FRAME_FLOOR};

/// Smallest admissible eigenvalue of the faithfulness form.
pub const FAITHFUL_FLOOR: f64 = 1e-10;
/// Relative tolerance for an image to count as lying in the target.
const RANGE_TOL: f64 = 1e-8;

/// A conditional expectation `E: B → A` with `A ⊆ B ⊆ M_n`.
///
/// Stored through output functionals: `E(x) = Σ_k ⟨φ_k, x⟩ t_k` where `t_k` is
/// the target basis and each `φ_k` lies in the source span. Components of
/// `x` orthogonal to the source are ignored.
#[derive(Clone, Debug)]
pub struct CondExpectation {
    source: Subalgebra,
    target: Subalgebra,
    functionals: Vec<CMatrix>,
}

/// Residuals of the defining properties; see [`CondExpectation::audit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectationAudit {
    /// `max ‖E(a) − a‖` over the target basis.
    pub idempotent: f64,
    /// `‖E(I) − I‖`.
    pub unital: f64,
    /// `max ‖E(ax) − aE(x)‖, ‖E(xa) − E(x)a‖` over target × source bases.
    pub bimodule: f64,
    /// Smallest eigenvalue of `E(x*x)` over the sampled contractions.
    pub positivity: f64,
    /// Smallest eigenvalue of the form `(x, y) ↦ τ(E(x*y))` on the source.
    pub faithful: f64,
}

impl ExpectationAudit {
    pub fn is_valid(&self) -> bool {
        self.idempotent <= 1e-9
            && self.unital <= 1e-9
            && self.bimodule <= 1e-9
            && self.positivity >= -1e-9
            && self.faithful >= FAITHFUL_FLOOR
    }
}

fn check_nested(outer: &Subalgebra, inner: &Subalgebra) -> Result<()> {
    if outer.ambient_dim() != inner.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: outer.ambient_dim(), actual: inner.ambient_dim() });
    }
    let residual = outer.containment_residual(inner);
    if residual > NESTING_TOL {
        return Err(Error::NotNested { residual });
    }
    Ok(())
}

impl CondExpectation {
    /// Hilbert–Schmidt orthogonal projection of `d` onto `a`; preserves the
    /// normalized trace.
    pub fn trace_preserving(d: &Subalgebra, a: &Subalgebra) -> Result<Self> {
        check_nested(d, a)?;
        Ok(Self { source: d.clone(), target: a.clone(), functionals: a.basis().to_vec() })
    }

    pub fn identity(alg: &Subalgebra) -> Self {
        Self { source: alg.clone(), target: alg.clone(), functionals: alg.basis().to_vec() }
    }

    /// The linear map agreeing with `f` on the source basis. `f` must take
    /// values in the target.
    pub fn from_fn(
        source: &Subalgebra,
        target: &Subalgebra,
        f: impl Fn(&CMatrix) -> CMatrix,
    ) -> Result<Self> {
        check_nested(source, target)?;
        let images: Vec<CMatrix> = source.basis().iter().map(&f).collect();
        Self::from_images(source, target, &images)
    }

    /// `images[i]` is the value on the `i`-th source basis element.
    pub(crate) fn from_images(source: &Subalgebra, target: &Subalgebra, images: &[CMatrix]) -> Result<Self> {
        let mut residual = 0.0f64;
        for y in images {
            residual = residual.max(target.hs_distance(y) / y.hs_norm().max(1.0));
        }
        if residual > RANGE_TOL {
            return Err(Error::NotInAlgebra { residual });
        }
        // φ_k = Σ_i conj(⟨t_k, f(b_i)⟩) b_i
        let functionals = target
            .basis()
            .iter()
            .map(|t| {
                let mut phi = CMatrix::zeros(source.ambient_dim());
                for (b, y) in source.basis().iter().zip(images) {
                    let c = t.hs_inner(y);
                    if c != ZERO {
                        phi.axpy(c.conj(), b);
                    }
                }
                phi
            })
            .collect();
        Ok(Self { source: source.clone(), target: target.clone(), functionals })
    }

    /// Inverse of [`coordinate_matrix`](Self::coordinate_matrix).
    pub fn from_coordinate_matrix(source: &Subalgebra, target: &Subalgebra, matrix: &CMatrix) -> Result<Self> {
        if matrix.dim() != source.dim() {
            return Err(Error::DimensionMismatch { expected: source.dim(), actual: matrix.dim() });
        }
        check_nested(source, target)?;
        let m = source.dim();
        let images: Vec<CMatrix> = (0..m)
            .map(|i| source.element(&(0..m).map(|j| matrix[(j, i)]).collect::<Vec<_>>()))
            .collect();
        Self::from_images(source, target, &images)
    }

    #[inline]
    pub fn source(&self) -> &Subalgebra {
        &self.source
    }

    #[inline]
    pub fn target(&self) -> &Subalgebra {
        &self.target
    }

    /// Output functionals `φ_k`, one per target basis element.
    pub fn functionals(&self) -> &[CMatrix] {
        &self.functionals
    }

    /// Coordinates of `E(x)` in the target basis.
    pub fn target_coords(&self, x: &CMatrix) -> Vec<C64> {
        self.functionals.iter().map(|f| f.hs_inner(x)).collect()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.target.element(&self.target_coords(x))
    }

    /// The map as a square matrix on source coordinates: column `i` holds the
    /// source coordinates of `E(b_i)`.
    pub fn coordinate_matrix(&self) -> CMatrix {
        let m = self.source.dim();
        let mut out = CMatrix::zeros(m);
        for (i, b) in self.source.basis().iter().enumerate() {
            let coords = self.source.coords(&self.apply(b));
            for (j, c) in coords.into_iter().enumerate() {
                out[(j, i)] = c;
            }
        }
        out
    }

    /// Restriction to an intermediate algebra `target ⊆ a ⊆ source`.
    pub fn restrict(&self, a: &Subalgebra) -> Result<Self> {
        let residual = self.source.containment_residual(a).max(a.containment_residual(&self.target));
        if residual > NESTING_TOL {
            return Err(Error::NotIntermediate { residual });
        }
        let functionals = self.functionals.iter().map(|f| a.project(f)).collect();
        Ok(Self { source: a.clone(), target: self.target.clone(), functionals })
    }

    /// `self ∘ inner`, defined on `inner.source()`.
    pub fn compose(&self, inner: &CondExpectation) -> Result<Self> {
        check_nested(&self.source, &inner.target)?;
        Self::from_fn(&inner.source, &self.target, |x| self.apply(&inner.apply(x)))
    }

    /// `max ‖E₁(b) − E₂(b)‖` over the source basis of `self`.
    pub fn distance(&self, other: &CondExpectation) -> f64 {
        self.source
            .basis()
            .iter()
            .map(|b| (&self.apply(b) - &other.apply(b)).op_norm())
            .fold(0.0, f64::max)
    }

    /// `G_{ij} = τ(E(b_i* b_j))` on the source basis, `τ` the normalized trace.
    pub fn gram(&self) -> CMatrix {
        let basis = self.source.basis();
        let m = basis.len();
        let mut g = CMatrix::zeros(m);
        for i in 0..m {
            let bi = basis[i].adjoint();
            for j in i..m {
                let v = self.apply(&(&bi * &basis[j])).normalized_trace();
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        g
    }

    pub fn faithful_min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.gram()).min()
    }

    /// Checks the defining properties, with positivity sampled on `samples`
    /// seeded random contractions.
    pub fn audit(&self, samples: usize, seed: u64) -> ExpectationAudit {
        let n = self.source.ambient_dim();
        let idempotent = self
            .target
            .basis()
            .iter()
            .map(|t| (&self.apply(t) - t).op_norm())
            .fold(0.0, f64::max);
        let id = CMatrix::identity(n);
        let unital = (&self.apply(&id) - &id).op_norm();
        let images: Vec<CMatrix> = self.source.basis().iter().map(|b| self.apply(b)).collect();
        let mut bimodule = 0.0f64;
        for t in self.target.basis() {
            for (b, eb) in self.source.basis().iter().zip(&images) {
                let left = &self.apply(&(t * b)) - &(t * eb);
                let right = &self.apply(&(b * t)) - &(eb * t);
                bimodule = bimodule.max(left.op_norm()).max(right.op_norm());
            }
        }
        let mut g = rng(seed);
        let mut positivity = f64::INFINITY;
        for _ in 0..samples {
            let x = self.source.random_contraction(&mut g);
            positivity = positivity.min(hermitian_eigen(&self.apply(&(&x.adjoint() * &x))).min());
        }
        if samples == 0 {
            positivity = 0.0;
        }
        ExpectationAudit { idempotent, unital, bimodule, positivity, faithful: self.faithful_min_eigenvalue() }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::random_unitary;

    #[test]
    fn diagonal_expectation_zeroes_off_diagonal() {
        let e = CondExpectation::trace_preserving(&Subalgebra::full(2), &Subalgebra::diagonal(2)).unwrap();
        let x = CMatrix::from_fn(2, |i, j| C64::new((i * 2 + j) as f64 + 1.0, i as f64 - j as f64));
        let expected = CMatrix::from_diag(&[x[(0, 0)], x[(1, 1)]]);
        assert!((&e.apply(&x) - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn scalar_expectation_is_normalized_trace() {
        for n in 2..5 {
            let e = CondExpectation::trace_preserving(&Subalgebra::full(n), &Subalgebra::scalars(n)).unwrap();
            let x = random_unitary(n, &mut rng(n as u64));
            let expected = CMatrix::identity(n).scale(x.normalized_trace());
            assert!((&e.apply(&x) - &expected).max_abs() < 1e-13);
        }
    }

    #[test]
    fn expectation_onto_itself_is_identity() {
        let a = Subalgebra::tensor_left(2, 2);
        let e = CondExpectation::trace_preserving(&a, &a).unwrap();
        let x = a.random_element(&mut rng(4));
        assert!((&e.apply(&x) - &x).max_abs() < 1e-13);
        assert!(e.distance(&CondExpectation::identity(&a)) < 1e-13);
    }

    #[test]
    fn trace_preserving_rejects_non_nested() {
        let flip = Subalgebra::generate(2, &[CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])]).unwrap();
        assert!(matches!(
            CondExpectation::trace_preserving(&Subalgebra::diagonal(2), &flip),
            Err(Error::NotNested { .. })
        ));
    }

    #[test]
    fn trace_preserving_passes_audit_and_preserves_trace() {
        let cases = [
            (Subalgebra::full(3), Subalgebra::diagonal(3)),
            (Subalgebra::full(4), Subalgebra::tensor_left(2, 2)),
            (Subalgebra::block_diagonal(&[2, 1]), Subalgebra::diagonal(3)),
        ];
        for (d, a) in &cases {
            let e = CondExpectation::trace_preserving(d, a).unwrap();
            let audit = e.audit(200, 1);
            assert!(audit.is_valid(), "{audit:?}");
            let x = d.random_element(&mut rng(2));
            assert!((e.apply(&x).normalized_trace() - x.normalized_trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn coordinate_matrix_round_trip() {
        let e = CondExpectation::trace_preserving(&Subalgebra::full(3), &Subalgebra::diagonal(3)).unwrap();
        let back = CondExpectation::from_coordinate_matrix(e.source(), e.target(), &e.coordinate_matrix()).unwrap();
        assert!(e.distance(&back) < 1e-13);
    }

    #[test]
    fn from_fn_rejects_values_outside_target() {
        let d = Subalgebra::full(2);
        let a = Subalgebra::diagonal(2);
        assert!(matches!(CondExpectation::from_fn(&d, &a, |x| x.clone()), Err(Error::NotInAlgebra { .. })));
    }

    #[test]
    fn nested_projections_restrict_exactly() {
        let d = Subalgebra::full(4);
        let a = Subalgebra::tensor_left(2, 2);
        let c = Subalgebra::scalars(4);
        let e_cd = CondExpectation::trace_preserving(&d, &c).unwrap();
        let e_ca = CondExpectation::trace_preserving(&a, &c).unwrap();
        assert!(e_cd.restrict(&a).unwrap().distance(&e_ca) <= 1e-10);
        let e_ad = CondExpectation::trace_preserving(&d, &a).unwrap();
        assert!(e_ca.compose(&e_ad).unwrap().distance(&e_cd) <= 1e-10);
    }

    #[test]
    fn degenerate_map_fails_faithfulness() {
        // x ↦ x_{11} I is a unital positive projection onto the scalars, but
        // it kills e_22 and so is not faithful
        let d = Subalgebra::diagonal(2);
        let e = CondExpectation::from_fn(&d, &Subalgebra::scalars(2), |x| CMatrix::identity(2).scale(x[(0, 0)]))
            .unwrap();
        let audit = e.audit(20, 0);
        assert!(audit.faithful < FAITHFUL_FLOOR);
        assert!(!audit.is_valid());
    }
}
