//! Quasi-bases by the module-frame construction, unit-ball rescaling, the
//! Watatani index and the Pimsner–Popa inequality.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::CondExpectation;
use crate::error::{Error, Result};
use crate::mat::random::rng;
use crate::mat::{hermitian_eigen, CMatrix, C64};

/// Eigenvalue floor for the frame operator and its inner product.
pub const FRAME_FLOOR: f64 = 1e-10;

/// A family `{u_i}` in the source of `E` with `b = Σ u_i E(u_i* b)`.
#[derive(Clone, Debug)]
pub struct QuasiBasis {
    expectation: CondExpectation,
    elements: Vec<CMatrix>,
    index: CMatrix,
    unit_ball: bool,
}

fn index_of(elements: &[CMatrix], n: usize) -> CMatrix {
    let mut sum = CMatrix::zeros(n);
    for u in elements {
        sum = &sum + &(u * &u.adjoint());
    }
    sum
}

fn max_norm(elements: &[CMatrix]) -> f64 {
    elements.iter().map(CMatrix::op_norm).fold(0.0, f64::max)
}

impl QuasiBasis {
    /// Module-frame construction started from the source basis.
    pub fn compute(e: &CondExpectation) -> Result<Self> {
        Self::from_spanning_family(e, e.source().basis())
    }

    /// `u_k = S^{-1/2} m_k` for the frame operator `S(b) = Σ_k m_k E(m_k* b)`
    /// of a family spanning the source.
    ///
    /// `S` is positive for `⟨x, y⟩ = τ(E(x*y))`; with `G` the Gram matrix of
    /// that form in source coordinates, `S^{-1/2} = G^{-1/2} H^{-1/2} G^{1/2}`
    /// where `H = G^{1/2} S G^{-1/2}` is Hermitian.
    pub fn from_spanning_family(e: &CondExpectation, family: &[CMatrix]) -> Result<Self> {
        let source = e.source();
        let m = source.dim();
        let g_eig = hermitian_eigen(&e.gram());
        if g_eig.min() <= FRAME_FLOOR {
            return Err(Error::SingularFrame { min_eigenvalue: g_eig.min() });
        }
        let coords: Vec<Vec<C64>> = family.iter().map(|f| source.coords(f)).collect();
        let family: Vec<CMatrix> = coords.iter().map(|c| source.element(c)).collect();
        let adjoints: Vec<CMatrix> = family.iter().map(CMatrix::adjoint).collect();
        let mut s = CMatrix::zeros(m);
        for (l, b) in source.basis().iter().enumerate() {
            let mut sb = CMatrix::zeros(source.ambient_dim());
            for (f, fs) in family.iter().zip(&adjoints) {
                sb = &sb + &(f * &e.apply(&(fs * b)));
            }
            for (j, c) in source.coords(&sb).into_iter().enumerate() {
                s[(j, l)] = c;
            }
        }
        let g_half = g_eig.apply_fn(|x| C64::new(x.sqrt(), 0.0));
        let g_inv_half = g_eig.apply_fn(|x| C64::new(1.0 / x.sqrt(), 0.0));
        let h = &(&g_half * &s) * &g_inv_half;
        let h_eig = hermitian_eigen(&h);
        if h_eig.min() <= FRAME_FLOOR {
            return Err(Error::SingularFrame { min_eigenvalue: h_eig.min() });
        }
        let h_inv_half = h_eig.apply_fn(|x| C64::new(1.0 / x.sqrt(), 0.0));
        let r = &(&g_inv_half * &h_inv_half) * &g_half;
        let elements: Vec<CMatrix> = coords.iter().map(|c| source.element(&r.apply(c))).collect();
        Ok(Self::assemble(e, elements))
    }

    /// Wraps a caller-supplied family without checking reconstruction.
    pub fn from_elements(e: &CondExpectation, elements: Vec<CMatrix>) -> Result<Self> {
        let n = e.source().ambient_dim();
        for u in &elements {
            if u.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: u.dim() });
            }
        }
        Ok(Self::assemble(e, elements))
    }

    fn assemble(e: &CondExpectation, elements: Vec<CMatrix>) -> Self {
        let index = index_of(&elements, e.source().ambient_dim());
        let unit_ball = max_norm(&elements) <= 1.0 + 1e-9;
        Self { expectation: e.clone(), elements, index, unit_ball }
    }

    /// `K = ⌈max ‖u_i‖²⌉`, the number of copies needed in the unit-ball rescale.
    pub fn rescale_factor(&self) -> usize {
        let m = max_norm(&self.elements);
        ((m * m - 1e-9).ceil() as usize).max(1)
    }

    /// Replaces each `u_i` by `K` copies of `u_i / √K`, so every element has
    /// norm at most one. `K` is the ceiling of the largest squared norm.
    pub fn unit_ball_rescale(&self) -> Self {
        let k = self.rescale_factor();
        if k == 1 {
            let mut out = self.clone();
            out.unit_ball = true;
            return out;
        }
        let s = 1.0 / (k as f64).sqrt();
        let elements: Vec<CMatrix> = self
            .elements
            .iter()
            .flat_map(|u| core::iter::repeat_n(u.scale_re(s), k))
            .collect();
        let index = index_of(&elements, self.expectation.source().ambient_dim());
        Self { expectation: self.expectation.clone(), elements, index, unit_ball: true }
    }

    pub fn expectation(&self) -> &CondExpectation {
        &self.expectation
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Number of elements `N`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `Index E = Σ u_i u_i*`.
    pub fn index(&self) -> &CMatrix {
        &self.index
    }

    pub fn index_norm(&self) -> f64 {
        self.index.op_norm()
    }

    pub fn index_min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.index).min()
    }

    /// `max ‖[Index E, b]‖` over the source basis.
    pub fn index_centrality_residual(&self) -> f64 {
        self.expectation
            .source()
            .basis()
            .iter()
            .map(|b| self.index.commutator(b).op_norm())
            .fold(0.0, f64::max)
    }

    pub fn in_unit_ball(&self) -> bool {
        self.unit_ball
    }

    pub fn max_norm(&self) -> f64 {
        max_norm(&self.elements)
    }

    /// `Σ u_i E(u_i* b)`.
    pub fn reconstruct(&self, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(b.dim());
        for u in &self.elements {
            out = &out + &(u * &self.expectation.apply(&(&u.adjoint() * b)));
        }
        out
    }

    /// `max ‖Σ u_i E(u_i* b) − b‖` over the source basis.
    pub fn reconstruction_residual(&self) -> f64 {
        self.expectation
            .source()
            .basis()
            .iter()
            .map(|b| (&self.reconstruct(b) - b).op_norm())
            .fold(0.0, f64::max)
    }
}

/// Module-frame quasi-basis started from the source basis.
pub fn quasi_basis(e: &CondExpectation) -> Result<QuasiBasis> {
    QuasiBasis::compute(e)
}

pub fn watatani_index(qb: &QuasiBasis) -> CMatrix {
    qb.index().clone()
}

/// Smallest eigenvalue of `E(x*x) − c⁻¹ x*x`.
pub fn pimsner_popa_margin(e: &CondExpectation, c: f64, x: &CMatrix) -> f64 {
    let xx = &x.adjoint() * x;
    hermitian_eigen(&(&e.apply(&xx) - &xx.scale_re(1.0 / c))).min()
}

/// Minimum of [`pimsner_popa_margin`] over seeded random contractions in the
/// source, with `c = ‖Index E‖`.
pub fn pimsner_popa_audit(e: &CondExpectation, qb: &QuasiBasis, trials: usize, seed: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let c = qb.index_norm();
    let mut g = rng(seed);
    (0..trials)
        .map(|_| pimsner_popa_margin(e, c, &e.source().random_contraction(&mut g)))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Subalgebra;
    use crate::mat::random::random_unitary;
    use proptest::prelude::*;

    fn tp(d: &Subalgebra, a: &Subalgebra) -> CondExpectation {
        CondExpectation::trace_preserving(d, a).unwrap()
    }

    fn units(n: usize, scale: f64) -> Vec<CMatrix> {
        (0..n).flat_map(|i| (0..n).map(move |j| CMatrix::unit(n, i, j).scale_re(scale))).collect()
    }

    fn assert_scalar(m: &CMatrix, value: f64, tol: f64) {
        let expected = CMatrix::identity(m.dim()).scale_re(value);
        assert!((m - &expected).max_abs() <= tol, "expected {value}·I, got {m:?}");
    }

    #[test]
    fn scalars_in_m2_index_four() {
        let e = tp(&Subalgebra::full(2), &Subalgebra::scalars(2));
        let qb = quasi_basis(&e).unwrap();
        assert!(qb.reconstruction_residual() <= 1e-8);
        assert_scalar(qb.index(), 4.0, 1e-8);
        // hand-built oracle {√2 e_ij}
        let oracle = QuasiBasis::from_elements(&e, units(2, 2f64.sqrt())).unwrap();
        assert!(oracle.reconstruction_residual() <= 1e-12);
        assert!((oracle.index() - qb.index()).max_abs() <= 1e-8);
    }

    #[test]
    fn diagonal_index_is_n() {
        for n in 2..5 {
            let e = tp(&Subalgebra::full(n), &Subalgebra::diagonal(n));
            let qb = quasi_basis(&e).unwrap();
            assert!(qb.reconstruction_residual() <= 1e-8);
            assert_scalar(qb.index(), n as f64, 1e-8);
            let oracle = QuasiBasis::from_elements(&e, units(n, 1.0)).unwrap();
            assert!(oracle.reconstruction_residual() <= 1e-12);
            assert_scalar(oracle.index(), n as f64, 1e-12);
        }
    }

    #[test]
    fn identity_expectation_has_index_one() {
        let a = Subalgebra::tensor_left(2, 2);
        let e = CondExpectation::identity(&a);
        let qb = quasi_basis(&e).unwrap();
        assert!(qb.reconstruction_residual() <= 1e-8);
        assert_scalar(qb.index(), 1.0, 1e-8);
        let single = QuasiBasis::from_elements(&e, alloc::vec![CMatrix::identity(4)]).unwrap();
        assert!(single.reconstruction_residual() <= 1e-14);
        assert_scalar(single.index(), 1.0, 1e-14);
    }

    #[test]
    fn rescale_keeps_unit_ball_input() {
        let e = tp(&Subalgebra::full(3), &Subalgebra::diagonal(3));
        let qb = QuasiBasis::from_elements(&e, units(3, 1.0)).unwrap();
        assert_eq!(qb.rescale_factor(), 1);
        let r = qb.unit_ball_rescale();
        assert_eq!(r.elements(), qb.elements());
        assert!(r.in_unit_ball());
    }

    #[test]
    fn rescale_splits_scaled_matrix_units() {
        let e = tp(&Subalgebra::full(2), &Subalgebra::scalars(2));
        let qb = QuasiBasis::from_elements(&e, units(2, 2f64.sqrt())).unwrap();
        assert!(!qb.in_unit_ball());
        assert_eq!(qb.rescale_factor(), 2);
        let r = qb.unit_ball_rescale();
        assert_eq!(r.len(), 8);
        for (k, v) in r.elements().iter().enumerate() {
            let (i, j) = ((k / 2) / 2, (k / 2) % 2);
            assert!((v - &CMatrix::unit(2, i, j)).max_abs() < 1e-15);
        }
        assert_scalar(r.index(), 4.0, 1e-12);
        assert!(r.reconstruction_residual() <= 1e-12);
    }

    #[test]
    fn rescale_of_twice_identity_uses_four_copies() {
        // {2I} is not a quasi-basis for the identity map (it reconstructs 4b);
        // rescaling must preserve whatever operator the family defines.
        let a = Subalgebra::full(2);
        let e = CondExpectation::identity(&a);
        let qb = QuasiBasis::from_elements(&e, alloc::vec![CMatrix::identity(2).scale_re(2.0)]).unwrap();
        assert_eq!(qb.rescale_factor(), 4);
        let r = qb.unit_ball_rescale();
        assert_eq!(r.len(), 4);
        for v in r.elements() {
            assert!((v - &CMatrix::identity(2)).max_abs() < 1e-15);
        }
        for b in a.basis() {
            assert!((&r.reconstruct(b) - &qb.reconstruct(b)).max_abs() < 1e-12);
            assert!((&r.reconstruct(b) - &b.scale_re(4.0)).max_abs() < 1e-12);
        }
        assert!((r.index() - qb.index()).max_abs() < 1e-12);
    }

    #[test]
    fn degenerate_expectation_has_singular_frame() {
        let d = Subalgebra::diagonal(2);
        let e = CondExpectation::from_fn(&d, &Subalgebra::scalars(2), |x| CMatrix::identity(2).scale(x[(0, 0)]))
            .unwrap();
        assert!(matches!(quasi_basis(&e), Err(Error::SingularFrame { .. })));
    }

    #[test]
    fn pimsner_popa_examples() {
        let a = Subalgebra::full(2);
        let id = CondExpectation::identity(&a);
        let x = a.random_element(&mut rng(1));
        assert!(pimsner_popa_margin(&id, 1.0, &x).abs() < 1e-12);

        let e = tp(&Subalgebra::full(2), &Subalgebra::scalars(2));
        let margin = pimsner_popa_margin(&e, 4.0, &CMatrix::unit(2, 0, 1));
        assert!((margin - 0.25).abs() < 1e-14);

        let e = tp(&Subalgebra::full(2), &Subalgebra::diagonal(2));
        let qb = quasi_basis(&e).unwrap();
        assert!(pimsner_popa_audit(&e, &qb, 500, 3) >= -1e-9);
    }

    #[test]
    fn index_is_central_and_at_least_one() {
        let d = Subalgebra::block_diagonal(&[2, 1]);
        let e = tp(&d, &Subalgebra::diagonal(3));
        let qb = quasi_basis(&e).unwrap();
        assert!(qb.reconstruction_residual() <= 1e-8);
        assert!(qb.index_min_eigenvalue() >= 1.0 - 1e-8);
        assert!(qb.index_centrality_residual() <= 1e-8);
        // index is 2 on the 2×2 block and 1 on the corner
        assert!((qb.index() - &CMatrix::from_real_diag(&[2.0, 2.0, 1.0])).max_abs() <= 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn index_independent_of_spanning_family(seed in any::<u64>(), k in 2usize..4) {
            let d = Subalgebra::full(k);
            let a = Subalgebra::diagonal(k).conjugate(&random_unitary(k, &mut rng(seed)));
            let e = tp(&d, &a);
            let qb = quasi_basis(&e).unwrap();
            // an overcomplete family: random combinations plus the basis
            let mut g = rng(seed ^ 0x5eed);
            let mut family: Vec<CMatrix> = (0..d.dim() + 3).map(|_| d.random_element(&mut g)).collect();
            family.extend(d.basis().iter().cloned());
            let other = QuasiBasis::from_spanning_family(&e, &family).unwrap();
            prop_assert!(other.reconstruction_residual() <= 1e-8);
            prop_assert!((other.index() - qb.index()).op_norm() <= 1e-8);
            let r = qb.unit_ball_rescale();
            prop_assert!(r.max_norm() <= 1.0 + 1e-9);
            prop_assert!(r.reconstruction_residual() <= 1e-8);
            prop_assert!((r.index() - qb.index()).op_norm() <= 1e-8);
            prop_assert!(qb.index_min_eigenvalue() >= 1.0 - 1e-8);
        }
    }
}
