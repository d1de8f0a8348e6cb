//! Unital *-subalgebras of `M_n` stored as Hilbert–Schmidt orthonormal bases.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::mat::linalg::{null_space, ColMat};
use crate::mat::random::complex_normal;
use crate::mat::{hermitian_eigen, CMatrix, C64, ZERO};

/// Relative residual below which a candidate is considered already in a span.
pub const SPAN_CUTOFF: f64 = 1e-10;
/// Relative singular-value cutoff for commutant null spaces.
pub const NULL_CUTOFF: f64 = 1e-9;
/// Containment tolerance used when checking nesting preconditions.
pub const NESTING_TOL: f64 = 1e-8;

/// A unital *-subalgebra of `M_n`.
///
/// The span of `basis` is closed under adjoints and products and contains
/// the identity; the basis is orthonormal for `⟨x, y⟩ = Tr(x* y)`.
#[derive(Clone, Debug)]
pub struct Subalgebra {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
}

/// Residuals of the three closure invariants, in Hilbert–Schmidt norm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClosureResiduals {
    pub adjoint: f64,
    pub product: f64,
    pub unit: f64,
}

impl ClosureResiduals {
    pub fn max(&self) -> f64 {
        self.adjoint.max(self.product).max(self.unit)
    }
}

/// Incremental Gram–Schmidt (two passes) with a relative cutoff.
#[derive(Clone, Debug)]
pub(crate) struct SpanBuilder {
    n: usize,
    basis: Vec<CMatrix>,
}

impl SpanBuilder {
    pub(crate) fn new(n: usize) -> Self {
        Self { n, basis: Vec::new() }
    }

    pub(crate) fn len(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn is_full(&self) -> bool {
        self.basis.len() >= self.n * self.n
    }

    /// Adds the component of `m` orthogonal to the current span, if it is
    /// not negligible; returns whether the span grew.
    pub(crate) fn try_push(&mut self, m: &CMatrix) -> bool {
        let norm0 = m.hs_norm();
        if norm0 <= 1e-300 || self.is_full() {
            return false;
        }
        let mut r = m.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.hs_inner(&r);
                r.axpy(-c, b);
            }
        }
        let rn = r.hs_norm();
        if rn <= SPAN_CUTOFF * norm0 {
            return false;
        }
        self.basis.push(r.scale_re(1.0 / rn));
        true
    }

    pub(crate) fn into_basis(self) -> Vec<CMatrix> {
        self.basis
    }
}

/// Generalized Pauli (clock-and-shift) unitary `X^a Z^b` in `M_n`.
pub fn weyl_unitary(n: usize, a: usize, b: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| {
        if i == (j + a) % n {
            let angle = core::f64::consts::TAU * ((b * j) % n) as f64 / n as f64;
            C64::new(angle.cos(), angle.sin())
        } else {
            ZERO
        }
    })
}

impl Subalgebra {
    /// Validating constructor: checks orthonormality and the closure invariants.
    pub fn from_orthonormal_basis(ambient_dim: usize, basis: Vec<CMatrix>) -> Result<Self> {
        for b in &basis {
            if b.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, actual: b.dim() });
            }
        }
        let mut gram_err = 0.0f64;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                gram_err = gram_err.max((a.hs_inner(b) - C64::new(target, 0.0)).norm());
            }
        }
        if gram_err > 1e-9 {
            return Err(Error::NotAnAlgebra { residual: gram_err });
        }
        let alg = Self { ambient_dim, basis };
        let res = alg.closure_residuals().max();
        if res > 1e-9 {
            return Err(Error::NotAnAlgebra { residual: res });
        }
        Ok(alg)
    }

    pub(crate) fn from_basis_unchecked(ambient_dim: usize, basis: Vec<CMatrix>) -> Self {
        Self { ambient_dim, basis }
    }

    /// `ℂ I`.
    pub fn scalars(n: usize) -> Self {
        Self::from_basis_unchecked(n, alloc::vec![CMatrix::identity(n).scale_re(1.0 / (n as f64).sqrt())])
    }

    /// All of `M_n`, with the normalized clock-and-shift basis `X^a Z^b / √n`.
    pub fn full(n: usize) -> Self {
        let s = 1.0 / (n as f64).sqrt();
        let basis = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| weyl_unitary(n, a, b).scale_re(s))
            .collect();
        Self::from_basis_unchecked(n, basis)
    }

    /// Diagonal matrices.
    pub fn diagonal(n: usize) -> Self {
        Self::from_basis_unchecked(n, (0..n).map(|i| CMatrix::unit(n, i, i)).collect())
    }

    /// Block-diagonal `M_{s_1} ⊕ … ⊕ M_{s_r}` with the given block sizes.
    pub fn block_diagonal(sizes: &[usize]) -> Self {
        let n: usize = sizes.iter().sum();
        let mut basis = Vec::new();
        let mut offset = 0;
        for &s in sizes {
            for i in 0..s {
                for j in 0..s {
                    basis.push(CMatrix::unit(n, offset + i, offset + j));
                }
            }
            offset += s;
        }
        Self::from_basis_unchecked(n, basis)
    }

    /// `A ⊗ B` inside `M_{nm}`.
    pub fn tensor(a: &Subalgebra, b: &Subalgebra) -> Self {
        let basis = a.basis.iter().flat_map(|x| b.basis.iter().map(move |y| x.kron(y))).collect();
        Self::from_basis_unchecked(a.ambient_dim * b.ambient_dim, basis)
    }

    /// `M_k ⊗ I_m`.
    pub fn tensor_left(k: usize, m: usize) -> Self {
        Self::tensor(&Self::full(k), &Self::scalars(m))
    }

    /// `I_k ⊗ M_m`.
    pub fn tensor_right(k: usize, m: usize) -> Self {
        Self::tensor(&Self::scalars(k), &Self::full(m))
    }

    /// Smallest unital *-subalgebra containing `generators`.
    pub fn generate(ambient_dim: usize, generators: &[CMatrix]) -> Result<Self> {
        for g in generators {
            if g.dim() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, actual: g.dim() });
            }
        }
        let mut span = SpanBuilder::new(ambient_dim);
        span.try_push(&CMatrix::identity(ambient_dim));
        for g in generators {
            span.try_push(g);
            span.try_push(&g.adjoint());
        }
        // words in a *-closed generating span: keep multiplying new elements
        // on the left until nothing new appears
        let seeds = span.basis.clone();
        let mut next = 0;
        while next < span.len() && !span.is_full() {
            let b = span.basis[next].clone();
            next += 1;
            for g in &seeds {
                span.try_push(&(g * &b));
                if span.is_full() {
                    break;
                }
            }
        }
        Ok(Self::from_basis_unchecked(ambient_dim, span.into_basis()))
    }

    /// `C*(self, other)`.
    pub fn generated_by(&self, other: &Subalgebra) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, actual: other.ambient_dim });
        }
        let gens: Vec<CMatrix> = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::generate(self.ambient_dim, &gens)
    }

    #[inline]
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the span.
    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Coordinates `⟨b_k, x⟩` of the orthogonal projection of `x`.
    pub fn coords(&self, x: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| b.hs_inner(x)).collect()
    }

    pub fn element(&self, coords: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.ambient_dim);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != ZERO {
                out.axpy(*c, b);
            }
        }
        out
    }

    /// Hilbert–Schmidt orthogonal projection onto the span.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        self.element(&self.coords(x))
    }

    /// `‖x − P(x)‖_HS`.
    pub fn hs_distance(&self, x: &CMatrix) -> f64 {
        (x - &self.project(x)).hs_norm()
    }

    fn check_dim(&self, x: &CMatrix) -> Result<()> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, actual: x.dim() });
        }
        Ok(())
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.hs_distance(x) <= tol)
    }

    /// Largest distance from a basis element of `other` to this span.
    pub fn containment_residual(&self, other: &Subalgebra) -> f64 {
        other.basis.iter().map(|b| self.hs_distance(b)).fold(0.0, f64::max)
    }

    /// `other ⊆ self` within `tol`.
    pub fn contains_algebra(&self, other: &Subalgebra, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim && self.containment_residual(other) <= tol
    }

    /// Mutual containment within `tol`.
    pub fn same_span(&self, other: &Subalgebra, tol: f64) -> bool {
        self.dim() == other.dim() && self.contains_algebra(other, tol) && other.contains_algebra(self, tol)
    }

    pub fn closure_residuals(&self) -> ClosureResiduals {
        let adjoint = self.basis.iter().map(|b| self.hs_distance(&b.adjoint())).fold(0.0, f64::max);
        let mut product = 0.0f64;
        for a in &self.basis {
            for b in &self.basis {
                product = product.max(self.hs_distance(&(a * b)));
            }
        }
        let unit = self.hs_distance(&CMatrix::identity(self.ambient_dim));
        ClosureResiduals { adjoint, product, unit }
    }

    /// `u A u*`; the basis stays orthonormal because conjugation is an HS isometry.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        Self::from_basis_unchecked(self.ambient_dim, self.basis.iter().map(|b| b.conjugate_by(u)).collect())
    }

    /// `{x ∈ d : x c = c x for all c ∈ c}`.
    pub fn relative_commutant(c: &Subalgebra, d: &Subalgebra) -> Result<Self> {
        if c.ambient_dim != d.ambient_dim {
            return Err(Error::DimensionMismatch { expected: d.ambient_dim, actual: c.ambient_dim });
        }
        let residual = d.containment_residual(c);
        if residual > NESTING_TOL {
            return Err(Error::NotNested { residual });
        }
        let n = d.ambient_dim;
        // scalar multiples of the identity impose nothing
        let constraints: Vec<&CMatrix> =
            c.basis.iter().filter(|x| !is_scalar_multiple_of_identity(x)).collect();
        if constraints.is_empty() {
            return Ok(d.clone());
        }
        let rows = constraints.len() * n * n;
        let cols = d
            .basis
            .iter()
            .map(|dk| {
                let mut col = Vec::with_capacity(rows);
                for ci in &constraints {
                    col.extend_from_slice(dk.commutator(ci).as_slice());
                }
                col
            })
            .collect();
        let kernel = null_space(&ColMat::from_columns(rows, cols), NULL_CUTOFF);
        let basis = kernel.iter().map(|y| d.element(y)).collect();
        Ok(Self::from_basis_unchecked(n, basis))
    }

    pub fn center(&self) -> Self {
        Self::relative_commutant(self, self).expect("an algebra is nested in itself")
    }

    /// A finite-dimensional C*-algebra is simple iff its centre is `ℂ I`.
    pub fn is_simple(&self) -> bool {
        self.center().dim() == 1
    }

    /// Gaussian combination of the basis.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let coords: Vec<C64> = self.basis.iter().map(|_| complex_normal(rng)).collect();
        self.element(&coords)
    }

    pub fn random_hermitian<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        self.random_element(rng).hermitian_part()
    }

    /// `exp(iH)` for a random Hermitian `H` in the algebra.
    pub fn random_unitary<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        let h = self.random_hermitian(rng);
        hermitian_eigen(&h).apply_fn(|x| C64::new(0.0, x).exp())
    }

    /// Random element of operator norm one.
    pub fn random_contraction<R: Rng + ?Sized>(&self, rng: &mut R) -> CMatrix {
        loop {
            let x = self.random_element(rng);
            let nrm = x.op_norm();
            if nrm > 1e-12 {
                return x.scale_re(1.0 / nrm);
            }
        }
    }
}

fn is_scalar_multiple_of_identity(x: &CMatrix) -> bool {
    let n = x.dim();
    let t = x.normalized_trace();
    let mut dev = x.clone();
    for i in 0..n {
        dev[(i, i)] -= t;
    }
    dev.hs_norm() <= 1e-14 * x.hs_norm().max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::rng;
    use proptest::prelude::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn unital_closure_of_nothing_is_scalars() {
        let a = Subalgebra::generate(2, &[]).unwrap();
        assert_eq!(a.dim(), 1);
        let expected = CMatrix::identity(2).scale_re(1.0 / 2f64.sqrt());
        assert!((&a.basis()[0] - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn off_diagonal_unit_generates_m2() {
        assert_eq!(Subalgebra::generate(2, &[CMatrix::unit(2, 0, 1)]).unwrap().dim(), 4);
    }

    #[test]
    fn diagonal_projection_generates_diagonal() {
        let a = Subalgebra::generate(2, &[CMatrix::from_real_diag(&[1.0, 0.0])]).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.same_span(&Subalgebra::diagonal(2), 1e-9));
    }

    #[test]
    fn generate_rejects_wrong_dimension() {
        assert!(matches!(
            Subalgebra::generate(2, &[CMatrix::identity(3)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn membership() {
        let diag = Subalgebra::diagonal(2);
        let x = CMatrix::from_diag(&[C64::new(3.0, 0.0), C64::new(0.0, 5.0)]);
        assert!(diag.contains(&x, 1e-9).unwrap());
        assert!(!diag.contains(&CMatrix::unit(2, 0, 1), 1e-9).unwrap());
        let s = Subalgebra::scalars(2);
        assert!(s.contains(&CMatrix::identity(2).scale_re(1.0 + 1e-12), 1e-9).unwrap());
        assert!(matches!(s.contains(&CMatrix::identity(3), 1e-9), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn relative_commutant_examples() {
        let m2 = Subalgebra::full(2);
        let rc = Subalgebra::relative_commutant(&Subalgebra::scalars(2), &m2).unwrap();
        assert!(rc.same_span(&m2, 1e-9));
        let rc = Subalgebra::relative_commutant(&m2, &m2).unwrap();
        assert!(rc.same_span(&Subalgebra::scalars(2), 1e-9));
        let rc = Subalgebra::relative_commutant(&Subalgebra::tensor_left(2, 2), &Subalgebra::full(4)).unwrap();
        assert_eq!(rc.dim(), 4);
        assert!(rc.same_span(&Subalgebra::tensor_right(2, 2), 1e-9));
    }

    #[test]
    fn relative_commutant_requires_nesting() {
        let diag = Subalgebra::diagonal(2);
        let flip = Subalgebra::generate(2, &[pauli_x()]).unwrap();
        assert!(matches!(Subalgebra::relative_commutant(&flip, &diag), Err(Error::NotNested { .. })));
    }

    #[test]
    fn centers() {
        assert!(Subalgebra::full(3).center().same_span(&Subalgebra::scalars(3), 1e-9));
        let diag = Subalgebra::diagonal(2);
        assert!(diag.center().same_span(&diag, 1e-9));
        let blocks = Subalgebra::block_diagonal(&[2, 2]);
        let z = blocks.center();
        assert_eq!(z.dim(), 2);
        let p = CMatrix::from_real_diag(&[1.0, 1.0, 0.0, 0.0]);
        assert!(z.contains(&p, 1e-9).unwrap());
    }

    #[test]
    fn simplicity() {
        assert!(Subalgebra::full(4).is_simple());
        assert!(!Subalgebra::diagonal(2).is_simple());
        assert!(Subalgebra::tensor_left(2, 2).is_simple());
    }

    #[test]
    fn generated_by_examples() {
        let m2 = Subalgebra::full(2);
        assert!(Subalgebra::scalars(2).generated_by(&m2).unwrap().same_span(&m2, 1e-9));
        let flip = Subalgebra::generate(2, &[pauli_x()]).unwrap();
        assert_eq!(flip.dim(), 2);
        assert!(Subalgebra::diagonal(2).generated_by(&flip).unwrap().same_span(&m2, 1e-9));
        let a = Subalgebra::tensor_left(2, 2);
        assert!(a.generated_by(&a).unwrap().same_span(&a, 1e-9));
    }

    #[test]
    fn catalog_constructors_are_algebras() {
        for alg in [
            Subalgebra::full(3),
            Subalgebra::diagonal(4),
            Subalgebra::block_diagonal(&[2, 1]),
            Subalgebra::tensor_left(2, 3),
            Subalgebra::tensor_right(3, 2),
            Subalgebra::scalars(5),
        ] {
            let checked = Subalgebra::from_orthonormal_basis(alg.ambient_dim(), alg.basis().to_vec());
            assert!(checked.is_ok(), "{:?}", checked.err());
        }
    }

    #[test]
    fn from_orthonormal_basis_rejects_non_algebra() {
        let b = alloc::vec![CMatrix::unit(2, 0, 1)];
        assert!(matches!(Subalgebra::from_orthonormal_basis(2, b), Err(Error::NotAnAlgebra { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generate_is_idempotent_and_closed(seed in any::<u64>(), n in 2usize..5, k in 0usize..3) {
            let mut g = rng(seed);
            // a random projection (and optionally a second one) generates a proper algebra
            let gens: Vec<CMatrix> = (0..k)
                .map(|i| crate::mat::random::random_projection(n, 1 + i % (n - 1), &mut g))
                .collect();
            let a = Subalgebra::generate(n, &gens).unwrap();
            prop_assert!(a.closure_residuals().max() <= 1e-9);
            let again = Subalgebra::generate(n, a.basis()).unwrap();
            prop_assert!(again.same_span(&a, 1e-9));
            let x = a.random_element(&mut g);
            let y = a.random_element(&mut g);
            let tol = 1e-9 * (x.hs_norm() * y.hs_norm()).max(1.0);
            prop_assert!(a.contains(&(&x * &y), tol).unwrap());
        }

        #[test]
        fn commutant_of_scalars_and_self(seed in any::<u64>(), n in 2usize..4) {
            let mut g = rng(seed);
            let p = crate::mat::random::random_projection(n, 1, &mut g);
            let d = Subalgebra::generate(n, &[p, crate::mat::random::random_hermitian(n, &mut g)]).unwrap();
            let rc = Subalgebra::relative_commutant(&Subalgebra::scalars(n), &d).unwrap();
            prop_assert!(rc.same_span(&d, 1e-9));
            let z = Subalgebra::relative_commutant(&d, &d).unwrap();
            prop_assert!(z.same_span(&d.center(), 1e-9));
            prop_assert!(z.closure_residuals().max() <= 1e-9);
        }
    }
}
