//! The basic construction, localized at the normalized trace.
//!
//! `D` becomes an inner-product space under `⟨x, y⟩ = τ(E_C^D(x*y))`. Vectors
//! are written in an orthonormal basis `f = b G^{-1/2}` built from the HS
//! basis `b` of `D` and the Gram matrix `G` of the form, so module operators
//! are ordinary matrices and their adjoints are conjugate transposes.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use crate::algebra::{SpanBuilder, Subalgebra, NESTING_TOL};
use crate::error::{Error, Result};
use crate::expectation::{compatibility_residual, CondExpectation, QuasiBasis, COMPATIBILITY_TOL, FAITHFUL_FLOOR};
use crate::mat::linalg::hpd_solve;
use crate::mat::random::rng;
use crate::mat::{hermitian_eigen, CMatrix, C64, ZERO};

/// Least-squares residual allowed when realizing the dual expectation.
pub const DUAL_TOL: f64 = 1e-8;

/// `D` with the inner product `τ(E_C^D(x*y))`.
#[derive(Clone, Debug)]
pub struct LocalizedModule {
    base: CondExpectation,
    gram: CMatrix,
    gram_half: CMatrix,
    gram_inv_half: CMatrix,
    onb: Vec<CMatrix>,
    fingerprint: u64,
}

/// An operator on a [`LocalizedModule`], as a matrix in its orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleOperator {
    matrix: CMatrix,
    module: u64,
}

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes.iter().fold(state, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn fingerprint(base: &CondExpectation, gram: &CMatrix) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325;
    let mats = base.source().basis().iter().chain(base.target().basis()).chain(core::iter::once(gram));
    for m in mats {
        for z in m.as_slice() {
            h = fnv1a(h, &z.re.to_bits().to_le_bytes());
            h = fnv1a(h, &z.im.to_bits().to_le_bytes());
        }
    }
    h
}

impl LocalizedModule {
    pub fn localize(e_cd: &CondExpectation) -> Result<Self> {
        let gram = e_cd.gram();
        let eig = hermitian_eigen(&gram);
        if eig.min() <= FAITHFUL_FLOOR {
            return Err(Error::DegenerateForm { min_eigenvalue: eig.min() });
        }
        let gram_half = eig.apply_fn(|x| C64::new(x.sqrt(), 0.0));
        let gram_inv_half = eig.apply_fn(|x| C64::new(1.0 / x.sqrt(), 0.0));
        let d = e_cd.source();
        let m = d.dim();
        let onb = (0..m)
            .map(|j| d.element(&(0..m).map(|k| gram_inv_half[(k, j)]).collect::<Vec<_>>()))
            .collect();
        let fingerprint = fingerprint(e_cd, &gram);
        Ok(Self { base: e_cd.clone(), gram, gram_half, gram_inv_half, onb, fingerprint })
    }

    /// The algebra `D`.
    pub fn ambient(&self) -> &Subalgebra {
        self.base.source()
    }

    /// `E_C^D`.
    pub fn base_expectation(&self) -> &CondExpectation {
        &self.base
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    /// Basis of `D` orthonormal for the localized inner product.
    pub fn onb(&self) -> &[CMatrix] {
        &self.onb
    }

    /// Dimension of the module as a vector space.
    pub fn dim(&self) -> usize {
        self.onb.len()
    }

    /// Content fingerprint carried by every operator built on this module.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// `η(x)` in orthonormal coordinates.
    pub fn eta(&self, x: &CMatrix) -> Vec<C64> {
        self.gram_half.apply(&self.ambient().coords(x))
    }

    /// Inverse of [`eta`](Self::eta).
    pub fn from_eta(&self, y: &[C64]) -> CMatrix {
        self.ambient().element(&self.gram_inv_half.apply(y))
    }

    /// `τ(E_C^D(x*y))`.
    pub fn inner(&self, x: &CMatrix, y: &CMatrix) -> C64 {
        self.base.apply(&(&x.adjoint() * y)).normalized_trace()
    }

    fn operator(&self, matrix: CMatrix) -> ModuleOperator {
        ModuleOperator { matrix, module: self.fingerprint }
    }

    /// Operator with column `k` equal to `η(f(f_k))`.
    fn action_operator(&self, f: impl Fn(&CMatrix) -> CMatrix) -> ModuleOperator {
        let m = self.dim();
        let mut out = CMatrix::zeros(m);
        for (k, fk) in self.onb.iter().enumerate() {
            for (j, c) in self.eta(&f(fk)).into_iter().enumerate() {
                out[(j, k)] = c;
            }
        }
        self.operator(out)
    }

    pub fn identity(&self) -> ModuleOperator {
        self.operator(CMatrix::identity(self.dim()))
    }

    /// Left multiplication `λ(d) η(x) = η(dx)`.
    pub fn lambda(&self, d: &CMatrix) -> Result<ModuleOperator> {
        if d.dim() != self.ambient().ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient().ambient_dim(), actual: d.dim() });
        }
        let residual = self.ambient().hs_distance(d);
        if residual > NESTING_TOL * d.hs_norm().max(1.0) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(self.action_operator(|x| d * x))
    }

    /// Jones projection `e_A η(x) = η(E_A^D(x))` of a compatible expectation.
    pub fn jones_projection(&self, e_ad: &CondExpectation) -> Result<ModuleOperator> {
        let residual = compatibility_residual(&self.base, e_ad)?;
        if residual > COMPATIBILITY_TOL {
            return Err(Error::CompatibilityRequired { residual });
        }
        Ok(self.action_operator(|x| e_ad.apply(x)))
    }

    /// `e_C`, the Jones projection of the base expectation.
    pub fn base_projection(&self) -> ModuleOperator {
        let e = &self.base;
        self.action_operator(|x| e.apply(x))
    }

    /// `λ(D)` as a subalgebra of the operators on the module.
    pub fn lambda_algebra(&self) -> Subalgebra {
        let mut span = SpanBuilder::new(self.dim());
        for b in self.ambient().basis() {
            span.try_push(&self.action_operator(|x| b * x).matrix);
        }
        Subalgebra::from_basis_unchecked(self.dim(), span.into_basis())
    }

    /// The operators `λ(x_i) e_C λ(x_j)` over the basis `{x_i}` of `D`.
    fn basic_spanning_set(&self) -> Vec<(usize, usize, CMatrix)> {
        let e_c = self.base_projection().matrix;
        let lambdas: Vec<CMatrix> = self.ambient().basis().iter().map(|b| self.action_operator(|x| b * x).matrix).collect();
        let mut out = Vec::with_capacity(lambdas.len() * lambdas.len());
        for (i, li) in lambdas.iter().enumerate() {
            let left = li * &e_c;
            for (j, lj) in lambdas.iter().enumerate() {
                out.push((i, j, &left * lj));
            }
        }
        out
    }

    /// `C*⟨D, e_C⟩ = span{λ(x) e_C λ(y)}`.
    ///
    /// The span is already a *-algebra because
    /// `e_C λ(y) λ(x) e_C = λ(E_C^D(yx)) e_C`, so no closure iteration is run.
    pub fn basic_construction_algebra(&self) -> Subalgebra {
        let mut span = SpanBuilder::new(self.dim());
        for (_, _, s) in self.basic_spanning_set() {
            span.try_push(&s);
            if span.is_full() {
                break;
            }
        }
        Subalgebra::from_basis_unchecked(self.dim(), span.into_basis())
    }

    /// Dual expectation `E_D: C*⟨D, e_C⟩ → λ(D)` determined by
    /// `E_D(λ(x) e_C λ(y)) = λ((Index E_C^D)⁻¹ x y)`.
    ///
    /// The spanning set is linearly dependent, so the map is fitted by least
    /// squares over it and rejected if the fit is not exact.
    pub fn dual_expectation(&self, qb: &QuasiBasis) -> Result<CondExpectation> {
        let d = self.ambient();
        let ind_inv = qb.index().hpd_inverse(1e-12)?;
        let basic = self.basic_construction_algebra();
        let lambda_d = self.lambda_algebra();
        let spanning = self.basic_spanning_set();
        let xs = d.basis();
        let targets: Vec<CMatrix> = spanning
            .iter()
            .map(|(i, j, _)| {
                let v = &ind_inv * &(&xs[*i] * &xs[*j]);
                self.action_operator(|x| &v * x).matrix
            })
            .collect();
        let r = basic.dim();
        // coordinates of the spanning set in the basis of the basic construction
        let s_cols: Vec<Vec<C64>> = spanning.iter().map(|(_, _, s)| basic.coords(s)).collect();
        let mut sss = CMatrix::zeros(r);
        for col in &s_cols {
            for a in 0..r {
                if col[a] == ZERO {
                    continue;
                }
                for b in 0..r {
                    sss[(a, b)] += col[a] * col[b].conj();
                }
            }
        }
        // images of the basis: Φ(e_l) = Σ_p T_p [S*(SS*)⁻¹]_{p,l}
        let unit_rhs: Vec<Vec<C64>> = (0..r)
            .map(|l| {
                let mut e = alloc::vec![ZERO; r];
                e[l] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        let inv_cols = hpd_solve(&sss, &unit_rhs)?;
        let images: Vec<CMatrix> = inv_cols
            .iter()
            .map(|w| {
                let mut img = CMatrix::zeros(self.dim());
                for (col, t) in s_cols.iter().zip(&targets) {
                    // [S* w]_p = Σ_a conj(S_{a,p}) w_a
                    let coeff: C64 = col.iter().zip(w).map(|(s, x)| s.conj() * x).sum();
                    if coeff != ZERO {
                        img.axpy(coeff, t);
                    }
                }
                img
            })
            .collect();
        let mut residual = 0.0f64;
        for (col, t) in s_cols.iter().zip(&targets) {
            let mut fitted = CMatrix::zeros(self.dim());
            for (c, img) in col.iter().zip(&images) {
                if *c != ZERO {
                    fitted.axpy(*c, img);
                }
            }
            residual = residual.max((&fitted - t).hs_norm() / t.hs_norm().max(1.0));
        }
        if residual > DUAL_TOL {
            return Err(Error::IllDefined { residual });
        }
        CondExpectation::from_images(&basic, &lambda_d, &images)
    }

    /// `max ‖e_C λ(b) e_C − λ(E_C^D(b)) e_C‖` over the basis of `D`.
    pub fn covariant_residual(&self) -> f64 {
        let e_c = self.base_projection();
        self.ambient()
            .basis()
            .iter()
            .map(|b| {
                let lb = self.action_operator(|x| b * x);
                let eb = self.base.apply(b);
                let leb = self.action_operator(|x| &eb * x);
                (&(&(&e_c * &lb) * &e_c) - &(&leb * &e_c)).op_norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max |‖λ(d)‖ − ‖d‖|` over seeded random elements of `D`.
    pub fn lambda_isometry_deviation(&self, samples: usize, seed: u64) -> f64 {
        let mut g = rng(seed);
        (0..samples)
            .map(|_| {
                let d = self.ambient().random_element(&mut g);
                let ld = self.action_operator(|x| &d * x);
                (ld.op_norm() - d.op_norm()).abs()
            })
            .fold(0.0, f64::max)
    }
}

impl ModuleOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Fingerprint of the module this operator acts on.
    pub fn module_fingerprint(&self) -> u64 {
        self.module
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Module adjoint; the basis is orthonormal, so this is the conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), module: self.module }
    }

    pub fn op_norm(&self) -> f64 {
        self.matrix.op_norm()
    }

    pub fn hermitian_part(&self) -> Self {
        Self { matrix: self.matrix.hermitian_part(), module: self.module }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { matrix: self.matrix.scale(s), module: self.module }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.apply(v)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.matrix.is_projection(tol)
    }

    /// `max |⟨T e_i, e_j⟩ − ⟨e_i, T* e_j⟩|` over basis vectors.
    pub fn adjoint_residual(&self) -> f64 {
        let n = self.dim();
        let adj = self.adjoint();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut ei = alloc::vec![ZERO; n];
            ei[i] = C64::new(1.0, 0.0);
            let tei = self.apply(&ei);
            for j in 0..n {
                let mut ej = alloc::vec![ZERO; n];
                ej[j] = C64::new(1.0, 0.0);
                let lhs: C64 = tei.iter().zip(&ej).map(|(a, b)| a.conj() * b).sum();
                let rhs: C64 = ei.iter().zip(&adj.apply(&ej)).map(|(a, b)| a.conj() * b).sum();
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    fn check_same_module(&self, other: &Self) {
        assert_eq!(self.module, other.module, "operators act on different modules");
    }
}

impl Mul for &ModuleOperator {
    type Output = ModuleOperator;
    fn mul(self, rhs: &ModuleOperator) -> ModuleOperator {
        self.check_same_module(rhs);
        ModuleOperator { matrix: &self.matrix * &rhs.matrix, module: self.module }
    }
}

impl Add for &ModuleOperator {
    type Output = ModuleOperator;
    fn add(self, rhs: &ModuleOperator) -> ModuleOperator {
        self.check_same_module(rhs);
        ModuleOperator { matrix: &self.matrix + &rhs.matrix, module: self.module }
    }
}

impl Sub for &ModuleOperator {
    type Output = ModuleOperator;
    fn sub(self, rhs: &ModuleOperator) -> ModuleOperator {
        self.check_same_module(rhs);
        ModuleOperator { matrix: &self.matrix - &rhs.matrix, module: self.module }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::{izumi, quasi_basis};

    fn module(d: &Subalgebra, c: &Subalgebra) -> LocalizedModule {
        LocalizedModule::localize(&CondExpectation::trace_preserving(d, c).unwrap()).unwrap()
    }

    #[test]
    fn identity_expectation_gives_normalized_hs_form() {
        let d = Subalgebra::full(2);
        let m = module(&d, &d);
        assert_eq!(m.dim(), 4);
        assert!((m.gram() - &CMatrix::identity(4).scale_re(0.5)).max_abs() < 1e-14);
        // the onb is √2 times the HS basis
        for (f, b) in m.onb().iter().zip(d.basis()) {
            assert!((f - &b.scale_re(2f64.sqrt())).max_abs() < 1e-13);
        }
    }

    #[test]
    fn scalar_base_gives_four_dimensional_module() {
        let m = module(&Subalgebra::full(2), &Subalgebra::scalars(2));
        assert_eq!(m.dim(), 4);
        assert!((m.gram() - &CMatrix::identity(4).scale_re(0.5)).max_abs() < 1e-14);
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let d = Subalgebra::diagonal(2);
        let e = CondExpectation::from_fn(&d, &Subalgebra::scalars(2), |x| CMatrix::identity(2).scale(x[(0, 0)]))
            .unwrap();
        assert!(matches!(LocalizedModule::localize(&e), Err(Error::DegenerateForm { .. })));
    }

    #[test]
    fn lambda_is_a_representation() {
        let d = Subalgebra::full(3);
        let m = module(&d, &Subalgebra::diagonal(3));
        assert!((m.lambda(&CMatrix::identity(3)).unwrap().matrix() - &CMatrix::identity(9)).max_abs() < 1e-12);
        let p = m.lambda(&CMatrix::unit(3, 0, 0)).unwrap();
        assert!((&(&p * &p) - &p).op_norm() < 1e-12);
        let mut g = rng(3);
        let (x, y) = (d.random_element(&mut g), d.random_element(&mut g));
        let lxy = m.lambda(&(&x * &y)).unwrap();
        let lx_ly = &m.lambda(&x).unwrap() * &m.lambda(&y).unwrap();
        assert!((&lxy - &lx_ly).op_norm() < 1e-9);
        assert!((&m.lambda(&x.adjoint()).unwrap() - &m.lambda(&x).unwrap().adjoint()).op_norm() < 1e-9);
        assert!(m.lambda_isometry_deviation(100, 4) <= 1e-8);
        assert!(m.lambda(&x).unwrap().adjoint_residual() < 1e-12);
    }

    #[test]
    fn lambda_rejects_outside_elements() {
        let m = module(&Subalgebra::diagonal(2), &Subalgebra::scalars(2));
        assert!(matches!(m.lambda(&CMatrix::unit(2, 0, 1)), Err(Error::NotInAlgebra { .. })));
    }

    #[test]
    fn jones_projections() {
        let d = Subalgebra::full(4);
        let c = Subalgebra::scalars(4);
        let m = module(&d, &c);
        let whole = m.jones_projection(&CondExpectation::identity(&d)).unwrap();
        assert!((whole.matrix() - &CMatrix::identity(16)).max_abs() < 1e-12);
        let a = Subalgebra::tensor_left(2, 2);
        let e_a = m.jones_projection(&izumi(m.base_expectation(), &a).unwrap()).unwrap();
        assert!(e_a.is_projection(1e-9));
        let e_c = m.base_projection();
        assert!((&(&e_a * &e_c) - &e_c).op_norm() < 1e-9);
        assert!((&(&e_c * &e_a) - &e_c).op_norm() < 1e-9);
        for x in a.basis() {
            let lx = m.lambda(x).unwrap();
            assert!((&(&e_a * &lx) - &(&lx * &e_a)).op_norm() < 1e-9);
        }
        // membership ⟺ commutation with e_A
        let e12_tensor_i = &CMatrix::unit(4, 0, 2) + &CMatrix::unit(4, 1, 3);
        for (b, inside) in [(e12_tensor_i, true), (CMatrix::unit(4, 0, 2), false)] {
            let lb = m.lambda(&b).unwrap();
            let commutes = (&(&e_a * &lb) - &(&lb * &e_a)).op_norm() <= 1e-9;
            assert_eq!(commutes, inside);
            assert_eq!(a.contains(&b, 1e-8).unwrap(), inside);
        }
        assert!(m.covariant_residual() <= 1e-9);
    }

    #[test]
    fn incompatible_jones_projection_is_refused() {
        let d = Subalgebra::full(2);
        let rho = CMatrix::from_real_rows(&[&[0.5, 0.2], &[0.2, 0.5]]);
        let e_cd =
            CondExpectation::from_fn(&d, &Subalgebra::scalars(2), |x| CMatrix::identity(2).scale((&rho * x).trace()))
                .unwrap();
        let m = LocalizedModule::localize(&e_cd).unwrap();
        let e_ad = CondExpectation::trace_preserving(&d, &Subalgebra::diagonal(2)).unwrap();
        assert!(matches!(m.jones_projection(&e_ad), Err(Error::CompatibilityRequired { .. })));
    }

    #[test]
    fn basic_construction_dimensions() {
        let d = Subalgebra::full(2);
        let trivial = module(&d, &d);
        let b = trivial.basic_construction_algebra();
        assert_eq!(b.dim(), 4);
        assert!(b.same_span(&trivial.lambda_algebra(), 1e-9));
        assert_eq!(module(&d, &Subalgebra::scalars(2)).basic_construction_algebra().dim(), 16);
        let diag = module(&d, &Subalgebra::diagonal(2)).basic_construction_algebra();
        assert_eq!(diag.dim(), 8);
        assert!(diag.closure_residuals().max() <= 1e-9);
    }

    #[test]
    fn dual_expectation_scalars_in_m2() {
        let d = Subalgebra::full(2);
        let m = module(&d, &Subalgebra::scalars(2));
        let qb = quasi_basis(m.base_expectation()).unwrap();
        let e_d = m.dual_expectation(&qb).unwrap();
        assert_eq!(e_d.source().dim(), 16);
        assert!(e_d.audit(200, 2).is_valid(), "{:?}", e_d.audit(200, 2));
        let e_c = m.base_projection();
        assert!((&e_d.apply(e_c.matrix()) - &CMatrix::identity(4).scale_re(0.25)).max_abs() < 1e-9);
        let x = d.random_element(&mut rng(6));
        let lx = m.lambda(&x).unwrap();
        assert!((&e_d.apply(lx.matrix()) - lx.matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn dual_expectation_diagonal_in_m3() {
        let m = module(&Subalgebra::full(3), &Subalgebra::diagonal(3));
        let qb = quasi_basis(m.base_expectation()).unwrap();
        let e_d = m.dual_expectation(&qb).unwrap();
        assert!(e_d.audit(50, 2).is_valid());
        let e_c = m.base_projection();
        assert!((&e_d.apply(e_c.matrix()) - &CMatrix::identity(9).scale_re(1.0 / 3.0)).max_abs() < 1e-9);
    }
}
