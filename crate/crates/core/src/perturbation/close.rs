//! The homomorphism `ψ: A → B` close to `E_B|_A`, and the unitary
//! intertwining two close homomorphisms.

use alloc::vec::Vec;

use super::maps::{HomomorphismMap, LinearMap, MapNorm, DEFAULT_NORM_SAMPLES, FIXES_C_TOL};
use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::basic::LocalizedModule;
use crate::error::{Error, Result, Stage};
use crate::expectation::{CondExpectation, QuasiBasis};
use crate::mat::{polar_unitary, projection_intertwiner, spectral_window_projection, CMatrix};

/// Read-back residual allowed when recovering `ψ(a)` from `ψ′(a)η(1)`.
pub const READBACK_TOL: f64 = 1e-7;

/// `ψ` together with the intermediate quantities of its construction.
#[derive(Clone, Debug)]
pub struct CloseHomomorphism {
    pub psi: HomomorphismMap,
    /// `δ = ‖(t + t*)/2 − e_B‖`.
    pub delta: f64,
    /// `‖q − e_B‖` for the spectral window projection `q`.
    pub window_distance: f64,
    /// `‖w − I‖` for the unitary with `w e_B w* = q`.
    pub intertwiner_distance: f64,
    /// Largest distance from a read-back `ψ(a)` to the span of `B`.
    pub readback_residual: f64,
}

fn same_expectation(e: &CondExpectation, f: &CondExpectation) -> bool {
    e.source().same_span(f.source(), NESTING_TOL) && e.target().same_span(f.target(), NESTING_TOL)
}

/// `v_i = E_A^D(u_i)`; a quasi-basis for `E_C^A` whenever `{u_i}` is one for
/// `E_C^D` and `E_A^D` is compatible.
pub fn induced_quasi_basis(e_cd: &CondExpectation, e_ad: &CondExpectation, qb_cd: &QuasiBasis) -> Result<QuasiBasis> {
    if !same_expectation(qb_cd.expectation(), e_cd) {
        return Err(Error::PreconditionFailed("quasi-basis does not belong to the base expectation"));
    }
    let e_ca = e_cd.restrict(e_ad.target())?;
    QuasiBasis::from_elements(&e_ca, qb_cd.elements().iter().map(|u| e_ad.apply(u)).collect())
}

/// Builds `ψ: A → B` with `ψ|_C = id` close to `E_B^D|_A`.
///
/// With `v_i = E_A^D(u_i)`, `t = Σ λ((Σ v_j v_j*)⁻¹) λ(v_i) e_B λ(v_i*)`
/// commutes with `λ(A)` and is close to `e_B`. The spectral projection `q` of
/// its real part near 1 is conjugate to `e_B` by some `w`, and
/// `ψ′(a) = e_B w* λ(a) w e_B` lies in `λ(B) e_B`, which gives `ψ(a)` through
/// `η(ψ(a)) = ψ′(a) η(1)`.
pub fn close_homomorphism(
    module: &LocalizedModule,
    a: &Subalgebra,
    b: &Subalgebra,
    e_ad: &CondExpectation,
    e_bd: &CondExpectation,
    qb_unit: &QuasiBasis,
) -> Result<CloseHomomorphism> {
    if !qb_unit.in_unit_ball() {
        return Err(Error::PreconditionFailed("quasi-basis is not in the unit ball"));
    }
    if !e_ad.target().same_span(a, NESTING_TOL) || !e_bd.target().same_span(b, NESTING_TOL) {
        return Err(Error::PreconditionFailed("expectation does not map onto the subalgebra"));
    }
    let qb_a = induced_quasi_basis(module.base_expectation(), e_ad, qb_unit)?;
    let ind_inv = qb_a.index().hpd_inverse(1e-12)?;
    let e_b = module.jones_projection(e_bd)?;
    let lam_ind_inv = module.lambda(&ind_inv)?;

    let mut sum: Option<_> = None;
    for v in qb_a.elements() {
        let lv = module.lambda(v)?;
        let term = &(&lv * &e_b) * &lv.adjoint();
        sum = Some(match sum {
            None => term,
            Some(acc) => &acc + &term,
        });
    }
    let t = match sum {
        Some(s) => &lam_ind_inv * &s,
        None => return Err(Error::PreconditionFailed("empty quasi-basis")),
    };
    let h = t.hermitian_part();
    let delta = (&h - &e_b).op_norm();
    if delta >= 0.5 {
        return Err(Error::TooFar { stage: Stage::CloseHomomorphism, value: delta, limit: 0.5 });
    }
    let p = e_b.matrix();
    let q = spectral_window_projection(h.matrix(), 1.0 - delta, 1.0 + delta)?;
    let w = projection_intertwiner(p, &q)?;
    let w_adj = w.adjoint();
    let eta_one = module.eta(&CMatrix::identity(a.ambient_dim()));

    let mut images = Vec::with_capacity(a.dim());
    let mut readback_residual = 0.0f64;
    for x in a.basis() {
        let lam = module.lambda(x)?;
        let psi_prime = &(&(&(p * &w_adj) * lam.matrix()) * &w) * p;
        let y = module.from_eta(&psi_prime.apply(&eta_one));
        readback_residual = readback_residual.max(b.hs_distance(&y));
        images.push(b.project(&y));
    }
    if readback_residual > READBACK_TOL {
        return Err(Error::ReadbackFailed { residual: readback_residual });
    }
    let c = module.base_expectation().target();
    let psi = HomomorphismMap::new(LinearMap::from_images(a, images)?, b, c);
    Ok(CloseHomomorphism {
        psi,
        delta,
        window_distance: (&q - p).op_norm(),
        intertwiner_distance: (&w - &CMatrix::identity(w.dim())).op_norm(),
        readback_residual,
    })
}

/// The unitary `u` with `φ₁ = Ad(u) ∘ φ₂`, with its diagnostics.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub unitary: CMatrix,
    /// `‖s − I‖` for `s = Σ φ₁(Ind⁻¹) φ₁(v_i) φ₂(v_i*)`.
    pub s_distance: f64,
    /// Bracket for `‖φ₁ − φ₂‖`.
    pub map_distance: MapNorm,
    /// Max over the domain basis of `‖φ₁(a)u − uφ₂(a)‖`.
    pub intertwining_residual: f64,
    /// Max over the basis of `C` of `‖[u, c]‖`.
    pub commutes_with_c_residual: f64,
}

/// `u = polar(s)` for `s = Σ φ₁((Index E_C^A)⁻¹) φ₁(v_i) φ₂(v_i*)`, where
/// `{v_i}` is a unit-ball quasi-basis of `E_C^A`.
pub fn intertwining_unitary(phi1: &HomomorphismMap, phi2: &HomomorphismMap, qb_a_unit: &QuasiBasis) -> Result<Intertwiner> {
    let a = phi1.domain();
    if !a.same_span(phi2.domain(), NESTING_TOL) || !qb_a_unit.expectation().source().same_span(a, NESTING_TOL) {
        return Err(Error::PreconditionFailed("maps and quasi-basis have different domains"));
    }
    if phi1.fixes_c_residual() > FIXES_C_TOL || phi2.fixes_c_residual() > FIXES_C_TOL {
        return Err(Error::PreconditionFailed("maps do not fix the base algebra"));
    }
    let ind_inv = qb_a_unit.index().hpd_inverse(1e-12)?;
    let n = a.ambient_dim();
    let mut acc = CMatrix::zeros(n);
    for v in qb_a_unit.elements() {
        acc = &acc + &(&phi1.apply(v) * &phi2.apply(&v.adjoint()));
    }
    let s = &phi1.apply(&ind_inv) * &acc;
    let id = CMatrix::identity(n);
    let s_distance = (&s - &id).op_norm();
    if s_distance >= 1.0 {
        return Err(Error::TooFar { stage: Stage::IntertwiningUnitary, value: s_distance, limit: 1.0 });
    }
    let u = polar_unitary(&s)?;
    let intertwining_residual = a
        .basis()
        .iter()
        .map(|x| (&(&phi1.apply(x) * &u) - &(&u * &phi2.apply(x))).op_norm())
        .fold(0.0, f64::max);
    let c = qb_a_unit.expectation().target();
    let commutes_with_c_residual = c.basis().iter().map(|x| u.commutator(x).op_norm()).fold(0.0, f64::max);
    Ok(Intertwiner {
        unitary: u,
        s_distance,
        map_distance: phi1.distance(phi2, DEFAULT_NORM_SAMPLES, 0)?,
        intertwining_residual,
        commutes_with_c_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::{izumi, quasi_basis};
    use crate::mat::random::random_unitary_near_identity;

    struct Tower {
        module: LocalizedModule,
        a: Subalgebra,
        e_cd: CondExpectation,
        e_ad: CondExpectation,
        qb: QuasiBasis,
    }

    fn tower() -> Tower {
        let d = Subalgebra::full(4);
        let c = Subalgebra::scalars(4);
        let a = Subalgebra::tensor_left(2, 2);
        let e_cd = CondExpectation::trace_preserving(&d, &c).unwrap();
        let e_ad = izumi(&e_cd, &a).unwrap();
        let qb = quasi_basis(&e_cd).unwrap().unit_ball_rescale();
        Tower { module: LocalizedModule::localize(&e_cd).unwrap(), a, e_cd, e_ad, qb }
    }

    #[test]
    fn induced_basis_reconstructs_restriction() {
        let t = tower();
        let qa = induced_quasi_basis(&t.e_cd, &t.e_ad, &t.qb).unwrap();
        assert!(qa.in_unit_ball());
        assert!(qa.reconstruction_residual() <= 1e-10);
        // Index of scalars ⊂ M_2 ⊗ I is 4
        assert!((qa.index() - &CMatrix::identity(4).scale_re(4.0)).max_abs() <= 1e-10);
    }

    #[test]
    fn equal_algebras_give_identity() {
        let t = tower();
        let r = close_homomorphism(&t.module, &t.a, &t.a, &t.e_ad, &t.e_ad, &t.qb).unwrap();
        assert!(r.delta <= 1e-10, "{}", r.delta);
        assert!(r.psi.is_homomorphism());
        let id = HomomorphismMap::inclusion(&t.a, &Subalgebra::scalars(4));
        assert!(r.psi.distance(&id, 20, 0).unwrap().upper <= 1e-9);
    }

    #[test]
    fn conjugated_algebra_gives_close_homomorphism() {
        let t = tower();
        let u0 = random_unitary_near_identity(4, 1e-6, 3).unwrap();
        let b = t.a.conjugate(&u0);
        let e_bd = izumi(&t.e_cd, &b).unwrap();
        let r = close_homomorphism(&t.module, &t.a, &b, &t.e_ad, &e_bd, &t.qb).unwrap();
        assert!(r.psi.mult_residual() <= 1e-7);
        assert!(r.psi.fixes_c_residual() <= 1e-8);
        assert!(r.psi.unital_residual() <= 1e-8);
        assert!(r.psi.codomain_residual() <= 1e-12);
        // oracle: ψ is conjugation by a unitary, so it preserves the trace
        for x in t.a.basis() {
            assert!((r.psi.apply(x).trace() - x.trace()).norm() <= 1e-8);
        }
    }

    #[test]
    fn orthogonal_factors_are_too_far() {
        let t = tower();
        let b = Subalgebra::tensor_right(2, 2);
        let e_bd = izumi(&t.e_cd, &b).unwrap();
        let err = close_homomorphism(&t.module, &t.a, &b, &t.e_ad, &e_bd, &t.qb).unwrap_err();
        assert!(matches!(err, Error::TooFar { stage: Stage::CloseHomomorphism, .. }), "{err:?}");
    }

    #[test]
    fn identical_maps_give_identity_unitary() {
        let t = tower();
        let qa = induced_quasi_basis(&t.e_cd, &t.e_ad, &t.qb).unwrap();
        let id = HomomorphismMap::inclusion(&t.a, &Subalgebra::scalars(4));
        let r = intertwining_unitary(&id, &id, &qa).unwrap();
        assert!((&r.unitary - &CMatrix::identity(4)).op_norm() <= 1e-10);
        assert!(r.s_distance <= 1e-10);
    }

    #[test]
    fn planted_conjugation_is_recovered() {
        let t = tower();
        let qa = induced_quasi_basis(&t.e_cd, &t.e_ad, &t.qb).unwrap();
        let c = Subalgebra::scalars(4);
        for seed in 0..5 {
            let u0 = random_unitary_near_identity(4, 1e-3, seed).unwrap();
            let phi1 = HomomorphismMap::new(LinearMap::from_fn(&t.a, |x| x.conjugate_by(&u0)), &t.a.conjugate(&u0), &c);
            let phi2 = HomomorphismMap::inclusion(&t.a, &c);
            let r = intertwining_unitary(&phi1, &phi2, &qa).unwrap();
            assert!(r.unitary.is_unitary(1e-9));
            assert!(r.intertwining_residual <= 1e-8);
            // Ad(u) = Ad(u₀) on A: u*u₀ commutes with A
            let z = &r.unitary.adjoint() * &u0;
            for x in t.a.basis() {
                assert!(z.commutator(x).op_norm() <= 1e-8);
            }
            let n = t.qb.len() as f64;
            assert!((&r.unitary - &CMatrix::identity(4)).op_norm() <= 2f64.sqrt() * n * r.map_distance.upper + 1e-8);
        }
    }
}
