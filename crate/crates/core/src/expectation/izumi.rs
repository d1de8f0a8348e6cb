//! Compatible expectations onto intermediate subalgebras.

use alloc::vec::Vec;

use super::{CondExpectation, QuasiBasis};
use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::error::{Error, Result};
use crate::mat::CMatrix;

/// Tolerance on `‖E_C^A ∘ E_A^D − E_C^D‖` for an expectation to count as compatible.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

fn check_intermediate(e_cd: &CondExpectation, a: &Subalgebra) -> Result<()> {
    if a.ambient_dim() != e_cd.source().ambient_dim() {
        return Err(Error::DimensionMismatch { expected: e_cd.source().ambient_dim(), actual: a.ambient_dim() });
    }
    let residual = e_cd.source().containment_residual(a).max(a.containment_residual(e_cd.target()));
    if residual > NESTING_TOL {
        return Err(Error::NotIntermediate { residual });
    }
    Ok(())
}

/// `E_A^D(x) = (Index E_C^A)⁻¹ Σ_{i,j} u_i E_C^D(u_i* x u_j) u_j*` for a
/// quasi-basis `{u_i}` of the restriction `E_C^A` of `e_cd` to `a`.
///
/// The result is checked for compatibility with `e_cd` before it is returned.
pub fn izumi_expectation(e_cd: &CondExpectation, a: &Subalgebra, qb_ca: &QuasiBasis) -> Result<CondExpectation> {
    check_intermediate(e_cd, a)?;
    if !qb_ca.expectation().source().same_span(a, NESTING_TOL) {
        return Err(Error::PreconditionFailed("quasi-basis does not belong to the restriction onto a"));
    }
    let ind_inv = qb_ca.index().hpd_inverse(1e-12)?;
    let u = qb_ca.elements();
    let u_adj: Vec<CMatrix> = u.iter().map(CMatrix::adjoint).collect();
    let n = a.ambient_dim();
    let e_ad = CondExpectation::from_fn(e_cd.source(), a, |x| {
        let mut acc = CMatrix::zeros(n);
        for (ui, ui_adj) in u.iter().zip(&u_adj) {
            let left = ui_adj * x;
            let mut inner = CMatrix::zeros(n);
            for (uj, uj_adj) in u.iter().zip(&u_adj) {
                inner = &inner + &(&e_cd.apply(&(&left * uj)) * uj_adj);
            }
            acc = &acc + &(ui * &inner);
        }
        &ind_inv * &acc
    })?;
    let residual = compatibility_residual(e_cd, &e_ad)?;
    if residual > COMPATIBILITY_TOL {
        return Err(Error::CompatibilityResidualExceeded { residual });
    }
    Ok(e_ad)
}

/// [`izumi_expectation`] with the quasi-basis of `E_C^A` computed by the
/// module-frame construction.
pub fn izumi(e_cd: &CondExpectation, a: &Subalgebra) -> Result<CondExpectation> {
    let e_ca = e_cd.restrict(a)?;
    let qb = QuasiBasis::compute(&e_ca)?;
    izumi_expectation(e_cd, a, &qb)
}

/// `max ‖E_C^D(E_A^D(x)) − E_C^D(x)‖` over the source basis.
pub fn compatibility_residual(e_cd: &CondExpectation, e_ad: &CondExpectation) -> Result<f64> {
    check_intermediate(e_cd, e_ad.target())?;
    if !e_ad.source().same_span(e_cd.source(), NESTING_TOL) {
        let residual = e_cd.source().containment_residual(e_ad.source());
        return Err(Error::NotIntermediate { residual: residual.max(NESTING_TOL) });
    }
    Ok(e_cd
        .source()
        .basis()
        .iter()
        .map(|x| (&e_cd.apply(&e_ad.apply(x)) - &e_cd.apply(x)).op_norm())
        .fold(0.0, f64::max))
}

/// `‖e1 − e2‖` for two compatible expectations onto the same intermediate.
/// Compatible expectations are unique, so this should vanish.
pub fn uniqueness_check(e_cd: &CondExpectation, e1: &CondExpectation, e2: &CondExpectation) -> Result<f64> {
    if !e1.target().same_span(e2.target(), NESTING_TOL) {
        return Err(Error::PreconditionFailed("expectations have different targets"));
    }
    for e in [e1, e2] {
        if compatibility_residual(e_cd, e)? > COMPATIBILITY_TOL {
            return Err(Error::PreconditionFailed("expectation is not compatible"));
        }
    }
    Ok(e1.distance(e2))
}
