//! Conjugating one intermediate subalgebra onto a nearby one.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::close::{close_homomorphism, induced_quasi_basis, intertwining_unitary};
use super::distance::{distance_estimate_with_index, expectation_vs_inclusion, jones_distance_check, multiplicativity_defect, BoundCheck, DistanceEstimate};
use super::maps::{HomomorphismMap, LinearMap};
use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::basic::LocalizedModule;
use crate::error::{Error, Result};
use crate::expectation::{izumi, quasi_basis, CondExpectation};
use crate::mat::CMatrix;

/// Residual allowed between `uAu*` and `B`.
pub const CONJUGATION_TOL: f64 = 1e-7;

/// `(10N)⁻⁴`.
pub fn gamma_threshold(n_basis: usize) -> f64 {
    let x = 10.0 * n_basis as f64;
    1.0 / (x * x * x * x)
}

/// Sampling budget for the estimates inside [`perturb_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PerturbConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { samples: 100, seed: 0 }
    }
}

/// Stage names passed to the observer of [`perturb_with`], in order.
pub const STAGES: [&str; 6] =
    ["expectations", "quasi_basis", "distance", "close_homomorphism", "intertwining_unitary", "verification"];

/// Outcome of a successful [`perturb`] run.
#[derive(Clone, Debug)]
pub struct PerturbationReport {
    pub unitary: CMatrix,
    pub d_estimate: DistanceEstimate,
    /// `2‖u − I‖`, an upper bound on `d(A, B)` once `uAu* = B` is known.
    pub d_upper_witness: f64,
    /// Sampled `‖E_B^D|_A − ψ‖`.
    pub psi_bound_lhs: f64,
    /// `8√3 N √d_upper`.
    pub psi_bound_rhs: f64,
    /// `‖u − I‖`.
    pub u_bound_lhs: f64,
    /// `√2 N ‖ψ − id_A‖` with the certified upper norm.
    pub u_bound_rhs: f64,
    pub conjugation_residual: f64,
    pub u_commutes_with_c_residual: f64,
    /// HS distance from `u` to `C*(A, B)`.
    pub u_in_cstar_residual: f64,
    pub unitary_residual: f64,
    pub n_quasi_basis: usize,
    pub gamma: f64,
    /// Whether `d_upper < γ`, the sufficient condition for success.
    pub within_gamma: bool,
    pub delta: f64,
    pub s_distance: f64,
    pub psi: HomomorphismMap,
    pub bounds: Vec<BoundCheck>,
    pub config: PerturbConfig,
}

impl PerturbationReport {
    /// Smallest slack in the bound table.
    pub fn min_slack(&self) -> f64 {
        self.bounds.iter().map(BoundCheck::slack).fold(f64::INFINITY, f64::min)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }
}

/// [`perturb_with`] using the default sampling budget and no observer.
pub fn perturb(c: &Subalgebra, d: &Subalgebra, e_cd: &CondExpectation, a: &Subalgebra, b: &Subalgebra) -> Result<PerturbationReport> {
    perturb_with(c, d, e_cd, a, b, &PerturbConfig::default(), &mut |_| {})
}

fn compatible(e_cd: &CondExpectation, x: &Subalgebra) -> Result<CondExpectation> {
    izumi(e_cd, x).map_err(|e| match e {
        Error::CompatibilityResidualExceeded { residual } => Error::CompatibilityRequired { residual },
        other => other,
    })
}

/// Finds a unitary `u ∈ C′ ∩ D` with `uAu* = B` for intermediates `C ⊆ A, B ⊆ D`.
///
/// `observer` is called with each entry of [`STAGES`] as the stage starts,
/// and with `"done"` at the end.
pub fn perturb_with(
    c: &Subalgebra,
    d: &Subalgebra,
    e_cd: &CondExpectation,
    a: &Subalgebra,
    b: &Subalgebra,
    config: &PerturbConfig,
    observer: &mut dyn FnMut(&'static str),
) -> Result<PerturbationReport> {
    if !e_cd.source().same_span(d, NESTING_TOL) || !e_cd.target().same_span(c, NESTING_TOL) {
        return Err(Error::PreconditionFailed("expectation does not map d onto c"));
    }
    let (samples, seed) = (config.samples, config.seed);

    observer(STAGES[0]);
    let e_ad = compatible(e_cd, a)?;
    let e_bd = compatible(e_cd, b)?;

    observer(STAGES[1]);
    let qb_cd = quasi_basis(e_cd)?;
    let index_norm = qb_cd.index_norm();
    let qb = qb_cd.unit_ball_rescale();
    let n_quasi_basis = qb.len();
    let nf = n_quasi_basis as f64;
    let gamma = gamma_threshold(n_quasi_basis);

    observer(STAGES[2]);
    let module = LocalizedModule::localize(e_cd)?;
    let d_estimate = distance_estimate_with_index(a, b, &module, &e_ad, &e_bd, index_norm, samples, seed)?;
    let d_upper = d_estimate.upper;

    observer(STAGES[3]);
    let close = close_homomorphism(&module, a, b, &e_ad, &e_bd, &qb)?;
    let psi = close.psi;

    observer(STAGES[4]);
    let qb_a = induced_quasi_basis(e_cd, &e_ad, &qb)?;
    let id_a = HomomorphismMap::inclusion(a, c);
    let inter = intertwining_unitary(&psi, &id_a, &qb_a)?;
    let u = inter.unitary;

    observer(STAGES[5]);
    let conj = a.conjugate(&u);
    let conjugation_residual = b.containment_residual(&conj);
    if conj.dim() != b.dim() || conjugation_residual > CONJUGATION_TOL {
        return Err(Error::ConjugationFailed { residual: conjugation_residual.max(CONJUGATION_TOL) });
    }
    let u_in_cstar_residual = a.generated_by(b)?.hs_distance(&u);
    let id = CMatrix::identity(u.dim());
    let u_minus_i = (&u - &id).op_norm();

    // bound table
    let eb_a = LinearMap::from_fn(a, |x| e_bd.apply(x));
    let eb_vs_psi = eb_a.sub(psi.map())?;
    let eb_vs_id = eb_a.sub(id_a.map())?;
    let psi_vs_id = psi.map().sub(id_a.map())?;
    let psi_bound_lhs = eb_vs_psi.norm_lower(samples, seed);
    let psi_bound_rhs = 8.0 * 3f64.sqrt() * nf * d_upper.sqrt();
    let psi_id_upper = psi_vs_id.norm_upper();
    let u_bound_rhs = 2f64.sqrt() * nf * psi_id_upper;

    let mut bounds = Vec::new();
    bounds.extend(jones_distance_check(a, b, &e_bd, d_estimate.notes.jones_bound, samples, seed));
    bounds.push(BoundCheck::new("distance_bracket", d_estimate.lower, d_upper));
    bounds.extend(expectation_vs_inclusion(&e_bd, a, d_upper, samples, seed));
    bounds.push(multiplicativity_defect(&eb_a, &psi, samples, seed)?);
    bounds.push(BoundCheck::new("delta", close.delta, nf * (6.0 * d_upper).sqrt()));
    bounds.push(BoundCheck::new("window_projection", close.window_distance, 2.0 * close.delta));
    bounds.push(BoundCheck::new("projection_intertwiner", close.intertwiner_distance, 2f64.sqrt() * close.window_distance));
    bounds.push(BoundCheck::new("close_homomorphism_via_intertwiner", psi_bound_lhs, 2.0 * close.intertwiner_distance));
    bounds.push(BoundCheck::new("close_homomorphism", psi_bound_lhs, psi_bound_rhs));
    bounds.push(BoundCheck::new(
        "homomorphism_vs_identity",
        psi_vs_id.norm_lower(samples, seed),
        eb_vs_psi.norm_upper() + eb_vs_id.norm_upper(),
    ));
    bounds.push(BoundCheck::new("intertwiner_seed", inter.s_distance, nf * psi_id_upper));
    bounds.push(BoundCheck::new("intertwining_unitary", u_minus_i, u_bound_rhs));
    observer("done");

    Ok(PerturbationReport {
        unitary_residual: u.unitary_residual(),
        d_upper_witness: 2.0 * u_minus_i,
        within_gamma: d_upper < gamma,
        psi_bound_lhs,
        psi_bound_rhs,
        u_bound_lhs: u_minus_i,
        u_bound_rhs,
        conjugation_residual,
        u_commutes_with_c_residual: inter.commutes_with_c_residual,
        u_in_cstar_residual,
        n_quasi_basis,
        gamma,
        delta: close.delta,
        s_distance: inter.s_distance,
        unitary: u,
        d_estimate,
        psi,
        bounds,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::random::random_unitary_near_identity;
    use crate::Stage;

    fn tower() -> (Subalgebra, Subalgebra, CondExpectation, Subalgebra) {
        let c = Subalgebra::scalars(4);
        let d = Subalgebra::full(4);
        let e = CondExpectation::trace_preserving(&d, &c).unwrap();
        (c, d, e, Subalgebra::tensor_left(2, 2))
    }

    #[test]
    fn gamma_formula() {
        assert_eq!(gamma_threshold(1), 1e-4);
        assert_eq!(gamma_threshold(4), 3.90625e-7);
        assert_eq!(gamma_threshold(8), 2.44140625e-8);
        for n in 1..50 {
            assert!(gamma_threshold(n + 1) < gamma_threshold(n));
        }
    }

    #[test]
    fn equal_algebras_give_identity() {
        let (c, d, e, a) = tower();
        let r = perturb(&c, &d, &e, &a, &a).unwrap();
        assert!((&r.unitary - &CMatrix::identity(4)).op_norm() <= 1e-10);
        assert!(r.conjugation_residual <= 1e-10);
        assert!(r.u_commutes_with_c_residual <= 1e-10);
        assert!(r.delta <= 1e-10);
        assert_eq!(r.n_quasi_basis, 16);
    }

    #[test]
    fn planted_unitary_is_recovered() {
        let (c, d, e, a) = tower();
        for eps in [1e-3, 1e-6, 1e-9] {
            let u0 = random_unitary_near_identity(4, eps, 11).unwrap();
            let b = a.conjugate(&u0);
            let mut stages = Vec::new();
            let r = perturb_with(&c, &d, &e, &a, &b, &PerturbConfig::default(), &mut |s| stages.push(s)).unwrap();
            assert_eq!(stages.len(), STAGES.len() + 1);
            assert!(r.conjugation_residual <= 1e-7);
            assert!(r.u_commutes_with_c_residual <= 1e-8);
            assert!(r.u_in_cstar_residual <= 1e-8);
            assert!(r.unitary_residual <= 1e-9);
            assert_eq!(a.conjugate(&r.unitary).dim(), b.dim());
            for bound in &r.bounds {
                assert!(bound.holds(1e-7), "{eps}: {bound:?}");
            }
            assert!(r.psi_bound_lhs <= r.psi_bound_rhs + 1e-7);
            assert!(r.u_bound_lhs <= r.u_bound_rhs + 1e-7);
        }
    }

    #[test]
    fn orthogonal_factors_are_too_far() {
        let (c, d, e, a) = tower();
        let err = perturb(&c, &d, &e, &a, &Subalgebra::tensor_right(2, 2)).unwrap_err();
        assert!(matches!(err, Error::TooFar { stage: Stage::CloseHomomorphism, .. }), "{err:?}");
        assert!(err.is_too_far());
    }

    #[test]
    fn nontrivial_base_algebra() {
        // C = M_2 ⊗ I ⊂ A = M_2 ⊗ diag ⊂ D = M_4; planted u₀ ∈ C′ ∩ D = I ⊗ M_2
        let c = Subalgebra::tensor_left(2, 2);
        let d = Subalgebra::full(4);
        let a = Subalgebra::tensor(&Subalgebra::full(2), &Subalgebra::diagonal(2));
        let e = CondExpectation::trace_preserving(&d, &c).unwrap();
        let v = random_unitary_near_identity(2, 1e-3, 4).unwrap();
        let u0 = CMatrix::identity(2).kron(&v);
        let b = a.conjugate(&u0);
        let r = perturb(&c, &d, &e, &a, &b).unwrap();
        assert!(r.conjugation_residual <= 1e-7);
        assert!(r.u_commutes_with_c_residual <= 1e-8);
        assert!(r.psi.fixes_c_residual() <= 1e-8);
        for bound in &r.bounds {
            assert!(bound.holds(1e-7), "{bound:?}");
        }
    }

    #[test]
    fn mismatched_base_is_rejected() {
        let (_, d, e, a) = tower();
        let err = perturb(&Subalgebra::diagonal(4), &d, &e, &a, &a).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed(_)));
    }
}
