//! Distance between subalgebras and the audits that depend on it.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;

use super::maps::{HomomorphismMap, LinearMap};
use crate::algebra::{Subalgebra, NESTING_TOL};
use crate::basic::LocalizedModule;
use crate::error::{Error, Result};
use crate::expectation::{quasi_basis, CondExpectation};
use crate::mat::random::rng;
use crate::mat::CMatrix;

/// One inequality `lhs ≤ rhs`, as measured.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self { name, lhs, rhs }
    }

    /// `rhs − lhs`; negative means the inequality failed.
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Where the two ends of a [`DistanceEstimate`] came from.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceNotes {
    /// `‖Index E_C^D‖`.
    pub index_norm: f64,
    /// `‖e_A − e_B‖` on the localized module.
    pub jones_distance: f64,
    /// `‖Index E_C^D‖ · ‖e_A − e_B‖`.
    pub jones_bound: f64,
    /// `max(‖(ι − E_B)|_A‖, ‖(ι − E_A)|_B‖)`, certified upper norms.
    pub sweep_bound: f64,
    /// `2‖u − I‖` for a unitary with `uAu* = B`, when one was supplied.
    pub witness_bound: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Bracket `lower ≤ d(A, B) ≤ upper` for the distance between unit balls.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub notes: DistanceNotes,
}

impl DistanceEstimate {
    /// Tightens `upper` with a unitary `u` satisfying `uAu* = B`:
    /// `‖a − uau*‖ = ‖[a, u − I]‖ ≤ 2‖u − I‖‖a‖` and symmetrically for `B`.
    pub fn with_witness(mut self, a: &Subalgebra, b: &Subalgebra, u: &CMatrix) -> Result<Self> {
        if !u.is_unitary(1e-9) {
            return Err(Error::PreconditionFailed("witness is not unitary"));
        }
        if !a.conjugate(u).same_span(b, 1e-7) {
            return Err(Error::PreconditionFailed("witness does not conjugate A onto B"));
        }
        let bound = 2.0 * (u - &CMatrix::identity(u.dim())).op_norm();
        self.notes.witness_bound = Some(bound);
        self.upper = self.upper.min(bound);
        Ok(self)
    }
}

/// Largest `dist_HS(x, to)/√n` over sampled contractions `x` of `from` and its
/// normalized basis. Each term is below `dist(x, to_1) ≤ d`.
fn sampled_lower(from: &Subalgebra, to: &Subalgebra, samples: usize, seed: u64) -> f64 {
    let scale = 1.0 / (from.ambient_dim() as f64).sqrt();
    let mut best =
        from.basis().iter().map(|b| to.hs_distance(&b.scale_re(1.0 / b.op_norm())) * scale).fold(0.0, f64::max);
    let mut r = rng(seed);
    for _ in 0..samples {
        best = best.max(to.hs_distance(&from.random_contraction(&mut r)) * scale);
    }
    best
}

/// `(ι − E)|_A` as a map on `A`.
fn defect_map(a: &Subalgebra, e: &CondExpectation) -> LinearMap {
    LinearMap::from_fn(a, |x| x - &e.apply(x))
}

/// Certified bracket for `d(A, B)`.
///
/// The upper end is the smaller of the Jones-projection bound
/// `‖Index E_C^D‖‖e_A − e_B‖` and the sweep `‖a − E_B(a)‖` over the unit ball
/// of `A` (and symmetrically), each bounded by a certified map norm.
pub fn distance_estimate(
    a: &Subalgebra,
    b: &Subalgebra,
    module: &LocalizedModule,
    e_a: &CondExpectation,
    e_b: &CondExpectation,
    samples: usize,
    seed: u64,
) -> Result<DistanceEstimate> {
    let index_norm = quasi_basis(module.base_expectation())?.index_norm();
    distance_estimate_with_index(a, b, module, e_a, e_b, index_norm, samples, seed)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn distance_estimate_with_index(
    a: &Subalgebra,
    b: &Subalgebra,
    module: &LocalizedModule,
    e_a: &CondExpectation,
    e_b: &CondExpectation,
    index_norm: f64,
    samples: usize,
    seed: u64,
) -> Result<DistanceEstimate> {
    for (alg, e) in [(a, e_a), (b, e_b)] {
        if !e.target().same_span(alg, NESTING_TOL) {
            return Err(Error::PreconditionFailed("expectation does not map onto the subalgebra"));
        }
    }
    let jones_distance = (&module.jones_projection(e_a)? - &module.jones_projection(e_b)?).op_norm();
    let jones_bound = index_norm * jones_distance;
    let sweep_bound = defect_map(a, e_b).norm_upper().max(defect_map(b, e_a).norm_upper());
    let lower = sampled_lower(a, b, samples, seed).max(sampled_lower(b, a, samples, seed.wrapping_add(1)));
    Ok(DistanceEstimate {
        lower,
        upper: jones_bound.min(sweep_bound),
        notes: DistanceNotes { index_norm, jones_distance, jones_bound, sweep_bound, witness_bound: None, samples, seed },
    })
}

/// Random contraction pairs drawn from `a`.
fn contraction_pairs(a: &Subalgebra, samples: usize, seed: u64) -> Vec<(CMatrix, CMatrix)> {
    let mut r = rng(seed);
    (0..samples).map(|_| (a.random_contraction(&mut r), a.random_contraction(&mut r))).collect()
}

/// `‖φ(xy) − φ(x)φ(y)‖ ≤ 3‖φ − ψ‖` on sampled contraction pairs, for a
/// homomorphism `ψ` and a linear map `φ` on the same domain.
///
/// `lhs` is the largest sampled defect; `rhs` uses the certified upper norm.
pub fn multiplicativity_defect(phi: &LinearMap, psi: &HomomorphismMap, samples: usize, seed: u64) -> Result<BoundCheck> {
    let dist = phi.sub(psi.map())?.norm_upper();
    let lhs = contraction_pairs(phi.domain(), samples, seed)
        .iter()
        .map(|(x, y)| (&phi.apply(&(x * y)) - &(&phi.apply(x) * &phi.apply(y))).op_norm())
        .fold(0.0, f64::max);
    Ok(BoundCheck::new("multiplicativity_defect", lhs, 3.0 * dist))
}

/// `‖E_B|_A − ι_A‖ ≤ 2d` and `‖E_B(xy) − E_B(x)E_B(y)‖ ≤ 6d‖x‖‖y‖` with `d`
/// replaced by a certified upper bound.
///
/// The first left side is the sampled lower norm, so a failure is a genuine
/// counterexample.
pub fn expectation_vs_inclusion(e_b: &CondExpectation, a: &Subalgebra, d_upper: f64, samples: usize, seed: u64) -> [BoundCheck; 2] {
    let inclusion = defect_map(a, e_b).norm_lower(samples, seed);
    let product = contraction_pairs(a, samples, seed.wrapping_add(1))
        .iter()
        .map(|(x, y)| (&e_b.apply(&(x * y)) - &(&e_b.apply(x) * &e_b.apply(y))).op_norm())
        .fold(0.0, f64::max);
    [
        BoundCheck::new("expectation_vs_inclusion", inclusion, 2.0 * d_upper),
        BoundCheck::new("expectation_multiplicativity", product, 6.0 * d_upper),
    ]
}

/// `dist(x, B_1) ≤ ‖Index E_C^D‖‖e_A − e_B‖` on sampled contractions `x ∈ A`,
/// with the left side bounded below by `dist_HS(x, B)/√n` and above by
/// `‖x − E_B(x)‖`. Returns the worse of the two comparisons.
pub fn jones_distance_check(a: &Subalgebra, b: &Subalgebra, e_b: &CondExpectation, jones_bound: f64, samples: usize, seed: u64) -> [BoundCheck; 2] {
    let scale = 1.0 / (a.ambient_dim() as f64).sqrt();
    let mut r = rng(seed);
    let (mut lower, mut sweep) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let x = a.random_contraction(&mut r);
        lower = lower.max(b.hs_distance(&x) * scale);
        sweep = sweep.max((&x - &e_b.apply(&x)).op_norm());
    }
    [BoundCheck::new("jones_distance", lower, jones_bound), BoundCheck::new("jones_distance_sweep", sweep, jones_bound)]
}
