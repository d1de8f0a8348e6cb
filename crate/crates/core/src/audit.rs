//! Randomized verification of the standalone norm estimates.
//!
//! Each audit draws seeded random instances satisfying an estimate's
//! hypotheses and records the largest `lhs − rhs` it saw. A positive
//! `max_violation` beyond rounding is a counterexample.

use alloc::vec::Vec;

#[allow(unused_imports)] // float math is inherent once std is linked
use num_traits::Float;
use rand::Rng;

use crate::algebra::Subalgebra;
use crate::basic::LocalizedModule;
use crate::error::Result;
use crate::expectation::{izumi, CondExpectation};
use crate::mat::random::{random_hermitian, random_matrix, random_projection, random_unitary_near_identity, rng, SeededRng};
use crate::mat::{polar_unitary, projection_intertwiner, spectral_window_projection, CMatrix};
use crate::perturbation::LinearMap;

/// Outcome of one audit over many trials.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditItem {
    pub name: &'static str,
    pub trials: usize,
    /// Largest `lhs − rhs` over all trials.
    pub max_violation: f64,
    /// Largest `lhs / rhs` over trials with `rhs` above rounding level.
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub trials: usize,
    pub seed: u64,
    pub items: Vec<AuditItem>,
}

impl AuditReport {
    pub fn max_violation(&self) -> f64 {
        self.items.iter().map(|i| i.max_violation).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.items.iter().all(|i| i.max_violation <= tol)
    }
}

const RATIO_FLOOR: f64 = 1e-9;

struct Tracker {
    item: AuditItem,
}

impl Tracker {
    fn new(name: &'static str, trials: usize) -> Self {
        Self { item: AuditItem { name, trials, max_violation: f64::NEG_INFINITY, max_ratio: 0.0 } }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.item.max_violation = self.item.max_violation.max(lhs - rhs);
        if rhs > RATIO_FLOOR {
            self.item.max_ratio = self.item.max_ratio.max(lhs / rhs);
        }
    }

    fn finish(self) -> AuditItem {
        self.item
    }
}

fn item_rng(seed: u64, item: u64) -> SeededRng {
    rng(seed ^ item.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn dim(r: &mut SeededRng) -> usize {
    r.gen_range(2..=6)
}

/// `‖u − I‖ ≤ √2‖x − I‖` for the polar part `u` of `x` with `‖x − I‖ < 1`.
pub fn polar_audit(trials: usize, seed: u64) -> AuditItem {
    let mut r = item_rng(seed, 1);
    let mut t = Tracker::new("polar_unitary", trials);
    for _ in 0..trials {
        let n = dim(&mut r);
        let k = random_matrix(n, &mut r);
        let radius = r.gen_range(0.0..0.99);
        let id = CMatrix::identity(n);
        let x = &id + &k.scale_re(radius / k.op_norm());
        let u = polar_unitary(&x).expect("‖x − I‖ < 1 keeps x invertible");
        t.record((&u - &id).op_norm(), 2f64.sqrt() * (&x - &id).op_norm());
    }
    t.finish()
}

/// `‖q − p‖ ≤ 2‖a − p‖` for `q = χ_[1−δ,1+δ](a)` with `δ = ‖a − p‖ < 1/2`.
pub fn window_audit(trials: usize, seed: u64) -> AuditItem {
    let mut r = item_rng(seed, 2);
    let mut t = Tracker::new("spectral_window_projection", trials);
    for _ in 0..trials {
        let n = dim(&mut r);
        let rank = r.gen_range(0..=n);
        let p = random_projection(n, rank, &mut r);
        let h = random_hermitian(n, &mut r);
        let a = &p + &h.scale_re(r.gen_range(0.0..0.49) / h.op_norm());
        let delta = (&a - &p).op_norm();
        let q = spectral_window_projection(&a, 1.0 - delta, 1.0 + delta).expect("a is Hermitian");
        t.record((&q - &p).op_norm(), 2.0 * delta);
    }
    t.finish()
}

/// `w p w* = q` and `‖w − I‖ ≤ √2‖p − q‖` for projections with `‖p − q‖ < 1`.
pub fn intertwiner_audit(trials: usize, seed: u64) -> AuditItem {
    let mut r = item_rng(seed, 3);
    let mut t = Tracker::new("projection_intertwiner", trials);
    for _ in 0..trials {
        let n = dim(&mut r);
        let rank = r.gen_range(0..=n);
        let p = random_projection(n, rank, &mut r);
        let v = random_unitary_near_identity(n, r.gen_range(0.0..0.49), r.gen()).expect("eps < 2");
        let q = p.conjugate_by(&v);
        let dist = (&p - &q).op_norm();
        let w = projection_intertwiner(&p, &q).expect("‖p − q‖ < 1");
        let intertwines = (&p.conjugate_by(&w) - &q).op_norm();
        t.record((&w - &CMatrix::identity(n)).op_norm() + intertwines, 2f64.sqrt() * dist);
    }
    t.finish()
}

/// `‖φ(xy) − φ(x)φ(y)‖ ≤ 3‖φ − ψ‖‖x‖‖y‖` for `ψ = Ad(v)` and the contractive
/// positive `φ = (1 − s)ψ + s·diag`.
pub fn multiplicativity_audit(trials: usize, seed: u64) -> AuditItem {
    let mut r = item_rng(seed, 4);
    let mut t = Tracker::new("multiplicativity_defect", trials);
    for _ in 0..trials {
        let n = r.gen_range(2..=4);
        let a = Subalgebra::full(n);
        let diag = CondExpectation::trace_preserving(&a, &Subalgebra::diagonal(n)).expect("diagonal is nested");
        let v = random_unitary_near_identity(n, r.gen_range(0.0..1.9), r.gen()).expect("eps < 2");
        let s = r.gen_range(0.0..0.2);
        let psi = LinearMap::from_fn(&a, |x| x.conjugate_by(&v));
        let phi = LinearMap::from_fn(&a, |x| &x.conjugate_by(&v).scale_re(1.0 - s) + &diag.apply(x).scale_re(s));
        let dist = phi.sub(&psi).expect("same domain").norm_upper();
        let x = a.random_contraction(&mut r);
        let y = a.random_contraction(&mut r);
        let defect = (&phi.apply(&(&x * &y)) - &(&phi.apply(&x) * &phi.apply(&y))).op_norm();
        t.record(defect, 3.0 * dist * x.op_norm() * y.op_norm());
    }
    t.finish()
}

struct ConjugatePair {
    a: Subalgebra,
    b: Subalgebra,
    d_upper: f64,
}

/// `A = M_2 ⊗ I ⊂ M_4` and `B = uAu*` with `d(A, B) ≤ 2‖u − I‖`.
fn conjugate_pair(r: &mut SeededRng, max_eps: f64) -> ConjugatePair {
    let a = Subalgebra::tensor_left(2, 2);
    let u = random_unitary_near_identity(4, r.gen_range(0.0..max_eps), r.gen()).expect("eps < 2");
    let d_upper = 2.0 * (&u - &CMatrix::identity(4)).op_norm();
    ConjugatePair { b: a.conjugate(&u), a, d_upper }
}

/// `‖E_B|_A − ι_A‖ ≤ 2d` and `‖E_B(xy) − E_B(x)E_B(y)‖ ≤ 6d‖x‖‖y‖`.
pub fn expectation_inclusion_audit(trials: usize, seed: u64) -> AuditItem {
    let mut r = item_rng(seed, 5);
    let mut t = Tracker::new("expectation_vs_inclusion", trials);
    let d = Subalgebra::full(4);
    for _ in 0..trials {
        let pair = conjugate_pair(&mut r, 0.5);
        let e_b = CondExpectation::trace_preserving(&d, &pair.b).expect("b is nested");
        let x = pair.a.random_contraction(&mut r);
        let y = pair.a.random_contraction(&mut r);
        t.record((&x - &e_b.apply(&x)).op_norm(), 2.0 * pair.d_upper);
        let defect = (&e_b.apply(&(&x * &y)) - &(&e_b.apply(&x) * &e_b.apply(&y))).op_norm();
        t.record(defect, 6.0 * pair.d_upper);
    }
    t.finish()
}

/// `‖a − E_B(a)‖ ≤ ‖Index E_C^D‖‖e_A − e_B‖` for contractions `a ∈ A`, over
/// the tower `scalars ⊂ M_2 ⊗ I ⊂ M_4`.
pub fn jones_distance_audit(trials: usize, seed: u64) -> Result<AuditItem> {
    let mut r = item_rng(seed, 6);
    let mut t = Tracker::new("jones_distance", trials);
    let e_cd = CondExpectation::trace_preserving(&Subalgebra::full(4), &Subalgebra::scalars(4))?;
    let module = LocalizedModule::localize(&e_cd)?;
    // ‖Index E_C^D‖ = 16 for scalars ⊂ M_4
    let index_norm = crate::expectation::quasi_basis(&e_cd)?.index_norm();
    let e_a = izumi(&e_cd, &Subalgebra::tensor_left(2, 2))?;
    let p_a = module.jones_projection(&e_a)?;
    for _ in 0..trials {
        let pair = conjugate_pair(&mut r, 0.5);
        let e_b = izumi(&e_cd, &pair.b)?;
        let jones = (&p_a - &module.jones_projection(&e_b)?).op_norm();
        let x = pair.a.random_contraction(&mut r);
        t.record((&x - &e_b.apply(&x)).op_norm(), index_norm * jones);
    }
    Ok(t.finish())
}

/// Every audit, `trials` times each.
pub fn run_all(trials: usize, seed: u64) -> Result<AuditReport> {
    let items = alloc::vec![
        polar_audit(trials, seed),
        window_audit(trials, seed),
        intertwiner_audit(trials, seed),
        multiplicativity_audit(trials, seed),
        expectation_inclusion_audit(trials, seed),
        jones_distance_audit(trials, seed)?,
    ];
    Ok(AuditReport { trials, seed, items })
}
