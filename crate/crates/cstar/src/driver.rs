//! Experiments over catalog scenarios, each returning a serializable report.

use std::fmt;
use std::time::Instant;

use cstar_core::audit::run_all;
use cstar_core::expectation::{izumi, pimsner_popa_audit, quasi_basis};
use cstar_core::perturbation::{
    cluster_intermediates_with, distance_estimate, perturb_with, BoundCheck, ClusterConfig, DistanceEstimate,
    PerturbConfig,
};
use cstar_core::{CMatrix, Error, LocalizedModule};
use serde::Serialize;

use crate::json::{MatrixJson, ModuleOperatorJson, QuasiBasisJson};
use crate::scenario::{self, Scenario};

/// Audit violations above this fail the `audit` command.
pub const AUDIT_TOL: f64 = 1e-7;

/// Samples used for norm and distance estimates.
pub const SAMPLES: usize = 100;

#[derive(Debug)]
pub enum DriverError {
    UnknownScenario(String),
    Core(Error),
}

impl fmt::Display for DriverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriverError::UnknownScenario(name) => {
                write!(f, "unknown scenario {name:?}; known: {}", scenario::names().join(", "))
            }
            DriverError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for DriverError {}

impl From<Error> for DriverError {
    fn from(e: Error) -> Self {
        DriverError::Core(e)
    }
}

impl DriverError {
    /// 2 for inputs too far apart, 3 for numerical breakdown, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Core(e) if e.is_too_far() => 2,
            DriverError::Core(e) if e.is_numerical_breakdown() => 3,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> ErrorJson {
        let status = match self.exit_code() {
            2 => "too_far",
            3 => "numerical_breakdown",
            _ => "error",
        };
        let (stage, value, limit) = match self {
            DriverError::Core(Error::TooFar { stage, value, limit }) => (Some(stage.as_str()), Some(*value), Some(*limit)),
            _ => (None, None, None),
        };
        ErrorJson { status, message: self.to_string(), stage, value, limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorJson {
    pub status: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
}

pub type DriverResult<T> = Result<T, DriverError>;

fn lookup(name: &str) -> DriverResult<Scenario> {
    scenario::find(name).ok_or_else(|| DriverError::UnknownScenario(name.to_string()))
}

fn op_distance_to_identity(u: &CMatrix) -> f64 {
    (u - &CMatrix::identity(u.dim())).op_norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundJson {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl From<&BoundCheck> for BoundJson {
    fn from(b: &BoundCheck) -> Self {
        Self { name: b.name, lhs: b.lhs, rhs: b.rhs, slack: b.slack() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pair {
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceJson {
    pub lower: f64,
    pub upper: f64,
    pub index_norm: f64,
    pub jones_distance: f64,
    pub jones_bound: f64,
    pub sweep_bound: f64,
    pub witness_bound: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl From<&DistanceEstimate> for DistanceJson {
    fn from(d: &DistanceEstimate) -> Self {
        let n = &d.notes;
        Self {
            lower: d.lower,
            upper: d.upper,
            index_norm: n.index_norm,
            jones_distance: n.jones_distance,
            jones_bound: n.jones_bound,
            sweep_bound: n.sweep_bound,
            witness_bound: n.witness_bound,
            samples: n.samples,
            seed: n.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomomorphismJson {
    pub mult_residual: f64,
    pub unital_residual: f64,
    pub fixes_c_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: f64,
}

/// Report of one plant-and-recover run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoverReport {
    pub scenario: &'static str,
    pub eps: f64,
    pub seed: u64,
    pub tol: f64,
    /// `‖u₀ − I‖` of the planted unitary.
    pub planted_distance: f64,
    pub unitary: MatrixJson,
    pub n_quasi_basis: usize,
    pub gamma: f64,
    pub within_gamma: bool,
    pub distance: DistanceJson,
    pub d_upper_witness: f64,
    pub delta: f64,
    pub s_distance: f64,
    pub psi: HomomorphismJson,
    pub psi_bound: Pair,
    pub u_bound: Pair,
    pub conjugation_residual: f64,
    pub u_commutes_with_c_residual: f64,
    pub u_in_cstar_residual: f64,
    pub unitary_residual: f64,
    /// `‖u − u₀‖` up to the commutant of `A`; reported, not required.
    pub recovered_vs_planted: f64,
    pub bounds: Vec<BoundJson>,
    /// Every bound holds with slack `≥ −tol`.
    pub bounds_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Vec<StageTiming>>,
}

/// Conjugates the scenario's `A` by a planted `u₀ ∈ C′ ∩ D` with
/// `‖u₀ − I‖ = eps` and runs the perturbation pipeline on `(A, u₀Au₀*)`.
pub fn run_recover(name: &str, eps: f64, seed: u64, tol: f64, timings: bool) -> DriverResult<RecoverReport> {
    let s = lookup(name)?;
    let u0 = s.planted_unitary(eps, seed)?;
    let b = s.a.conjugate(&u0);
    let e_cd = s.expectation();
    let config = PerturbConfig { samples: SAMPLES, seed };

    let mut marks: Vec<(&'static str, Instant)> = Vec::new();
    let r = perturb_with(&s.c, &s.d, &e_cd, &s.a, &b, &config, &mut |stage| marks.push((stage, Instant::now())))?;
    let timings = timings.then(|| {
        marks
            .windows(2)
            .map(|w| StageTiming { stage: w[0].0, millis: (w[1].1 - w[0].1).as_secs_f64() * 1e3 })
            .collect()
    });

    // u and u₀ agree on A, so u*u₀ commutes with A; measure how far u is from u₀ itself
    let recovered_vs_planted = (&r.unitary - &u0).op_norm();
    let bounds: Vec<BoundJson> = r.bounds.iter().map(BoundJson::from).collect();
    Ok(RecoverReport {
        scenario: s.name,
        eps,
        seed,
        tol,
        planted_distance: op_distance_to_identity(&u0),
        unitary: (&r.unitary).into(),
        n_quasi_basis: r.n_quasi_basis,
        gamma: r.gamma,
        within_gamma: r.within_gamma,
        distance: (&r.d_estimate).into(),
        d_upper_witness: r.d_upper_witness,
        delta: r.delta,
        s_distance: r.s_distance,
        psi: HomomorphismJson {
            mult_residual: r.psi.mult_residual(),
            unital_residual: r.psi.unital_residual(),
            fixes_c_residual: r.psi.fixes_c_residual(),
        },
        psi_bound: Pair { lhs: r.psi_bound_lhs, rhs: r.psi_bound_rhs },
        u_bound: Pair { lhs: r.u_bound_lhs, rhs: r.u_bound_rhs },
        conjugation_residual: r.conjugation_residual,
        u_commutes_with_c_residual: r.u_commutes_with_c_residual,
        u_in_cstar_residual: r.u_in_cstar_residual,
        unitary_residual: r.unitary_residual,
        recovered_vs_planted,
        bounds_hold: bounds.iter().all(|b| b.slack >= -tol),
        bounds,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditItemJson {
    pub name: &'static str,
    pub trials: usize,
    pub max_violation: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditJson {
    pub trials: usize,
    pub seed: u64,
    pub items: Vec<AuditItemJson>,
    pub max_violation: f64,
    pub passed: bool,
}

/// Every randomized estimate audit, `trials` times each.
pub fn run_audit(trials: usize, seed: u64) -> DriverResult<AuditJson> {
    let report = run_all(trials, seed)?;
    Ok(AuditJson {
        trials,
        seed,
        items: report
            .items
            .iter()
            .map(|i| AuditItemJson { name: i.name, trials: i.trials, max_violation: i.max_violation, max_ratio: i.max_ratio })
            .collect(),
        max_violation: report.max_violation(),
        passed: report.passes(AUDIT_TOL),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub scenario: &'static str,
    pub index: MatrixJson,
    pub expected_index: Option<f64>,
    /// `max |Index − expected·I|` entrywise.
    pub expected_deviation: Option<f64>,
    pub index_norm: f64,
    pub min_eigenvalue: f64,
    pub centrality_residual: f64,
    pub reconstruction_residual: f64,
    pub n_elements: usize,
}

/// Watatani index of `E_C^D` for a scenario.
pub fn run_index(name: &str) -> DriverResult<IndexReport> {
    let s = lookup(name)?;
    let qb = quasi_basis(&s.expectation())?;
    let expected_deviation =
        s.expected_index.map(|v| (qb.index() - &CMatrix::identity(s.n()).scale_re(v)).max_abs());
    Ok(IndexReport {
        scenario: s.name,
        index: qb.index().into(),
        expected_index: s.expected_index,
        expected_deviation,
        index_norm: qb.index_norm(),
        min_eigenvalue: qb.index_min_eigenvalue(),
        centrality_residual: qb.index_centrality_residual(),
        reconstruction_residual: qb.reconstruction_residual(),
        n_elements: qb.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiBasisReport {
    pub scenario: &'static str,
    /// `K`, the number of copies per element in the unit-ball rescale.
    pub rescale_factor: usize,
    pub frame_len: usize,
    pub quasi_basis: QuasiBasisJson,
    pub reconstruction_residual: f64,
    /// Smallest eigenvalue of `E(x*x) − ‖Index‖⁻¹x*x` over sampled `x`.
    pub pimsner_popa_margin: f64,
}

/// Unit-ball quasi-basis of `E_C^D` for a scenario.
pub fn run_quasi_basis(name: &str, seed: u64) -> DriverResult<QuasiBasisReport> {
    let s = lookup(name)?;
    let e = s.expectation();
    let qb = quasi_basis(&e)?;
    let unit = qb.unit_ball_rescale();
    Ok(QuasiBasisReport {
        scenario: s.name,
        rescale_factor: qb.rescale_factor(),
        frame_len: qb.len(),
        reconstruction_residual: unit.reconstruction_residual(),
        pimsner_popa_margin: pimsner_popa_audit(&e, &unit, SAMPLES, seed),
        quasi_basis: (&unit).into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub scenario: &'static str,
    pub eps: f64,
    pub seed: u64,
    pub planted_distance: f64,
    pub estimate: DistanceJson,
    pub jones_projections: [ModuleOperatorJson; 2],
}

/// Distance bracket between `A` and `u₀Au₀*`, tightened with `u₀` as witness.
pub fn run_distance(name: &str, eps: f64, seed: u64) -> DriverResult<DistanceReport> {
    let s = lookup(name)?;
    let u0 = s.planted_unitary(eps, seed)?;
    let b = s.a.conjugate(&u0);
    let e_cd = s.expectation();
    let module = LocalizedModule::localize(&e_cd)?;
    let e_a = izumi(&e_cd, &s.a)?;
    let e_b = izumi(&e_cd, &b)?;
    let est = distance_estimate(&s.a, &b, &module, &e_a, &e_b, SAMPLES, seed)?.with_witness(&s.a, &b, &u0)?;
    let p_a = module.jones_projection(&e_a)?;
    let p_b = module.jones_projection(&e_b)?;
    Ok(DistanceReport {
        scenario: s.name,
        eps,
        seed,
        planted_distance: op_distance_to_identity(&u0),
        estimate: (&est).into(),
        jones_projections: [ModuleOperatorJson::new(&module, &p_a), ModuleOperatorJson::new(&module, &p_b)],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttemptJson {
    pub i: usize,
    pub j: usize,
    pub jones_distance: f64,
    pub merged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorJson>,
    /// `‖u − I‖` of the witness unitary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterJson {
    pub scenario: &'static str,
    pub eps: f64,
    pub seed: u64,
    pub members: Vec<&'static str>,
    pub classes: Vec<Vec<usize>>,
    pub representative: Vec<usize>,
    pub jones_distances: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub formula_epsilon: f64,
    pub n_quasi_basis: usize,
    pub attempts: Vec<AttemptJson>,
}

/// Clusters `A`, `u₀Au₀*` and, when the scenario has one, its second
/// intermediate.
pub fn run_cluster(name: &str, eps: f64, seed: u64, threshold: Option<f64>) -> DriverResult<ClusterJson> {
    let s = lookup(name)?;
    let e_cd = s.expectation();
    let module = LocalizedModule::localize(&e_cd)?;
    let u0 = s.planted_unitary(eps, seed)?;
    let mut members = vec![("a", s.a.clone()), ("planted", s.a.conjugate(&u0))];
    if let Some(o) = &s.other {
        members.push(("other", o.clone()));
    }
    let list = members
        .iter()
        .map(|(_, alg)| Ok((alg.clone(), izumi(&e_cd, alg)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let config = ClusterConfig { threshold, perturb: PerturbConfig { samples: SAMPLES, seed } };
    let r = cluster_intermediates_with(&list, &module, &config)?;
    Ok(ClusterJson {
        scenario: s.name,
        eps,
        seed,
        members: members.iter().map(|(n, _)| *n).collect(),
        classes: r.classes,
        representative: r.representative,
        jones_distances: r.jones_distances,
        epsilon: r.epsilon,
        formula_epsilon: r.formula_epsilon,
        n_quasi_basis: r.n_quasi_basis,
        attempts: r
            .attempts
            .iter()
            .map(|a| AttemptJson {
                i: a.i,
                j: a.j,
                jones_distance: a.jones_distance,
                merged: a.outcome.is_ok(),
                error: a.outcome.as_ref().err().map(|e| DriverError::Core(e.clone()).to_json()),
                witness_distance: a.outcome.as_ref().ok().map(op_distance_to_identity),
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoJson {
    pub indices: Vec<IndexReport>,
    pub recover: RecoverReport,
    pub cluster: ClusterJson,
}

/// Index of a few scenarios, one recovery on the tower and one clustering.
pub fn run_demo(seed: u64, tol: f64) -> DriverResult<DemoJson> {
    let indices =
        ["scalars-in-M2", "diag-in-M3", "M2-in-M4"].iter().map(|n| run_index(n)).collect::<DriverResult<Vec<_>>>()?;
    Ok(DemoJson {
        indices,
        recover: run_recover("M2-in-M4-tower", 1e-3, seed, tol, false)?,
        cluster: run_cluster("M2-in-M4-tower", 1e-12, seed, None)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recover_on_tower() {
        let r = run_recover("M2-in-M4-tower", 1e-3, 42, 1e-9, false).unwrap();
        assert!(r.bounds_hold);
        assert!(r.conjugation_residual <= 1e-7);
        assert!((r.planted_distance - 1e-3).abs() < 1e-12);
        assert!(r.timings.is_none());
    }

    #[test]
    fn zero_eps_gives_identity() {
        let r = run_recover("M2-in-M4-tower", 0.0, 3, 1e-9, true).unwrap();
        assert!(r.conjugation_residual <= 1e-10);
        assert!(r.u_bound.lhs <= 1e-10);
        assert_eq!(r.timings.unwrap().len(), cstar_core::perturbation::STAGES.len());
    }

    #[test]
    fn large_eps_is_too_far() {
        let err = run_recover("M2-in-M4-tower", 1.9, 42, 1e-9, false).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
        assert_eq!(err.to_json().status, "too_far");
    }

    #[test]
    fn unknown_scenario_exits_one() {
        let err = run_index("nope").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("M2-in-M4"));
    }

    #[test]
    fn out_of_range_eps_exits_one() {
        assert_eq!(run_recover("M2-in-M4", 2.5, 0, 1e-9, false).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn index_report_matches_expected() {
        for s in scenario::catalog() {
            let r = run_index(s.name).unwrap();
            assert!(r.expected_deviation.unwrap() <= 1e-8, "{}", s.name);
        }
    }

    #[test]
    fn cluster_report_on_tower() {
        let r = run_cluster("M2-in-M4-tower", 1e-12, 1, None).unwrap();
        assert_eq!(r.classes, vec![vec![0, 1], vec![2]]);
        assert_eq!(r.members, vec!["a", "planted", "other"]);
    }

    #[test]
    fn distance_report_has_witness() {
        let r = run_distance("M2-in-M4-tower", 1e-4, 2).unwrap();
        assert!(r.estimate.upper <= 2e-4 + 1e-9);
        assert_eq!(r.jones_projections[0].module_sha256, r.jones_projections[1].module_sha256);
    }
}
