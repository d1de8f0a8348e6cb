//! Grouping intermediate subalgebras into unitary-equivalence classes.

use alloc::vec;
use alloc::vec::Vec;

use super::pipeline::{perturb_with, PerturbConfig};
use crate::algebra::Subalgebra;
use crate::basic::{LocalizedModule, ModuleOperator};
use crate::error::{Error, Result};
use crate::expectation::{quasi_basis, CondExpectation};
use crate::mat::CMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClusterConfig {
    /// Replaces the Jones-distance threshold `ε = (2(10N)⁴‖Index E_C^D‖)⁻¹`.
    pub threshold: Option<f64>,
    pub perturb: PerturbConfig,
}

/// A pair that was close enough to attempt a conjugation.
#[derive(Clone, Debug)]
pub struct PairAttempt {
    pub i: usize,
    pub j: usize,
    pub jones_distance: f64,
    /// The unitary `u` with `u A_i u* = A_j`, or why it was not found.
    pub outcome: core::result::Result<CMatrix, Error>,
}

#[derive(Clone, Debug)]
pub struct ClusterReport {
    /// Classes in order of their smallest member.
    pub classes: Vec<Vec<usize>>,
    /// Class representative (smallest index) of each entry.
    pub representative: Vec<usize>,
    /// `‖e_i − e_j‖`; `NaN` where a Jones projection could not be formed.
    pub jones_distances: Vec<Vec<f64>>,
    /// The threshold in force.
    pub epsilon: f64,
    /// `(2(10N)⁴‖Index E_C^D‖)⁻¹`.
    pub formula_epsilon: f64,
    pub n_quasi_basis: usize,
    pub attempts: Vec<PairAttempt>,
    /// Entries whose Jones projection failed; they stay in singleton classes.
    pub entry_errors: Vec<(usize, Error)>,
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn union(parent: &mut [usize], x: usize, y: usize) {
    let (rx, ry) = (find(parent, x), find(parent, y));
    let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
    parent[hi] = lo;
}

pub fn cluster_intermediates(list: &[(Subalgebra, CondExpectation)], module: &LocalizedModule) -> Result<ClusterReport> {
    cluster_intermediates_with(list, module, &ClusterConfig::default())
}

/// Partitions `list` by attempting [`perturb`](super::perturb) on every pair
/// whose Jones projections are within the threshold.
///
/// Per-pair failures are recorded and never abort the clustering.
pub fn cluster_intermediates_with(
    list: &[(Subalgebra, CondExpectation)],
    module: &LocalizedModule,
    config: &ClusterConfig,
) -> Result<ClusterReport> {
    let e_cd = module.base_expectation();
    let c = e_cd.target();
    let d = module.ambient();
    let qb = quasi_basis(e_cd)?;
    let n_quasi_basis = qb.unit_ball_rescale().len();
    let x = 10.0 * n_quasi_basis as f64;
    let formula_epsilon = 1.0 / (2.0 * x * x * x * x * qb.index_norm());
    let epsilon = config.threshold.unwrap_or(formula_epsilon);

    let mut entry_errors = Vec::new();
    let projections: Vec<Option<ModuleOperator>> = list
        .iter()
        .enumerate()
        .map(|(i, (_, e))| match module.jones_projection(e) {
            Ok(p) => Some(p),
            Err(err) => {
                entry_errors.push((i, err));
                None
            }
        })
        .collect();

    let n = list.len();
    let mut jones_distances = vec![vec![f64::NAN; n]; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut attempts = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (Some(pi), Some(pj)) = (&projections[i], &projections[j]) else { continue };
            let dist = (pi - pj).op_norm();
            jones_distances[i][j] = dist;
            jones_distances[j][i] = dist;
            if i == j || dist >= epsilon {
                continue;
            }
            let outcome = perturb_with(c, d, e_cd, &list[i].0, &list[j].0, &config.perturb, &mut |_| {})
                .map(|report| report.unitary);
            if outcome.is_ok() {
                union(&mut parent, i, j);
            }
            attempts.push(PairAttempt { i, j, jones_distance: dist, outcome });
        }
    }
    let representative: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if representative[i] == i {
            classes.push((i..n).filter(|&k| representative[k] == i).collect());
        }
    }
    Ok(ClusterReport {
        classes,
        representative,
        jones_distances,
        epsilon,
        formula_epsilon,
        n_quasi_basis,
        attempts,
        entry_errors,
    })
}
