//! Distance estimates between subalgebras and the construction of a unitary
//! conjugating one intermediate subalgebra onto a nearby one.

mod close;
mod cluster;
mod distance;
mod maps;
mod pipeline;

pub use close::{close_homomorphism, induced_quasi_basis, intertwining_unitary, CloseHomomorphism, Intertwiner, READBACK_TOL};
pub use cluster::{cluster_intermediates, cluster_intermediates_with, ClusterConfig, ClusterReport, PairAttempt};
pub use distance::{
    distance_estimate, expectation_vs_inclusion, jones_distance_check, multiplicativity_defect, BoundCheck,
    DistanceEstimate, DistanceNotes,
};
pub use maps::{trace_norm, HomomorphismMap, LinearMap, MapNorm, DEFAULT_NORM_SAMPLES, FIXES_C_TOL, MULT_TOL, UNITAL_TOL};
pub use pipeline::{gamma_threshold, perturb, perturb_with, PerturbConfig, PerturbationReport, CONJUGATION_TOL, STAGES};
