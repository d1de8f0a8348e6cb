//! Finite-dimensional toolkit for inclusions of C*-algebras realised inside `M_n`.
//!
//! The crate is organised bottom-up:
//!
//! - [`mat`]: dense complex matrices, Hermitian eigensolver, the elementary
//!   estimates (polar unitary, spectral window projection, projection
//!   intertwiner) and seeded random generators.
//! - [`algebra`]: unital *-subalgebras of `M_n` stored as Hilbert–Schmidt
//!   orthonormal bases; generation, membership, relative commutants, centres.
//! - [`expectation`]: conditional expectations, quasi-bases, Watatani index,
//!   Izumi's formula for compatible expectations, Pimsner–Popa audits.
//! - [`basic`]: the localized Hilbert module, left multiplication `λ`, Jones
//!   projections, the basic construction and its dual expectation.
//! - [`perturbation`]: distance estimates between subalgebras, the close
//!   homomorphism, the intertwining unitary, the full conjugation pipeline and
//!   clustering of intermediate subalgebras by Jones projections.
//! - [`audit`]: randomized verification of the standalone norm estimates.
//!
//! Everything is `no_std` with `alloc`; all values are immutable once built
//! and every operation is a pure function of its inputs (and seed).

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod audit;
pub mod basic;
pub mod error;
pub mod expectation;
pub mod mat;
pub mod perturbation;

pub use algebra::Subalgebra;
pub use basic::{LocalizedModule, ModuleOperator};
pub use error::{Error, Result, Stage};
pub use expectation::{CondExpectation, QuasiBasis};
pub use mat::{CMatrix, C64};
pub use perturbation::{DistanceEstimate, HomomorphismMap, LinearMap, PerturbationReport};

