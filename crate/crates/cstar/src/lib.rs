//! Scenario catalog, experiment driver and JSON reports for [`cstar_core`].

pub mod driver;
pub mod json;
pub mod scenario;

pub use cstar_core;
