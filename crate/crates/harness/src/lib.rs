//! Experiment harness for the low Mach number limit: parameter window
//! checks, deterministic data generation, sweeps over the Mach number,
//! convergence-rate fits, and weak-limit diagnostics.

pub mod admissible;
pub mod data;
pub mod rates;
pub mod sweep;
pub mod weak;
