//! Pseudo-spectral toolkit for the low Mach number limit of compressible
//! flows on periodic boxes: dyadic frequency decompositions, scale-weighted
//! space-time norms, paraproduct calculus, stiff acoustic propagators, and a
//! harness that measures convergence rates across Mach number sweeps.

pub mod besov;
pub mod bony;
pub mod error;
pub mod exponent;
pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod lp;
pub mod ops;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use field::{lp_norm, SpectralField, VectorField};
pub use grid::{Grid, Measure};
