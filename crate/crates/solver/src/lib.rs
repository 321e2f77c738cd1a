//! Exponential integrators for periodic compressible, heat-conducting, and
//! incompressible flows. Stiff linear terms (acoustics, diffusion) are
//! advanced exactly per Fourier mode; nonlinear terms are assembled on the
//! dealiased grid and treated explicitly.

pub mod baro;
pub mod heat;
pub mod incomp;
pub mod nsf;
pub mod params;
pub mod propagator;
pub mod rescale;
pub mod theta;
