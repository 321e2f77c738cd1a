use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Two fields or operators live on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A constructor or configuration value failed validation.
    #[error("invalid {what}: {why}")]
    Validation { what: String, why: String },

    /// An operation required a mean-free field but the zero mode is populated.
    #[error("zero mode not annihilated: |c(0)| = {magnitude:.3e} in {op}")]
    ZeroMode { op: &'static str, magnitude: f64 },

    /// A Fourier symbol evaluated to a non-finite value at a resolved frequency.
    #[error("symbol returned non-finite value at xi = {xi:?}")]
    BadSymbol { xi: Vec<f64> },

    /// Trajectory times are not strictly increasing, or a sample is missing.
    #[error("bad time axis: {0}")]
    TimeAxis(String),

    /// Pointwise composition was asked to evaluate outside its validity interval.
    /// For the coefficient functions this is the amplitude bound max |z| <= 1/2.
    #[error("composition argument out of range: max |a| = {max_abs:.6} exceeds [{lo}, {hi}]")]
    OutOfRange { max_abs: f64, lo: f64, hi: f64 },

    /// The discrete solution left the hyperbolic regime (1 + eps*a must stay positive).
    #[error("blow-up at t = {t:.6}: max |eps*a| = {max_eps_a:.6}, min(1 + eps*a) = {min_density:.6}")]
    BlowUp {
        t: f64,
        max_eps_a: f64,
        min_density: f64,
    },

    /// Advective Courant number exceeded the configured bound.
    #[error("Courant bound violated at t = {t:.6}: dt*speed*k_max = {number:.3} > {limit:.3}")]
    Courant { t: f64, number: f64, limit: f64 },

    /// A divergence-free evolution drifted off the solenoidal subspace.
    #[error("projection failure at t = {t:.6}: relative divergence {drift:.3e}")]
    Projection { t: f64, drift: f64 },

    /// A rescaling would move modes off the target wavevector lattice.
    #[error("lattice mismatch in rescaling: {0}")]
    Lattice(String),

    /// A fit or diagnostic had no usable signal (all values ~ 0 or non-finite).
    #[error("degenerate measurement: {0}")]
    DegenerateSignal(String),

    /// Exponent/dimension combination outside the admissible set.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    /// Binary checkpoint or manifest could not be decoded.
    #[error("format error in {path}: {why}")]
    Format { path: String, why: String },

    /// A multi-run experiment stopped partway; completed runs are listed so
    /// partial results can still be located.
    #[error("sweep aborted at eps = {eps}: {source} (completed eps: {completed:?})")]
    SweepAborted {
        eps: f64,
        completed: Vec<f64>,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(what: impl Into<String>, why: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            why: why.into(),
        }
    }
}
