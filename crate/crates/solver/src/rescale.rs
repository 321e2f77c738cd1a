//! Change of variables between the physical regime (eps, nu) and the
//! reference regime eps = nu = 1: fields gain a factor eps and move to the
//! box enlarged by 1/(eps*nu) with their integer wavevectors unchanged,
//! times divide by eps^2*nu, and every transport coefficient divides by nu.
//! The map is an exact relabeling, so it composes with the steppers without
//! discretization error.

use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;

use crate::baro::{BaroRun, BaroState};
use crate::nsf::{NsfRun, NsfState};
use crate::params::PhysicalParams;

/// Slack for deciding that a lattice ratio is an integer.
const RELABEL_SLACK: f64 = 1e-9;

fn check_pair(eps: f64, nu: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::validation("eps", format!("must be positive and finite, got {eps}")));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::validation("nu", format!("must be positive and finite, got {nu}")));
    }
    Ok(())
}

/// Coefficients seen by the reference system: unit Mach number and every
/// transport coefficient divided by the total viscosity, so the reference
/// total viscosity is exactly one.
pub fn reference_params(params: &PhysicalParams) -> Result<PhysicalParams> {
    params.validate()?;
    let nu = params.nu();
    let out = PhysicalParams {
        eps: 1.0,
        lambda: params.lambda / nu,
        mu: params.mu / nu,
        kappa: params.kappa.map(|k| k / nu),
        pressure: params.pressure,
    };
    out.validate()?;
    Ok(out)
}

/// Physical coefficients at (eps, nu) recovered from reference ones.
pub fn physical_params(reference: &PhysicalParams, eps: f64, nu: f64) -> Result<PhysicalParams> {
    reference.validate()?;
    check_pair(eps, nu)?;
    if (reference.nu() - 1.0).abs() > 1e-12 {
        return Err(Error::validation(
            "reference",
            format!("reference coefficients must have unit total viscosity, got {}", reference.nu()),
        ));
    }
    let out = PhysicalParams {
        eps,
        lambda: nu * reference.lambda,
        mu: nu * reference.mu,
        kappa: reference.kappa.map(|k| nu * k),
        pressure: reference.pressure,
    };
    out.validate()?;
    Ok(out)
}

/// eps * z(eps*nu*x): the same coefficients times eps, reinterpreted on the
/// box of side l/(eps*nu).
pub fn rescale_field(z: &SpectralField, eps: f64, nu: f64) -> Result<SpectralField> {
    check_pair(eps, nu)?;
    Ok(z.dilated(eps * nu)?.scaled(eps))
}

/// Inverse of `rescale_field`: (1/eps) * z(x/(eps*nu)) on the box of side
/// l*(eps*nu).
pub fn unscale_field(z: &SpectralField, eps: f64, nu: f64) -> Result<SpectralField> {
    check_pair(eps, nu)?;
    Ok(z.dilated(1.0 / (eps * nu))?.scaled(1.0 / eps))
}

pub fn rescale_vector(u: &VectorField, eps: f64, nu: f64) -> Result<VectorField> {
    let comps: Result<Vec<SpectralField>> =
        u.comps().iter().map(|c| rescale_field(c, eps, nu)).collect();
    VectorField::new(comps?)
}

pub fn unscale_vector(u: &VectorField, eps: f64, nu: f64) -> Result<VectorField> {
    let comps: Result<Vec<SpectralField>> =
        u.comps().iter().map(|c| unscale_field(c, eps, nu)).collect();
    VectorField::new(comps?)
}

/// Reference time of a physical time.
pub fn rescale_time(t: f64, eps: f64, nu: f64) -> f64 {
    t / (eps * eps * nu)
}

/// Physical time of a reference time.
pub fn unscale_time(t: f64, eps: f64, nu: f64) -> f64 {
    t * eps * eps * nu
}

/// Relabel a field onto a prescribed target lattice. The source mode k at
/// frequency k/L lands at frequency eps*nu*k/L, which must be an integer
/// wavevector of the target grid: eps*nu*L_target/L_source has to be a
/// positive integer m, and each populated mode m*k must stay resolvable.
pub fn rescale_field_to(
    z: &SpectralField,
    eps: f64,
    nu: f64,
    target: &Grid,
) -> Result<SpectralField> {
    check_pair(eps, nu)?;
    let src = z.grid();
    if src.d() != target.d() {
        return Err(Error::validation("target", "dimension mismatch with the source grid"));
    }
    let ratio = eps * nu * target.l() / src.l();
    let m = ratio.round();
    if !ratio.is_finite() || m < 1.0 || (ratio - m).abs() > RELABEL_SLACK {
        let base = src.l() / target.l();
        return Err(Error::Lattice(format!(
            "eps*nu = {} does not map the box-{} lattice onto the box-{} lattice; \
             admissible eps*nu values are m*{base} for positive integers m: \
             {}, {}, {}, ...",
            eps * nu,
            src.l(),
            target.l(),
            base,
            2.0 * base,
            3.0 * base,
        )));
    }
    let m = m as i64;
    let d = src.d();
    let mut out = SpectralField::zeros(*target);
    for flat in 0..src.modes() {
        let c = z.coeffs()[flat];
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let k = src.wavevector(flat);
        let relabeled: Vec<i64> = k[..d].iter().map(|x| m * x).collect();
        let Ok(tflat) = target.flat_index(&relabeled) else {
            return Err(Error::Lattice(format!(
                "mode {:?} relabels to {relabeled:?}, outside the target resolution N = {}",
                &k[..d],
                target.n(),
            )));
        };
        out.coeffs_mut()[tflat] = c * eps;
    }
    Ok(out)
}

/// Reference-regime view of a physical barotropic state; the scaling pair
/// is read off the state's own coefficients.
pub fn rescale_baro_state(state: &BaroState) -> Result<BaroState> {
    let (eps, nu) = (state.params.eps, state.params.nu());
    BaroState::new(
        rescale_time(state.t, eps, nu),
        rescale_field(&state.a, eps, nu)?,
        rescale_vector(&state.u, eps, nu)?,
        reference_params(&state.params)?,
    )
}

/// Physical state at (eps, nu) built from a reference barotropic state.
pub fn unscale_baro_state(state: &BaroState, eps: f64, nu: f64) -> Result<BaroState> {
    BaroState::new(
        unscale_time(state.t, eps, nu),
        unscale_field(&state.a, eps, nu)?,
        unscale_vector(&state.u, eps, nu)?,
        physical_params(&state.params, eps, nu)?,
    )
}

/// Reference-regime view of a physical conducting state; the temperature
/// transforms exactly like the density.
pub fn rescale_nsf_state(state: &NsfState) -> Result<NsfState> {
    let (eps, nu) = (state.params.eps, state.params.nu());
    NsfState::new(
        rescale_time(state.t, eps, nu),
        rescale_field(&state.a, eps, nu)?,
        rescale_vector(&state.u, eps, nu)?,
        rescale_field(&state.theta, eps, nu)?,
        reference_params(&state.params)?,
    )
}

/// Physical conducting state at (eps, nu) built from a reference one.
pub fn unscale_nsf_state(state: &NsfState, eps: f64, nu: f64) -> Result<NsfState> {
    NsfState::new(
        unscale_time(state.t, eps, nu),
        unscale_field(&state.a, eps, nu)?,
        unscale_vector(&state.u, eps, nu)?,
        unscale_field(&state.theta, eps, nu)?,
        physical_params(&state.params, eps, nu)?,
    )
}

/// Reference-regime view of a whole barotropic run.
pub fn rescale_solution(run: &BaroRun) -> Result<BaroRun> {
    let snapshots: Result<Vec<BaroState>> =
        run.snapshots.iter().map(rescale_baro_state).collect();
    Ok(BaroRun { snapshots: snapshots? })
}

/// Reference-regime view of a whole conducting run.
pub fn rescale_nsf_solution(run: &NsfRun) -> Result<NsfRun> {
    let snapshots: Result<Vec<NsfState>> = run.snapshots.iter().map(rescale_nsf_state).collect();
    Ok(NsfRun { snapshots: snapshots? })
}
