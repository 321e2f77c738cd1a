//! Stepping the barotropic perturbation system: density excess and velocity
//! with singular acoustic coupling. The exact mode propagator absorbs every
//! stiff term; only genuinely nonlinear terms are explicit, assembled in one
//! pass over the dealiased grid.

use crate::params::{PhysicalParams, Scheme, StepperConfig, ViscousAssembly};
use crate::propagator::BaroPropagator;
use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_core::ops;

/// Perturbation state: density excess a (so the density is 1 + eps*a),
/// velocity u, at time t.
#[derive(Clone, Debug)]
pub struct BaroState {
    pub t: f64,
    pub a: SpectralField,
    pub u: VectorField,
    pub params: PhysicalParams,
}

impl BaroState {
    pub fn new(t: f64, a: SpectralField, u: VectorField, params: PhysicalParams) -> Result<BaroState> {
        params.validate()?;
        a.grid().same_layout(u.grid(), "state")?;
        Ok(BaroState { t, a, u, params })
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }
}

/// Pointwise state of one step's nonlinearity assembly, used for the
/// positivity and advection guards.
pub(crate) struct StepDiagnostics {
    pub min_density: f64,
    pub max_eps_a: f64,
    pub max_speed: f64,
    pub finite: bool,
}

impl StepDiagnostics {
    pub(crate) fn guard(&self, t: f64, dt: f64, xi_max: f64, courant_limit: f64) -> Result<()> {
        if !self.finite || !(self.min_density > 0.0) {
            return Err(Error::BlowUp {
                t,
                max_eps_a: self.max_eps_a,
                min_density: self.min_density,
            });
        }
        let number = dt * self.max_speed * xi_max;
        if number > courant_limit {
            return Err(Error::Courant { t, number, limit: courant_limit });
        }
        Ok(())
    }
}

/// Velocity data shared by the velocity-equation nonlinearities: padded
/// values of the components, their gradients, and the constant-coefficient
/// viscous operator mu*Lap(u) + (lambda+mu)*grad(div u).
pub(crate) struct PaddedVelocity {
    pub vals: Vec<Vec<f64>>,
    /// grads[i][j] holds values of d_j u_i
    pub grads: Vec<Vec<Vec<f64>>>,
    pub visc: Vec<Vec<f64>>,
    pub max_speed: f64,
}

pub(crate) fn pad_velocity(u: &VectorField, params: &PhysicalParams) -> PaddedVelocity {
    let d = u.grid().d();
    let vals: Vec<Vec<f64>> = (0..d).map(|i| u.comp(i).to_padded()).collect();
    let grads: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|i| {
            let g = ops::gradient(u.comp(i));
            (0..d).map(|j| g.comp(j).to_padded()).collect()
        })
        .collect();
    let grad_div = ops::gradient(&ops::divergence(u));
    let visc: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut f = ops::laplacian(u.comp(i)).scaled(params.mu);
            f.add_assign_scaled(grad_div.comp(i), params.lambda + params.mu);
            f.to_padded()
        })
        .collect();
    let mut max_speed: f64 = 0.0;
    for p in 0..vals[0].len() {
        let s2: f64 = vals.iter().map(|v| v[p] * v[p]).sum();
        max_speed = max_speed.max(s2);
    }
    PaddedVelocity { vals, grads, visc, max_speed: max_speed.sqrt() }
}

pub(crate) fn density_diagnostics(a_vals: &[f64], eps: f64, max_speed: f64) -> StepDiagnostics {
    let mut min_density = f64::INFINITY;
    let mut max_eps_a: f64 = 0.0;
    let mut finite = max_speed.is_finite();
    for &v in a_vals {
        if !v.is_finite() {
            finite = false;
        }
        let z = eps * v;
        min_density = min_density.min(1.0 + z);
        max_eps_a = max_eps_a.max(z.abs());
    }
    StepDiagnostics { min_density, max_eps_a, max_speed, finite }
}

/// Variable-coefficient viscous factor: J(z) = z/(1+z), or the literal
/// 1 - 1/(1+z) on the cross-check route.
pub(crate) fn viscous_factor(z: f64, route: ViscousAssembly) -> f64 {
    match route {
        ViscousAssembly::ViaJ => z / (1.0 + z),
        ViscousAssembly::ViaReciprocal => 1.0 - 1.0 / (1.0 + z),
    }
}

/// Nonlinear right-hand side of the perturbation system: the mass equation
/// keeps -div(a u), the velocity equation keeps advection, the density
/// dependence of the viscous term, and the pressure-law correction.
fn nonlinearity(
    a: &SpectralField,
    u: &VectorField,
    params: &PhysicalParams,
    route: ViscousAssembly,
) -> Result<(SpectralField, VectorField, StepDiagnostics)> {
    let grid = *a.grid();
    let d = grid.d();
    let a_vals = a.to_padded();
    let vel = pad_velocity(u, params);
    let grad_a: Vec<Vec<f64>> = {
        let g = ops::gradient(a);
        (0..d).map(|i| g.comp(i).to_padded()).collect()
    };
    let diag = density_diagnostics(&a_vals, params.eps, vel.max_speed);
    if !diag.finite || !(diag.min_density > 0.0) {
        // caller attaches the time stamp via guard()
        return Ok((SpectralField::zeros(grid), VectorField::zeros(grid), diag));
    }

    let points = a_vals.len();
    let mut mass_flux: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    let mut momentum: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    for p in 0..points {
        let av = a_vals[p];
        let z = params.eps * av;
        let jv = viscous_factor(z, route);
        let kv = params.pressure.k(z) / params.eps;
        for i in 0..d {
            mass_flux[i][p] = av * vel.vals[i][p];
            let advect: f64 = (0..d).map(|j| vel.vals[j][p] * vel.grads[i][j][p]).sum();
            momentum[i][p] = -advect - jv * vel.visc[i][p] + kv * grad_a[i][p];
        }
    }

    let flux_fields: Result<Vec<SpectralField>> =
        mass_flux.iter().map(|v| SpectralField::from_padded(grid, v)).collect();
    let na = ops::divergence(&VectorField::new(flux_fields?)?).scaled(-1.0);
    let nu_fields: Result<Vec<SpectralField>> =
        momentum.iter().map(|v| SpectralField::from_padded(grid, v)).collect();
    Ok((na, VectorField::new(nu_fields?)?, diag))
}

/// Reusable stepper holding the exact propagators for dt and dt/2.
pub struct BaroStepper {
    params: PhysicalParams,
    cfg: StepperConfig,
    full: BaroPropagator,
    half: BaroPropagator,
    xi_max: f64,
}

impl BaroStepper {
    pub fn new(grid: &Grid, params: PhysicalParams, cfg: &StepperConfig) -> Result<BaroStepper> {
        cfg.validate()?;
        let full = BaroPropagator::new(grid, &params, cfg.dt)?;
        let half = BaroPropagator::new(grid, &params, 0.5 * cfg.dt)?;
        Ok(BaroStepper { params, cfg: *cfg, full, half, xi_max: grid.xi_max() })
    }

    /// One exponential-IMEX step; advances t by cfg.dt.
    pub fn step(&self, state: &BaroState) -> Result<BaroState> {
        if state.params != self.params {
            return Err(Error::validation("params", "stepper was built for different parameters"));
        }
        let dt = self.cfg.dt;
        if self.cfg.linear_only {
            let (a, u) = self.full.apply(&state.a, &state.u)?;
            return Ok(BaroState { t: state.t + dt, a, u, params: state.params });
        }
        let (na0, nu0, diag) = nonlinearity(&state.a, &state.u, &self.params, self.cfg.viscous)?;
        diag.guard(state.t, dt, self.xi_max, self.cfg.courant_limit)?;
        let (a1, u1) = match self.cfg.scheme {
            Scheme::Order1 => {
                let mut a = state.a.clone();
                a.add_assign_scaled(&na0, dt);
                let mut u = state.u.clone();
                u.add_assign_scaled(&nu0, dt);
                self.full.apply(&a, &u)?
            }
            Scheme::Order2 => {
                let mut ap = state.a.clone();
                ap.add_assign_scaled(&na0, 0.5 * dt);
                let mut up = state.u.clone();
                up.add_assign_scaled(&nu0, 0.5 * dt);
                let (am, um) = self.half.apply(&ap, &up)?;
                let (nam, num, mid) = nonlinearity(&am, &um, &self.params, self.cfg.viscous)?;
                mid.guard(state.t + 0.5 * dt, dt, self.xi_max, self.cfg.courant_limit)?;
                let (pna, pnu) = self.half.apply(&nam, &num)?;
                let (mut a, mut u) = self.full.apply(&state.a, &state.u)?;
                a.add_assign_scaled(&pna, dt);
                u.add_assign_scaled(&pnu, dt);
                (a, u)
            }
        };
        Ok(BaroState { t: state.t + dt, a: a1, u: u1, params: state.params })
    }
}

/// Single-step convenience wrapper; long runs should hold a BaroStepper.
pub fn step_baro(state: &BaroState, cfg: &StepperConfig) -> Result<BaroState> {
    BaroStepper::new(state.grid(), state.params, cfg)?.step(state)
}

/// A run's recorded snapshots, always including the initial and final states.
#[derive(Clone, Debug)]
pub struct BaroRun {
    pub snapshots: Vec<BaroState>,
}

impl BaroRun {
    pub fn last(&self) -> &BaroState {
        self.snapshots.last().expect("runs record at least the initial state")
    }
}

/// Integrate `steps` steps, recording every cfg.snapshot_every-th state
/// (0 records only the endpoints).
pub fn run_baro(initial: BaroState, cfg: &StepperConfig, steps: usize) -> Result<BaroRun> {
    let stepper = BaroStepper::new(initial.grid(), initial.params, cfg)?;
    let mut snapshots = vec![initial.clone()];
    let mut cur = initial;
    for s in 1..=steps {
        cur = stepper.step(&cur)?;
        let due = cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0;
        if due || s == steps {
            snapshots.push(cur.clone());
        }
    }
    Ok(BaroRun { snapshots })
}

/// Gradient-part velocity corrected by the inverse Laplacian of the density
/// gradient: w = Qu - Lap^{-1} grad a, so that Lap w = Lap Qu - grad a. Its
/// linearized evolution is purely parabolic, with no acoustic oscillation.
pub fn effective_velocity(state: &BaroState) -> Result<VectorField> {
    let q = ops::project_q(&state.u);
    let grad_a = ops::gradient(&state.a);
    let d = state.grid().d();
    let comps: Result<Vec<SpectralField>> = (0..d)
        .map(|i| q.comp(i).sub(&ops::inv_laplacian(grad_a.comp(i))?))
        .collect();
    VectorField::new(comps?)
}
