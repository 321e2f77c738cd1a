//! Stepping the heat-conducting compressible system: density excess a,
//! velocity u, and temperature excess theta. The singular coupling now runs
//! through the combination a + theta, so the exact mode propagator is the
//! 3x3 conducting block; nonlinear terms including the viscous dissipation
//! source are explicit and dealiased.

use crate::baro::{density_diagnostics, pad_velocity, viscous_factor, BaroState, StepDiagnostics};
use crate::params::{PhysicalParams, Scheme, StepperConfig};
use crate::propagator::{BaroPropagator, ConductingPropagator};
use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_core::ops;

/// Heat-conducting perturbation state.
#[derive(Clone, Debug)]
pub struct NsfState {
    pub t: f64,
    pub a: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
    pub params: PhysicalParams,
}

impl NsfState {
    pub fn new(
        t: f64,
        a: SpectralField,
        u: VectorField,
        theta: SpectralField,
        params: PhysicalParams,
    ) -> Result<NsfState> {
        params.validate()?;
        if params.kappa.is_none() {
            return Err(Error::validation("kappa", "heat-conducting state needs a conduction coefficient"));
        }
        a.grid().same_layout(u.grid(), "state")?;
        a.grid().same_layout(theta.grid(), "state")?;
        Ok(NsfState { t, a, u, theta, params })
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    /// The combination theta + a that forces the acoustic coupling.
    pub fn pressure_combination(&self) -> Result<SpectralField> {
        self.theta.add(&self.a)
    }

    /// The combination theta - a transported by the flow in the limit.
    pub fn transported_combination(&self) -> Result<SpectralField> {
        self.theta.sub(&self.a)
    }
}

/// Stepper configuration plus the flags specific to the conducting system.
#[derive(Clone, Copy, Debug)]
pub struct NsfConfig {
    pub stepper: StepperConfig,
    /// Keep theta identically zero and use the isothermal acoustic block;
    /// the system then degenerates to the barotropic one.
    pub theta_frozen: bool,
    /// Include the viscous dissipation source in the temperature equation.
    pub dissipation_heating: bool,
}

impl NsfConfig {
    pub fn new(dt: f64) -> Result<NsfConfig> {
        Ok(NsfConfig {
            stepper: StepperConfig::new(dt)?,
            theta_frozen: false,
            dissipation_heating: true,
        })
    }

    pub fn with_stepper(mut self, stepper: StepperConfig) -> NsfConfig {
        self.stepper = stepper;
        self
    }

    pub fn with_theta_frozen(mut self, frozen: bool) -> NsfConfig {
        self.theta_frozen = frozen;
        self
    }

    pub fn with_dissipation_heating(mut self, heating: bool) -> NsfConfig {
        self.dissipation_heating = heating;
        self
    }
}

enum LinearPart {
    Conducting { full: ConductingPropagator, half: ConductingPropagator },
    Frozen { full: BaroPropagator, half: BaroPropagator },
}

/// Nonlinear right-hand sides of the conducting system.
fn nonlinearity(
    state_a: &SpectralField,
    u: &VectorField,
    theta: &SpectralField,
    params: &PhysicalParams,
    cfg: &NsfConfig,
) -> Result<(SpectralField, VectorField, SpectralField, StepDiagnostics)> {
    let grid = *state_a.grid();
    let d = grid.d();
    let kappa = params.kappa.expect("state construction requires kappa");
    let a_vals = state_a.to_padded();
    let theta_vals = theta.to_padded();
    let vel = pad_velocity(u, params);
    let grad_a: Vec<Vec<f64>> = {
        let g = ops::gradient(state_a);
        (0..d).map(|i| g.comp(i).to_padded()).collect()
    };
    let grad_theta: Vec<Vec<f64>> = {
        let g = ops::gradient(theta);
        (0..d).map(|i| g.comp(i).to_padded()).collect()
    };
    let lap_theta = ops::laplacian(theta).to_padded();

    let mut diag = density_diagnostics(&a_vals, params.eps, vel.max_speed);
    if theta_vals.iter().any(|v| !v.is_finite()) {
        diag.finite = false;
    }
    if !diag.finite || !(diag.min_density > 0.0) {
        let zeros = SpectralField::zeros(grid);
        return Ok((zeros.clone(), VectorField::zeros(grid), zeros, diag));
    }

    let points = a_vals.len();
    let mut mass_flux: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    let mut heat_flux: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    let mut momentum: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    let mut heat_local: Vec<f64> = vec![0.0; points];
    for p in 0..points {
        let av = a_vals[p];
        let tv = theta_vals[p];
        let z = params.eps * av;
        let dens = 1.0 + z;
        let jv = viscous_factor(z, cfg.stepper.viscous);
        let a_over = av / dens;
        for i in 0..d {
            mass_flux[i][p] = av * vel.vals[i][p];
            heat_flux[i][p] = tv * vel.vals[i][p];
            let advect: f64 = (0..d).map(|j| vel.vals[j][p] * vel.grads[i][j][p]).sum();
            let grad_prod = av * grad_theta[i][p] + tv * grad_a[i][p];
            momentum[i][p] = -advect - jv * vel.visc[i][p]
                + a_over * (grad_a[i][p] + grad_theta[i][p])
                - (1.0 - jv) * grad_prod;
        }
        let mut source = 0.0;
        if cfg.dissipation_heating {
            let mut deform2 = 0.0;
            let mut div = 0.0;
            for i in 0..d {
                div += vel.grads[i][i][p];
                for j in 0..d {
                    let dij = 0.5 * (vel.grads[i][j][p] + vel.grads[j][i][p]);
                    deform2 += dij * dij;
                }
            }
            source = params.eps * (1.0 - jv) * (2.0 * params.mu * deform2 + params.lambda * div * div);
        }
        heat_local[p] = -jv * kappa * lap_theta[p] + source;
    }

    let collect = |vals: &[Vec<f64>]| -> Result<VectorField> {
        let fields: Result<Vec<SpectralField>> =
            vals.iter().map(|v| SpectralField::from_padded(grid, v)).collect();
        VectorField::new(fields?)
    };
    let na = ops::divergence(&collect(&mass_flux)?).scaled(-1.0);
    let nu = collect(&momentum)?;
    let mut ntheta = ops::divergence(&collect(&heat_flux)?).scaled(-1.0);
    ntheta = ntheta.add(&SpectralField::from_padded(grid, &heat_local)?)?;
    Ok((na, nu, ntheta, diag))
}

/// Reusable stepper holding the exact propagators for dt and dt/2.
pub struct NsfStepper {
    params: PhysicalParams,
    cfg: NsfConfig,
    linear: LinearPart,
    xi_max: f64,
}

impl NsfStepper {
    pub fn new(grid: &Grid, params: PhysicalParams, cfg: &NsfConfig) -> Result<NsfStepper> {
        cfg.stepper.validate()?;
        let dt = cfg.stepper.dt;
        let linear = if cfg.theta_frozen {
            LinearPart::Frozen {
                full: BaroPropagator::new(grid, &params, dt)?,
                half: BaroPropagator::new(grid, &params, 0.5 * dt)?,
            }
        } else {
            LinearPart::Conducting {
                full: ConductingPropagator::new(grid, &params, dt)?,
                half: ConductingPropagator::new(grid, &params, 0.5 * dt)?,
            }
        };
        Ok(NsfStepper { params, cfg: *cfg, linear, xi_max: grid.xi_max() })
    }

    fn propagate(
        &self,
        half: bool,
        a: &SpectralField,
        u: &VectorField,
        theta: &SpectralField,
    ) -> Result<(SpectralField, VectorField, SpectralField)> {
        match &self.linear {
            LinearPart::Conducting { full, half: h } => {
                let p = if half { h } else { full };
                p.apply(a, u, theta)
            }
            LinearPart::Frozen { full, half: h } => {
                let p = if half { h } else { full };
                let (a1, u1) = p.apply(a, u)?;
                Ok((a1, u1, theta.clone()))
            }
        }
    }

    pub fn step(&self, state: &NsfState) -> Result<NsfState> {
        if state.params != self.params {
            return Err(Error::validation("params", "stepper was built for different parameters"));
        }
        let dt = self.cfg.stepper.dt;
        if self.cfg.stepper.linear_only {
            let (a, u, theta) = self.propagate(false, &state.a, &state.u, &state.theta)?;
            return Ok(NsfState { t: state.t + dt, a, u, theta, params: state.params });
        }
        let (na0, nu0, nt0, diag) =
            nonlinearity(&state.a, &state.u, &state.theta, &self.params, &self.cfg)?;
        diag.guard(state.t, dt, self.xi_max, self.cfg.stepper.courant_limit)?;
        let frozen_theta = self.cfg.theta_frozen;
        let (a1, u1, t1) = match self.cfg.stepper.scheme {
            Scheme::Order1 => {
                let mut a = state.a.clone();
                a.add_assign_scaled(&na0, dt);
                let mut u = state.u.clone();
                u.add_assign_scaled(&nu0, dt);
                let mut th = state.theta.clone();
                if !frozen_theta {
                    th.add_assign_scaled(&nt0, dt);
                }
                self.propagate(false, &a, &u, &th)?
            }
            Scheme::Order2 => {
                let mut ap = state.a.clone();
                ap.add_assign_scaled(&na0, 0.5 * dt);
                let mut up = state.u.clone();
                up.add_assign_scaled(&nu0, 0.5 * dt);
                let mut tp = state.theta.clone();
                if !frozen_theta {
                    tp.add_assign_scaled(&nt0, 0.5 * dt);
                }
                let (am, um, tm) = self.propagate(true, &ap, &up, &tp)?;
                let (nam, num, ntm, mid) = nonlinearity(&am, &um, &tm, &self.params, &self.cfg)?;
                mid.guard(state.t + 0.5 * dt, dt, self.xi_max, self.cfg.stepper.courant_limit)?;
                let (pna, pnu, pnt) = self.propagate(true, &nam, &num, &ntm)?;
                let (mut a, mut u, mut th) = self.propagate(false, &state.a, &state.u, &state.theta)?;
                a.add_assign_scaled(&pna, dt);
                u.add_assign_scaled(&pnu, dt);
                if !frozen_theta {
                    th.add_assign_scaled(&pnt, dt);
                }
                (a, u, th)
            }
        };
        Ok(NsfState { t: state.t + dt, a: a1, u: u1, theta: t1, params: state.params })
    }
}

/// Single-step convenience wrapper; long runs should hold an NsfStepper.
pub fn step_nsf(state: &NsfState, cfg: &NsfConfig) -> Result<NsfState> {
    NsfStepper::new(state.grid(), state.params, cfg)?.step(state)
}

/// Recorded snapshots of a conducting run.
#[derive(Clone, Debug)]
pub struct NsfRun {
    pub snapshots: Vec<NsfState>,
}

impl NsfRun {
    pub fn last(&self) -> &NsfState {
        self.snapshots.last().expect("runs record at least the initial state")
    }
}

pub fn run_nsf(initial: NsfState, cfg: &NsfConfig, steps: usize) -> Result<NsfRun> {
    let stepper = NsfStepper::new(initial.grid(), initial.params, cfg)?;
    let mut snapshots = vec![initial.clone()];
    let mut cur = initial;
    for s in 1..=steps {
        cur = stepper.step(&cur)?;
        let due = cfg.stepper.snapshot_every > 0 && s % cfg.stepper.snapshot_every == 0;
        if due || s == steps {
            snapshots.push(cur.clone());
        }
    }
    Ok(NsfRun { snapshots })
}

/// Degenerate a conducting state to the barotropic system it reduces to
/// when theta is frozen at zero.
pub fn frozen_to_baro(state: &NsfState) -> Result<BaroState> {
    let params = PhysicalParams::barotropic(
        state.params.eps,
        state.params.lambda,
        state.params.mu,
        crate::params::PressureLaw::Isothermal,
    )?;
    BaroState::new(state.t, state.a.clone(), state.u.clone(), params)
}
