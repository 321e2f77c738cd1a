//! Incompressible flow stepping: exact viscous semigroup per mode and the
//! explicit advection term projected back onto divergence-free fields.

use crate::params::{Scheme, StepperConfig};
use crate::propagator::HeatPropagator;
use lowmach_core::besov::Trajectory;
use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_core::ops;

/// Relative divergence above which a step refuses to continue.
const DIV_DRIFT_LIMIT: f64 = 1e-8;

/// Divergence-free velocity at time t.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub v: VectorField,
}

impl FlowState {
    pub fn new(t: f64, v: VectorField) -> FlowState {
        FlowState { t, v }
    }

    /// l2 size of div v relative to v itself.
    pub fn divergence_drift(&self) -> f64 {
        let dv = ops::divergence(&self.v).l2_norm();
        let scale = self.v.l2_norm();
        if scale == 0.0 {
            dv
        } else {
            dv / scale
        }
    }
}

/// The advection nonlinearity -P(v . grad v), dealiased then projected.
pub fn projected_advection(v: &VectorField) -> Result<VectorField> {
    let grid = *v.grid();
    let d = grid.d();
    let vals: Vec<Vec<f64>> = (0..d).map(|i| v.comp(i).to_padded()).collect();
    let grads: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|i| {
            let g = ops::gradient(v.comp(i));
            (0..d).map(|j| g.comp(j).to_padded()).collect()
        })
        .collect();
    let points = vals[0].len();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; points]; d];
    for p in 0..points {
        for i in 0..d {
            let advect: f64 = (0..d).map(|j| vals[j][p] * grads[i][j][p]).sum();
            out[i][p] = -advect;
        }
    }
    let fields: Result<Vec<SpectralField>> =
        out.iter().map(|vv| SpectralField::from_padded(grid, vv)).collect();
    Ok(ops::project_p(&VectorField::new(fields?)?))
}

fn max_speed(v: &VectorField) -> (f64, bool) {
    let d = v.grid().d();
    let vals: Vec<Vec<f64>> = (0..d).map(|i| v.comp(i).to_padded()).collect();
    let mut max2: f64 = 0.0;
    let mut finite = true;
    for p in 0..vals[0].len() {
        let s2: f64 = vals.iter().map(|vv| vv[p] * vv[p]).sum();
        if !s2.is_finite() {
            finite = false;
        }
        max2 = max2.max(s2);
    }
    (max2.sqrt(), finite)
}

/// Reusable stepper for one viscosity and step size.
pub struct IncompressibleStepper {
    cfg: StepperConfig,
    full: HeatPropagator,
    half: HeatPropagator,
    xi_max: f64,
}

impl IncompressibleStepper {
    pub fn new(grid: &Grid, mu: f64, cfg: &StepperConfig) -> Result<IncompressibleStepper> {
        cfg.validate()?;
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::validation("mu", "viscosity must be positive"));
        }
        Ok(IncompressibleStepper {
            cfg: *cfg,
            full: HeatPropagator::new(grid, mu, cfg.dt)?,
            half: HeatPropagator::new(grid, mu, 0.5 * cfg.dt)?,
            xi_max: grid.xi_max(),
        })
    }

    pub fn step(&self, state: &FlowState) -> Result<FlowState> {
        let dt = self.cfg.dt;
        let v1 = if self.cfg.linear_only {
            self.full.apply_vector(&state.v)?
        } else {
            let (speed, finite) = max_speed(&state.v);
            if !finite {
                return Err(Error::validation("velocity", "non-finite values"));
            }
            let number = dt * speed * self.xi_max;
            if number > self.cfg.courant_limit {
                return Err(Error::Courant { t: state.t, number, limit: self.cfg.courant_limit });
            }
            let n0 = projected_advection(&state.v)?;
            match self.cfg.scheme {
                Scheme::Order1 => {
                    let mut v = state.v.clone();
                    v.add_assign_scaled(&n0, dt);
                    self.full.apply_vector(&v)?
                }
                Scheme::Order2 => {
                    let mut vp = state.v.clone();
                    vp.add_assign_scaled(&n0, 0.5 * dt);
                    let vm = self.half.apply_vector(&vp)?;
                    let nm = projected_advection(&vm)?;
                    let pn = self.half.apply_vector(&nm)?;
                    let mut v = self.full.apply_vector(&state.v)?;
                    v.add_assign_scaled(&pn, dt);
                    v
                }
            }
        };
        let next = FlowState::new(state.t + dt, v1);
        let drift = next.divergence_drift();
        if drift > DIV_DRIFT_LIMIT {
            return Err(Error::Projection { t: next.t, drift });
        }
        Ok(next)
    }
}

/// Single-step convenience wrapper.
pub fn step_incompressible(state: &FlowState, mu: f64, cfg: &StepperConfig) -> Result<FlowState> {
    IncompressibleStepper::new(state.v.grid(), mu, cfg)?.step(state)
}

/// Recorded snapshots of an incompressible run.
#[derive(Clone, Debug)]
pub struct FlowRun {
    pub snapshots: Vec<FlowState>,
}

impl FlowRun {
    pub fn last(&self) -> &FlowState {
        self.snapshots.last().expect("runs record at least the initial state")
    }

    /// Snapshots as a time-stamped velocity trajectory.
    pub fn to_trajectory(&self) -> Result<Trajectory<VectorField>> {
        let mut traj = Trajectory::new();
        for s in &self.snapshots {
            traj.push(s.t, s.v.clone())?;
        }
        Ok(traj)
    }
}

pub fn run_incompressible(
    initial: FlowState,
    mu: f64,
    cfg: &StepperConfig,
    steps: usize,
) -> Result<FlowRun> {
    let stepper = IncompressibleStepper::new(initial.v.grid(), mu, cfg)?;
    let mut snapshots = vec![initial.clone()];
    let mut cur = initial;
    for s in 1..=steps {
        cur = stepper.step(&cur)?;
        let due = cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0;
        if due || s == steps {
            snapshots.push(cur.clone());
        }
    }
    Ok(FlowRun { snapshots })
}
