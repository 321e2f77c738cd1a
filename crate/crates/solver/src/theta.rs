//! Transport of the limit temperature combination by a prescribed
//! divergence-free velocity trajectory. The diffusion coefficient is exactly
//! half the conduction coefficient; that factor is load-bearing and pinned
//! by the characteristics oracle below.

use crate::params::{Scheme, StepperConfig};
use crate::propagator::HeatPropagator;
use lowmach_core::besov::Trajectory;
use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_core::ops;

/// Slack when checking that a requested time lies inside the trajectory.
const TIME_COVER_SLACK: f64 = 1e-12;

/// A scalar field at time t.
#[derive(Clone, Debug)]
pub struct ScalarState {
    pub t: f64,
    pub field: SpectralField,
}

impl ScalarState {
    pub fn new(t: f64, field: SpectralField) -> ScalarState {
        ScalarState { t, field }
    }
}

/// Velocity at time t by linear interpolation between snapshots.
pub fn velocity_at(traj: &Trajectory<VectorField>, t: f64) -> Result<VectorField> {
    let times = traj.times();
    let states = traj.states();
    if times.is_empty() {
        return Err(Error::TimeAxis("velocity trajectory is empty".into()));
    }
    let slack = TIME_COVER_SLACK * t.abs().max(1.0);
    let (first, last) = (times[0], times[times.len() - 1]);
    if t < first - slack || t > last + slack {
        return Err(Error::TimeAxis(format!(
            "requested velocity at t = {t}, trajectory covers [{first}, {last}]"
        )));
    }
    let t = t.clamp(first, last);
    // index of the last snapshot not after t
    let i = match times.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
        Ok(exact) => return Ok(states[exact].clone()),
        Err(insert) => insert - 1,
    };
    let span = times[i + 1] - times[i];
    let w = (t - times[i]) / span;
    let mut v = states[i].clone();
    v.scale(1.0 - w);
    v.add_assign_scaled(&states[i + 1], w);
    Ok(v)
}

fn advection(theta: &SpectralField, u: &VectorField) -> Result<(SpectralField, f64)> {
    theta.grid().same_layout(u.grid(), "advection")?;
    let grid = *theta.grid();
    let d = grid.d();
    let grads: Vec<Vec<f64>> = {
        let g = ops::gradient(theta);
        (0..d).map(|i| g.comp(i).to_padded()).collect()
    };
    let u_vals: Vec<Vec<f64>> = (0..d).map(|i| u.comp(i).to_padded()).collect();
    let points = grads[0].len();
    let mut out = vec![0.0; points];
    let mut max2: f64 = 0.0;
    for p in 0..points {
        let mut speed2 = 0.0;
        let mut adv = 0.0;
        for i in 0..d {
            speed2 += u_vals[i][p] * u_vals[i][p];
            adv += u_vals[i][p] * grads[i][p];
        }
        max2 = max2.max(speed2);
        out[p] = -adv;
    }
    Ok((SpectralField::from_padded(grid, &out)?, max2.sqrt()))
}

/// Reusable stepper: exact diffusion at kappa/2, explicit dealiased
/// advection by the interpolated velocity.
pub struct ThetaLimitStepper {
    cfg: StepperConfig,
    full: HeatPropagator,
    half: HeatPropagator,
    xi_max: f64,
}

impl ThetaLimitStepper {
    pub fn new(grid: &Grid, kappa: f64, cfg: &StepperConfig) -> Result<ThetaLimitStepper> {
        cfg.validate()?;
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::validation("kappa", "conduction coefficient must be positive"));
        }
        Ok(ThetaLimitStepper {
            cfg: *cfg,
            full: HeatPropagator::new(grid, 0.5 * kappa, cfg.dt)?,
            half: HeatPropagator::new(grid, 0.5 * kappa, 0.5 * cfg.dt)?,
            xi_max: grid.xi_max(),
        })
    }

    pub fn step(&self, state: &ScalarState, u_traj: &Trajectory<VectorField>) -> Result<ScalarState> {
        let dt = self.cfg.dt;
        if self.cfg.linear_only {
            return Ok(ScalarState::new(state.t + dt, self.full.apply(&state.field)?));
        }
        let u0 = velocity_at(u_traj, state.t)?;
        let (n0, speed) = advection(&state.field, &u0)?;
        let number = dt * speed * self.xi_max;
        if number > self.cfg.courant_limit {
            return Err(Error::Courant { t: state.t, number, limit: self.cfg.courant_limit });
        }
        let next = match self.cfg.scheme {
            Scheme::Order1 => {
                let mut f = state.field.clone();
                f.add_assign_scaled(&n0, dt);
                self.full.apply(&f)?
            }
            Scheme::Order2 => {
                let mut fp = state.field.clone();
                fp.add_assign_scaled(&n0, 0.5 * dt);
                let fm = self.half.apply(&fp)?;
                let um = velocity_at(u_traj, state.t + 0.5 * dt)?;
                let (nm, _) = advection(&fm, &um)?;
                let pn = self.half.apply(&nm)?;
                let mut f = self.full.apply(&state.field)?;
                f.add_assign_scaled(&pn, dt);
                f
            }
        };
        Ok(ScalarState::new(state.t + dt, next))
    }
}

/// Single-step convenience wrapper.
pub fn step_theta_limit(
    state: &ScalarState,
    u_traj: &Trajectory<VectorField>,
    kappa: f64,
    cfg: &StepperConfig,
) -> Result<ScalarState> {
    ThetaLimitStepper::new(state.field.grid(), kappa, cfg)?.step(state, u_traj)
}

/// Recorded snapshots of a transported-scalar run.
#[derive(Clone, Debug)]
pub struct ScalarRun {
    pub snapshots: Vec<ScalarState>,
}

impl ScalarRun {
    pub fn last(&self) -> &ScalarState {
        self.snapshots.last().expect("runs record at least the initial state")
    }
}

pub fn run_theta_limit(
    initial: ScalarState,
    u_traj: &Trajectory<VectorField>,
    kappa: f64,
    cfg: &StepperConfig,
    steps: usize,
) -> Result<ScalarRun> {
    let stepper = ThetaLimitStepper::new(initial.field.grid(), kappa, cfg)?;
    let mut snapshots = vec![initial.clone()];
    let mut cur = initial;
    for s in 1..=steps {
        cur = stepper.step(&cur, u_traj)?;
        let due = cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0;
        if due || s == steps {
            snapshots.push(cur.clone());
        }
    }
    Ok(ScalarRun { snapshots })
}
