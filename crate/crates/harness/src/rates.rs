//! Convergence-rate measurement along a Mach-number sweep: the exact norm
//! of each limit statement per eps, a least-squares power-law fit against
//! eps*nu, pairwise slopes for curvature, and wrap-around bookkeeping for
//! the periodic surrogate of the whole space.

use crate::sweep::SweepOutput;
use lowmach_core::besov::{
    spacetime_norm, truncated_spacetime_norm, BesovSpec, SpaceTimeSpec, Trajectory,
};
use lowmach_core::error::{Error, Result};
use lowmach_core::exponent::Exponent;
use lowmach_core::field::SpectralField;
use lowmach_core::lp::{DyadicProfile, Side, SplitConfig};
use lowmach_core::ops::project_q;
use lowmach_solver::theta::velocity_at;

/// Norms below this have no usable signal for a log-log fit.
pub const SIGNAL_FLOOR: f64 = 1e-14;

/// Which limit statement the report measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMode {
    /// Decay of the acoustic pair (density with the gradient part of the
    /// velocity, or the pressure combination for the conducting system).
    AcousticDecay,
    /// Solenoidal velocity against the incompressible reference.
    VelocityConvergence,
    /// Transported scalar against its limit (conducting system only).
    ThetaConvergence,
}

impl RateMode {
    pub fn name(&self) -> &'static str {
        match self {
            RateMode::AcousticDecay => "acoustic-decay",
            RateMode::VelocityConvergence => "velocity-convergence",
            RateMode::ThetaConvergence => "theta-convergence",
        }
    }
}

/// One measured norm value.
#[derive(Clone, Copy, Debug)]
pub struct RatePoint {
    pub eps: f64,
    pub eps_tilde: f64,
    pub norm: f64,
}

/// Fit outcome with enough context to judge it.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub mode: RateMode,
    pub points: Vec<RatePoint>,
    /// Least-squares slope of log2(norm) against log2(eps*nu).
    pub slope: f64,
    /// Root-mean-square residual of the fit in log2 units.
    pub residual: f64,
    /// Slopes between consecutive eps points, largest eps first.
    pub pairwise: Vec<f64>,
    pub target: f64,
    pub box_size: f64,
    /// True when an acoustic front (speed 1/eps) can cross the periodic
    /// box within the horizon for some eps in the sweep.
    pub wrap: bool,
    /// Fitted slope minus target; positive means faster than predicted.
    pub pass_margin: f64,
}

impl RateReport {
    pub fn csv_header() -> &'static str {
        "eps,eps_tilde,norm,target_exponent,fitted_slope,residual,box,wrap"
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                pt.eps,
                pt.eps_tilde,
                pt.norm,
                self.target,
                self.slope,
                self.residual,
                self.box_size,
                self.wrap
            ));
        }
        out
    }

    /// Two-column log-log table for external plotting.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("log2_eps_tilde,log2_norm\n");
        for pt in &self.points {
            out.push_str(&format!("{},{}\n", pt.eps_tilde.log2(), pt.norm.log2()));
        }
        out
    }
}

/// Least-squares slope and RMS residual of log2(y) against log2(x).
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::DegenerateSignal("need at least two points to fit".into()));
    }
    for (x, y) in points {
        if !(*x > 0.0) || !(*y > SIGNAL_FLOOR) || !x.is_finite() || !y.is_finite() {
            return Err(Error::DegenerateSignal(format!(
                "point ({x}, {y}) is unusable for a log-log fit"
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.log2()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateSignal("all eps values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok((slope, (ss / n).sqrt()))
}

/// Slopes between consecutive points.
pub fn pairwise_slopes(points: &[(f64, f64)]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| (w[1].1.log2() - w[0].1.log2()) / (w[1].0.log2() - w[0].0.log2()))
        .collect()
}

/// Predicted decay exponent in eps*nu: 1/2 - 1/p in dimension three and
/// above, scaled by the planar parameter c in dimension two.
pub fn target_exponent(d: usize, p: f64, c: Option<f64>) -> Result<f64> {
    let base = 0.5 - 1.0 / p;
    if d >= 3 {
        return Ok(base);
    }
    match c {
        Some(c) => Ok(c * base),
        None => Err(Error::validation(
            "c",
            "planar rate targets need the exponent parameter c",
        )),
    }
}

fn guard_signal(mode: RateMode, eps: f64, norm: f64) -> Result<f64> {
    if !(norm > SIGNAL_FLOOR) || !norm.is_finite() {
        return Err(Error::DegenerateSignal(format!(
            "{} norm at eps = {eps} is {norm:.3e}; nothing to fit",
            mode.name()
        )));
    }
    Ok(norm)
}

fn acoustic_space(d: usize, p: f64, c: Option<f64>, offset: f64) -> Result<BesovSpec> {
    let s = if d >= 3 {
        (d as f64 + 1.0) / p - 0.5
    } else {
        let c = c.ok_or_else(|| {
            Error::validation("c", "planar rate spaces need the exponent parameter c")
        })?;
        (c + 2.0) / p - c / 2.0
    };
    BesovSpec::new(s + offset, Exponent::Finite(p), Exponent::ONE)
}

/// Measure the norm of the selected limit statement for every eps in the
/// sweep and fit the slope.
pub fn measure_rates(output: &SweepOutput, mode: RateMode) -> Result<RateReport> {
    if output.per_eps.len() < 3 {
        return Err(Error::validation(
            "eps_list",
            "rate fits need at least three eps values",
        ));
    }
    let profile = DyadicProfile::standard();
    let cfgp = &output.config;
    let d = output.grid.d();
    let mut points = Vec::with_capacity(output.per_eps.len());

    for run in &output.per_eps {
        let norm = match mode {
            RateMode::AcousticDecay => acoustic_norm(output, run, &profile)?,
            RateMode::VelocityConvergence => velocity_norm(output, run, &profile)?,
            RateMode::ThetaConvergence => theta_norm(output, run, &profile)?,
        };
        points.push(RatePoint {
            eps: run.eps,
            eps_tilde: run.eps_tilde,
            norm: guard_signal(mode, run.eps, norm)?,
        });
    }

    let pairs: Vec<(f64, f64)> = points.iter().map(|pt| (pt.eps_tilde, pt.norm)).collect();
    let (slope, residual) = fit_power_law(&pairs)?;
    let target = target_exponent(d, cfgp.p, cfgp.c)?;
    let box_size = output.grid.l();
    let wrap = output
        .per_eps
        .iter()
        .any(|run| output.horizon / run.eps > std::f64::consts::TAU * box_size);
    Ok(RateReport {
        mode,
        points,
        slope,
        residual,
        pairwise: pairwise_slopes(&pairs),
        target,
        box_size,
        wrap,
        pass_margin: slope - target,
    })
}

fn acoustic_norm(
    output: &SweepOutput,
    run: &crate::sweep::EpsRun,
    profile: &DyadicProfile,
) -> Result<f64> {
    let cfgp = &output.config;
    let d = output.grid.d();
    let base = acoustic_space(d, cfgp.p, cfgp.c, 0.0)?;
    match (&run.baro, &run.nsf) {
        (Some(b), _) => {
            let mut traj: Trajectory<Vec<SpectralField>> = Trajectory::new();
            for st in &b.snapshots {
                let qu = project_q(&st.u);
                let mut stack = vec![st.a.clone()];
                stack.extend(qu.comps().iter().cloned());
                traj.push(st.t, stack)?;
            }
            let spec = SpaceTimeSpec::tilde(base, Exponent::TWO, None);
            Ok(cfgp.nu.sqrt() * spacetime_norm(&traj, &spec, profile)?.value)
        }
        (_, Some(n)) => {
            let mut traj: Trajectory<Vec<SpectralField>> = Trajectory::new();
            for st in &n.snapshots {
                let qu = project_q(&st.u);
                let mut stack = vec![st.pressure_combination()?];
                stack.extend(qu.comps().iter().cloned());
                traj.push(st.t, stack)?;
            }
            let spec = SpaceTimeSpec::plain(base, Exponent::TWO, None);
            let split = SplitConfig::new(output.data_spec.j0, run.eps_tilde)?;
            Ok(truncated_spacetime_norm(&traj, &spec, &split, Side::Low, profile)?.value)
        }
        _ => Err(Error::validation("sweep", "run holds no trajectory")),
    }
}

fn velocity_norm(
    output: &SweepOutput,
    run: &crate::sweep::EpsRun,
    profile: &DyadicProfile,
) -> Result<f64> {
    let cfgp = &output.config;
    let d = output.grid.d();
    let u_ref = output.reference_flow.to_trajectory()?;
    let conducting = run.nsf.is_some();
    let r = if conducting { Exponent::ONE } else { cfgp.r };
    let sup_base = BesovSpec::new(
        acoustic_space(d, cfgp.p, cfgp.c, -1.0)?.s,
        Exponent::Finite(cfgp.p),
        r,
    )?;
    let int_base = BesovSpec::new(
        acoustic_space(d, cfgp.p, cfgp.c, 1.0)?.s,
        Exponent::Finite(cfgp.p),
        r,
    )?;

    let mut traj: Trajectory<Vec<SpectralField>> = Trajectory::new();
    let push_diff = |traj: &mut Trajectory<Vec<SpectralField>>,
                     t: f64,
                     u: &lowmach_core::field::VectorField|
     -> Result<()> {
        let pu = lowmach_core::ops::project_p(u);
        let vref = velocity_at(&u_ref, t)?;
        let diff = pu.sub(&vref)?;
        traj.push(t, diff.comps().to_vec())
    };
    match (&run.baro, &run.nsf) {
        (Some(b), _) => {
            for st in &b.snapshots {
                push_diff(&mut traj, st.t, &st.u)?;
            }
        }
        (_, Some(n)) => {
            for st in &n.snapshots {
                push_diff(&mut traj, st.t, &st.u)?;
            }
        }
        _ => return Err(Error::validation("sweep", "run holds no trajectory")),
    }

    let (sup_spec, int_spec) = if conducting {
        (
            SpaceTimeSpec::plain(sup_base, Exponent::Inf, None),
            SpaceTimeSpec::plain(int_base, Exponent::ONE, None),
        )
    } else {
        (
            SpaceTimeSpec::tilde(sup_base, Exponent::Inf, None),
            SpaceTimeSpec::tilde(int_base, Exponent::ONE, None),
        )
    };
    let sup = spacetime_norm(&traj, &sup_spec, profile)?.value;
    let int = spacetime_norm(&traj, &int_spec, profile)?.value;
    Ok(sup + cfgp.mu * int)
}

fn theta_norm(
    output: &SweepOutput,
    run: &crate::sweep::EpsRun,
    profile: &DyadicProfile,
) -> Result<f64> {
    let cfgp = &output.config;
    let d = output.grid.d();
    let p = cfgp.p;
    let nsf = run.nsf.as_ref().ok_or_else(|| {
        Error::validation("mode", "theta convergence needs a conducting sweep")
    })?;
    let theta_ref = output.reference_theta.as_ref().ok_or_else(|| {
        Error::validation("mode", "theta convergence needs the scalar reference run")
    })?;
    if nsf.snapshots.len() != theta_ref.snapshots.len() {
        return Err(Error::TimeAxis(
            "conducting run and scalar reference have different snapshot counts".into(),
        ));
    }

    let mut traj: Trajectory<Vec<SpectralField>> = Trajectory::new();
    for (st, rf) in nsf.snapshots.iter().zip(&theta_ref.snapshots) {
        if (st.t - rf.t).abs() > 1e-12 {
            return Err(Error::TimeAxis(format!(
                "snapshot times diverge: {} vs {}",
                st.t, rf.t
            )));
        }
        let diff = st.transported_combination()?.sub(&rf.field)?;
        traj.push(st.t, vec![diff])?;
    }

    let split = SplitConfig::new(output.data_spec.j0, run.eps_tilde)?;
    let dd = d as f64;
    let one = Exponent::ONE;
    let fp = Exponent::Finite(p);
    // Sum spaces are evaluated with the canonical low/high splitting at the
    // eps*nu threshold: low part in the higher-regularity member, high part
    // in the parabolic member.
    let sup_low = SpaceTimeSpec::plain(
        BesovSpec::new((dd + 1.0) / p - 1.5, fp, one)?,
        Exponent::Inf,
        None,
    );
    let sup_high =
        SpaceTimeSpec::plain(BesovSpec::new(dd / p - 2.0, fp, one)?, Exponent::Inf, None);
    let l2_low = SpaceTimeSpec::plain(
        BesovSpec::new((dd + 1.0) / p - 0.5, fp, one)?,
        Exponent::TWO,
        None,
    );
    let l1_high =
        SpaceTimeSpec::plain(BesovSpec::new(dd / p, fp, one)?, Exponent::ONE, None);

    let a = truncated_spacetime_norm(&traj, &sup_low, &split, Side::Low, profile)?.value;
    let b = truncated_spacetime_norm(&traj, &sup_high, &split, Side::High, profile)?.value;
    let c = truncated_spacetime_norm(&traj, &l2_low, &split, Side::Low, profile)?.value;
    let e = truncated_spacetime_norm(&traj, &l1_high, &split, Side::High, profile)?.value;
    Ok(a + b + c + e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Budget, DataSpec};
    use crate::sweep::{run_sweep, SweepConfig, System};
    use lowmach_core::grid::Grid;
    use lowmach_solver::params::StepperConfig;
    use lowmach_solver::propagator::BaroPropagator;

    const FIT_TOL: f64 = 1e-12;
    const EXACT_RATE_TOL: f64 = 1e-10;
    const DIRECT_ROUTE_TOL: f64 = 1e-10;

    #[test]
    fn exact_power_law_is_fitted_exactly() {
        let pts: Vec<(f64, f64)> =
            [0.2, 0.1, 0.05, 0.025].iter().map(|&e| (e, 3.7 * f64::powf(e, 0.25))).collect();
        let (slope, residual) = fit_power_law(&pts).unwrap();
        assert!((slope - 0.25).abs() < FIT_TOL, "slope {slope}");
        assert!(residual < FIT_TOL, "residual {residual}");
        for s in pairwise_slopes(&pts) {
            assert!((s - 0.25).abs() < EXACT_RATE_TOL);
        }
    }

    #[test]
    fn target_exponent_matches_the_statement() {
        assert_eq!(target_exponent(3, 4.0, None).unwrap(), 0.25);
        let planar = target_exponent(2, 3.0, Some(0.5)).unwrap();
        assert!((planar - 0.5 * (0.5 - 1.0 / 3.0)).abs() < 1e-15);
        assert!(target_exponent(2, 3.0, None).is_err());
    }

    #[test]
    fn degenerate_norms_are_rejected() {
        let pts = vec![(0.2, 0.0), (0.1, 0.0)];
        assert!(matches!(fit_power_law(&pts), Err(Error::DegenerateSignal(_))));
    }

    #[test]
    fn linear_sweep_matches_the_one_shot_propagator_route() {
        let grid = Grid::new(2, 32, 1.0).unwrap();
        let budget = Budget { low_acoustic: 0.1, ..Budget::default() };
        let spec = DataSpec::new(grid, 3.0, Exponent::ONE, budget, 21);
        let sweep = SweepConfig {
            eps_list: vec![0.5, 0.25, 0.125],
            nu: 1.0,
            mu: 0.4,
            kappa: None,
            p: 3.0,
            r: Exponent::ONE,
            c: Some(0.4),
            horizon: 0.04,
            system: System::Barotropic,
            fresh_data_per_eps: false,
        };
        let cfg = StepperConfig::new(0.01).unwrap().with_linear_only(true);
        let out = run_sweep(&spec, &sweep, &cfg, None).unwrap();
        let report = measure_rates(&out, RateMode::AcousticDecay).unwrap();

        let profile = DyadicProfile::standard();
        for (run, pt) in out.per_eps.iter().zip(&report.points) {
            let b = run.baro.as_ref().unwrap();
            let params = b.snapshots[0].params;
            let mut traj: Trajectory<Vec<SpectralField>> = Trajectory::new();
            for st in &b.snapshots {
                let (a_t, u_t) = if st.t == 0.0 {
                    (st.a.clone(), st.u.clone())
                } else {
                    BaroPropagator::new(&grid, &params, st.t)
                        .unwrap()
                        .apply(&b.snapshots[0].a, &b.snapshots[0].u)
                        .unwrap()
                };
                let qu = project_q(&u_t);
                let mut stack = vec![a_t];
                stack.extend(qu.comps().iter().cloned());
                traj.push(st.t, stack).unwrap();
            }
            let base = acoustic_space(2, 3.0, Some(0.4), 0.0).unwrap();
            let spec_t = SpaceTimeSpec::tilde(base, Exponent::TWO, None);
            let direct = sweep.nu.sqrt() * spacetime_norm(&traj, &spec_t, &profile).unwrap().value;
            let rel = (direct - pt.norm).abs() / direct.max(1e-300);
            assert!(rel < DIRECT_ROUTE_TOL, "eps {}: direct {direct} vs sweep {}", run.eps, pt.norm);
        }
        assert!(report.wrap || out.horizon / 0.125 <= std::f64::consts::TAU);
    }

    #[test]
    fn report_csv_has_one_row_per_eps() {
        let report = RateReport {
            mode: RateMode::AcousticDecay,
            points: vec![
                RatePoint { eps: 0.2, eps_tilde: 0.2, norm: 1.0 },
                RatePoint { eps: 0.1, eps_tilde: 0.1, norm: 0.84 },
            ],
            slope: 0.25,
            residual: 0.0,
            pairwise: vec![0.25],
            target: 0.25,
            box_size: 1.0,
            wrap: false,
            pass_margin: 0.0,
        };
        let csv = report.csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("eps,"));
        assert_eq!(report.plot_csv().lines().count(), 3);
    }
}
