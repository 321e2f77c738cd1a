//! Weak-convergence diagnostics: how fast the divergence content of a
//! compressible run vanishes, the gradient-part time series, and the gap
//! between the solenoidal part and the incompressible reference in a
//! slightly weaker norm.

use lowmach_core::besov::{besov_norm_joint, BesovSpec, Trajectory};
use lowmach_core::error::{Error, Result};
use lowmach_core::exponent::Exponent;
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::lp::DyadicProfile;
use lowmach_core::ops::{divergence, project_p, project_q};
use lowmach_solver::baro::BaroRun;
use lowmach_solver::theta::velocity_at;

/// Weak-limit indicators for one run.
#[derive(Clone, Debug)]
pub struct WeakReport {
    /// Space-time L2 norm of div u over the run (trapezoid rule in time).
    pub div_norm: f64,
    /// (t, L2 norm of the gradient part) per snapshot.
    pub qu_series: Vec<(f64, f64)>,
    /// Sup over snapshots of the solenoidal gap to the reference flow,
    /// measured one `alpha` below the critical regularity.
    pub pu_gap: f64,
}

/// Compare one compressible run against the incompressible reference.
/// `alpha > 0` weakens the comparison space, mirroring how the limit is
/// attained in slightly weaker norms than the data space.
pub fn weak_diagnostics(
    run: &BaroRun,
    reference: &Trajectory<VectorField>,
    p: f64,
    alpha: f64,
) -> Result<WeakReport> {
    if run.snapshots.is_empty() {
        return Err(Error::TimeAxis("empty run".into()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::validation("alpha", "the weakening offset must be positive"));
    }
    let grid = run.snapshots[0].grid();
    let d = grid.d() as f64;
    let profile = DyadicProfile::standard();
    let gap_spec = BesovSpec::new(d / p - 1.0 - alpha, Exponent::Finite(p), Exponent::ONE)?;

    let mut div_sq: Vec<(f64, f64)> = Vec::with_capacity(run.snapshots.len());
    let mut qu_series = Vec::with_capacity(run.snapshots.len());
    let mut pu_gap: f64 = 0.0;
    for st in &run.snapshots {
        let div = divergence(&st.u);
        let dn = div.l2_norm();
        div_sq.push((st.t, dn * dn));
        qu_series.push((st.t, project_q(&st.u).l2_norm()));

        let pu = project_p(&st.u);
        let vref = velocity_at(reference, st.t)?;
        let diff = pu.sub(&vref)?;
        let stack: Vec<&SpectralField> = diff.comps().iter().collect();
        let gap = besov_norm_joint(&stack, &gap_spec, &profile)?.value;
        pu_gap = pu_gap.max(gap);
    }

    let mut acc = 0.0;
    for w in div_sq.windows(2) {
        let (t0, f0) = w[0];
        let (t1, f1) = w[1];
        acc += 0.5 * (t1 - t0) * (f0 + f1);
    }
    Ok(WeakReport { div_norm: acc.sqrt(), qu_series, pu_gap })
}
