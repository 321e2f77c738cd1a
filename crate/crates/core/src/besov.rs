//! Besov-type norm functionals on spectral fields and sampled trajectories.
//!
//! All norms are built from the dyadic block norms 2^{js} |Delta_j z|_{L^p}
//! aggregated in l^r. Space-time norms integrate block norms in time with
//! the trapezoid rule on the recorded sample instants, either before the
//! block summation (tilde variant) or after (plain variant). Multi-component
//! arguments are measured jointly: the L^p norm of the pointwise Euclidean
//! magnitude of the stacked components.

use crate::error::{Error, Result};
use crate::exponent::{lr_aggregate, Exponent};
use crate::field::{lp_norm, SpectralField, VectorField};
use crate::lp::{delta_j, dyadic_range, DyadicProfile, Side, SplitConfig};
use crate::ops::{project_p, project_q};

/// Regularity index s, integrability p, summation r.
#[derive(Clone, Copy, Debug)]
pub struct BesovSpec {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovSpec {
    pub fn new(s: f64, p: Exponent, r: Exponent) -> Result<BesovSpec> {
        if !s.is_finite() {
            return Err(Error::validation("besov.s", format!("must be finite, got {s}")));
        }
        p.validate("besov.p")?;
        r.validate("besov.r")?;
        Ok(BesovSpec { s, p, r })
    }

    fn label(&self) -> String {
        format!("B[s={} p={} r={}]", self.s, self.p, self.r)
    }
}

/// Time exponent q over a horizon, with the aggregation order flag.
#[derive(Clone, Copy, Debug)]
pub struct SpaceTimeSpec {
    pub base: BesovSpec,
    pub q: Exponent,
    pub tilde: bool,
    /// None means the whole recorded trajectory.
    pub horizon: Option<f64>,
}

impl SpaceTimeSpec {
    pub fn tilde(base: BesovSpec, q: Exponent, horizon: Option<f64>) -> SpaceTimeSpec {
        SpaceTimeSpec { base, q, tilde: true, horizon }
    }

    pub fn plain(base: BesovSpec, q: Exponent, horizon: Option<f64>) -> SpaceTimeSpec {
        SpaceTimeSpec { base, q, tilde: false, horizon }
    }

    fn label(&self) -> String {
        let t = if self.tilde { "~" } else { "" };
        format!("{t}L{}_T({})", self.q, self.base.label())
    }
}

/// A Besov norm restricted to one side of a low/high frequency split.
#[derive(Clone, Copy, Debug)]
pub struct TruncatedSpec {
    pub base: BesovSpec,
    pub side: Side,
    pub split: SplitConfig,
}

/// Time-ordered snapshots of a state; times are strictly increasing.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
}

/// Density paired with velocity.
pub type PairTrajectory = Trajectory<(SpectralField, VectorField)>;
/// Density, velocity and temperature.
pub type TripleTrajectory = Trajectory<(SpectralField, VectorField, SpectralField)>;

impl<S> Default for Trajectory<S> {
    fn default() -> Self {
        Trajectory::new()
    }
}

impl<S> Trajectory<S> {
    pub fn new() -> Trajectory<S> {
        Trajectory { times: Vec::new(), states: Vec::new() }
    }

    pub fn push(&mut self, t: f64, state: S) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::TimeAxis(format!("non-finite sample time {t}")));
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::TimeAxis(format!("sample time {t} not after {last}")));
            }
        }
        self.times.push(t);
        self.states.push(state);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Derive a trajectory of the same times with transformed states.
    pub fn map<T>(&self, f: impl Fn(f64, &S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times.clone(),
            states: self.times.iter().zip(&self.states).map(|(&t, s)| f(t, s)).collect(),
        }
    }
}

/// Norm result with its audit trail: what was computed, over which dyadic
/// range, from how many snapshots.
#[derive(Clone, Debug)]
pub struct NormValue {
    pub value: f64,
    pub label: String,
    pub j_range: (i32, i32),
    pub snapshots: usize,
}

impl NormValue {
    pub fn csv_header() -> &'static str {
        "label,value,j_min,j_max,snapshots"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{},{},{}",
            self.label, self.value, self.j_range.0, self.j_range.1, self.snapshots
        )
    }
}

/// One field of a jointly-measured stack, optionally confined to a split side.
struct Comp<'a> {
    field: &'a SpectralField,
    side: Option<Side>,
}

fn time_lq(times: &[f64], vals: &[f64], q: Exponent) -> f64 {
    match q {
        Exponent::Inf => vals.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(qv) => {
            if times.len() < 2 {
                return 0.0;
            }
            let mut acc = 0.0;
            for i in 0..times.len() - 1 {
                let dt = times[i + 1] - times[i];
                let (a, b) = if qv == 1.0 {
                    (vals[i], vals[i + 1])
                } else {
                    (vals[i].powf(qv), vals[i + 1].powf(qv))
                };
                acc += 0.5 * dt * (a + b);
            }
            if qv == 1.0 {
                acc
            } else {
                acc.powf(1.0 / qv)
            }
        }
    }
}

/// How many leading samples fall inside the requested horizon.
fn clip_len(times: &[f64], horizon: Option<f64>) -> Result<usize> {
    let t = match horizon {
        None => return Ok(times.len()),
        Some(t) => t,
    };
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::TimeAxis(format!("horizon must be a nonnegative time, got {t}")));
    }
    let last = *times.last().expect("nonempty");
    let slack = 1.0 + 1e-12;
    if t > last * slack {
        return Err(Error::TimeAxis(format!("horizon {t} lies beyond the last sample {last}")));
    }
    let n = times.iter().take_while(|&&ti| ti <= t * slack).count();
    if n == 0 {
        return Err(Error::TimeAxis(format!("no samples at or before horizon {t}")));
    }
    Ok(n)
}

/// Shared workhorse: block norms of tagged component stacks over time.
fn blockwise(
    times: &[f64],
    samples: &[Vec<Comp<'_>>],
    spec: &BesovSpec,
    q: Exponent,
    tilde: bool,
    split: Option<&SplitConfig>,
    profile: &DyadicProfile,
) -> Result<(f64, (i32, i32))> {
    if times.is_empty() {
        return Err(Error::TimeAxis("empty trajectory".into()));
    }
    debug_assert_eq!(times.len(), samples.len());
    let arity = samples[0].len();
    if arity == 0 {
        return Err(Error::validation("components", "need at least one field"));
    }
    let grid = *samples[0][0].field.grid();
    for sample in samples {
        if sample.len() != arity {
            return Err(Error::validation("components", "ragged sample arity"));
        }
        for comp in sample {
            grid.same_layout(comp.field.grid(), "norm components")?;
            if comp.side.is_some() && split.is_none() {
                return Err(Error::validation("components", "side tag without a split config"));
            }
        }
    }
    let (j_lo, j_hi) = dyadic_range(&grid);
    let nt = times.len();
    let mut weights: Vec<f64> = Vec::new();
    let mut series: Vec<Vec<f64>> = Vec::new();
    for j in j_lo..=j_hi {
        let side = split.map(|cfg| if cfg.is_low(j) { Side::Low } else { Side::High });
        let mut bn = vec![0.0; nt];
        for (i, sample) in samples.iter().enumerate() {
            let mut blocks: Vec<SpectralField> = Vec::new();
            for comp in sample {
                if comp.side.is_none() || comp.side == side {
                    blocks.push(delta_j(comp.field, j, profile));
                }
            }
            if blocks.is_empty() {
                continue;
            }
            let energy: f64 = blocks.iter().map(SpectralField::spectral_energy).sum();
            if energy == 0.0 {
                continue;
            }
            let refs: Vec<&SpectralField> = blocks.iter().collect();
            bn[i] = lp_norm(&refs, spec.p)?;
        }
        weights.push((2.0f64).powf(j as f64 * spec.s));
        series.push(bn);
    }
    let value = if tilde {
        let terms: Vec<f64> =
            weights.iter().zip(&series).map(|(w, bn)| w * time_lq(times, bn, q)).collect();
        lr_aggregate(&terms, spec.r)
    } else {
        let inst: Vec<f64> = (0..nt)
            .map(|i| {
                let terms: Vec<f64> =
                    weights.iter().zip(&series).map(|(w, bn)| w * bn[i]).collect();
                lr_aggregate(&terms, spec.r)
            })
            .collect();
        time_lq(times, &inst, q)
    };
    Ok((value, (j_lo, j_hi)))
}

/// Instantaneous Besov norm of a scalar field.
pub fn besov_norm(z: &SpectralField, spec: &BesovSpec, profile: &DyadicProfile) -> Result<NormValue> {
    besov_norm_joint(&[z], spec, profile)
}

/// Instantaneous Besov norm of jointly-measured components.
pub fn besov_norm_joint(
    zs: &[&SpectralField],
    spec: &BesovSpec,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    let sample: Vec<Comp> = zs.iter().map(|f| Comp { field: f, side: None }).collect();
    let (value, j_range) =
        blockwise(&[0.0], &[sample], spec, Exponent::Inf, false, None, profile)?;
    Ok(NormValue { value, label: spec.label(), j_range, snapshots: 1 })
}

/// Instantaneous Besov norm over one side of a frequency split.
pub fn truncated_norm(
    z: &SpectralField,
    spec: &TruncatedSpec,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    truncated_norm_joint(&[z], spec, profile)
}

/// Joint truncated norm of stacked components.
pub fn truncated_norm_joint(
    zs: &[&SpectralField],
    spec: &TruncatedSpec,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    let sample: Vec<Comp> = zs.iter().map(|f| Comp { field: f, side: Some(spec.side) }).collect();
    let (value, j_range) =
        blockwise(&[0.0], &[sample], &spec.base, Exponent::Inf, false, Some(&spec.split), profile)?;
    let tag = match spec.side {
        Side::Low => "low",
        Side::High => "high",
    };
    Ok(NormValue {
        value,
        label: format!("{}^{tag}[j0={} alpha={}]", spec.base.label(), spec.split.j0, spec.split.alpha),
        j_range,
        snapshots: 1,
    })
}

/// Space-time norm of a trajectory of stacked components.
pub fn spacetime_norm(
    traj: &Trajectory<Vec<SpectralField>>,
    spec: &SpaceTimeSpec,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    if traj.is_empty() {
        return Err(Error::TimeAxis("empty trajectory".into()));
    }
    let n = clip_len(traj.times(), spec.horizon)?;
    let times = &traj.times()[..n];
    let samples: Vec<Vec<Comp>> = traj.states()[..n]
        .iter()
        .map(|fs| fs.iter().map(|f| Comp { field: f, side: None }).collect())
        .collect();
    let (value, j_range) = blockwise(times, &samples, &spec.base, spec.q, spec.tilde, None, profile)?;
    Ok(NormValue { value, label: spec.label(), j_range, snapshots: n })
}

/// Space-time norm restricted to one side of a frequency split.
pub fn truncated_spacetime_norm(
    traj: &Trajectory<Vec<SpectralField>>,
    spec: &SpaceTimeSpec,
    split: &SplitConfig,
    side: Side,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    if traj.is_empty() {
        return Err(Error::TimeAxis("empty trajectory".into()));
    }
    let n = clip_len(traj.times(), spec.horizon)?;
    let times = &traj.times()[..n];
    let samples: Vec<Vec<Comp>> = traj.states()[..n]
        .iter()
        .map(|fs| fs.iter().map(|f| Comp { field: f, side: Some(side) }).collect())
        .collect();
    let (value, j_range) =
        blockwise(times, &samples, &spec.base, spec.q, spec.tilde, Some(split), profile)?;
    let tag = match side {
        Side::Low => "low",
        Side::High => "high",
    };
    Ok(NormValue { value, label: format!("{}^{tag}", spec.label()), j_range, snapshots: n })
}

fn check_rate_params(eps: f64, nu: f64, p: f64) -> Result<()> {
    for (name, v) in [("eps", eps), ("nu", nu)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::validation(name, format!("must be positive, got {v}")));
        }
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::validation("p", format!("must be a finite exponent >= 1, got {p}")));
    }
    Ok(())
}

struct PairParts {
    a: SpectralField,
    qu: VectorField,
    pu: VectorField,
}

fn pair_parts(traj: &PairTrajectory) -> Vec<PairParts> {
    traj.states()
        .iter()
        .map(|(a, u)| PairParts { a: a.clone(), qu: project_q(u), pu: project_p(u) })
        .collect()
}

fn stack<'a>(
    parts: &'a [PairParts],
    build: impl Fn(&'a PairParts) -> Vec<Comp<'a>>,
) -> Vec<Vec<Comp<'a>>> {
    parts.iter().map(build).collect()
}

/// The eight-term solution norm controlling the compressible flow uniformly
/// in the Mach number: low-frequency (density, gradient velocity) energy at
/// 2-based regularity, high-frequency pieces at p-based regularity, the
/// solenoidal velocity in intersection spaces, and weighted high density.
pub fn x_norm(
    traj: &PairTrajectory,
    eps: f64,
    nu: f64,
    p: f64,
    r: Exponent,
    j0: i32,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    if traj.is_empty() {
        return Err(Error::TimeAxis("empty trajectory".into()));
    }
    check_rate_params(eps, nu, p)?;
    r.validate("x_norm.r")?;
    let split = SplitConfig::new(j0, eps * nu)?;
    let d = traj.states()[0].0.grid().d() as f64;
    let times = traj.times();
    let parts = pair_parts(traj);
    let pe = Exponent::Finite(p);
    let inf = Exponent::Inf;
    let one = Exponent::ONE;

    let low_pair = stack(&parts, |pt| {
        let mut v = vec![Comp { field: &pt.a, side: Some(Side::Low) }];
        v.extend(pt.qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::Low) }));
        v
    });
    let high_qu = stack(&parts, |pt| {
        pt.qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::High) }).collect()
    });
    let pu_full = stack(&parts, |pt| {
        pt.pu.comps().iter().map(|c| Comp { field: c, side: None }).collect()
    });
    let high_a = stack(&parts, |pt| vec![Comp { field: &pt.a, side: Some(Side::High) }]);

    let b = BesovSpec::new;
    let sp = Some(&split);
    let mut jr = (0, 0);
    let mut run = |samples: &[Vec<Comp>], spec: BesovSpec, q, tilde| -> Result<f64> {
        let (v, range) = blockwise(times, samples, &spec, q, tilde, sp, profile)?;
        jr = range;
        Ok(v)
    };

    let t1 = run(&low_pair, b(d / 2.0 - 1.0, Exponent::TWO, one)?, inf, true)?;
    let t2 = run(&high_qu, b(d / p - 1.0, pe, one)?, inf, true)?;
    let t3a = run(&pu_full, b(d / p - 1.0, pe, r)?, inf, true)?;
    let t3b = run(&pu_full, b(-1.0, Exponent::Inf, one)?, inf, true)?;
    let t4 = run(&high_a, b(d / p, pe, one)?, inf, true)?;
    let t5 = run(&low_pair, b(d / 2.0 + 1.0, Exponent::TWO, one)?, one, false)?;
    let t6 = run(&high_qu, b(d / p + 1.0, pe, one)?, one, false)?;
    let t7a = run(&pu_full, b(d / p + 1.0, pe, r)?, one, true)?;
    let t7b = run(&pu_full, b(1.0, Exponent::Inf, one)?, one, true)?;
    let t8 = run(&high_a, b(d / p, pe, one)?, one, false)?;

    let eps_tilde = eps * nu;
    let value = t1
        + t2
        + t3a.max(t3b)
        + eps_tilde * t4
        + nu * t5
        + nu * t6
        + nu * t7a.max(t7b)
        + t8 / eps;
    Ok(NormValue {
        value,
        label: format!("X[p={p} r={r} eps={eps} nu={nu} j0={j0}]"),
        j_range: jr,
        snapshots: traj.len(),
    })
}

/// The four-term data functional whose smallness (relative to nu) drives
/// global existence for the compressible flow.
pub fn c0_functional(
    a0: &SpectralField,
    u0: &VectorField,
    eps: f64,
    nu: f64,
    p: f64,
    r: Exponent,
    j0: i32,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    check_rate_params(eps, nu, p)?;
    r.validate("c0.r")?;
    let split = SplitConfig::new(j0, eps * nu)?;
    let d = a0.grid().d() as f64;
    let qu = project_q(u0);
    let pu = project_p(u0);
    let pe = Exponent::Finite(p);
    let one = Exponent::ONE;
    let sp = Some(&split);
    let b = BesovSpec::new;
    let times = [0.0];
    let mut jr = (0, 0);
    let mut run = |comps: Vec<Comp>, spec: BesovSpec| -> Result<f64> {
        let (v, range) = blockwise(&times, &[comps], &spec, Exponent::Inf, false, sp, profile)?;
        jr = range;
        Ok(v)
    };

    let mut low_pair = vec![Comp { field: a0, side: Some(Side::Low) }];
    low_pair.extend(qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::Low) }));
    let t1 = run(low_pair, b(d / 2.0 - 1.0, Exponent::TWO, one)?)?;
    let high_qu: Vec<Comp> =
        qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::High) }).collect();
    let t2 = run(high_qu, b(d / p - 1.0, pe, one)?)?;
    let pu_comps = |side| pu.comps().iter().map(move |c| Comp { field: c, side }).collect::<Vec<_>>();
    let t3a = run(pu_comps(None), b(d / p - 1.0, pe, r)?)?;
    let t3b = run(pu_comps(None), b(-1.0, Exponent::Inf, one)?)?;
    let t4 = run(vec![Comp { field: a0, side: Some(Side::High) }], b(d / p, pe, one)?)?;

    let value = t1 + t2 + t3a.max(t3b) + (eps * nu) * t4;
    Ok(NormValue {
        value,
        label: format!("C0[p={p} r={r} eps={eps} nu={nu} j0={j0}]"),
        j_range: jr,
        snapshots: 1,
    })
}

struct TripleParts {
    a: SpectralField,
    qu: VectorField,
    pu: VectorField,
    th: SpectralField,
}

/// The seven-term solution norm for the heat-conducting flow.
pub fn y_norm(
    traj: &TripleTrajectory,
    eps: f64,
    nu: f64,
    p: f64,
    j0: i32,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    if traj.is_empty() {
        return Err(Error::TimeAxis("empty trajectory".into()));
    }
    check_rate_params(eps, nu, p)?;
    let split = SplitConfig::new(j0, eps * nu)?;
    let d = traj.states()[0].0.grid().d() as f64;
    let times = traj.times();
    let parts: Vec<TripleParts> = traj
        .states()
        .iter()
        .map(|(a, u, th)| TripleParts {
            a: a.clone(),
            qu: project_q(u),
            pu: project_p(u),
            th: th.clone(),
        })
        .collect();
    let pe = Exponent::Finite(p);
    let one = Exponent::ONE;
    let inf = Exponent::Inf;
    let sp = Some(&split);
    let b = BesovSpec::new;
    let mut jr = (0, 0);
    let mut run = |samples: Vec<Vec<Comp>>, spec: BesovSpec, q, tilde| -> Result<f64> {
        let (v, range) = blockwise(times, &samples, &spec, q, tilde, sp, profile)?;
        jr = range;
        Ok(v)
    };

    fn low_triple(pt: &TripleParts) -> Vec<Comp<'_>> {
        let mut v = vec![Comp { field: &pt.a, side: Some(Side::Low) }];
        v.extend(pt.qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::Low) }));
        v.push(Comp { field: &pt.th, side: Some(Side::Low) });
        v
    }
    fn pu_high_qu(pt: &TripleParts) -> Vec<Comp<'_>> {
        let mut v: Vec<Comp> =
            pt.pu.comps().iter().map(|c| Comp { field: c, side: None }).collect();
        v.extend(pt.qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::High) }));
        v
    }

    let y1 = run(parts.iter().map(low_triple).collect(), b(d / 2.0 - 1.0, Exponent::TWO, one)?, inf, false)?;
    let y2 = run(parts.iter().map(pu_high_qu).collect(), b(d / p - 1.0, pe, one)?, inf, false)?;
    let y3 = run(
        parts.iter().map(|pt| vec![Comp { field: &pt.a, side: Some(Side::High) }]).collect(),
        b(d / p, pe, one)?,
        inf,
        false,
    )?;
    let y4 = run(
        parts.iter().map(|pt| vec![Comp { field: &pt.th, side: Some(Side::High) }]).collect(),
        b(d / p - 2.0, pe, one)?,
        inf,
        false,
    )?;
    let y5 = run(parts.iter().map(low_triple).collect(), b(d / 2.0 + 1.0, Exponent::TWO, one)?, one, false)?;
    let y6 = run(parts.iter().map(pu_high_qu).collect(), b(d / p + 1.0, pe, one)?, one, false)?;
    let y7 = run(
        parts
            .iter()
            .map(|pt| {
                vec![
                    Comp { field: &pt.a, side: Some(Side::High) },
                    Comp { field: &pt.th, side: Some(Side::High) },
                ]
            })
            .collect(),
        b(d / p, pe, one)?,
        one,
        false,
    )?;

    let eps_tilde = eps * nu;
    let value = y1 + y2 + eps_tilde * y3 + y4 / eps_tilde + nu * y5 + nu * y6 + y7 / eps;
    Ok(NormValue {
        value,
        label: format!("Y[p={p} eps={eps} nu={nu} j0={j0}]"),
        j_range: jr,
        snapshots: traj.len(),
    })
}

/// The four-term data functional for the heat-conducting flow.
pub fn y0_functional(
    a0: &SpectralField,
    u0: &VectorField,
    th0: &SpectralField,
    eps: f64,
    nu: f64,
    p: f64,
    j0: i32,
    profile: &DyadicProfile,
) -> Result<NormValue> {
    check_rate_params(eps, nu, p)?;
    let split = SplitConfig::new(j0, eps * nu)?;
    let d = a0.grid().d() as f64;
    let qu = project_q(u0);
    let pu = project_p(u0);
    let pe = Exponent::Finite(p);
    let one = Exponent::ONE;
    let sp = Some(&split);
    let b = BesovSpec::new;
    let times = [0.0];
    let mut jr = (0, 0);
    let mut run = |comps: Vec<Comp>, spec: BesovSpec| -> Result<f64> {
        let (v, range) = blockwise(&times, &[comps], &spec, Exponent::Inf, false, sp, profile)?;
        jr = range;
        Ok(v)
    };

    let mut low_triple = vec![Comp { field: a0, side: Some(Side::Low) }];
    low_triple.extend(qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::Low) }));
    low_triple.push(Comp { field: th0, side: Some(Side::Low) });
    let y1 = run(low_triple, b(d / 2.0 - 1.0, Exponent::TWO, one)?)?;

    let mut pu_high_qu: Vec<Comp> =
        pu.comps().iter().map(|c| Comp { field: c, side: None }).collect();
    pu_high_qu.extend(qu.comps().iter().map(|c| Comp { field: c, side: Some(Side::High) }));
    let y2 = run(pu_high_qu, b(d / p - 1.0, pe, one)?)?;

    let y3 = run(vec![Comp { field: a0, side: Some(Side::High) }], b(d / p, pe, one)?)?;
    let y4 = run(vec![Comp { field: th0, side: Some(Side::High) }], b(d / p - 2.0, pe, one)?)?;

    let eps_tilde = eps * nu;
    let value = y1 + y2 + eps_tilde * y3 + y4 / eps_tilde;
    Ok(NormValue {
        value,
        label: format!("Y0[p={p} eps={eps} nu={nu} j0={j0}]"),
        j_range: jr,
        snapshots: 1,
    })
}
