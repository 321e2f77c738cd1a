//! Mach-number sweeps. One datum family is run across a list of eps values
//! together with the limit solutions it should approach: the incompressible
//! flow started from the solenoidal part and, for the conducting system,
//! the transported scalar. Runs persist as checkpoint files plus a manifest
//! from which the whole sweep can be reproduced.

use crate::admissible;
use crate::data::{generate_data, Budget, DataSpec, GeneratedData};
use lowmach_core::error::{Error, Result};
use lowmach_core::exponent::Exponent;
use lowmach_core::grid::Grid;
use lowmach_core::io::{write_records, FieldRecord, Manifest};
use lowmach_solver::baro::{run_baro, BaroRun, BaroState};
use lowmach_solver::incomp::{run_incompressible, FlowRun, FlowState};
use lowmach_solver::nsf::{run_nsf, NsfConfig, NsfRun, NsfState};
use lowmach_solver::params::{PhysicalParams, PressureLaw, Scheme, StepperConfig};
use lowmach_solver::theta::{run_theta_limit, ScalarRun, ScalarState};
use std::path::Path;

/// Which compressible system the sweep runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Barotropic,
    Conducting,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Barotropic => "barotropic",
            System::Conducting => "conducting",
        }
    }

    pub fn parse(s: &str) -> Result<System> {
        match s.trim() {
            "barotropic" => Ok(System::Barotropic),
            "conducting" => Ok(System::Conducting),
            other => Err(Error::validation(
                "system",
                format!("unknown system '{other}' (expected barotropic or conducting)"),
            )),
        }
    }
}

/// Sweep parameters: the eps list, the viscosity split, the exponent window
/// the runs claim to sit in, and the shared horizon.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    pub nu: f64,
    pub mu: f64,
    pub kappa: Option<f64>,
    pub p: f64,
    pub r: Exponent,
    /// Planar rate exponent parameter; only meaningful for d = 2.
    pub c: Option<f64>,
    pub horizon: f64,
    pub system: System,
    /// Regenerate the datum for every eps instead of reusing the first one.
    pub fresh_data_per_eps: bool,
}

impl SweepConfig {
    /// Shear viscosity is prescribed; the second coefficient makes the
    /// total nu = lambda + 2 mu come out right.
    pub fn lambda(&self) -> f64 {
        self.nu - 2.0 * self.mu
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::validation("eps_list", "at least one eps value is required"));
        }
        for (i, eps) in self.eps_list.iter().enumerate() {
            if !(*eps > 0.0) || !eps.is_finite() {
                return Err(Error::validation(
                    format!("eps_list[{i}]"),
                    "eps must be positive and finite",
                ));
            }
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::validation("nu", "total viscosity must be positive"));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::validation("mu", "shear viscosity must be positive"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::validation("horizon", "horizon must be positive"));
        }
        match self.system {
            System::Barotropic => admissible::check_acoustic(d, self.p, self.r, self.c)?,
            System::Conducting => {
                if self.kappa.is_none() {
                    return Err(Error::validation(
                        "kappa",
                        "the conducting system needs a conduction coefficient",
                    ));
                }
                // The conducting window is checked by the caller when it
                // matters; planar conducting runs are allowed but reported
                // as outside the proven window via SweepOutput.
            }
        }
        Ok(())
    }
}

/// One eps worth of sweep output.
#[derive(Clone, Debug)]
pub struct EpsRun {
    pub eps: f64,
    pub eps_tilde: f64,
    pub data: GeneratedData,
    pub baro: Option<BaroRun>,
    pub nsf: Option<NsfRun>,
}

/// Everything a rate or weak-convergence measurement needs.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub per_eps: Vec<EpsRun>,
    pub reference_flow: FlowRun,
    pub reference_theta: Option<ScalarRun>,
    /// Set when a conducting sweep runs outside the proven (d, p) window.
    pub outside_scope: bool,
    pub grid: Grid,
    /// Actual end time, steps * dt.
    pub horizon: f64,
    pub config: SweepConfig,
    pub data_spec: DataSpec,
}

fn abort(eps: f64, completed: &[f64], source: Error) -> Error {
    Error::SweepAborted {
        eps,
        completed: completed.to_vec(),
        source: Box::new(source),
    }
}

/// Run the configured system for every eps, then the reference solutions.
/// With `out_dir` set, snapshots and a manifest land there.
pub fn run_sweep(
    data_spec: &DataSpec,
    sweep: &SweepConfig,
    cfg: &StepperConfig,
    out_dir: Option<&Path>,
) -> Result<SweepOutput> {
    let grid = data_spec.grid;
    let d = grid.d();
    sweep.validate(d)?;
    cfg.validate()?;
    let steps = ((sweep.horizon / cfg.dt).round() as usize).max(1);
    let lambda = sweep.lambda();
    let outside_scope = sweep.system == System::Conducting
        && !admissible::conducting_in_scope(d, sweep.p);

    let first_data = generate_data(data_spec, sweep.eps_list[0], sweep.nu)?;
    let mut per_eps: Vec<EpsRun> = Vec::with_capacity(sweep.eps_list.len());
    let mut completed: Vec<f64> = Vec::new();

    for (i, &eps) in sweep.eps_list.iter().enumerate() {
        let data = if i == 0 {
            first_data.clone()
        } else if sweep.fresh_data_per_eps {
            generate_data(data_spec, eps, sweep.nu).map_err(|e| abort(eps, &completed, e))?
        } else {
            first_data.clone()
        };
        let run = (|| -> Result<EpsRun> {
            match sweep.system {
                System::Barotropic => {
                    let params =
                        PhysicalParams::barotropic(eps, lambda, sweep.mu, PressureLaw::Isothermal)?;
                    let initial =
                        BaroState::new(0.0, data.a0.clone(), data.u0.clone(), params)?;
                    let run = run_baro(initial, cfg, steps)?;
                    Ok(EpsRun {
                        eps,
                        eps_tilde: eps * sweep.nu,
                        data: data.clone(),
                        baro: Some(run),
                        nsf: None,
                    })
                }
                System::Conducting => {
                    let kappa = sweep.kappa.expect("validated above");
                    let params =
                        PhysicalParams::heat_conducting(eps, lambda, sweep.mu, kappa)?;
                    let theta0 = data.theta0.clone().ok_or_else(|| {
                        Error::validation(
                            "budget.theta",
                            "conducting sweeps need a temperature component in the datum",
                        )
                    })?;
                    let initial =
                        NsfState::new(0.0, data.a0.clone(), data.u0.clone(), theta0, params)?;
                    let nsf_cfg = NsfConfig::new(cfg.dt)?.with_stepper(*cfg);
                    let run = run_nsf(initial, &nsf_cfg, steps)?;
                    Ok(EpsRun {
                        eps,
                        eps_tilde: eps * sweep.nu,
                        data: data.clone(),
                        baro: None,
                        nsf: Some(run),
                    })
                }
            }
        })()
        .map_err(|e| abort(eps, &completed, e))?;
        per_eps.push(run);
        completed.push(eps);
    }

    let reference_flow = run_incompressible(
        FlowState::new(0.0, first_data.v0.clone()),
        sweep.mu,
        cfg,
        steps,
    )?;
    let reference_theta = match (sweep.system, &first_data.transported0) {
        (System::Conducting, Some(tr0)) => {
            let u_traj = reference_flow.to_trajectory()?;
            let kappa = sweep.kappa.expect("validated above");
            Some(run_theta_limit(
                ScalarState::new(0.0, tr0.clone()),
                &u_traj,
                kappa,
                cfg,
                steps,
            )?)
        }
        _ => None,
    };

    let output = SweepOutput {
        per_eps,
        reference_flow,
        reference_theta,
        outside_scope,
        grid,
        horizon: steps as f64 * cfg.dt,
        config: sweep.clone(),
        data_spec: *data_spec,
    };
    if let Some(dir) = out_dir {
        persist(dir, data_spec, sweep, cfg, &output)?;
    }
    Ok(output)
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::Order1 => "order1",
        Scheme::Order2 => "order2",
    }
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    match s.trim() {
        "order1" => Ok(Scheme::Order1),
        "order2" => Ok(Scheme::Order2),
        other => Err(Error::validation("stepper.scheme", format!("unknown scheme '{other}'"))),
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips exactly.
    format!("{v:?}")
}

/// Serialize the full sweep setup into a manifest; `sweep_from_manifest`
/// inverts this and re-running reproduces the outputs bit for bit.
pub fn manifest_for(data_spec: &DataSpec, sweep: &SweepConfig, cfg: &StepperConfig) -> Manifest {
    let mut m = Manifest::new();
    let g = data_spec.grid;
    m.set("grid", "d", g.d().to_string());
    m.set("grid", "n", g.n().to_string());
    m.set("grid", "box", fmt_f64(g.l()));

    m.set("data", "p", fmt_f64(data_spec.p));
    m.set("data", "r", data_spec.r.to_string());
    m.set("data", "seed", data_spec.seed.to_string());
    m.set("data", "envelope", fmt_f64(data_spec.envelope));
    m.set("data", "j0", data_spec.j0.to_string());
    if let Some((lo, hi)) = data_spec.band {
        m.set("data", "band_lo", fmt_f64(lo));
        m.set("data", "band_hi", fmt_f64(hi));
    }
    if let Some(s) = data_spec.smallness {
        m.set("data", "smallness", fmt_f64(s));
    }
    let b = &data_spec.budget;
    m.set("data", "budget_low_acoustic", fmt_f64(b.low_acoustic));
    m.set("data", "budget_high_a", fmt_f64(b.high_a));
    m.set("data", "budget_high_qu", fmt_f64(b.high_qu));
    m.set("data", "budget_incompressible", fmt_f64(b.incompressible));
    if let Some(th) = b.theta {
        m.set("data", "budget_theta", fmt_f64(th));
    }

    let eps_list: Vec<String> = sweep.eps_list.iter().map(|e| fmt_f64(*e)).collect();
    m.set("sweep", "system", sweep.system.name().to_string());
    m.set("sweep", "eps", eps_list.join(","));
    m.set("sweep", "nu", fmt_f64(sweep.nu));
    m.set("sweep", "mu", fmt_f64(sweep.mu));
    if let Some(k) = sweep.kappa {
        m.set("sweep", "kappa", fmt_f64(k));
    }
    m.set("sweep", "p", fmt_f64(sweep.p));
    m.set("sweep", "r", sweep.r.to_string());
    if let Some(c) = sweep.c {
        m.set("sweep", "c", fmt_f64(c));
    }
    m.set("sweep", "horizon", fmt_f64(sweep.horizon));
    m.set("sweep", "fresh_data_per_eps", sweep.fresh_data_per_eps.to_string());

    m.set("stepper", "dt", fmt_f64(cfg.dt));
    m.set("stepper", "scheme", scheme_name(cfg.scheme).to_string());
    m.set("stepper", "snapshot_every", cfg.snapshot_every.to_string());
    m.set("stepper", "courant_limit", fmt_f64(cfg.courant_limit));
    m.set("stepper", "linear_only", cfg.linear_only.to_string());
    m
}

/// Rebuild the sweep inputs from a manifest written by `manifest_for`.
pub fn sweep_from_manifest(m: &Manifest) -> Result<(DataSpec, SweepConfig, StepperConfig)> {
    let d = m.require_usize("grid", "d")?;
    let n = m.require_usize("grid", "n")?;
    let l = m.require_f64("grid", "box")?;
    let grid = Grid::new(d, n, l)?;

    let p = m.require_f64("data", "p")?;
    let r = Exponent::parse(m.require("data", "r")?, "data.r")?;
    let seed = m.require_u64("data", "seed")?;
    let budget = Budget {
        low_acoustic: m.require_f64("data", "budget_low_acoustic")?,
        high_a: m.require_f64("data", "budget_high_a")?,
        high_qu: m.require_f64("data", "budget_high_qu")?,
        incompressible: m.require_f64("data", "budget_incompressible")?,
        theta: match m.get("data", "budget_theta") {
            Some(_) => Some(m.require_f64("data", "budget_theta")?),
            None => None,
        },
    };
    let mut data_spec = DataSpec::new(grid, p, r, budget, seed);
    data_spec.envelope = m.require_f64("data", "envelope")?;
    data_spec.j0 = m.require_f64("data", "j0")? as i32;
    if m.get("data", "band_lo").is_some() || m.get("data", "band_hi").is_some() {
        data_spec.band =
            Some((m.require_f64("data", "band_lo")?, m.require_f64("data", "band_hi")?));
    }
    if m.get("data", "smallness").is_some() {
        data_spec.smallness = Some(m.require_f64("data", "smallness")?);
    }

    let eps_text = m.require("sweep", "eps")?;
    let mut eps_list = Vec::new();
    for (i, tok) in eps_text.split(',').enumerate() {
        let v: f64 = tok.trim().parse().map_err(|_| {
            Error::validation(format!("sweep.eps[{i}]"), format!("cannot parse '{tok}'"))
        })?;
        eps_list.push(v);
    }
    let sweep = SweepConfig {
        eps_list,
        nu: m.require_f64("sweep", "nu")?,
        mu: m.require_f64("sweep", "mu")?,
        kappa: match m.get("sweep", "kappa") {
            Some(_) => Some(m.require_f64("sweep", "kappa")?),
            None => None,
        },
        p: m.require_f64("sweep", "p")?,
        r: Exponent::parse(m.require("sweep", "r")?, "sweep.r")?,
        c: match m.get("sweep", "c") {
            Some(_) => Some(m.require_f64("sweep", "c")?),
            None => None,
        },
        horizon: m.require_f64("sweep", "horizon")?,
        system: System::parse(m.require("sweep", "system")?)?,
        fresh_data_per_eps: m.require_bool("sweep", "fresh_data_per_eps")?,
    };

    let cfg = StepperConfig::new(m.require_f64("stepper", "dt")?)?
        .with_scheme(parse_scheme(m.require("stepper", "scheme")?)?)
        .with_snapshot_every(m.require_usize("stepper", "snapshot_every")?)
        .with_courant_limit(m.require_f64("stepper", "courant_limit")?)
        .with_linear_only(m.require_bool("stepper", "linear_only")?);
    Ok((data_spec, sweep, cfg))
}

/// Write one checkpoint file per (run, snapshot) plus the manifest.
fn persist(
    dir: &Path,
    data_spec: &DataSpec,
    sweep: &SweepConfig,
    cfg: &StepperConfig,
    output: &SweepOutput,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut m = manifest_for(data_spec, sweep, cfg);

    for (ri, run) in output.per_eps.iter().enumerate() {
        let section = format!("run.{ri}");
        m.set(&section, "eps", fmt_f64(run.eps));
        let prefix = format!("run{ri:02}");
        m.set(&section, "prefix", prefix.clone());
        let count = match (&run.baro, &run.nsf) {
            (Some(b), _) => b.snapshots.len(),
            (_, Some(n)) => n.snapshots.len(),
            _ => 0,
        };
        m.set(&section, "snapshots", count.to_string());
        for si in 0..count {
            let path = dir.join(format!("{prefix}_snap{si:04}.chk"));
            let mut records: Vec<FieldRecord> = Vec::new();
            match (&run.baro, &run.nsf) {
                (Some(b), _) => {
                    let st = &b.snapshots[si];
                    records.push(FieldRecord {
                        field: st.a.clone(),
                        t: st.t,
                        eps: run.eps,
                        nu: sweep.nu,
                    });
                    for comp in st.u.comps() {
                        records.push(FieldRecord {
                            field: comp.clone(),
                            t: st.t,
                            eps: run.eps,
                            nu: sweep.nu,
                        });
                    }
                }
                (_, Some(nr)) => {
                    let st = &nr.snapshots[si];
                    records.push(FieldRecord {
                        field: st.a.clone(),
                        t: st.t,
                        eps: run.eps,
                        nu: sweep.nu,
                    });
                    for comp in st.u.comps() {
                        records.push(FieldRecord {
                            field: comp.clone(),
                            t: st.t,
                            eps: run.eps,
                            nu: sweep.nu,
                        });
                    }
                    records.push(FieldRecord {
                        field: st.theta.clone(),
                        t: st.t,
                        eps: run.eps,
                        nu: sweep.nu,
                    });
                }
                _ => {}
            }
            write_records(&path, &records)?;
        }
    }

    let ref_count = output.reference_flow.snapshots.len();
    m.set("reference", "prefix", "ref".to_string());
    m.set("reference", "snapshots", ref_count.to_string());
    for (si, st) in output.reference_flow.snapshots.iter().enumerate() {
        let path = dir.join(format!("ref_snap{si:04}.chk"));
        let records: Vec<FieldRecord> = st
            .v
            .comps()
            .iter()
            .map(|comp| FieldRecord { field: comp.clone(), t: st.t, eps: 0.0, nu: sweep.nu })
            .collect();
        write_records(&path, &records)?;
    }
    if let Some(theta_run) = &output.reference_theta {
        m.set("reference_theta", "prefix", "theta".to_string());
        m.set("reference_theta", "snapshots", theta_run.snapshots.len().to_string());
        for (si, st) in theta_run.snapshots.iter().enumerate() {
            let path = dir.join(format!("theta_snap{si:04}.chk"));
            let records = vec![FieldRecord {
                field: st.field.clone(),
                t: st.t,
                eps: 0.0,
                nu: sweep.nu,
            }];
            write_records(&path, &records)?;
        }
    }

    m.write(dir.join("manifest.txt"))
}
