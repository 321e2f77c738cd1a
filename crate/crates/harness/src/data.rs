//! Deterministic random data with frequency-banded components whose norms
//! are scaled to a requested budget. Each component lives an octave clear of
//! the low/high threshold, so the individual budget terms decouple exactly
//! and one measurement per component suffices to hit the target.

use lowmach_core::besov::{besov_norm_joint, truncated_norm_joint, BesovSpec, TruncatedSpec};
use lowmach_core::error::{Error, Result};
use lowmach_core::exponent::Exponent;
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_core::lp::{DyadicProfile, Side, SplitConfig};
use lowmach_core::ops::{project_p, project_q};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative slack accepted between a realized component norm and its budget.
pub const BUDGET_TOL: f64 = 1e-2;

/// Requested size of each data component, measured by the same terms as the
/// smallness functional: a joint low-frequency norm for the acoustic pair
/// (with the temperature joining it in the conducting case), separate
/// high-frequency norms for the density and the gradient-part velocity
/// (the density one carrying its eps*nu weight), the full-range norm of the
/// solenoidal part, and for the conducting system the (eps*nu)^{-1}-weighted
/// high-frequency temperature term.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub low_acoustic: f64,
    pub high_a: f64,
    pub high_qu: f64,
    pub incompressible: f64,
    pub theta: Option<f64>,
}

impl Budget {
    pub fn is_zero(&self) -> bool {
        self.low_acoustic == 0.0
            && self.high_a == 0.0
            && self.high_qu == 0.0
            && self.incompressible == 0.0
            && self.theta.unwrap_or(0.0) == 0.0
    }
}

/// Everything needed to generate one datum.
#[derive(Clone, Copy, Debug)]
pub struct DataSpec {
    pub grid: Grid,
    pub p: f64,
    pub r: Exponent,
    pub budget: Budget,
    /// Per-mode spectral envelope exponent beta: amplitudes fall off like
    /// (1 + |xi|^2)^{-beta/2}.
    pub envelope: f64,
    /// Optional magnitude band |xi| in [lo, hi] applied to every component.
    pub band: Option<(f64, f64)>,
    pub seed: u64,
    /// Low/high split reference index.
    pub j0: i32,
    /// If set, all components are scaled together so the smallness
    /// functional hits exactly this value.
    pub smallness: Option<f64>,
}

impl DataSpec {
    pub fn new(grid: Grid, p: f64, r: Exponent, budget: Budget, seed: u64) -> DataSpec {
        DataSpec {
            grid,
            p,
            r,
            budget,
            envelope: grid.d() as f64 + 1.0,
            band: None,
            seed,
            j0: 3,
            smallness: None,
        }
    }
}

/// A generated datum together with its limit targets.
#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub a0: SpectralField,
    pub u0: VectorField,
    pub theta0: Option<SpectralField>,
    /// Divergence-free limit velocity datum (the solenoidal part of u0).
    pub v0: VectorField,
    /// Transported-scalar limit datum theta0 - a0 (conducting case only).
    pub transported0: Option<SpectralField>,
}

/// Random real field with the per-mode envelope, restricted to an |xi| band.
fn enveloped_field(grid: Grid, seed: u64, beta: f64, band: (f64, f64)) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.modes()];
    for (flat, c) in coeffs.iter_mut().enumerate() {
        // Draw for every mode so the stream position is band-independent.
        let mag_draw: f64 = rng.gen_range(0.25..1.0);
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let xi = grid.frequency_mag(flat);
        if flat == 0 || xi < band.0 || xi > band.1 {
            continue;
        }
        let amp = mag_draw * (1.0 + xi * xi).powf(-beta / 2.0);
        *c = Complex64::from_polar(amp, phase);
    }
    let mut f = SpectralField::from_coeffs(grid, coeffs).expect("sized to the grid");
    f.symmetrize();
    f
}

fn enveloped_vector(grid: Grid, seed: u64, beta: f64, band: (f64, f64)) -> VectorField {
    let comps: Vec<SpectralField> =
        (0..grid.d()).map(|i| enveloped_field(grid, seed + 100 * i as u64, beta, band)).collect();
    VectorField::new(comps).expect("component grids match")
}

fn intersect(a: (f64, f64), b: Option<(f64, f64)>) -> (f64, f64) {
    match b {
        Some((lo, hi)) => (a.0.max(lo), a.1.min(hi)),
        None => a,
    }
}

fn unreachable_budget(component: &str, band: (f64, f64)) -> Error {
    Error::validation(
        format!("budget.{component}"),
        format!(
            "no resolvable modes in |xi| band [{:.4}, {:.4}]; the envelope/band does not fit the grid",
            band.0, band.1
        ),
    )
}

/// Multiplier taking `measured` to `target`; zero target zeroes the
/// component, zero measurement with a nonzero target is a budget error.
fn scale_factor(measured: f64, target: f64, component: &str, band: (f64, f64)) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    if measured <= 0.0 {
        return Err(unreachable_budget(component, band));
    }
    Ok(target / measured)
}

/// Generate the datum for the scaling pair (eps, nu). Identical inputs give
/// bit-identical outputs.
pub fn generate_data(spec: &DataSpec, eps: f64, nu: f64) -> Result<GeneratedData> {
    let grid = spec.grid;
    let d = grid.d() as f64;
    let profile = DyadicProfile::standard();
    let eps_tilde = eps * nu;
    let split = SplitConfig::new(spec.j0, eps_tilde)?;
    let j_cut = split.threshold();
    let xi_max = grid.xi_max();

    // The annulus of block j covers 3/4 < |xi|/2^j < 8/3 and the cutoff
    // vanishes at both ends, so modes at |xi| <= 1.5 * 2^{j_cut} touch no
    // block above the threshold and modes at |xi| >= (8/3) * 2^{j_cut}
    // touch no block at or below it. Every component then contributes to
    // exactly one side of the split and the budget terms decouple.
    let low_band = intersect((grid.xi_min() * 0.5, 1.5 * (2.0f64).powi(j_cut)), spec.band);
    let high_band = intersect(((8.0 / 3.0) * (2.0f64).powi(j_cut), xi_max), spec.band);
    let full_band = intersect((grid.xi_min() * 0.5, xi_max), spec.band);

    let b = &spec.budget;
    let conducting = b.theta.is_some();

    let mut a_low = enveloped_field(grid, spec.seed, spec.envelope, low_band);
    let mut a_high = enveloped_field(grid, spec.seed + 1, spec.envelope, high_band);
    let qu_low_raw = enveloped_vector(grid, spec.seed + 2, spec.envelope, low_band);
    let qu_high_raw = enveloped_vector(grid, spec.seed + 3, spec.envelope, high_band);
    let pu_raw = enveloped_vector(grid, spec.seed + 4, spec.envelope, full_band);
    let mut qu_low = project_q(&qu_low_raw);
    let mut qu_high = project_q(&qu_high_raw);
    let mut pu = project_p(&pu_raw);
    let mut theta_low = if conducting {
        enveloped_field(grid, spec.seed + 5, spec.envelope, low_band)
    } else {
        SpectralField::zeros(grid)
    };
    let mut theta_high = if conducting {
        enveloped_field(grid, spec.seed + 6, spec.envelope, high_band)
    } else {
        SpectralField::zeros(grid)
    };

    // Joint low-frequency acoustic budget, with the temperature included in
    // the conducting case (matching the smallness functional's first term).
    {
        let low_spec = TruncatedSpec {
            base: BesovSpec::new(d / 2.0 - 1.0, Exponent::TWO, Exponent::ONE)?,
            side: Side::Low,
            split,
        };
        let mut stack: Vec<&SpectralField> = vec![&a_low];
        stack.extend(qu_low.comps());
        if conducting {
            stack.push(&theta_low);
        }
        let measured = truncated_norm_joint(&stack, &low_spec, &profile)?.value;
        let s = scale_factor(measured, b.low_acoustic, "low_acoustic", low_band)?;
        a_low.scale(s);
        qu_low.scale(s);
        theta_low.scale(s);
    }

    // High-frequency gradient-part velocity.
    {
        let spec_h = TruncatedSpec {
            base: BesovSpec::new(d / spec.p - 1.0, Exponent::Finite(spec.p), Exponent::ONE)?,
            side: Side::High,
            split,
        };
        let stack: Vec<&SpectralField> = qu_high.comps().iter().collect();
        let measured = truncated_norm_joint(&stack, &spec_h, &profile)?.value;
        qu_high.scale(scale_factor(measured, b.high_qu, "high_qu", high_band)?);
    }

    // High-frequency density, budgeted with its eps*nu weight.
    {
        let spec_h = TruncatedSpec {
            base: BesovSpec::new(d / spec.p, Exponent::Finite(spec.p), Exponent::ONE)?,
            side: Side::High,
            split,
        };
        let measured = eps_tilde * truncated_norm_joint(&[&a_high], &spec_h, &profile)?.value;
        a_high.scale(scale_factor(measured, b.high_a, "high_a", high_band)?);
    }

    // Solenoidal part over the full band. The barotropic smallness
    // functional takes the larger of two norms here; the conducting one
    // uses a single summed norm, so measure whichever applies.
    {
        let stack: Vec<&SpectralField> = pu.comps().iter().collect();
        let na = besov_norm_joint(
            &stack,
            &BesovSpec::new(d / spec.p - 1.0, Exponent::Finite(spec.p), spec.r)?,
            &profile,
        )?
        .value;
        let measured = if conducting {
            na
        } else {
            let nb = besov_norm_joint(
                &stack,
                &BesovSpec::new(-1.0, Exponent::Inf, Exponent::ONE)?,
                &profile,
            )?
            .value;
            na.max(nb)
        };
        pu.scale(scale_factor(measured, b.incompressible, "incompressible", full_band)?);
    }

    // High-frequency temperature with its (eps*nu)^{-1} weight.
    if let Some(theta_budget) = b.theta {
        let spec_h = TruncatedSpec {
            base: BesovSpec::new(d / spec.p - 2.0, Exponent::Finite(spec.p), Exponent::ONE)?,
            side: Side::High,
            split,
        };
        let measured = truncated_norm_joint(&[&theta_high], &spec_h, &profile)?.value / eps_tilde;
        theta_high.scale(scale_factor(measured, theta_budget, "theta", high_band)?);
    }

    let mut a0 = a_low.add(&a_high)?;
    let mut u0 = VectorField::new(
        (0..grid.d())
            .map(|i| {
                let q = qu_low.comp(i).add(qu_high.comp(i))?;
                pu.comp(i).add(&q)
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let mut theta0 = if conducting { Some(theta_low.add(&theta_high)?) } else { None };

    // The solenoidal component is P(u0) exactly; projecting the assembled
    // u0 instead would leave pure rounding noise when the solenoidal
    // budget is zero, and noise is not divergence-free relative to itself.
    let mut v0 = pu;

    // Optional global rescale so the smallness functional hits its target
    // exactly; every budget term is 1-homogeneous, so ratios are preserved.
    if let Some(target) = spec.smallness {
        let current = match &theta0 {
            Some(th) => {
                lowmach_core::besov::y0_functional(
                    &a0, &u0, th, eps, nu, spec.p, spec.j0, &profile,
                )?
                .value
            }
            None => {
                lowmach_core::besov::c0_functional(
                    &a0, &u0, eps, nu, spec.p, spec.r, spec.j0, &profile,
                )?
                .value
            }
        };
        if current <= 0.0 {
            if target != 0.0 {
                return Err(unreachable_budget("smallness", full_band));
            }
        } else {
            let s = target / current;
            a0.scale(s);
            u0.scale(s);
            v0.scale(s);
            if let Some(th) = theta0.as_mut() {
                th.scale(s);
            }
        }
    }

    let transported0 = theta0.as_ref().map(|th| th.sub(&a0)).transpose()?;
    Ok(GeneratedData { a0, u0, theta0, v0, transported0 })
}
