//! Bony decomposition on the discrete torus: paraproducts, the remainder
//! term, and fitted-constant checks for the commutator and composition
//! estimates used by the stability analysis.
//!
//! Block operators annihilate constants, so the three pieces reconstruct the
//! dealiased product only up to the product of the two means. That zero-mode
//! term is carried as a separate ledger entry in [`BonyParts`] instead of
//! being smeared into one of the pieces.

use crate::besov::{besov_norm, besov_norm_joint, BesovSpec};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::{lp_norm, SpectralField};
use crate::grid::Grid;
use crate::lp::{delta_j, dyadic_range, s_j, DyadicProfile};
use crate::ops::{gradient, product, Multiplier};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// |G(0)| above this is a hard error: padding assumes the law vanishes at 0.
const ORIGIN_TOL: f64 = 1e-12;

/// When the right side of an inequality vanishes exactly, a left side at or
/// below this absolute scale counts as zero too (fitted constant 0); above
/// it the sample is rejected as degenerate.
const ZERO_SIDE_TOL: f64 = 1e-13;

/// The low and high paraproducts plus the remainder of one product, with the
/// mean interaction kept in a separate ledger: the pieces sum to the
/// dealiased product of the inputs minus `mean_product` on the zero mode.
#[derive(Clone, Debug)]
pub struct BonyParts {
    pub t_uv: SpectralField,
    pub t_vu: SpectralField,
    pub r_uv: SpectralField,
    pub mean_u: Complex64,
    pub mean_v: Complex64,
}

impl BonyParts {
    /// The zero-mode term not carried by any of the three pieces.
    pub fn mean_product(&self) -> Complex64 {
        self.mean_u * self.mean_v
    }

    /// Sum of the pieces with the mean ledger restored; reproduces the
    /// dealiased product of the inputs up to roundoff.
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = self.t_uv.clone();
        out.add_assign_scaled(&self.t_vu, 1.0);
        out.add_assign_scaled(&self.r_uv, 1.0);
        out.coeffs_mut()[0] += self.mean_product();
        out
    }
}

/// Low-high paraproduct: sum over resolved blocks of the exactly dealiased
/// product of the below-block low-pass of `u` with each block of `v`.
pub fn paraproduct(
    u: &SpectralField,
    v: &SpectralField,
    profile: &DyadicProfile,
) -> Result<SpectralField> {
    u.grid().same_layout(v.grid(), "paraproduct")?;
    let (j_lo, j_hi) = dyadic_range(u.grid());
    let mut acc = SpectralField::zeros(*u.grid());
    for j in j_lo..=j_hi {
        let dv = delta_j(v, j, profile);
        if dv.spectral_energy() == 0.0 {
            continue;
        }
        let su = s_j(u, j - 1, profile);
        acc.add_assign_scaled(&product(&su, &dv)?, 1.0);
    }
    Ok(acc)
}

/// Remainder: sum over blocks of `u` against the three neighbouring blocks
/// of `v`. Symmetric in its arguments.
pub fn remainder(
    u: &SpectralField,
    v: &SpectralField,
    profile: &DyadicProfile,
) -> Result<SpectralField> {
    u.grid().same_layout(v.grid(), "remainder")?;
    let (j_lo, j_hi) = dyadic_range(u.grid());
    let mut acc = SpectralField::zeros(*u.grid());
    for j in j_lo..=j_hi {
        let du = delta_j(u, j, profile);
        if du.spectral_energy() == 0.0 {
            continue;
        }
        let window = block_window(v, j, profile);
        if window.spectral_energy() == 0.0 {
            continue;
        }
        acc.add_assign_scaled(&product(&du, &window)?, 1.0);
    }
    Ok(acc)
}

/// Three-block window around index j.
fn block_window(v: &SpectralField, j: i32, profile: &DyadicProfile) -> SpectralField {
    let mut w = delta_j(v, j, profile);
    w.add_assign_scaled(&delta_j(v, j - 1, profile), 1.0);
    w.add_assign_scaled(&delta_j(v, j + 1, profile), 1.0);
    w
}

/// Full decomposition of the dealiased product into both paraproducts, the
/// remainder, and the mean ledger.
pub fn bony_decompose(
    u: &SpectralField,
    v: &SpectralField,
    profile: &DyadicProfile,
) -> Result<BonyParts> {
    u.grid().same_layout(v.grid(), "bony_decompose")?;
    Ok(BonyParts {
        t_uv: paraproduct(u, v, profile)?,
        t_vu: paraproduct(v, u, profile)?,
        r_uv: remainder(u, v, profile)?,
        mean_u: u.mean(),
        mean_v: v.mean(),
    })
}

/// Fraction of spectral energy carried by frequencies with |xi| outside
/// [lo, hi]. Zero fields report 0.
pub fn energy_fraction_outside(f: &SpectralField, lo: f64, hi: f64) -> f64 {
    let g = f.grid();
    let total = f.spectral_energy();
    if total == 0.0 {
        return 0.0;
    }
    let mut outside = 0.0;
    for (flat, c) in f.coeffs().iter().enumerate() {
        let xi = g.frequency(flat);
        let mag = xi[..g.d()].iter().map(|x| x * x).sum::<f64>().sqrt();
        if mag < lo || mag > hi {
            outside += c.norm_sqr();
        }
    }
    outside / total
}

/// One measured instance (or a fitted family) of an inequality
/// lhs <= C * rhs. The fitted constant is the max ratio over the sample set;
/// it is reported, never judged against an absolute threshold.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub label: String,
    /// Left side at the maximizing sample.
    pub lhs: f64,
    /// Right side at the maximizing sample.
    pub rhs: f64,
    /// max over samples of lhs / rhs (0 when every sample was degenerate).
    pub fitted: f64,
    pub samples: usize,
    /// Seed of the sample attaining the fit, for reproduction.
    pub max_sample: u64,
}

impl InequalityReport {
    pub fn single(label: String, lhs: f64, rhs: f64) -> Result<InequalityReport> {
        let fitted = ratio_checked(lhs, rhs, &label)?;
        Ok(InequalityReport { label, lhs, rhs, fitted, samples: 1, max_sample: 0 })
    }

    pub fn csv_header() -> &'static str {
        "label,lhs,rhs,fitted,samples,max_sample"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{},{}",
            self.label, self.lhs, self.rhs, self.fitted, self.samples, self.max_sample
        )
    }
}

fn ratio_checked(lhs: f64, rhs: f64, label: &str) -> Result<f64> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::DegenerateSignal(format!(
            "{label}: non-finite sides lhs = {lhs}, rhs = {rhs}"
        )));
    }
    if rhs == 0.0 {
        if lhs <= ZERO_SIDE_TOL {
            return Ok(0.0);
        }
        return Err(Error::DegenerateSignal(format!(
            "{label}: zero right side against lhs = {lhs:.3e}"
        )));
    }
    Ok(lhs / rhs)
}

/// Commutator of a low-passed 0-order multiplier with the paraproduct by
/// `a`, applied to `b`.
fn commutator_field(
    a: &SpectralField,
    b: &SpectralField,
    symbol: &Multiplier,
    j0: i32,
    profile: &DyadicProfile,
) -> Result<SpectralField> {
    let first = s_j(&symbol.apply(&paraproduct(a, b, profile)?)?, j0, profile);
    let second = paraproduct(a, &s_j(&symbol.apply(b)?, j0, profile), profile)?;
    first.sub(&second)
}

/// Measures the commutator bound: the norm of [S_{j0} A(D), T_a] b in
/// B^{sigma+s}_{p,1} against the product of a gradient norm of `a` and a
/// block norm of `b`. For s < 1 the right side is
/// ||grad a||_{B^{s-1}_{p1,1}} * ||b||_{B^sigma_{p2,inf}}; the endpoint
/// s = 1 uses ||grad a||_{L^{p1}} * ||b||_{B^sigma_{p2,1}}.
#[allow(clippy::too_many_arguments)]
pub fn check_commutator(
    a: &SpectralField,
    b: &SpectralField,
    symbol: &Multiplier,
    j0: i32,
    s: f64,
    sigma: f64,
    p: Exponent,
    p1: Exponent,
    p2: Exponent,
    profile: &DyadicProfile,
) -> Result<InequalityReport> {
    a.grid().same_layout(b.grid(), "check_commutator")?;
    validate_commutator_params(s, sigma, p, p1, p2)?;
    let comm = commutator_field(a, b, symbol, j0, profile)?;
    let lhs = besov_norm(&comm, &BesovSpec::new(sigma + s, p, Exponent::ONE)?, profile)?.value;
    let grad_a = gradient(a);
    let comps: Vec<&SpectralField> = (0..a.grid().d()).map(|i| grad_a.comp(i)).collect();
    let rhs = if s < 1.0 {
        let na = besov_norm_joint(&comps, &BesovSpec::new(s - 1.0, p1, Exponent::ONE)?, profile)?;
        let nb = besov_norm(b, &BesovSpec::new(sigma, p2, Exponent::Inf)?, profile)?;
        na.value * nb.value
    } else {
        let na = lp_norm(&comps, p1)?;
        let nb = besov_norm(b, &BesovSpec::new(sigma, p2, Exponent::ONE)?, profile)?;
        na * nb.value
    };
    let label = format!("commutator[j0={j0} s={s} sigma={sigma} p={p} p1={p1} p2={p2}]");
    InequalityReport::single(label, lhs, rhs)
}

fn validate_commutator_params(
    s: f64,
    sigma: f64,
    p: Exponent,
    p1: Exponent,
    p2: Exponent,
) -> Result<()> {
    p.validate("p")?;
    p1.validate("p1")?;
    p2.validate("p2")?;
    if !s.is_finite() || !sigma.is_finite() {
        return Err(Error::validation("s/sigma", "regularity indices must be finite"));
    }
    if s > 1.0 {
        return Err(Error::Inadmissible(format!(
            "commutator bound holds for s <= 1, got s = {s}"
        )));
    }
    let gap = (p.recip() - p1.recip() - p2.recip()).abs();
    if gap > 1e-12 {
        return Err(Error::Inadmissible(format!(
            "need 1/p = 1/p1 + 1/p2, got 1/{p} vs 1/{p1} + 1/{p2}"
        )));
    }
    Ok(())
}

/// Deterministic real sample pair for the fitted-constant checks: random
/// phases under a smooth power-law envelope, conjugate-symmetrized.
pub fn sample_pair(grid: &Grid, seed: u64) -> (SpectralField, SpectralField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_field(grid, &mut rng);
    let b = random_field(grid, &mut rng);
    (a, b)
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::zeros(*grid);
    let power = -0.5 * (grid.d() as f64 + 1.0);
    for flat in 0..grid.modes() {
        let xi = grid.frequency(flat);
        let mag2: f64 = xi[..grid.d()].iter().map(|x| x * x).sum();
        let envelope = (1.0 + mag2).powf(power);
        let re = rng.gen_range(-1.0..1.0);
        let im = rng.gen_range(-1.0..1.0);
        f.coeffs_mut()[flat] = Complex64::new(re, im) * envelope;
    }
    f.symmetrize();
    f
}

/// Fits the commutator constant as the max ratio over `samples` seeded
/// pairs; the report records the maximizing seed and its two sides.
#[allow(clippy::too_many_arguments)]
pub fn fit_commutator_constant(
    grid: &Grid,
    symbol: &Multiplier,
    j0: i32,
    s: f64,
    sigma: f64,
    p: Exponent,
    p1: Exponent,
    p2: Exponent,
    samples: usize,
    seed: u64,
    profile: &DyadicProfile,
) -> Result<InequalityReport> {
    if samples == 0 {
        return Err(Error::validation("samples", "need at least one sample"));
    }
    let mut best: Option<InequalityReport> = None;
    for i in 0..samples {
        let sk = seed.wrapping_add(i as u64);
        let (a, b) = sample_pair(grid, sk);
        let mut rep = check_commutator(&a, &b, symbol, j0, s, sigma, p, p1, p2, profile)?;
        rep.max_sample = sk;
        if best.as_ref().map_or(true, |c| rep.fitted > c.fitted) {
            best = Some(rep);
        }
    }
    let mut out = best.expect("samples >= 1");
    out.samples = samples;
    Ok(out)
}

/// Pointwise composition G(a) evaluated on the dealiased physical grid.
/// `a` is treated as real valued; requires G(0) = 0 and all physical values
/// within the amplitude bound `max_abs` (the coefficient laws of the model
/// are only used on |z| <= 1/2).
pub fn compose(
    a: &SpectralField,
    g: impl Fn(f64) -> f64,
    max_abs: f64,
) -> Result<SpectralField> {
    if !(max_abs > 0.0) || !max_abs.is_finite() {
        return Err(Error::validation("max_abs", "amplitude bound must be positive and finite"));
    }
    if g(0.0).abs() > ORIGIN_TOL {
        return Err(Error::validation("G", "composition requires G(0) = 0"));
    }
    let vals = a.to_padded();
    let worst = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if worst > max_abs {
        return Err(Error::OutOfRange { max_abs: worst, lo: -max_abs, hi: max_abs });
    }
    let mapped: Vec<f64> = vals.iter().map(|&v| g(v)).collect();
    SpectralField::from_padded(*a.grid(), &mapped)
}

/// Instantaneous composition bound: ||G(a)|| / ||a|| in B^s_{p,1}, s > 0.
pub fn check_composition(
    a: &SpectralField,
    g: impl Fn(f64) -> f64,
    max_abs: f64,
    s: f64,
    p: Exponent,
    profile: &DyadicProfile,
) -> Result<InequalityReport> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Inadmissible(format!(
            "composition bound holds for s > 0, got s = {s}"
        )));
    }
    let spec = BesovSpec::new(s, p, Exponent::ONE)?;
    let ga = compose(a, &g, max_abs)?;
    let lhs = besov_norm(&ga, &spec, profile)?.value;
    let rhs = besov_norm(a, &spec, profile)?.value;
    InequalityReport::single(format!("composition[s={s} p={p}]"), lhs, rhs)
}

/// Time-lifted composition bound: per-block L^m in time on both sides
/// (the tilde space-time norm of G(a) against that of a).
pub fn check_composition_over_time(
    traj: &crate::besov::Trajectory<SpectralField>,
    g: impl Fn(f64) -> f64,
    max_abs: f64,
    s: f64,
    p: Exponent,
    m: Exponent,
    profile: &DyadicProfile,
) -> Result<InequalityReport> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Inadmissible(format!(
            "composition bound holds for s > 0, got s = {s}"
        )));
    }
    let spec = crate::besov::SpaceTimeSpec::tilde(BesovSpec::new(s, p, Exponent::ONE)?, m, None);
    let mut mapped = crate::besov::Trajectory::new();
    let mut plain = crate::besov::Trajectory::new();
    for (t, a) in traj.times().iter().zip(traj.states()) {
        mapped.push(*t, vec![compose(a, &g, max_abs)?])?;
        plain.push(*t, vec![a.clone()])?;
    }
    let lhs = crate::besov::spacetime_norm(&mapped, &spec, profile)?.value;
    let rhs = crate::besov::spacetime_norm(&plain, &spec, profile)?.value;
    InequalityReport::single(format!("composition[s={s} p={p} time-L{m}]"), lhs, rhs)
}
