//! Exact per-mode propagators for the stiff linear parts: the acoustic
//! 2x2 block coupling the density excess to the gradient-part velocity, the
//! 3x3 heat-conducting block that adds temperature, and scalar diffusion for
//! solenoidal components.
//!
//! All formulas are arranged so that no intermediate overflows: every
//! exponential that appears is of a nonpositive quantity.

use crate::params::PhysicalParams;
use lowmach_core::error::{Error, Result};
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use num_complex::Complex64;

/// sinh(x)/x switch to the difference form; below this the library sinh is
/// both accurate and overflow-free.
const SINH_DIFF_SWITCH: f64 = 30.0;

/// Entries of the symmetric 2x2 mode propagator: real diagonal, purely
/// imaginary off-diagonal.
#[derive(Clone, Copy, Debug)]
struct Block2 {
    aa: f64,
    /// imaginary part of the off-diagonal entry
    au: f64,
    uu: f64,
}

/// exp(dt * [[0, -ib], [-ib, -c]]) in the stable half-trace form.
fn acoustic_block(b: f64, c: f64, dt: f64) -> Block2 {
    let h = -0.5 * c;
    let disc = h * h - b * b;
    let (fc, fs) = if disc >= 0.0 {
        let delta = disc.sqrt();
        let lp = (h + delta) * dt;
        let lm = (h - delta) * dt;
        let fc = 0.5 * (lp.exp() + lm.exp());
        let fs = if delta * dt > SINH_DIFF_SWITCH {
            (lp.exp() - lm.exp()) / (2.0 * delta)
        } else if delta > 0.0 {
            (h * dt).exp() * (delta * dt).sinh() / delta
        } else {
            dt * (h * dt).exp()
        };
        (fc, fs)
    } else {
        let omega = (-disc).sqrt();
        let damp = (h * dt).exp();
        (damp * (omega * dt).cos(), damp * (omega * dt).sin() / omega)
    };
    Block2 { aa: fc + 0.5 * c * fs, au: -b * fs, uu: fc - 0.5 * c * fs }
}

type M3 = [[Complex64; 3]; 3];

fn m3_zero() -> M3 {
    [[Complex64::default(); 3]; 3]
}

fn m3_identity() -> M3 {
    let mut m = m3_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn m3_mul(a: &M3, b: &M3) -> M3 {
    let mut out = m3_zero();
    for i in 0..3 {
        for k in 0..3 {
            let aik = a[i][k];
            if aik == Complex64::default() {
                continue;
            }
            for j in 0..3 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn m3_norm(a: &M3) -> f64 {
    a.iter()
        .map(|row| row.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor series on the
/// scaled matrix.
fn expm3(a: &M3) -> M3 {
    let norm = m3_norm(a);
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scale = 0.5f64.powi(squarings as i32);
    let mut scaled = *a;
    for row in &mut scaled {
        for c in row.iter_mut() {
            *c *= scale;
        }
    }
    let mut result = m3_identity();
    let mut term = m3_identity();
    for k in 1..=24 {
        term = m3_mul(&term, &scaled);
        let f = 1.0 / k as f64;
        for (ri, ti) in result.iter_mut().zip(term.iter_mut()) {
            for (r, t) in ri.iter_mut().zip(ti.iter_mut()) {
                *t *= f;
                *r += *t;
            }
        }
        if m3_norm(&term) < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = m3_mul(&result, &result);
    }
    result
}

/// The linearized heat-conducting mode matrix at frequency magnitude |xi|:
/// rows are (density, longitudinal velocity, temperature).
fn conducting_matrix(b: f64, c: f64, e: f64) -> M3 {
    let ib = Complex64::new(0.0, -b);
    [
        [Complex64::default(), ib, Complex64::default()],
        [ib, Complex64::new(-c, 0.0), ib],
        [Complex64::default(), ib, Complex64::new(-e, 0.0)],
    ]
}

/// Splits a vector-field mode into its longitudinal coefficient and the
/// transverse remainder direction handled per component.
fn longitudinal(xi: &[f64], comps: &[Complex64]) -> (f64, Complex64) {
    let mag = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if mag == 0.0 {
        return (0.0, Complex64::default());
    }
    let mut u = Complex64::default();
    for (x, c) in xi.iter().zip(comps) {
        u += Complex64::new(x / mag, 0.0) * c;
    }
    (mag, u)
}

/// Full (d+1)x(d+1) propagator matrix at a single frequency, rows ordered
/// (density, velocity components). The steppers use the cached per-mode
/// blocks instead; this form exists for inspection and cross-checks.
pub fn baro_mode_matrix(xi: &[f64], params: &PhysicalParams, dt: f64) -> Result<Vec<Vec<Complex64>>> {
    params.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::validation("dt", "propagator step must be positive"));
    }
    let d = xi.len();
    let mag2: f64 = xi.iter().map(|x| x * x).sum();
    let mag = mag2.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let mut m = vec![vec![Complex64::default(); d + 1]; d + 1];
    if mag == 0.0 {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = one;
        }
        return Ok(m);
    }
    let blk = acoustic_block(mag / params.eps, params.nu() * mag2, dt);
    let damp = (-params.mu * mag2 * dt).exp();
    let off = Complex64::new(0.0, blk.au);
    m[0][0] = Complex64::new(blk.aa, 0.0);
    for i in 0..d {
        let ni = xi[i] / mag;
        m[0][1 + i] = off * ni;
        m[1 + i][0] = off * ni;
        for j in 0..d {
            let nj = xi[j] / mag;
            let delta = if i == j { 1.0 } else { 0.0 };
            m[1 + i][1 + j] = Complex64::new(damp * (delta - ni * nj) + blk.uu * ni * nj, 0.0);
        }
    }
    Ok(m)
}

/// Exact propagator of the linearized barotropic system on one grid for one
/// step size. Build once per (params, dt) and reuse across steps.
pub struct BaroPropagator {
    grid: Grid,
    blocks: Vec<Block2>,
    transverse: Vec<f64>,
}

impl BaroPropagator {
    pub fn new(grid: &Grid, params: &PhysicalParams, dt: f64) -> Result<BaroPropagator> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation("dt", "propagator step must be positive"));
        }
        let nu = params.nu();
        let mut blocks = Vec::with_capacity(grid.modes());
        let mut transverse = Vec::with_capacity(grid.modes());
        for flat in 0..grid.modes() {
            let xi = grid.frequency(flat);
            let mag2: f64 = xi[..grid.d()].iter().map(|x| x * x).sum();
            let mag = mag2.sqrt();
            blocks.push(acoustic_block(mag / params.eps, nu * mag2, dt));
            transverse.push((-params.mu * mag2 * dt).exp());
        }
        Ok(BaroPropagator { grid: *grid, blocks, transverse })
    }

    /// Advance (a, u) by the cached step: the acoustic block acts on the
    /// (density, longitudinal velocity) pair, plain diffusion on the rest.
    pub fn apply(&self, a: &SpectralField, u: &VectorField) -> Result<(SpectralField, VectorField)> {
        self.grid.same_layout(a.grid(), "propagator")?;
        self.grid.same_layout(u.grid(), "propagator")?;
        let d = self.grid.d();
        let mut a_new = a.clone();
        let mut u_new = u.clone();
        for flat in 0..self.grid.modes() {
            let xi = self.grid.frequency(flat);
            let comps: Vec<Complex64> = (0..d).map(|i| u.comp(i).coeffs()[flat]).collect();
            let (mag, long) = longitudinal(&xi[..d], &comps);
            let ahat = a.coeffs()[flat];
            if mag == 0.0 {
                continue;
            }
            let blk = self.blocks[flat];
            let off = Complex64::new(0.0, blk.au);
            a_new.coeffs_mut()[flat] = blk.aa * ahat + off * long;
            let long_new = off * ahat + blk.uu * long;
            let damp = self.transverse[flat];
            for i in 0..d {
                let dir = Complex64::new(xi[i] / mag, 0.0);
                let trans = comps[i] - dir * long;
                u_new.comp_mut(i).coeffs_mut()[flat] = damp * trans + dir * long_new;
            }
        }
        Ok((a_new, u_new))
    }
}

/// Exact propagator of the linearized heat-conducting system.
pub struct ConductingPropagator {
    grid: Grid,
    blocks: Vec<M3>,
    transverse: Vec<f64>,
}

impl ConductingPropagator {
    pub fn new(grid: &Grid, params: &PhysicalParams, dt: f64) -> Result<ConductingPropagator> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation("dt", "propagator step must be positive"));
        }
        let kappa = params
            .kappa
            .ok_or_else(|| Error::validation("kappa", "heat conduction required"))?;
        let nu = params.nu();
        let mut blocks = Vec::with_capacity(grid.modes());
        let mut transverse = Vec::with_capacity(grid.modes());
        for flat in 0..grid.modes() {
            let xi = grid.frequency(flat);
            let mag2: f64 = xi[..grid.d()].iter().map(|x| x * x).sum();
            let mag = mag2.sqrt();
            let m = conducting_matrix(mag / params.eps, nu * mag2, kappa * mag2);
            let mut e = expm3(&m3_scale(&m, dt));
            if mag == 0.0 {
                e = m3_identity();
            }
            blocks.push(e);
            transverse.push((-params.mu * mag2 * dt).exp());
        }
        Ok(ConductingPropagator { grid: *grid, blocks, transverse })
    }

    pub fn apply(
        &self,
        a: &SpectralField,
        u: &VectorField,
        theta: &SpectralField,
    ) -> Result<(SpectralField, VectorField, SpectralField)> {
        self.grid.same_layout(a.grid(), "propagator")?;
        self.grid.same_layout(u.grid(), "propagator")?;
        self.grid.same_layout(theta.grid(), "propagator")?;
        let d = self.grid.d();
        let mut a_new = a.clone();
        let mut u_new = u.clone();
        let mut t_new = theta.clone();
        for flat in 0..self.grid.modes() {
            let xi = self.grid.frequency(flat);
            let comps: Vec<Complex64> = (0..d).map(|i| u.comp(i).coeffs()[flat]).collect();
            let (mag, long) = longitudinal(&xi[..d], &comps);
            if mag == 0.0 {
                continue;
            }
            let e = &self.blocks[flat];
            let v = [a.coeffs()[flat], long, theta.coeffs()[flat]];
            let mut w = [Complex64::default(); 3];
            for (wi, row) in w.iter_mut().zip(e.iter()) {
                for (rij, vj) in row.iter().zip(v.iter()) {
                    *wi += rij * vj;
                }
            }
            a_new.coeffs_mut()[flat] = w[0];
            t_new.coeffs_mut()[flat] = w[2];
            let damp = self.transverse[flat];
            for i in 0..d {
                let dir = Complex64::new(xi[i] / mag, 0.0);
                let trans = comps[i] - dir * long;
                u_new.comp_mut(i).coeffs_mut()[flat] = damp * trans + dir * w[1];
            }
        }
        Ok((a_new, u_new, t_new))
    }
}

fn m3_scale(a: &M3, s: f64) -> M3 {
    let mut out = *a;
    for row in &mut out {
        for c in row.iter_mut() {
            *c *= s;
        }
    }
    out
}

/// Scalar diffusion semigroup exp(c * Laplacian * dt) applied per mode.
pub struct HeatPropagator {
    grid: Grid,
    factors: Vec<f64>,
}

impl HeatPropagator {
    pub fn new(grid: &Grid, diffusivity: f64, dt: f64) -> Result<HeatPropagator> {
        if !(diffusivity >= 0.0) || !diffusivity.is_finite() {
            return Err(Error::validation("diffusivity", "must be nonnegative and finite"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::validation("dt", "propagator step must be positive"));
        }
        let factors = (0..grid.modes())
            .map(|flat| {
                let xi = grid.frequency(flat);
                let mag2: f64 = xi[..grid.d()].iter().map(|x| x * x).sum();
                (-diffusivity * mag2 * dt).exp()
            })
            .collect();
        Ok(HeatPropagator { grid: *grid, factors })
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        self.grid.same_layout(f.grid(), "heat propagator")?;
        let mut out = f.clone();
        for (c, fac) in out.coeffs_mut().iter_mut().zip(&self.factors) {
            *c *= *fac;
        }
        Ok(out)
    }

    pub fn apply_vector(&self, u: &VectorField) -> Result<VectorField> {
        let comps: Result<Vec<SpectralField>> = (0..u.grid().d()).map(|i| self.apply(u.comp(i))).collect();
        VectorField::new(comps?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PressureLaw;
    use lowmach_core::ops;

    const SEMIGROUP_TOL: f64 = 1e-12;
    const ORACLE_TOL: f64 = 1e-10;

    fn grid2(n: usize) -> Grid {
        Grid::new(2, n, 1.0).unwrap()
    }

    /// Dense Runge-Kutta integration of dv/dt = M v.
    fn rk4(m: &M3, v0: [Complex64; 3], t: f64, steps: usize) -> [Complex64; 3] {
        let dt = t / steps as f64;
        let apply = |v: &[Complex64; 3]| {
            let mut w = [Complex64::default(); 3];
            for (wi, row) in w.iter_mut().zip(m.iter()) {
                for (rij, vj) in row.iter().zip(v.iter()) {
                    *wi += rij * vj;
                }
            }
            w
        };
        let mut v = v0;
        for _ in 0..steps {
            let k1 = apply(&v);
            let mut v2 = v;
            for i in 0..3 {
                v2[i] += 0.5 * dt * k1[i];
            }
            let k2 = apply(&v2);
            let mut v3 = v;
            for i in 0..3 {
                v3[i] += 0.5 * dt * k2[i];
            }
            let k3 = apply(&v3);
            let mut v4 = v;
            for i in 0..3 {
                v4[i] += dt * k3[i];
            }
            let k4 = apply(&v4);
            for i in 0..3 {
                v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        v
    }

    fn embed2(b: f64, c: f64) -> M3 {
        // acoustic block as the upper-left 2x2 of a 3x3 with decoupled third
        // row, for reuse of the dense oracle
        let ib = Complex64::new(0.0, -b);
        [
            [Complex64::default(), ib, Complex64::default()],
            [ib, Complex64::new(-c, 0.0), Complex64::default()],
            [Complex64::default(), Complex64::default(), Complex64::default()],
        ]
    }

    #[test]
    fn acoustic_block_matches_dense_integration() {
        // eps = 1, nu = 1, |xi| = 1, dt = 0.1 (oscillatory regime)
        for (b, c, dt) in [(1.0, 1.0, 0.1), (0.3, 2.5, 0.7), (4.0, 0.4, 0.25), (1.0, 4.0, 0.5)] {
            let blk = acoustic_block(b, c, dt);
            let v0 = [Complex64::new(0.8, -0.1), Complex64::new(0.2, 0.45), Complex64::default()];
            let want = rk4(&embed2(b, c), v0, dt, 100_000);
            let off = Complex64::new(0.0, blk.au);
            let got0 = blk.aa * v0[0] + off * v0[1];
            let got1 = off * v0[0] + blk.uu * v0[1];
            assert!((got0 - want[0]).norm() < ORACLE_TOL, "b={b} c={c}: {got0} vs {}", want[0]);
            assert!((got1 - want[1]).norm() < ORACLE_TOL);
        }
    }

    #[test]
    fn acoustic_block_is_identity_at_zero_frequency() {
        let blk = acoustic_block(0.0, 0.0, 0.37);
        assert_eq!((blk.aa, blk.au, blk.uu), (1.0, 0.0, 1.0));
    }

    #[test]
    fn acoustic_block_survives_stiff_damping_without_overflow() {
        // c dt = 2000: the naive cosh form would overflow
        let blk = acoustic_block(1.0, 20_000.0, 0.1);
        assert!(blk.aa.is_finite() && blk.au.is_finite() && blk.uu.is_finite());
        assert!(blk.aa.abs() <= 1.0 + 1e-12);
        // slow manifold: a decays like exp(-b^2/c * t) for b^2 << c^2
        let expected = (-(1.0f64 / 20_000.0) * 0.1).exp();
        assert!((blk.aa - expected).abs() < 1e-6);
    }

    #[test]
    fn conducting_block_matches_dense_integration() {
        for (b, c, e, dt) in [(1.0, 1.0, 0.5, 0.1), (5.0, 0.8, 1.3, 0.3), (0.2, 3.0, 2.0, 0.6)] {
            let m = conducting_matrix(b, c, e);
            let prop = expm3(&m3_scale(&m, dt));
            let v0 = [Complex64::new(0.4, 0.3), Complex64::new(-0.2, 0.1), Complex64::new(0.7, -0.5)];
            let want = rk4(&m, v0, dt, 100_000);
            let mut got = [Complex64::default(); 3];
            for (gi, row) in got.iter_mut().zip(prop.iter()) {
                for (rij, vj) in row.iter().zip(v0.iter()) {
                    *gi += rij * vj;
                }
            }
            for i in 0..3 {
                assert!((got[i] - want[i]).norm() < ORACLE_TOL, "component {i}");
            }
        }
    }

    #[test]
    fn half_steps_compose_to_a_full_step() {
        let g = grid2(16);
        let params = PhysicalParams::barotropic(0.1, -0.4, 1.0, PressureLaw::Isothermal).unwrap();
        let dt = 0.05;
        let full = BaroPropagator::new(&g, &params, dt).unwrap();
        let half = BaroPropagator::new(&g, &params, 0.5 * dt).unwrap();

        let (a, b) = lowmach_core::bony::sample_pair(&g, 17);
        let u = VectorField::new(vec![b.clone(), a.scaled(0.3)]).unwrap();
        let (a1, u1) = full.apply(&a, &u).unwrap();
        let (ah, uh) = half.apply(&a, &u).unwrap();
        let (a2, u2) = half.apply(&ah, &uh).unwrap();

        let da = a1.sub(&a2).unwrap().l2_norm() / a1.l2_norm().max(1e-300);
        let du = u1.sub(&u2).unwrap().l2_norm() / u1.l2_norm().max(1e-300);
        assert!(da < SEMIGROUP_TOL, "density semigroup drift {da:.3e}");
        assert!(du < SEMIGROUP_TOL, "velocity semigroup drift {du:.3e}");

        let nsf = PhysicalParams::heat_conducting(0.2, -0.4, 1.0, 0.7).unwrap();
        let cfull = ConductingPropagator::new(&g, &nsf, dt).unwrap();
        let chalf = ConductingPropagator::new(&g, &nsf, 0.5 * dt).unwrap();
        let (th, _) = lowmach_core::bony::sample_pair(&g, 23);
        let (x1, y1, z1) = cfull.apply(&a, &u, &th).unwrap();
        let (xh, yh, zh) = chalf.apply(&a, &u, &th).unwrap();
        let (x2, y2, z2) = chalf.apply(&xh, &yh, &zh).unwrap();
        let drift = x1.sub(&x2).unwrap().l2_norm().powi(2)
            + y1.sub(&y2).unwrap().l2_norm().powi(2)
            + z1.sub(&z2).unwrap().l2_norm().powi(2);
        let scale = x1.l2_norm().powi(2) + y1.l2_norm().powi(2) + z1.l2_norm().powi(2);
        assert!((drift / scale).sqrt() < SEMIGROUP_TOL);
    }

    #[test]
    fn solenoidal_part_sees_pure_shear_diffusion() {
        let g = grid2(16);
        let params = PhysicalParams::barotropic(0.05, 3.0, 1.0, PressureLaw::Isothermal).unwrap();
        let dt = 0.2;
        let prop = BaroPropagator::new(&g, &params, dt).unwrap();
        // stream-function velocity: exactly divergence-free
        let psi = SpectralField::single_mode(g, &[2, 1], Complex64::new(0.0, -0.35)).unwrap();
        let gp = ops::gradient(&psi);
        let v = VectorField::new(vec![gp.comp(1).clone(), gp.comp(0).scaled(-1.0)]).unwrap();
        let a = SpectralField::zeros(g);
        let (a1, v1) = prop.apply(&a, &v).unwrap();
        assert_eq!(a1.spectral_energy(), 0.0);
        let factor = (-params.mu * 5.0 * dt).exp();
        let mut want = v.clone();
        want.scale(factor);
        let err = v1.sub(&want).unwrap().l2_norm();
        assert!(err < 1e-13);
    }

    #[test]
    fn mode_matrix_agrees_with_the_cached_propagator() {
        let g = grid2(16);
        let params = PhysicalParams::barotropic(0.3, -0.2, 0.8, PressureLaw::Isothermal).unwrap();
        let dt = 0.07;
        let prop = BaroPropagator::new(&g, &params, dt).unwrap();
        let k = [3i64, -2];
        let flat = g.flat_index(&k).unwrap();
        let xi = g.frequency(flat);
        let m = baro_mode_matrix(&xi[..2], &params, dt).unwrap();

        let v = [Complex64::new(0.4, -0.3), Complex64::new(0.1, 0.2), Complex64::new(-0.5, 0.05)];
        let mut a = SpectralField::zeros(g);
        a.set_coeff(&k, v[0]).unwrap();
        let mut u = VectorField::zeros(g);
        u.comp_mut(0).set_coeff(&k, v[1]).unwrap();
        u.comp_mut(1).set_coeff(&k, v[2]).unwrap();
        let (a1, u1) = prop.apply(&a, &u).unwrap();
        let got = [a1.coeff(&k).unwrap(), u1.comp(0).coeff(&k).unwrap(), u1.comp(1).coeff(&k).unwrap()];
        for (i, gi) in got.iter().enumerate() {
            let want: Complex64 = m[i].iter().zip(v.iter()).map(|(mij, vj)| mij * vj).sum();
            assert!((gi - want).norm() < 1e-14, "row {i}");
        }

        // transverse direction is an eigenvector with the shear heat factor
        let mag = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let perp = [-xi[1] / mag, xi[0] / mag];
        let damp = (-params.mu * mag * mag * dt).exp();
        for i in 0..2 {
            let got: Complex64 = (0..2).map(|j| m[1 + i][1 + j] * perp[j]).sum();
            assert!((got - Complex64::new(damp * perp[i], 0.0)).norm() < 1e-14);
        }

        let id = baro_mode_matrix(&[0.0, 0.0], &params, dt).unwrap();
        for (i, row) in id.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(*c, Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn heat_propagator_is_exact_per_mode() {
        let g = grid2(8);
        let prop = HeatPropagator::new(&g, 0.3, 0.5).unwrap();
        let f = SpectralField::single_mode(g, &[2, 0], Complex64::new(1.0, -2.0)).unwrap();
        let out = prop.apply(&f).unwrap();
        let want = (-0.3f64 * 4.0 * 0.5).exp();
        let idx = g.flat_index(&[2, 0]).unwrap();
        assert!((out.coeffs()[idx] - f.coeffs()[idx] * want).norm() < 1e-15);
    }
}
