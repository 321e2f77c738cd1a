//! Spectral representation of periodic scalar and vector fields.
//!
//! A field is stored as the full complex coefficient array c(k) of
//! f(x) = sum_k c(k) exp(i k.x / L) over the resolved wavevectors, in FFT bin
//! order. Real fields satisfy c(-k) = conj(c(k)); `from_physical` enforces
//! this exactly and every provided operator preserves it.

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fft::{fft_nd, pad_spectrum, truncate_spectrum};
use crate::grid::Grid;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> SpectralField {
        SpectralField { grid, coeffs: vec![Complex64::default(); grid.modes()] }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<SpectralField> {
        if coeffs.len() != grid.modes() {
            return Err(Error::validation(
                "coeffs",
                format!("expected {} coefficients, got {}", grid.modes(), coeffs.len()),
            ));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Analyze physical samples on the unpadded grid (row-major). The result
    /// is conjugate-symmetrized, so it represents the real part of the input
    /// interpolant exactly.
    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<SpectralField> {
        if values.len() != grid.modes() {
            return Err(Error::validation(
                "values",
                format!("expected {} samples, got {}", grid.modes(), values.len()),
            ));
        }
        let mut work: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut work, &grid.dims(), false);
        let scale = 1.0 / grid.modes() as f64;
        for c in &mut work {
            *c *= scale;
        }
        let mut field = SpectralField { grid, coeffs: work };
        field.symmetrize();
        Ok(field)
    }

    /// Force exact conjugate symmetry by averaging with the reflected conjugate.
    pub fn symmetrize(&mut self) {
        let n = self.grid.modes();
        let mut out = vec![Complex64::default(); n];
        for flat in 0..n {
            let k = self.grid.wavevector(flat);
            let neg: Vec<i64> = (0..self.grid.d()).map(|a| mirror(-k[a], self.grid.n())).collect();
            let mflat = self.grid.flat_index(&neg).expect("mirror stays in band");
            out[flat] = 0.5 * (self.coeffs[flat] + self.coeffs[mflat].conj());
        }
        self.coeffs = out;
    }

    /// Synthesize complex samples on the unpadded grid.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        fft_nd(&mut work, &self.grid.dims(), true);
        work
    }

    /// Synthesize real samples; valid for conjugate-symmetric fields.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().iter().map(|c| c.re).collect()
    }

    /// Synthesize complex samples on the 3/2 padded grid.
    pub fn to_padded_complex(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let mut work = pad_spectrum(&self.coeffs, g.n(), g.padded_n(), g.d());
        fft_nd(&mut work, &vec![g.padded_n(); g.d()], true);
        work
    }

    /// Real samples on the 3/2 padded grid (the quadrature grid for L^p).
    pub fn to_padded(&self) -> Vec<f64> {
        self.to_padded_complex().iter().map(|c| c.re).collect()
    }

    /// Analyze real samples given on the padded grid and restrict to the
    /// resolved band. Together with `to_padded` this computes the exactly
    /// dealiased projection of pointwise operations.
    pub fn from_padded(grid: Grid, values: &[f64]) -> Result<SpectralField> {
        let work: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        SpectralField::from_padded_complex(grid, work)
    }

    /// Same analysis for complex-valued padded samples.
    pub fn from_padded_complex(grid: Grid, mut values: Vec<Complex64>) -> Result<SpectralField> {
        if values.len() != grid.padded_points() {
            return Err(Error::validation(
                "values",
                format!("expected {} padded samples, got {}", grid.padded_points(), values.len()),
            ));
        }
        let m = grid.padded_n();
        fft_nd(&mut values, &vec![m; grid.d()], false);
        let scale = 1.0 / grid.padded_points() as f64;
        for c in &mut values {
            *c *= scale;
        }
        let coeffs = truncate_spectrum(&values, m, grid.n(), grid.d());
        Ok(SpectralField { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Replace the measure convention (geometry unchanged).
    pub fn with_measure(mut self, measure: crate::grid::Measure) -> SpectralField {
        self.grid = self.grid.with_measure(measure);
        self
    }

    /// Realize z(lambda x) exactly: the same coefficients reinterpreted on
    /// the box of side l / lambda, so every frequency scales by lambda while
    /// the sampled values are unchanged.
    pub fn dilated(&self, lambda: f64) -> Result<SpectralField> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::validation("lambda", format!("must be positive, got {lambda}")));
        }
        let g = Grid::new(self.grid.d(), self.grid.n(), self.grid.l() / lambda)?
            .with_measure(self.grid.measure());
        Ok(SpectralField { grid: g, coeffs: self.coeffs.clone() })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> Result<Complex64> {
        Ok(self.coeffs[self.grid.flat_index(k)?])
    }

    pub fn set_coeff(&mut self, k: &[i64], c: Complex64) -> Result<()> {
        let idx = self.grid.flat_index(k)?;
        self.coeffs[idx] = c;
        Ok(())
    }

    /// Mean of the field (the zero-mode coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Unit-amplitude complex mode exp(i k.x / L).
    pub fn single_mode(grid: Grid, k: &[i64], amplitude: Complex64) -> Result<SpectralField> {
        let mut f = SpectralField::zeros(grid);
        f.set_coeff(k, amplitude)?;
        Ok(f)
    }

    /// Apply a per-mode map c(k) -> f(k, xi, c). Used by multipliers and
    /// differential operators; the closure must preserve conjugate symmetry
    /// if the field is to stay real.
    pub fn map_modes(&self, f: impl Fn(&[i64], &[f64], Complex64) -> Complex64) -> SpectralField {
        let g = &self.grid;
        let mut out = self.clone();
        for flat in 0..g.modes() {
            let k = g.wavevector(flat);
            let xi = g.frequency(flat);
            out.coeffs[flat] = f(&k[..g.d()], &xi[..g.d()], self.coeffs[flat]);
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add_assign_scaled(&mut self, other: &SpectralField, s: f64) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.same_layout(&other.grid, "add")?;
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.same_layout(&other.grid, "sub")?;
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        Ok(out)
    }

    /// Sum of |c(k)|^2; equals the squared L^2 norm under normalized measure.
    pub fn spectral_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// L^2 norm by Parseval (exact for band-limited fields, both measures).
    pub fn l2_norm(&self) -> f64 {
        (self.grid.measure_weight() * self.spectral_energy()).sqrt()
    }

    /// Maximum relative deviation from conjugate symmetry (diagnostic).
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst = 0.0f64;
        for flat in 0..self.grid.modes() {
            let k = self.grid.wavevector(flat);
            let neg: Vec<i64> = (0..self.grid.d()).map(|a| mirror(-k[a], self.grid.n())).collect();
            let mflat = self.grid.flat_index(&neg).unwrap();
            worst = worst.max((self.coeffs[flat] - self.coeffs[mflat].conj()).norm() / scale);
        }
        worst
    }
}

/// -k folded back into the resolved band {-N/2+1, ..., N/2}: the mirror of
/// the Nyquist wavenumber is itself.
fn mirror(k: i64, n: usize) -> i64 {
    if k == -(n as i64) / 2 {
        (n as i64) / 2
    } else {
        k
    }
}

/// A d-component vector field with all components on one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(comps: Vec<SpectralField>) -> Result<VectorField> {
        if comps.is_empty() {
            return Err(Error::validation("vector field", "no components"));
        }
        let g = *comps[0].grid();
        if comps.len() != g.d() {
            return Err(Error::validation(
                "vector field",
                format!("expected {} components, got {}", g.d(), comps.len()),
            ));
        }
        for c in &comps[1..] {
            g.same_layout(c.grid(), "vector components")?;
        }
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: Grid) -> VectorField {
        VectorField { comps: (0..grid.d()).map(|_| SpectralField::zeros(grid)).collect() }
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn comp(&self, a: usize) -> &SpectralField {
        &self.comps[a]
    }

    pub fn comp_mut(&mut self, a: usize) -> &mut SpectralField {
        &mut self.comps[a]
    }

    pub fn comps(&self) -> &[SpectralField] {
        &self.comps
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.comps {
            c.scale(s);
        }
    }

    pub fn add_assign_scaled(&mut self, other: &VectorField, s: f64) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.add_assign_scaled(b, s);
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.grid().same_layout(other.grid(), "sub")?;
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        Ok(out)
    }

    pub fn l2_norm(&self) -> f64 {
        let energy: f64 = self.comps.iter().map(|c| c.spectral_energy()).sum();
        (self.grid().measure_weight() * energy).sqrt()
    }
}

/// Joint L^p norm of a set of components (the pointwise Euclidean magnitude
/// is raised to the p-th power and averaged on the padded quadrature grid).
///
/// Under the normalized measure this is a mean-power root; under Lebesgue
/// measure the mean is weighted by the box volume. p = inf is the grid max.
pub fn lp_norm(fields: &[&SpectralField], p: Exponent) -> Result<f64> {
    if fields.is_empty() {
        return Err(Error::validation("lp_norm", "no components"));
    }
    let g = fields[0].grid();
    for f in &fields[1..] {
        g.same_layout(f.grid(), "lp_norm components")?;
    }
    p.validate("p")?;
    // Fast exact path: |.|^2 of a band-limited field is itself band-limited
    // well inside the padded band, so the padded quadrature equals Parseval.
    if p == Exponent::TWO {
        let energy: f64 = fields.iter().map(|f| f.spectral_energy()).sum();
        return Ok((g.measure_weight() * energy).sqrt());
    }
    let mut mag2 = vec![0.0f64; g.padded_points()];
    for f in fields {
        let vals = f.to_padded_complex();
        for (m, v) in mag2.iter_mut().zip(&vals) {
            *m += v.norm_sqr();
        }
    }
    match p {
        Exponent::Inf => Ok(mag2.iter().copied().fold(0.0, f64::max).sqrt()),
        Exponent::Finite(p) => {
            let mean = mag2.iter().map(|m| m.powf(p / 2.0)).sum::<f64>() / mag2.len() as f64;
            Ok((g.measure_weight() * mean).powf(1.0 / p))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> Grid {
        Grid::new(2, 16, 1.0).unwrap()
    }

    #[test]
    fn physical_roundtrip() {
        let g = grid2();
        let vals: Vec<f64> = (0..g.modes()).map(|i| ((i * 7 % 13) as f64 - 6.0) * 0.3).collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let back = f.to_physical();
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(f.symmetry_defect() < 1e-15);
    }

    #[test]
    fn cosine_coefficients() {
        // cos(x_1) splits into half-amplitude coefficients at k = (1,0), (-1,0).
        let g = grid2();
        let vals: Vec<f64> = (0..g.modes()).map(|i| g.point(i)[0].cos()).collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        assert!((f.coeff(&[1, 0]).unwrap() - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((f.coeff(&[-1, 0]).unwrap() - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(f.coeff(&[2, 3]).unwrap().norm() < 1e-14);
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid2();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| (g.point(i)[0] * 2.0).sin() + 0.5 * (g.point(i)[1] * 3.0).cos())
            .collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let direct = (vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64).sqrt();
        assert!((f.l2_norm() - direct).abs() < 1e-13);
    }

    #[test]
    fn unit_mode_has_unit_lp_norms() {
        let g = grid2();
        let f = SpectralField::single_mode(g, &[3, -2], Complex64::new(1.0, 0.0)).unwrap();
        for p in [Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Inf] {
            let n = lp_norm(&[&f], p).unwrap();
            assert!((n - 1.0).abs() < 1e-12, "p={p:?} -> {n}");
        }
    }

    #[test]
    fn padded_roundtrip_preserves_coeffs() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let vals: Vec<f64> = (0..g.modes()).map(|i| (i as f64 * 0.17).sin()).collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let back = SpectralField::from_padded(g, &f.to_padded()).unwrap();
        for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
