//! Differential operators and Leray projectors as exact Fourier multipliers.
//!
//! Zero-mode conventions: gradient, divergence, laplacian and the inverse
//! laplacian annihilate the zero mode (the inverse additionally requires its
//! input to be mean-free); the solenoidal projector P keeps the mean of a
//! vector field, the gradient-part projector Q removes it.

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use num_complex::Complex64;

/// grad f, component a = i xi_a c(k).
pub fn gradient(f: &SpectralField) -> VectorField {
    let d = f.grid().d();
    let comps = (0..d)
        .map(|a| f.map_modes(|_, xi, c| Complex64::new(0.0, xi[a]) * c))
        .collect();
    VectorField::new(comps).expect("components share the source grid")
}

/// div u = sum_a i xi_a u_a(k).
pub fn divergence(u: &VectorField) -> SpectralField {
    let g = *u.grid();
    let mut out = SpectralField::zeros(g);
    for a in 0..g.d() {
        let term = u.comp(a).map_modes(|_, xi, c| Complex64::new(0.0, xi[a]) * c);
        out.add_assign_scaled(&term, 1.0);
    }
    out
}

/// laplacian f = -|xi|^2 c(k).
pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.map_modes(|_, xi, c| -xi_sq(xi) * c)
}

/// Inverse laplacian on mean-free fields; c(k) -> -c(k)/|xi|^2, zero mode 0.
///
/// Errors if the input carries a zero-mode coefficient above roundoff scale.
pub fn inv_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let mean = f.mean().norm();
    let scale = f.spectral_energy().sqrt().max(1e-300);
    if mean > 1e-12 * scale {
        return Err(Error::ZeroMode { op: "inv_laplacian", magnitude: mean });
    }
    Ok(f.map_modes(|_, xi, c| {
        let s = xi_sq(xi);
        if s == 0.0 {
            Complex64::default()
        } else {
            -c / s
        }
    }))
}

/// Solenoidal (divergence-free) projection P = Id - grad div / laplacian.
/// The zero mode passes through unchanged.
pub fn project_p(u: &VectorField) -> VectorField {
    projector(u, true)
}

/// Gradient-part projection Q = grad div / laplacian. Annihilates the mean.
pub fn project_q(u: &VectorField) -> VectorField {
    projector(u, false)
}

fn projector(u: &VectorField, solenoidal: bool) -> VectorField {
    let g = *u.grid();
    let d = g.d();
    let mut out = VectorField::zeros(g);
    for flat in 0..g.modes() {
        let xi = g.frequency(flat);
        let s = xi_sq(&xi[..d]);
        let mut dot = Complex64::default();
        for a in 0..d {
            dot += Complex64::new(xi[a], 0.0) * u.comp(a).coeffs()[flat];
        }
        for a in 0..d {
            let uc = u.comp(a).coeffs()[flat];
            let q = if s == 0.0 { Complex64::default() } else { dot * xi[a] / s };
            out.comp_mut(a).coeffs_mut()[flat] = if solenoidal { uc - q } else { q };
        }
    }
    out
}

fn xi_sq(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

/// A scalar Fourier multiplier m(xi) with an explicitly declared action on
/// the zero mode (where many symbols of interest are singular).
/// Exactly dealiased pointwise product: multiply on the padded grid, then
/// analyze and truncate back to the resolved band. Frequencies produced
/// beyond the band are discarded, never wrapped.
pub fn product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.grid().same_layout(b.grid(), "product")?;
    let pa = a.to_padded_complex();
    let pb = b.to_padded_complex();
    let vals: Vec<Complex64> = pa.iter().zip(pb.iter()).map(|(x, y)| x * y).collect();
    SpectralField::from_padded_complex(*a.grid(), vals)
}

pub struct Multiplier {
    at_zero: Complex64,
    symbol: Box<dyn Fn(&[f64]) -> Complex64 + Send + Sync>,
}

impl Multiplier {
    pub fn new(
        at_zero: Complex64,
        symbol: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Multiplier {
        Multiplier { at_zero, symbol: Box::new(symbol) }
    }

    /// Real even symbol (the common case: maps real fields to real fields).
    pub fn real(at_zero: f64, symbol: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Multiplier {
        Multiplier {
            at_zero: Complex64::new(at_zero, 0.0),
            symbol: Box::new(move |xi| Complex64::new(symbol(xi), 0.0)),
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        if xi.iter().all(|x| *x == 0.0) {
            self.at_zero
        } else {
            (self.symbol)(xi)
        }
    }

    /// Apply the multiplier; errors if the symbol is non-finite at any
    /// resolved nonzero frequency.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        let g = f.grid();
        let mut out = f.clone();
        for flat in 0..g.modes() {
            let xi = g.frequency(flat);
            let m = self.eval(&xi[..g.d()]);
            if !m.re.is_finite() || !m.im.is_finite() {
                return Err(Error::BadSymbol { xi: xi[..g.d()].to_vec() });
            }
            out.coeffs_mut()[flat] *= m;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    fn random_vector(g: Grid, seed: u64) -> VectorField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let comps = (0..g.d())
            .map(|_| {
                let vals: Vec<f64> = (0..g.modes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                SpectralField::from_physical(g, &vals).unwrap()
            })
            .collect();
        VectorField::new(comps).unwrap()
    }

    #[test]
    fn gradient_of_mode() {
        let g = Grid::new(2, 16, 2.0).unwrap();
        let f = SpectralField::single_mode(g, &[4, -6], Complex64::new(1.0, 0.0)).unwrap();
        let grad = gradient(&f);
        // i * xi with xi = k / L = (2, -3)
        assert!((grad.comp(0).coeff(&[4, -6]).unwrap() - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((grad.comp(1).coeff(&[4, -6]).unwrap() - Complex64::new(0.0, -3.0)).norm() < 1e-14);
    }

    #[test]
    fn projector_algebra() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let u = random_vector(g, 1);
        let p = project_p(&u);
        let q = project_q(&u);
        let pp = project_p(&p);
        // P is idempotent, P + Q = Id, div P u = 0, P grad f = 0.
        for a in 0..3 {
            for (x, y) in p.comp(a).coeffs().iter().zip(pp.comp(a).coeffs()) {
                assert!((x - y).norm() < 1e-13);
            }
            for ((x, y), z) in p.comp(a).coeffs().iter().zip(q.comp(a).coeffs()).zip(u.comp(a).coeffs()) {
                assert!((x + y - z).norm() < 1e-13);
            }
        }
        let div_p = divergence(&p);
        assert!(div_p.spectral_energy().sqrt() < 1e-12 * u.l2_norm().max(1.0));
        let f = u.comp(0).clone();
        let pg = project_p(&gradient(&f));
        let energy: f64 = pg.comps().iter().map(|c| c.spectral_energy()).sum();
        // gradient has no zero mode, so P of it vanishes identically
        assert!(energy.sqrt() < 1e-12);
    }

    #[test]
    fn q_keeps_gradients_p_keeps_mean() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = random_vector(g, 3).comp(0).clone();
        let grad = gradient(&f);
        let q = project_q(&grad);
        for a in 0..2 {
            for (x, y) in q.comp(a).coeffs().iter().zip(grad.comp(a).coeffs()) {
                assert!((x - y).norm() < 1e-13);
            }
        }
        let mut u = VectorField::zeros(g);
        u.comp_mut(0).set_coeff(&[0, 0], Complex64::new(2.5, 0.0)).unwrap();
        let p = project_p(&u);
        let q = project_q(&u);
        assert!((p.comp(0).mean() - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        assert!(q.comp(0).mean().norm() < 1e-15);
    }

    #[test]
    fn laplacian_inverse_roundtrip() {
        let g = Grid::new(2, 16, 1.5).unwrap();
        let mut f = random_vector(g, 5).comp(0).clone();
        f.set_coeff(&[0, 0], Complex64::default()).unwrap();
        let back = inv_laplacian(&laplacian(&f)).unwrap();
        for (x, y) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
        let with_mean = f.map_modes(|k, _, c| if k.iter().all(|x| *x == 0) { Complex64::new(1.0, 0.0) } else { c });
        assert!(matches!(inv_laplacian(&with_mean), Err(Error::ZeroMode { .. })));
    }

    #[test]
    fn multiplier_rejects_singular_symbol() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let f = SpectralField::single_mode(g, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let bad = Multiplier::real(0.0, |xi| 1.0 / (xi[0] - 1.0)); // singular at xi = (1, *)
        assert!(matches!(bad.apply(&f), Err(Error::BadSymbol { .. })));
    }
}
