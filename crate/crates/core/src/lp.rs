//! Homogeneous dyadic (Littlewood-Paley) decomposition.
//!
//! The low-pass profile chi is 1 on [0, 3/4], 0 on [4/3, inf), glued smoothly
//! in between with the standard exp(-1/u) bump quotient, and non-increasing.
//! The band profile phi(rho) = chi(rho/2) - chi(rho) is supported on
//! [3/4, 8/3], equals 1 on [4/3, 3/2], and telescopes: for any rho > 0 the
//! sum of phi(2^-j rho) over all j is exactly 1.

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;

const CHI_FLAT_END: f64 = 0.75;
const CHI_SUPPORT_END: f64 = 4.0 / 3.0;

/// The (chi, phi) profile pair with its support constants.
#[derive(Clone, Copy, Debug, Default)]
pub struct DyadicProfile;

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

impl DyadicProfile {
    pub fn standard() -> DyadicProfile {
        DyadicProfile
    }

    /// Smooth low-pass cutoff, non-increasing, 1 on [0, 3/4], 0 on [4/3, inf).
    pub fn chi(&self, rho: f64) -> f64 {
        if rho <= CHI_FLAT_END {
            1.0
        } else if rho >= CHI_SUPPORT_END {
            0.0
        } else {
            let u = (rho - CHI_FLAT_END) / (CHI_SUPPORT_END - CHI_FLAT_END);
            bump(1.0 - u) / (bump(u) + bump(1.0 - u))
        }
    }

    /// Annulus profile phi(rho) = chi(rho/2) - chi(rho).
    pub fn phi(&self, rho: f64) -> f64 {
        self.chi(rho / 2.0) - self.chi(rho)
    }

    /// Support interval of phi.
    pub fn phi_support(&self) -> (f64, f64) {
        (CHI_FLAT_END, 2.0 * CHI_SUPPORT_END)
    }
}

/// Dyadic indices j whose annulus [3/4, 8/3] * 2^j meets the resolved
/// frequency band [1/L, sqrt(d) N / (2L)]. Summing the blocks over this
/// range reconstructs any resolved mean-free field exactly.
pub fn dyadic_range(grid: &Grid) -> (i32, i32) {
    let (lo, hi) = DyadicProfile::standard().phi_support();
    // phi(2^-j xi) != 0 requires lo < 2^-j xi < hi.
    let j_min = (grid.xi_min().log2() - hi.log2()).ceil() as i32;
    let j_max = (grid.xi_max().log2() - lo.log2()).floor() as i32;
    (j_min, j_max)
}

/// Dyadic block field: multiply each coefficient by phi(2^-j |xi|).
/// The zero mode is annihilated (phi(0) = 0); out-of-range j gives zero.
pub fn delta_j(f: &SpectralField, j: i32, profile: &DyadicProfile) -> SpectralField {
    let scale = (2.0f64).powi(-j);
    f.map_modes(|_, xi, c| {
        let mag = (xi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        c * profile.phi(scale * mag)
    })
}

/// Low-frequency partial sum: multiply by chi(2^-j |xi|). Keeps the mean.
pub fn s_j(f: &SpectralField, j: i32, profile: &DyadicProfile) -> SpectralField {
    let scale = (2.0f64).powi(-j);
    f.map_modes(|_, xi, c| {
        let mag = (xi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        c * profile.chi(scale * mag)
    })
}

/// Spectral energy of one block without forming the field (skip test for
/// empty blocks before any physical transform is paid for).
pub fn block_energy(f: &SpectralField, j: i32, profile: &DyadicProfile) -> f64 {
    let g = f.grid();
    let scale = (2.0f64).powi(-j);
    let mut e = 0.0;
    for (flat, c) in f.coeffs().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let w = profile.phi(scale * g.frequency_mag(flat));
        e += w * w * c.norm_sqr();
    }
    e
}

/// Frequency-threshold configuration for low/high splits. A block j is
/// "low" when 2^j * alpha <= 2^j0; alpha is the scale parameter (for the
/// Mach number sweeps, eps * nu) and j0 the fixed reference index.
#[derive(Clone, Copy, Debug)]
pub struct SplitConfig {
    pub j0: i32,
    pub alpha: f64,
}

impl SplitConfig {
    pub fn new(j0: i32, alpha: f64) -> Result<SplitConfig> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::validation("split.alpha", format!("must be positive, got {alpha}")));
        }
        Ok(SplitConfig { j0, alpha })
    }

    /// Default reference index used throughout the solvers and norms.
    pub fn with_default_j0(alpha: f64) -> Result<SplitConfig> {
        SplitConfig::new(3, alpha)
    }

    /// Whether block j belongs to the low-frequency side. Both sides of the
    /// comparison are exact in floating point for dyadic alpha, so doubling
    /// alpha shifts the boundary down by exactly one index.
    pub fn is_low(&self, j: i32) -> bool {
        (2.0f64).powi(j) * self.alpha <= (2.0f64).powi(self.j0)
    }

    /// Largest low-side j.
    pub fn threshold(&self) -> i32 {
        let mut j = (self.j0 as f64 - self.alpha.log2()).floor() as i32;
        // Guard the floor against log2 rounding at exact dyadic boundaries.
        while !self.is_low(j) {
            j -= 1;
        }
        while self.is_low(j + 1) {
            j += 1;
        }
        j
    }
}

/// Which side of a split a truncated norm ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// Split a field into (low, high) block sums across the threshold. Both
/// parts are mean-free: low + high = f - mean(f) exactly, and doubling
/// alpha moves the boundary block from low to high.
pub fn split_low_high(
    f: &SpectralField,
    cfg: &SplitConfig,
    profile: &DyadicProfile,
) -> (SpectralField, SpectralField) {
    let j_cut = cfg.threshold();
    // Sum of phi(2^-j |xi|) over j <= j_cut telescopes to chi(2^-(j_cut+1) |xi|).
    let scale = (2.0f64).powi(-(j_cut + 1));
    let mut low = f.map_modes(|_, xi, c| {
        let mag = (xi.iter().map(|x| x * x).sum::<f64>()).sqrt();
        c * profile.chi(scale * mag)
    });
    low.coeffs_mut()[0] = num_complex::Complex64::default();
    let mut high = f.sub(&low).expect("same grid");
    high.coeffs_mut()[0] = num_complex::Complex64::default();
    (low, high)
}

/// Split every component of a vector field.
pub fn split_vector(
    u: &VectorField,
    cfg: &SplitConfig,
    profile: &DyadicProfile,
) -> (VectorField, VectorField) {
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    for c in u.comps() {
        let (lo, hi) = split_low_high(c, cfg, profile);
        lows.push(lo);
        highs.push(hi);
    }
    (VectorField::new(lows).unwrap(), VectorField::new(highs).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;

    #[test]
    fn profile_shape() {
        let p = DyadicProfile::standard();
        assert_eq!(p.chi(0.0), 1.0);
        assert_eq!(p.chi(0.75), 1.0);
        assert_eq!(p.chi(4.0 / 3.0), 0.0);
        assert_eq!(p.chi(2.0), 0.0);
        // non-increasing on a fine sweep
        let mut prev = 1.0;
        for i in 0..=400 {
            let rho = i as f64 * 0.005;
            let v = p.chi(rho);
            assert!(v <= prev + 1e-15, "chi increases at rho={rho}");
            prev = v;
        }
        // phi plateau and support
        assert_eq!(p.phi(0.5), 0.0);
        assert!((p.phi(4.0 / 3.0) - 1.0).abs() < 1e-15);
        assert!((p.phi(1.45) - 1.0).abs() < 1e-15);
        assert_eq!(p.phi(8.0 / 3.0), 0.0);
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let p = DyadicProfile::standard();
        for (d, n, l) in [(2usize, 32usize, 1.0f64), (2, 16, 0.25), (3, 8, 2.0)] {
            let g = Grid::new(d, n, l).unwrap();
            let (j_min, j_max) = dyadic_range(&g);
            for flat in 1..g.modes() {
                let xi = g.frequency_mag(flat);
                if xi == 0.0 {
                    continue;
                }
                let sum: f64 = (j_min..=j_max).map(|j| p.phi((2.0f64).powi(-j) * xi)).sum();
                assert!((sum - 1.0).abs() < 1e-10, "xi={xi} sum={sum}");
            }
        }
    }

    #[test]
    fn blocks_reconstruct_mean_free_part() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| {
                let x = g.point(i);
                (3.0 * x[0]).sin() * (5.0 * x[1]).cos() + 0.3 * (11.0 * x[1]).sin() + 0.7
            })
            .collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let (j_min, j_max) = dyadic_range(&g);
        let mut sum = SpectralField::zeros(g);
        for j in j_min..=j_max {
            sum.add_assign_scaled(&delta_j(&f, j, &p), 1.0);
        }
        // sum of all blocks = f minus its mean
        for (flat, (a, b)) in sum.coeffs().iter().zip(f.coeffs()).enumerate() {
            let expect = if flat == 0 { Complex64::default() } else { *b };
            assert!((a - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn near_orthogonality_of_distant_blocks() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes()).map(|i| ((i % 17) as f64 - 8.0) * 0.1).collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let (j_min, j_max) = dyadic_range(&g);
        for j in j_min..=j_max {
            let bj = delta_j(&f, j, &p);
            for jp in (j + 2)..=j_max {
                let bjp = delta_j(&bj, jp, &p);
                assert!(
                    bjp.spectral_energy().sqrt() < 1e-13,
                    "blocks {j} and {jp} overlap"
                );
            }
        }
    }

    #[test]
    fn chi_support_kills_far_modes() {
        // A mode with 2^-j |k|/L = 2 lies outside supp chi, and one with
        // 2^-j |k|/L = 1/2 sits where phi vanishes identically.
        let g = Grid::new(2, 32, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let f = SpectralField::single_mode(g, &[8, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(s_j(&f, 2, &p).spectral_energy() < 1e-30); // 2^-2 * 8 = 2
        assert!(delta_j(&f, 4, &p).spectral_energy() < 1e-30); // 2^-4 * 8 = 1/2
    }

    #[test]
    fn s_j_is_partial_block_sum_plus_mean() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| {
                let x = g.point(i);
                0.9 + (x[0]).cos() + 0.5 * (6.0 * x[0] + 2.0 * x[1]).sin() + 0.1 * (13.0 * x[1]).cos()
            })
            .collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let (j_min, _) = dyadic_range(&g);
        for j in [1, 3] {
            let mut sum = SpectralField::zeros(g);
            for jp in j_min..=(j - 1) {
                sum.add_assign_scaled(&delta_j(&f, jp, &p), 1.0);
            }
            sum.coeffs_mut()[0] = f.mean();
            let sj = s_j(&f, j, &p);
            for (a, b) in sum.coeffs().iter().zip(sj.coeffs()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dilation_shifts_block_index() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| {
                let x = g.point(i);
                (2.0 * x[0]).cos() + 0.3 * (4.0 * x[0] + 6.0 * x[1]).sin()
            })
            .collect();
        let z = SpectralField::from_physical(g, &vals).unwrap();
        let w = z.dilated(2.0).unwrap();
        let (j_min, j_max) = dyadic_range(w.grid());
        for j in j_min..=j_max {
            let lhs = delta_j(&w, j, &p);
            let rhs = delta_j(&z, j - 1, &p).dilated(2.0).unwrap();
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                assert_eq!(a, b, "block {j} differs");
            }
        }
    }

    #[test]
    fn split_boundary_shifts_with_alpha() {
        let cfg = SplitConfig::new(3, 0.25).unwrap();
        assert_eq!(cfg.threshold(), 5);
        let doubled = SplitConfig::new(3, 0.5).unwrap();
        assert_eq!(doubled.threshold(), 4);
        assert!(cfg.is_low(5) && !cfg.is_low(6));
    }

    #[test]
    fn split_reconstructs() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| {
                let x = g.point(i);
                1.3 + (2.0 * x[0]).cos() + 0.2 * (9.0 * x[0] + 3.0 * x[1]).sin()
            })
            .collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let cfg = SplitConfig::new(3, 1.0).unwrap();
        let (lo, hi) = split_low_high(&f, &cfg, &p);
        for (flat, ((a, b), c)) in lo.coeffs().iter().zip(hi.coeffs()).zip(f.coeffs()).enumerate() {
            let expect = if flat == 0 { Complex64::default() } else { *c };
            assert!((a + b - expect).norm() < 1e-13);
        }
        // neither side carries the mean
        assert!(lo.mean().norm() < 1e-15);
        assert!(hi.mean().norm() < 1e-15);
    }

    #[test]
    fn deep_low_mode_lands_entirely_low() {
        // |xi| = 11/64 sits on the plateau of block j = -3; with alpha = 1
        // and j0 = 0 the low side is j <= 0, so the mode is untouched.
        let g = Grid::new(2, 32, 64.0).unwrap();
        let p = DyadicProfile::standard();
        let f = SpectralField::single_mode(g, &[11, 0], Complex64::new(0.0, 2.0)).unwrap();
        let cfg = SplitConfig::new(0, 1.0).unwrap();
        let (lo, hi) = split_low_high(&f, &cfg, &p);
        assert!(hi.spectral_energy() < 1e-30);
        for (a, b) in lo.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn doubling_alpha_moves_one_block() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let p = DyadicProfile::standard();
        let vals: Vec<f64> = (0..g.modes())
            .map(|i| {
                let x = g.point(i);
                (3.0 * x[0] + x[1]).sin() + (17.0 * x[1]).cos() + 0.4 * (9.0 * x[0]).sin()
            })
            .collect();
        let f = SpectralField::from_physical(g, &vals).unwrap();
        let cfg = SplitConfig::new(3, 0.5).unwrap();
        let doubled = SplitConfig::new(3, 1.0).unwrap();
        assert_eq!(doubled.threshold(), cfg.threshold() - 1);
        let (lo_a, _) = split_low_high(&f, &cfg, &p);
        let (lo_2a, _) = split_low_high(&f, &doubled, &p);
        let boundary = delta_j(&f, cfg.threshold(), &p);
        let diff = lo_a.sub(&lo_2a).unwrap();
        for (a, b) in diff.coeffs().iter().zip(boundary.coeffs()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
