use crate::error::{Error, Result};

/// Normalization of the box measure used by L^p quadrature.
///
/// `Normalized` gives the box total measure 1, so L^p norms are mean-power
/// roots and a unit-amplitude complex mode has unit norm for every p.
/// `Lebesgue` weights by the box volume (2*pi*L)^d, which is the convention
/// under which the parabolic rescaling identities hold exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Normalized,
    Lebesgue,
}

/// Uniform periodic grid on [0, 2*pi*L)^d with N points per axis.
///
/// Resolved integer wavevectors run through {-N/2+1, ..., N/2} per axis; the
/// physical frequency of a mode k is xi = k / L.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    d: usize,
    n: usize,
    l: f64,
    measure: Measure,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.l == other.l
    }
}

impl Grid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Grid> {
        if d != 2 && d != 3 {
            return Err(Error::validation("grid.d", format!("dimension must be 2 or 3, got {d}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::validation(
                "grid.n",
                format!("points per axis must be a power of two >= 8, got {n}"),
            ));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::validation("grid.l", format!("box scale must be positive, got {l}")));
        }
        Ok(Grid { d, n, l, measure: Measure::Normalized })
    }

    pub fn with_measure(mut self, measure: Measure) -> Grid {
        self.measure = measure;
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Box scale L; the box side length is 2*pi*L.
    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    /// Total number of resolved modes (and physical points), N^d.
    pub fn modes(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Padded axis length used by 3/2 dealiasing.
    pub fn padded_n(&self) -> usize {
        3 * self.n / 2
    }

    pub fn padded_points(&self) -> usize {
        self.padded_n().pow(self.d as u32)
    }

    /// Box volume (2*pi*L)^d.
    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI * self.l).powi(self.d as i32)
    }

    /// Weight applied inside p-th power means: 1 for normalized measure,
    /// the box volume for Lebesgue measure.
    pub fn measure_weight(&self) -> f64 {
        match self.measure {
            Measure::Normalized => 1.0,
            Measure::Lebesgue => self.volume(),
        }
    }

    /// Signed wavenumber of FFT bin i along one axis, in {-N/2+1, ..., N/2}.
    pub fn axis_wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// FFT bin of a signed wavenumber (must lie in the resolved band).
    pub fn axis_bin(&self, k: i64) -> Result<usize> {
        let half = (self.n / 2) as i64;
        if k < -half + 1 || k > half {
            return Err(Error::validation(
                "wavevector",
                format!("component {k} outside resolved band [-{}, {}]", half - 1, half),
            ));
        }
        Ok(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
    }

    /// Decode a flat row-major index into per-axis signed wavenumbers.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let mut k = [0i64; 3];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            k[a] = self.axis_wavenumber(rest % self.n);
            rest /= self.n;
        }
        k
    }

    /// Flat index of a signed wavevector.
    pub fn flat_index(&self, k: &[i64]) -> Result<usize> {
        let mut flat = 0usize;
        for a in 0..self.d {
            flat = flat * self.n + self.axis_bin(k[a])?;
        }
        Ok(flat)
    }

    /// Physical frequency xi = k / L of a flat index.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let k = self.wavevector(flat);
        let mut xi = [0.0; 3];
        for a in 0..self.d {
            xi[a] = k[a] as f64 / self.l;
        }
        xi
    }

    /// |xi| of a flat index.
    pub fn frequency_mag(&self, flat: usize) -> f64 {
        let xi = self.frequency(flat);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// Smallest nonzero resolved |xi|.
    pub fn xi_min(&self) -> f64 {
        1.0 / self.l
    }

    /// Largest resolved |xi| (the Nyquist corner).
    pub fn xi_max(&self) -> f64 {
        (self.d as f64).sqrt() * (self.n as f64 / 2.0) / self.l
    }

    /// Physical coordinates of grid point `i` (row-major) on the unpadded grid.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let h = 2.0 * std::f64::consts::PI * self.l / self.n as f64;
        let mut x = [0.0; 3];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            x[a] = (rest % self.n) as f64 * h;
            rest /= self.n;
        }
        x
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.n; self.d]
    }

    pub fn same_layout(&self, other: &Grid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: ({}d, n={}, L={}) vs ({}d, n={}, L={})",
                self.d, self.n, self.l, other.d, other.n, other.l
            )));
        }
        Ok(())
    }
}
