//! Thin n-dimensional wrapper over rustfft with plan caching, plus the
//! spectral zero-padding / truncation pair used by 3/2-rule dealiasing.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanKey = (usize, bool);

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place unnormalized DFT along every axis of a row-major array.
///
/// `inverse = true` computes the synthesis sum (positive exponent), which is
/// the map from Fourier coefficients to physical samples under the convention
/// f(x_n) = sum_k c(k) exp(i k . x_n / L).
pub fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    for axis in 0..dims.len() {
        fft_axis(data, dims, axis, inverse);
    }
}

fn fft_axis(data: &mut [Complex64], dims: &[usize], axis: usize, inverse: bool) {
    let len = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let block = len * stride;
    let outer = data.len() / block;
    let fft = plan(len, inverse);
    let mut line = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        let base = o * block;
        for s in 0..stride {
            for t in 0..len {
                line[t] = data[base + s + t * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for t in 0..len {
                data[base + s + t * stride] = line[t];
            }
        }
    }
}

/// Per-axis bin images for embedding an N-point spectrum into an M-point one.
///
/// Every bin maps to the bin of the same signed wavenumber; the Nyquist bin
/// N/2 is self-conjugate on the source grid and splits half-and-half onto
/// +N/2 and -N/2 of the target so real fields stay real after padding.
fn pad_images(n: usize, m: usize, i: usize) -> [(usize, f64); 2] {
    let half = n / 2;
    if i == half {
        [(half, 0.5), (m - half, 0.5)]
    } else if i < half {
        [(i, 1.0), (usize::MAX, 0.0)]
    } else {
        [(m - (n - i), 1.0), (usize::MAX, 0.0)]
    }
}

/// Embed an N^d coefficient array into an M^d one (M >= N), preserving the
/// trigonometric interpolant exactly.
pub fn pad_spectrum(src: &[Complex64], n: usize, m: usize, d: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::default(); m.pow(d as u32)];
    let mut idx = vec![0usize; d];
    for (flat, &c) in src.iter().enumerate() {
        let mut rest = flat;
        for a in (0..d).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        // Walk the (up to 2^d) target images produced by Nyquist splitting.
        scatter(&mut dst, &idx, 0, 0usize, 1.0, c, n, m, d);
    }
    dst
}

fn scatter(
    dst: &mut [Complex64],
    idx: &[usize],
    axis: usize,
    flat_so_far: usize,
    weight: f64,
    c: Complex64,
    n: usize,
    m: usize,
    d: usize,
) {
    if axis == d {
        dst[flat_so_far] += c * weight;
        return;
    }
    for (j, w) in pad_images(n, m, idx[axis]) {
        if w == 0.0 {
            continue;
        }
        scatter(dst, idx, axis + 1, flat_so_far * m + j, weight * w, c, n, m, d);
    }
}

/// Restrict an M^d coefficient array back to N^d, summing Nyquist images.
/// `truncate_spectrum(pad_spectrum(c)) == c` holds bit-for-bit up to rounding.
pub fn truncate_spectrum(src: &[Complex64], m: usize, n: usize, d: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::default(); n.pow(d as u32)];
    let mut idx = vec![0usize; d];
    for flat in 0..dst.len() {
        let mut rest = flat;
        for a in (0..d).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        dst[flat] = gather(src, &idx, 0, 0usize, n, m, d);
    }
    dst
}

fn gather(src: &[Complex64], idx: &[usize], axis: usize, flat_so_far: usize, n: usize, m: usize, d: usize) -> Complex64 {
    if axis == d {
        return src[flat_so_far];
    }
    let mut acc = Complex64::default();
    for (j, w) in pad_images(n, m, idx[axis]) {
        if w == 0.0 {
            continue;
        }
        // The half weights belong to the padding direction only; truncation
        // sums the two images at full weight to undo the split.
        acc += gather(src, idx, axis + 1, flat_so_far * m + j, n, m, d);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_inverse_roundtrip() {
        let dims = [4usize, 8];
        let total: usize = dims.iter().product();
        let src: Vec<Complex64> = (0..total)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut work = src.clone();
        fft_nd(&mut work, &dims, false);
        fft_nd(&mut work, &dims, true);
        for (a, b) in src.iter().zip(&work) {
            assert!((a - b / total as f64).norm() < 1e-12);
        }
    }

    #[test]
    fn pad_truncate_is_identity() {
        let n = 8;
        let d = 2;
        let m = 12;
        let src: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new(i as f64, (i % 5) as f64 - 2.0))
            .collect();
        let padded = pad_spectrum(&src, n, m, d);
        let back = truncate_spectrum(&padded, m, n, d);
        for (a, b) in src.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn padding_preserves_interpolant() {
        // A pure mode evaluated on the padded grid must agree with the
        // analytic exponential, including at the split Nyquist frequency.
        let n = 8usize;
        let m = 12usize;
        let mut c = vec![Complex64::default(); n];
        c[2] = Complex64::new(0.7, -0.3);
        c[n - 2] = c[2].conj();
        c[n / 2] = Complex64::new(0.4, 0.0); // Nyquist must be real for real fields
        let padded = pad_spectrum(&c, n, m, 1);
        let mut phys = padded.clone();
        fft_nd(&mut phys, &[m], true);
        for t in 0..m {
            let x = 2.0 * std::f64::consts::PI * t as f64 / m as f64;
            let expected = 2.0 * (c[2] * Complex64::new(0.0, 2.0 * x).exp()).re
                + 0.4 * (4.0 * x).cos();
            assert!((phys[t].re - expected).abs() < 1e-12, "t={t}");
            assert!(phys[t].im.abs() < 1e-12);
        }
    }
}
