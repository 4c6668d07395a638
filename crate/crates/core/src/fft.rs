//! Thin wrapper around a process-wide `rustfft` planner.
//!
//! Coefficients are kept *normalised*: `coeffs = forward(values) / N`, so that
//! `values = inverse(coeffs)` and zero-padding a coefficient vector to any
//! larger length yields the trigonometric interpolant on the finer grid.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
    if inverse {
        p.plan_fft_inverse(len)
    } else {
        p.plan_fft_forward(len)
    }
}

/// In-place forward transform followed by division by the length.
pub fn forward_normalized(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let scale = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

/// In-place unnormalised inverse transform (synthesis from normalised coefficients).
pub fn inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
}

/// Signed integer wavenumber index of FFT slot `i` for length `n`.
/// The Nyquist slot `n / 2` is reported as `-n / 2`.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Copy normalised coefficients of length `n` into a zero-padded vector of
/// length `m >= n`. The Nyquist slot is dropped.
pub fn pad(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    debug_assert!(m >= n);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    out[..half].copy_from_slice(&coeffs[..half]);
    for k in 1..half {
        out[m - k] = coeffs[n - k];
    }
    out
}

/// Inverse of [`pad`]: keep the `n` lowest modes of a length-`m` vector,
/// zeroing the Nyquist slot.
pub fn truncate(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = coeffs.len();
    debug_assert!(m >= n);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let half = n / 2;
    out[..half].copy_from_slice(&coeffs[..half]);
    for k in 1..half {
        out[n - k] = coeffs[m - k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let vals: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.3).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut buf = vals.clone();
        forward_normalized(&mut buf);
        inverse(&mut buf);
        for (a, b) in vals.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn pad_then_truncate_keeps_interior_modes() {
        let c: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let back = truncate(&pad(&c, 24), 16);
        for i in 0..16 {
            if i == 8 {
                assert_eq!(back[i], Complex64::new(0.0, 0.0));
            } else {
                assert_eq!(back[i], c[i]);
            }
        }
    }

    #[test]
    fn signed_indices() {
        assert_eq!(signed_index(0, 8), 0);
        assert_eq!(signed_index(3, 8), 3);
        assert_eq!(signed_index(4, 8), -4);
        assert_eq!(signed_index(7, 8), -1);
    }
}
