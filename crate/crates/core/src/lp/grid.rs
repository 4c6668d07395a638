use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::signed_index;

/// Uniform periodic grid on `[-L, L)`.
///
/// A grid with `max_band == 0` is an ordinary pseudospectral grid: the field is
/// its samples. With `max_band = P > 0` the grid carries *modulated bands*: a
/// real field is represented as
///
/// ```text
/// f(x) = A_0(x) + sum_{m=1..P} 2 Re( A_m(x) e^{i m k_c x} )
/// ```
///
/// where every envelope `A_m` is a band-limited periodic function sampled on the
/// `num_points` nodes. This is the restriction of a (much finer) uniform grid
/// to the Fourier modes lying within `envelope_nyquist` of `m k_c`; fields whose
/// spectrum sits in those windows are represented exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    num_points: usize,
    half_length: f64,
    carrier: f64,
    max_band: usize,
}

impl GridSpec {
    /// Plain grid with `num_points` samples over `[-half_length, half_length)`.
    pub fn new(num_points: usize, half_length: f64) -> Result<Self> {
        Self::modulated(num_points, half_length, 0.0, 0)
    }

    pub fn modulated(
        num_points: usize,
        half_length: f64,
        carrier: f64,
        max_band: usize,
    ) -> Result<Self> {
        if num_points < 16 || !num_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "num_points must be a power of two >= 16, got {num_points}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain half-length must be positive and finite, got {half_length}"
            )));
        }
        let g = GridSpec {
            num_points,
            half_length,
            carrier,
            max_band,
        };
        if max_band > 0 {
            if !(carrier.is_finite() && carrier > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "a banded grid needs a positive carrier, got {carrier}"
                )));
            }
            if carrier <= 2.0 * g.envelope_nyquist() {
                return Err(Error::InvalidGrid(format!(
                    "bands overlap: carrier {carrier} must exceed twice the envelope Nyquist {}",
                    g.envelope_nyquist()
                )));
            }
        } else if carrier != 0.0 {
            return Err(Error::InvalidGrid(
                "a carrier requires at least one modulated band".into(),
            ));
        }
        Ok(g)
    }

    /// Same domain and carrier with `factor` times the nodes. Only used to
    /// evaluate fields, so the band-overlap check is skipped.
    pub(crate) fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            num_points: self.num_points * factor,
            ..*self
        }
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn max_band(&self) -> usize {
        self.max_band
    }

    pub fn is_banded(&self) -> bool {
        self.max_band > 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.num_points as f64
    }

    /// Node `i`, i.e. `-L + i h`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.x(i)).collect()
    }

    /// Fundamental wavenumber `pi / L`.
    pub fn fundamental(&self) -> f64 {
        PI / self.half_length
    }

    /// Envelope wavenumber of FFT slot `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        signed_index(i, self.num_points) as f64 * self.fundamental()
    }

    /// Physical frequency of slot `i` in band `m`.
    #[inline]
    pub fn frequency(&self, band: usize, i: usize) -> f64 {
        band as f64 * self.carrier + self.wavenumber(i)
    }

    /// `pi / h`: largest envelope wavenumber.
    pub fn envelope_nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// Largest physical frequency the grid can carry.
    pub fn nyquist(&self) -> f64 {
        self.max_band as f64 * self.carrier + self.envelope_nyquist()
    }

    /// Closed frequency interval covered by band `m`.
    pub fn band_range(&self, band: usize) -> (f64, f64) {
        let c = band as f64 * self.carrier;
        let k = self.envelope_nyquist();
        if band == 0 {
            (0.0, k)
        } else {
            (c - k, c + k)
        }
    }

    /// Whether the band windows cover the frequency `xi` (in absolute value).
    pub fn represents(&self, xi: f64) -> bool {
        let a = xi.abs();
        (0..=self.max_band).any(|m| {
            let (lo, hi) = self.band_range(m);
            a >= lo && a < hi
        })
    }

    /// Check that every frequency in `[lo, hi]` (absolute values) lies inside one band.
    pub fn check_covers(&self, lo: f64, hi: f64) -> Result<()> {
        let ok = (0..=self.max_band).any(|m| {
            let (a, b) = self.band_range(m);
            lo >= a && hi < b
        });
        if ok {
            Ok(())
        } else {
            Err(Error::setup(format!(
                "frequency band [{lo:.6e}, {hi:.6e}] is not resolved by the grid (max frequency {:.6e})",
                self.nyquist()
            )))
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Same envelope layout with `L` divided by `2^k` (frequencies multiplied by `2^k`).
    pub fn dilated(&self, k: i32) -> Result<Self> {
        let s = 2f64.powi(k);
        GridSpec::modulated(
            self.num_points,
            self.half_length / s,
            self.carrier * s,
            self.max_band,
        )
    }
}
