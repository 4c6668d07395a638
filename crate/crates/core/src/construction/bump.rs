use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::lp::{Field, GridSpec, RadialCutoff, SmoothStep};

/// Plateau radius of `hat_theta`.
pub const HAT_INNER: f64 = 1.0 / 200.0;
/// Support radius of `hat_theta`.
pub const HAT_OUTER: f64 = 1.0 / 100.0;
/// Modulation frequency of the bump, `17/24`.
pub const BUMP_OMEGA: f64 = 17.0 / 24.0;
/// Carrier of `rho_0` in units of `2^n`, `17/12`.
pub const CARRIER_RATIO: f64 = 17.0 / 12.0;

/// `theta(0) = (1/2pi) int hat_theta = (inner + outer) / (2 pi)`, using
/// `eta(t) + eta(1 - t) = 1` on the transition.
pub fn theta0_exact() -> f64 {
    (HAT_INNER + HAT_OUTER) / (2.0 * PI)
}

/// The bump `theta` (inverse transform of `hat_theta`) and
/// `phi_bump(x) = theta(x) sin(17 x / 24)`, sampled on a dense grid.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    hat: RadialCutoff,
    theta: Field,
    phi: Field,
    theta_abs: Vec<f64>,
}

impl BumpProfile {
    /// Default sampling grid: unit spacing on `[-2^17, 2^17)`.
    pub fn default_grid() -> GridSpec {
        GridSpec::new(1 << 18, (1u64 << 17) as f64).expect("static grid")
    }

    pub fn new() -> Self {
        Self::build(&Self::default_grid(), SmoothStep::default()).expect("default grid resolves the bump")
    }

    /// Synthesise `theta` from its transform on `grid` (periodised).
    pub fn build(grid: &GridSpec, step: SmoothStep) -> Result<Self> {
        grid.check_covers(0.0, BUMP_OMEGA + HAT_OUTER)?;
        let hat = RadialCutoff::new(HAT_INNER, HAT_OUTER, step);
        let theta = synthesize(grid, |xi| Complex64::new(hat.eval(xi), 0.0));
        let phi = synthesize(grid, |xi| {
            (Complex64::new(hat.eval(xi - BUMP_OMEGA) - hat.eval(xi + BUMP_OMEGA), 0.0))
                / Complex64::new(0.0, 2.0)
        });
        let theta_abs = theta.values()?.iter().map(|v| v.abs()).collect();
        Ok(BumpProfile {
            hat,
            theta,
            phi,
            theta_abs,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.theta.grid()
    }

    #[inline]
    pub fn hat_theta(&self, xi: f64) -> f64 {
        self.hat.eval(xi)
    }

    pub fn theta_field(&self) -> &Field {
        &self.theta
    }

    pub fn phi_bump_field(&self) -> &Field {
        &self.phi
    }

    /// `theta(x)` by quadrature of `(1/pi) int_0^{1/100} hat_theta cos(x xi)`.
    pub fn theta_at(&self, x: f64) -> f64 {
        let m = 8192;
        let d = HAT_OUTER / m as f64;
        // integrand and all its derivatives vanish at the outer end
        let mut s = 0.5 * self.hat.eval(0.0);
        for k in 1..m {
            let xi = k as f64 * d;
            s += self.hat.eval(xi) * (x * xi).cos();
        }
        s * d / PI
    }

    pub fn phi_bump_at(&self, x: f64) -> f64 {
        self.theta_at(x) * (BUMP_OMEGA * x).sin()
    }

    /// `F[phi_bump](xi) = (hat_theta(xi - 17/24) - hat_theta(xi + 17/24)) / 2i`.
    #[inline]
    pub fn phi_bump_transform(&self, xi: f64) -> Complex64 {
        Complex64::new(0.0, -0.5) * (self.hat.eval(xi - BUMP_OMEGA) - self.hat.eval(xi + BUMP_OMEGA))
    }

    /// `max |phi_bump|`, refined between samples.
    pub fn max_abs_phi(&self) -> f64 {
        self.phi.linf()
    }

    /// `|theta(y)|` from the sample table (linear interpolation, zero outside).
    pub fn theta_abs_table(&self, y: f64) -> f64 {
        let g = self.grid();
        let s = (y + g.half_length()) / g.spacing();
        if s < 0.0 || s >= (g.num_points() - 1) as f64 {
            return 0.0;
        }
        let i = s.floor() as usize;
        let w = s - i as f64;
        (1.0 - w) * self.theta_abs[i] + w * self.theta_abs[i + 1]
    }
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self::new()
    }
}

/// Envelope coefficients of the periodisation of a function with transform `f`
/// centred at 0: `a_p = f(kappa_p) (-1)^p / 2L`.
pub(crate) fn periodized_coeffs(grid: &GridSpec, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    let n = grid.num_points();
    let inv = 1.0 / (2.0 * grid.half_length());
    (0..n)
        .map(|p| {
            if p == n / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            f(grid.wavenumber(p)) * (sign * inv)
        })
        .collect()
}

fn synthesize(grid: &GridSpec, f: impl Fn(f64) -> Complex64) -> Field {
    Field::from_band_coeffs(*grid, 0, periodized_coeffs(grid, f)).expect("length matches")
}
