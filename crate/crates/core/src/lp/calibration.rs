//! Empirical constants for the Bernstein and commutator inequalities.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::field::Field;
use crate::lp::filter::{BesovParams, LPFilterBank};
use crate::lp::grid::GridSpec;

/// Grid used for block `j`: `L = 16 pi / 2^j`, so the annulus always lands
/// on the same FFT slots and the random draws are dilations of each other.
pub fn calibration_grid(j: i32) -> Result<GridSpec> {
    GridSpec::new(256, 16.0 * PI * 2f64.powi(-j))
}

/// Random field with independent Gaussian-ish coefficients on every slot.
pub fn random_field(grid: &GridSpec, rng: &mut impl Rng, max_slot: usize) -> Field {
    let n = grid.num_points();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=max_slot.min(n / 2 - 1) {
        let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        c[k] = a;
        c[n - k] = a.conj();
    }
    c[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    Field::from_band_coeffs(*grid, 0, c).expect("length matches")
}

/// Extremes of `||d g||_inf / (2^j ||g||_inf)` over `trials` random fields
/// `g = Delta_j(noise)`.
pub fn bernstein_ratio(j: i32, trials: usize, bank: &LPFilterBank, seed: u64) -> Result<(f64, f64)> {
    if trials < 1 {
        return Err(Error::arg("bernstein_ratio needs at least one trial"));
    }
    if j < 0 {
        return Err(Error::arg("bernstein_ratio is defined for j >= 0"));
    }
    let grid = calibration_grid(j)?;
    let local = LPFilterBank::build(&grid, bank.sharpness())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let scale = 2f64.powi(j);
    for _ in 0..trials {
        let g = local.delta_j(&random_field(&grid, &mut rng, 127), j)?;
        let r = g.derivative().linf() / (scale * g.linf());
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `u d(Delta_j f) - Delta_j (u d f)` with a dealiased product.
pub fn commutator(u: &Field, f: &Field, j: i32, bank: &LPFilterBank) -> Result<Field> {
    let first = u.product(&bank.delta_j(f, j)?.derivative())?;
    let second = bank.delta_j(&u.product(&f.derivative())?, j)?;
    first.sub(&second)
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorCalibration {
    pub pairs: usize,
    pub max_constant: f64,
    pub mean_constant: f64,
}

/// `sup_j 2^j ||[Delta_j, u d] f||_inf` over the Lemma-style right-hand side,
/// maximised over random pairs.
pub fn commutator_constant(grid: &GridSpec, pairs: usize, seed: u64) -> Result<CommutatorCalibration> {
    if pairs < 1 {
        return Err(Error::arg("commutator_constant needs at least one pair"));
    }
    let bank = LPFilterBank::build(grid, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // content in the lowest third keeps every product exact
    let slots = grid.num_points() / 6;
    let b1 = BesovParams::sup_l1(1.0);
    let b0 = BesovParams::sup_l1(0.0);
    let (mut max_c, mut sum_c) = (0.0f64, 0.0);
    for _ in 0..pairs {
        let u = random_field(grid, &mut rng, slots);
        let f = random_field(grid, &mut rng, slots);
        let ux = u.derivative();
        let rhs = ux.linf() * bank.besov_norm(&f, &b1, None)?
            + f.derivative().linf() * bank.besov_norm(&ux, &b0, None)?;
        let mut lhs = 0.0f64;
        for j in 0..=bank.j_max() {
            lhs = lhs.max(2f64.powi(j) * commutator(&u, &f, j, &bank)?.linf());
        }
        let c = lhs / rhs;
        max_c = max_c.max(c);
        sum_c += c;
    }
    Ok(CommutatorCalibration {
        pairs,
        max_constant: max_c,
        mean_constant: sum_c / pairs as f64,
    })
}
