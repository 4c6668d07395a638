use std::f64::consts::PI;

use dplab::lp::calibration::random_field;
use dplab::lp::filter::{CHI_INNER, CHI_OUTER};
use dplab::lp::{BesovParams, Field, GridSpec, LPFilterBank};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random(grid: &GridSpec, seed: u64, max_slot: usize) -> Field {
    random_field(grid, &mut ChaCha8Rng::seed_from_u64(seed), max_slot)
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().linf()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_reconstruct_the_field(seed in any::<u64>(), slots in 1usize..255) {
        let grid = GridSpec::new(512, PI).unwrap();
        let bank = LPFilterBank::build(&grid, 1.0).unwrap();
        let f = random(&grid, seed, slots);
        let sum = bank.delta_range(&f, -1, bank.j_max()).unwrap();
        prop_assert!(max_diff(&sum, &f) <= 1e-10 * f.linf());
    }

    #[test]
    fn distant_blocks_are_orthogonal(seed in any::<u64>(), j in 0i32..8, gap in 2i32..6) {
        let grid = GridSpec::new(512, PI).unwrap();
        let bank = LPFilterBank::build(&grid, 1.0).unwrap();
        let k = j + gap;
        prop_assume!(k <= bank.j_max());
        let f = random(&grid, seed, 255);
        let jk = bank.delta_j(&bank.delta_j(&f, k).unwrap(), j).unwrap();
        prop_assert!(jk.linf() <= 1e-10 * f.linf());
    }

    #[test]
    fn block_spectra_stay_in_their_annulus(seed in any::<u64>(), j in -1i32..8) {
        let grid = GridSpec::new(512, PI).unwrap();
        let bank = LPFilterBank::build(&grid, 1.0).unwrap();
        let f = random(&grid, seed, 255);
        let d = bank.delta_j(&f, j).unwrap();
        let (lo, hi) = if j < 0 {
            (0.0, CHI_OUTER)
        } else {
            let s = 2f64.powi(j);
            (CHI_INNER * s, 2.0 * CHI_OUTER * s)
        };
        let peak = f.band(0).unwrap().iter().map(|c| c.norm()).fold(0.0, f64::max);
        if let Some(c) = d.band(0) {
            for (i, c) in c.iter().enumerate() {
                let xi = grid.wavenumber(i).abs();
                if xi < lo || xi > hi {
                    prop_assert!(c.norm() <= 1e-12 * peak, "slot {} xi {}", i, xi);
                }
            }
        }
    }

    #[test]
    fn multipliers_are_exact_on_cosines(k in 1u32..32, a in 0.1f64..10.0) {
        let grid = GridSpec::new(64, PI).unwrap();
        let k = k as f64;
        let f = Field::from_fn(grid, |x| a * (k * x).cos());
        let sin = Field::from_fn(grid, |x| a * (k * x).sin());
        let h = 1.0 + k * k;
        let tol = 1e-12 * a;
        prop_assert!(max_diff(&f.derivative(), &sin.scale(-k)) <= tol * k);
        prop_assert!(max_diff(&f.helmholtz_inverse(), &f.scale(1.0 / h)) <= tol);
        prop_assert!(max_diff(&f.dx_helmholtz_inverse(), &sin.scale(-k / h)) <= tol);
        prop_assert!(max_diff(&f.helmholtz(), &f.scale(h)) <= tol * h);
    }

    #[test]
    fn helmholtz_round_trip(seed in any::<u64>()) {
        let grid = GridSpec::new(256, PI).unwrap();
        let f = random(&grid, seed, 127);
        prop_assert!(max_diff(&f.helmholtz_inverse().helmholtz(), &f) <= 1e-10 * f.linf());
    }

    #[test]
    fn dilation_shifts_blocks_by_one(seed in any::<u64>(), slots in 1usize..127) {
        let g1 = GridSpec::new(256, 4.0 * PI).unwrap();
        let g2 = GridSpec::new(256, 2.0 * PI).unwrap();
        let b1 = LPFilterBank::build(&g1, 1.0).unwrap();
        let b2 = LPFilterBank::build(&g2, 1.0).unwrap();
        let f = random(&g1, seed, slots);
        let coeffs = f.band(0).unwrap().to_vec();
        let f2 = Field::from_band_coeffs(g2, 0, coeffs).unwrap();
        for j in 0..b1.j_max().min(b2.j_max() - 1) {
            let a = b1.delta_j(&f, j).unwrap().linf();
            let b = b2.delta_j(&f2, j + 1).unwrap().linf();
            prop_assert!((a - b).abs() <= 1e-8 * f.linf().max(a), "j {}: {} vs {}", j, a, b);
        }
    }

    #[test]
    fn sup_norm_brackets_dense_sampling(seed in any::<u64>(), slots in 1usize..31) {
        let grid = GridSpec::new(64, PI).unwrap();
        let f = random(&grid, seed, slots);
        let m = 64 * 64;
        let dense = (0..m)
            .map(|i| f.eval(-PI + 2.0 * PI * i as f64 / m as f64).abs())
            .fold(0.0, f64::max);
        let sup = f.linf();
        prop_assert!(sup >= dense - 1e-12 * sup);
        prop_assert!(sup <= dense * (1.0 + 1e-3));
    }
}

#[test]
fn carrier_frequency_lives_in_one_block() {
    let grid = GridSpec::new(8192, 12.0 * PI).unwrap();
    let bank = LPFilterBank::build(&grid, 1.0).unwrap();
    for j in 0..=6 {
        let k = 17.0 / 12.0 * 2f64.powi(j);
        let f = Field::from_fn(grid, |x| (k * x).cos());
        assert!(max_diff(&bank.delta_j(&f, j).unwrap(), &f) <= 1e-10);
        for other in bank.indices().filter(|&i| i != j) {
            assert!(bank.delta_j(&f, other).unwrap().linf() <= 1e-10, "j {j} other {other}");
        }
    }
}

#[test]
fn besov_norm_of_single_block_cosine() {
    let grid = GridSpec::new(4096, 5.0 * PI).unwrap();
    let bank = LPFilterBank::build(&grid, 1.0).unwrap();
    let b = BesovParams::sup_l1(1.0);
    for j in 0..=7 {
        let a = 0.37;
        let f = Field::from_fn(grid, |x| a * (1.4 * 2f64.powi(j) * x).cos());
        let v = bank.besov_norm(&f, &b, None).unwrap();
        assert!((v / (a * 2f64.powi(j)) - 1.0).abs() <= 1e-8, "j {j}: {v}");
    }
    assert_eq!(bank.besov_norm(&Field::zeros(grid), &b, None).unwrap(), 0.0);

    let c = Field::from_fn(grid, |_| -1.75);
    let s0 = bank.besov_norm(&c, &BesovParams::sup_l1(0.0), None).unwrap();
    assert!((s0 - 1.75).abs() <= 1e-12);
    assert!((bank.besov_norm(&c, &b, None).unwrap() - 0.875).abs() <= 1e-12);
}

// Oracle: (Delta_j f)(x) = (1/2pi) int phi(2^-j xi) fhat(xi) e^{i x xi} d xi with
// the closed-form transform of a Gaussian, by trapezoidal quadrature.
fn gaussian_block_oracle(bank: &LPFilterBank, j: i32, sigma: f64, x: f64) -> f64 {
    let hi = 2.0 * CHI_OUTER * 2f64.powi(j);
    let m = 200_000;
    let h = 2.0 * hi / m as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..=m {
        let xi = -hi + h * i as f64;
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        let fhat = sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * xi * xi).exp();
        s += w * bank.symbol(j, xi) * fhat * Complex64::from_polar(1.0, x * xi);
    }
    (s * h / (2.0 * PI)).re
}

#[test]
fn gaussian_blocks_match_quadrature() {
    let sigma = 0.8;
    let grid = GridSpec::new(8192, 160.0).unwrap();
    let bank = LPFilterBank::build(&grid, 1.0).unwrap();
    let f = Field::from_fn(grid, |x| (-x * x / (2.0 * sigma * sigma)).exp());
    for j in -1..=2 {
        let d = bank.delta_j(&f, j).unwrap();
        for x in [0.0, 0.3, -1.1, 2.5] {
            let want = gaussian_block_oracle(&bank, j, sigma, x);
            assert!((d.eval(x) - want).abs() <= 1e-6, "j {j} x {x}: {} vs {want}", d.eval(x));
        }
    }
}

#[test]
fn derivative_beats_fourth_order_differences() {
    let f = |x: f64| (x.sin()).exp();
    let df = |x: f64| x.cos() * (x.sin()).exp();
    let fd_error = |n: usize| {
        let grid = GridSpec::new(n, PI).unwrap();
        let v = Field::from_fn(grid, f).values().unwrap();
        let h = grid.spacing();
        (0..n)
            .map(|i| {
                let at = |o: isize| v[(i as isize + o).rem_euclid(n as isize) as usize];
                let fd = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
                (fd - df(grid.x(i))).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (fd_error(64), fd_error(128));
    assert!((e1 / e2 / 16.0 - 1.0).abs() < 0.2, "fd order ratio {}", e1 / e2);

    let grid = GridSpec::new(64, PI).unwrap();
    let spectral = Field::from_fn(grid, f).derivative();
    let exact = Field::from_fn(grid, df);
    assert!(max_diff(&spectral, &exact) < e2 * 1e-3);
}
