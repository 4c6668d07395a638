use num_complex::Complex64;
use serde::Serialize;

use crate::construction::bump::{periodized_coeffs, BumpProfile};
use crate::construction::params::{cross_talk, ConstructionParams, Layout, CROSS_TALK_TOL};
use crate::error::{Error, Result};
use crate::lp::{Field, GridSpec};

#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Field,
    pub rho0: Field,
    pub layout: Layout,
    pub support: SupportDiagnostics,
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportDiagnostics {
    pub band_center: f64,
    pub band_halfwidth: f64,
    /// Share of spectral energy outside `center +- halfwidth`.
    pub energy_outside: f64,
    pub cross_talk: f64,
    pub max_envelope_frequency: f64,
}

/// Transform of `sum_l phi_bump(2^l (x - c_l))` at `xi`.
pub(crate) fn bump_sum_transform(
    bump: &BumpProfile,
    terms: &[(i32, f64)],
    xi: f64,
) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for &(l, c) in terms {
        let scale = 2f64.powi(-l);
        let f = bump.phi_bump_transform(xi * scale);
        if f != Complex64::new(0.0, 0.0) {
            s += f * scale * Complex64::from_polar(1.0, -c * xi);
        }
    }
    s
}

/// `sum_l phi_bump(2^l (x - c_l))` as a band-0 field on `grid`.
pub fn bump_sum(bump: &BumpProfile, grid: &GridSpec, terms: &[(i32, f64)]) -> Field {
    let coeffs = periodized_coeffs(grid, |xi| bump_sum_transform(bump, terms, xi));
    Field::from_band_coeffs(*grid, 0, coeffs).expect("length matches")
}

/// `u_0 = 0` and `rho_0 = A sin(k_c x) sum_l phi_bump(2^l (x - c_l))`, i.e. a
/// band-1 envelope `A / (2i) sum_l phi_l`.
pub fn construct_initial_data(
    params: &ConstructionParams,
    bump: &BumpProfile,
    max_band: usize,
) -> Result<InitialData> {
    let layout = params.layout(max_band)?;
    let grid = layout.grid;
    let terms: Vec<(i32, f64)> = params
        .active_terms()
        .into_iter()
        .map(|l| (l, layout.center(l).expect("centre for every index")))
        .collect();

    let ct = cross_talk(params, bump);
    if ct > CROSS_TALK_TOL {
        return Err(Error::setup(format!(
            "bump cross-talk {ct:.3e} exceeds {CROSS_TALK_TOL:e}; increase the separation (S = {})",
            params.separation
        )));
    }

    let mut rho0 = Field::zeros(grid);
    if !terms.is_empty() {
        let factor = Complex64::new(0.0, -0.5 * params.amplitude);
        let coeffs = periodized_coeffs(&grid, |xi| factor * bump_sum_transform(bump, &terms, xi));
        rho0.set_band(1, Some(coeffs))?;
    }

    let center = params.carrier();
    let halfwidth = params.band_halfwidth();
    let total = rho0.spectral_energy(|_| true);
    let outside = rho0.spectral_energy(|xi| (xi - center).abs() > halfwidth);
    let support = SupportDiagnostics {
        band_center: center,
        band_halfwidth: halfwidth,
        energy_outside: if total > 0.0 { outside / total } else { 0.0 },
        cross_talk: ct,
        max_envelope_frequency: rho0.max_frequency(0.0) - center,
    };
    Ok(InitialData {
        u0: Field::zeros(grid),
        rho0,
        layout,
        support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::params::Terms;
    use std::sync::OnceLock;

    fn bump() -> &'static BumpProfile {
        static B: OnceLock<BumpProfile> = OnceLock::new();
        B.get_or_init(BumpProfile::new)
    }

    #[test]
    fn rho0_matches_pointwise_formula() {
        let mut p = ConstructionParams::new(8).unwrap();
        p.terms = Terms::Single(3);
        let d = construct_initial_data(&p, bump(), 3).unwrap();
        assert!(d.u0.is_zero());
        let (l, c) = (3, d.layout.center(3).unwrap());
        for x in [c + 0.37, c - 5.1, c + 40.25] {
            let expect = p.amplitude * (p.carrier() * x).sin() * bump().phi_bump_at(2f64.powi(l) * (x - c));
            assert!((d.rho0.eval(x) - expect).abs() < 1e-12, "{x}: {} vs {expect}", d.rho0.eval(x));
        }
        assert_eq!(d.support.energy_outside, 0.0);
    }

    #[test]
    fn zero_terms_give_zero_field() {
        let mut p = ConstructionParams::new(8).unwrap();
        p.terms = Terms::None;
        let d = construct_initial_data(&p, bump(), 3).unwrap();
        assert!(d.rho0.is_zero());
    }

    #[test]
    fn tiny_separation_fails_cross_talk() {
        let mut p = ConstructionParams::new(8).unwrap();
        p.separation = 64.0;
        let e = construct_initial_data(&p, bump(), 3).unwrap_err();
        assert!(e.to_string().contains("cross-talk"));
    }
}
