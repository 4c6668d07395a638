use serde::Serialize;

use crate::construction::bump::{theta0_exact, BumpProfile, CARRIER_RATIO};
use crate::construction::initial::{bump_sum, InitialData};
use crate::construction::params::ConstructionParams;
use crate::error::Result;
use crate::lp::{Field, LPFilterBank};

/// `phi_bump^2 = Phi_1 + Phi_2` with `Phi_1 = theta^2 / 2` and
/// `Phi_2 = -theta^2 cos(17 x / 12) / 2`, on the bump's grid.
pub fn phi_squared_decomposition(bump: &BumpProfile) -> Result<(Field, Field)> {
    let g = *bump.grid();
    let th = bump.theta_field().values()?;
    let p1: Vec<f64> = th.iter().map(|t| 0.5 * t * t).collect();
    let p2: Vec<f64> = th
        .iter()
        .zip(g.nodes())
        .map(|(t, x)| -0.5 * t * t * (CARRIER_RATIO * x).cos())
        .collect();
    Ok((Field::from_values(g, &p1)?, Field::from_values(g, &p2)?))
}

/// `B_j = {x : 2^j |x - c_j| <= 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowBj {
    pub j: i32,
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
}

impl WindowBj {
    pub fn new(j: i32, center: f64) -> Self {
        let r = 2f64.powi(-j);
        WindowBj {
            j,
            center,
            lo: center - r,
            hi: center + r,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma32Report {
    /// `(j, ||Delta_j(rho_0^2)||_{L^inf(B_j)})`.
    pub per_j: Vec<(i32, f64)>,
    /// `per_j` divided by `amplitude^2 / 2`; compares to `theta(0)^2 / 2`.
    pub per_j_normalized: Vec<(i32, f64)>,
    /// `||rho_0^2||_{B^0_{inf,1}(N(n))}`.
    pub total: f64,
    pub total_over_log2: f64,
    pub anchor: f64,
}

pub fn lemma32_lower_bound(
    params: &ConstructionParams,
    data: &InitialData,
    bank: &LPFilterBank,
) -> Result<Lemma32Report> {
    let sq = data.rho0.product(&data.rho0)?;
    let half_a2 = 0.5 * params.amplitude * params.amplitude;
    let mut per_j = Vec::new();
    let mut per_j_normalized = Vec::new();
    let mut total = 0.0;
    for j in params.index_set() {
        let block = bank.delta_j(&sq, j)?;
        let w = WindowBj::new(j, data.layout.center(j).expect("centre for every index"));
        let v = block.linf_on(w.lo, w.hi);
        per_j.push((j, v));
        per_j_normalized.push((j, if half_a2 > 0.0 { v / half_a2 } else { 0.0 }));
        total += block.linf();
    }
    let ln = (params.n as f64).ln();
    Ok(Lemma32Report {
        per_j,
        per_j_normalized,
        total,
        total_over_log2: total / (ln * ln),
        anchor: 0.5 * theta0_exact().powi(2),
    })
}

/// The diagonal part `U_1 = sum_l phi_l^2` and the cross terms
/// `U_2 = (sum_l phi_l)^2 - U_1` of the squared bump sum, on the layout grid.
pub fn diagonal_and_cross_terms(
    params: &ConstructionParams,
    bump: &BumpProfile,
    data: &InitialData,
) -> Result<(Field, Field)> {
    let grid = data.layout.grid;
    let terms: Vec<(i32, f64)> = params
        .active_terms()
        .into_iter()
        .map(|l| (l, data.layout.center(l).unwrap()))
        .collect();
    let s = bump_sum(bump, &grid, &terms);
    let mut u1 = Field::zeros(grid);
    for t in &terms {
        let f = bump_sum(bump, &grid, std::slice::from_ref(t));
        u1 = u1.add(&f.product(&f)?)?;
    }
    let u2 = s.product(&s)?.sub(&u1)?;
    Ok((u1, u2))
}

/// `U_{1,1} = phi_j^2` for the single bump `j`.
pub fn single_bump_square(bump: &BumpProfile, data: &InitialData, j: i32) -> Result<Field> {
    let c = data.layout.center(j).expect("centre for every index");
    let f = bump_sum(bump, &data.layout.grid, &[(j, c)]);
    f.product(&f)
}
