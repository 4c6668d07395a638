use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Field, LPFilterBank, NodeValues};
use crate::solver::Sample;

/// `sum_{j in N(n)} 2^j ||Delta_j E_0||_inf` with
/// `E_0 = -(1/2) d (1 - d^2)^{-1} (rho_0^2)`.
#[derive(Debug, Clone, Serialize)]
pub struct E0Bound {
    pub per_j: Vec<(i32, f64)>,
    pub value: f64,
}

pub fn e0_field(rho0: &Field) -> Result<Field> {
    Ok(rho0.product(rho0)?.dx_helmholtz_inverse().scale(-0.5))
}

pub fn compute_e0_lower_bound(rho0: &Field, bank: &LPFilterBank, js: &[i32]) -> Result<E0Bound> {
    let e0 = e0_field(rho0)?;
    let mut per_j = Vec::with_capacity(js.len());
    for &j in js {
        per_j.push((j, 2f64.powi(j) * bank.delta_j(&e0, j)?.linf()));
    }
    let value = per_j.iter().map(|p| p.1).sum();
    Ok(E0Bound { per_j, value })
}

/// Per-block series, indexed `[time][block]`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub js: Vec<i32>,
    pub times: Vec<f64>,
    /// `2^j ||R_j o psi||_inf` with `R_j = u d(Delta_j u) - Delta_j(u u_x)`.
    pub commutator: Vec<Vec<f64>>,
    /// `2^j ||Delta_j F o psi||_inf`.
    pub forcing_f: Vec<Vec<f64>>,
    /// `2^j ||Delta_j E o psi - Delta_j E_0||_inf`.
    pub e_drift: Vec<Vec<f64>>,
    /// `t 2^j ||Delta_j E_0||_inf`.
    pub driving: Vec<Vec<f64>>,
    /// `2^j ||(Delta_j u) o psi||_inf`.
    pub transported: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Hierarchy {
    pub driving: f64,
    pub commutator: f64,
    pub forcing_f: f64,
    pub e_drift: f64,
    /// `driving / (commutator + forcing_f + e_drift)`.
    pub factor: f64,
}

fn trapezoid(times: &[f64], series: &[Vec<f64>], k: usize) -> f64 {
    times
        .windows(2)
        .zip(series.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0][k] + s[1][k]))
        .sum()
}

impl StepDiagnostics {
    fn total_at(series: &[Vec<f64>], i: usize) -> f64 {
        series.get(i).map_or(0.0, |row| row.iter().sum())
    }

    /// Driving term against the time-integrated remainders at the last time.
    pub fn hierarchy(&self) -> Hierarchy {
        let last = self.times.len().saturating_sub(1);
        let nj = self.js.len();
        let commutator = (0..nj).map(|k| trapezoid(&self.times, &self.commutator, k)).sum();
        let forcing_f = (0..nj).map(|k| trapezoid(&self.times, &self.forcing_f, k)).sum();
        let e_drift = Self::total_at(&self.e_drift, last);
        let driving = Self::total_at(&self.driving, last);
        let rest: f64 = commutator + forcing_f + e_drift;
        Hierarchy {
            driving,
            commutator,
            forcing_f,
            e_drift,
            factor: if rest > 0.0 { driving / rest } else { f64::INFINITY },
        }
    }

    /// `sum_j 2^j ||(Delta_j u) o psi|| / t` at every positive time `<= t_max`.
    pub fn picard_quotients(&self, t_max: f64) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t > 0.0 && t <= t_max * (1.0 + 1e-12))
            .map(|(i, &t)| (t, Self::total_at(&self.transported, i) / t))
            .collect()
    }

    pub fn commutator_totals(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|i| Self::total_at(&self.commutator, i))
            .collect()
    }
}

/// Largest relative residual of the transport identity per block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCheck {
    pub js: Vec<i32>,
    pub max_residual: Vec<f64>,
    pub dt: f64,
    /// `max(10 dt^2, 1e-6)`.
    pub tolerance: f64,
}

impl TransportCheck {
    pub fn passed(&self) -> bool {
        self.max_residual.iter().all(|&r| r <= self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.max_residual.iter().copied().fold(0.0, f64::max)
    }
}

/// Observer accumulating the Step 1 series and the transport identity
/// `(Delta_j u) o psi = Delta_j u_0 + int_0^t (R_j + Delta_j(F + E)) o psi`.
pub struct Step1Recorder<'a> {
    bank: &'a LPFilterBank,
    js: Vec<i32>,
    de0: Vec<NodeValues>,
    de0_sup: Vec<f64>,
    du0: Vec<NodeValues>,
    integral: Vec<NodeValues>,
    prev: Option<(f64, Vec<NodeValues>)>,
    diag: StepDiagnostics,
    residual: Vec<f64>,
    dt: f64,
}

impl<'a> Step1Recorder<'a> {
    pub fn new(bank: &'a LPFilterBank, js: &[i32], u0: &Field, e0: &Field) -> Result<Self> {
        let grid = *bank.grid();
        let mut de0 = Vec::new();
        let mut de0_sup = Vec::new();
        let mut du0 = Vec::new();
        for &j in js {
            let d = bank.delta_j(e0, j)?;
            de0_sup.push(d.linf());
            de0.push(d.node_values());
            du0.push(bank.delta_j(u0, j)?.node_values());
        }
        Ok(Step1Recorder {
            bank,
            js: js.to_vec(),
            de0,
            de0_sup,
            du0,
            integral: vec![NodeValues::zeros(grid); js.len()],
            prev: None,
            diag: StepDiagnostics {
                js: js.to_vec(),
                ..Default::default()
            },
            residual: vec![0.0; js.len()],
            dt: 0.0,
        })
    }

    pub fn observe(&mut self, s: &Sample) -> Result<()> {
        let Some(flow) = s.flow else {
            return Err(Error::Unavailable(
                "step diagnostics need the flow map".into(),
            ));
        };
        self.dt = s.dt;
        let t = s.state.t;
        let u = &s.state.u;
        let u_at = flow.compose_nodes(u)?;
        let mut integrands = Vec::with_capacity(self.js.len());
        let (mut comm, mut ff, mut ed, mut drv, mut tr) = (vec![], vec![], vec![], vec![], vec![]);
        for (k, &j) in self.js.iter().enumerate() {
            let w = 2f64.powi(j);
            let du = self.bank.delta_j(u, j)?;
            let lhs = flow.compose_nodes(&du)?;
            let grad = flow.compose_nodes(&du.derivative())?;
            let proj = flow.compose_nodes(&self.bank.delta_j(&s.terms.u_ux, j)?)?;
            let r = u_at.times_real(&grad)?.axpy(-1.0, &proj)?;
            let df = self.bank.delta_j(&s.terms.f, j)?;
            let f = flow.compose_nodes(&df)?;
            let e = flow.compose_nodes(&self.bank.delta_j(&s.terms.e, j)?)?;

            // ||g o psi|| = ||g|| for a diffeomorphism psi, so the norms are
            // taken before composing.
            let r_field = u.product(&du.derivative())?.sub(&self.bank.delta_j(&s.terms.u_ux, j)?)?;
            comm.push(w * r_field.linf());
            ff.push(w * df.linf());
            tr.push(w * du.linf());
            drv.push(t * w * self.de0_sup[k]);
            // the composed difference is filtered to the neighbouring blocks,
            // which removes the aliasing of the composition
            let drift = e.axpy(-1.0, &self.de0[k])?.to_field()?;
            ed.push(w * self.bank.delta_range(&drift, j - 1, j + 1)?.linf());

            let integrand = r.axpy(1.0, &f)?.axpy(1.0, &e)?;
            if let Some((t_prev, prev)) = &self.prev {
                let h = 0.5 * (t - t_prev);
                self.integral[k] = self.integral[k]
                    .axpy(h, &prev[k])?
                    .axpy(h, &integrand)?;
            }
            let mismatch = lhs.axpy(-1.0, &self.du0[k])?.axpy(-1.0, &self.integral[k])?;
            let scale = lhs.linf();
            let res = if scale > 0.0 {
                mismatch.linf() / scale
            } else {
                mismatch.linf()
            };
            self.residual[k] = self.residual[k].max(res);
            integrands.push(integrand);
        }
        self.prev = Some((t, integrands));
        self.diag.times.push(t);
        self.diag.commutator.push(comm);
        self.diag.forcing_f.push(ff);
        self.diag.e_drift.push(ed);
        self.diag.driving.push(drv);
        self.diag.transported.push(tr);
        Ok(())
    }

    pub fn finish(self) -> (StepDiagnostics, TransportCheck) {
        let tolerance = (10.0 * self.dt * self.dt).max(1e-6);
        (
            self.diag,
            TransportCheck {
                js: self.js,
                max_residual: self.residual,
                dt: self.dt,
                tolerance,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::GridSpec;
    use crate::solver::{evolve, SolverConfig, State};
    use std::f64::consts::PI;

    #[test]
    fn zero_density_gives_zero_bound() {
        let g = GridSpec::new(256, 4.0 * PI).unwrap();
        let bank = LPFilterBank::build(&g, 1.0).unwrap();
        let b = compute_e0_lower_bound(&Field::zeros(g), &bank, &[1, 2]).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn zero_trajectory_has_zero_series() {
        let g = GridSpec::new(256, 16.0 * PI).unwrap();
        let bank = LPFilterBank::build(&g, 1.0).unwrap();
        let z = Field::zeros(g);
        let mut rec = Step1Recorder::new(&bank, &[1, 2, 3], &z, &z).unwrap();
        let cfg = SolverConfig::new(0.1);
        let s = State::new(0.0, z.clone(), z.clone()).unwrap();
        let tr = evolve(s, &cfg, true, &mut |smp| rec.observe(smp)).unwrap();
        assert!(tr.completed());
        let (d, t) = rec.finish();
        for series in [&d.commutator, &d.forcing_f, &d.e_drift, &d.driving, &d.transported] {
            assert!(series.iter().flatten().all(|&v| v == 0.0));
        }
        assert_eq!(t.worst(), 0.0);
    }

    #[test]
    fn missing_flow_is_reported() {
        let g = GridSpec::new(64, 4.0 * PI).unwrap();
        let bank = LPFilterBank::build(&g, 1.0).unwrap();
        let z = Field::zeros(g);
        let mut rec = Step1Recorder::new(&bank, &[0], &z, &z).unwrap();
        let s = State::new(0.0, z.clone(), z.clone()).unwrap();
        let tr = evolve(s, &SolverConfig::new(0.1), false, &mut |smp| rec.observe(smp)).unwrap();
        assert!(matches!(tr.failure, Some(Error::Unavailable(_))));
    }

    #[test]
    fn transport_identity_on_smooth_dense_data() {
        let g = GridSpec::new(128, 4.0 * PI).unwrap();
        let bank = LPFilterBank::build(&g, 1.0).unwrap();
        let u0 = Field::from_fn(g, |x| 0.2 * (0.5 * x).cos() + 0.05 * (2.0 * x).sin());
        let rho0 = Field::from_fn(g, |x| 0.3 * (1.5 * x).sin());
        let s = State::new(0.0, u0.clone(), rho0.clone()).unwrap();
        let e0 = e0_field(&rho0).unwrap();
        let js = [0, 1, 2];
        let mut rec = Step1Recorder::new(&bank, &js, &u0, &e0).unwrap();
        let mut cfg = SolverConfig::new(0.5);
        cfg.dt = 0.5 / 16.0;
        let tr = evolve(s, &cfg, true, &mut |smp| rec.observe(smp)).unwrap();
        assert!(tr.completed(), "{:?}", tr.failure);
        let (_, check) = rec.finish();
        assert!(check.passed(), "{check:?}");
        assert!(check.worst() > 0.0);
    }
}
