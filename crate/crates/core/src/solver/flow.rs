use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft;
use crate::lp::{Field, GridSpec, NodeValues};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `max|d| * K` for which the Taylor shift is used.
const TAYLOR_REACH: f64 = 1.0;
const TAYLOR_TOL: f64 = 1e-17;
const TAYLOR_MAX_ORDER: usize = 24;

/// Particle positions `psi(t, x_i) = x_i + d_i`, stored as displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    grid: GridSpec,
    t: f64,
    disp: Vec<f64>,
}

impl FlowMap {
    pub fn identity(grid: GridSpec) -> Self {
        FlowMap {
            grid,
            t: 0.0,
            disp: vec![0.0; grid.num_points()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn displacement(&self) -> &[f64] {
        &self.disp
    }

    pub fn psi(&self, i: usize) -> f64 {
        self.grid.x(i) + self.disp[i]
    }

    pub fn max_displacement(&self) -> f64 {
        self.disp.iter().fold(0.0, |a, d| a.max(d.abs()))
    }

    /// Strict monotonicity of the particles, including the periodic wrap.
    pub fn check_monotone(&self) -> Result<()> {
        check_monotone(&self.grid, &self.disp, self.t)
    }

    /// Physical values `u(psi_i)`.
    pub fn velocity(&self, u: &Field) -> Result<Vec<f64>> {
        velocity_at(u, &self.disp)
    }

    /// `f o psi` sampled at the nodes, band by band: band `m` holds
    /// `A_m(psi_i) e^{i m k (psi_i - x_i)}`.
    pub fn compose_nodes(&self, f: &Field) -> Result<NodeValues> {
        self.grid.ensure_same(f.grid())?;
        let k = self.grid.carrier();
        let mut out = NodeValues::zeros(self.grid);
        for m in f.active_bands() {
            let mut vals = shifted_envelope(&self.grid, f.band(m).expect("active"), &self.disp);
            if m == 0 {
                vals.iter_mut().for_each(|v| v.im = 0.0);
            } else {
                for (v, d) in vals.iter_mut().zip(&self.disp) {
                    *v *= Complex64::from_polar(1.0, m as f64 * k * d);
                }
            }
            out.set_band(m, Some(vals));
        }
        Ok(out)
    }

    /// [`FlowMap::compose_nodes`] projected back onto the grid's bands.
    pub fn compose(&self, f: &Field) -> Result<Field> {
        self.compose_nodes(f)?.to_field()
    }

    /// One RK4 step of `d psi/dt = u(t, psi)`; `stages` are the velocity
    /// fields at `t`, `t + dt/2`, `t + dt/2` and `t + dt`.
    pub fn advance(&mut self, stages: [&Field; 4], dt: f64) -> Result<()> {
        for s in stages {
            self.grid.ensure_same(s.grid())?;
        }
        let d0 = &self.disp;
        let k1 = velocity_at(stages[0], d0)?;
        let d1: Vec<f64> = d0.iter().zip(&k1).map(|(d, k)| d + 0.5 * dt * k).collect();
        let k2 = velocity_at(stages[1], &d1)?;
        let d2: Vec<f64> = d0.iter().zip(&k2).map(|(d, k)| d + 0.5 * dt * k).collect();
        let k3 = velocity_at(stages[2], &d2)?;
        let d3: Vec<f64> = d0.iter().zip(&k3).map(|(d, k)| d + dt * k).collect();
        let k4 = velocity_at(stages[3], &d3)?;
        let next: Vec<f64> = (0..d0.len())
            .map(|i| d0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let t = self.t + dt;
        if next.iter().any(|d| !d.is_finite()) {
            return Err(Error::BlowUp {
                t,
                what: "non-finite particle position".into(),
            });
        }
        check_monotone(&self.grid, &next, t)?;
        self.disp = next;
        self.t = t;
        Ok(())
    }

    /// RK4 step with a velocity frozen over the step.
    pub fn advance_frozen(&mut self, u: &Field, dt: f64) -> Result<()> {
        self.advance([u, u, u, u], dt)
    }
}

pub fn advance_flow_map(fm: &FlowMap, u: &Field, dt: f64) -> Result<FlowMap> {
    let mut next = fm.clone();
    next.advance_frozen(u, dt)?;
    Ok(next)
}

fn check_monotone(grid: &GridSpec, disp: &[f64], t: f64) -> Result<()> {
    let h = grid.spacing();
    let n = disp.len();
    for i in 0..n {
        let gap = if i + 1 < n {
            h + disp[i + 1] - disp[i]
        } else {
            h + disp[0] - disp[n - 1]
        };
        if !(gap > 0.0) {
            return Err(Error::Diffeomorphism { t, node: i });
        }
    }
    Ok(())
}

fn velocity_at(u: &Field, disp: &[f64]) -> Result<Vec<f64>> {
    let grid = *u.grid();
    if disp.len() != grid.num_points() {
        return Err(Error::arg("displacement length does not match the grid"));
    }
    let k = grid.carrier();
    let mut out = vec![0.0; disp.len()];
    for m in u.active_bands() {
        let vals = shifted_envelope(&grid, u.band(m).expect("active"), disp);
        if m == 0 {
            out.iter_mut().zip(&vals).for_each(|(o, v)| *o += v.re);
        } else {
            let mk = m as f64 * k;
            for (i, (o, v)) in out.iter_mut().zip(&vals).enumerate() {
                let ph = Complex64::from_polar(1.0, mk * (grid.x(i) + disp[i]));
                *o += 2.0 * (v * ph).re;
            }
        }
    }
    Ok(out)
}

/// `A(x_i + d_i)` for the envelope with coefficients `coeffs`.
fn shifted_envelope(grid: &GridSpec, coeffs: &[Complex64], disp: &[f64]) -> Vec<Complex64> {
    let dmax = disp.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let reach = dmax * grid.envelope_nyquist();
    match taylor_order(reach) {
        Some(q) => taylor_shift(grid, coeffs, disp, q),
        None => barycentric_shift(grid, coeffs, disp),
    }
}

fn taylor_order(reach: f64) -> Option<usize> {
    if reach == 0.0 {
        return Some(0);
    }
    if reach > TAYLOR_REACH {
        return None;
    }
    let mut term = 1.0;
    for q in 1..=TAYLOR_MAX_ORDER {
        term *= reach / q as f64;
        if term < TAYLOR_TOL {
            return Some(q - 1);
        }
    }
    None
}

fn taylor_shift(grid: &GridSpec, coeffs: &[Complex64], disp: &[f64], order: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut vals = coeffs.to_vec();
    fft::inverse(&mut vals);
    let mut factor = vec![1.0; n];
    for q in 1..=order {
        let mut deriv: Vec<Complex64> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == n / 2 {
                    ZERO
                } else {
                    c * Complex64::new(0.0, grid.wavenumber(i)).powu(q as u32)
                }
            })
            .collect();
        fft::inverse(&mut deriv);
        for ((v, dv), (f, d)) in vals.iter_mut().zip(&deriv).zip(factor.iter_mut().zip(disp)) {
            *f *= d / q as f64;
            *v += dv * *f;
        }
    }
    vals
}

/// Trigonometric interpolation of the node samples in barycentric form,
/// `O(N)` per point.
fn barycentric_shift(grid: &GridSpec, coeffs: &[Complex64], disp: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut samples = coeffs.to_vec();
    fft::inverse(&mut samples);
    let half = PI / (2.0 * grid.half_length());
    (0..n)
        .map(|i| {
            let x = grid.x(i) + disp[i];
            let mut num = ZERO;
            let mut den = 0.0;
            for (j, s) in samples.iter().enumerate() {
                let a = half * (x - grid.x(j));
                let sn = a.sin();
                if sn.abs() < 1e-15 {
                    return *s;
                }
                let w = if j % 2 == 0 { a.cos() / sn } else { -a.cos() / sn };
                num += s * w;
                den += w;
            }
            num / den
        })
        .collect()
}
