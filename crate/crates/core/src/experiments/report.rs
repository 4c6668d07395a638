use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::lp::{BesovParams, Field, LPFilterBank};

/// Norms of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub t: f64,
    /// `||u||_{B^1_{inf,1}}`.
    pub u_besov: f64,
    /// `||u||_{B^1_{inf,1}(N(n))}`.
    pub u_besov_n: f64,
    /// `||rho||_{B^0_{inf,1}}`.
    pub rho_besov: f64,
    pub u_linf: f64,
    pub ux_linf: f64,
    pub rho_linf: f64,
}

impl NormRecord {
    pub fn u_w1inf(&self) -> f64 {
        self.u_linf + self.ux_linf
    }
}

/// Besov and sup norms of `(u, rho)`; `index_set` selects the restricted sum.
pub fn measure(
    t: f64,
    u: &Field,
    rho: &Field,
    bank: &LPFilterBank,
    index_set: &[i32],
) -> Result<NormRecord> {
    let ub = block_sups(u, bank)?;
    let rb = block_sups(rho, bank)?;
    let b1 = BesovParams::sup_l1(1.0);
    let b0 = BesovParams::sup_l1(0.0);
    let restricted: Vec<(i32, f64)> = ub
        .iter()
        .copied()
        .filter(|(j, _)| index_set.contains(j))
        .collect();
    Ok(NormRecord {
        t,
        u_besov: b1.combine(&ub),
        u_besov_n: b1.combine(&restricted),
        rho_besov: b0.combine(&rb),
        u_linf: u.linf(),
        ux_linf: u.derivative().linf(),
        rho_linf: rho.linf(),
    })
}

/// `(j, ||Delta_j f||_inf)` for every block that can be nonzero.
pub fn block_sups(f: &Field, bank: &LPFilterBank) -> Result<Vec<(i32, f64)>> {
    let mut out = Vec::new();
    for j in bank.indices() {
        let d = bank.delta_j(f, j)?;
        out.push((j, if d.is_zero() { 0.0 } else { d.linf() }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialNorms {
    pub rho0_linf: f64,
    /// `||rho_0||_{B^0_{inf,1}}`.
    pub rho0_besov: f64,
    /// `||rho_0^2||_{B^0_{inf,1}(N(n))}`.
    pub rho0_sq_besov_n: f64,
    /// `sum_{j in N(n)} 2^j ||Delta_j E_0||_inf`.
    pub e0_drive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub run_id: String,
    pub n: u32,
    pub initial: InitialNorms,
    pub records: Vec<NormRecord>,
}

impl NormReport {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `||u(t)||_{B^1_{inf,1}} / (||u_0||_{B^1_{inf,1}} + ||rho_0||_{B^0_{inf,1}})`.
    pub fn inflation_ratio(&self, record: &NormRecord) -> f64 {
        let u0 = self.records.first().map_or(0.0, |r| r.u_besov);
        let denom = u0 + self.initial.rho0_besov;
        if denom == 0.0 {
            0.0
        } else {
            record.u_besov / denom
        }
    }

    pub fn final_inflation_ratio(&self) -> f64 {
        self.records
            .last()
            .map_or(0.0, |r| self.inflation_ratio(r))
    }

    /// Least-squares slope of `||u(t)||_{B^1_{inf,1}(N(n))}` against `t`.
    pub fn restricted_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.records.iter().map(|r| (r.t, r.u_besov_n)).collect();
        least_squares_slope(&pts)
    }

    /// Largest ratio between adjacent positive inflation ratios.
    pub fn max_adjacent_jump(&self) -> f64 {
        let r: Vec<f64> = self.records.iter().map(|x| self.inflation_ratio(x)).collect();
        r.windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
            .fold(1.0, f64::max)
    }

    /// Long-format rows `(run_id, t, metric, value)`.
    pub fn rows(&self) -> Vec<(String, f64, &'static str, f64)> {
        let id = &self.run_id;
        let i = &self.initial;
        let mut rows = vec![
            (id.clone(), 0.0, "rho0_linf", i.rho0_linf),
            (id.clone(), 0.0, "rho0_besov", i.rho0_besov),
            (id.clone(), 0.0, "rho0_sq_besov_n", i.rho0_sq_besov_n),
            (id.clone(), 0.0, "e0_drive", i.e0_drive),
        ];
        for r in &self.records {
            for (name, v) in [
                ("u_besov", r.u_besov),
                ("u_besov_n", r.u_besov_n),
                ("rho_besov", r.rho_besov),
                ("u_w1inf", r.u_w1inf()),
                ("u_linf", r.u_linf),
                ("rho_linf", r.rho_linf),
                ("inflation_ratio", self.inflation_ratio(r)),
            ] {
                rows.push((id.clone(), r.t, name, v));
            }
        }
        rows
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Shortest round-trip representation, so equal values print identically.
pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

pub fn norms_csv(reports: &[&NormReport]) -> String {
    let mut out = String::from("run_id,t,metric,value\n");
    for rep in reports {
        for (id, t, metric, v) in rep.rows() {
            let _ = writeln!(out, "{id},{},{metric},{}", format_value(t), format_value(v));
        }
    }
    out
}

pub fn write_norms_csv(path: &Path, reports: &[&NormReport]) -> Result<()> {
    std::fs::write(path, norms_csv(reports))?;
    Ok(())
}

/// Every value within `+-tol` (relative) of the mean.
pub fn stable_within(values: &[f64], tol: f64) -> bool {
    if values.is_empty() {
        return false;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    mean > 0.0 && values.iter().all(|v| ((v - mean) / mean).abs() <= tol)
}

/// Largest relative deviation from the mean.
pub fn spread(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    values
        .iter()
        .map(|v| ((v - mean) / mean).abs())
        .fold(0.0, f64::max)
}
