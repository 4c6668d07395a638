use serde::{Deserialize, Serialize};
use std::sync::Mutex;
use std::time::Instant;

use crate::construction::{
    construct_initial_data, lemma32_lower_bound, BumpProfile, ConstructionParams, Geometry,
    Lemma32Report, SupportDiagnostics, Terms,
};
use crate::error::Result;
use crate::experiments::report::{measure, InitialNorms, NormRecord, NormReport};
use crate::experiments::step1::{
    compute_e0_lower_bound, e0_field, E0Bound, Hierarchy, Step1Recorder, StepDiagnostics,
    TransportCheck,
};
use crate::lp::{BesovParams, LPFilterBank};
use crate::solver::{evolve, m_form_residual, SolverConfig, State};

/// Modulated bands kept by default; `u` lives on bands 0 and 2, `rho` on 1 and 3.
pub const DEFAULT_MAX_BAND: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub params: ConstructionParams,
    pub solver: SolverConfig,
    /// Track the flow map and record the Step 1 series.
    #[serde(default)]
    pub diagnostics: bool,
    #[serde(default = "default_max_band")]
    pub max_band: usize,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
}

fn default_max_band() -> usize {
    DEFAULT_MAX_BAND
}

fn default_sharpness() -> f64 {
    1.0
}

impl RunSpec {
    /// Defaults for `n`: `t_final = 1/ln n`, 32 steps, snapshots at `0`,
    /// `t_final/2` and `t_final`.
    pub fn new(params: ConstructionParams) -> Self {
        let t0 = params.t0();
        let mut solver = SolverConfig::new(t0);
        solver.snapshot_times = vec![0.0, 0.5 * t0, t0];
        RunSpec {
            params,
            solver,
            diagnostics: false,
            max_band: DEFAULT_MAX_BAND,
            sharpness: 1.0,
        }
    }

    pub fn run_id(&self) -> String {
        let p = &self.params;
        let mut id = format!("n{}", p.n);
        if p.geometry == Geometry::Paper {
            id.push_str("-paper");
        }
        match p.terms {
            Terms::All => {}
            Terms::Single(l) => id.push_str(&format!("-single{l}")),
            Terms::None => id.push_str("-control"),
        }
        if !self.solver.coupling {
            id.push_str("-decoupled");
        }
        id
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct APrioriConstants {
    /// `max_t (||u||_{W^{1,inf}} + ||rho||_inf) / ||rho_0||_inf`.
    pub c_state: f64,
    /// `max_t ||u||_inf / (n^{-1} ln^2 n)`.
    pub c_u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub run_id: String,
    pub spec: RunSpec,
    pub dt: f64,
    pub steps_taken: usize,
    pub report: NormReport,
    pub support: SupportDiagnostics,
    pub lemma: Lemma32Report,
    pub e0: E0Bound,
    /// `e0.value / lemma.total`.
    pub e0_ratio: f64,
    pub mform_residuals: Vec<(f64, f64)>,
    pub constants: APrioriConstants,
    pub step1: Option<StepDiagnostics>,
    pub hierarchy: Option<Hierarchy>,
    pub transport: Option<TransportCheck>,
    /// `max_t sum_j 2^j ||R_j|| / (||u_x||_inf ||u||_{B^1_{inf,1}})`.
    pub commutator_constant: Option<f64>,
    pub failure: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub snapshots: Vec<State>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    pub fn max_mform_residual(&self) -> f64 {
        self.mform_residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }
}

/// Build the data, integrate to `t_final` and collect every diagnostic.
/// Configuration problems are errors; failures during the run are recorded
/// in [`RunOutcome::failure`].
pub fn run_single(spec: &RunSpec, bump: &BumpProfile) -> Result<RunOutcome> {
    let clock = Instant::now();
    spec.solver.validate()?;
    let params = &spec.params;
    let data = construct_initial_data(params, bump, spec.max_band)?;
    let grid = data.layout.grid;
    let bank = LPFilterBank::build(&grid, spec.sharpness)?;
    let js = params.index_set();

    let lemma = lemma32_lower_bound(params, &data, &bank)?;
    let e0 = compute_e0_lower_bound(&data.rho0, &bank, &js)?;
    let rho0_besov = bank.besov_norm(&data.rho0, &BesovParams::sup_l1(0.0), None)?;
    let initial = InitialNorms {
        rho0_linf: data.rho0.linf(),
        rho0_besov,
        rho0_sq_besov_n: lemma.total,
        e0_drive: e0.value,
    };

    let mut recorder = if spec.diagnostics {
        Some(Step1Recorder::new(&bank, &js, &data.u0, &e0_field(&data.rho0)?)?)
    } else {
        None
    };
    let snap_steps = spec.solver.snapshot_steps();
    let mut records: Vec<NormRecord> = Vec::new();
    let mut mform = Vec::new();
    let state0 = State::new(0.0, data.u0.clone(), data.rho0.clone())?;
    let traj = evolve(state0, &spec.solver, spec.diagnostics, &mut |s| {
        records.push(measure(s.state.t, &s.state.u, &s.state.rho, &bank, &js)?);
        if snap_steps.contains(&s.step) {
            mform.push((s.state.t, m_form_residual(s.state, &s.terms.du, &s.terms.drho)?));
        }
        if let Some(r) = recorder.as_mut() {
            r.observe(s)?;
        }
        Ok(())
    })?;

    let n = params.n as f64;
    let u_scale = n.ln().powi(2) / n;
    let constants = APrioriConstants {
        c_state: ratio_max(&records, |r| r.u_w1inf() + r.rho_linf, initial.rho0_linf),
        c_u: ratio_max(&records, |r| r.u_linf, u_scale),
    };
    let (step1, transport) = match recorder {
        Some(r) => {
            let (d, t) = r.finish();
            (Some(d), Some(t))
        }
        None => (None, None),
    };
    let commutator_constant = step1.as_ref().map(|d| {
        d.commutator_totals()
            .iter()
            .zip(&records)
            .map(|(c, r)| {
                let den = r.ux_linf * r.u_besov;
                if den > 0.0 {
                    c / den
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    });
    let report = NormReport {
        run_id: spec.run_id(),
        n: params.n,
        initial,
        records,
    };
    Ok(RunOutcome {
        run_id: spec.run_id(),
        spec: spec.clone(),
        dt: traj.dt,
        steps_taken: traj.steps_taken,
        e0_ratio: if lemma.total > 0.0 {
            e0.value / lemma.total
        } else {
            0.0
        },
        report,
        support: data.support,
        lemma,
        e0,
        mform_residuals: mform,
        constants,
        hierarchy: step1.as_ref().map(|d| d.hierarchy()),
        step1,
        transport,
        commutator_constant,
        failure: traj.failure.map(|e| e.to_string()),
        wall_time_s: clock.elapsed().as_secs_f64(),
        snapshots: traj.snapshots,
    })
}

fn ratio_max(records: &[NormRecord], f: impl Fn(&NormRecord) -> f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    records.iter().map(|r| f(r) / scale).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ns: Vec<u32>,
    #[serde(default = "default_geometry")]
    pub geometry: Geometry,
    #[serde(default)]
    pub separation: Option<f64>,
    /// Steps over `[0, 1/ln n]`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub diagnostics: bool,
}

fn default_geometry() -> Geometry {
    Geometry::Reduced
}

fn default_steps() -> usize {
    crate::solver::state::DEFAULT_STEPS
}

impl SweepConfig {
    pub fn new(ns: Vec<u32>) -> Self {
        SweepConfig {
            ns,
            geometry: Geometry::Reduced,
            separation: None,
            steps: default_steps(),
            diagnostics: false,
        }
    }

    pub fn spec(&self, n: u32) -> Result<RunSpec> {
        let mut p = ConstructionParams::new(n)?;
        p.geometry = self.geometry;
        if let Some(s) = self.separation {
            p.separation = s;
        }
        p.validate()?;
        let mut spec = RunSpec::new(p);
        spec.solver.dt = spec.solver.t_final / self.steps.max(1) as f64;
        spec.diagnostics = self.diagnostics;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub run_id: String,
    pub inflation_ratio: f64,
    /// `sum_{j in N(n)} 2^j ||Delta_j E_0||_inf`.
    pub driving: f64,
    /// `||rho_0||_{B^0_{inf,1}}`.
    pub data_norm: f64,
    /// `||u(t_0)||_{B^1_{inf,1}(N(n))} / t_0`.
    pub normalized_growth: f64,
    pub failure: Option<String>,
}

/// Worker count: `DPLAB_THREADS` if set, else the available parallelism.
pub fn worker_count(jobs: usize) -> usize {
    let cap = std::env::var("DPLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        });
    cap.min(jobs).max(1)
}

/// Run independent specs concurrently; results come back in input order.
pub fn run_many(specs: &[RunSpec], bump: &BumpProfile) -> Vec<Result<RunOutcome>> {
    let workers = worker_count(specs.len());
    let next = Mutex::new(0usize);
    let slots: Vec<Mutex<Option<Result<RunOutcome>>>> =
        specs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut g = next.lock().unwrap();
                    let i = *g;
                    *g += 1;
                    i
                };
                if i >= specs.len() {
                    break;
                }
                let r = run_single(&specs[i], bump);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every job ran"))
        .collect()
}

pub fn sweep_row(n: u32, outcome: &Result<RunOutcome>) -> SweepRow {
    match outcome {
        Ok(o) => {
            let last = o.report.records.last();
            let t = last.map_or(0.0, |r| r.t);
            SweepRow {
                n,
                run_id: o.run_id.clone(),
                inflation_ratio: o.report.final_inflation_ratio(),
                driving: o.report.initial.e0_drive,
                data_norm: o.report.initial.rho0_besov,
                normalized_growth: match last {
                    Some(r) if t > 0.0 => r.u_besov_n / t,
                    _ => 0.0,
                },
                failure: o.failure.clone(),
            }
        }
        Err(e) => SweepRow {
            n,
            run_id: format!("n{n}"),
            inflation_ratio: f64::NAN,
            driving: f64::NAN,
            data_norm: f64::NAN,
            normalized_growth: f64::NAN,
            failure: Some(e.to_string()),
        },
    }
}

/// The sweep over `n`: one row per value, failed rows marked.
pub fn inflation_experiment(
    cfg: &SweepConfig,
    bump: &BumpProfile,
) -> Result<(Vec<SweepRow>, Vec<Result<RunOutcome>>)> {
    let specs: Vec<RunSpec> = cfg.ns.iter().map(|&n| cfg.spec(n)).collect::<Result<_>>()?;
    let outcomes = run_many(&specs, bump);
    let rows = cfg
        .ns
        .iter()
        .zip(&outcomes)
        .map(|(&n, o)| sweep_row(n, o))
        .collect();
    Ok((rows, outcomes))
}

/// Strictly increasing inflation with strictly decreasing data norm.
pub fn inflation_monotone(rows: &[SweepRow]) -> bool {
    rows.len() >= 2
        && rows.iter().all(|r| r.failure.is_none())
        && rows
            .windows(2)
            .all(|w| w[1].inflation_ratio > w[0].inflation_ratio && w[1].data_norm < w[0].data_norm)
}
