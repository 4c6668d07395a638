//! The acceptance checks. Each returns a [`CheckResult`] carrying the measured
//! quantity next to its requirement.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construction::{
    construct_initial_data, lemma32_lower_bound, BumpProfile, ConstructionParams, Terms,
};
use crate::error::Result;
use crate::experiments::inflation::{
    inflation_monotone, run_single, sweep_row, RunOutcome, RunSpec, DEFAULT_MAX_BAND,
};
use crate::experiments::report::{norms_csv, spread, stable_within};
use crate::experiments::step2::step2_g_identity_check;
use crate::lp::calibration::{bernstein_ratio, commutator_constant, random_field};
use crate::lp::{Field, GridSpec, LPFilterBank};
use crate::solver::{rhs, step_rk4, State};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: String,
    pub measured: f64,
    pub required: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: u8, name: &str, measured: f64, required: &str, passed: bool, detail: String) -> Self {
        CheckResult {
            id,
            name: name.into(),
            measured,
            required: required.into(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: measured {:.4e}, required {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.required
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", items.join(", "))
}

/// Number of frequencies in the partition scan.
pub const PARTITION_SAMPLES: usize = 1_000_000;

/// A bank reaching `j = 11`, used for the partition scan.
pub fn reference_bank() -> Result<LPFilterBank> {
    LPFilterBank::build(&GridSpec::new(4096, PI)?, 1.0)
}

/// 1: `|chi + sum_j phi_j - 1|` over the frequencies the bank covers.
pub fn check_partition(bank: &LPFilterBank) -> CheckResult {
    let dev = bank.partition_deviation(bank.coverage(), PARTITION_SAMPLES);
    CheckResult::new(
        1,
        "partition of unity",
        dev,
        "<= 1e-12",
        dev <= 1e-12,
        format!("{PARTITION_SAMPLES} frequencies in [0, {}]", bank.coverage()),
    )
}

/// 2: `Delta_n rho_0 = rho_0` and no other block sees `rho_0`.
pub fn check_block_purity(bump: &BumpProfile, ns: &[u32]) -> Result<CheckResult> {
    let mut worst_self = 0.0f64;
    let mut worst_leak = 0.0f64;
    for &n in ns {
        let params = ConstructionParams::new(n)?;
        let data = construct_initial_data(&params, bump, DEFAULT_MAX_BAND)?;
        let bank = LPFilterBank::build(&data.layout.grid, 1.0)?;
        let norm = data.rho0.linf();
        for j in bank.indices() {
            let block = bank.delta_j(&data.rho0, j)?;
            if j == n as i32 {
                worst_self = worst_self.max(block.sub(&data.rho0)?.linf() / norm);
            } else if !block.is_zero() {
                worst_leak = worst_leak.max(block.linf() / norm);
            }
        }
    }
    let measured = worst_self.max(worst_leak);
    Ok(CheckResult::new(
        2,
        "block purity of rho_0",
        measured,
        "<= 1e-8",
        measured <= 1e-8,
        format!("self {worst_self:.2e}, leakage {worst_leak:.2e}, n in {ns:?}"),
    ))
}

/// 3: `||rho_0||_inf / (n^{-1/2} ln n)` stable within 20%.
pub fn check_rho0_scaling(bump: &BumpProfile, ns: &[u32]) -> Result<CheckResult> {
    let mut ratios = Vec::new();
    for &n in ns {
        let params = ConstructionParams::new(n)?;
        let data = construct_initial_data(&params, bump, DEFAULT_MAX_BAND)?;
        let nf = n as f64;
        ratios.push(data.rho0.linf() / (nf.ln() / nf.sqrt()));
    }
    let s = spread(&ratios);
    Ok(CheckResult::new(
        3,
        "sup norm of rho_0 scales like n^{-1/2} ln n",
        s,
        "spread <= 0.2",
        stable_within(&ratios, 0.2),
        format!("ratios {} for n in {ns:?}", list(&ratios)),
    ))
}

/// 4: windowed blocks of `rho_0^2` above the anchor, `total / ln^2 n` stable
/// within 30%.
pub fn check_lemma32(bump: &BumpProfile, ns: &[u32]) -> Result<CheckResult> {
    let mut margin = f64::INFINITY;
    let mut totals = Vec::new();
    for &n in ns {
        let params = ConstructionParams::new(n)?;
        let data = construct_initial_data(&params, bump, DEFAULT_MAX_BAND)?;
        let bank = LPFilterBank::build(&data.layout.grid, 1.0)?;
        let rep = lemma32_lower_bound(&params, &data, &bank)?;
        for &(_, v) in &rep.per_j_normalized {
            margin = margin.min(v - (rep.anchor - 1e-6));
        }
        totals.push(rep.total_over_log2);
    }
    let s = spread(&totals);
    Ok(CheckResult::new(
        4,
        "dyadic lower bound of rho_0^2",
        s,
        "per block >= anchor - 1e-6, total/ln^2 n spread <= 0.3",
        margin >= 0.0 && totals.iter().all(|&t| t > 0.0) && stable_within(&totals, 0.3),
        format!("smallest block margin {margin:.3e}, total/ln^2 n {}", list(&totals)),
    ))
}

/// 5: momentum-form residual at every snapshot.
pub fn check_mform(outcomes: &[&RunOutcome]) -> CheckResult {
    let worst = outcomes
        .iter()
        .map(|o| o.max_mform_residual())
        .fold(0.0, f64::max);
    let snapshots: usize = outcomes.iter().map(|o| o.mform_residuals.len()).sum();
    let ok = snapshots > 0 && outcomes.iter().all(|o| o.completed());
    CheckResult::new(
        5,
        "momentum form agrees with the evolved form",
        worst,
        "<= 1e-8",
        ok && worst <= 1e-8,
        format!("{snapshots} snapshots"),
    )
}

/// 6: the closed form of `E_t + u E_x` on random smooth states.
pub fn check_g_identity(trials: usize, seed: u64) -> Result<CheckResult> {
    let grid = GridSpec::new(256, 2.0 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let s = State::new(0.0, random_field(&grid, &mut rng, 24), random_field(&grid, &mut rng, 24))?;
        worst = worst.max(step2_g_identity_check(&s)?);
    }
    Ok(CheckResult::new(
        6,
        "closed form of the transported forcing",
        worst,
        "<= 1e-8",
        worst <= 1e-8,
        format!("{trials} random states"),
    ))
}

fn integrate(s: &State, t: f64, steps: usize) -> Result<State> {
    let dt = t / steps as f64;
    let mut s = s.clone();
    for _ in 0..steps {
        s = step_rk4(&s, dt)?;
    }
    Ok(s)
}

fn sup_distance(a: &State, b: &State) -> Result<f64> {
    Ok(a.u.sub(&b.u)?.node_values().linf() + a.rho.sub(&b.rho)?.node_values().linf())
}

fn smooth_data(grid: GridSpec, amplitude: f64) -> Result<State> {
    State::new(
        0.0,
        Field::from_fn(grid, |x| amplitude * (x.cos() + (2.0 * x).sin() / 3.0)),
        Field::from_fn(grid, |x| 0.5 + 0.2 * x.sin()),
    )
}

/// `e(dt) / e(dt/2)` with `e(dt) = |y_dt - y_{dt/2}|` on smooth data.
pub fn richardson_factor() -> Result<f64> {
    let s = smooth_data(GridSpec::new(64, PI)?, 0.3)?;
    let y1 = integrate(&s, 1.0, 128)?;
    let y2 = integrate(&s, 1.0, 256)?;
    let y3 = integrate(&s, 1.0, 512)?;
    Ok(sup_distance(&y1, &y2)? / sup_distance(&y2, &y3)?)
}

/// Relative distance between the right-hand sides computed on `N` and `2N`
/// points for data whose products fit on `N` points.
pub fn grid_doubling_rhs_error() -> Result<f64> {
    let coarse = GridSpec::new(64, PI)?;
    let fine = GridSpec::new(128, PI)?;
    let u = |x: f64| 0.3 * (3.0 * x).cos() + 0.2 * (7.0 * x).sin() + 0.1 * (12.0 * x).cos();
    let r = |x: f64| 0.4 * (2.0 * x).sin() + 0.3 * (9.0 * x).cos();
    let (du_c, dr_c) = rhs(&State::new(0.0, Field::from_fn(coarse, u), Field::from_fn(coarse, r))?)?;
    let (du_f, dr_f) = rhs(&State::new(0.0, Field::from_fn(fine, u), Field::from_fn(fine, r))?)?;
    let (uc, rc) = (du_c.values()?, dr_c.values()?);
    let (uf, rf) = (du_f.values()?, dr_f.values()?);
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..uc.len() {
        diff = diff.max((uc[i] - uf[2 * i]).abs()).max((rc[i] - rf[2 * i]).abs());
        scale = scale.max(uc[i].abs()).max(rc[i].abs());
    }
    Ok(diff / scale)
}

/// Point-value errors of a short evolution on `16, 32, 64` points against
/// `128` points.
pub fn spatial_errors() -> Result<Vec<(usize, f64)>> {
    const PROBES: [f64; 4] = [-2.5, -0.7, 0.3, 1.9];
    let probe = |s: &State| -> Vec<f64> {
        PROBES
            .iter()
            .flat_map(|&x| [s.u.eval(x), s.rho.eval(x)])
            .collect()
    };
    let evolved = |n: usize| -> Result<State> {
        integrate(&smooth_data(GridSpec::new(n, PI)?, 0.1)?, 0.5, 200)
    };
    let reference = probe(&evolved(128)?);
    let mut out = Vec::new();
    for n in [16, 32, 64] {
        let p = probe(&evolved(n)?);
        let e = p
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        out.push((n, e));
    }
    Ok(out)
}

/// 7: fourth order in time, spectral in space.
pub fn check_solver_orders() -> Result<CheckResult> {
    let factor = richardson_factor()?;
    let rhs_err = grid_doubling_rhs_error()?;
    let spatial = spatial_errors()?;
    let decreasing = spatial.windows(2).all(|w| w[1].1 < w[0].1 || w[1].1 <= 1e-13);
    let finest = spatial.last().map_or(f64::INFINITY, |p| p.1);
    let ok = (factor - 16.0).abs() <= 0.15 * 16.0 && rhs_err <= 1e-12 && decreasing && finest <= 1e-12;
    Ok(CheckResult::new(
        7,
        "RK4 order and spectral accuracy",
        factor,
        "16 +- 15%, grid-doubling errors at round-off",
        ok,
        format!(
            "rhs N vs 2N {rhs_err:.2e}, point errors {}",
            spatial
                .iter()
                .map(|(n, e)| format!("N={n}: {e:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

/// 8: least-squares slope of the restricted norm against the driving term.
pub fn check_picard_slope(outcome: &RunOutcome) -> CheckResult {
    let slope = outcome.report.restricted_slope();
    let drive = outcome.report.initial.e0_drive;
    let rel = if drive > 0.0 { (slope / drive - 1.0).abs() } else { f64::INFINITY };
    CheckResult::new(
        8,
        "growth rate matches the driving term",
        rel,
        "<= 0.15",
        outcome.completed() && rel <= 0.15,
        format!("{}: slope {slope:.4e}, driving term {drive:.4e}", outcome.run_id),
    )
}

/// 9: both a-priori constants stable within 50%.
pub fn check_a_priori(outcomes: &[&RunOutcome]) -> CheckResult {
    let cs: Vec<f64> = outcomes.iter().map(|o| o.constants.c_state).collect();
    let cu: Vec<f64> = outcomes.iter().map(|o| o.constants.c_u).collect();
    let measured = spread(&cs).max(spread(&cu));
    CheckResult::new(
        9,
        "a-priori constants",
        measured,
        "spread <= 0.5",
        outcomes.iter().all(|o| o.completed()) && stable_within(&cs, 0.5) && stable_within(&cu, 0.5),
        format!("C_state {}, C_u {}", list(&cs), list(&cu)),
    )
}

/// 10: inflation increasing while the data shrinks; the control stays zero.
pub fn check_inflation(sweep: &[&RunOutcome], control: &RunOutcome) -> CheckResult {
    let rows: Vec<_> = sweep
        .iter()
        .map(|o| sweep_row(o.spec.params.n, &Ok((*o).clone())))
        .collect();
    let monotone = inflation_monotone(&rows);
    let control_max = control
        .report
        .records
        .iter()
        .map(|r| r.u_besov.max(r.u_linf))
        .fold(0.0, f64::max);
    let control_zero = control.completed()
        && control_max == 0.0
        && control.snapshots.iter().all(|s| s.u.is_zero() && s.rho.is_zero());
    let ratios: Vec<f64> = rows.iter().map(|r| r.inflation_ratio).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.data_norm).collect();
    CheckResult::new(
        10,
        "norm inflation across n",
        ratios.last().copied().unwrap_or(0.0),
        "strictly increasing ratio, strictly decreasing data, zero control",
        monotone && control_zero,
        format!(
            "ratios {}, data norms {}, control max {control_max:e}",
            list(&ratios),
            list(&norms)
        ),
    )
}

/// 11: the transport identity along the flow map.
pub fn check_transport(outcome: &RunOutcome) -> CheckResult {
    match &outcome.transport {
        Some(t) => CheckResult::new(
            11,
            "transport identity along characteristics",
            t.worst(),
            &format!("<= {:.3e}", t.tolerance),
            outcome.completed() && t.passed(),
            format!("{}: per block {}", outcome.run_id, list(&t.max_residual)),
        ),
        None => CheckResult::new(
            11,
            "transport identity along characteristics",
            f64::NAN,
            "diagnostics enabled",
            false,
            format!("{} ran without the flow map", outcome.run_id),
        ),
    }
}

/// 12: byte-identical reports from identical runs.
pub fn check_determinism(first: &str, second: &str) -> CheckResult {
    let differing = first
        .lines()
        .zip(second.lines())
        .filter(|(a, b)| a != b)
        .count()
        + first.lines().count().abs_diff(second.lines().count());
    CheckResult::new(
        12,
        "deterministic norms.csv",
        differing as f64,
        "0 differing lines",
        first == second && !first.is_empty(),
        format!("{} bytes", first.len()),
    )
}

/// Seeded calibrations reported next to the checks.
#[derive(Debug, Clone, Serialize)]
pub struct Calibrations {
    /// `(j, min, max)` of `||d g|| / (2^j ||g||)` over random blocks.
    pub bernstein: Vec<(i32, f64, f64)>,
    pub commutator_max: f64,
    pub commutator_mean: f64,
}

pub fn calibrations(seed: u64) -> Result<Calibrations> {
    let grid = GridSpec::new(1024, 8.0 * PI)?;
    let bank = LPFilterBank::build(&grid, 1.0)?;
    let mut bernstein = Vec::new();
    for j in 0..=6 {
        let (lo, hi) = bernstein_ratio(j, 8, &bank, seed + j as u64)?;
        bernstein.push((j, lo, hi));
    }
    let c = commutator_constant(&GridSpec::new(256, 4.0 * PI)?, 8, seed)?;
    Ok(Calibrations {
        bernstein,
        commutator_max: c.max_constant,
        commutator_mean: c.mean_constant,
    })
}

/// The runs the acceptance checks read.
pub struct AcceptanceRuns {
    /// Default `n = 8` run with the flow map.
    pub n8: RunOutcome,
    /// The same configuration again.
    pub n8_repeat: RunOutcome,
    pub n12: RunOutcome,
    pub n16: RunOutcome,
    /// `rho_0 = 0` at `n = 8`.
    pub control: RunOutcome,
}

impl AcceptanceRuns {
    pub fn execute(bump: &BumpProfile) -> Result<Self> {
        let mut n8 = RunSpec::new(ConstructionParams::new(8)?);
        n8.diagnostics = true;
        let mut control = RunSpec::new(ConstructionParams::new(8)?);
        control.params.terms = Terms::None;
        Ok(AcceptanceRuns {
            n8: run_single(&n8, bump)?,
            n8_repeat: run_single(&n8, bump)?,
            n12: run_single(&RunSpec::new(ConstructionParams::new(12)?), bump)?,
            n16: run_single(&RunSpec::new(ConstructionParams::new(16)?), bump)?,
            control: run_single(&control, bump)?,
        })
    }

    pub fn sweep(&self) -> [&RunOutcome; 3] {
        [&self.n8, &self.n12, &self.n16]
    }
}

/// The checks that need no evolution.
pub fn static_checks(bump: &BumpProfile) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_partition(&reference_bank()?),
        check_block_purity(bump, &[8, 12, 16])?,
        check_rho0_scaling(bump, &[8, 12, 16, 20])?,
        check_lemma32(bump, &[8, 12, 16])?,
        check_g_identity(100, 7)?,
        check_solver_orders()?,
    ])
}

pub fn run_checks(runs: &AcceptanceRuns) -> Vec<CheckResult> {
    let sweep = runs.sweep();
    vec![
        check_mform(&sweep),
        check_picard_slope(&runs.n12),
        check_a_priori(&sweep),
        check_inflation(&sweep, &runs.control),
        check_transport(&runs.n8),
        check_determinism(
            &norms_csv(&[&runs.n8.report]),
            &norms_csv(&[&runs.n8_repeat.report]),
        ),
    ]
}

/// All twelve checks, in order.
pub fn verify_all(bump: &BumpProfile) -> Result<Vec<CheckResult>> {
    let mut out = static_checks(bump)?;
    out.extend(run_checks(&AcceptanceRuns::execute(bump)?));
    out.sort_by_key(|c| c.id);
    Ok(out)
}
