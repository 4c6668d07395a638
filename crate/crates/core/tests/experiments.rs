use std::f64::consts::PI;
use std::sync::OnceLock;

use dplab::construction::bump::CARRIER_RATIO;
use dplab::construction::{construct_initial_data, BumpProfile, ConstructionParams, Terms};
use dplab::experiments::inflation::{run_single, sweep_row, RunOutcome, RunSpec, DEFAULT_MAX_BAND};
use dplab::experiments::{compute_e0_lower_bound, norms_csv, step2_g_identity_check};
use dplab::lp::{Field, GridSpec, LPFilterBank};
use dplab::solver::State;
use proptest::prelude::*;

fn bump() -> &'static BumpProfile {
    static BUMP: OnceLock<BumpProfile> = OnceLock::new();
    BUMP.get_or_init(BumpProfile::new)
}

/// An n = 8 run over the full `[0, 1/ln n]` in `steps` steps.
fn short_spec(steps: usize, diagnostics: bool) -> RunSpec {
    let mut spec = RunSpec::new(ConstructionParams::new(8).unwrap());
    spec.solver.dt = spec.solver.t_final / steps as f64;
    spec.diagnostics = diagnostics;
    spec
}

fn diagnosed_run() -> &'static RunOutcome {
    static RUN: OnceLock<RunOutcome> = OnceLock::new();
    RUN.get_or_init(|| run_single(&short_spec(16, true), bump()).unwrap())
}

#[test]
fn zero_density_has_zero_e0_bound() {
    let g = GridSpec::new(64, PI).unwrap();
    let bank = LPFilterBank::build(&g, 1.0).unwrap();
    let b = compute_e0_lower_bound(&Field::zeros(g), &bank, &[0, 1, 2]).unwrap();
    assert_eq!(b.value, 0.0);
}

// A single bump at scale l puts its squared-density block near
// xi = (17/12) 2^l, where -(1/2) d (1 - d^2)^{-1} has modulus
// (1/2) xi / (1 + xi^2), i.e. 2^l times (1/2)(12/17) xi^2 / (1 + xi^2).
#[test]
fn single_bump_e0_follows_the_multiplier() {
    let base = ConstructionParams::new(8).unwrap();
    for l in base.index_set() {
        let mut p = base.clone();
        p.terms = Terms::Single(l);
        let d = construct_initial_data(&p, bump(), DEFAULT_MAX_BAND).unwrap();
        let bank = LPFilterBank::build(&d.layout.grid, 1.0).unwrap();
        let sq_block = bank.delta_j(&d.rho0.product(&d.rho0).unwrap(), l).unwrap().linf();
        let xi = CARRIER_RATIO * 2f64.powi(l);
        let want = 0.5 / CARRIER_RATIO * xi * xi / (1.0 + xi * xi) * sq_block;
        let got = compute_e0_lower_bound(&d.rho0, &bank, &[l]).unwrap().value;
        assert!((got / want - 1.0).abs() <= 0.1, "l {l}: {got} vs {want}");
    }
}

#[test]
fn report_entries_are_finite_and_start_at_zero() {
    let o = diagnosed_run();
    assert!(o.completed());
    let first = &o.report.records[0];
    assert_eq!(first.t, 0.0);
    assert_eq!(o.report.inflation_ratio(first), 0.0);
    for (_, t, metric, v) in o.report.rows() {
        assert!(v.is_finite() && v >= 0.0, "{metric} at {t}: {v}");
    }
    assert!(o.report.max_adjacent_jump() < 10.0);
    assert!(o.max_mform_residual() <= 1e-8);
}

#[test]
fn step1_diagnostics_on_a_short_run() {
    let o = diagnosed_run();
    let h = o.hierarchy.as_ref().unwrap();
    assert!(h.factor > 1.0, "{h:?}");
    assert!(o.transport.as_ref().unwrap().passed());
    let c = o.commutator_constant.unwrap();
    assert!(c.is_finite() && c > 0.0);

    let drive = o.e0.value;
    let t_max = 0.1 / 8f64.ln();
    let q = o.step1.as_ref().unwrap().picard_quotients(t_max);
    assert!(!q.is_empty());
    for (t, v) in q {
        assert!((v / drive - 1.0).abs() <= 0.1, "t {t}: {v} vs {drive}");
    }
}

#[test]
fn decoupled_run_has_no_velocity() {
    let mut spec = short_spec(2, false);
    spec.solver.coupling = false;
    let o = run_single(&spec, bump()).unwrap();
    assert_eq!(o.run_id, "n8-decoupled");
    for r in &o.report.records {
        assert_eq!(r.u_besov, 0.0);
        assert_eq!(r.u_linf, 0.0);
    }
    assert!(o.report.initial.rho0_besov > 0.0);
}

#[test]
fn zero_data_row_has_zero_inflation() {
    let mut spec = short_spec(2, false);
    spec.params.terms = Terms::None;
    let o = run_single(&spec, bump()).unwrap();
    let row = sweep_row(8, &Ok(o));
    assert_eq!(row.inflation_ratio, 0.0);
    assert_eq!(row.data_norm, 0.0);
    assert!(row.failure.is_none());
}

#[test]
fn repeated_runs_give_identical_csv() {
    let spec = short_spec(2, false);
    let a = run_single(&spec, bump()).unwrap();
    let b = run_single(&spec, bump()).unwrap();
    assert_eq!(norms_csv(&[&a.report]), norms_csv(&[&b.report]));
}

#[test]
fn g_identity_vanishes_at_rest() {
    let p = ConstructionParams::new(8).unwrap();
    let d = construct_initial_data(&p, bump(), DEFAULT_MAX_BAND).unwrap();
    let s = State::new(0.0, d.u0.clone(), d.rho0.clone()).unwrap();
    assert!(step2_g_identity_check(&s).unwrap() <= 1e-8);
    let g = GridSpec::new(32, PI).unwrap();
    let zero = State::new(0.0, Field::zeros(g), Field::zeros(g)).unwrap();
    assert_eq!(step2_g_identity_check(&zero).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn g_identity_on_smooth_states(
        cu in prop::collection::vec(-1.0f64..1.0, 6),
        cr in prop::collection::vec(-1.0f64..1.0, 6),
        shift in 0.0f64..PI,
    ) {
        let g = GridSpec::new(128, PI).unwrap();
        let field = |c: Vec<f64>| {
            Field::from_fn(g, move |x| {
                c.iter()
                    .enumerate()
                    .map(|(k, a)| a * ((k + 1) as f64 * x + shift).cos() / (1 + k * k) as f64)
                    .sum()
            })
        };
        let s = State::new(0.0, field(cu), field(cr)).unwrap();
        prop_assert!(step2_g_identity_check(&s).unwrap() <= 1e-8);
    }
}
