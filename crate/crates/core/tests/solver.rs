use std::f64::consts::PI;
use std::sync::OnceLock;

use dplab::construction::{construct_initial_data, BumpProfile, ConstructionParams, InitialData};
use dplab::experiments::inflation::DEFAULT_MAX_BAND;
use dplab::experiments::step1::e0_field;
use dplab::lp::{Field, GridSpec};
use dplab::solver::{
    evolve, m_form_residual, rhs, rhs_terms, step_rk4, FlowMap, SolverConfig, State,
};
use proptest::prelude::*;

fn data_n8() -> &'static (ConstructionParams, InitialData) {
    static DATA: OnceLock<(ConstructionParams, InitialData)> = OnceLock::new();
    DATA.get_or_init(|| {
        let p = ConstructionParams::new(8).unwrap();
        let d = construct_initial_data(&p, &BumpProfile::new(), DEFAULT_MAX_BAND).unwrap();
        (p, d)
    })
}

fn trig(grid: GridSpec, coeffs: Vec<(f64, f64)>, amplitude: f64) -> Field {
    Field::from_fn(grid, move |x| {
        amplitude
            * coeffs
                .iter()
                .enumerate()
                .map(|(k, (c, s))| {
                    let k = k as f64;
                    (c * (k * x).cos() + s * (k * x).sin()) / (1.0 + k * k)
                })
                .sum::<f64>()
    })
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

#[test]
fn density_alone_drives_velocity_through_e0() {
    let (_, d) = data_n8();
    let s = State::new(0.0, d.u0.clone(), d.rho0.clone()).unwrap();
    let (du, drho) = rhs(&s).unwrap();
    let e0 = e0_field(&d.rho0).unwrap();
    assert!(du.sub(&e0).unwrap().linf() <= 1e-12 * e0.linf());
    assert!(drho.is_zero());
    assert!(m_form_residual(&s, &du, &drho).unwrap() <= 1e-8);
}

#[test]
fn first_step_is_dt_times_e0() {
    let (p, d) = data_n8();
    let s = State::new(0.0, d.u0.clone(), d.rho0.clone()).unwrap();
    let e0 = e0_field(&d.rho0).unwrap();
    let residual = |dt: f64| {
        let next = step_rk4(&s, dt).unwrap();
        next.u.sub(&e0.scale(dt)).unwrap().linf()
    };
    let dt = p.t0() / 32.0;
    let (r1, r2) = (residual(dt), residual(0.5 * dt));
    assert!(r1 <= dt * dt * e0.linf(), "{r1}");
    assert!(r1 / r2 >= 4.0 * 0.85, "residual ratio {}", r1 / r2);
}

#[test]
fn decoupled_run_keeps_velocity_zero() {
    let (p, d) = data_n8();
    let mut cfg = SolverConfig::new(p.t0());
    cfg.dt = p.t0() / 4.0;
    cfg.coupling = false;
    let s = State::new(0.0, d.u0.clone(), d.rho0.clone()).unwrap();
    let mut seen = 0;
    let traj = evolve(s, &cfg, false, &mut |sample| {
        assert!(sample.state.u.is_zero());
        seen += 1;
        Ok(())
    })
    .unwrap();
    assert!(traj.completed());
    assert_eq!(seen, 5);
    assert!(traj.final_state.u.is_zero());
    assert!(traj.final_state.rho.sub(&d.rho0).unwrap().linf() <= 1e-15 * d.rho0.linf());
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let g = GridSpec::new(64, PI).unwrap();
    let s = State::new(0.0, Field::zeros(g), Field::zeros(g)).unwrap();
    let mut cfg = SolverConfig::new(1.0);
    cfg.snapshot_times = vec![0.0, 0.5, 1.0];
    let traj = evolve(s, &cfg, true, &mut |_| Ok(())).unwrap();
    assert_eq!(traj.snapshots.len(), 3);
    for st in traj.snapshots.iter().chain([&traj.final_state]) {
        assert!(st.u.is_zero() && st.rho.is_zero());
    }
    assert_eq!(traj.flow.unwrap().max_displacement(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn momentum_form_holds_on_random_states(cu in coeffs(10), cr in coeffs(10), a in 0.01f64..2.0) {
        let g = GridSpec::new(128, PI).unwrap();
        let s = State::new(0.0, trig(g, cu, a), trig(g, cr, a)).unwrap();
        let (du, drho) = rhs(&s).unwrap();
        prop_assert!(m_form_residual(&s, &du, &drho).unwrap() <= 1e-8);
    }

    #[test]
    fn fields_stay_real(cu in coeffs(8), cr in coeffs(8)) {
        let g = GridSpec::new(64, PI).unwrap();
        let mut s = State::new(0.0, trig(g, cu, 0.2), trig(g, cr, 0.2)).unwrap();
        for _ in 0..5 {
            s = step_rk4(&s, 0.02).unwrap();
        }
        prop_assert!(s.u.imag_residue() <= 1e-12);
        prop_assert!(s.rho.imag_residue() <= 1e-12);
    }

    #[test]
    fn coupling_switch_removes_density_forcing(cr in coeffs(8)) {
        let g = GridSpec::new(64, PI).unwrap();
        let s = State::new(0.0, Field::zeros(g), trig(g, cr, 0.5)).unwrap();
        let off = rhs_terms(&s, false, true).unwrap();
        prop_assert!(off.du.is_zero());
        prop_assert!(off.drho.is_zero());
    }

    #[test]
    fn composition_preserves_sup(cf in coeffs(8), cu in coeffs(4), steps in 1usize..12) {
        let g = GridSpec::new(256, PI).unwrap();
        let f = trig(g, cf, 1.0);
        let u = trig(g, cu, 0.3);
        let mut fm = FlowMap::identity(g);
        for _ in 0..steps {
            fm.advance_frozen(&u, 0.05).unwrap();
        }
        fm.check_monotone().unwrap();
        let composed = fm.compose_nodes(&f).unwrap().to_field().unwrap();
        prop_assert!((composed.linf() - f.linf()).abs() <= 1e-6 * f.linf().max(1e-3));
    }
}
