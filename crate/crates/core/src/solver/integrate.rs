use crate::error::{Error, Result};
use crate::lp::Field;
use crate::solver::flow::FlowMap;
use crate::solver::rhs::{rhs_terms, RhsTerms};
use crate::solver::state::{SolverConfig, State};

/// Largest admissible step: `cfl / (||u|| xi_max + 3 ||u_x|| + ||rho||)`,
/// with node-sampled norms.
pub fn stability_limit(state: &State, cfl: f64) -> f64 {
    let grid = state.u.grid();
    let rate = state.u.node_values().linf() * grid.nyquist()
        + 3.0 * state.u.derivative().node_values().linf()
        + state.rho.node_values().linf();
    if rate == 0.0 {
        f64::INFINITY
    } else {
        cfl / rate
    }
}

fn w1inf_nodal(u: &Field) -> f64 {
    u.node_values().linf() + u.derivative().node_values().linf()
}

fn combine(base: &State, dt: f64, k: &[(f64, &RhsTerms)]) -> Result<State> {
    let mut u = base.u.clone();
    let mut rho = base.rho.clone();
    for &(w, r) in k {
        u = u.axpy(w * dt, &r.du)?;
        rho = rho.axpy(w * dt, &r.drho)?;
    }
    Ok(State {
        t: base.t + dt,
        u,
        rho,
    })
}

/// Fixed-step classical RK4 with the checks of a [`SolverConfig`].
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SolverConfig,
}

impl Stepper {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Stepper { cfg })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn terms(&self, state: &State) -> Result<RhsTerms> {
        rhs_terms(state, self.cfg.coupling, self.cfg.dealias)
    }

    /// One step; `k1` may carry the terms already evaluated at `state`, and
    /// `flow` is advanced with the same stage velocities.
    pub fn step(
        &self,
        state: &State,
        dt: f64,
        k1: Option<RhsTerms>,
        flow: Option<&mut FlowMap>,
    ) -> Result<State> {
        let limit = stability_limit(state, self.cfg.cfl);
        if dt > limit {
            return Err(Error::StepSize {
                t: state.t,
                dt,
                limit,
            });
        }
        let k1 = match k1 {
            Some(k) => k,
            None => self.terms(state)?,
        };
        let mut s2 = combine(state, 0.5 * dt, &[(1.0, &k1)])?;
        let k2 = self.terms(&s2)?;
        let mut s3 = combine(state, 0.5 * dt, &[(1.0, &k2)])?;
        s2.t = state.t + 0.5 * dt;
        s3.t = s2.t;
        let k3 = self.terms(&s3)?;
        let s4 = combine(state, dt, &[(1.0, &k3)])?;
        let k4 = self.terms(&s4)?;
        let next = combine(
            state,
            dt,
            &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)],
        )?;
        if !next.is_finite() {
            return Err(Error::BlowUp {
                t: next.t,
                what: "non-finite state".into(),
            });
        }
        let w = w1inf_nodal(&next.u);
        if w > self.cfg.blowup_threshold {
            return Err(Error::BlowUp {
                t: next.t,
                what: format!(
                    "||u||_W1inf = {w:.3e} > {:.3e}, ||rho||_inf = {:.3e}",
                    self.cfg.blowup_threshold,
                    next.rho.node_values().linf()
                ),
            });
        }
        if let Some(fm) = flow {
            fm.advance([&state.u, &s2.u, &s3.u, &s4.u], dt)?;
        }
        Ok(next)
    }
}

/// One RK4 step with the default checks.
pub fn step_rk4(state: &State, dt: f64) -> Result<State> {
    let mut cfg = SolverConfig::new(dt.max(f64::MIN_POSITIVE));
    cfg.dt = dt;
    Stepper::new(cfg)?.step(state, dt, None, None)
}

/// What an observer sees at every step time, including `t = 0` and the end.
pub struct Sample<'a> {
    pub step: usize,
    pub dt: f64,
    pub state: &'a State,
    pub terms: &'a RhsTerms,
    pub flow: Option<&'a FlowMap>,
}

#[derive(Debug)]
pub struct Trajectory {
    pub dt: f64,
    pub steps_taken: usize,
    pub snapshots: Vec<State>,
    pub final_state: State,
    pub flow: Option<FlowMap>,
    /// Set when the run stopped early; `final_state` is the last good state.
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Integrates to `t_final`, calling `observer` at each step time. Step and
/// observer errors end the run and are stored in [`Trajectory::failure`].
pub fn evolve(
    initial: State,
    cfg: &SolverConfig,
    track_flow: bool,
    observer: &mut dyn FnMut(&Sample) -> Result<()>,
) -> Result<Trajectory> {
    let stepper = Stepper::new(cfg.clone())?;
    let (steps, dt) = cfg.steps();
    let snap_steps = cfg.snapshot_steps();
    let mut flow = track_flow.then(|| FlowMap::identity(*initial.u.grid()));
    let mut state = initial;
    let mut snapshots = Vec::new();
    let mut failure = None;
    let mut taken = 0;

    for step in 0..=steps {
        for _ in snap_steps.iter().filter(|&&s| s == step) {
            snapshots.push(state.clone());
        }
        let outcome = stepper.terms(&state).and_then(|terms| {
            observer(&Sample {
                step,
                dt,
                state: &state,
                terms: &terms,
                flow: flow.as_ref(),
            })?;
            if step == steps {
                return Ok(None);
            }
            stepper.step(&state, dt, Some(terms), flow.as_mut()).map(Some)
        });
        match outcome {
            Ok(Some(next)) => {
                state = next;
                taken += 1;
            }
            Ok(None) => {}
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok(Trajectory {
        dt,
        steps_taken: taken,
        snapshots,
        final_state: state,
        flow,
        failure,
    })
}
