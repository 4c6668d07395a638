use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::Field;

#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub rho: Field,
}

impl State {
    pub fn new(t: f64, u: Field, rho: Field) -> Result<Self> {
        u.grid().ensure_same(rho.grid())?;
        if !u.is_finite() || !rho.is_finite() {
            return Err(Error::BlowUp {
                t,
                what: "non-finite initial state".into(),
            });
        }
        Ok(State { t, u, rho })
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.rho.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    /// Abort once `||u||_{W^{1,inf}}` exceeds this.
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Bound on `dt (||u|| xi_max + 3 ||u_x|| + ||rho||)`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Keep the `rho^2` forcing in the velocity equation.
    #[serde(default = "yes")]
    pub coupling: bool,
}

fn yes() -> bool {
    true
}

fn default_blowup() -> f64 {
    1e6
}

fn default_cfl() -> f64 {
    1.0
}

/// Default number of steps over `[0, t_final]`.
pub const DEFAULT_STEPS: usize = 32;

impl SolverConfig {
    pub fn new(t_final: f64) -> Self {
        SolverConfig {
            dt: t_final / DEFAULT_STEPS as f64,
            t_final,
            dealias: true,
            blowup_threshold: default_blowup(),
            snapshot_times: Vec::new(),
            cfl: default_cfl(),
            coupling: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::arg(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::arg(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::arg(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            )));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::arg(format!("cfl must be positive, got {}", self.cfl)));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(t >= 0.0 && t <= self.t_final * (1.0 + 1e-12)))
        {
            return Err(Error::arg(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_final
            )));
        }
        Ok(())
    }

    /// Number of steps and the uniform step that lands on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }

    /// Step indices of the snapshot times, sorted, for a run starting at 0.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let (n, dt) = self.steps();
        let mut s: Vec<usize> = self
            .snapshot_times
            .iter()
            .map(|t| ((t / dt).round().max(0.0) as usize).min(n))
            .collect();
        s.sort_unstable();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_lands_on_final_time() {
        let mut c = SolverConfig::new(1.0);
        c.dt = 0.3;
        assert_eq!(c.steps(), (4, 0.25));
        c.dt = 0.25;
        assert_eq!(c.steps(), (4, 0.25));
    }

    #[test]
    fn invalid_configs() {
        let mut c = SolverConfig::new(1.0);
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::new(1.0);
        c.snapshot_times = vec![2.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let s = r#"{"dt":0.1,"t_final":1.0,"bogus":1}"#;
        assert!(serde_json::from_str::<SolverConfig>(s).is_err());
        let c: SolverConfig = serde_json::from_str(r#"{"dt":0.1,"t_final":1.0}"#).unwrap();
        assert!(c.dealias && c.coupling);
    }
}
