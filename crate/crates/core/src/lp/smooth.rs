use serde::{Deserialize, Serialize};

/// `C^infinity` step: 0 on `(-inf, 0]`, 1 on `[1, inf)`, glued by
/// `1 / (1 + exp(s/t - s/(1-t)))`. Satisfies `eta(t) + eta(1 - t) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep {
    pub sharpness: f64,
}

impl Default for SmoothStep {
    fn default() -> Self {
        SmoothStep { sharpness: 1.0 }
    }
}

impl SmoothStep {
    pub fn new(sharpness: f64) -> Self {
        SmoothStep { sharpness }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            let s = self.sharpness;
            let e = s / t - s / (1.0 - t);
            if e > 700.0 {
                0.0
            } else {
                1.0 / (1.0 + e.exp())
            }
        }
    }
}

/// Even cutoff equal to 1 on `|xi| <= inner` and 0 on `|xi| >= outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    pub inner: f64,
    pub outer: f64,
    pub step: SmoothStep,
}

impl RadialCutoff {
    pub fn new(inner: f64, outer: f64, step: SmoothStep) -> Self {
        assert!(0.0 <= inner && inner < outer, "cutoff needs 0 <= inner < outer");
        RadialCutoff { inner, outer, step }
    }

    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        self.step
            .eval((self.outer - xi.abs()) / (self.outer - self.inner))
    }
}
