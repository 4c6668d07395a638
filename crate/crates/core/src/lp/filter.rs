use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::field::Field;
use crate::lp::grid::GridSpec;
use crate::lp::smooth::{RadialCutoff, SmoothStep};

/// Plateau radius of `chi`.
pub const CHI_INNER: f64 = 0.75;
/// Support radius of `chi`.
pub const CHI_OUTER: f64 = 4.0 / 3.0;

/// Dyadic Littlewood-Paley multipliers on a grid.
///
/// `Delta_{-1}` has symbol `chi(xi)` and `Delta_j`, `j >= 0`, has symbol
/// `phi(2^{-j} xi)` with `phi(xi) = chi(xi/2) - chi(xi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LPFilterBank {
    grid: GridSpec,
    chi: RadialCutoff,
    low: Option<RadialCutoff>,
    j_max: i32,
}

impl LPFilterBank {
    /// The bank reaches the smallest `j_max` whose plateau edge `(3/2) 2^j_max`
    /// covers the largest frequency on the grid.
    pub fn build(grid: &GridSpec, transition_sharpness: f64) -> Result<Self> {
        if !(transition_sharpness.is_finite() && transition_sharpness > 0.0) {
            return Err(Error::arg(format!(
                "transition sharpness must be positive, got {transition_sharpness}"
            )));
        }
        let top = grid.nyquist();
        if top <= CHI_OUTER {
            return Err(Error::setup(format!(
                "grid too coarse: max frequency {top} does not reach block j = 0"
            )));
        }
        let j_max = (top / 1.5).log2().ceil().max(0.0) as i32;
        Ok(LPFilterBank {
            grid: *grid,
            chi: RadialCutoff::new(CHI_INNER, CHI_OUTER, SmoothStep::new(transition_sharpness)),
            low: None,
            j_max,
        })
    }

    /// Truncate the bank at `j_max`; its annulus must start below the grid's
    /// largest frequency.
    pub fn with_j_max(mut self, j_max: i32) -> Result<Self> {
        if j_max < 0 || CHI_INNER * 2f64.powi(j_max) >= self.grid.nyquist() {
            return Err(Error::setup(format!(
                "block j = {j_max} lies beyond the grid's max frequency {}",
                self.grid.nyquist()
            )));
        }
        self.j_max = j_max;
        Ok(self)
    }

    /// Replace the symbol of `Delta_{-1}` while leaving the annuli alone. Any
    /// cutoff other than `chi` breaks the partition of unity, which makes this
    /// a negative control for the checks.
    pub fn with_low_cutoff(mut self, cutoff: RadialCutoff) -> Self {
        self.low = Some(cutoff);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn sharpness(&self) -> f64 {
        self.chi.step.sharpness
    }

    #[inline]
    pub fn chi(&self, xi: f64) -> f64 {
        self.chi.eval(xi)
    }

    #[inline]
    pub fn phi(&self, xi: f64) -> f64 {
        self.chi.eval(0.5 * xi) - self.chi.eval(xi)
    }

    /// Symbol of `Delta_j` at `xi`.
    #[inline]
    pub fn symbol(&self, j: i32, xi: f64) -> f64 {
        if j < 0 {
            match &self.low {
                Some(c) => c.eval(xi),
                None => self.chi(xi),
            }
        } else {
            self.phi(xi * 2f64.powi(-j))
        }
    }

    /// Frequencies outside `[lo, hi]` (absolute values) are killed by `Delta_j`.
    pub fn support(&self, j: i32) -> (f64, f64) {
        if j < 0 {
            let outer = self.low.map_or(CHI_OUTER, |c| c.outer);
            (0.0, outer)
        } else {
            let s = 2f64.powi(j);
            (CHI_INNER * s, 2.0 * CHI_OUTER * s)
        }
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.j_max
    }

    fn check_index(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::arg(format!(
                "dyadic index {j} outside [-1, {}]",
                self.j_max
            )));
        }
        Ok(())
    }

    pub fn delta_j(&self, f: &Field, j: i32) -> Result<Field> {
        self.check_index(j)?;
        self.grid.ensure_same(f.grid())?;
        let (lo, hi) = self.support(j);
        let mut out = Field::zeros(self.grid);
        for m in f.active_bands() {
            let (blo, bhi) = self.grid.band_range(m);
            if bhi <= lo || blo >= hi {
                continue;
            }
            let coeffs = f.band(m).unwrap();
            let filtered: Vec<_> = coeffs
                .iter()
                .enumerate()
                .map(|(p, c)| c * self.symbol(j, self.grid.frequency(m, p)))
                .collect();
            out.set_band(m, Some(filtered))?;
        }
        Ok(out)
    }

    /// `sum_{i=lo}^{hi} Delta_i f`, clamped to the bank's range.
    pub fn delta_range(&self, f: &Field, lo: i32, hi: i32) -> Result<Field> {
        let mut out = Field::zeros(self.grid);
        for j in lo.max(-1)..=hi.min(self.j_max) {
            out = out.add(&self.delta_j(f, j)?)?;
        }
        Ok(out)
    }

    /// `max |chi(xi) + sum_{j=0}^{j_max} phi(2^{-j} xi) - 1|` over `samples`
    /// equispaced `xi` in `[0, xi_max]`.
    pub fn partition_deviation(&self, xi_max: f64, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..samples {
            let xi = xi_max * k as f64 / (samples.max(2) - 1) as f64;
            let mut s = self.symbol(-1, xi);
            for j in 0..=self.j_max {
                s += self.symbol(j, xi);
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Frequency up to which the truncated sum is a partition of unity.
    pub fn coverage(&self) -> f64 {
        1.5 * 2f64.powi(self.j_max)
    }

    /// `||Delta_j f||_{L^p}` for every `j` in `-1..=j_max`.
    pub fn block_norms(&self, f: &Field, p: f64) -> Result<Vec<f64>> {
        self.indices()
            .map(|j| self.delta_j(f, j).and_then(|d| d.lp(p)))
            .collect()
    }

    pub fn besov_norm(
        &self,
        f: &Field,
        params: &BesovParams,
        restrict: Option<&[i32]>,
    ) -> Result<f64> {
        params.validate()?;
        let js: Vec<i32> = match restrict {
            Some(r) => {
                for &j in r {
                    self.check_index(j)?;
                }
                r.to_vec()
            }
            None => self.indices().collect(),
        };
        let mut terms = Vec::with_capacity(js.len());
        for j in js {
            let b = self.delta_j(f, j)?.lp(params.p)?;
            terms.push((j, b));
        }
        Ok(params.combine(&terms))
    }
}

/// Exponents of `B^s_{p,r}`; `p` and `r` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let b = BesovParams { s, p, r };
        b.validate()?;
        Ok(b)
    }

    /// `B^s_{inf,1}`.
    pub fn sup_l1(s: f64) -> Self {
        BesovParams {
            s,
            p: f64::INFINITY,
            r: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !(self.r >= 1.0) || !self.s.is_finite() {
            return Err(Error::arg(format!(
                "Besov exponents need p >= 1, r >= 1 and finite s, got {self:?}"
            )));
        }
        Ok(())
    }

    /// Weighted `l^r` sum of `(j, ||Delta_j f||_p)` pairs.
    pub fn combine(&self, blocks: &[(i32, f64)]) -> f64 {
        let w = |j: i32, b: f64| 2f64.powf(j as f64 * self.s) * b;
        if self.r.is_infinite() {
            blocks.iter().fold(0.0, |a, &(j, b)| a.max(w(j, b)))
        } else if self.r == 1.0 {
            blocks.iter().map(|&(j, b)| w(j, b)).sum()
        } else {
            blocks
                .iter()
                .map(|&(j, b)| w(j, b).powf(self.r))
                .sum::<f64>()
                .powf(1.0 / self.r)
        }
    }
}
