use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::construction::bump::{BumpProfile, BUMP_OMEGA, CARRIER_RATIO, HAT_OUTER};
use crate::error::{Error, Result};
use crate::lp::GridSpec;

/// Default separation factor `S` of the reduced geometry.
pub const DEFAULT_SEPARATION: f64 = 4096.0;
/// Largest cross-talk `|phi_l phi_m|` tolerated between distinct bumps.
pub const CROSS_TALK_TOL: f64 = 1e-8;
/// `|y|` beyond which a unit-scale bump holds less than `1e-10` of its energy.
pub const TAIL_EXTENT: f64 = 11_000.0;
/// Envelope Nyquist as a multiple of `(17/12) 2^{n/2}`.
pub const ENVELOPE_MARGIN: f64 = 1.5;
/// Largest envelope grid the layout will allocate.
pub const MAX_GRID_POINTS: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Bumps at `2^{2n + l}`.
    Paper,
    /// Bumps at `(l - l_mid) S 2^{-n/4}`.
    Reduced,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Geometry::Paper),
            "reduced" => Ok(Geometry::Reduced),
            other => Err(Error::arg(format!(
                "geometry must be 'reduced' or 'paper', got '{other}'"
            ))),
        }
    }
}

/// Which bumps enter `rho_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terms {
    All,
    Single(i32),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionParams {
    pub n: u32,
    pub geometry: Geometry,
    pub separation: f64,
    pub amplitude: f64,
    pub terms: Terms,
    /// Envelope grid size; `None` picks the smallest that fits.
    pub grid_points: Option<usize>,
}

impl ConstructionParams {
    pub fn new(n: u32) -> Result<Self> {
        let p = ConstructionParams {
            n,
            geometry: Geometry::Reduced,
            separation: DEFAULT_SEPARATION,
            amplitude: default_amplitude(n),
            terms: Terms::All,
            grid_points: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(4) {
            return Err(Error::arg(format!(
                "n must be a multiple of 4 with n >= 8, got n = {}",
                self.n
            )));
        }
        if self.n > 40 {
            return Err(Error::arg(format!("n = {} is beyond double precision", self.n)));
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(Error::arg(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::arg("amplitude must be finite"));
        }
        if let Terms::Single(l) = self.terms {
            if !self.index_set().contains(&l) {
                return Err(Error::arg(format!(
                    "single term {l} is outside the index set {:?}",
                    self.index_set()
                )));
            }
        }
        Ok(())
    }

    /// `N(n) = {n/4, ..., n/2}`.
    pub fn index_set(&self) -> Vec<i32> {
        let n = self.n as i32;
        (n / 4..=n / 2).collect()
    }

    /// Indices whose bumps are present in `rho_0`.
    pub fn active_terms(&self) -> Vec<i32> {
        match self.terms {
            Terms::All => self.index_set(),
            Terms::Single(l) => vec![l],
            Terms::None => Vec::new(),
        }
    }

    /// `(17/12) 2^n`.
    pub fn carrier(&self) -> f64 {
        CARRIER_RATIO * 2f64.powi(self.n as i32)
    }

    /// Half-width of the frequency band around the carrier holding `rho_0`.
    pub fn band_halfwidth(&self) -> f64 {
        CARRIER_RATIO * 2f64.powf(self.n as f64 / 2.0) + 0.5
    }

    /// Envelope Nyquist the layout aims for.
    pub fn envelope_target(&self) -> f64 {
        ENVELOPE_MARGIN * CARRIER_RATIO * 2f64.powf(self.n as f64 / 2.0)
    }

    /// `1 / ln n`.
    pub fn t0(&self) -> f64 {
        1.0 / (self.n as f64).ln()
    }

    fn spacing_unit(&self) -> f64 {
        self.separation * 2f64.powf(-(self.n as f64) / 4.0)
    }

    /// Bump centres `c_l` for every `l` in the index set.
    pub fn centers(&self) -> Vec<(i32, f64)> {
        let idx = self.index_set();
        match self.geometry {
            Geometry::Paper => idx
                .iter()
                .map(|&l| (l, 2f64.powi(2 * self.n as i32 + l)))
                .collect(),
            Geometry::Reduced => {
                let mid = 0.5 * (idx[0] + idx[idx.len() - 1]) as f64;
                let sp = self.spacing_unit();
                idx.iter().map(|&l| (l, (l as f64 - mid) * sp)).collect()
            }
        }
    }

    pub fn center(&self, l: i32) -> Option<f64> {
        self.centers().into_iter().find(|c| c.0 == l).map(|c| c.1)
    }

    /// Choose the envelope grid for `max_band` modulated bands.
    pub fn layout(&self, max_band: usize) -> Result<Layout> {
        self.validate()?;
        if max_band == 0 {
            return Err(Error::arg("rho_0 needs at least one modulated band"));
        }
        let k_target = self.envelope_target();
        let quarter = 2f64.powf(-(self.n as f64) / 4.0);
        let tail = TAIL_EXTENT * quarter;
        let max_c = self
            .centers()
            .iter()
            .fold(0.0f64, |a, c| a.max(c.1.abs()));
        let half_req = 2.0 * (max_c + tail);

        let (h, per_sep) = match self.geometry {
            Geometry::Reduced => {
                // an even number of nodes per separation puts every centre,
                // including half-integer offsets, on a node
                let sp = self.spacing_unit();
                let mut r = (sp * k_target / PI).ceil() as usize;
                r += r % 2;
                (sp / r as f64, Some(r))
            }
            Geometry::Paper => (PI / k_target, None),
        };
        let needed = 2.0 * half_req / h;
        if !(needed <= MAX_GRID_POINTS as f64) {
            let why = match self.geometry {
                Geometry::Paper => format!(
                    "paper geometry places bump centres up to 2^{} = {:.3e}, which needs about {:.3e} envelope points",
                    2 * self.n as i32 + self.n as i32 / 2,
                    max_c,
                    needed
                ),
                Geometry::Reduced => format!(
                    "domain half-length {half_req:.3e} needs about {needed:.3e} envelope points"
                ),
            };
            return Err(Error::setup(format!(
                "unrepresentable centres: {why} (limit {MAX_GRID_POINTS})"
            )));
        }
        let min_points = (needed.ceil() as usize).next_power_of_two().max(16);
        let n_points = match self.grid_points {
            None => min_points,
            Some(p) if p.is_power_of_two() && p >= min_points && p <= MAX_GRID_POINTS => p,
            Some(p) => {
                return Err(Error::arg(format!(
                    "grid_points must be a power of two in [{min_points}, {MAX_GRID_POINTS}], got {p}"
                )))
            }
        };
        let half_length = n_points as f64 * h / 2.0;
        let grid = GridSpec::modulated(n_points, half_length, self.carrier(), max_band)?;
        let carrier = self.carrier();
        let half = self.band_halfwidth();
        grid.check_covers(carrier - half, carrier + half)?;
        Ok(Layout {
            grid,
            centers: self.centers(),
            nodes_per_separation: per_sep,
        })
    }
}

pub fn default_amplitude(n: u32) -> f64 {
    let n = n as f64;
    n.ln() / n.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub grid: GridSpec,
    pub centers: Vec<(i32, f64)>,
    pub nodes_per_separation: Option<usize>,
}

impl Layout {
    pub fn center(&self, l: i32) -> Option<f64> {
        self.centers.iter().find(|c| c.0 == l).map(|c| c.1)
    }
}

/// `max_x |phi_bump(2^l (x - c_l)) phi_bump(2^m (x - c_m))|` over all pairs of
/// distinct active bumps, evaluated on a grid fine enough for both scales.
pub fn cross_talk(params: &ConstructionParams, bump: &BumpProfile) -> f64 {
    let centers: Vec<(i32, f64)> = params
        .centers()
        .into_iter()
        .filter(|c| params.active_terms().contains(&c.0))
        .collect();
    let reach = bump.grid().half_length();
    let mut worst = 0.0f64;
    for (a, &(l, cl)) in centers.iter().enumerate() {
        for &(m, cm) in centers.iter().skip(a + 1) {
            let sl = 2f64.powi(l);
            let sm = 2f64.powi(m);
            // overlap region of the two sampled supports
            let lo = (cl - reach / sl).max(cm - reach / sm);
            let hi = (cl + reach / sl).min(cm + reach / sm);
            if lo >= hi {
                continue;
            }
            let dx = 0.25 / sl.max(sm);
            let steps = ((hi - lo) / dx).ceil() as usize;
            for k in 0..=steps {
                let x = lo + k as f64 * dx;
                let yl = sl * (x - cl);
                let ym = sm * (x - cm);
                let v = bump.theta_abs_table(yl)
                    * (BUMP_OMEGA * yl).sin().abs()
                    * bump.theta_abs_table(ym)
                    * (BUMP_OMEGA * ym).sin().abs();
                worst = worst.max(v);
            }
        }
    }
    worst
}

/// Largest frequency of `phi_bump(2^l .)`.
pub fn bump_bandwidth(l: i32) -> f64 {
    2f64.powi(l) * (BUMP_OMEGA + HAT_OUTER)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ConstructionParams::new(7).is_err());
        assert!(ConstructionParams::new(4).is_err());
        assert!(ConstructionParams::new(10).is_err());
        let p = ConstructionParams::new(12).unwrap();
        assert_eq!(p.index_set(), vec![3, 4, 5, 6]);
        let msg = ConstructionParams::new(7).unwrap_err().to_string();
        assert!(msg.contains("multiple of 4"));
    }

    #[test]
    fn amplitude_and_carrier() {
        let p = ConstructionParams::new(16).unwrap();
        assert!((p.amplitude - 16f64.ln() / 4.0).abs() < 1e-15);
        assert_eq!(p.carrier(), 17.0 / 12.0 * 65536.0);
        assert!((p.t0() - 1.0 / 16f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn reduced_centres_are_symmetric() {
        let p = ConstructionParams::new(8).unwrap();
        let c = p.centers();
        assert_eq!(c, vec![(2, -1024.0), (3, 0.0), (4, 1024.0)]);
    }

    #[test]
    fn layout_sizes() {
        for (n, points) in [(8, 1 << 18), (12, 1 << 19), (16, 1 << 20)] {
            let p = ConstructionParams::new(n).unwrap();
            let lay = p.layout(3).unwrap();
            assert_eq!(lay.grid.num_points(), points, "n = {n}");
            assert!(lay.grid.envelope_nyquist() >= p.envelope_target());
            // every centre sits on a node
            for &(_, c) in &lay.centers {
                let s = (c + lay.grid.half_length()) / lay.grid.spacing();
                assert!((s - s.round()).abs() < 1e-6, "n = {n}, c = {c}");
            }
        }
    }

    #[test]
    fn paper_geometry_is_rejected() {
        let mut p = ConstructionParams::new(8).unwrap();
        p.geometry = Geometry::Paper;
        let e = p.layout(3).unwrap_err();
        assert!(e.is_configuration());
        assert!(e.to_string().contains("unrepresentable"));
    }

    #[test]
    fn grid_points_override() {
        let mut p = ConstructionParams::new(8).unwrap();
        p.grid_points = Some(1 << 19);
        assert_eq!(p.layout(3).unwrap().grid.num_points(), 1 << 19);
        p.grid_points = Some(1 << 10);
        assert!(p.layout(3).is_err());
    }

    #[test]
    fn params_serde_round_trip() {
        let mut p = ConstructionParams::new(12).unwrap();
        p.terms = Terms::Single(4);
        let s = serde_json::to_string(&p).unwrap();
        let q: ConstructionParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
