//! Lebesgue norms of fields.
//!
//! For a banded field the carrier phase `m k_c x` turns over many times per
//! envelope node, so the supremum near a node is the supremum over a free
//! phase `theta` of `v_0 + 2 sum_m Re(v_m e^{i m theta})`. Finite `p` norms use
//! the phase average. The sup norm of a [`Field`] is refined off the nodes by
//! band-limited interpolation; [`NodeValues`] only see their samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lp::field::{eval_envelope, Field, NodeValues};
use crate::lp::grid::GridSpec;

/// `sup_theta |v_0 + 2 sum Re(v_m e^{i m theta})|` for `(band, value)` pairs.
pub fn phase_sup(v: &[(usize, Complex64)]) -> f64 {
    match v {
        [] => 0.0,
        [(0, a)] => a.re.abs(),
        [(_, a)] => 2.0 * a.norm(),
        [(0, a), (_, b)] => a.re.abs() + 2.0 * b.norm(),
        _ => phase_sup_numeric(v),
    }
}

/// Upper bound for [`phase_sup`].
fn phase_bound(v: &[(usize, Complex64)]) -> f64 {
    v.iter()
        .map(|&(m, a)| if m == 0 { a.re.abs() } else { 2.0 * a.norm() })
        .sum()
}

fn phase_value(v: &[(usize, Complex64)], theta: f64) -> f64 {
    let mut s = 0.0;
    for &(m, a) in v {
        if m == 0 {
            s += a.re;
        } else {
            s += 2.0 * (a * Complex64::from_polar(1.0, m as f64 * theta)).re;
        }
    }
    s.abs()
}

fn phase_sup_numeric(v: &[(usize, Complex64)]) -> f64 {
    let mmax = v.iter().map(|p| p.0).max().unwrap_or(1).max(1);
    let samples = 16 * mmax;
    let dt = 2.0 * PI / samples as f64;
    let (mut best, mut arg) = (0.0, 0.0);
    for k in 0..samples {
        let th = k as f64 * dt;
        let val = phase_value(v, th);
        if val > best {
            best = val;
            arg = th;
        }
    }
    let (b, _) = golden_max(|th| phase_value(v, th), arg - dt, arg + dt, 1e-13);
    best.max(b)
}

/// `avg_theta |...|^p`.
fn phase_mean_pow(v: &[(usize, Complex64)], p: f64) -> f64 {
    match v {
        [] => 0.0,
        [(0, a)] => a.re.abs().powf(p),
        _ => {
            let mmax = v.iter().map(|q| q.0).max().unwrap_or(1).max(1);
            let samples = 64 * mmax;
            let mut s = 0.0;
            for k in 0..samples {
                s += phase_value(v, 2.0 * PI * k as f64 / samples as f64).powf(p);
            }
            s / samples as f64
        }
    }
}

/// Golden-section maximisation on `[a, b]`; returns `(value, argmax)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let scale = (b - a).abs().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if (b - a).abs() <= tol * scale {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (fc, c)
    } else {
        (fd, d)
    }
}

fn in_window(x: f64, window: Option<(f64, f64)>) -> bool {
    window.is_none_or(|(lo, hi)| x >= lo && x <= hi)
}

impl NodeValues {
    /// Sup over the nodes (and the free carrier phase).
    pub fn linf(&self) -> f64 {
        self.linf_window(None)
    }

    pub fn linf_on(&self, lo: f64, hi: f64) -> f64 {
        self.linf_window(Some((lo, hi)))
    }

    fn linf_window(&self, window: Option<(f64, f64)>) -> f64 {
        let n = self.grid.num_points();
        let mut buf = Vec::new();
        let mut best = 0.0f64;
        for i in 0..n {
            if !in_window(self.grid.x(i), window) {
                continue;
            }
            self.at(i, &mut buf);
            if phase_bound(&buf) > best {
                best = best.max(phase_sup(&buf));
            }
        }
        best
    }

    /// Trapezoidal `L^p` norm without domain normalisation.
    pub fn lp(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::arg(format!("Lebesgue exponent must be >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.linf());
        }
        let mut buf = Vec::new();
        let mut s = 0.0;
        for i in 0..self.grid.num_points() {
            self.at(i, &mut buf);
            s += phase_mean_pow(&buf, p);
        }
        Ok((s * self.grid.spacing()).powf(1.0 / p))
    }
}

/// Relative tail level below which a band's spectrum counts as empty.
const TAIL: f64 = 1e-13;
/// Above this fraction of the envelope Nyquist the field is first refined to
/// a twice finer grid.
const REFINE_RATIO: f64 = 0.3;

/// Coefficients below this fraction of the largest one are round-off.
const NOISE_FLOOR: f64 = 1e-13;

/// Fraction `r` of the envelope Nyquist holding all but `TAIL` of the band's
/// coefficient mass, ignoring round-off.
fn content_ratio(grid: &GridSpec, coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    let peak = coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let floor = NOISE_FLOOR * peak;
    let mass = |c: &Complex64| {
        let a = c.norm();
        if a > floor {
            a
        } else {
            0.0
        }
    };
    let total: f64 = coeffs.iter().map(mass).sum();
    if total == 0.0 {
        return 0.0;
    }
    // accumulate from the top wavenumber down
    let mut tail = 0.0;
    for k in (1..=n / 2).rev() {
        tail += mass(&coeffs[k % n]);
        if k < n / 2 {
            tail += mass(&coeffs[n - k]);
        }
        if tail > TAIL * total {
            return (k as f64 * grid.fundamental() / grid.envelope_nyquist()).min(1.0);
        }
    }
    0.0
}

/// Gaussian-windowed sinc interpolation of periodic node samples.
struct SincInterp<'a> {
    grid: GridSpec,
    bands: Vec<(usize, &'a [Complex64])>,
    half_width: usize,
    inv_two_sigma2: f64,
}

impl<'a> SincInterp<'a> {
    fn new(grid: GridSpec, bands: Vec<(usize, &'a [Complex64])>, ratio: f64) -> Self {
        // truncation and aliasing errors both ~ exp(-pi W (1 - r) / 2)
        let guard = (1.0 - ratio).max(0.05);
        let w = (2.0 * 32.0 / (PI * guard)).ceil() as usize;
        let w = w.clamp(8, grid.num_points() / 2 - 1);
        let h = grid.spacing();
        let sigma2 = w as f64 * h * h / (PI * guard);
        SincInterp {
            grid,
            bands,
            half_width: w,
            inv_two_sigma2: 0.5 / sigma2,
        }
    }

    fn values(&self, x: f64, out: &mut Vec<(usize, Complex64)>) {
        let h = self.grid.spacing();
        let n = self.grid.num_points() as i64;
        let s = (x + self.grid.half_length()) / h;
        let i0 = s.floor() as i64;
        out.clear();
        for &(m, _) in &self.bands {
            out.push((m, Complex64::new(0.0, 0.0)));
        }
        let w = self.half_width as i64;
        for k in (i0 - w + 1)..=(i0 + w) {
            let t = s - k as f64;
            let kern = if t.abs() < 1e-15 {
                1.0
            } else {
                (PI * t).sin() / (PI * t) * (-(t * h) * (t * h) * self.inv_two_sigma2).exp()
            };
            let idx = k.rem_euclid(n) as usize;
            for (slot, &(_, vals)) in out.iter_mut().zip(&self.bands) {
                slot.1 += kern * vals[idx];
            }
        }
        for slot in out.iter_mut() {
            if slot.0 == 0 {
                slot.1.im = 0.0;
            }
        }
    }

    fn sup_at(&self, x: f64, buf: &mut Vec<(usize, Complex64)>) -> f64 {
        self.values(x, buf);
        phase_sup(buf)
    }
}

impl Field {
    /// Sup norm, refined between nodes.
    pub fn linf(&self) -> f64 {
        self.linf_window(None)
    }

    /// Sup norm over `[lo, hi]`.
    pub fn linf_on(&self, lo: f64, hi: f64) -> f64 {
        self.linf_window(Some((lo, hi)))
    }

    pub fn lp(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(self.linf());
        }
        self.node_values().lp(p)
    }

    fn linf_window(&self, window: Option<(f64, f64)>) -> f64 {
        self.linf_search(window, true)
    }

    fn linf_search(&self, window: Option<(f64, f64)>, may_refine: bool) -> f64 {
        let grid = *self.grid();
        let active = self.active_bands();
        if active.is_empty() {
            return 0.0;
        }
        let ratio = active
            .iter()
            .map(|&m| content_ratio(&grid, self.band(m).unwrap()))
            .fold(0.0, f64::max);
        if ratio == 0.0 {
            // constant envelopes
            return self.node_values().linf_window(window);
        }
        if may_refine && ratio > REFINE_RATIO {
            return self.refined().linf_search(window, false);
        }
        let nodes = self.node_values();
        let bands: Vec<(usize, &[Complex64])> = active
            .iter()
            .map(|&m| (m, nodes.band(m).unwrap()))
            .collect();
        let interp = SincInterp::new(grid, bands, ratio);
        let n = grid.num_points();
        let h = grid.spacing();

        // Every node within h/2 of the true maximiser keeps at least
        // 1 - (r pi / 2)^2 / 2 of the peak.
        let keep = (1.0 - 0.5 * (ratio * PI / 2.0).powi(2) - 0.05).max(0.0);
        let mut buf = Vec::new();
        let mut ub = vec![0.0; n];
        let mut gmax = 0.0f64;
        for i in 0..n {
            if !in_window(grid.x(i), window) {
                continue;
            }
            nodes.at(i, &mut buf);
            ub[i] = phase_bound(&buf);
            if ub[i] > gmax {
                gmax = gmax.max(phase_sup(&buf));
            }
        }
        if gmax == 0.0 {
            return self.edge_sup(&interp, window, 0.0);
        }
        let mut g = vec![0.0; n];
        for i in 0..n {
            if ub[i] >= keep * gmax {
                nodes.at(i, &mut buf);
                g[i] = phase_sup(&buf);
            }
        }

        // quarter-node samples around every promising node
        const SUB: usize = 4;
        let keep_fine = 1.0 - 0.5 * (ratio * PI / (2.0 * SUB as f64)).powi(2) - 1e-3;
        let mut fine: Vec<(f64, f64)> = Vec::new();
        for i in 0..n {
            if g[i] < keep * gmax {
                continue;
            }
            for s in 0..(2 * SUB) {
                let x = grid.x(i) + (s as f64 - SUB as f64) * h / SUB as f64;
                if in_window(x, window) {
                    // samples bounded below the cut can neither be kept nor
                    // beat a kept neighbour
                    interp.values(x, &mut buf);
                    let b = phase_bound(&buf);
                    let v = if b >= keep_fine * gmax { phase_sup(&buf) } else { b };
                    fine.push((x, v));
                }
            }
        }
        fine.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        fine.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9 * h);
        let fmax = fine.iter().fold(gmax, |a, p| a.max(p.1));

        let mut best = fmax;
        let dx = h / SUB as f64;
        for k in 0..fine.len() {
            let (x, v) = fine[k];
            if v < keep_fine * fmax {
                continue;
            }
            let left = k > 0 && (x - fine[k - 1].0) < 1.5 * dx && fine[k - 1].1 > v;
            let right =
                k + 1 < fine.len() && (fine[k + 1].0 - x) < 1.5 * dx && fine[k + 1].1 > v;
            if left || right {
                continue;
            }
            let (mut a, mut b) = (x - dx, x + dx);
            if let Some((lo, hi)) = window {
                a = a.max(lo);
                b = b.min(hi);
            }
            let (val, _) = golden_max(|y| interp.sup_at(y, &mut Vec::new()), a, b, 1e-12);
            best = best.max(val);
        }
        self.edge_sup(&interp, window, best)
    }

    /// Window endpoints may fall between nodes.
    fn edge_sup(&self, interp: &SincInterp, window: Option<(f64, f64)>, best: f64) -> f64 {
        let mut best = best;
        if let Some((lo, hi)) = window {
            let mut buf = Vec::new();
            best = best.max(interp.sup_at(lo, &mut buf));
            best = best.max(interp.sup_at(hi, &mut buf));
        }
        best
    }

    /// The same field sampled twice as finely.
    fn refined(&self) -> Field {
        let fine_grid = self.grid().refined(2);
        let mut fine = Field::zeros(fine_grid);
        for m in self.active_bands() {
            let c = fft::pad(self.band(m).unwrap(), fine_grid.num_points());
            fine.set_band(m, Some(c)).expect("refined grid keeps the bands");
        }
        fine
    }
}

/// Sup over `[lo, hi]` of a single band envelope by direct summation; used by
/// tests as an independent reference.
pub fn envelope_sup_direct(grid: &GridSpec, coeffs: &[Complex64], lo: f64, hi: f64, samples: usize) -> f64 {
    let dx = (hi - lo) / samples as f64;
    let mut best = (0.0, lo);
    for k in 0..=samples {
        let x = lo + k as f64 * dx;
        let v = eval_envelope(grid, coeffs, x).norm();
        if v > best.0 {
            best = (v, x);
        }
    }
    golden_max(
        |x| eval_envelope(grid, coeffs, x).norm(),
        (best.1 - dx).max(lo),
        (best.1 + dx).min(hi),
        1e-13,
    )
    .0
    .max(best.0)
}
