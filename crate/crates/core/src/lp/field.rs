use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lp::grid::GridSpec;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A real field on a [`GridSpec`], stored as normalised Fourier coefficients of
/// each band envelope (`None` marks an identically zero band).
///
/// Band `m` coefficient `a_p` contributes `a_p e^{i kappa_p (x + L)} e^{i m k_c x}`,
/// and bands `m > 0` are implicitly paired with their complex conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    bands: Vec<Option<Vec<Complex64>>>,
}

impl Field {
    pub fn zeros(grid: GridSpec) -> Self {
        Field {
            grid,
            bands: vec![None; grid.max_band() + 1],
        }
    }

    /// Real samples at the nodes, placed in band 0.
    pub fn from_values(grid: GridSpec, values: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_band_values(grid, 0, &c)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        let vals: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::from_values(grid, &vals).expect("node count matches grid")
    }

    /// Envelope samples of a single band. Band-0 samples must be real.
    pub fn from_band_values(grid: GridSpec, band: usize, values: &[Complex64]) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::arg(format!(
                "expected {} samples, got {}",
                grid.num_points(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::arg("non-finite sample"));
        }
        let mut buf = values.to_vec();
        if band == 0 {
            for v in buf.iter_mut() {
                v.im = 0.0;
            }
        }
        fft::forward_normalized(&mut buf);
        buf[grid.num_points() / 2] = ZERO;
        Self::from_band_coeffs(grid, band, buf)
    }

    pub fn from_band_coeffs(grid: GridSpec, band: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let mut f = Field::zeros(grid);
        f.set_band(band, Some(coeffs))?;
        Ok(f)
    }

    pub fn set_band(&mut self, band: usize, coeffs: Option<Vec<Complex64>>) -> Result<()> {
        if band > self.grid.max_band() {
            return Err(Error::arg(format!(
                "band {band} exceeds the grid's {} bands",
                self.grid.max_band()
            )));
        }
        if let Some(c) = &coeffs {
            if c.len() != self.grid.num_points() {
                return Err(Error::arg(format!(
                    "band {band} has {} coefficients, grid has {}",
                    c.len(),
                    self.grid.num_points()
                )));
            }
        }
        self.bands[band] = coeffs;
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn band(&self, m: usize) -> Option<&[Complex64]> {
        self.bands.get(m).and_then(|b| b.as_deref())
    }

    pub fn active_bands(&self) -> Vec<usize> {
        (0..self.bands.len()).filter(|&m| self.bands[m].is_some()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bands
            .iter()
            .flatten()
            .all(|b| b.iter().all(|c| *c == ZERO))
    }

    /// Envelope samples of band `m` at the nodes.
    pub fn band_values(&self, m: usize) -> Option<Vec<Complex64>> {
        self.band(m).map(|c| {
            let mut buf = c.to_vec();
            fft::inverse(&mut buf);
            if m == 0 {
                for v in buf.iter_mut() {
                    v.im = 0.0;
                }
            }
            buf
        })
    }

    /// Real node values of a field without modulated bands.
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.active_bands().iter().any(|&m| m > 0) {
            return Err(Error::arg(
                "field carries modulated bands; use band_values or node_values",
            ));
        }
        Ok(self
            .band_values(0)
            .map(|v| v.into_iter().map(|c| c.re).collect())
            .unwrap_or_else(|| vec![0.0; self.grid.num_points()]))
    }

    pub fn node_values(&self) -> NodeValues {
        NodeValues {
            grid: self.grid,
            bands: (0..self.bands.len()).map(|m| self.band_values(m)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Field {
        let mut out = self.clone();
        for c in out.bands.iter_mut().flatten().flat_map(|b| b.iter_mut()) {
            *c *= s;
        }
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        for (m, ob) in other.bands.iter().enumerate() {
            let Some(ob) = ob else { continue };
            match &mut out.bands[m] {
                Some(b) => {
                    for (x, y) in b.iter_mut().zip(ob) {
                        *x += a * y;
                    }
                }
                slot @ None => *slot = Some(ob.iter().map(|y| a * y).collect()),
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpy(-1.0, other)
    }

    /// Apply the Fourier multiplier `symbol(xi)`, `xi` being the signed physical
    /// frequency. The symbol must satisfy `symbol(-xi) = conj(symbol(xi))`.
    pub fn apply(&self, symbol: impl Fn(f64) -> Complex64) -> Field {
        let mut out = self.clone();
        for (m, band) in out.bands.iter_mut().enumerate() {
            let Some(b) = band else { continue };
            for (p, c) in b.iter_mut().enumerate() {
                if *c != ZERO {
                    *c *= symbol(self.grid.frequency(m, p));
                }
            }
        }
        out
    }

    /// Real, even multiplier in `|xi|`; exact zeros stay zero.
    pub fn apply_radial(&self, symbol: impl Fn(f64) -> f64) -> Field {
        self.apply(|xi| Complex64::new(symbol(xi.abs()), 0.0))
    }

    pub fn derivative(&self) -> Field {
        let mut out = self.apply(|xi| Complex64::new(0.0, xi));
        out.zero_nyquist();
        out
    }

    /// `(1 - d^2)^{-1}`.
    pub fn helmholtz_inverse(&self) -> Field {
        self.apply(|xi| Complex64::new(1.0 / (1.0 + xi * xi), 0.0))
    }

    /// `d (1 - d^2)^{-1}`, applied as one multiplier.
    pub fn dx_helmholtz_inverse(&self) -> Field {
        let mut out = self.apply(|xi| Complex64::new(0.0, xi / (1.0 + xi * xi)));
        out.zero_nyquist();
        out
    }

    /// `1 - d^2`.
    pub fn helmholtz(&self) -> Field {
        self.apply(|xi| Complex64::new(1.0 + xi * xi, 0.0))
    }

    fn zero_nyquist(&mut self) {
        let half = self.grid.num_points() / 2;
        for b in self.bands.iter_mut().flatten() {
            b[half] = ZERO;
        }
    }

    /// Dealiased product.
    pub fn product(&self, other: &Field) -> Result<Field> {
        let a = Padded::new(self);
        if std::ptr::eq(self, other) {
            return sum_of_products(&[(1.0, &a, &a)]);
        }
        let b = Padded::new(other);
        sum_of_products(&[(1.0, &a, &b)])
    }

    /// Spectral energy `sum |a|^2` with conjugate partners counted, restricted to
    /// frequencies accepted by `keep`.
    pub fn spectral_energy(&self, keep: impl Fn(f64) -> bool) -> f64 {
        let mut e = 0.0;
        for (m, b) in self.bands.iter().enumerate() {
            let Some(b) = b else { continue };
            let w = if m == 0 { 1.0 } else { 2.0 };
            for (p, c) in b.iter().enumerate() {
                if keep(self.grid.frequency(m, p).abs()) {
                    e += w * c.norm_sqr();
                }
            }
        }
        e
    }

    /// Largest `|xi|` carrying a coefficient above `tol * max |coefficient|`.
    pub fn max_frequency(&self, tol: f64) -> f64 {
        let amax = self
            .bands
            .iter()
            .flatten()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |a, c| a.max(c.norm()));
        if amax == 0.0 {
            return 0.0;
        }
        let mut best = 0.0f64;
        for (m, b) in self.bands.iter().enumerate() {
            let Some(b) = b else { continue };
            for (p, c) in b.iter().enumerate() {
                if c.norm() > tol * amax {
                    best = best.max(self.grid.frequency(m, p).abs());
                }
            }
        }
        best
    }

    pub fn is_finite(&self) -> bool {
        self.bands
            .iter()
            .flatten()
            .flat_map(|b| b.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Exact point evaluation by direct summation, `O(N)` per active band.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (m, b) in self.bands.iter().enumerate() {
            let Some(b) = b else { continue };
            let env = eval_envelope(&self.grid, b, x);
            if m == 0 {
                acc += env.re;
            } else {
                let ph = Complex64::from_polar(1.0, m as f64 * self.grid.carrier() * x);
                acc += 2.0 * (env * ph).re;
            }
        }
        acc
    }

    /// Envelope value of band `m` at `x` by direct summation.
    pub fn eval_band(&self, m: usize, x: f64) -> Complex64 {
        match self.band(m) {
            Some(b) => {
                let v = eval_envelope(&self.grid, b, x);
                if m == 0 {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                }
            }
            None => ZERO,
        }
    }

    /// Largest imaginary part of the band-0 samples relative to their size.
    pub fn imag_residue(&self) -> f64 {
        let Some(b) = self.band(0) else { return 0.0 };
        let mut buf = b.to_vec();
        fft::inverse(&mut buf);
        let scale = buf.iter().fold(0.0f64, |a, v| a.max(v.re.abs()));
        let im = buf.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
        if scale == 0.0 {
            im
        } else {
            im / scale
        }
    }
}

/// `sum_p a_p e^{i kappa_p (x + L)}` with twiddles reseeded every 64 terms.
pub(crate) fn eval_envelope(grid: &GridSpec, coeffs: &[Complex64], x: f64) -> Complex64 {
    let n = coeffs.len();
    let theta = grid.fundamental() * (x + grid.half_length());
    let mut acc = coeffs[0];
    let step = Complex64::from_polar(1.0, theta);
    let stepc = step.conj();
    let mut wp = Complex64::new(1.0, 0.0);
    let mut wn = Complex64::new(1.0, 0.0);
    for s in 1..n / 2 {
        if s % 64 == 0 {
            wp = Complex64::from_polar(1.0, s as f64 * theta);
            wn = wp.conj();
        } else {
            wp *= step;
            wn *= stepc;
        }
        acc += coeffs[s] * wp + coeffs[n - s] * wn;
    }
    acc
}

/// Node samples of every band of a field (or of a composed field, which need
/// not be band-limited on the grid).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeValues {
    pub(crate) grid: GridSpec,
    pub(crate) bands: Vec<Option<Vec<Complex64>>>,
}

impl NodeValues {
    pub fn zeros(grid: GridSpec) -> Self {
        NodeValues {
            grid,
            bands: vec![None; grid.max_band() + 1],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn band(&self, m: usize) -> Option<&[Complex64]> {
        self.bands.get(m).and_then(|b| b.as_deref())
    }

    pub fn set_band(&mut self, m: usize, v: Option<Vec<Complex64>>) {
        self.bands[m] = v;
    }

    /// Pointwise product with a real, unmodulated `g`.
    pub fn times_real(&self, g: &NodeValues) -> Result<NodeValues> {
        self.grid.ensure_same(&g.grid)?;
        if g.bands.iter().skip(1).any(|b| b.is_some()) {
            return Err(Error::arg("multiplier carries modulated bands"));
        }
        let mut out = NodeValues::zeros(self.grid);
        let Some(g0) = g.band(0) else { return Ok(out) };
        for (m, b) in self.bands.iter().enumerate() {
            if let Some(b) = b {
                out.bands[m] = Some(b.iter().zip(g0).map(|(v, w)| v * w.re).collect());
            }
        }
        Ok(out)
    }

    /// Project back onto the grid's bands.
    pub fn to_field(&self) -> Result<Field> {
        let mut out = Field::zeros(self.grid);
        for (m, b) in self.bands.iter().enumerate() {
            if let Some(b) = b {
                out = out.add(&Field::from_band_values(self.grid, m, b)?)?;
            }
        }
        Ok(out)
    }

    /// Physical value at node `i`.
    pub fn value(&self, i: usize) -> f64 {
        let x = self.grid.x(i);
        let mut acc = 0.0;
        for (m, b) in self.bands.iter().enumerate() {
            let Some(b) = b else { continue };
            if m == 0 {
                acc += b[i].re;
            } else {
                let ph = Complex64::from_polar(1.0, m as f64 * self.grid.carrier() * x);
                acc += 2.0 * (b[i] * ph).re;
            }
        }
        acc
    }

    pub fn axpy(&self, a: f64, other: &NodeValues) -> Result<NodeValues> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        for (m, ob) in other.bands.iter().enumerate() {
            let Some(ob) = ob else { continue };
            match &mut out.bands[m] {
                Some(b) => {
                    for (x, y) in b.iter_mut().zip(ob) {
                        *x += a * y;
                    }
                }
                slot @ None => *slot = Some(ob.iter().map(|y| a * y).collect()),
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> NodeValues {
        let mut out = self.clone();
        for v in out.bands.iter_mut().flatten().flat_map(|b| b.iter_mut()) {
            *v *= s;
        }
        out
    }

    /// Band values at node `i`, skipping inactive bands.
    pub(crate) fn at(&self, i: usize, buf: &mut Vec<(usize, Complex64)>) {
        buf.clear();
        for (m, b) in self.bands.iter().enumerate() {
            if let Some(b) = b {
                buf.push((m, b[i]));
            }
        }
    }

    /// Real node values for a field without modulated bands.
    pub fn real_values(&self) -> Result<Vec<f64>> {
        if self.bands.iter().skip(1).any(|b| b.is_some()) {
            return Err(Error::arg("node values carry modulated bands"));
        }
        Ok(match &self.bands[0] {
            Some(b) => b.iter().map(|c| c.re).collect(),
            None => vec![0.0; self.grid.num_points()],
        })
    }
}

/// Envelope samples on the 3/2-refined grid, ready for dealiased products.
pub struct Padded {
    grid: GridSpec,
    len: usize,
    bands: Vec<Option<Vec<Complex64>>>,
}

impl Padded {
    pub fn new(f: &Field) -> Padded {
        Self::with_len(f, 3 * f.grid.num_points() / 2)
    }

    /// Samples on the grid itself, so products alias.
    pub fn aliased(f: &Field) -> Padded {
        Self::with_len(f, f.grid.num_points())
    }

    fn with_len(f: &Field, len: usize) -> Padded {
        let bands = f
            .bands
            .iter()
            .map(|b| {
                b.as_ref().map(|c| {
                    let mut v = fft::pad(c, len);
                    fft::inverse(&mut v);
                    v
                })
            })
            .collect();
        Padded {
            grid: f.grid,
            len,
            bands,
        }
    }

    fn signed(&self, s: i64) -> Option<(bool, &[Complex64])> {
        let m = s.unsigned_abs() as usize;
        self.bands
            .get(m)
            .and_then(|b| b.as_deref())
            .map(|b| (s < 0, b))
    }
}

/// Dealiased `sum_k w_k a_k b_k`, projected onto the grid's bands.
pub fn sum_of_products(terms: &[(f64, &Padded, &Padded)]) -> Result<Field> {
    let Some(&(_, first, _)) = terms.first() else {
        return Err(Error::arg("empty product"));
    };
    let grid = first.grid;
    for (_, a, b) in terms {
        grid.ensure_same(&a.grid)?;
        grid.ensure_same(&b.grid)?;
        if a.len != first.len || b.len != first.len {
            return Err(Error::arg("mixed dealiased and aliased operands"));
        }
    }
    let pmax = grid.max_band() as i64;
    let len = first.len;
    let mut out = Field::zeros(grid);
    for p in 0..=pmax {
        let mut acc: Option<Vec<Complex64>> = None;
        for &(w, a, b) in terms {
            for sa in -pmax..=pmax {
                let sb = p - sa;
                if sb.abs() > pmax {
                    continue;
                }
                let (Some((ca, va)), Some((cb, vb))) = (a.signed(sa), b.signed(sb)) else {
                    continue;
                };
                let buf = acc.get_or_insert_with(|| vec![ZERO; len]);
                for ((o, x), y) in buf.iter_mut().zip(va).zip(vb) {
                    let x = if ca { x.conj() } else { *x };
                    let y = if cb { y.conj() } else { *y };
                    *o += w * x * y;
                }
            }
        }
        if let Some(mut buf) = acc {
            if p == 0 {
                for v in buf.iter_mut() {
                    v.im = 0.0;
                }
            }
            if buf.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::BlowUp {
                    t: f64::NAN,
                    what: "non-finite value in a product".into(),
                });
            }
            fft::forward_normalized(&mut buf);
            out.bands[p as usize] = Some(fft::truncate(&buf, grid.num_points()));
        }
    }
    Ok(out)
}
