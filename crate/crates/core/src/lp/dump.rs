//! Binary field dumps: `"DPFLD1"`, `u32` point count, `f64` half-length, then
//! the samples, all little-endian.
//!
//! A banded field is written as one dump per real component: band 0 to
//! `<stem>.dpfld`, band `m` envelopes to `<stem>.b<m>re.dpfld` and
//! `<stem>.b<m>im.dpfld`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lp::field::Field;

pub const MAGIC: &[u8; 6] = b"DPFLD1";

pub fn write_samples(path: &Path, half_length: f64, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(18 + 8 * values.len());
    buf.extend_from_slice(MAGIC);
    let n = u32::try_from(values.len()).map_err(|_| Error::arg("too many samples for a dump"))?;
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&half_length.to_le_bytes());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Returns `(half_length, samples)`.
pub fn read_samples(path: &Path) -> Result<(f64, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let bad = |reason: &str| Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    if bytes.len() < 18 || &bytes[..6] != MAGIC {
        return Err(bad("missing DPFLD1 header"));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(bytes[10..18].try_into().unwrap());
    if bytes.len() != 18 + 8 * n {
        return Err(bad("sample count does not match file length"));
    }
    let vals = bytes[18..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((l, vals))
}

/// Write every active band of `f`; returns the files written.
pub fn write_field(dir: &Path, stem: &str, f: &Field) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let l = f.grid().half_length();
    let mut out = Vec::new();
    let zeros = vec![0.0; f.grid().num_points()];
    let base = dir.join(format!("{stem}.dpfld"));
    match f.band_values(0) {
        Some(v) => write_samples(&base, l, &v.iter().map(|c| c.re).collect::<Vec<_>>())?,
        None => write_samples(&base, l, &zeros)?,
    }
    out.push(base);
    for m in f.active_bands().into_iter().filter(|&m| m > 0) {
        let v = f.band_values(m).unwrap();
        let re = dir.join(format!("{stem}.b{m}re.dpfld"));
        let im = dir.join(format!("{stem}.b{m}im.dpfld"));
        write_samples(&re, l, &v.iter().map(|c| c.re).collect::<Vec<_>>())?;
        write_samples(&im, l, &v.iter().map(|c| c.im).collect::<Vec<_>>())?;
        out.push(re);
        out.push(im);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::grid::GridSpec;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.dpfld");
        let v: Vec<f64> = (0..32).map(|i| (i as f64).sqrt() - 2.0).collect();
        write_samples(&p, 3.5, &v).unwrap();
        let (l, w) = read_samples(&p).unwrap();
        assert_eq!(l, 3.5);
        assert_eq!(v, w);
        let raw = fs::read(&p).unwrap();
        assert_eq!(&raw[..6], b"DPFLD1");
        assert_eq!(u32::from_le_bytes(raw[6..10].try_into().unwrap()), 32);
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.dpfld");
        write_samples(&p, 1.0, &[1.0, 2.0]).unwrap();
        let mut raw = fs::read(&p).unwrap();
        raw.pop();
        fs::write(&p, raw).unwrap();
        assert!(matches!(read_samples(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn banded_field_writes_components() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::modulated(16, PI, 40.0, 1).unwrap();
        let f = Field::from_band_values(g, 1, &vec![Complex64::new(0.5, -0.25); 16]).unwrap();
        let files = write_field(dir.path(), "rho", &f).unwrap();
        assert_eq!(files.len(), 3);
        let (_, im) = read_samples(&files[2]).unwrap();
        assert!(im.iter().all(|&v| (v + 0.25).abs() < 1e-15));
    }
}
