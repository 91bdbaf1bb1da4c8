//! Map comparison metrics and beam diagnostics.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::CoverageMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub rmse: f64,
    pub ncc_peak: f64,
    /// Lag `(columns, rows)` of the correlation peak.
    pub peak_offset: (i64, i64),
}

fn same_shape(a: &CoverageMap, b: &CoverageMap) -> Result<()> {
    if a.nx() != b.nx() || a.ny() != b.ny() {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} vs {}×{}",
            a.nx(),
            a.ny(),
            b.nx(),
            b.ny()
        )));
    }
    Ok(())
}

fn normalized_intensity(m: &CoverageMap) -> Result<Vec<f64>> {
    let i: Vec<f64> = m.data().iter().map(|c| c.norm_sqr()).collect();
    let max = i.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::ZeroMap);
    }
    Ok(i.into_iter().map(|v| v / max).collect())
}

/// Root-mean-square difference of max-normalized intensities.
pub fn rmse(a: &CoverageMap, b: &CoverageMap) -> Result<f64> {
    same_shape(a, b)?;
    let ia = normalized_intensity(a)?;
    let ib = normalized_intensity(b)?;
    let sum: f64 = ia.iter().zip(&ib).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sum / ia.len() as f64).sqrt())
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Zero-mean, unit-norm copy; errors if the input is constant.
fn standardize(v: &[f64]) -> Result<Vec<f64>> {
    let centered = centered(v);
    let norm = centered.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroMap);
    }
    Ok(centered.into_iter().map(|x| x / norm).collect())
}

/// Full cross-correlation `R(l) = Σ_p A(p)·B(p + l)` of two real
/// `nx × ny` arrays (column-major) via zero-padded transforms. Returns
/// `R` indexed by lag in `[−(n−1), n−1]` per axis.
pub fn cross_correlation(a: &[f64], b: &[f64], nx: usize, ny: usize) -> Vec<Vec<f64>> {
    let px = (2 * nx - 1).next_power_of_two();
    let py = (2 * ny - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fy = planner.plan_fft_forward(py);
    let iy = planner.plan_fft_inverse(py);
    let fx = planner.plan_fft_forward(px);
    let ix = planner.plan_fft_inverse(px);
    let load = |v: &[f64]| {
        let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
        for k in 0..nx {
            for j in 0..ny {
                buf[k * py + j] = Complex64::new(v[k * ny + j], 0.0);
            }
        }
        buf
    };
    let transform2 = |buf: &mut Vec<Complex64>, inverse: bool| {
        let (ty, tx) = if inverse { (&iy, &ix) } else { (&fy, &fx) };
        for col in buf.chunks_exact_mut(py) {
            ty.process(col);
        }
        let mut row = vec![Complex64::new(0.0, 0.0); px];
        for j in 0..py {
            for k in 0..px {
                row[k] = buf[k * py + j];
            }
            tx.process(&mut row);
            for k in 0..px {
                buf[k * py + j] = row[k];
            }
        }
    };
    let mut sa = load(a);
    let mut sb = load(b);
    transform2(&mut sa, false);
    transform2(&mut sb, false);
    for (x, y) in sa.iter_mut().zip(&sb) {
        *x = x.conj() * y;
    }
    transform2(&mut sa, true);
    let scale = 1.0 / (px * py) as f64;
    let mut out = vec![vec![0.0; 2 * ny - 1]; 2 * nx - 1];
    for (lx, row) in out.iter_mut().enumerate() {
        let dx = lx as i64 - (nx as i64 - 1);
        let kx = dx.rem_euclid(px as i64) as usize;
        for (ly, v) in row.iter_mut().enumerate() {
            let dy = ly as i64 - (ny as i64 - 1);
            let ky = dy.rem_euclid(py as i64) as usize;
            *v = sa[kx * py + ky].re * scale;
        }
    }
    out
}

/// Peak of the normalized cross-correlation of two real arrays and its lag.
pub fn ncc_peak_real(a: &[f64], b: &[f64], nx: usize, ny: usize) -> Result<(f64, (i64, i64))> {
    if a.len() != nx * ny || b.len() != nx * ny {
        return Err(Error::DimensionMismatch(format!(
            "arrays of {} and {} values for a {nx}×{ny} shape",
            a.len(),
            b.len()
        )));
    }
    let sa = standardize(a)?;
    let sb = standardize(b)?;
    let r = cross_correlation(&sa, &sb, nx, ny);
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for (lx, row) in r.iter().enumerate() {
        for (ly, v) in row.iter().enumerate() {
            if *v > best.0 {
                best = (*v, (lx as i64 - (nx as i64 - 1), ly as i64 - (ny as i64 - 1)));
            }
        }
    }
    // zero lag is recomputed as dot/√(‖a‖²‖b‖²) from the centered inputs:
    // √(d·d) = d exactly, so identical magnitudes give exactly 1
    let ca = centered(a);
    let cb = centered(b);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let zero = dot(&ca, &cb) / (dot(&ca, &ca) * dot(&cb, &cb)).sqrt();
    if zero >= best.0 - 1e-12 {
        best = (zero, (0, 0));
    }
    Ok((best.0.min(1.0), best.1))
}

/// NCC peak of two magnitude maps.
pub fn ncc_peak(a: &CoverageMap, b: &CoverageMap) -> Result<(f64, (i64, i64))> {
    same_shape(a, b)?;
    let ma: Vec<f64> = a.data().iter().map(|c| c.norm()).collect();
    let mb: Vec<f64> = b.data().iter().map(|c| c.norm()).collect();
    ncc_peak_real(&ma, &mb, a.nx(), a.ny())
}

pub fn compare(a: &CoverageMap, b: &CoverageMap) -> Result<MetricsReport> {
    let rmse = rmse(a, b)?;
    let (ncc_peak, peak_offset) = ncc_peak(a, b)?;
    Ok(MetricsReport {
        rmse,
        ncc_peak,
        peak_offset,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub y_peak: f64,
    pub peak: f64,
    pub width: f64,
}

/// Peak position, peak intensity and −3 dB width of one intensity profile
/// sampled at `y0 + j·dy`.
pub fn profile_peak(intensity: &[f64], y0: f64, dy: f64) -> (f64, f64, f64) {
    let (jm, &pm) = intensity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty profile");
    if pm <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let mut offset = 0.0;
    if jm > 0 && jm + 1 < intensity.len() {
        let (a, b, c) = (intensity[jm - 1], pm, intensity[jm + 1]);
        let den = a - 2.0 * b + c;
        if den < 0.0 {
            offset = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
        }
    }
    let half = pm / 2.0;
    let mut lo = jm as f64;
    for j in (0..jm).rev() {
        if intensity[j] < half {
            lo = j as f64 + (half - intensity[j]) / (intensity[j + 1] - intensity[j]);
            break;
        }
        lo = j as f64;
    }
    let mut hi = jm as f64;
    for j in jm + 1..intensity.len() {
        if intensity[j] < half {
            hi = j as f64 - (half - intensity[j]) / (intensity[j - 1] - intensity[j]);
            break;
        }
        hi = j as f64;
    }
    (y0 + (jm as f64 + offset) * dy, pm, (hi - lo) * dy)
}

/// Per-column intensity peak, parabolically refined, and −3 dB width.
pub fn beam_trajectory(map: &CoverageMap) -> Vec<TrajectoryPoint> {
    let g = *map.grid();
    map.columns()
        .enumerate()
        .map(|(k, col)| {
            let intensity: Vec<f64> = col.iter().map(|c| c.norm_sqr()).collect();
            let (y_peak, peak, width) = profile_peak(&intensity, g.y0, g.dy);
            TrajectoryPoint {
                x: g.x_at(k),
                y_peak,
                peak,
                width,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::MapGrid;

    fn grid(nx: usize, ny: usize) -> MapGrid {
        MapGrid {
            nx,
            ny,
            dx: 1.0,
            dy: 1.0,
            x0: 0.0,
            y0: 0.0,
        }
    }

    fn map_from(nx: usize, ny: usize, f: impl Fn(usize, usize) -> f64) -> CoverageMap {
        let mut data = Vec::with_capacity(nx * ny);
        for k in 0..nx {
            for j in 0..ny {
                data.push(Complex64::new(f(k, j), 0.0));
            }
        }
        CoverageMap::from_data(grid(nx, ny), data).unwrap()
    }

    #[test]
    fn rmse_extremes() {
        let a = map_from(4, 4, |_, _| 1.0);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b = map_from(4, 4, |k, j| if k == 0 && j == 0 { 1.0 } else { 0.0 });
        let r = rmse(&a, &b).unwrap();
        assert!((r - (15.0f64 / 16.0).sqrt()).abs() < 1e-15);
        let z = map_from(4, 4, |_, _| 0.0);
        assert!(matches!(rmse(&a, &z), Err(Error::ZeroMap)));
    }

    #[test]
    fn ncc_autocorrelation_is_one() {
        let a = map_from(8, 9, |k, j| ((k * 7 + j * 3) % 5) as f64);
        let (v, lag) = ncc_peak(&a, &a).unwrap();
        assert_eq!(lag, (0, 0));
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ncc_finds_shift() {
        let f = |k: f64, j: f64| (-((k - 12.0).powi(2) + (j - 14.0).powi(2)) / 18.0).exp();
        let a = map_from(32, 32, |k, j| f(k as f64, j as f64));
        let b = map_from(32, 32, |k, j| f(k as f64 - 3.0, j as f64 + 2.0));
        let (v, lag) = ncc_peak(&a, &b).unwrap();
        assert_eq!(lag, (3, -2));
        assert!(v >= 0.95);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = map_from(4, 4, |_, _| 1.0);
        let b = map_from(4, 5, |_, _| 1.0);
        assert!(matches!(rmse(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn profile_peak_of_gaussian() {
        let w = 5.0;
        let i: Vec<f64> = (0..41).map(|j| (-2.0 * ((j as f64 - 20.3) / w).powi(2)).exp()).collect();
        let (y, p, width) = profile_peak(&i, 0.0, 1.0);
        assert!((y - 20.3).abs() < 0.05);
        assert!(p > 0.9);
        let fwhm = w * (2.0 * 2f64.ln()).sqrt();
        assert!((width - fwhm).abs() < 0.05 * fwhm);
        assert_eq!(profile_peak(&[0.0; 5], 0.0, 1.0), (0.0, 0.0, 0.0));
    }
}
