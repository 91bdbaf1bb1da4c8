//! Complex field containers, the discrete spatial-spectrum contract, and the
//! free-space and tilted transfer functions.
//!
//! Transform layout: the forward transform is unnormalized and the inverse
//! carries `1/P`. Bin `m` of a length-`P` spectrum sampled at spacing `dy`
//! maps to `f_y = m/(P·dy)` for `m < P/2` and `(m − P)/(P·dy)` above, so
//! Parseval reads `Σ|E|²·dy = Σ|S|²·df·dy²` with `df = 1/(P·dy)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::domain::Point;
use crate::error::{Error, Result};

/// A complex field sampled along one transverse line.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    samples: Vec<Complex64>,
    dy: f64,
    y_offset: f64,
}

impl ComplexField {
    pub fn new(samples: Vec<Complex64>, dy: f64, y_offset: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Argument(format!(
                "a field needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if !(dy.is_finite() && dy > 0.0) {
            return Err(Error::Argument(format!("sample spacing must be positive, got {dy}")));
        }
        if samples.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Argument("field contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            dy,
            y_offset,
        })
    }

    pub fn zeros(len: usize, dy: f64, y_offset: f64) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
            dy,
            y_offset,
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn y_offset(&self) -> f64 {
        self.y_offset
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y_offset + j as f64 * self.dy
    }

    /// `Σ|E|²·dy`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.dy
    }
}

/// Smallest power of two `≥ padding_factor·n`.
pub fn padded_length(n: usize, padding_factor: usize) -> usize {
    (n * padding_factor.max(1)).next_power_of_two()
}

/// Spatial frequency of each bin in standard DFT order.
pub fn bin_frequencies(padded_length: usize, dy: f64) -> Vec<f64> {
    let p = padded_length as f64;
    (0..padded_length)
        .map(|m| {
            let m = if m < padded_length.div_ceil(2) {
                m as f64
            } else {
                m as f64 - p
            };
            m / (p * dy)
        })
        .collect()
}

/// A pair of forward and inverse plans of one length.
#[derive(Clone)]
pub struct Transform {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Normalized inverse (`1/P`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / self.len as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    pub fn forward_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    pub fn inverse_with_scratch(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
        let s = 1.0 / self.len as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }
}

/// Forward spectrum of `field` zero-padded to `padded_length` (field at the
/// start of the buffer).
pub fn spectrum(field: &ComplexField, padded_length: usize) -> Result<Vec<Complex64>> {
    if padded_length < field.len() {
        return Err(Error::Argument(format!(
            "padded length {padded_length} shorter than field length {}",
            field.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); padded_length];
    buf[..field.len()].copy_from_slice(field.samples());
    Transform::new(padded_length).forward(&mut buf);
    Ok(buf)
}

/// One transfer-function sample. `tilt = 0` gives the plain free-space form.
pub fn transfer_value(step: f64, tilt: f64, wavelength: f64, fy: f64) -> Complex64 {
    let c = tilt.cos();
    let a = wavelength * fy * c;
    let scale = 2.0 * PI / (wavelength * c);
    let q = 1.0 - a * a;
    if q >= 0.0 {
        Complex64::from_polar(1.0, -scale * step * q.sqrt())
    } else {
        Complex64::new((-scale * step.abs() * (-q).sqrt()).exp(), 0.0)
    }
}

/// Precomputed transfer function for one step and tilt.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    step: f64,
    tilt: f64,
    wavelength: f64,
    dy: f64,
    h: Vec<Complex64>,
    transform: Transform,
    apodization_width: f64,
}

/// Build the transfer function table. Negative `step` back-propagates.
pub fn make_propagator(
    step: f64,
    tilt: f64,
    wavelength: f64,
    padded_length: usize,
    dy: f64,
) -> Result<SpectralPropagator> {
    if !(tilt.abs() < PI / 2.0) {
        return Err(Error::Argument(format!("tilt {tilt} rad must satisfy |θ| < π/2")));
    }
    if padded_length < 2 {
        return Err(Error::Argument("padded length must be at least 2".into()));
    }
    let h = bin_frequencies(padded_length, dy)
        .into_iter()
        .map(|f| transfer_value(step, tilt, wavelength, f))
        .collect();
    Ok(SpectralPropagator {
        step,
        tilt,
        wavelength,
        dy,
        h,
        transform: Transform::new(padded_length),
        apodization_width: 0.0,
    })
}

/// Per-thread buffers for [`SpectralPropagator::apply_in_place`].
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectralPropagator {
    /// Enable edge apodization of `width·Ny` samples at each end (0 = off).
    pub fn with_apodization(mut self, width: f64) -> Self {
        self.apodization_width = width;
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn padded_length(&self) -> usize {
        self.h.len()
    }

    pub fn transfer(&self) -> &[Complex64] {
        &self.h
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            buf: vec![Complex64::new(0.0, 0.0); self.h.len()],
            scratch: vec![Complex64::new(0.0, 0.0); self.transform.scratch_len()],
        }
    }

    /// Propagate `samples` one step in place, then apodize.
    pub fn apply_in_place(&self, samples: &mut [Complex64], ws: &mut Workspace) {
        let p = self.h.len();
        let n = samples.len();
        debug_assert!(n <= p);
        if ws.buf.len() != p {
            *ws = self.workspace();
        }
        ws.buf[..n].copy_from_slice(samples);
        ws.buf[n..].iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        self.transform.forward_with_scratch(&mut ws.buf, &mut ws.scratch);
        for (b, h) in ws.buf.iter_mut().zip(&self.h) {
            *b *= h;
        }
        self.transform.inverse_with_scratch(&mut ws.buf, &mut ws.scratch);
        samples.copy_from_slice(&ws.buf[..n]);
        apodize(samples, self.apodization_width);
    }

    pub fn apply(&self, field: &ComplexField) -> Result<ComplexField> {
        if (field.dy() - self.dy).abs() > 1e-12 * self.dy {
            return Err(Error::DimensionMismatch(format!(
                "field spacing {} differs from propagator spacing {}",
                field.dy(),
                self.dy
            )));
        }
        if field.len() > self.h.len() {
            return Err(Error::DimensionMismatch(format!(
                "field length {} exceeds padded length {}",
                field.len(),
                self.h.len()
            )));
        }
        let mut out = field.clone();
        let mut ws = self.workspace();
        self.apply_in_place(out.samples_mut(), &mut ws);
        Ok(out)
    }
}

/// Raised-cosine taper of `round(width·n)` samples at both ends.
pub fn apodize(samples: &mut [Complex64], width: f64) {
    let n = samples.len();
    let w = ((width * n as f64).round() as usize).min(n / 2);
    for j in 0..w {
        let t = 0.5 * (1.0 - (PI * (j as f64 + 0.5) / w as f64).cos());
        samples[j] *= t;
        samples[n - 1 - j] *= t;
    }
}

pub fn apply_propagator(field: &ComplexField, p: &SpectralPropagator) -> Result<ComplexField> {
    p.apply(field)
}

/// Brute-force Rayleigh–Sommerfeld quadrature from a source line at
/// `source_x` to arbitrary targets.
pub fn direct_rs_field(
    source: &ComplexField,
    source_x: f64,
    targets: &[Point],
    k: f64,
) -> Result<Vec<Complex64>> {
    if let Some(t) = targets.iter().find(|t| !(t.x > source_x)) {
        return Err(Error::Argument(format!(
            "target ({}, {}) is not beyond the source plane x = {source_x}",
            t.x, t.y
        )));
    }
    let dy = source.dy();
    let nonzero: Vec<(f64, Complex64)> = source
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(j, c)| (source.y_at(j), *c))
        .collect();
    Ok(targets
        .par_iter()
        .map(|t| {
            let ddx = t.x - source_x;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(y, e) in &nonzero {
                let r = ddx.hypot(t.y - y);
                let kernel = Complex64::from_polar(ddx / (r * r), -k * r) * Complex64::new(1.0 / r, k);
                acc += e * kernel;
            }
            acc * (dy / (2.0 * PI))
        })
        .collect())
}

/// Sampling of a coverage map: `nx` columns at `x0 + k·dx`, `ny` rows at
/// `y0 + j·dy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
}

impl MapGrid {
    pub fn x_at(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn y_at(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn of(grid: &crate::domain::FieldGrid) -> Self {
        MapGrid {
            nx: grid.nx(),
            ny: grid.ny(),
            dx: grid.dx,
            dy: grid.dy,
            x0: 0.0,
            y0: grid.y0(),
        }
    }
}

/// Complex field over the domain, stored column-major (one column per x).
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageMap {
    grid: MapGrid,
    data: Vec<Complex64>,
}

impl CoverageMap {
    pub fn zeros(grid: MapGrid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.nx * grid.ny],
        }
    }

    pub fn from_data(grid: MapGrid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.nx * grid.ny {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}×{} map",
                data.len(),
                grid.nx,
                grid.ny
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &MapGrid {
        &self.grid
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn column(&self, k: usize) -> &[Complex64] {
        let ny = self.grid.ny;
        &self.data[k * ny..(k + 1) * ny]
    }

    pub fn column_mut(&mut self, k: usize) -> &mut [Complex64] {
        let ny = self.grid.ny;
        &mut self.data[k * ny..(k + 1) * ny]
    }

    pub fn columns(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.data.chunks_exact(self.grid.ny)
    }

    pub fn at(&self, k: usize, j: usize) -> Complex64 {
        self.data[k * self.grid.ny + j]
    }

    pub fn peak_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Cell-wise sum; grids must have the same shape.
    pub fn add_assign(&mut self, other: &CoverageMap) -> Result<()> {
        if self.grid.nx != other.grid.nx || self.grid.ny != other.grid.ny {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} vs {}×{}",
                self.grid.nx, self.grid.ny, other.grid.nx, other.grid.ny
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    /// Bilinear interpolation; `None` outside the sampled rectangle.
    pub fn bilinear(&self, x: f64, y: f64) -> Option<Complex64> {
        let g = &self.grid;
        let fx = (x - g.x0) / g.dx;
        let fy = (y - g.y0) / g.dy;
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > (g.nx - 1) as f64 + eps || fy > (g.ny - 1) as f64 + eps {
            return None;
        }
        let fx = fx.clamp(0.0, (g.nx - 1) as f64);
        let fy = fy.clamp(0.0, (g.ny - 1) as f64);
        let k = (fx.floor() as usize).min(g.nx.saturating_sub(2));
        let j = (fy.floor() as usize).min(g.ny.saturating_sub(2));
        let tx = fx - k as f64;
        let ty = fy - j as f64;
        if g.nx == 1 {
            let a = self.at(0, j);
            let b = self.at(0, j + 1);
            return Some(a * (1.0 - ty) + b * ty);
        }
        let a = self.at(k, j) * (1.0 - ty) + self.at(k, j + 1) * ty;
        let b = self.at(k + 1, j) * (1.0 - ty) + self.at(k + 1, j + 1) * ty;
        Some(a * (1.0 - tx) + b * tx)
    }
}
