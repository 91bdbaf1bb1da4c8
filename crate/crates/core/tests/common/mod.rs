#![allow(dead_code)]

use num_complex::Complex64;
use nfwave_core::domain::{
    Angle, FieldGrid, PhysicalParams, Point, Reflector, Scenario, SolverSettings, TxAperture, WavefrontSpec,
};
use nfwave_core::spectral::{CoverageMap, MapGrid};

pub fn physical() -> PhysicalParams {
    PhysicalParams::from_ghz(100.0)
}

pub fn lambda() -> f64 {
    physical().wavelength()
}

/// Empty scenario at 100 GHz with `dy = λ/2`.
pub fn scenario(x_extent: f64, y_extent: f64) -> Scenario {
    let p = physical();
    Scenario {
        physical: p,
        grid: FieldGrid::new(x_extent, y_extent, p.wavelength() / 2.0),
        tx: Vec::new(),
        blockers: Vec::new(),
        reflectors: Vec::new(),
        ris: Vec::new(),
        rx: Vec::new(),
        solver: SolverSettings::default(),
    }
}

/// Aperture of `cells` elements spaced exactly one grid cell apart, so every
/// element sits on its own sample.
pub fn aperture(s: &Scenario, center: Point, cells: usize, orientation_deg: f64, excitation: WavefrontSpec) -> TxAperture {
    TxAperture {
        center,
        length: cells as f64 * s.grid.dy,
        orientation: Angle::from_degrees(orientation_deg),
        element_count: cells,
        excitation,
    }
}

/// Odd element count closest to `length/dy`.
pub fn cells_for(s: &Scenario, length: f64) -> usize {
    let n = (length / s.grid.dy).round() as usize;
    n | 1
}

pub fn mirror(center: Point, length: f64, orientation_deg: f64, gamma: f64) -> Reflector {
    Reflector {
        center,
        length,
        orientation: Angle::from_degrees(orientation_deg),
        reflection_coefficient: gamma,
        transmittance: 0.0,
        roughness: None,
    }
}

pub fn column_index(grid: &MapGrid, x: f64) -> usize {
    (((x - grid.x0) / grid.dx).round().max(0.0) as usize).min(grid.nx - 1)
}

pub fn row_index(grid: &MapGrid, y: f64) -> usize {
    (((y - grid.y0) / grid.dy).round().max(0.0) as usize).min(grid.ny - 1)
}

pub fn intensity_column(map: &CoverageMap, x: f64) -> Vec<f64> {
    map.column(column_index(map.grid(), x)).iter().map(|c| c.norm_sqr()).collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Band-limited value of a uniformly sampled line at fractional index `t`.
pub fn trig_interpolate(samples: &[Complex64], t: f64) -> Complex64 {
    let n = samples.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let f = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
        let mut coef = Complex64::new(0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            coef += v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * j as f64 / n as f64);
        }
        acc += coef * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f * t / n as f64);
    }
    acc / n as f64
}

/// Fresnel integrals `C(v)`, `S(v)` by composite Simpson quadrature.
pub fn fresnel(v: f64) -> (f64, f64) {
    let n = 20_000;
    let h = v / n as f64;
    let mut c = 0.0;
    let mut s = 0.0;
    for i in 0..=n {
        let t = i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let a = std::f64::consts::FRAC_PI_2 * t * t;
        c += w * a.cos();
        s += w * a.sin();
    }
    (c * h / 3.0, s * h / 3.0)
}

/// Knife-edge intensity relative to the unobstructed field at Fresnel
/// parameter `v` (positive on the lit side).
pub fn knife_edge_intensity(v: f64) -> f64 {
    let (c, s) = fresnel(v);
    0.5 * ((c + 0.5).powi(2) + (s + 0.5).powi(2))
}

/// Local maximum of `intensity` nearest to index `j0`, found by hill
/// climbing.
pub fn climb(intensity: &[f64], mut j: usize) -> usize {
    loop {
        let here = intensity[j];
        let up = if j + 1 < intensity.len() { intensity[j + 1] } else { f64::NEG_INFINITY };
        let down = if j > 0 { intensity[j - 1] } else { f64::NEG_INFINITY };
        if up > here && up >= down {
            j += 1;
        } else if down > here {
            j -= 1;
        } else {
            return j;
        }
    }
}

/// Full width at half maximum of the lobe whose maximum is at `jm`.
pub fn lobe_width(intensity: &[f64], jm: usize, dy: f64) -> f64 {
    let half = intensity[jm] / 2.0;
    let mut lo = 0.0;
    for j in (0..jm).rev() {
        if intensity[j] < half {
            lo = j as f64 + (half - intensity[j]) / (intensity[j + 1] - intensity[j]);
            break;
        }
    }
    let mut hi = (intensity.len() - 1) as f64;
    for j in jm + 1..intensity.len() {
        if intensity[j] < half {
            hi = j as f64 - (half - intensity[j]) / (intensity[j - 1] - intensity[j]);
            break;
        }
    }
    (hi - lo) * dy
}
