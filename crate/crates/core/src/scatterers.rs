//! Virtual sources on reflector and RIS segments: incident-field sampling,
//! specular, rough and RIS masks, local-frame sweeps and accumulation back
//! onto the global grid.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{
    segment_direction, segment_normal, FieldGrid, PhaseModel, Point, Reflector, RisPanel, RoughnessProfile,
};
use crate::error::{Error, Result};
use crate::propagation::{propagate_sweep, rasterize_shapes, MaskShape, Marcher, SweepConfig};
use crate::spectral::{bin_frequencies, transfer_value, ComplexField, CoverageMap, MapGrid, Transform};

/// Stable identifier of a scene object; the derived order is the reduction
/// order used when maps are summed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum ObjectId {
    Tx(usize),
    Blocker(usize),
    Reflector(usize),
    Ris(usize),
}

/// Which face of a segment a virtual source radiates from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Front,
    Back,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Front => 1.0,
            Side::Back => -1.0,
        }
    }
}

/// A straight segment in global coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub center: Point,
    pub length: f64,
    /// Radians from `+y`, counterclockwise.
    pub orientation: f64,
}

impl Segment {
    pub fn of_reflector(r: &Reflector) -> Self {
        Self {
            center: r.center,
            length: r.length,
            orientation: r.orientation.radians(),
        }
    }

    pub fn of_ris(r: &RisPanel) -> Self {
        Self {
            center: r.center,
            length: r.length,
            orientation: r.orientation.radians(),
        }
    }

    pub fn direction(&self) -> Point {
        segment_direction(self.orientation)
    }

    pub fn normal(&self) -> Point {
        segment_normal(self.orientation)
    }

    pub fn point(&self, s: f64) -> Point {
        self.center + self.direction().scale(s)
    }

    /// Sample offsets `j·ds` with `|j·ds| ≤ L/2`, symmetric about the center.
    pub fn sample_offsets(&self, ds: f64) -> Vec<f64> {
        let half = (self.length / 2.0 / ds + 1e-9).floor() as i64;
        (-half..=half).map(|j| j as f64 * ds).collect()
    }
}

/// Rigid frame with propagation axis `ex` and transverse axis `ey`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFrame {
    pub origin: Point,
    pub ex: Point,
    pub ey: Point,
    pub normal_sign: f64,
}

impl LocalFrame {
    pub fn identity() -> Self {
        Self {
            origin: Point::new(0.0, 0.0),
            ex: Point::new(1.0, 0.0),
            ey: Point::new(0.0, 1.0),
            normal_sign: 1.0,
        }
    }

    /// Frame at the segment center propagating along the outward normal of
    /// `side`.
    pub fn for_segment(segment: &Segment, side: Side) -> Self {
        let ex = segment.normal().scale(side.sign());
        Self {
            origin: segment.center,
            ex,
            ey: Point::new(-ex.y, ex.x),
            normal_sign: side.sign(),
        }
    }

    pub fn for_aperture(center: Point, orientation: f64) -> Self {
        Self::for_segment(
            &Segment {
                center,
                length: 0.0,
                orientation,
            },
            Side::Front,
        )
    }

    /// Angle of `ex` from the global `+x` axis, in `(−π, π]`.
    pub fn rotation(&self) -> f64 {
        self.ex.y.atan2(self.ex.x)
    }

    pub fn to_local(&self, p: Point) -> Point {
        let d = p - self.origin;
        Point::new(d.dot(self.ex), d.dot(self.ey))
    }

    pub fn to_global(&self, l: Point) -> Point {
        self.origin + self.ex.scale(l.x) + self.ey.scale(l.y)
    }

    pub fn dir_to_local(&self, v: Point) -> Point {
        Point::new(v.dot(self.ex), v.dot(self.ey))
    }

    pub fn dir_to_global(&self, v: Point) -> Point {
        self.ex.scale(v.x) + self.ey.scale(v.y)
    }

    pub fn shape_to_local(&self, s: &MaskShape) -> MaskShape {
        MaskShape {
            center: self.to_local(s.center),
            along: self.dir_to_local(s.along),
            ..*s
        }
    }
}

/// A secondary aperture: samples along local `y'` at `x' = 0`.
#[derive(Clone, Debug)]
pub struct VirtualSource {
    pub field: ComplexField,
    pub frame: LocalFrame,
    pub bounce_depth: u32,
    pub parent: ObjectId,
    pub side: Side,
    /// Nominal global propagation direction of the radiated carrier.
    pub direction: Point,
}

/// A completed sweep in its own frame, with the obstacles it saw.
#[derive(Clone, Debug)]
pub struct NodeSweep {
    pub frame: LocalFrame,
    pub map: CoverageMap,
    pub shapes: Vec<(ObjectId, MaskShape)>,
    pub config: SweepConfig,
    pub direction: Point,
}

/// Local grid covering the global domain on the `x' ≥ 0` side of `frame`,
/// aligned so that `y' = 0` is a sample row.
pub fn local_grid(frame: &LocalFrame, global: &FieldGrid) -> Option<MapGrid> {
    let g = MapGrid::of(global);
    let corners = [
        Point::new(g.x0, g.y0),
        Point::new(g.x_at(g.nx - 1), g.y0),
        Point::new(g.x0, g.y_at(g.ny - 1)),
        Point::new(g.x_at(g.nx - 1), g.y_at(g.ny - 1)),
    ]
    .map(|p| frame.to_local(p));
    let xmax = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    if xmax < g.dx {
        return None;
    }
    let ylo = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let yhi = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let j_lo = (ylo / g.dy).floor() as i64 - 1;
    let j_hi = (yhi / g.dy).ceil() as i64 + 1;
    Some(MapGrid {
        nx: (xmax / g.dx).ceil() as usize + 1,
        ny: (j_hi - j_lo + 1) as usize,
        dx: g.dx,
        dy: g.dy,
        x0: 0.0,
        y0: j_lo as f64 * g.dy,
    })
}

/// Band-limited evaluation of a sweep between its columns.
pub struct FieldProbe {
    grid: MapGrid,
    config: SweepConfig,
    k_lo: usize,
    spectra: BTreeMap<usize, Vec<Complex64>>,
    freqs: Vec<f64>,
}

impl FieldProbe {
    /// Prepare evaluation for local `x` in `[x_min, x_max]`. When `exclude`
    /// is set, the columns in range are re-marched without that object's
    /// mask.
    pub fn new(node: &NodeSweep, exclude: Option<ObjectId>, x_min: f64, x_max: f64) -> Result<Self> {
        let g = *node.map.grid();
        let p = crate::spectral::padded_length(g.ny, node.config.padding_factor);
        let transform = Transform::new(p);
        let reach = 0.5 * (g.dx + g.dy);
        let k_lo = (((x_min - reach - g.x0) / g.dx).floor() - 1.0).max(0.0) as usize;
        let k_lo = k_lo.min(g.nx - 1);
        let k_hi = ((((x_max - g.x0) / g.dx).ceil() + 1.0).max(0.0) as usize).min(g.nx - 1);
        let k_hi = k_hi.max(k_lo);
        let spectrum_of = |col: &[Complex64]| {
            let mut buf = vec![Complex64::new(0.0, 0.0); p];
            buf[..col.len()].copy_from_slice(col);
            transform.forward(&mut buf);
            buf
        };
        let mut spectra = BTreeMap::new();
        match exclude {
            None => {
                for k in k_lo..=k_hi {
                    spectra.insert(k, spectrum_of(node.map.column(k)));
                }
            }
            Some(id) => {
                let shapes: Vec<MaskShape> = node
                    .shapes
                    .iter()
                    .filter(|(o, _)| *o != id)
                    .map(|(_, s)| *s)
                    .collect();
                let mask = rasterize_shapes(&shapes, &g, Some(k_lo..k_hi + 1));
                let propagator = node.config.propagator(g.dx, g.ny, g.dy)?;
                let mut marcher = Marcher::new(&propagator, node.map.column(k_lo));
                spectra.insert(k_lo, spectrum_of(marcher.state()));
                for k in k_lo + 1..=k_hi {
                    marcher.step(mask.column(k));
                    spectra.insert(k, spectrum_of(marcher.state()));
                }
            }
        }
        Ok(Self {
            grid: g,
            config: node.config,
            k_lo,
            spectra,
            freqs: bin_frequencies(p, g.dy),
        })
    }

    /// Field at local point `p`; zero outside the swept region.
    pub fn eval(&self, p: Point) -> Complex64 {
        let g = &self.grid;
        let fx = (p.x - g.x0) / g.dx;
        if fx < -1e-9 || fx > (g.nx - 1) as f64 + 1e-9 {
            return Complex64::new(0.0, 0.0);
        }
        let k_hi = *self.spectra.keys().next_back().unwrap_or(&self.k_lo);
        let k = ((fx + 1e-9).floor().max(0.0) as usize).clamp(self.k_lo, k_hi);
        let spec = &self.spectra[&k];
        let step = p.x - g.x_at(k);
        let dy = p.y - g.y0;
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, &f) in spec.iter().zip(&self.freqs) {
            let h = transfer_value(step, self.config.tilt, self.config.wavelength, f);
            acc += s * h * Complex64::from_polar(1.0, 2.0 * PI * f * dy);
        }
        acc / spec.len() as f64
    }
}

/// Incident field on `segment` from `node`, sampled at `s = j·ds` along the
/// segment direction (ascending `s`). `exclude` removes the segment's own
/// mask so the field is the one arriving at its face.
pub fn sample_incident_field(
    node: &NodeSweep,
    segment: &Segment,
    exclude: Option<ObjectId>,
    ds: f64,
) -> Result<ComplexField> {
    let offsets = segment.sample_offsets(ds);
    if offsets.len() < 2 {
        return Err(Error::Argument(format!(
            "segment of length {} is shorter than two samples",
            segment.length
        )));
    }
    let local: Vec<Point> = offsets
        .iter()
        .map(|&s| node.frame.to_local(segment.point(s)))
        .collect();
    let g = node.map.grid();
    let xmax_grid = g.x_at(g.nx - 1);
    if local.iter().all(|p| p.x < 0.0 || p.x > xmax_grid) {
        return Ok(ComplexField::zeros(offsets.len(), ds, offsets[0]));
    }
    let x_min = local.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).max(0.0);
    let x_max = local.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).min(xmax_grid);
    let probe = FieldProbe::new(node, exclude, x_min, x_max)?;
    let samples: Vec<Complex64> = local.par_iter().map(|&p| probe.eval(p)).collect();
    ComplexField::new(samples, ds, offsets[0])
}

/// Global propagation direction after reflection of `incoming` at the
/// segment, with an extra tangential phase gradient `g` (rad/m along the
/// segment direction).
pub fn reflected_direction(incoming: Point, segment: &Segment, side: Side, gradient: f64, k: f64) -> Point {
    let u = segment.direction();
    let t = (incoming.dot(u) - gradient / k).clamp(-1.0, 1.0);
    u.scale(t) + segment.normal().scale(side.sign() * (1.0 - t * t).sqrt())
}

fn to_local_order(incident: &ComplexField, side: Side, mask: impl Fn(usize) -> Complex64) -> ComplexField {
    let n = incident.len();
    let samples: Vec<Complex64> = (0..n)
        .map(|j| {
            let i = if side == Side::Front { j } else { n - 1 - j };
            incident.samples()[i] * mask(i)
        })
        .collect();
    let y_offset = match side {
        Side::Front => incident.y_offset(),
        Side::Back => -incident.y_at(n - 1),
    };
    ComplexField::new(samples, incident.dy(), y_offset).expect("mask values are finite")
}

/// Specular virtual source: `Γ·E_inc`, radiated from the incident side.
pub fn make_specular_source(
    incident: &ComplexField,
    reflector: &Reflector,
    id: ObjectId,
    side: Side,
    incoming: Point,
    k: f64,
    depth: u32,
) -> VirtualSource {
    let segment = Segment::of_reflector(reflector);
    let gamma = reflector.reflection_coefficient;
    VirtualSource {
        field: to_local_order(incident, side, |_| Complex64::new(gamma, 0.0)),
        frame: LocalFrame::for_segment(&segment, side),
        bounce_depth: depth,
        parent: id,
        side,
        direction: reflected_direction(incoming, &segment, side, 0.0, k),
    }
}

/// Gaussian-correlated heights: white noise smoothed by `exp(−2t²/L_c²)`
/// (correlation `exp(−τ²/L_c²)`), then shifted to zero mean and scaled to
/// sample standard deviation `h_rms`.
pub fn generate_heights(n: usize, ds: f64, h_rms: f64, lc: f64, seed: u64) -> Vec<f64> {
    if n == 0 || h_rms == 0.0 {
        return vec![0.0; n];
    }
    let m = (2.0 * lc / ds).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * m)
        .map(|i| {
            let t = (i as f64 - m as f64) * ds;
            (-2.0 * t * t / (lc * lc)).exp()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..n + 2 * m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut h: Vec<f64> = (0..n)
        .map(|i| kernel.iter().zip(&noise[i..]).map(|(a, b)| a * b).sum())
        .collect();
    let mean = h.iter().sum::<f64>() / n as f64;
    h.iter_mut().for_each(|v| *v -= mean);
    let std = (h.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if std == 0.0 {
        return vec![0.0; n];
    }
    h.iter_mut().for_each(|v| *v *= h_rms / std);
    h
}

/// Phase screen for one height value.
pub fn rough_phase(height: f64, wavelength: f64, model: PhaseModel) -> f64 {
    match model {
        PhaseModel::DoubledPhase => 2.0 * PI * (2.0 * PI * height / wavelength),
        PhaseModel::TwoWayPath => 4.0 * PI * height / wavelength,
    }
}

/// Rough-surface virtual source: the specular source times a random phase
/// screen. Heights are indexed along the segment direction so both faces
/// see the same surface.
#[allow(clippy::too_many_arguments)]
pub fn make_rough_source(
    incident: &ComplexField,
    reflector: &Reflector,
    roughness: &RoughnessProfile,
    id: ObjectId,
    side: Side,
    incoming: Point,
    k: f64,
    depth: u32,
) -> VirtualSource {
    let wavelength = 2.0 * PI / k;
    let heights = generate_heights(
        incident.len(),
        incident.dy(),
        roughness.h_rms,
        roughness.correlation_length,
        roughness.seed,
    );
    let gamma = reflector.reflection_coefficient;
    let segment = Segment::of_reflector(reflector);
    VirtualSource {
        field: to_local_order(incident, side, |i| {
            Complex64::from_polar(gamma, rough_phase(heights[i], wavelength, roughness.phase_model))
        }),
        frame: LocalFrame::for_segment(&segment, side),
        bounce_depth: depth,
        parent: id,
        side,
        direction: reflected_direction(incoming, &segment, side, 0.0, k),
    }
}

/// Element of the panel whose extent contains offset `s`.
pub fn ris_element(panel: &RisPanel, s: f64) -> usize {
    let e = ((s + panel.length / 2.0) / panel.element_spacing()).floor();
    (e.max(0.0) as usize).min(panel.element_count - 1)
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// RIS virtual source: each sample times `A·exp(jφ)` of its element.
pub fn make_ris_source(
    incident: &ComplexField,
    panel: &RisPanel,
    id: ObjectId,
    side: Side,
    incoming: Point,
    k: f64,
    depth: u32,
) -> VirtualSource {
    let segment = Segment::of_ris(panel);
    let weights: Vec<Complex64> = panel
        .amplitudes
        .iter()
        .zip(&panel.phases)
        .map(|(a, p)| Complex64::from_polar(*a, p.radians()))
        .collect();
    let gradient = if panel.element_count > 1 {
        panel
            .phases
            .windows(2)
            .map(|w| wrap(w[1].radians() - w[0].radians()))
            .sum::<f64>()
            / (panel.element_count - 1) as f64
            / panel.element_spacing()
    } else {
        0.0
    };
    VirtualSource {
        field: to_local_order(incident, side, |i| weights[ris_element(panel, incident.y_at(i))]),
        frame: LocalFrame::for_segment(&segment, side),
        bounce_depth: depth,
        parent: id,
        side,
        direction: reflected_direction(incoming, &segment, side, gradient, k),
    }
}

/// Place `samples` (at local `y' = y_offset + j·dy`) into a column of `grid`.
pub fn place_on_grid(field: &ComplexField, grid: &MapGrid) -> ComplexField {
    let mut col = vec![Complex64::new(0.0, 0.0); grid.ny];
    for (j, v) in field.samples().iter().enumerate() {
        let idx = ((field.y_at(j) - grid.y0) / grid.dy).round();
        if idx >= 0.0 && (idx as usize) < grid.ny {
            col[idx as usize] += v;
        }
    }
    ComplexField::new(col, grid.dy, grid.y0).expect("finite source samples")
}

/// Sweep a source in its own frame over the part of the global domain in
/// front of it. Every shape except the parent's own stays an obstacle.
pub fn sweep_in_frame(
    source: &ComplexField,
    frame: LocalFrame,
    parent: Option<ObjectId>,
    direction: Point,
    shapes: &[(ObjectId, MaskShape)],
    global: &FieldGrid,
    config: SweepConfig,
) -> Result<Option<NodeSweep>> {
    let Some(grid) = local_grid(&frame, global) else {
        return Ok(None);
    };
    let local_shapes: Vec<(ObjectId, MaskShape)> = shapes
        .iter()
        .filter(|(id, _)| Some(*id) != parent)
        .map(|(id, s)| (*id, frame.shape_to_local(s)))
        .collect();
    let plain: Vec<MaskShape> = local_shapes.iter().map(|(_, s)| *s).collect();
    let mask = rasterize_shapes(&plain, &grid, None);
    let column = place_on_grid(source, &grid);
    let map = propagate_sweep(&column, &mask, &grid, &config)?;
    Ok(Some(NodeSweep {
        frame,
        map,
        shapes: local_shapes,
        config,
        direction,
    }))
}

/// Sweep a virtual source. The tilt is 0 for the exact transfer model, or
/// the angle between the frame axis and `incoming` for the tilted one.
pub fn sweep_virtual_source(
    vs: &VirtualSource,
    shapes: &[(ObjectId, MaskShape)],
    global: &FieldGrid,
    config: SweepConfig,
) -> Result<Option<NodeSweep>> {
    sweep_in_frame(&vs.field, vs.frame, Some(vs.parent), vs.direction, shapes, global, config)
}

/// Tilt for the tilted transfer model.
pub fn frame_tilt(frame: &LocalFrame, incoming: Point) -> f64 {
    frame.ex.dot(incoming).abs().clamp(0.0, 1.0).acos().min(89f64.to_radians())
}

/// Add a local map into a global one. Each global cell on the `x' ≥ 0` side
/// receives the bilinear interpolation of the local field with the nominal
/// carrier `exp(−ik·d·r)` removed before and restored after.
pub fn accumulate_into_global(
    local: &CoverageMap,
    frame: &LocalFrame,
    direction: Point,
    k: f64,
    global: &mut CoverageMap,
) {
    let lg = *local.grid();
    let gg = *global.grid();
    let d = frame.dir_to_local(direction);
    let kd = Point::new(k * d.x, k * d.y);
    let carrier = |x: f64, y: f64| Complex64::from_polar(1.0, -(kd.x * x + kd.y * y));
    let eps = 1e-9;
    global
        .data_mut()
        .par_chunks_mut(gg.ny)
        .enumerate()
        .for_each(|(kc, col)| {
            let x = gg.x_at(kc);
            for (j, cell) in col.iter_mut().enumerate() {
                let l = frame.to_local(Point::new(x, gg.y_at(j)));
                if l.x < -eps * lg.dx {
                    continue;
                }
                let fx = (l.x - lg.x0) / lg.dx;
                let fy = (l.y - lg.y0) / lg.dy;
                if fx < -eps || fy < -eps || fx > (lg.nx - 1) as f64 + eps || fy > (lg.ny - 1) as f64 + eps {
                    continue;
                }
                let fx = fx.clamp(0.0, (lg.nx - 1) as f64);
                let fy = fy.clamp(0.0, (lg.ny - 1) as f64);
                let k0 = (fx.floor() as usize).min(lg.nx.saturating_sub(2));
                let j0 = (fy.floor() as usize).min(lg.ny - 2);
                let tx = fx - k0 as f64;
                let ty = fy - j0 as f64;
                let k1 = (k0 + 1).min(lg.nx - 1);
                let corner = |kk: usize, jj: usize| local.at(kk, jj) * carrier(lg.x_at(kk), lg.y_at(jj)).conj();
                let a = corner(k0, j0) * (1.0 - ty) + corner(k0, j0 + 1) * ty;
                let b = corner(k1, j0) * (1.0 - ty) + corner(k1, j0 + 1) * ty;
                let v = (a * (1.0 - tx) + b * tx) * carrier(l.x, l.y);
                *cell += v;
            }
        });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Angle;

    #[test]
    fn frame_round_trip() {
        let seg = Segment {
            center: Point::new(0.3, -0.1),
            length: 0.1,
            orientation: 0.7,
        };
        for side in [Side::Front, Side::Back] {
            let f = LocalFrame::for_segment(&seg, side);
            let p = Point::new(0.123, 0.456);
            let q = f.to_global(f.to_local(p));
            assert!((p - q).norm() < 1e-12);
            assert!((f.ex.dot(f.ey)).abs() < 1e-15);
            assert!((f.ex.x * f.ey.y - f.ex.y * f.ey.x - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn front_frame_of_zero_orientation_is_identity_rotation() {
        let f = LocalFrame::for_aperture(Point::new(0.0, 0.0), 0.0);
        assert_eq!(f.rotation(), 0.0);
        assert_eq!(f.ey, Point::new(-0.0, 1.0));
    }

    #[test]
    fn mirror_direction() {
        let seg = Segment {
            center: Point::new(0.6, 0.0),
            length: 0.2,
            orientation: 45f64.to_radians(),
        };
        let d = reflected_direction(Point::new(1.0, 0.0), &seg, Side::Back, 0.0, 1.0);
        assert!((d - Point::new(0.0, -1.0)).norm() < 1e-12);
        let normal = Segment {
            orientation: 0.0,
            ..seg
        };
        let d = reflected_direction(Point::new(1.0, 0.0), &normal, Side::Back, 0.0, 1.0);
        assert!((d - Point::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn heights_are_deterministic_and_scaled() {
        let a = generate_heights(500, 1e-3, 5e-4, 3e-3, 7);
        let b = generate_heights(500, 1e-3, 5e-4, 3e-3, 7);
        assert_eq!(a, b);
        let std = (a.iter().map(|v| v * v).sum::<f64>() / 500.0).sqrt();
        assert!((std - 5e-4).abs() < 1e-15);
        assert!(generate_heights(10, 1e-3, 0.0, 3e-3, 7).iter().all(|v| *v == 0.0));
        assert_ne!(a, generate_heights(500, 1e-3, 5e-4, 3e-3, 8));
    }

    #[test]
    fn ris_element_lookup() {
        let panel = RisPanel {
            center: Point::new(0.0, 0.0),
            length: 0.04,
            orientation: Angle::ZERO,
            element_count: 4,
            phases: vec![Angle::ZERO; 4],
            amplitudes: vec![1.0; 4],
            transmittance: 0.0,
        };
        assert_eq!(ris_element(&panel, -0.02), 0);
        assert_eq!(ris_element(&panel, -0.005), 1);
        assert_eq!(ris_element(&panel, 0.005), 2);
        assert_eq!(ris_element(&panel, 0.02), 3);
    }

    #[test]
    fn identity_accumulation_is_cellwise_sum() {
        let grid = MapGrid {
            nx: 5,
            ny: 6,
            dx: 1e-3,
            dy: 1e-3,
            x0: 0.0,
            y0: -3e-3,
        };
        let data: Vec<Complex64> = (0..30).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let local = CoverageMap::from_data(grid, data).unwrap();
        let mut global = CoverageMap::zeros(grid);
        accumulate_into_global(&local, &LocalFrame::identity(), Point::new(1.0, 0.0), 2000.0, &mut global);
        for (a, b) in global.data().iter().zip(local.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
