//! Column-by-column marching with per-column blocker masks.

use std::ops::Range;

use num_complex::Complex64;

use crate::domain::{segment_direction, Blocker, FieldGrid, Point};
use crate::error::{Error, Result};
use crate::spectral::{
    make_propagator, padded_length, ComplexField, CoverageMap, MapGrid, SpectralPropagator, Workspace,
};

/// Per-column attenuation factors; absent columns are all ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockerMask {
    ny: usize,
    columns: Vec<Option<Vec<f64>>>,
}

impl BlockerMask {
    pub fn empty(nx: usize, ny: usize) -> Self {
        Self {
            ny,
            columns: vec![None; nx],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.columns.iter().all(Option::is_none)
    }

    pub fn nx(&self) -> usize {
        self.columns.len()
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn column(&self, k: usize) -> Option<&[f64]> {
        self.columns.get(k).and_then(|c| c.as_deref())
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.column(k).map_or(1.0, |c| c[j])
    }

    /// Multiply `factor` into cell `(k, j)`.
    pub fn apply_factor(&mut self, k: usize, j: usize, factor: f64) {
        let ny = self.ny;
        let col = self.columns[k].get_or_insert_with(|| vec![1.0; ny]);
        col[j] *= factor;
    }

    /// Indices of columns that carry a mask.
    pub fn masked_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(k, _)| k)
    }
}

/// A rotated rectangle with a uniform amplitude factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskShape {
    pub center: Point,
    /// Unit vector along the length.
    pub along: Point,
    pub half_length: f64,
    pub half_thickness: f64,
    pub factor: f64,
}

impl MaskShape {
    pub fn rectangle(center: Point, length: f64, thickness: f64, orientation: f64, factor: f64) -> Self {
        Self {
            center,
            along: segment_direction(orientation),
            half_length: length / 2.0,
            half_thickness: thickness / 2.0,
            factor,
        }
    }

    /// Zero-thickness segment; the rasterizer widens it to stay watertight.
    pub fn segment(center: Point, length: f64, orientation: f64, factor: f64) -> Self {
        Self::rectangle(center, length, 0.0, orientation, factor)
    }

    pub fn of_blocker(b: &Blocker) -> Self {
        Self::rectangle(b.center, b.length, b.thickness, b.orientation.radians(), b.attenuation)
    }

    fn normal(&self) -> Point {
        Point::new(self.along.y, -self.along.x)
    }

    fn corners(&self, ht: f64) -> [Point; 4] {
        let u = self.along.scale(self.half_length);
        let n = self.normal().scale(ht);
        [
            self.center + u + n,
            self.center + u - n,
            self.center - u + n,
            self.center - u - n,
        ]
    }
}

/// Rasterize shapes onto `grid`, optionally only inside the column range.
pub fn rasterize_shapes(shapes: &[MaskShape], grid: &MapGrid, columns: Option<Range<usize>>) -> BlockerMask {
    let mut mask = BlockerMask::empty(grid.nx, grid.ny);
    let range = columns.unwrap_or(0..grid.nx);
    let tol = 1e-9 * grid.dx.max(grid.dy);
    for s in shapes {
        if s.factor == 1.0 {
            continue;
        }
        let n = s.normal();
        let h_min = 0.5 * (grid.dx * n.x.abs() + grid.dy * n.y.abs());
        let ht = s.half_thickness.max(h_min) + tol;
        let hl = s.half_length + tol;
        let corners = s.corners(ht);
        let (xmin, xmax) = bounds(corners.iter().map(|p| p.x));
        let (ymin, ymax) = bounds(corners.iter().map(|p| p.y));
        let k_lo = (((xmin - grid.x0) / grid.dx).floor().max(0.0) as usize).max(range.start);
        let k_hi = ((((xmax - grid.x0) / grid.dx).ceil() + 1.0).max(0.0) as usize).min(range.end);
        let j_lo = ((ymin - grid.y0) / grid.dy).floor().max(0.0) as usize;
        let j_hi = ((((ymax - grid.y0) / grid.dy).ceil() + 1.0).max(0.0) as usize).min(grid.ny);
        for k in k_lo..k_hi {
            let x = grid.x_at(k);
            for j in j_lo..j_hi {
                let d = Point::new(x, grid.y_at(j)) - s.center;
                if d.dot(s.along).abs() <= hl && d.dot(n).abs() <= ht {
                    mask.apply_factor(k, j, s.factor);
                }
            }
        }
    }
    mask
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Rasterize scenario blockers on the global grid.
pub fn rasterize_blockers(blockers: &[Blocker], grid: &FieldGrid) -> BlockerMask {
    let shapes: Vec<MaskShape> = blockers.iter().map(MaskShape::of_blocker).collect();
    rasterize_shapes(&shapes, &MapGrid::of(grid), None)
}

/// Parameters shared by every step of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub wavelength: f64,
    pub tilt: f64,
    pub padding_factor: usize,
    pub apodization_width: f64,
}

impl SweepConfig {
    pub fn propagator(&self, step: f64, ny: usize, dy: f64) -> Result<SpectralPropagator> {
        Ok(
            make_propagator(step, self.tilt, self.wavelength, padded_length(ny, self.padding_factor), dy)?
                .with_apodization(self.apodization_width),
        )
    }
}

/// Stepwise marcher holding one column of state.
pub struct Marcher<'a> {
    propagator: &'a SpectralPropagator,
    workspace: Workspace,
    state: Vec<Complex64>,
}

impl<'a> Marcher<'a> {
    pub fn new(propagator: &'a SpectralPropagator, start: &[Complex64]) -> Self {
        Self {
            propagator,
            workspace: propagator.workspace(),
            state: start.to_vec(),
        }
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    /// Propagate one step, then multiply by the mask column if present.
    pub fn step(&mut self, mask: Option<&[f64]>) {
        self.propagator.apply_in_place(&mut self.state, &mut self.workspace);
        if let Some(m) = mask {
            apply_mask(&mut self.state, m);
        }
    }
}

fn apply_mask(col: &mut [Complex64], mask: &[f64]) {
    for (c, m) in col.iter_mut().zip(mask) {
        *c *= *m;
    }
}

/// Sweep `source` across `grid`: column 0 is the (masked) source, each later
/// column is the masked one-step propagation of the previous one.
pub fn propagate_sweep(
    source: &ComplexField,
    mask: &BlockerMask,
    grid: &MapGrid,
    cfg: &SweepConfig,
) -> Result<CoverageMap> {
    if source.len() != grid.ny {
        return Err(Error::DimensionMismatch(format!(
            "source has {} samples, grid has {}",
            source.len(),
            grid.ny
        )));
    }
    if !mask.is_empty() && (mask.nx() != grid.nx || mask.ny() != grid.ny) {
        return Err(Error::DimensionMismatch(format!(
            "mask is {}×{}, grid is {}×{}",
            mask.nx(),
            mask.ny(),
            grid.nx,
            grid.ny
        )));
    }
    let propagator = cfg.propagator(grid.dx, grid.ny, grid.dy)?;
    let mut map = CoverageMap::zeros(*grid);
    let mut first = source.samples().to_vec();
    if let Some(m) = mask.column(0) {
        apply_mask(&mut first, m);
    }
    map.column_mut(0).copy_from_slice(&first);
    let mut marcher = Marcher::new(&propagator, &first);
    for k in 1..grid.nx {
        if marcher.state().iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            break;
        }
        marcher.step(mask.column(k));
        map.column_mut(k).copy_from_slice(marcher.state());
    }
    Ok(map)
}

/// Free-space propagation over `distance` in a single transform round trip,
/// without apodization.
pub fn one_shot_propagate(
    source: &ComplexField,
    distance: f64,
    wavelength: f64,
    padding_factor: usize,
) -> Result<ComplexField> {
    if distance == 0.0 {
        return Ok(source.clone());
    }
    let p = make_propagator(
        distance,
        0.0,
        wavelength,
        padded_length(source.len(), padding_factor),
        source.dy(),
    )?;
    p.apply(source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Angle, PhysicalParams};

    fn airy_blocker() -> Blocker {
        Blocker {
            center: Point::new(0.15, -0.07),
            length: 0.1,
            thickness: 0.05,
            orientation: Angle::ZERO,
            attenuation: 0.0,
        }
    }

    #[test]
    fn blocker_cells_match_rectangle() {
        let lambda = PhysicalParams::from_ghz(100.0).wavelength();
        let grid = FieldGrid::new(0.3, 0.4, lambda / 2.0);
        let mask = rasterize_blockers(&[airy_blocker()], &grid);
        let g = MapGrid::of(&grid);
        for k in 0..g.nx {
            for j in 0..g.ny {
                let (x, y) = (g.x_at(k), g.y_at(j));
                let inside = (0.125..=0.175).contains(&x) && (-0.12..=-0.02).contains(&y);
                let near_edge = (x - 0.125).abs() < 1e-9
                    || (x - 0.175).abs() < 1e-9
                    || (y + 0.12).abs() < 1e-9
                    || (y + 0.02).abs() < 1e-9;
                if !near_edge {
                    assert_eq!(mask.value(k, j) == 0.0, inside, "cell ({x}, {y})");
                }
            }
        }
    }

    #[test]
    fn overlapping_blockers_multiply() {
        let grid = FieldGrid::new(0.1, 0.1, 1e-3);
        let mut a = airy_blocker();
        a.center = Point::new(0.05, 0.0);
        a.attenuation = 0.5;
        let mut b = a.clone();
        b.center = Point::new(0.06, 0.01);
        let mask = rasterize_blockers(&[a, b], &grid);
        let g = MapGrid::of(&grid);
        let k = (0.055 / g.dx).round() as usize;
        let j = ((0.005 - g.y0) / g.dy).round() as usize;
        assert!((mask.value(k, j) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_blockers_gives_empty_mask() {
        let grid = FieldGrid::new(0.1, 0.1, 1e-3);
        assert!(rasterize_blockers(&[], &grid).is_empty());
    }

    #[test]
    fn oblique_segment_is_watertight() {
        let g = MapGrid {
            nx: 200,
            ny: 200,
            dx: 1e-3,
            dy: 1e-3,
            x0: 0.0,
            y0: -0.1,
        };
        let s = MaskShape::segment(Point::new(0.1, 0.0), 0.1, 0.6, 0.0);
        let mask = rasterize_shapes(&[s], &g, None);
        // every row crossed by the segment has a blocked cell in it, and so
        // does every column, so no straight ray along x or y leaks through.
        let u = segment_direction(0.6);
        let ends = [s.center + u.scale(0.05), s.center - u.scale(0.05)];
        let (klo, khi) = bounds(ends.iter().map(|p| p.x / g.dx));
        for k in (klo.ceil() as usize)..=(khi.floor() as usize) {
            assert!((0..g.ny).any(|j| mask.value(k, j) == 0.0), "column {k}");
        }
        let (jlo, jhi) = bounds(ends.iter().map(|p| (p.y - g.y0) / g.dy));
        for j in (jlo.ceil() as usize)..=(jhi.floor() as usize) {
            assert!((0..g.nx).any(|k| mask.value(k, j) == 0.0), "row {j}");
        }
    }
}
