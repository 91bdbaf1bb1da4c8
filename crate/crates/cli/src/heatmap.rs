//! dB-scaled coverage heatmaps.
//!
//! Pixel `(k, row)` shows column `k` of the map, with row 0 at the largest
//! `y`. Each cell is `20·log10(|E|/max|E|)` clipped to `[−db_range, 0]`,
//! rescaled to `[0, 1]` and mapped through [`COLOR_TABLE`] by linear
//! interpolation between its evenly spaced stops.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};
use nfwave_core::domain::{segment_direction, segment_normal, Point, Scenario};
use nfwave_core::spectral::{CoverageMap, MapGrid};

pub const DEFAULT_DB_RANGE: f64 = 60.0;

/// Nine evenly spaced stops from the floor (dark purple) to the peak
/// (yellow).
pub const COLOR_TABLE: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

const REFLECTOR_COLOR: Rgb<u8> = Rgb([255, 255, 255]);
const BLOCKER_COLOR: Rgb<u8> = Rgb([255, 64, 64]);
const RIS_COLOR: Rgb<u8> = Rgb([0, 224, 255]);
const TX_COLOR: Rgb<u8> = Rgb([255, 160, 0]);
const RX_COLOR: Rgb<u8> = Rgb([255, 0, 255]);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatmapOptions {
    pub db_range: f64,
    pub overlay: bool,
}

impl Default for HeatmapOptions {
    fn default() -> Self {
        Self {
            db_range: DEFAULT_DB_RANGE,
            overlay: false,
        }
    }
}

/// Color for a normalized level in `[0, 1]`.
pub fn colormap(t: f64) -> Rgb<u8> {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (COLOR_TABLE.len() - 1) as f64;
    let i = (pos.floor() as usize).min(COLOR_TABLE.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (COLOR_TABLE[i], COLOR_TABLE[i + 1]);
    let mix = |c: usize| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8;
    Rgb([mix(0), mix(1), mix(2)])
}

/// Normalized dB level of every cell, column-major like the map.
pub fn db_levels(map: &CoverageMap, db_range: f64) -> Vec<f64> {
    let max = map.peak_abs();
    map.data()
        .iter()
        .map(|c| {
            if max == 0.0 || c.norm() == 0.0 {
                return 0.0;
            }
            let db = (20.0 * (c.norm() / max).log10()).max(-db_range);
            (db + db_range) / db_range
        })
        .collect()
}

pub fn render(map: &CoverageMap, scenario: Option<&Scenario>, opts: &HeatmapOptions) -> RgbImage {
    let g = *map.grid();
    let levels = db_levels(map, opts.db_range);
    let mut img = RgbImage::new(g.nx as u32, g.ny as u32);
    for k in 0..g.nx {
        for j in 0..g.ny {
            img.put_pixel(k as u32, (g.ny - 1 - j) as u32, colormap(levels[k * g.ny + j]));
        }
    }
    if let (true, Some(s)) = (opts.overlay, scenario) {
        draw_overlay(&mut img, &g, s);
    }
    img
}

pub fn render_png(map: &CoverageMap, scenario: Option<&Scenario>, opts: &HeatmapOptions) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    render(map, scenario, opts)
        .write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    out.into_inner()
}

fn to_pixel(g: &MapGrid, p: Point) -> (f64, f64) {
    ((p.x - g.x0) / g.dx, (g.ny - 1) as f64 - (p.y - g.y0) / g.dy)
}

fn draw_line(img: &mut RgbImage, g: &MapGrid, a: Point, b: Point, color: Rgb<u8>) {
    let (ax, ay) = to_pixel(g, a);
    let (bx, by) = to_pixel(g, b);
    let steps = (bx - ax).abs().max((by - ay).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let (x, y) = ((ax + t * (bx - ax)).round(), (ay + t * (by - ay)).round());
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
}

fn draw_segment(img: &mut RgbImage, g: &MapGrid, center: Point, length: f64, orientation: f64, color: Rgb<u8>) {
    let u = segment_direction(orientation).scale(length / 2.0);
    draw_line(img, g, center - u, center + u, color);
}

fn draw_overlay(img: &mut RgbImage, g: &MapGrid, s: &Scenario) {
    for b in &s.blockers {
        let th = b.orientation.radians();
        let u = segment_direction(th).scale(b.length / 2.0);
        let n = segment_normal(th).scale(b.thickness / 2.0);
        let corners = [b.center + u + n, b.center - u + n, b.center - u - n, b.center + u - n];
        for i in 0..4 {
            draw_line(img, g, corners[i], corners[(i + 1) % 4], BLOCKER_COLOR);
        }
    }
    for r in &s.reflectors {
        draw_segment(img, g, r.center, r.length, r.orientation.radians(), REFLECTOR_COLOR);
    }
    for r in &s.ris {
        draw_segment(img, g, r.center, r.length, r.orientation.radians(), RIS_COLOR);
    }
    for t in &s.tx {
        draw_segment(img, g, t.center, t.length, t.orientation.radians(), TX_COLOR);
    }
    for r in &s.rx {
        draw_segment(img, g, r.center, r.length.max(g.dy), r.orientation.radians(), RX_COLOR);
    }
}
