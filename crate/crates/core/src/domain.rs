//! Scenario description: physical constants, sampling grid, sources, scene
//! objects, receivers and solver settings, plus the scenario file format.
//!
//! Conventions used throughout the crate:
//!
//! * Global frame: `+x` is the propagation axis, `y` the transverse axis, the
//!   TX plane is column 0 at `x = 0`.
//! * Orientation of any line-like object is the angle of its segment measured
//!   from the `+y` axis, counterclockwise positive. An orientation of 0 means
//!   the object lies along `y` and its positive normal points along `+x`.
//! * Angles are written in degrees in scenario files and stored as [`Angle`],
//!   which keeps the file value so that files round-trip bit-exactly.
//! * Lengths are meters, frequency is GHz in the file.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point or vector in the 2D plane, serialized as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// An angle whose canonical value is the degree value read from the file.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub const fn from_degrees(degrees: f64) -> Self {
        Angle(degrees)
    }

    pub fn from_radians(radians: f64) -> Self {
        Angle(radians.to_degrees())
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

/// Unit vector along a segment with the given orientation (radians from `+y`).
pub fn segment_direction(orientation: f64) -> Point {
    Point::new(-orientation.sin(), orientation.cos())
}

/// Positive unit normal of a segment with the given orientation.
pub fn segment_normal(orientation: f64) -> Point {
    Point::new(orientation.cos(), orientation.sin())
}

/// Carrier frequency; wavelength and wavenumber are derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub frequency_ghz: f64,
}

impl PhysicalParams {
    pub fn from_ghz(frequency_ghz: f64) -> Self {
        Self { frequency_ghz }
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_ghz * 1e9
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }
}

/// Rectangular sampling domain. Column `k` sits at `x = k·dx`, sample `j` at
/// `y = (j - ny/2)·dy`, so `y = 0` is always a grid line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "FieldGridFile")]
pub struct FieldGrid {
    pub x_extent: f64,
    pub y_extent: f64,
    pub dy: f64,
    /// Propagation step. Defaults to `dy` (square pixels).
    pub dx: f64,
}

#[derive(Deserialize)]
struct FieldGridFile {
    x_extent: f64,
    y_extent: f64,
    dy: f64,
    dx: Option<f64>,
}

impl From<FieldGridFile> for FieldGrid {
    fn from(f: FieldGridFile) -> Self {
        FieldGrid {
            x_extent: f.x_extent,
            y_extent: f.y_extent,
            dy: f.dy,
            dx: f.dx.unwrap_or(f.dy),
        }
    }
}

impl FieldGrid {
    pub fn new(x_extent: f64, y_extent: f64, dy: f64) -> Self {
        Self {
            x_extent,
            y_extent,
            dy,
            dx: dy,
        }
    }

    pub fn with_dx(mut self, dx: f64) -> Self {
        self.dx = dx;
        self
    }

    /// Number of transverse samples.
    pub fn ny(&self) -> usize {
        ((self.y_extent / self.dy) - 1e-9).ceil().max(2.0) as usize
    }

    /// Number of propagation columns.
    pub fn nx(&self) -> usize {
        ((self.x_extent / self.dx) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn y0(&self) -> f64 {
        -((self.ny() / 2) as f64) * self.dy
    }

    pub fn y_at(&self, j: usize) -> f64 {
        (j as f64 - (self.ny() / 2) as f64) * self.dy
    }

    pub fn x_at(&self, k: usize) -> f64 {
        k as f64 * self.dx
    }

    /// Whether `p` lies inside the domain rectangle, with a one-cell margin.
    pub fn contains(&self, p: Point) -> bool {
        let mx = self.dx.max(self.dy);
        p.x >= -mx && p.x <= self.x_extent + mx && p.y.abs() <= self.y_extent / 2.0 + mx
    }
}

/// Aperture excitation kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WavefrontSpec {
    /// Unit amplitude, zero phase.
    Uniform,
    Gaussian {
        waist: f64,
    },
    Focused {
        focal_length: f64,
    },
    Bessel {
        #[serde(rename = "axicon_angle_deg")]
        axicon_angle: Angle,
    },
    Airy {
        curvature: f64,
        focal_length: f64,
    },
    /// Side file with one `amplitude phase_deg` line per element.
    Custom {
        profile: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TxAperture {
    pub center: Point,
    pub length: f64,
    #[serde(rename = "orientation_deg", default)]
    pub orientation: Angle,
    pub element_count: usize,
    pub excitation: WavefrontSpec,
}

impl TxAperture {
    pub fn element_spacing(&self) -> f64 {
        self.length / self.element_count as f64
    }

    /// Aligned apertures sit on the source column of the global sweep.
    pub fn is_aligned(&self) -> bool {
        self.center.x == 0.0 && self.orientation.degrees() == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blocker {
    pub center: Point,
    pub length: f64,
    pub thickness: f64,
    #[serde(rename = "orientation_deg", default)]
    pub orientation: Angle,
    /// Amplitude factor: 1 is transparent, 0 is opaque.
    #[serde(default)]
    pub attenuation: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// `exp(j·2π·φ)` with `φ = 2π·H/λ`.
    #[default]
    DoubledPhase,
    /// `exp(j·4π·H/λ)`, the normal-incidence two-way path difference.
    TwoWayPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughnessProfile {
    pub h_rms: f64,
    pub correlation_length: f64,
    pub seed: u64,
    #[serde(default)]
    pub phase_model: PhaseModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reflector {
    pub center: Point,
    pub length: f64,
    #[serde(rename = "orientation_deg", default)]
    pub orientation: Angle,
    pub reflection_coefficient: f64,
    #[serde(default)]
    pub transmittance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roughness: Option<RoughnessProfile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RisPanel {
    pub center: Point,
    pub length: f64,
    #[serde(rename = "orientation_deg", default)]
    pub orientation: Angle,
    pub element_count: usize,
    #[serde(rename = "phases_deg")]
    pub phases: Vec<Angle>,
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub transmittance: f64,
}

impl RisPanel {
    pub fn element_spacing(&self) -> f64 {
        self.length / self.element_count as f64
    }
}

/// A complex weight serialized as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Weight(pub Complex64);

impl From<[f64; 2]> for Weight {
    fn from(v: [f64; 2]) -> Self {
        Weight(Complex64::new(v[0], v[1]))
    }
}

impl From<Weight> for [f64; 2] {
    fn from(w: Weight) -> Self {
        [w.0.re, w.0.im]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Combining {
    #[default]
    FullyDigital,
    Analog {
        weights: Vec<Weight>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RxArray {
    pub center: Point,
    pub length: f64,
    #[serde(rename = "orientation_deg", default)]
    pub orientation: Angle,
    pub element_count: usize,
    #[serde(default)]
    pub combining: Combining,
}

impl RxArray {
    /// Element positions, evenly spaced at the centers of `element_count`
    /// equal sub-segments.
    pub fn element_positions(&self) -> Vec<Point> {
        let u = segment_direction(self.orientation.radians());
        let spacing = self.length / self.element_count as f64;
        (0..self.element_count)
            .map(|i| {
                let s = (i as f64 + 0.5) * spacing - self.length / 2.0;
                self.center + u.scale(s)
            })
            .collect()
    }
}

/// Transfer function used for virtual-source sweeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferModel {
    /// Untilted transfer function in the segment-normal frame; the oblique
    /// content is carried by the sampled field itself.
    #[default]
    Exact,
    /// Tilted transfer function `H_m(f_y|θ)` with θ the angle between the
    /// frame normal and the parent propagation axis.
    Tilted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_bounce_depth: u32,
    pub source_energy_threshold: f64,
    pub padding_factor: usize,
    pub apodization_width: f64,
    pub transfer: TransferModel,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_bounce_depth: 3,
            source_energy_threshold: 1e-3,
            padding_factor: 2,
            apodization_width: 0.05,
            transfer: TransferModel::Exact,
        }
    }
}

/// Complete environment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub physical: PhysicalParams,
    pub grid: FieldGrid,
    pub tx: Vec<TxAperture>,
    #[serde(default)]
    pub blockers: Vec<Blocker>,
    #[serde(default)]
    pub reflectors: Vec<Reflector>,
    #[serde(default)]
    pub ris: Vec<RisPanel>,
    #[serde(default)]
    pub rx: Vec<RxArray>,
    #[serde(default)]
    pub solver: SolverSettings,
}

/// Parse and validate a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_column(text, s.start))
            .unwrap_or((0, 0));
        Error::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Serialize a scenario to the file format.
pub fn serialize_scenario(s: &Scenario) -> String {
    toml::to_string(s).expect("scenario values are always representable")
}

/// Parse and validate the JSON form used by the HTTP API.
pub fn parse_scenario_json(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Load a scenario file; relative custom-profile paths are resolved against
/// the file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let mut s = parse_scenario(&text)?;
    if let Some(dir) = path.parent() {
        s.resolve_paths(dir);
    }
    Ok(s)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Two-times-aperture-squared-over-wavelength boundary of the radiating near
/// field. For a 10 cm aperture at 100 GHz this gives about 6.7 m; a plain
/// `D²/λ` convention would give half of that.
pub fn fraunhofer_distance(aperture_length: f64, wavelength: f64) -> f64 {
    2.0 * aperture_length * aperture_length / wavelength
}

fn check(cond: bool, field: impl FnOnce() -> String, message: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(field(), message()))
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    check(
        v.is_finite() && v > 0.0,
        || field.to_string(),
        || format!("must be positive and finite (got {v})"),
    )
}

fn unit_interval(v: f64, field: &str) -> Result<()> {
    check(
        v.is_finite() && (0.0..=1.0).contains(&v),
        || field.to_string(),
        || format!("must lie in [0, 1] (got {v})"),
    )
}

fn finite_angle(a: Angle, field: &str) -> Result<()> {
    check(
        a.degrees().is_finite(),
        || field.to_string(),
        || "angle must be finite".to_string(),
    )
}

impl Scenario {
    /// Minimal valid scenario: 100 GHz, 1 m × 0.5 m, λ/2 sampling, one
    /// uniform 10 cm aperture at the origin.
    pub fn example() -> Self {
        let physical = PhysicalParams::from_ghz(100.0);
        let dy = physical.wavelength() / 2.0;
        Scenario {
            physical,
            grid: FieldGrid::new(1.0, 0.5, dy),
            tx: vec![TxAperture {
                center: Point::new(0.0, 0.0),
                length: 0.1,
                orientation: Angle::ZERO,
                element_count: (0.1 / dy).round() as usize,
                excitation: WavefrontSpec::Uniform,
            }],
            blockers: Vec::new(),
            reflectors: Vec::new(),
            ris: Vec::new(),
            rx: Vec::new(),
            solver: SolverSettings::default(),
        }
    }

    /// Resolve relative custom-profile paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for tx in &mut self.tx {
            if let WavefrontSpec::Custom { profile } = &mut tx.excitation {
                if profile.is_relative() {
                    *profile = base.join(&*profile);
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.physical.frequency_ghz;
        positive(f, "physical.frequency_ghz")?;
        let lambda = self.physical.wavelength();

        let g = &self.grid;
        positive(g.x_extent, "grid.x_extent")?;
        positive(g.y_extent, "grid.y_extent")?;
        positive(g.dy, "grid.dy")?;
        positive(g.dx, "grid.dx")?;
        check(
            g.dy <= lambda / 2.0 * (1.0 + 1e-9),
            || "grid.dy".into(),
            || {
                format!(
                    "resolution coarser than λ/2 (dy = {} m exceeds λ/2 = {} m)",
                    g.dy,
                    lambda / 2.0
                )
            },
        )?;
        check(g.ny() >= 2, || "grid.y_extent".into(), || "needs at least 2 transverse samples".into())?;

        check(!self.tx.is_empty(), || "tx".into(), || "at least one TX aperture is required".into())?;
        for (i, tx) in self.tx.iter().enumerate() {
            let p = format!("tx[{i}]");
            positive(tx.length, &format!("{p}.length"))?;
            finite_angle(tx.orientation, &format!("{p}.orientation_deg"))?;
            check(tx.element_count >= 1, || format!("{p}.element_count"), || "must be at least 1".into())?;
            self.segment_in_domain(tx.center, tx.length, tx.orientation, &p)?;
            match &tx.excitation {
                WavefrontSpec::Uniform | WavefrontSpec::Custom { .. } => {}
                WavefrontSpec::Gaussian { waist } => positive(*waist, &format!("{p}.excitation.waist"))?,
                WavefrontSpec::Focused { focal_length } => {
                    positive(*focal_length, &format!("{p}.excitation.focal_length"))?
                }
                WavefrontSpec::Bessel { axicon_angle } => check(
                    axicon_angle.degrees() > 0.0 && axicon_angle.degrees() < 90.0,
                    || format!("{p}.excitation.axicon_angle_deg"),
                    || format!("must lie in (0, 90) degrees (got {})", axicon_angle.degrees()),
                )?,
                WavefrontSpec::Airy {
                    curvature,
                    focal_length,
                } => {
                    check(
                        curvature.is_finite(),
                        || format!("{p}.excitation.curvature"),
                        || "must be finite".into(),
                    )?;
                    positive(*focal_length, &format!("{p}.excitation.focal_length"))?
                }
            }
        }

        for (i, b) in self.blockers.iter().enumerate() {
            let p = format!("blockers[{i}]");
            positive(b.length, &format!("{p}.length"))?;
            positive(b.thickness, &format!("{p}.thickness"))?;
            finite_angle(b.orientation, &format!("{p}.orientation_deg"))?;
            unit_interval(b.attenuation, &format!("{p}.attenuation"))?;
            let u = segment_direction(b.orientation.radians());
            let n = segment_normal(b.orientation.radians());
            for (a, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let corner = b.center + u.scale(a * b.length / 2.0) + n.scale(t * b.thickness / 2.0);
                check(
                    corner.is_finite() && self.grid.contains(corner),
                    || format!("{p}.center"),
                    || "blocker extends outside the domain".into(),
                )?;
            }
        }

        for (i, r) in self.reflectors.iter().enumerate() {
            let p = format!("reflectors[{i}]");
            positive(r.length, &format!("{p}.length"))?;
            finite_angle(r.orientation, &format!("{p}.orientation_deg"))?;
            unit_interval(r.reflection_coefficient, &format!("{p}.reflection_coefficient"))?;
            unit_interval(r.transmittance, &format!("{p}.transmittance"))?;
            check(
                r.reflection_coefficient.powi(2) + r.transmittance.powi(2) <= 1.0 + 1e-12,
                || format!("{p}.transmittance"),
                || "reflection_coefficient² + transmittance² exceeds 1".into(),
            )?;
            self.segment_in_domain(r.center, r.length, r.orientation, &p)?;
            if let Some(rough) = &r.roughness {
                check(
                    rough.h_rms.is_finite() && rough.h_rms >= 0.0,
                    || format!("{p}.roughness.h_rms"),
                    || "must be non-negative".into(),
                )?;
                positive(rough.correlation_length, &format!("{p}.roughness.correlation_length"))?;
                check(
                    rough.seed <= i64::MAX as u64,
                    || format!("{p}.roughness.seed"),
                    || "must be below 2^63".into(),
                )?;
            }
        }

        for (i, r) in self.ris.iter().enumerate() {
            let p = format!("ris[{i}]");
            positive(r.length, &format!("{p}.length"))?;
            finite_angle(r.orientation, &format!("{p}.orientation_deg"))?;
            check(r.element_count >= 1, || format!("{p}.element_count"), || "must be at least 1".into())?;
            check(
                r.phases.len() == r.element_count,
                || format!("{p}.phases_deg"),
                || format!("expected {} entries, found {}", r.element_count, r.phases.len()),
            )?;
            check(
                r.amplitudes.len() == r.element_count,
                || format!("{p}.amplitudes"),
                || format!("expected {} entries, found {}", r.element_count, r.amplitudes.len()),
            )?;
            for (e, a) in r.amplitudes.iter().enumerate() {
                unit_interval(*a, &format!("{p}.amplitudes[{e}]"))?;
            }
            for (e, a) in r.phases.iter().enumerate() {
                finite_angle(*a, &format!("{p}.phases_deg[{e}]"))?;
            }
            unit_interval(r.transmittance, &format!("{p}.transmittance"))?;
            self.segment_in_domain(r.center, r.length, r.orientation, &p)?;
        }

        for (i, r) in self.rx.iter().enumerate() {
            let p = format!("rx[{i}]");
            check(
                r.length.is_finite() && r.length >= 0.0,
                || format!("{p}.length"),
                || "must be non-negative".into(),
            )?;
            check(r.element_count >= 1, || format!("{p}.element_count"), || "must be at least 1".into())?;
            if let Combining::Analog { weights } = &r.combining {
                check(
                    weights.len() == r.element_count,
                    || format!("{p}.combining.weights"),
                    || format!("expected {} weights, found {}", r.element_count, weights.len()),
                )?;
            }
            self.segment_in_domain(r.center, r.length, r.orientation, &p)?;
        }

        let s = &self.solver;
        check(
            s.source_energy_threshold.is_finite() && s.source_energy_threshold >= 0.0,
            || "solver.source_energy_threshold".into(),
            || "must be non-negative".into(),
        )?;
        check(s.padding_factor >= 1, || "solver.padding_factor".into(), || "must be at least 1".into())?;
        check(
            s.apodization_width.is_finite() && (0.0..0.5).contains(&s.apodization_width),
            || "solver.apodization_width".into(),
            || "must lie in [0, 0.5)".into(),
        )?;
        Ok(())
    }

    fn segment_in_domain(&self, center: Point, length: f64, orientation: Angle, prefix: &str) -> Result<()> {
        let u = segment_direction(orientation.radians());
        for end in [center + u.scale(length / 2.0), center - u.scale(length / 2.0)] {
            check(
                end.is_finite() && self.grid.contains(end),
                || format!("{prefix}.center"),
                || format!("segment end ({:.4}, {:.4}) lies outside the domain", end.x, end.y),
            )?;
        }
        Ok(())
    }
}
