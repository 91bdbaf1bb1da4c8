//! Seeded batch generation of solved scenarios.
//!
//! Sample `i` draws from `ChaCha8Rng::seed_from_u64(master_seed)` on stream
//! `i`, so every sample is reproducible on its own and a resumed run picks
//! up exactly the samples the manifest does not list.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nfwave_core::domain::{
    Angle, Blocker, FieldGrid, PhysicalParams, Point, Reflector, RoughnessProfile, RxArray, Scenario, SolverSettings,
    TxAperture, WavefrontSpec,
};
use nfwave_core::error::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{scenario_hash, sha256_hex, FileEntry, MANIFEST_FILE, TOOL_VERSION};
use crate::run::{solve_scenario, FIELD_FILE, RX_FILE, SCENARIO_FILE};

pub const MAX_SHARD_SIZE: usize = 1000;
const MAX_DRAWS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavefrontKind {
    Uniform,
    Gaussian,
    Focused,
    Bessel,
    Airy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_extent: f64,
    pub y_extent: f64,
    /// Defaults to λ/2.
    pub dy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSpec {
    pub center: Point,
    pub length: f64,
    pub element_count: usize,
    pub wavefronts: Vec<WavefrontKind>,
    #[serde(default = "default_focal_range")]
    pub focal_range: [f64; 2],
    #[serde(default = "default_axicon_range")]
    pub axicon_range_deg: [f64; 2],
    #[serde(default = "default_curvature_range")]
    pub airy_curvature_range: [f64; 2],
}

fn default_focal_range() -> [f64; 2] {
    [0.1, 0.5]
}

fn default_axicon_range() -> [f64; 2] {
    [3.0, 10.0]
}

fn default_curvature_range() -> [f64; 2] {
    [-6.0, -2.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectorSpec {
    pub count: [usize; 2],
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub length_range: [f64; 2],
    #[serde(default)]
    pub orientation_range_deg: [f64; 2],
    pub gamma_range: [f64; 2],
    #[serde(default)]
    pub rough_probability: f64,
    #[serde(default)]
    pub h_rms_range: [f64; 2],
    #[serde(default = "default_correlation_range")]
    pub correlation_length_range: [f64; 2],
}

fn default_correlation_range() -> [f64; 2] {
    [0.003, 0.003]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockerSpec {
    pub count: [usize; 2],
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub length_range: [f64; 2],
    pub thickness_range: [f64; 2],
    #[serde(default)]
    pub orientation_range_deg: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSpec {
    pub samples: usize,
    pub master_seed: u64,
    #[serde(default = "default_shard_size")]
    pub shard_size: usize,
    pub frequency_ghz: f64,
    pub grid: GridSpec,
    pub tx: TxSpec,
    pub reflectors: Option<ReflectorSpec>,
    pub blockers: Option<BlockerSpec>,
    #[serde(default)]
    pub rx: Vec<RxArray>,
    #[serde(default)]
    pub solver: SolverSettings,
}

fn default_shard_size() -> usize {
    MAX_SHARD_SIZE
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Input(format!("invalid {field}: {}", message.into()))
}

fn range_ok(r: [f64; 2], field: &str) -> CliResult<()> {
    if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
        Ok(())
    } else {
        Err(invalid(field, format!("expected finite [min, max] with min ≤ max, got {r:?}")))
    }
}

fn within(r: [f64; 2], lo: f64, hi: f64, field: &str) -> CliResult<()> {
    range_ok(r, field)?;
    if r[0] >= lo && r[1] <= hi {
        Ok(())
    } else {
        Err(invalid(field, format!("{r:?} leaves the domain [{lo}, {hi}]")))
    }
}

fn positive_range(r: [f64; 2], field: &str) -> CliResult<()> {
    range_ok(r, field)?;
    if r[0] > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("values must be positive, got {r:?}")))
    }
}

fn counts_ok(c: [usize; 2], field: &str) -> CliResult<()> {
    if c[0] <= c[1] {
        Ok(())
    } else {
        Err(invalid(field, format!("min exceeds max in {c:?}")))
    }
}

impl BatchSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        let spec: BatchSpec = toml::from_str(text).map_err(|e| CliError::Input(format!("batch spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    fn physical(&self) -> PhysicalParams {
        PhysicalParams::from_ghz(self.frequency_ghz)
    }

    fn field_grid(&self) -> FieldGrid {
        let dy = self.grid.dy.unwrap_or(self.physical().wavelength() / 2.0);
        FieldGrid::new(self.grid.x_extent, self.grid.y_extent, dy)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if !(1..=MAX_SHARD_SIZE).contains(&self.shard_size) {
            return Err(invalid("shard_size", format!("must lie in 1..={MAX_SHARD_SIZE}")));
        }
        if !(self.frequency_ghz.is_finite() && self.frequency_ghz > 0.0) {
            return Err(invalid("frequency_ghz", "must be positive"));
        }
        let (lx, ly) = (self.grid.x_extent, self.grid.y_extent);
        if !(lx.is_finite() && lx > 0.0) {
            return Err(invalid("grid.x_extent", "must be positive"));
        }
        if !(ly.is_finite() && ly > 0.0) {
            return Err(invalid("grid.y_extent", "must be positive"));
        }
        let (x_lo, x_hi, y_lo, y_hi) = (0.0, lx, -ly / 2.0, ly / 2.0);
        let tx = &self.tx;
        if tx.wavefronts.is_empty() {
            return Err(invalid("tx.wavefronts", "must list at least one kind"));
        }
        positive_range(tx.focal_range, "tx.focal_range")?;
        positive_range(tx.axicon_range_deg, "tx.axicon_range_deg")?;
        if tx.axicon_range_deg[1] >= 90.0 {
            return Err(invalid("tx.axicon_range_deg", "angles must stay below 90°"));
        }
        range_ok(tx.airy_curvature_range, "tx.airy_curvature_range")?;
        if let Some(r) = &self.reflectors {
            counts_ok(r.count, "reflectors.count")?;
            within(r.x_range, x_lo, x_hi, "reflectors.x_range")?;
            within(r.y_range, y_lo, y_hi, "reflectors.y_range")?;
            positive_range(r.length_range, "reflectors.length_range")?;
            range_ok(r.orientation_range_deg, "reflectors.orientation_range_deg")?;
            within(r.gamma_range, 0.0, 1.0, "reflectors.gamma_range")?;
            if !(0.0..=1.0).contains(&r.rough_probability) {
                return Err(invalid("reflectors.rough_probability", "must lie in [0, 1]"));
            }
            within(r.h_rms_range, 0.0, f64::INFINITY, "reflectors.h_rms_range")?;
            positive_range(r.correlation_length_range, "reflectors.correlation_length_range")?;
        }
        if let Some(b) = &self.blockers {
            counts_ok(b.count, "blockers.count")?;
            within(b.x_range, x_lo, x_hi, "blockers.x_range")?;
            within(b.y_range, y_lo, y_hi, "blockers.y_range")?;
            positive_range(b.length_range, "blockers.length_range")?;
            positive_range(b.thickness_range, "blockers.thickness_range")?;
            range_ok(b.orientation_range_deg, "blockers.orientation_range_deg")?;
        }
        // everything fixed across samples must already form a valid scenario
        let mut probe = self.empty_scenario();
        probe.tx.push(self.tx_with(WavefrontSpec::Uniform));
        probe.validate().map_err(CliError::input)
    }

    fn empty_scenario(&self) -> Scenario {
        Scenario {
            physical: self.physical(),
            grid: self.field_grid(),
            tx: Vec::new(),
            blockers: Vec::new(),
            reflectors: Vec::new(),
            ris: Vec::new(),
            rx: self.rx.clone(),
            solver: self.solver.clone(),
        }
    }

    fn tx_with(&self, excitation: WavefrontSpec) -> TxAperture {
        TxAperture {
            center: self.tx.center,
            length: self.tx.length,
            orientation: Angle::ZERO,
            element_count: self.tx.element_count,
            excitation,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Scenario {
        let uniform = |rng: &mut ChaCha8Rng, r: [f64; 2]| if r[0] == r[1] { r[0] } else { rng.random_range(r[0]..r[1]) };
        let mut s = self.empty_scenario();
        let t = &self.tx;
        let kind = t.wavefronts[rng.random_range(0..t.wavefronts.len())];
        let excitation = match kind {
            WavefrontKind::Uniform => WavefrontSpec::Uniform,
            WavefrontKind::Gaussian => WavefrontSpec::Gaussian { waist: t.length / 4.0 },
            WavefrontKind::Focused => WavefrontSpec::Focused {
                focal_length: uniform(rng, t.focal_range),
            },
            WavefrontKind::Bessel => WavefrontSpec::Bessel {
                axicon_angle: Angle::from_degrees(uniform(rng, t.axicon_range_deg)),
            },
            WavefrontKind::Airy => WavefrontSpec::Airy {
                curvature: uniform(rng, t.airy_curvature_range),
                focal_length: uniform(rng, t.focal_range),
            },
        };
        s.tx.push(self.tx_with(excitation));
        if let Some(r) = &self.reflectors {
            for _ in 0..rng.random_range(r.count[0]..=r.count[1]) {
                let rough = rng.random_bool(r.rough_probability);
                let roughness = rough.then(|| RoughnessProfile {
                    h_rms: uniform(rng, r.h_rms_range),
                    correlation_length: uniform(rng, r.correlation_length_range),
                    seed: rng.random::<u64>() >> 1,
                    phase_model: Default::default(),
                });
                s.reflectors.push(Reflector {
                    center: Point::new(uniform(rng, r.x_range), uniform(rng, r.y_range)),
                    length: uniform(rng, r.length_range),
                    orientation: Angle::from_degrees(uniform(rng, r.orientation_range_deg)),
                    reflection_coefficient: uniform(rng, r.gamma_range),
                    transmittance: 0.0,
                    roughness,
                });
            }
        }
        if let Some(b) = &self.blockers {
            for _ in 0..rng.random_range(b.count[0]..=b.count[1]) {
                s.blockers.push(Blocker {
                    center: Point::new(uniform(rng, b.x_range), uniform(rng, b.y_range)),
                    length: uniform(rng, b.length_range),
                    thickness: uniform(rng, b.thickness_range),
                    orientation: Angle::from_degrees(uniform(rng, b.orientation_range_deg)),
                    attenuation: 0.0,
                });
            }
        }
        s
    }

    /// Scenario of sample `index`. Draws that leave the domain are redrawn
    /// from the same stream.
    pub fn sample(&self, index: usize) -> CliResult<Scenario> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index as u64);
        let mut last: Option<Error> = None;
        for _ in 0..MAX_DRAWS {
            let s = self.draw(&mut rng);
            match s.validate() {
                Ok(()) => return Ok(s),
                Err(e) => last = Some(e),
            }
        }
        Err(CliError::Input(format!(
            "sample {index}: no valid scenario in {MAX_DRAWS} draws (last: {})",
            last.map(|e| e.to_string()).unwrap_or_default()
        )))
    }

    pub fn sample_dir(&self, index: usize) -> String {
        format!("shard-{:04}/sample-{index:06}", index / self.shard_size)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub index: usize,
    pub dir: String,
    pub scenario_hash: String,
    pub files: Vec<FileEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool_version: String,
    pub spec_hash: String,
    pub master_seed: u64,
    pub samples: usize,
    pub shard_size: usize,
    pub completed: Vec<SampleEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetSummary {
    pub generated: usize,
    pub skipped: usize,
    pub remaining: usize,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

fn write_manifest(out: &Path, m: &DatasetManifest) -> CliResult<()> {
    let tmp = out.join(format!(".{MANIFEST_FILE}.tmp"));
    let text = serde_json::to_string_pretty(m).expect("manifest serializes") + "\n";
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, out.join(MANIFEST_FILE)).map_err(io_err(out))
}

fn load_manifest(out: &Path) -> CliResult<Option<DatasetManifest>> {
    let path = out.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_sample(dir: &Path, text: &str, scenario: &Scenario) -> CliResult<Vec<FileEntry>> {
    let solved = solve_scenario(scenario)?;
    fs::write(dir.join(SCENARIO_FILE), text).map_err(io_err(dir))?;
    solved.dump.save(&dir.join(FIELD_FILE)).map_err(io_err(dir))?;
    let rx = serde_json::to_string_pretty(&solved.rx).expect("rx report serializes") + "\n";
    fs::write(dir.join(RX_FILE), rx).map_err(io_err(dir))?;
    [SCENARIO_FILE, FIELD_FILE, RX_FILE]
        .iter()
        .map(|n| FileEntry::of(dir, n).map_err(io_err(dir)))
        .collect()
}

/// Generate the samples of `spec_path` into `out`, skipping those already
/// recorded. At most `limit` new samples are produced.
pub fn cmd_dataset(spec_path: &Path, out: &Path, limit: Option<usize>) -> CliResult<DatasetSummary> {
    let spec_text =
        fs::read_to_string(spec_path).map_err(|e| CliError::Input(format!("{}: {e}", spec_path.display())))?;
    let spec = BatchSpec::parse(&spec_text)?;
    let spec_hash = sha256_hex(spec_text.replace("\r\n", "\n").as_bytes());
    fs::create_dir_all(out).map_err(io_err(out))?;

    let mut manifest = match load_manifest(out)? {
        Some(m) if m.spec_hash != spec_hash => {
            return Err(CliError::Input(format!(
                "{} holds a dataset generated from a different batch spec",
                out.display()
            )))
        }
        Some(m) => m,
        None => DatasetManifest {
            tool_version: TOOL_VERSION.to_string(),
            spec_hash,
            master_seed: spec.master_seed,
            samples: spec.samples,
            shard_size: spec.shard_size,
            completed: Vec::new(),
        },
    };
    let mut done: BTreeMap<usize, SampleEntry> = manifest
        .completed
        .drain(..)
        .filter(|e| e.files.iter().all(|f| out.join(&e.dir).join(&f.path).is_file()))
        .map(|e| (e.index, e))
        .collect();
    let skipped = done.len();
    let budget = limit.unwrap_or(usize::MAX);
    let mut generated = 0;

    for index in 0..spec.samples {
        if done.contains_key(&index) {
            continue;
        }
        if generated == budget {
            break;
        }
        let scenario = spec.sample(index)?;
        let text = nfwave_core::domain::serialize_scenario(&scenario);
        let rel = spec.sample_dir(index);
        let final_dir = out.join(&rel);
        let parent = final_dir.parent().expect("sample dirs are nested").to_path_buf();
        fs::create_dir_all(&parent).map_err(io_err(&parent))?;
        let staging: PathBuf = parent.join(format!(".sample-{index:06}.partial"));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(io_err(&staging))?;
        }
        fs::create_dir(&staging).map_err(io_err(&staging))?;
        let files = match write_sample(&staging, &text, &scenario) {
            Ok(f) => f,
            Err(e) => {
                let _ = fs::remove_dir_all(&staging);
                return Err(e);
            }
        };
        if final_dir.exists() {
            fs::remove_dir_all(&final_dir).map_err(io_err(&final_dir))?;
        }
        fs::rename(&staging, &final_dir).map_err(io_err(&final_dir))?;
        done.insert(
            index,
            SampleEntry {
                index,
                dir: rel,
                scenario_hash: scenario_hash(&text),
                files,
            },
        );
        generated += 1;
        manifest.completed = done.values().cloned().collect();
        write_manifest(out, &manifest)?;
    }
    manifest.completed = done.values().cloned().collect();
    write_manifest(out, &manifest)?;
    Ok(DatasetSummary {
        generated,
        skipped,
        remaining: spec.samples - done.len(),
    })
}
