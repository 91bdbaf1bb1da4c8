//! The `run` and `compare` commands.

use std::fs;
use std::path::{Path, PathBuf};

use nfwave_core::analysis::{beam_trajectory, compare, MetricsReport};
use nfwave_core::domain::{parse_scenario, serialize_scenario, Scenario};
use nfwave_core::error::Error;
use nfwave_core::solver::{solve, SolveReport};
use serde::Serialize;

use crate::dump::FieldDump;
use crate::error::{CliError, CliResult};
use crate::heatmap::{render_png, HeatmapOptions, DEFAULT_DB_RANGE};
use crate::manifest::{scenario_hash, scenario_seeds, FileEntry, RunManifest, MANIFEST_FILE, TOOL_VERSION};
use crate::report::{rx_report, trajectory_csv, RxReport};

pub const HEATMAP_FILE: &str = "heatmap.png";
pub const FIELD_FILE: &str = "field.nwf";
pub const RX_FILE: &str = "rx.json";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SOURCE_TREE_FILE: &str = "source_tree.json";

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub db_range: f64,
    pub overlay: bool,
    pub diagnostics: bool,
    /// Replaces roughness seeds: reflector `i` gets `seed + i`.
    pub seed: Option<u64>,
    pub reference: Option<PathBuf>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            db_range: DEFAULT_DB_RANGE,
            overlay: false,
            diagnostics: false,
            seed: None,
            reference: None,
        }
    }
}

/// Output of one solve in the forms every front end needs.
pub struct Solved {
    pub report: SolveReport,
    pub dump: FieldDump,
    pub rx: RxReport,
}

fn classify(e: Error) -> CliError {
    match e {
        Error::Syntax { .. } | Error::Invalid { .. } | Error::Profile { .. } => CliError::input(e),
        other => CliError::runtime(other),
    }
}

pub fn solve_scenario(scenario: &Scenario) -> CliResult<Solved> {
    let report = solve(scenario).map_err(classify)?;
    let rx = rx_report(&report.total, scenario).map_err(CliError::runtime)?;
    let dump = FieldDump::new(report.total.clone(), scenario.physical.frequency_hz());
    Ok(Solved { report, dump, rx })
}

pub fn apply_seed(scenario: &mut Scenario, seed: u64) {
    for (i, r) in scenario.reflectors.iter_mut().enumerate() {
        if let Some(rough) = &mut r.roughness {
            rough.seed = seed.wrapping_add(i as u64) & (i64::MAX as u64);
        }
    }
}

/// Parse a scenario file, resolving relative profile paths against its
/// directory.
pub fn read_scenario(path: &Path) -> CliResult<(String, Scenario)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut scenario = parse_scenario(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if let Some(dir) = path.parent() {
        scenario.resolve_paths(dir);
    }
    Ok((text, scenario))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    fs::write(dir.join(name), text + "\n")
}

fn staging_dir(out: &Path) -> CliResult<PathBuf> {
    let name = out
        .file_name()
        .ok_or_else(|| CliError::Input(format!("{} is not a usable output directory", out.display())))?;
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| CliError::Runtime(format!("{}: {e}", parent.display())))?;
    Ok(parent.join(format!(".{}.partial-{}", name.to_string_lossy(), uuid::Uuid::new_v4().simple())))
}

/// Refuse to replace anything but an earlier run's output.
fn check_replaceable(out: &Path) -> CliResult<()> {
    if !out.exists() {
        return Ok(());
    }
    let empty = fs::read_dir(out).map(|mut d| d.next().is_none()).unwrap_or(false);
    if out.is_dir() && (empty || out.join(MANIFEST_FILE).is_file()) {
        return Ok(());
    }
    Err(CliError::Input(format!(
        "{} exists and does not hold an earlier run",
        out.display()
    )))
}

fn write_artifacts(
    dir: &Path,
    text: &str,
    scenario: &Scenario,
    solved: &Solved,
    metrics: Option<MetricsReport>,
    opts: &RunOptions,
) -> std::io::Result<RunManifest> {
    let heat = HeatmapOptions {
        db_range: opts.db_range,
        overlay: opts.overlay,
    };
    fs::write(dir.join(HEATMAP_FILE), render_png(&solved.report.total, Some(scenario), &heat))?;
    solved.dump.save(&dir.join(FIELD_FILE))?;
    write_json(dir, RX_FILE, &solved.rx)?;
    fs::write(dir.join(SCENARIO_FILE), serialize_scenario(scenario))?;
    let mut names = vec![HEATMAP_FILE, FIELD_FILE, RX_FILE, SCENARIO_FILE];
    if opts.diagnostics {
        fs::write(dir.join(TRAJECTORY_FILE), trajectory_csv(&beam_trajectory(&solved.report.total)))?;
        write_json(dir, SOURCE_TREE_FILE, &solved.report.source_tree)?;
        names.extend([TRAJECTORY_FILE, SOURCE_TREE_FILE]);
    }
    let files = names
        .iter()
        .map(|n| FileEntry::of(dir, n))
        .collect::<std::io::Result<Vec<_>>>()?;
    let manifest = RunManifest {
        scenario_hash: scenario_hash(text),
        tool_version: TOOL_VERSION.to_string(),
        seeds: scenario_seeds(scenario),
        files,
        timings: solved.report.timings.clone(),
        metrics,
    };
    write_json(dir, MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

/// Solve a scenario file and write its artifacts to `out`. Nothing appears
/// at `out` unless every artifact was written.
pub fn cmd_run(scenario_path: &Path, out: &Path, opts: &RunOptions) -> CliResult<RunManifest> {
    if !(opts.db_range.is_finite() && opts.db_range > 0.0) {
        return Err(CliError::Input(format!("--db-range must be positive (got {})", opts.db_range)));
    }
    let (text, mut scenario) = read_scenario(scenario_path)?;
    if let Some(seed) = opts.seed {
        apply_seed(&mut scenario, seed);
    }
    check_replaceable(out)?;
    let reference = opts
        .reference
        .as_deref()
        .map(|p| FieldDump::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .transpose()?;
    if let Some(r) = &reference {
        let shape = (scenario.grid.nx(), scenario.grid.ny());
        if r.shape() != shape {
            return Err(CliError::Input(format!(
                "reference is {}×{}, scenario grid is {}×{}",
                r.shape().0,
                r.shape().1,
                shape.0,
                shape.1
            )));
        }
    }

    let solved = solve_scenario(&scenario)?;
    let metrics = reference
        .map(|r| compare(&solved.report.total, &r.map))
        .transpose()
        .map_err(CliError::input)?;

    let staging = staging_dir(out)?;
    let written = fs::create_dir(&staging).and_then(|_| write_artifacts(&staging, &text, &scenario, &solved, metrics, opts));
    let manifest = match written {
        Ok(m) => m,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(CliError::Runtime(format!("writing artifacts: {e}")));
        }
    };
    if out.exists() {
        fs::remove_dir_all(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    }
    fs::rename(&staging, out).map_err(|e| {
        let _ = fs::remove_dir_all(&staging);
        CliError::Runtime(format!("{}: {e}", out.display()))
    })?;
    Ok(manifest)
}

pub fn load_dump(path: &Path) -> CliResult<FieldDump> {
    FieldDump::load(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Compare two dumps; optionally write the metrics as JSON.
pub fn cmd_compare(a: &Path, b: &Path, out: Option<&Path>) -> CliResult<MetricsReport> {
    let (da, db) = (load_dump(a)?, load_dump(b)?);
    if da.shape() != db.shape() {
        return Err(CliError::Input(format!(
            "shape mismatch: {} is {}×{}, {} is {}×{}",
            a.display(),
            da.shape().0,
            da.shape().1,
            b.display(),
            db.shape().0,
            db.shape().1
        )));
    }
    let metrics = compare(&da.map, &db.map).map_err(CliError::input)?;
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
        fs::write(path, text + "\n").map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(metrics)
}

/// Write a dump as `x,y,re,im` rows.
pub fn cmd_export_csv(dump: &Path, out: &Path) -> CliResult<()> {
    let d = load_dump(dump)?;
    fs::write(out, crate::report::field_csv(&d.map)).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))
}
