#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const GAUSSIAN: &str = r#"
[physical]
frequency_ghz = 100.0

[grid]
x_extent = 0.2
y_extent = 0.12
dy = 0.0014

[[tx]]
center = [0.0, 0.0]
length = 0.04
element_count = 28
excitation = { kind = "gaussian", waist = 0.01 }

[[rx]]
center = [0.15, 0.0]
length = 0.01
element_count = 4
"#;

/// Gaussian beam onto a rough 45° reflector.
pub fn rough(seed: u64) -> String {
    format!(
        r#"{GAUSSIAN}
[[reflectors]]
center = [0.12, 0.0]
length = 0.06
orientation_deg = 45.0
reflection_coefficient = 1.0
roughness = {{ h_rms = 0.0003, correlation_length = 0.003, seed = {seed} }}
"#
    )
}

pub const BESSEL: &str = r#"
[physical]
frequency_ghz = 100.0

[grid]
x_extent = 0.3
y_extent = 0.16
dy = 0.0014

[[tx]]
center = [0.0, 0.0]
length = 0.1
element_count = 71
excitation = { kind = "bessel", axicon_angle_deg = 5.0 }

[[blockers]]
center = [0.1, 0.0]
length = 0.02
thickness = 0.005
"#;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nfwave"))
}

pub fn nfwave(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn listing(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}
