//! Aperture excitations: Gaussian, focused, Bessel (axicon), Airy
//! (cubic plus focus) and imported custom profiles.

use std::path::Path;

use num_complex::Complex64;

use crate::domain::{TxAperture, WavefrontSpec};
use crate::error::{Error, Result};

/// Per-element complex weights and their centered offsets along the
/// aperture.
#[derive(Clone, Debug, PartialEq)]
pub struct ApertureExcitation {
    pub weights: Vec<Complex64>,
    pub positions: Vec<f64>,
}

impl ApertureExcitation {
    fn from_fn(aperture: &TxAperture, f: impl Fn(f64) -> Complex64) -> Self {
        let positions = element_offsets(aperture);
        let weights = positions.iter().map(|&s| f(s)).collect();
        Self { weights, positions }
    }

    pub fn phases(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.arg()).collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Offsets `(i + 0.5 − N/2)·L/N` of the element centers.
pub fn element_offsets(aperture: &TxAperture) -> Vec<f64> {
    let n = aperture.element_count;
    let d = aperture.element_spacing();
    (0..n).map(|i| (i as f64 + 0.5 - n as f64 / 2.0) * d).collect()
}

pub fn synth_uniform(aperture: &TxAperture) -> ApertureExcitation {
    ApertureExcitation::from_fn(aperture, |_| Complex64::new(1.0, 0.0))
}

pub fn synth_gaussian(aperture: &TxAperture, w0: f64) -> ApertureExcitation {
    ApertureExcitation::from_fn(aperture, |s| Complex64::new((-(s * s) / (w0 * w0)).exp(), 0.0))
}

fn focus_phase(s: f64, f: f64, k: f64) -> f64 {
    // s²/(√(s²+f²)+f) is √(s²+f²)−f without the cancellation at large f
    k * s * s / ((s * s + f * f).sqrt() + f)
}

pub fn synth_focused(aperture: &TxAperture, f: f64, wavelength: f64) -> ApertureExcitation {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    ApertureExcitation::from_fn(aperture, |s| Complex64::from_polar(1.0, focus_phase(s, f, k)))
}

/// Axicon phase `+k·|s|·sin α`, which converges into a cone under the
/// `e^{−ikr}` convention.
pub fn synth_bessel(aperture: &TxAperture, axicon_angle: f64, wavelength: f64) -> ApertureExcitation {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let sa = axicon_angle.sin();
    ApertureExcitation::from_fn(aperture, |s| Complex64::from_polar(1.0, k * s.abs() * sa))
}

/// Cubic phase `β·(s/(L/2))³` (radians) plus the focusing term.
pub fn synth_airy(aperture: &TxAperture, beta: f64, f: f64, wavelength: f64) -> ApertureExcitation {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let half = aperture.length / 2.0;
    ApertureExcitation::from_fn(aperture, |s| {
        let u = s / half;
        Complex64::from_polar(1.0, beta * u * u * u + focus_phase(s, f, k))
    })
}

/// Read one `amplitude phase_deg` pair per line; blank lines and lines
/// starting with `#` are skipped.
pub fn load_custom_profile(path: &Path, aperture: &TxAperture) -> Result<ApertureExcitation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Profile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_custom_profile(&text, aperture).map_err(|message| Error::Profile {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_custom_profile(text: &str, aperture: &TxAperture) -> std::result::Result<ApertureExcitation, String> {
    let mut weights = Vec::with_capacity(aperture.element_count);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parsed = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(p), None) => a.parse::<f64>().ok().zip(p.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((a, p)) if a.is_finite() && p.is_finite() => {
                weights.push(Complex64::from_polar(a, p.to_radians()))
            }
            _ => return Err(format!("line {}: expected two numbers `amplitude phase_deg`", i + 1)),
        }
    }
    if weights.len() != aperture.element_count {
        return Err(format!(
            "expected {} lines, found {}",
            aperture.element_count,
            weights.len()
        ));
    }
    Ok(ApertureExcitation {
        weights,
        positions: element_offsets(aperture),
    })
}

/// Write an excitation in the custom profile format.
pub fn format_custom_profile(excitation: &ApertureExcitation) -> String {
    let mut out = String::new();
    for w in &excitation.weights {
        out.push_str(&format!("{:e} {:e}\n", w.norm(), w.arg().to_degrees()));
    }
    out
}

/// Excitation for a TX aperture according to its spec.
pub fn synthesize(aperture: &TxAperture, wavelength: f64) -> Result<ApertureExcitation> {
    Ok(match &aperture.excitation {
        WavefrontSpec::Uniform => synth_uniform(aperture),
        WavefrontSpec::Gaussian { waist } => synth_gaussian(aperture, *waist),
        WavefrontSpec::Focused { focal_length } => synth_focused(aperture, *focal_length, wavelength),
        WavefrontSpec::Bessel { axicon_angle } => synth_bessel(aperture, axicon_angle.radians(), wavelength),
        WavefrontSpec::Airy {
            curvature,
            focal_length,
        } => synth_airy(aperture, *curvature, *focal_length, wavelength),
        WavefrontSpec::Custom { profile } => load_custom_profile(profile, aperture)?,
    })
}
