//! NWF1 raw field dumps.
//!
//! Layout, all little-endian: the magic `NWF1`, `u32 nx`, `u32 ny`,
//! `f64 dx`, `f64 dy`, `f64 frequency_hz`, then `nx·ny` pairs of `f64`
//! `(re, im)` in column-major order (all of column 0 first).

use std::io::{self, Read, Write};
use std::path::Path;

use nfwave_core::spectral::{CoverageMap, MapGrid};
use num_complex::Complex64;

pub const MAGIC: &[u8; 4] = b"NWF1";
pub const HEADER_LEN: usize = 4 + 4 + 4 + 8 * 3;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDump {
    pub frequency_hz: f64,
    pub map: CoverageMap,
}

impl FieldDump {
    pub fn new(map: CoverageMap, frequency_hz: f64) -> Self {
        Self { frequency_hz, map }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.map.nx(), self.map.ny())
    }

    pub fn write_to(&self, mut w: impl Write) -> io::Result<()> {
        let g = self.map.grid();
        let dim = |n: usize| {
            u32::try_from(n).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "map dimension exceeds u32"))
        };
        w.write_all(MAGIC)?;
        w.write_all(&dim(g.nx)?.to_le_bytes())?;
        w.write_all(&dim(g.ny)?.to_le_bytes())?;
        w.write_all(&g.dx.to_le_bytes())?;
        w.write_all(&g.dy.to_le_bytes())?;
        w.write_all(&self.frequency_hz.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.map.data().len());
        for c in self.map.data() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.map.data().len());
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    /// Decode a dump. The grid origin is not stored; it is rebuilt from the
    /// sampling convention `x0 = 0`, `y0 = −⌊ny/2⌋·dy`.
    pub fn from_bytes(bytes: &[u8]) -> io::Result<Self> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        if bytes.len() < HEADER_LEN {
            return Err(bad(format!("{} bytes is shorter than the NWF1 header", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("missing NWF1 magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let (nx, ny) = (u32_at(4), u32_at(8));
        let (dx, dy, frequency_hz) = (f64_at(12), f64_at(20), f64_at(28));
        let count = nx
            .checked_mul(ny)
            .ok_or_else(|| bad(format!("{nx}×{ny} overflows")))?;
        let expected = count
            .checked_mul(16)
            .and_then(|n| n.checked_add(HEADER_LEN))
            .ok_or_else(|| bad(format!("{nx}×{ny} overflows")))?;
        if bytes.len() != expected {
            return Err(bad(format!(
                "{nx}×{ny} dump needs {expected} bytes, file has {}",
                bytes.len()
            )));
        }
        let data = bytes[HEADER_LEN..]
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        let grid = MapGrid {
            nx,
            ny,
            dx,
            dy,
            x0: 0.0,
            y0: -((ny / 2) as f64) * dy,
        };
        let map = CoverageMap::from_data(grid, data).map_err(|e| bad(e.to_string()))?;
        Ok(Self { frequency_hz, map })
    }

    pub fn read_from(mut r: impl Read) -> io::Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_bytes())
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
