//! RX power reports and diagnostic sidecars.

use nfwave_core::analysis::TrajectoryPoint;
use nfwave_core::domain::{Combining, Scenario};
use nfwave_core::error::Result;
use nfwave_core::solver::{compute_rx_power, RxPower};
use nfwave_core::spectral::CoverageMap;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RxEntry {
    pub index: usize,
    pub combining: &'static str,
    #[serde(flatten)]
    pub power: RxPower,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RxReport {
    pub arrays: Vec<RxEntry>,
}

pub fn rx_report(map: &CoverageMap, scenario: &Scenario) -> Result<RxReport> {
    let arrays = scenario
        .rx
        .iter()
        .enumerate()
        .map(|(index, rx)| {
            Ok(RxEntry {
                index,
                combining: match rx.combining {
                    Combining::FullyDigital => "fully_digital",
                    Combining::Analog { .. } => "analog",
                },
                power: compute_rx_power(map, rx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RxReport { arrays })
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("x,y_peak,peak,width\n");
    for p in points {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", p.x, p.y_peak, p.peak, p.width));
    }
    out
}

/// One row per cell: `x,y,re,im`, columns in order.
pub fn field_csv(map: &CoverageMap) -> String {
    let g = map.grid();
    let mut out = String::with_capacity(64 * map.data().len() + 16);
    out.push_str("x,y,re,im\n");
    for k in 0..g.nx {
        for (j, c) in map.column(k).iter().enumerate() {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", g.x_at(k), g.y_at(j), c.re, c.im));
        }
    }
    out
}
