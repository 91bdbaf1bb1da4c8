//! Two-dimensional scalar diffraction engine for near-field mmWave and
//! sub-THz coverage maps.
//!
//! A scenario ([`domain::Scenario`]) describes the carrier, the sampling
//! grid, TX apertures and scene objects. [`solver::solve`] marches the TX
//! field across the domain with the angular spectrum method, turns every
//! illuminated reflector or RIS face into a virtual source, sweeps those in
//! their own frames and sums everything into one complex coverage map.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod propagation;
pub mod scatterers;
pub mod solver;
pub mod spectral;
pub mod wavefronts;

pub use domain::{parse_scenario, serialize_scenario, Scenario};
pub use error::{Error, Result};
pub use solver::{solve, SolveReport};
pub use spectral::CoverageMap;
