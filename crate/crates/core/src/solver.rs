//! Multi-bounce orchestration: the depth-0 sweep, discovery of illuminated
//! reflector and RIS faces, recursive virtual-source sweeps and assembly of
//! the total map.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Combining, RxArray, Scenario, TransferModel};
use crate::error::{Error, Result};
use crate::propagation::{propagate_sweep, rasterize_shapes, MaskShape, SweepConfig};
use crate::scatterers::{
    accumulate_into_global, frame_tilt, make_ris_source, make_rough_source, make_specular_source,
    sample_incident_field, sweep_in_frame, sweep_virtual_source, LocalFrame, NodeSweep, ObjectId, Segment,
    Side, VirtualSource,
};
use crate::spectral::{ComplexField, CoverageMap, MapGrid};
use crate::wavefronts::synthesize;

/// One entry of the source tree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceNode {
    pub object: ObjectId,
    pub side: Option<Side>,
    pub depth: u32,
    /// Index of the parent entry; `None` for depth-0 sources.
    pub parent: Option<usize>,
    pub peak_incident: f64,
    pub peak_source: f64,
    pub pruned: bool,
}

/// Wall-clock durations in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub synthesis: f64,
    pub primary_sweep: f64,
    pub bounces: Vec<f64>,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub total: CoverageMap,
    /// Contribution of each bounce depth, starting with depth 0.
    pub per_bounce: Vec<CoverageMap>,
    pub source_tree: Vec<SourceNode>,
    pub timings: Timings,
}

/// Masks of every scene object in global coordinates, in object order.
pub fn scene_shapes(scenario: &Scenario) -> Vec<(ObjectId, MaskShape)> {
    let mut shapes = Vec::new();
    for (i, b) in scenario.blockers.iter().enumerate() {
        shapes.push((ObjectId::Blocker(i), MaskShape::of_blocker(b)));
    }
    for (i, r) in scenario.reflectors.iter().enumerate() {
        shapes.push((
            ObjectId::Reflector(i),
            MaskShape::segment(r.center, r.length, r.orientation.radians(), r.transmittance),
        ));
    }
    for (i, r) in scenario.ris.iter().enumerate() {
        shapes.push((
            ObjectId::Ris(i),
            MaskShape::segment(r.center, r.length, r.orientation.radians(), r.transmittance),
        ));
    }
    shapes
}

/// Put element weights at the nearest samples of a column; elements sharing
/// a cell add.
pub fn rasterize_elements(weights: &[Complex64], positions: &[f64], grid: &MapGrid) -> Vec<Complex64> {
    let mut col = vec![Complex64::new(0.0, 0.0); grid.ny];
    add_elements(&mut col, weights, positions, grid);
    col
}

fn add_elements(col: &mut [Complex64], weights: &[Complex64], positions: &[f64], grid: &MapGrid) {
    for (w, y) in weights.iter().zip(positions) {
        let j = ((y - grid.y0) / grid.dy).round();
        if j >= 0.0 && (j as usize) < grid.ny {
            col[j as usize] += w;
        }
    }
}

struct Node {
    sweep: NodeSweep,
    tree_index: usize,
    own: Option<ObjectId>,
}

struct Candidate {
    node: usize,
    object: ObjectId,
    side: Side,
}

fn base_config(s: &Scenario) -> SweepConfig {
    SweepConfig {
        wavelength: s.physical.wavelength(),
        tilt: 0.0,
        padding_factor: s.solver.padding_factor,
        apodization_width: s.solver.apodization_width,
    }
}

fn peak(samples: &[Complex64]) -> f64 {
    samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Solve a validated scenario.
pub fn solve(scenario: &Scenario) -> Result<SolveReport> {
    scenario.validate()?;
    let t_start = Instant::now();
    let grid = MapGrid::of(&scenario.grid);
    let lambda = scenario.physical.wavelength();
    let k = scenario.physical.wavenumber();
    let config = base_config(scenario);
    let shapes = scene_shapes(scenario);
    let mut tree = Vec::new();

    let excitations = scenario
        .tx
        .iter()
        .map(|tx| synthesize(tx, lambda))
        .collect::<Result<Vec<_>>>()?;
    let mut timings = Timings {
        synthesis: t_start.elapsed().as_secs_f64(),
        ..Timings::default()
    };

    let t0 = Instant::now();
    let mut aligned = vec![Complex64::new(0.0, 0.0); grid.ny];
    let mut any_aligned = false;
    let mut framed = Vec::new();
    for (i, (tx, ex)) in scenario.tx.iter().zip(&excitations).enumerate() {
        if tx.is_aligned() {
            let ys: Vec<f64> = ex.positions.iter().map(|s| tx.center.y + s).collect();
            add_elements(&mut aligned, &ex.weights, &ys, &grid);
            any_aligned = true;
        } else {
            framed.push((i, tx, ex));
        }
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut depth0 = CoverageMap::zeros(grid);
    if any_aligned {
        let source = ComplexField::new(aligned, grid.dy, grid.y0)?;
        let plain: Vec<MaskShape> = shapes.iter().map(|(_, s)| *s).collect();
        let mask = rasterize_shapes(&plain, &grid, None);
        let map = propagate_sweep(&source, &mask, &grid, &config)?;
        depth0 = map.clone();
        let peak_source = peak(source.samples());
        tree.push(SourceNode {
            object: ObjectId::Tx(
                scenario.tx.iter().position(|t| t.is_aligned()).expect("aligned TX present"),
            ),
            side: None,
            depth: 0,
            parent: None,
            peak_incident: peak_source,
            peak_source,
            pruned: false,
        });
        nodes.push(Node {
            sweep: NodeSweep {
                frame: LocalFrame::identity(),
                map,
                shapes: shapes.clone(),
                config,
                direction: crate::domain::Point::new(1.0, 0.0),
            },
            tree_index: tree.len() - 1,
            own: None,
        });
    }
    let framed_sweeps: Vec<Result<Option<NodeSweep>>> = framed
        .par_iter()
        .map(|(_, tx, ex)| {
            let frame = LocalFrame::for_aperture(tx.center, tx.orientation.radians());
            let Some(local) = crate::scatterers::local_grid(&frame, &scenario.grid) else {
                return Ok(None);
            };
            let column = rasterize_elements(&ex.weights, &ex.positions, &local);
            let source = ComplexField::new(column, local.dy, local.y0)?;
            sweep_in_frame(&source, frame, None, frame.ex, &shapes, &scenario.grid, config)
        })
        .collect();
    for ((i, _, ex), sweep) in framed.iter().zip(framed_sweeps) {
        let p = peak(&ex.weights);
        tree.push(SourceNode {
            object: ObjectId::Tx(*i),
            side: None,
            depth: 0,
            parent: None,
            peak_incident: p,
            peak_source: p,
            pruned: false,
        });
        if let Some(sweep) = sweep? {
            accumulate_into_global(&sweep.map, &sweep.frame, sweep.direction, k, &mut depth0);
            nodes.push(Node {
                sweep,
                tree_index: tree.len() - 1,
                own: Some(ObjectId::Tx(*i)),
            });
        }
    }
    timings.primary_sweep = t0.elapsed().as_secs_f64();

    let mut per_bounce = vec![depth0];
    let mut reference = per_bounce[0].peak_abs();
    let eps = scenario.solver.source_energy_threshold;

    for depth in 1..=scenario.solver.max_bounce_depth {
        if nodes.is_empty() {
            break;
        }
        let td = Instant::now();
        let mut candidates = Vec::new();
        for (ni, node) in nodes.iter().enumerate() {
            let axis = node.sweep.frame.ex;
            let objects = scenario
                .reflectors
                .iter()
                .enumerate()
                .map(|(i, r)| (ObjectId::Reflector(i), Segment::of_reflector(r)))
                .chain(
                    scenario
                        .ris
                        .iter()
                        .enumerate()
                        .map(|(i, r)| (ObjectId::Ris(i), Segment::of_ris(r))),
                );
            for (object, segment) in objects {
                if Some(object) == node.own {
                    continue;
                }
                let facing = segment.normal().dot(axis);
                let side = if facing < -1e-9 {
                    Side::Front
                } else if facing > 1e-9 {
                    Side::Back
                } else {
                    continue;
                };
                candidates.push(Candidate {
                    node: ni,
                    object,
                    side,
                });
            }
        }
        let built: Vec<Result<(f64, VirtualSource)>> = candidates
            .par_iter()
            .map(|c| {
                let node = &nodes[c.node].sweep;
                let segment = segment_of(scenario, c.object);
                let incident = sample_incident_field(node, &segment, Some(c.object), grid.dy)?;
                let peak_incident = peak(incident.samples());
                let incoming = node.direction;
                let vs = match c.object {
                    ObjectId::Reflector(i) => {
                        let r = &scenario.reflectors[i];
                        match &r.roughness {
                            Some(rough) => {
                                make_rough_source(&incident, r, rough, c.object, c.side, incoming, k, depth)
                            }
                            None => make_specular_source(&incident, r, c.object, c.side, incoming, k, depth),
                        }
                    }
                    ObjectId::Ris(i) => {
                        make_ris_source(&incident, &scenario.ris[i], c.object, c.side, incoming, k, depth)
                    }
                    _ => unreachable!("only reflectors and RIS panels radiate"),
                };
                Ok((peak_incident, vs))
            })
            .collect();
        let built = built.into_iter().collect::<Result<Vec<_>>>()?;
        if depth == 1 {
            reference = built.iter().map(|(p, _)| *p).fold(reference, f64::max);
        }
        let mut kept = Vec::new();
        for (c, (peak_incident, vs)) in candidates.iter().zip(built) {
            let peak_source = peak(vs.field.samples());
            let pruned = !(peak_source > eps * reference);
            tree.push(SourceNode {
                object: c.object,
                side: Some(c.side),
                depth,
                parent: Some(nodes[c.node].tree_index),
                peak_incident,
                peak_source,
                pruned,
            });
            if !pruned {
                let incoming = nodes[c.node].sweep.frame.ex;
                kept.push((tree.len() - 1, c.object, c.side, c.node, vs, incoming));
            }
        }
        kept.sort_by_key(|(_, object, side, node, _, _)| (*object, *side, *node));
        let sweeps: Vec<Result<Option<NodeSweep>>> = kept
            .par_iter()
            .map(|(_, _, _, _, vs, incoming)| {
                let mut cfg = config;
                if scenario.solver.transfer == TransferModel::Tilted {
                    cfg.tilt = frame_tilt(&vs.frame, *incoming);
                }
                sweep_virtual_source(vs, &shapes, &scenario.grid, cfg)
            })
            .collect();
        let mut layer = CoverageMap::zeros(grid);
        let mut next = Vec::new();
        for ((tree_index, object, _, _, _, _), sweep) in kept.into_iter().zip(sweeps) {
            if let Some(sweep) = sweep? {
                accumulate_into_global(&sweep.map, &sweep.frame, sweep.direction, k, &mut layer);
                next.push(Node {
                    sweep,
                    tree_index,
                    own: Some(object),
                });
            }
        }
        per_bounce.push(layer);
        nodes = next;
        timings.bounces.push(td.elapsed().as_secs_f64());
    }

    let mut total = per_bounce[0].clone();
    for layer in &per_bounce[1..] {
        total.add_assign(layer)?;
    }
    timings.total = t_start.elapsed().as_secs_f64();
    Ok(SolveReport {
        total,
        per_bounce,
        source_tree: tree,
        timings,
    })
}

fn segment_of(scenario: &Scenario, id: ObjectId) -> Segment {
    match id {
        ObjectId::Reflector(i) => Segment::of_reflector(&scenario.reflectors[i]),
        ObjectId::Ris(i) => Segment::of_ris(&scenario.ris[i]),
        _ => unreachable!("only reflectors and RIS panels are segments"),
    }
}

/// Received powers of one RX array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RxPower {
    pub element_powers: Vec<f64>,
    pub element_fields: Vec<[f64; 2]>,
    pub combined_power: f64,
}

/// Sample each element at its nearest grid cell and combine.
pub fn compute_rx_power(map: &CoverageMap, rx: &RxArray) -> Result<RxPower> {
    let g = map.grid();
    let mut fields = Vec::with_capacity(rx.element_count);
    for p in rx.element_positions() {
        let fk = ((p.x - g.x0) / g.dx).round();
        let fj = ((p.y - g.y0) / g.dy).round();
        if !(fk >= 0.0 && fj >= 0.0 && (fk as usize) < g.nx && (fj as usize) < g.ny) {
            return Err(Error::Argument(format!(
                "RX element at ({:.4}, {:.4}) lies outside the map",
                p.x, p.y
            )));
        }
        fields.push(map.at(fk as usize, fj as usize));
    }
    let element_powers: Vec<f64> = fields.iter().map(|e| e.norm_sqr()).collect();
    let combined_power = match &rx.combining {
        Combining::FullyDigital => element_powers.iter().sum(),
        Combining::Analog { weights } => weights
            .iter()
            .zip(&fields)
            .map(|(w, e)| w.0 * e)
            .sum::<Complex64>()
            .norm_sqr(),
    };
    Ok(RxPower {
        element_powers,
        element_fields: fields.iter().map(|e| [e.re, e.im]).collect(),
        combined_power,
    })
}
