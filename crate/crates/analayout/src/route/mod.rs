//! Global routing: per-net obstacle-avoiding rectilinear Steiner trees on an
//! extended Hanan grid, decomposition into layered H/V segments with vias,
//! conduit bundling for hand-off to a detailed router, and grid-based
//! congestion estimation with block redistribution.

mod congestion;
mod conduit;
mod grid;
mod steiner;

pub use congestion::{estimate_congestion, redistribute, CongestionMap};
pub use conduit::{bundle_conduits, Conduit, ConduitConfig};
pub use grid::{build_grid, RoutingGrid};
pub use steiner::{decompose_segments, oarsmt, SegmentSet};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{pin_position, Circuit};
use crate::seqpair::Placement;

pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn manhattan(&self, other: &Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Axis-aligned rectangle, lower-left anchored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn x2(&self) -> f64 {
        self.x + self.w
    }

    pub fn y2(&self) -> f64 {
        self.y + self.h
    }

    pub fn contains_strict(&self, p: &Point) -> bool {
        p.x > self.x + EPS && p.x < self.x2() - EPS && p.y > self.y + EPS && p.y < self.y2() - EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Metal layer assignment for decomposed segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerPolicy {
    pub horizontal: u8,
    pub vertical: u8,
}

impl Default for LayerPolicy {
    fn default() -> Self {
        Self {
            horizontal: 3,
            vertical: 2,
        }
    }
}

impl LayerPolicy {
    pub fn layer_of(&self, orientation: Orientation) -> u8 {
        match orientation {
            Orientation::Horizontal => self.horizontal,
            Orientation::Vertical => self.vertical,
        }
    }
}

/// One axis-parallel wire piece of a net on a metal layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub net: String,
    pub orientation: Orientation,
    pub layer: u8,
    /// Start/end along the running axis, start <= end.
    pub span: (f64, f64),
    /// Fixed coordinate across the running axis.
    pub cross: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        self.span.1 - self.span.0
    }
}

/// Layer change at a tree vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Via {
    pub net: String,
    pub x: f64,
    pub y: f64,
    pub from_layer: u8,
    pub to_layer: u8,
}

/// Rectilinear Steiner tree of one net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteTree {
    pub net: String,
    pub vertices: Vec<Point>,
    /// Vertex index pairs; every edge is axis-parallel.
    pub edges: Vec<(usize, usize)>,
    pub length: f64,
}

impl RouteTree {
    /// Tree shape check: connected with `|V| - 1` edges, axis-parallel.
    pub fn is_well_formed(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        if self.edges.len() + 1 != self.vertices.len() {
            return false;
        }
        for &(a, b) in &self.edges {
            let (pa, pb) = (&self.vertices[a], &self.vertices[b]);
            let axis_parallel =
                (pa.x - pb.x).abs() <= EPS || (pa.y - pb.y).abs() <= EPS;
            if !axis_parallel {
                return false;
            }
        }
        // Connectivity by union-find over edges.
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        (0..self.vertices.len()).all(|i| find(&mut parent, i) == root)
    }
}

/// Everything the router produces for one placement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutingResult {
    pub trees: Vec<RouteTree>,
    pub segments: Vec<Segment>,
    pub vias: Vec<Via>,
    pub conduits: Vec<Conduit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RouteConfig {
    pub layers: LayerPolicy,
    pub conduit: ConduitConfig,
}

/// Pin coordinates of a net in a placement.
pub fn net_terminals(circuit: &Circuit, placement: &Placement, net: &str) -> Result<Vec<Point>> {
    let net = circuit
        .nets
        .iter()
        .find(|n| n.name == net)
        .unwrap_or_else(|| panic!("unknown net `{net}`"));
    net.pins
        .iter()
        .map(|pin| pin_position(circuit, placement, pin).map(|(x, y)| Point::new(x, y)))
        .collect()
}

/// Routes every net of the circuit in name order, decomposes the trees into
/// layered segments and bundles them into conduits.
pub fn route_all(
    circuit: &Circuit,
    placement: &Placement,
    cfg: &RouteConfig,
) -> Result<RoutingResult> {
    let mut net_names: Vec<&str> = circuit.nets.iter().map(|n| n.name.as_str()).collect();
    net_names.sort_unstable();

    let mut trees = Vec::new();
    let mut segments = Vec::new();
    let mut vias = Vec::new();
    for name in net_names {
        let net = circuit.nets.iter().find(|n| n.name == name).unwrap();
        let terminals = net_terminals(circuit, placement, name)?;
        let on_net: BTreeSet<String> = net.pins.iter().map(|p| p.block.clone()).collect();
        let grid = build_grid(placement, &terminals, &on_net, name)?;
        let tree = oarsmt(&grid, &terminals, name)?;
        let set = decompose_segments(&tree, &cfg.layers);
        segments.extend(set.segments);
        vias.extend(set.vias);
        trees.push(tree);
    }
    let conduits = bundle_conduits(&segments, &cfg.conduit);
    Ok(RoutingResult {
        trees,
        segments,
        vias,
        conduits,
    })
}
