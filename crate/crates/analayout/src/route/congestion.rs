//! Grid-based congestion estimation and congestion-driven block
//! redistribution.
//!
//! Demand is counted by overlaying a uniform grid on the placement box,
//! spanning each net with a Manhattan minimum spanning tree over its pins
//! and tracing every tree edge as a single-bend L route. Overflowed cell
//! boundaries push the blocks on their high side outward by one pitch; the
//! placement is then re-legalized by a floored longest-path repack that
//! keeps every original spatial relation.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{pin_position, Circuit};
use crate::route::{Point, EPS};
use crate::seqpair::Placement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionMap {
    pub gx: usize,
    pub gy: usize,
    /// Placement box the grid was laid over.
    pub width: f64,
    pub height: f64,
    pub capacity: u32,
    /// Demand on the boundary between cell (col, row) and (col+1, row);
    /// indexed `row * (gx - 1) + col`.
    pub v_demand: Vec<u32>,
    /// Demand on the boundary between cell (col, row) and (col, row+1);
    /// indexed `row * gx + col`.
    pub h_demand: Vec<u32>,
}

impl CongestionMap {
    pub fn cell_size(&self) -> (f64, f64) {
        (self.width / self.gx as f64, self.height / self.gy as f64)
    }

    pub fn total_demand(&self) -> u64 {
        self.v_demand.iter().map(|&d| d as u64).sum::<u64>()
            + self.h_demand.iter().map(|&d| d as u64).sum::<u64>()
    }

    pub fn max_overflow(&self) -> u32 {
        self.v_demand
            .iter()
            .chain(self.h_demand.iter())
            .map(|&d| d.saturating_sub(self.capacity))
            .max()
            .unwrap_or(0)
    }

    /// Boundary x coordinates of overflowed vertical edges.
    pub fn overflowed_vertical_boundaries(&self) -> Vec<f64> {
        let (cw, _) = self.cell_size();
        let mut out = Vec::new();
        for row in 0..self.gy {
            for col in 0..self.gx - 1 {
                if self.v_demand[row * (self.gx - 1) + col] > self.capacity {
                    out.push((col + 1) as f64 * cw);
                }
            }
        }
        out
    }

    /// Boundary y coordinates of overflowed horizontal edges.
    pub fn overflowed_horizontal_boundaries(&self) -> Vec<f64> {
        let (_, ch) = self.cell_size();
        let mut out = Vec::new();
        for row in 0..self.gy - 1 {
            for col in 0..self.gx {
                if self.h_demand[row * self.gx + col] > self.capacity {
                    out.push((row + 1) as f64 * ch);
                }
            }
        }
        out
    }
}

/// Manhattan minimum spanning tree over pin coordinates (Prim, ties to the
/// smallest index).
fn manhattan_mst(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    in_tree[0] = true;
    for (j, b) in best.iter_mut().enumerate().skip(1) {
        *b = (points[0].manhattan(&points[j]), 0);
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_d = f64::INFINITY;
        for j in 0..n {
            if !in_tree[j] && best[j].0 < pick_d - EPS {
                pick = j;
                pick_d = best[j].0;
            }
        }
        assert!(pick != usize::MAX);
        in_tree[pick] = true;
        edges.push((best[pick].1, pick));
        for j in 0..n {
            if !in_tree[j] {
                let d = points[pick].manhattan(&points[j]);
                if d < best[j].0 - EPS {
                    best[j] = (d, pick);
                }
            }
        }
    }
    edges
}

/// The two axis-parallel pieces of an L route between two points, choosing
/// the lexicographically smaller bend corner. Straight connections yield a
/// single piece.
fn l_route(a: &Point, b: &Point) -> Vec<(Point, Point)> {
    if (a.x - b.x).abs() <= EPS || (a.y - b.y).abs() <= EPS {
        return vec![(*a, *b)];
    }
    let c1 = Point::new(b.x, a.y);
    let c2 = Point::new(a.x, b.y);
    let bend = if (c1.x, c1.y) <= (c2.x, c2.y) { c1 } else { c2 };
    vec![(*a, bend), (bend, *b)]
}

fn count_crossings(map: &mut CongestionMap, from: &Point, to: &Point) {
    let (cw, ch) = map.cell_size();
    if (from.y - to.y).abs() <= EPS {
        // Horizontal wire crossing vertical boundaries.
        let (x1, x2) = (from.x.min(to.x), from.x.max(to.x));
        let row = ((from.y / ch).floor() as isize).clamp(0, map.gy as isize - 1) as usize;
        for col in 0..map.gx - 1 {
            let xb = (col + 1) as f64 * cw;
            if x1 + EPS < xb && xb < x2 - EPS {
                map.v_demand[row * (map.gx - 1) + col] += 1;
            }
        }
    } else {
        let (y1, y2) = (from.y.min(to.y), from.y.max(to.y));
        let col = ((from.x / cw).floor() as isize).clamp(0, map.gx as isize - 1) as usize;
        for row in 0..map.gy - 1 {
            let yb = (row + 1) as f64 * ch;
            if y1 + EPS < yb && yb < y2 - EPS {
                map.h_demand[row * map.gx + col] += 1;
            }
        }
    }
}

/// Estimated routing demand per grid-cell boundary.
pub fn estimate_congestion(
    circuit: &Circuit,
    placement: &Placement,
    gx: usize,
    gy: usize,
    capacity: u32,
) -> Result<CongestionMap> {
    assert!(gx >= 2 && gy >= 2, "grid must be at least 2x2");
    let mut map = CongestionMap {
        gx,
        gy,
        width: placement.width,
        height: placement.height,
        capacity,
        v_demand: vec![0; (gx - 1) * gy],
        h_demand: vec![0; gx * (gy - 1)],
    };
    for net in &circuit.nets {
        let pins: Vec<Point> = net
            .pins
            .iter()
            .map(|p| pin_position(circuit, placement, p).map(|(x, y)| Point::new(x, y)))
            .collect::<Result<_>>()?;
        for (a, b) in manhattan_mst(&pins) {
            for (from, to) in l_route(&pins[a], &pins[b]) {
                count_crossings(&mut map, &from, &to);
            }
        }
    }
    Ok(map)
}

/// Shifts the blocks on the high side of every overflowed boundary outward
/// by one pitch and re-legalizes with a floored longest-path repack derived
/// from the placement's own spatial relations. A map without overflow
/// returns the placement unchanged.
pub fn redistribute(placement: &Placement, map: &CongestionMap, pitch: f64) -> Placement {
    let ids: Vec<&String> = placement.rects.keys().collect();
    let n = ids.len();
    let rect = |i: usize| &placement.rects[ids[i]];

    let mut dx = vec![0.0f64; n];
    let mut dy = vec![0.0f64; n];
    for xb in map.overflowed_vertical_boundaries() {
        for (i, d) in dx.iter_mut().enumerate() {
            if rect(i).x >= xb - EPS {
                *d += pitch;
            }
        }
    }
    for yb in map.overflowed_horizontal_boundaries() {
        for (i, d) in dy.iter_mut().enumerate() {
            if rect(i).y >= yb - EPS {
                *d += pitch;
            }
        }
    }
    if dx.iter().all(|&d| d == 0.0) && dy.iter().all(|&d| d == 0.0) {
        return placement.clone();
    }

    // Every pair of a legal placement is separated on at least one axis;
    // re-packing against those separations keeps the relative order.
    let mut xs: Vec<f64> = (0..n).map(|i| rect(i).x + dx[i]).collect();
    let mut ys: Vec<f64> = (0..n).map(|i| rect(i).y + dy[i]).collect();

    let mut x_order: Vec<usize> = (0..n).collect();
    x_order.sort_by(|&a, &b| rect(a).x.total_cmp(&rect(b).x).then(a.cmp(&b)));
    for &i in &x_order {
        for j in 0..n {
            if i != j && rect(j).x + rect(j).w <= rect(i).x + EPS {
                xs[i] = xs[i].max(xs[j] + rect(j).w);
            }
        }
    }
    let mut y_order: Vec<usize> = (0..n).collect();
    y_order.sort_by(|&a, &b| rect(a).y.total_cmp(&rect(b).y).then(a.cmp(&b)));
    for &i in &y_order {
        for j in 0..n {
            if i != j && rect(j).y + rect(j).h <= rect(i).y + EPS {
                ys[i] = ys[i].max(ys[j] + rect(j).h);
            }
        }
    }

    let rects = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let mut r = *rect(i);
            r.x = xs[i];
            r.y = ys[i];
            ((*id).clone(), r)
        })
        .collect();
    Placement::from_rects(rects)
}
