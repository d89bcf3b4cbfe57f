//! Hanan grid extended with obstacle corners. Nodes strictly inside an
//! obstacle are blocked; edges are blocked when their open segment crosses
//! an obstacle's open interior, so routing along obstacle boundaries stays
//! legal.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::route::{Point, Rect, EPS};
use crate::seqpair::Placement;

#[derive(Debug, Clone)]
pub struct RoutingGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub obstacles: Vec<Rect>,
    blocked_node: Vec<bool>,
    /// Edge (ix, iy)-(ix+1, iy), indexed iy * (nx - 1) + ix.
    blocked_h: Vec<bool>,
    /// Edge (ix, iy)-(ix, iy+1), indexed iy * nx + ix.
    blocked_v: Vec<bool>,
}

fn sorted_dedup(mut coords: Vec<f64>) -> Vec<f64> {
    coords.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(coords.len());
    for c in coords {
        if out.last().is_none_or(|&l| c - l > EPS) {
            out.push(c);
        }
    }
    out
}

impl RoutingGrid {
    /// Builds the grid from raw geometry. `net` only labels errors.
    pub fn from_parts(terminals: &[Point], obstacles: Vec<Rect>, net: &str) -> Result<Self> {
        for t in terminals {
            if obstacles.iter().any(|o| o.contains_strict(t)) {
                return Err(Error::UnroutableTerminal {
                    net: net.to_string(),
                    x: t.x,
                    y: t.y,
                });
            }
        }
        let mut xs: Vec<f64> = terminals.iter().map(|t| t.x).collect();
        let mut ys: Vec<f64> = terminals.iter().map(|t| t.y).collect();
        for o in &obstacles {
            xs.push(o.x);
            xs.push(o.x2());
            ys.push(o.y);
            ys.push(o.y2());
        }
        let xs = sorted_dedup(xs);
        let ys = sorted_dedup(ys);
        let (nx, ny) = (xs.len(), ys.len());

        let mut blocked_node = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let p = Point::new(xs[ix], ys[iy]);
                blocked_node[iy * nx + ix] = obstacles.iter().any(|o| o.contains_strict(&p));
            }
        }
        let mut blocked_h = vec![false; nx.saturating_sub(1) * ny];
        for iy in 0..ny {
            for ix in 0..nx - 1 {
                let y = ys[iy];
                let (x1, x2) = (xs[ix], xs[ix + 1]);
                blocked_h[iy * (nx - 1) + ix] = obstacles.iter().any(|o| {
                    y > o.y + EPS && y < o.y2() - EPS && x1.max(o.x) + EPS < x2.min(o.x2())
                });
            }
        }
        let mut blocked_v = vec![false; nx * ny.saturating_sub(1)];
        for iy in 0..ny - 1 {
            for ix in 0..nx {
                let x = xs[ix];
                let (y1, y2) = (ys[iy], ys[iy + 1]);
                blocked_v[iy * nx + ix] = obstacles.iter().any(|o| {
                    x > o.x + EPS && x < o.x2() - EPS && y1.max(o.y) + EPS < y2.min(o.y2())
                });
            }
        }
        Ok(Self {
            xs,
            ys,
            obstacles,
            blocked_node,
            blocked_h,
            blocked_v,
        })
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn node_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.nx(), node / self.nx())
    }

    pub fn point(&self, node: usize) -> Point {
        let (ix, iy) = self.coords(node);
        Point::new(self.xs[ix], self.ys[iy])
    }

    pub fn is_blocked(&self, node: usize) -> bool {
        self.blocked_node[node]
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        let ix = self.xs.iter().position(|&x| (x - p.x).abs() <= EPS)?;
        let iy = self.ys.iter().position(|&y| (y - p.y).abs() <= EPS)?;
        Some(self.node(ix, iy))
    }

    /// Unblocked axis neighbors of a node with step lengths.
    pub fn neighbors(&self, node: usize) -> Vec<(usize, f64)> {
        let (ix, iy) = self.coords(node);
        let (nx, ny) = (self.nx(), self.ny());
        let mut out = Vec::with_capacity(4);
        if ix > 0 && !self.blocked_h[iy * (nx - 1) + ix - 1] {
            let to = self.node(ix - 1, iy);
            if !self.blocked_node[to] {
                out.push((to, self.xs[ix] - self.xs[ix - 1]));
            }
        }
        if ix + 1 < nx && !self.blocked_h[iy * (nx - 1) + ix] {
            let to = self.node(ix + 1, iy);
            if !self.blocked_node[to] {
                out.push((to, self.xs[ix + 1] - self.xs[ix]));
            }
        }
        if iy > 0 && !self.blocked_v[(iy - 1) * nx + ix] {
            let to = self.node(ix, iy - 1);
            if !self.blocked_node[to] {
                out.push((to, self.ys[iy] - self.ys[iy - 1]));
            }
        }
        if iy + 1 < ny && !self.blocked_v[iy * nx + ix] {
            let to = self.node(ix, iy + 1);
            if !self.blocked_node[to] {
                out.push((to, self.ys[iy + 1] - self.ys[iy]));
            }
        }
        out
    }
}

/// Grid for one net of a placement: every block without a pin on the net is
/// an obstacle; the canvas boundary contributes coordinates.
pub fn build_grid(
    placement: &Placement,
    terminals: &[Point],
    net_blocks: &BTreeSet<String>,
    net: &str,
) -> Result<RoutingGrid> {
    let obstacles: Vec<Rect> = placement
        .rects
        .iter()
        .filter(|(id, _)| !net_blocks.contains(*id))
        .map(|(_, r)| Rect::new(r.x, r.y, r.w, r.h))
        .collect();
    let mut grid_terminals = terminals.to_vec();
    // Canvas corners keep the boundary coordinates in the grid.
    grid_terminals.push(Point::new(0.0, 0.0));
    grid_terminals.push(Point::new(placement.width, placement.height));
    let mut grid = RoutingGrid::from_parts(&grid_terminals, obstacles, net)?;
    // Terminal containment was checked against the real terminals only.
    for t in terminals {
        debug_assert!(grid.index_of(t).is_some());
    }
    grid.obstacles.shrink_to_fit();
    Ok(grid)
}
