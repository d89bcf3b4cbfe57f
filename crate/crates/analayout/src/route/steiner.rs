//! Steiner tree construction by sequential nearest-terminal attachment, and
//! decomposition of the finished tree into layered wire segments.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::{Error, Result};
use crate::route::grid::RoutingGrid;
use crate::route::{LayerPolicy, Orientation, Point, RouteTree, Segment, Via, EPS};

// Direction of the step that entered a node: 0 horizontal, 1 vertical,
// 2 none (search source).
const DIR_H: usize = 0;
const DIR_V: usize = 1;
const DIR_NONE: usize = 2;

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    len: f64,
    bends: u32,
    ix: usize,
    iy: usize,
    node: usize,
    dir: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    // BinaryHeap is a max-heap; invert so the smallest key pops first.
    // Key order: length, then bends, then (x, y), then direction.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .len
            .total_cmp(&self.len)
            .then_with(|| other.bends.cmp(&self.bends))
            .then_with(|| other.ix.cmp(&self.ix))
            .then_with(|| other.iy.cmp(&self.iy))
            .then_with(|| other.dir.cmp(&self.dir))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn better(len: f64, bends: u32, cur_len: f64, cur_bends: u32) -> bool {
    if len < cur_len - EPS {
        return true;
    }
    if len > cur_len + EPS {
        return false;
    }
    bends < cur_bends
}

/// Multi-source shortest path from the current tree to the nearest
/// unattached terminal. Ties prefer fewer bends, then smaller (x, y).
fn grow_to_nearest(
    grid: &RoutingGrid,
    tree_nodes: &BTreeSet<usize>,
    targets: &BTreeSet<usize>,
) -> Option<Vec<usize>> {
    let states = grid.node_count() * 3;
    let mut dist = vec![(f64::INFINITY, u32::MAX); states];
    let mut parent: Vec<Option<usize>> = vec![None; states];
    let mut heap = BinaryHeap::new();
    for &n in tree_nodes {
        let s = n * 3 + DIR_NONE;
        dist[s] = (0.0, 0);
        let (ix, iy) = grid.coords(n);
        heap.push(HeapEntry {
            len: 0.0,
            bends: 0,
            ix,
            iy,
            node: n,
            dir: DIR_NONE,
        });
    }
    let mut done = vec![false; states];
    while let Some(entry) = heap.pop() {
        let state = entry.node * 3 + entry.dir;
        if done[state] {
            continue;
        }
        done[state] = true;
        if targets.contains(&entry.node) {
            // Reconstruct the node path back to the tree.
            let mut path = vec![entry.node];
            let mut cur = state;
            while let Some(prev) = parent[cur] {
                path.push(prev / 3);
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        let (_, iy) = grid.coords(entry.node);
        for (next, step) in grid.neighbors(entry.node) {
            let (jx, jy) = grid.coords(next);
            let axis = if jy == iy { DIR_H } else { DIR_V };
            let bends = entry.bends + u32::from(entry.dir != DIR_NONE && entry.dir != axis);
            let len = entry.len + step;
            let s = next * 3 + axis;
            if better(len, bends, dist[s].0, dist[s].1) {
                dist[s] = (len, bends);
                parent[s] = Some(state);
                heap.push(HeapEntry {
                    len,
                    bends,
                    ix: jx,
                    iy: jy,
                    node: next,
                    dir: axis,
                });
            }
        }
    }
    None
}

/// Obstacle-avoiding rectilinear Steiner tree: start from the first
/// terminal, repeatedly graft the shortest path to the nearest unattached
/// terminal, then prune stray vertices and merge collinear pass-throughs.
pub fn oarsmt(grid: &RoutingGrid, terminals: &[Point], net: &str) -> Result<RouteTree> {
    assert!(!terminals.is_empty(), "a net needs at least one terminal");
    let mut terminal_nodes: Vec<usize> = Vec::new();
    for t in terminals {
        let node = grid.index_of(t).unwrap_or_else(|| {
            panic!("terminal ({}, {}) is not a grid node", t.x, t.y)
        });
        if grid.is_blocked(node) {
            return Err(Error::UnroutableTerminal {
                net: net.to_string(),
                x: t.x,
                y: t.y,
            });
        }
        if !terminal_nodes.contains(&node) {
            terminal_nodes.push(node);
        }
    }

    let mut tree_nodes: BTreeSet<usize> = BTreeSet::new();
    let mut tree_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    tree_nodes.insert(terminal_nodes[0]);
    let mut unattached: BTreeSet<usize> = terminal_nodes[1..].iter().copied().collect();

    while !unattached.is_empty() {
        let path = grow_to_nearest(grid, &tree_nodes, &unattached).ok_or_else(|| {
            let missing = *unattached.iter().next().unwrap();
            let p = grid.point(missing);
            Error::UnroutableNet {
                net: net.to_string(),
                x: p.x,
                y: p.y,
            }
        })?;
        let reached = *path.last().unwrap();
        unattached.remove(&reached);
        for pair in path.windows(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            tree_edges.insert((a, b));
        }
        tree_nodes.extend(path);
    }

    finalize_tree(grid, &tree_nodes, &tree_edges, &terminal_nodes, net)
}

/// Prunes non-terminal leaves, merges collinear degree-2 vertices, and
/// re-indexes the remaining structure into a `RouteTree`.
fn finalize_tree(
    grid: &RoutingGrid,
    nodes: &BTreeSet<usize>,
    edges: &BTreeSet<(usize, usize)>,
    terminals: &[usize],
    net: &str,
) -> Result<RouteTree> {
    let terminal_set: BTreeSet<usize> = terminals.iter().copied().collect();
    // Adjacency on grid-node ids.
    let mut adj: std::collections::BTreeMap<usize, BTreeSet<usize>> =
        nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
    for &(a, b) in edges {
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
    }

    // Prune degree-1 non-terminals until fixpoint.
    loop {
        let prune: Vec<usize> = adj
            .iter()
            .filter(|(n, nb)| nb.len() == 1 && !terminal_set.contains(n))
            .map(|(&n, _)| n)
            .collect();
        if prune.is_empty() {
            break;
        }
        for n in prune {
            if let Some(nb) = adj.remove(&n) {
                for m in nb {
                    adj.get_mut(&m).unwrap().remove(&n);
                }
            }
        }
    }

    // Merge collinear degree-2 pass-through vertices.
    loop {
        let mut merged = false;
        let candidates: Vec<usize> = adj
            .iter()
            .filter(|(n, nb)| nb.len() == 2 && !terminal_set.contains(n))
            .map(|(&n, _)| n)
            .collect();
        for n in candidates {
            let Some(nb) = adj.get(&n) else { continue };
            if nb.len() != 2 {
                continue;
            }
            let mut it = nb.iter();
            let (&a, &b) = (it.next().unwrap(), it.next().unwrap());
            let (pn, pa, pb) = (grid.point(n), grid.point(a), grid.point(b));
            let collinear_h =
                (pn.y - pa.y).abs() <= EPS && (pn.y - pb.y).abs() <= EPS;
            let collinear_v =
                (pn.x - pa.x).abs() <= EPS && (pn.x - pb.x).abs() <= EPS;
            if collinear_h || collinear_v {
                adj.remove(&n);
                adj.get_mut(&a).unwrap().remove(&n);
                adj.get_mut(&b).unwrap().remove(&n);
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
                merged = true;
            }
        }
        if !merged {
            break;
        }
    }

    let kept: Vec<usize> = adj.keys().copied().collect();
    let index_of = |n: usize| kept.binary_search(&n).unwrap();
    let vertices: Vec<Point> = kept.iter().map(|&n| grid.point(n)).collect();
    let mut out_edges: Vec<(usize, usize)> = Vec::new();
    let mut length = 0.0;
    for (&n, nb) in &adj {
        for &m in nb {
            if n < m {
                let (i, j) = (index_of(n), index_of(m));
                out_edges.push((i, j));
                length += vertices[i].manhattan(&vertices[j]);
            }
        }
    }
    let tree = RouteTree {
        net: net.to_string(),
        vertices,
        edges: out_edges,
        length,
    };
    debug_assert!(tree.is_well_formed(), "malformed tree for net {net}");
    Ok(tree)
}

/// Output of segment decomposition.
#[derive(Debug, Clone, Default)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
    pub vias: Vec<Via>,
}

/// Splits a tree into per-edge segments on the policy's H/V layers and
/// emits a via at every vertex where both layers meet.
pub fn decompose_segments(tree: &RouteTree, policy: &LayerPolicy) -> SegmentSet {
    let mut segments = Vec::with_capacity(tree.edges.len());
    let mut has_h = vec![false; tree.vertices.len()];
    let mut has_v = vec![false; tree.vertices.len()];
    for &(a, b) in &tree.edges {
        let (pa, pb) = (&tree.vertices[a], &tree.vertices[b]);
        let orientation = if (pa.y - pb.y).abs() <= EPS {
            has_h[a] = true;
            has_h[b] = true;
            Orientation::Horizontal
        } else {
            has_v[a] = true;
            has_v[b] = true;
            Orientation::Vertical
        };
        let (span, cross) = match orientation {
            Orientation::Horizontal => ((pa.x.min(pb.x), pa.x.max(pb.x)), pa.y),
            Orientation::Vertical => ((pa.y.min(pb.y), pa.y.max(pb.y)), pa.x),
        };
        segments.push(Segment {
            net: tree.net.clone(),
            orientation,
            layer: policy.layer_of(orientation),
            span,
            cross,
        });
    }
    let mut vias = Vec::new();
    for (i, v) in tree.vertices.iter().enumerate() {
        if has_h[i] && has_v[i] {
            vias.push(Via {
                net: tree.net.clone(),
                x: v.x,
                y: v.y,
                from_layer: policy.vertical,
                to_layer: policy.horizontal,
            });
        }
    }
    SegmentSet { segments, vias }
}
