//! Shared helpers for the integration suites: exhaustive floorplan
//! enumeration and an exact Steiner-tree oracle on the routing grid.

use analayout::model::{Block, Circuit};
use analayout::route::{Point, RoutingGrid};
use analayout::seqpair::{pack, SequencePair};

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q: Vec<usize> = p.iter().map(|&x| x + 1).collect();
            q.insert(i, 0);
            out.push(q);
        }
    }
    out
}

fn cartesian<T: Clone>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![vec![]];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|v| {
                axis.iter().map(move |x| {
                    let mut w = v.clone();
                    w.push(x.clone());
                    w
                })
            })
            .collect();
    }
    out
}

/// Minimum bounding-box area over every sequence pair, orientation and
/// variant choice of the circuit.
pub fn exhaustive_min_area(circuit: &Circuit) -> f64 {
    let n = circuit.blocks.len();
    let perms = permutations(n);
    let rot_axes: Vec<Vec<bool>> = circuit
        .blocks
        .iter()
        .map(|b: &Block| {
            if b.rotatable {
                vec![false, true]
            } else {
                vec![false]
            }
        })
        .collect();
    let var_axes: Vec<Vec<usize>> = circuit
        .blocks
        .iter()
        .map(|b| (0..b.variants.len()).collect())
        .collect();
    let mut best = f64::INFINITY;
    for g1 in &perms {
        for g2 in &perms {
            for rot in cartesian(&rot_axes) {
                for var in cartesian(&var_axes) {
                    let sp = SequencePair::from_parts(g1.clone(), g2.clone(), rot.clone(), var);
                    best = best.min(pack(&sp, circuit).unwrap().area());
                }
            }
        }
    }
    best
}

/// Exact rectilinear Steiner minimum on the unblocked grid metric:
/// all-pairs shortest paths, then the minimum spanning tree over the
/// terminals plus every candidate Steiner-vertex subset of size up to
/// `terminals - 2`.
pub fn exact_steiner_length(grid: &RoutingGrid, terminals: &[Point]) -> f64 {
    let nodes = grid.node_count();
    // All-pairs shortest path over unblocked edges (Dijkstra per source).
    let mut dist = vec![vec![f64::INFINITY; nodes]; nodes];
    for (s, row) in dist.iter_mut().enumerate() {
        if grid.is_blocked(s) {
            continue;
        }
        row[s] = 0.0;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push((std::cmp::Reverse(ordered_float(0.0)), s));
        while let Some((std::cmp::Reverse(d), u)) = heap.pop() {
            let d = f64::from_bits(d.0);
            if d > row[u] {
                continue;
            }
            for (v, w) in grid.neighbors(u) {
                let nd = d + w;
                if nd < row[v] - 1e-12 {
                    row[v] = nd;
                    heap.push((std::cmp::Reverse(ordered_float(nd)), v));
                }
            }
        }
    }

    let mut term_nodes: Vec<usize> = Vec::new();
    for t in terminals {
        let node = grid.index_of(t).expect("terminal on grid");
        if !term_nodes.contains(&node) {
            term_nodes.push(node);
        }
    }
    if term_nodes.len() <= 1 {
        return 0.0;
    }
    let candidates: Vec<usize> = (0..nodes).filter(|&v| !grid.is_blocked(v)).collect();
    let max_extra = term_nodes.len().saturating_sub(2);

    let mst_over = |vertices: &[usize]| -> f64 {
        let k = vertices.len();
        let mut in_tree = vec![false; k];
        let mut best = vec![f64::INFINITY; k];
        in_tree[0] = true;
        for j in 1..k {
            best[j] = dist[vertices[0]][vertices[j]];
        }
        let mut total = 0.0;
        for _ in 1..k {
            let mut pick = usize::MAX;
            for j in 0..k {
                if !in_tree[j] && (pick == usize::MAX || best[j] < best[pick]) {
                    pick = j;
                }
            }
            if best[pick].is_infinite() {
                return f64::INFINITY;
            }
            total += best[pick];
            in_tree[pick] = true;
            for j in 0..k {
                if !in_tree[j] {
                    best[j] = best[j].min(dist[vertices[pick]][vertices[j]]);
                }
            }
        }
        total
    };

    let mut best = mst_over(&term_nodes);
    // Subsets of candidate Steiner vertices, sizes 1..=max_extra.
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((start, chosen)) = stack.pop() {
        if !chosen.is_empty() {
            let mut vertices = term_nodes.clone();
            vertices.extend(chosen.iter().copied());
            best = best.min(mst_over(&vertices));
        }
        if chosen.len() < max_extra {
            for (idx, &cand) in candidates.iter().enumerate().skip(start) {
                if term_nodes.contains(&cand) || chosen.contains(&cand) {
                    continue;
                }
                let mut next = chosen.clone();
                next.push(cand);
                stack.push((idx + 1, next));
            }
        }
    }
    best
}

fn ordered_float(x: f64) -> OrderedBits {
    OrderedBits(x.to_bits())
}

/// Non-negative floats ordered by bit pattern.
#[derive(PartialEq, Eq, PartialOrd, Ord, Clone, Copy)]
pub struct OrderedBits(u64);
