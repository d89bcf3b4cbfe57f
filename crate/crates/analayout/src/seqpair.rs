//! Sequence-pair floorplan representation: relation queries, packing to
//! absolute coordinates via constraint-graph longest paths, and the
//! perturbation move set used by every search backend.
//!
//! Two permutations of the block set encode one relation per block pair:
//! `i` is left of `j` when `j` follows `i` in both sequences, and below `j`
//! when `j` precedes `i` in the first sequence and follows it in the second;
//! right/above are the mirrored cases.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Block, Circuit};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Left,
    Right,
    Below,
    Above,
}

/// Search state: the two permutations plus per-block orientation and
/// shape-variant choice. Permutations store indices into the block list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequencePair {
    pub gamma1: Vec<usize>,
    pub gamma2: Vec<usize>,
    pub rotated: Vec<bool>,
    pub variant: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    SwapGamma1,
    SwapBoth,
    Rotate,
    Reshape,
}

impl MoveKind {
    pub const ALL: [MoveKind; 4] = [
        MoveKind::SwapGamma1,
        MoveKind::SwapBoth,
        MoveKind::Rotate,
        MoveKind::Reshape,
    ];
}

/// A fully targeted move; applying one is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Swap two positions of the first sequence only.
    SwapGamma1(usize, usize),
    /// Swap the same two blocks in both sequences.
    SwapBoth(usize, usize),
    /// Toggle one block's orientation.
    Rotate(usize),
    /// Select a different shape variant for one block.
    Reshape(usize, usize),
}

/// Result of a perturbation; `changed` is false when the requested kind had
/// no legal target (single block, nothing rotatable, single-variant blocks).
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub state: SequencePair,
    pub changed: bool,
}

impl SequencePair {
    /// Identity permutations, no rotation, first variant everywhere.
    pub fn identity(blocks: &[Block]) -> Self {
        let n = blocks.len();
        Self {
            gamma1: (0..n).collect(),
            gamma2: (0..n).collect(),
            rotated: vec![false; n],
            variant: vec![0; n],
        }
    }

    pub fn from_parts(
        gamma1: Vec<usize>,
        gamma2: Vec<usize>,
        rotated: Vec<bool>,
        variant: Vec<usize>,
    ) -> Self {
        let sp = Self {
            gamma1,
            gamma2,
            rotated,
            variant,
        };
        debug_assert!(sp.shape_consistent());
        sp
    }

    /// Uniform random state: independent permutations, uniform variants,
    /// uniform orientation over legal values.
    pub fn random<R: Rng>(blocks: &[Block], rng: &mut R) -> Self {
        let n = blocks.len();
        assert!(n > 0, "cannot build a state over an empty block list");
        let mut gamma1: Vec<usize> = (0..n).collect();
        let mut gamma2: Vec<usize> = (0..n).collect();
        gamma1.shuffle(rng);
        gamma2.shuffle(rng);
        let variant = blocks
            .iter()
            .map(|b| rng.random_range(0..b.variants.len()))
            .collect();
        let rotated = blocks
            .iter()
            .map(|b| b.rotatable && rng.random_bool(0.5))
            .collect();
        Self {
            gamma1,
            gamma2,
            rotated,
            variant,
        }
    }

    pub fn len(&self) -> usize {
        self.gamma1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma1.is_empty()
    }

    fn shape_consistent(&self) -> bool {
        let n = self.gamma1.len();
        self.gamma2.len() == n && self.rotated.len() == n && self.variant.len() == n
    }

    /// True when both sequences are permutations of `0..n` and the
    /// orientation/variant vectors are legal for `blocks`.
    pub fn is_valid_for(&self, blocks: &[Block]) -> bool {
        let n = blocks.len();
        if !self.shape_consistent() || self.len() != n {
            return false;
        }
        let is_perm = |g: &[usize]| {
            let mut seen = vec![false; n];
            g.iter().all(|&b| b < n && !std::mem::replace(&mut seen[b], true))
        };
        is_perm(&self.gamma1)
            && is_perm(&self.gamma2)
            && self
                .variant
                .iter()
                .zip(blocks)
                .all(|(&v, b)| v < b.variants.len())
            && self
                .rotated
                .iter()
                .zip(blocks)
                .all(|(&r, b)| !r || b.rotatable)
    }

    fn positions(g: &[usize]) -> Vec<usize> {
        let mut pos = vec![0; g.len()];
        for (p, &b) in g.iter().enumerate() {
            pos[b] = p;
        }
        pos
    }

    /// Relation between two distinct block indices; exactly one holds.
    pub fn relation(&self, i: usize, j: usize) -> Relation {
        debug_assert_ne!(i, j);
        let pos1 = Self::positions(&self.gamma1);
        let pos2 = Self::positions(&self.gamma2);
        relation_from_positions(&pos1, &pos2, i, j)
    }

    /// Relation lookup by block id.
    pub fn relation_by_id(&self, circuit: &Circuit, i: &str, j: &str) -> Result<Relation> {
        let bi = circuit
            .block_index(i)
            .ok_or_else(|| Error::UnknownBlock(i.to_string()))?;
        let bj = circuit
            .block_index(j)
            .ok_or_else(|| Error::UnknownBlock(j.to_string()))?;
        Ok(self.relation(bi, bj))
    }

    /// Applies a targeted move, leaving `self` untouched.
    pub fn apply(&self, mv: Move) -> SequencePair {
        let mut next = self.clone();
        match mv {
            Move::SwapGamma1(p, q) => next.gamma1.swap(p, q),
            Move::SwapBoth(a, b) => {
                let swap_ids = |g: &mut Vec<usize>| {
                    let pa = g.iter().position(|&x| x == a).expect("block in sequence");
                    let pb = g.iter().position(|&x| x == b).expect("block in sequence");
                    g.swap(pa, pb);
                };
                swap_ids(&mut next.gamma1);
                swap_ids(&mut next.gamma2);
            }
            Move::Rotate(b) => next.rotated[b] = !next.rotated[b],
            Move::Reshape(b, v) => next.variant[b] = v,
        }
        next
    }

    /// Draws a concrete target for `kind`, or `None` when the kind cannot
    /// change this state. Pair choices are uniform over index pairs `i < j`.
    pub fn sample_move<R: Rng>(&self, kind: MoveKind, blocks: &[Block], rng: &mut R) -> Option<Move> {
        let n = self.len();
        let pair = |rng: &mut R| -> Option<(usize, usize)> {
            if n < 2 {
                return None;
            }
            let a = rng.random_range(0..n);
            let b = {
                let raw = rng.random_range(0..n - 1);
                if raw >= a {
                    raw + 1
                } else {
                    raw
                }
            };
            Some((a.min(b), a.max(b)))
        };
        match kind {
            MoveKind::SwapGamma1 => pair(rng).map(|(p, q)| Move::SwapGamma1(p, q)),
            MoveKind::SwapBoth => pair(rng).map(|(a, b)| Move::SwapBoth(a, b)),
            MoveKind::Rotate => {
                let rotatable: Vec<usize> = (0..n).filter(|&b| blocks[b].rotatable).collect();
                if rotatable.is_empty() {
                    None
                } else {
                    Some(Move::Rotate(rotatable[rng.random_range(0..rotatable.len())]))
                }
            }
            MoveKind::Reshape => {
                let reshapable: Vec<usize> =
                    (0..n).filter(|&b| blocks[b].variants.len() > 1).collect();
                if reshapable.is_empty() {
                    None
                } else {
                    let b = reshapable[rng.random_range(0..reshapable.len())];
                    let cur = self.variant[b];
                    let raw = rng.random_range(0..blocks[b].variants.len() - 1);
                    let v = if raw >= cur { raw + 1 } else { raw };
                    Some(Move::Reshape(b, v))
                }
            }
        }
    }

    /// One random perturbation of the requested kind.
    pub fn perturb<R: Rng>(&self, kind: MoveKind, blocks: &[Block], rng: &mut R) -> Perturbed {
        match self.sample_move(kind, blocks, rng) {
            Some(mv) => Perturbed {
                state: self.apply(mv),
                changed: true,
            },
            None => Perturbed {
                state: self.clone(),
                changed: false,
            },
        }
    }

    /// One random perturbation with the move kind drawn uniformly.
    pub fn perturb_any<R: Rng>(&self, blocks: &[Block], rng: &mut R) -> Perturbed {
        let kind = MoveKind::ALL[rng.random_range(0..MoveKind::ALL.len())];
        self.perturb(kind, blocks, rng)
    }
}

fn relation_from_positions(pos1: &[usize], pos2: &[usize], i: usize, j: usize) -> Relation {
    let before1 = pos1[i] < pos1[j];
    let before2 = pos2[i] < pos2[j];
    match (before1, before2) {
        (true, true) => Relation::Left,
        (false, false) => Relation::Right,
        (false, true) => Relation::Below,
        (true, false) => Relation::Above,
    }
}

// ---------------------------------------------------------------------------
// Packing
// ---------------------------------------------------------------------------

/// A placed block: absolute lower-left corner, footprint, and how the
/// footprint was derived (variant index, rotation, mirror for unfolded
/// symmetry members).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacedRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default)]
    pub variant: usize,
    #[serde(default)]
    pub rotated: bool,
    #[serde(default)]
    pub mirrored: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub rects: BTreeMap<String, PlacedRect>,
    pub width: f64,
    pub height: f64,
}

impl Placement {
    pub fn from_rects(rects: BTreeMap<String, PlacedRect>) -> Self {
        let width = rects.values().map(|r| r.x + r.w).fold(0.0, f64::max);
        let height = rects.values().map(|r| r.y + r.h).fold(0.0, f64::max);
        Self {
            rects,
            width,
            height,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Sum of placed block areas.
    pub fn block_area(&self) -> f64 {
        self.rects.values().map(|r| r.w * r.h).sum()
    }

    /// True when no two rect interiors intersect.
    pub fn non_overlapping(&self) -> bool {
        let rects: Vec<&PlacedRect> = self.rects.values().collect();
        for (i, a) in rects.iter().enumerate() {
            for b in rects.iter().skip(i + 1) {
                let x_overlap = a.x + EPS < b.x + b.w && b.x + EPS < a.x + a.w;
                let y_overlap = a.y + EPS < b.y + b.h && b.y + EPS < a.y + a.h;
                if x_overlap && y_overlap {
                    return false;
                }
            }
        }
        true
    }
}

/// Packs a state to coordinates for `circuit`, resolving alignment groups
/// by id. Prefer [`Packer`] when packing the same circuit repeatedly.
pub fn pack(sp: &SequencePair, circuit: &Circuit) -> Result<Placement> {
    Packer::new(circuit).pack(sp)
}

/// Alignment groups resolved to block indices.
#[derive(Debug, Clone, Default)]
pub struct AlignIndex {
    v_align: Vec<Vec<usize>>,
    h_align: Vec<Vec<usize>>,
    v_labels: Vec<String>,
    h_labels: Vec<String>,
}

impl AlignIndex {
    pub fn resolve(circuit: &Circuit) -> Self {
        let resolve = |groups: &[Vec<String>]| -> (Vec<Vec<usize>>, Vec<String>) {
            let mut idx = Vec::new();
            let mut labels = Vec::new();
            for g in groups {
                let members: Vec<usize> =
                    g.iter().filter_map(|id| circuit.block_index(id)).collect();
                if members.len() >= 2 {
                    labels.push(g.join(","));
                    idx.push(members);
                }
            }
            (idx, labels)
        };
        let (v_align, v_labels) = resolve(&circuit.constraints.v_align);
        let (h_align, h_labels) = resolve(&circuit.constraints.h_align);
        Self {
            v_align,
            h_align,
            v_labels,
            h_labels,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.v_align.is_empty() && self.h_align.is_empty()
    }
}

/// Pre-resolved packing context for one circuit.
pub struct Packer<'c> {
    circuit: &'c Circuit,
    align: AlignIndex,
}

impl<'c> Packer<'c> {
    pub fn new(circuit: &'c Circuit) -> Self {
        Self {
            circuit,
            align: AlignIndex::resolve(circuit),
        }
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.circuit
    }

    pub fn pack(&self, sp: &SequencePair) -> Result<Placement> {
        pack_resolved(sp, &self.circuit.blocks, &self.align)
    }
}

/// Longest-path packing. Each block's x is 0 or the maximum of `x + w` over
/// its left-predecessors; y is the analogue over below-predecessors.
/// Alignment groups are then snapped to the group maximum and one floored
/// repack sweep re-legalizes the rest; a group whose members still disagree
/// is reported as infeasible.
pub fn pack_resolved(sp: &SequencePair, blocks: &[Block], align: &AlignIndex) -> Result<Placement> {
    let n = blocks.len();
    assert!(sp.len() == n, "state does not match the block set");
    let pos1 = SequencePair::positions(&sp.gamma1);
    let pos2 = SequencePair::positions(&sp.gamma2);
    let dims: Vec<(f64, f64)> = (0..n)
        .map(|b| blocks[b].dims(sp.variant[b], sp.rotated[b]))
        .collect();

    let xs = pass_x(&sp.gamma1, &pos1, &pos2, &dims, None);
    let ys = pass_y(&sp.gamma2, &pos1, &pos2, &dims, None);

    let (xs, ys) = if align.is_empty() {
        (xs, ys)
    } else {
        let mut floor_x = vec![0.0f64; n];
        let mut floor_y = vec![0.0f64; n];
        for g in &align.v_align {
            let target = g.iter().map(|&b| xs[b]).fold(0.0, f64::max);
            for &b in g {
                floor_x[b] = floor_x[b].max(target);
            }
        }
        for g in &align.h_align {
            let target = g.iter().map(|&b| ys[b]).fold(0.0, f64::max);
            for &b in g {
                floor_y[b] = floor_y[b].max(target);
            }
        }
        let xs = pass_x(&sp.gamma1, &pos1, &pos2, &dims, Some(&floor_x));
        let ys = pass_y(&sp.gamma2, &pos1, &pos2, &dims, Some(&floor_y));
        for (g, label) in align.v_align.iter().zip(&align.v_labels) {
            let x0 = xs[g[0]];
            if g.iter().any(|&b| (xs[b] - x0).abs() > EPS) {
                return Err(Error::AlignmentInfeasible {
                    group: format!("v[{label}]"),
                });
            }
        }
        for (g, label) in align.h_align.iter().zip(&align.h_labels) {
            let y0 = ys[g[0]];
            if g.iter().any(|&b| (ys[b] - y0).abs() > EPS) {
                return Err(Error::AlignmentInfeasible {
                    group: format!("h[{label}]"),
                });
            }
        }
        (xs, ys)
    };

    let rects = (0..n)
        .map(|b| {
            (
                blocks[b].id.clone(),
                PlacedRect {
                    x: xs[b],
                    y: ys[b],
                    w: dims[b].0,
                    h: dims[b].1,
                    variant: sp.variant[b],
                    rotated: sp.rotated[b],
                    mirrored: false,
                },
            )
        })
        .collect();
    Ok(Placement::from_rects(rects))
}

/// x recurrence in first-sequence order: every left-predecessor of a block
/// appears earlier in that order.
fn pass_x(
    gamma1: &[usize],
    pos1: &[usize],
    pos2: &[usize],
    dims: &[(f64, f64)],
    floor: Option<&[f64]>,
) -> Vec<f64> {
    let mut xs = vec![0.0f64; dims.len()];
    for &i in gamma1 {
        let mut x = floor.map_or(0.0, |f| f[i]);
        for &j in gamma1 {
            if j == i {
                break;
            }
            // j left of i: j precedes i in both sequences.
            if pos1[j] < pos1[i] && pos2[j] < pos2[i] {
                x = x.max(xs[j] + dims[j].0);
            }
        }
        xs[i] = x;
    }
    xs
}

/// y recurrence in second-sequence order over below-predecessors.
fn pass_y(
    gamma2: &[usize],
    pos1: &[usize],
    pos2: &[usize],
    dims: &[(f64, f64)],
    floor: Option<&[f64]>,
) -> Vec<f64> {
    let mut ys = vec![0.0f64; dims.len()];
    for &i in gamma2 {
        let mut y = floor.map_or(0.0, |f| f[i]);
        for &j in gamma2 {
            if j == i {
                break;
            }
            // j below i: j follows i in the first sequence, precedes it in
            // the second.
            if pos1[j] > pos1[i] && pos2[j] < pos2[i] {
                y = y.max(ys[j] + dims[j].1);
            }
        }
        ys[i] = y;
    }
    ys
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Circuit, ShapeVariant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn abc_blocks() -> Vec<Block> {
        vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]),
            Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
        ]
    }

    fn abc_circuit() -> Circuit {
        Circuit::new("abc", abc_blocks(), vec![])
    }

    #[test]
    fn relation_left_when_ordered_in_both() {
        let sp = SequencePair::from_parts(vec![0, 1], vec![0, 1], vec![false; 2], vec![0; 2]);
        assert_eq!(sp.relation(0, 1), Relation::Left);
    }

    #[test]
    fn relation_below_when_orders_disagree() {
        // gamma1 = (a, b), gamma2 = (b, a): b is below a.
        let sp = SequencePair::from_parts(vec![0, 1], vec![1, 0], vec![false; 2], vec![0; 2]);
        assert_eq!(sp.relation(1, 0), Relation::Below);
        assert_eq!(sp.relation(0, 1), Relation::Above);
    }

    #[test]
    fn relation_is_antisymmetric() {
        let blocks: Vec<Block> = (0..6)
            .map(|i| Block::new(format!("b{i}"), vec![ShapeVariant::new(1.0, 1.0)]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let sp = SequencePair::random(&blocks, &mut rng);
            for i in 0..blocks.len() {
                for j in 0..blocks.len() {
                    if i == j {
                        continue;
                    }
                    let expect = match sp.relation(i, j) {
                        Relation::Left => Relation::Right,
                        Relation::Right => Relation::Left,
                        Relation::Below => Relation::Above,
                        Relation::Above => Relation::Below,
                    };
                    assert_eq!(sp.relation(j, i), expect);
                }
            }
        }
    }

    #[test]
    fn pack_chain() {
        let c = abc_circuit();
        let sp = SequencePair::identity(&c.blocks);
        let p = pack(&sp, &c).unwrap();
        assert_eq!(p.rects["a"].x, 0.0);
        assert_eq!(p.rects["b"].x, 2.0);
        assert_eq!(p.rects["c"].x, 5.0);
        assert!(p.rects.values().all(|r| r.y == 0.0));
        assert_eq!(p.width, 6.0);
        assert_eq!(p.height, 4.0);
        assert_eq!(p.area(), 24.0);
    }

    #[test]
    fn pack_with_below_relation() {
        let c = abc_circuit();
        let sp = SequencePair::from_parts(
            vec![0, 1, 2],
            vec![2, 0, 1],
            vec![false; 3],
            vec![0; 3],
        );
        let p = pack(&sp, &c).unwrap();
        assert_eq!((p.rects["c"].x, p.rects["c"].y), (0.0, 0.0));
        assert_eq!((p.rects["a"].x, p.rects["a"].y), (0.0, 4.0));
        assert_eq!((p.rects["b"].x, p.rects["b"].y), (2.0, 4.0));
        assert_eq!(p.width, 5.0);
        assert_eq!(p.height, 6.0);
        assert_eq!(p.area(), 30.0);
    }

    #[test]
    fn pack_single_block() {
        let c = Circuit::new(
            "one",
            vec![Block::new("a", vec![ShapeVariant::new(2.0, 3.0)])],
            vec![],
        );
        let sp = SequencePair::identity(&c.blocks);
        let p = pack(&sp, &c).unwrap();
        assert_eq!((p.rects["a"].x, p.rects["a"].y), (0.0, 0.0));
        assert_eq!((p.width, p.height), (2.0, 3.0));
    }

    #[test]
    fn alignment_snaps_to_group_maximum() {
        // Bottom band: d left of c; top band: a left of b; b sits above c.
        // Aligning b and c moves c from x=1 to b's x=2.
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]),
            Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
            Block::new("d", vec![ShapeVariant::new(1.0, 1.0)]),
        ];
        let mut c = Circuit::new("align", blocks, vec![]);
        c.constraints.v_align = vec![vec!["b".into(), "c".into()]];
        // gamma1 = (a, b, d, c), gamma2 = (d, c, a, b).
        let sp = SequencePair::from_parts(
            vec![0, 1, 3, 2],
            vec![3, 2, 0, 1],
            vec![false; 4],
            vec![0; 4],
        );
        let base = {
            let mut plain = c.clone();
            plain.constraints.v_align.clear();
            pack(&sp, &plain).unwrap()
        };
        assert_eq!(base.rects["c"].x, 1.0);
        assert_eq!(base.rects["b"].x, 2.0);
        let p = pack(&sp, &c).unwrap();
        assert_eq!(p.rects["b"].x, 2.0);
        assert_eq!(p.rects["c"].x, 2.0);
        assert!(p.non_overlapping());
    }

    #[test]
    fn infeasible_alignment_is_reported() {
        // a and b are stacked left-to-right with a left of b; forcing them to
        // share x is impossible because packing pushes b past a again.
        let mut c = abc_circuit();
        c.constraints.v_align = vec![vec!["a".into(), "b".into()]];
        let sp = SequencePair::identity(&c.blocks);
        match pack(&sp, &c) {
            Err(Error::AlignmentInfeasible { group }) => assert!(group.contains("a,b")),
            other => panic!("expected infeasible alignment, got {other:?}"),
        }
    }

    #[test]
    fn swap_both_example() {
        let blocks = abc_blocks()[..2].to_vec();
        let sp = SequencePair::identity(&blocks);
        let next = sp.apply(Move::SwapBoth(0, 1));
        assert_eq!(next.gamma1, vec![1, 0]);
        assert_eq!(next.gamma2, vec![1, 0]);
    }

    #[test]
    fn rotate_swaps_packed_footprint() {
        let c = Circuit::new(
            "rot",
            vec![Block::new("a", vec![ShapeVariant::new(2.0, 3.0)]).rotatable(true)],
            vec![],
        );
        let sp = SequencePair::identity(&c.blocks).apply(Move::Rotate(0));
        let p = pack(&sp, &c).unwrap();
        assert_eq!((p.rects["a"].w, p.rects["a"].h), (3.0, 2.0));
    }

    #[test]
    fn perturb_preserves_validity() {
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]).rotatable(true),
            Block::new(
                "b",
                vec![ShapeVariant::new(3.0, 1.0), ShapeVariant::new(1.0, 3.0)],
            ),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
            Block::new("d", vec![ShapeVariant::new(2.0, 1.0)]).rotatable(true),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sp = SequencePair::random(&blocks, &mut rng);
        for _ in 0..1000 {
            sp = sp.perturb_any(&blocks, &mut rng).state;
            assert!(sp.is_valid_for(&blocks));
        }
    }

    #[test]
    fn no_op_moves_are_flagged() {
        let blocks = vec![Block::new("a", vec![ShapeVariant::new(1.0, 1.0)])];
        let sp = SequencePair::identity(&blocks);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in MoveKind::ALL {
            let p = sp.perturb(kind, &blocks, &mut rng);
            assert!(!p.changed, "{kind:?} should be a no-op on one fixed block");
            assert_eq!(p.state, sp);
        }
    }

    #[test]
    fn random_state_is_deterministic_under_seed() {
        let blocks = abc_blocks();
        let a = SequencePair::random(&blocks, &mut ChaCha8Rng::seed_from_u64(42));
        let b = SequencePair::random(&blocks, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn random_state_permutation_pairs_are_uniform() {
        let blocks = abc_blocks();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut counts = BTreeMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            let sp = SequencePair::random(&blocks, &mut rng);
            *counts.entry((sp.gamma1.clone(), sp.gamma2.clone())).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 36);
        // Per-cell 3-sigma band around draws/36.
        let p = 1.0 / 36.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let mean = draws as f64 * p;
        for (combo, count) in counts {
            let dev = (count as f64 - mean).abs();
            assert!(dev <= 3.0 * sigma, "combo {combo:?} count {count} deviates");
        }
    }

    #[test]
    fn perturb_does_not_mutate_input() {
        let blocks = abc_blocks();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sp = SequencePair::random(&blocks, &mut rng);
        let copy = sp.clone();
        for _ in 0..50 {
            let _ = sp.perturb_any(&blocks, &mut rng);
        }
        assert_eq!(sp, copy);
    }

    #[test]
    fn packing_is_deterministic() {
        let c = abc_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sp = SequencePair::random(&c.blocks, &mut rng);
        let a = pack(&sp, &c).unwrap();
        let b = pack(&sp, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn packed_placements_never_overlap_and_respect_relations() {
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]).rotatable(true),
            Block::new(
                "b",
                vec![ShapeVariant::new(3.0, 1.0), ShapeVariant::new(1.0, 3.0)],
            ),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
            Block::new("d", vec![ShapeVariant::new(2.5, 1.5)]),
            Block::new("e", vec![ShapeVariant::new(1.0, 1.0)]).rotatable(true),
        ];
        let c = Circuit::new("five", blocks, vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let sp = SequencePair::random(&c.blocks, &mut rng);
            let p = pack(&sp, &c).unwrap();
            assert!(p.non_overlapping());
            for i in 0..c.blocks.len() {
                for j in 0..c.blocks.len() {
                    if i == j {
                        continue;
                    }
                    if sp.relation(i, j) == Relation::Left {
                        let ri = &p.rects[&c.blocks[i].id];
                        let rj = &p.rects[&c.blocks[j].id];
                        assert!(ri.x + ri.w <= rj.x + EPS);
                    }
                }
            }
        }
    }

    #[test]
    fn compaction_matches_recurrence() {
        let c = abc_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let sp = SequencePair::random(&c.blocks, &mut rng);
            let p = pack(&sp, &c).unwrap();
            for i in 0..c.blocks.len() {
                let ri = &p.rects[&c.blocks[i].id];
                let mut expect = 0.0f64;
                for j in 0..c.blocks.len() {
                    if i != j && sp.relation(j, i) == Relation::Left {
                        let rj = &p.rects[&c.blocks[j].id];
                        expect = expect.max(rj.x + rj.w);
                    }
                }
                assert!((ri.x - expect).abs() <= EPS);
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_blocks() -> impl Strategy<Value = Vec<Block>> {
            proptest::collection::vec(
                (1u32..=5, 1u32..=5, any::<bool>(), 1usize..=3),
                1..=6,
            )
            .prop_map(|specs| {
                specs
                    .into_iter()
                    .enumerate()
                    .map(|(i, (w, h, rot, k))| {
                        let variants = (0..k)
                            .map(|v| ShapeVariant::new((w + v as u32) as f64, h as f64))
                            .collect();
                        Block::new(format!("b{i}"), variants).rotatable(rot)
                    })
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn random_states_stay_valid_under_perturbation(
                blocks in arb_blocks(),
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut sp = SequencePair::random(&blocks, &mut rng);
                prop_assert!(sp.is_valid_for(&blocks));
                for _ in 0..40 {
                    sp = sp.perturb_any(&blocks, &mut rng).state;
                    prop_assert!(sp.is_valid_for(&blocks));
                }
            }

            #[test]
            fn packings_never_overlap(blocks in arb_blocks(), seed in any::<u64>()) {
                let c = Circuit::new("prop", blocks, vec![]);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sp = SequencePair::random(&c.blocks, &mut rng);
                let p = pack(&sp, &c).unwrap();
                prop_assert!(p.non_overlapping());
                prop_assert!(p.rects.values().all(|r| r.x >= 0.0 && r.y >= 0.0));
            }
        }
    }

    /// Move closure reaches the whole state space on a small fixture, so the
    /// search minimum over moves equals the exhaustive minimum.
    #[test]
    fn move_closure_spans_the_state_space() {
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]).rotatable(true),
            Block::new(
                "b",
                vec![ShapeVariant::new(3.0, 1.0), ShapeVariant::new(1.0, 3.0)],
            ),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
        ];
        let c = Circuit::new("closure", blocks, vec![]);
        let enumerate_moves = |sp: &SequencePair| -> Vec<Move> {
            let n = sp.len();
            let mut out = Vec::new();
            for p in 0..n {
                for q in p + 1..n {
                    out.push(Move::SwapGamma1(p, q));
                    out.push(Move::SwapBoth(p, q));
                }
            }
            for (b, blk) in c.blocks.iter().enumerate() {
                if blk.rotatable {
                    out.push(Move::Rotate(b));
                }
                for v in 0..blk.variants.len() {
                    if v != sp.variant[b] {
                        out.push(Move::Reshape(b, v));
                    }
                }
            }
            out
        };

        let start = SequencePair::identity(&c.blocks);
        let mut seen = BTreeSet::new();
        let key = |sp: &SequencePair| {
            (
                sp.gamma1.clone(),
                sp.gamma2.clone(),
                sp.rotated.clone(),
                sp.variant.clone(),
            )
        };
        let mut queue = vec![start.clone()];
        seen.insert(key(&start));
        let mut best_reachable = f64::INFINITY;
        while let Some(sp) = queue.pop() {
            best_reachable = best_reachable.min(pack(&sp, &c).unwrap().area());
            for mv in enumerate_moves(&sp) {
                let next = sp.apply(mv);
                if seen.insert(key(&next)) {
                    queue.push(next);
                }
            }
        }
        // 3! * 3! permutation pairs, 2 orientations of a, 2 variants of b.
        assert_eq!(seen.len(), 36 * 2 * 2);

        // Exhaustive enumeration over the same space.
        let perms: Vec<Vec<usize>> = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        let mut best_enum = f64::INFINITY;
        for g1 in &perms {
            for g2 in &perms {
                for rot_a in [false, true] {
                    for var_b in 0..2usize {
                        let sp = SequencePair::from_parts(
                            g1.clone(),
                            g2.clone(),
                            vec![rot_a, false, false],
                            vec![0, var_b, 0],
                        );
                        best_enum = best_enum.min(pack(&sp, &c).unwrap().area());
                    }
                }
            }
        }
        assert_eq!(best_reachable, best_enum);
    }
}
