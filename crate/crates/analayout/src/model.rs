//! Circuit data model shared by every stage: blocks with shape variants,
//! nets, topological constraints, validation, and the symmetry fold that
//! rewrites each symmetry pair into one mirrored composite block.
//!
//! All lengths are micrometers stored as `f64`; no integer grid is imposed
//! at the model level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqpair::{PlacedRect, Placement};

/// Relative tolerance used for the model-level identities.
pub const REL_TOL: f64 = 1e-9;

/// Electrical width decomposition behind a shape variant:
/// total width = `finger_width * fingers * multiplicity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub finger_width: f64,
    pub fingers: u32,
    pub multiplicity: u32,
}

impl ShapeParams {
    pub fn total_width(&self) -> f64 {
        self.finger_width * self.fingers as f64 * self.multiplicity as f64
    }
}

/// One physical realization of a block footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeVariant {
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ShapeParams>,
}

impl ShapeVariant {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            params: None,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// A placeable device or composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub variants: Vec<ShapeVariant>,
    #[serde(default)]
    pub rotatable: bool,
    /// Functional-block label supplied by upstream structure annotations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Declared electrical total width; variant params are checked against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_width: Option<f64>,
}

impl Block {
    pub fn new(id: impl Into<String>, variants: Vec<ShapeVariant>) -> Self {
        Self {
            id: id.into(),
            variants,
            rotatable: false,
            group: None,
            total_width: None,
        }
    }

    pub fn rotatable(mut self, yes: bool) -> Self {
        self.rotatable = yes;
        self
    }

    /// Footprint of the chosen variant, width/height swapped when rotated.
    pub fn dims(&self, variant: usize, rotated: bool) -> (f64, f64) {
        let v = &self.variants[variant];
        if rotated {
            (v.height, v.width)
        } else {
            (v.width, v.height)
        }
    }
}

/// Where a pin sits inside its block.
#[derive(Debug, Clone, PartialEq)]
pub enum PinOffset {
    /// Center of whichever variant is chosen.
    Center,
    /// Explicit offset against the first variant; rescaled proportionally
    /// for the other variants.
    Micron { dx: f64, dy: f64 },
    /// Exact offset per variant index (produced by the symmetry fold).
    PerVariant(Vec<(f64, f64)>),
}

/// A net pin: block reference plus offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PinRepr", into = "PinRepr")]
pub struct Pin {
    pub block: String,
    pub offset: PinOffset,
}

impl Pin {
    pub fn center(block: impl Into<String>) -> Self {
        Self {
            block: block.into(),
            offset: PinOffset::Center,
        }
    }

    pub fn at(block: impl Into<String>, dx: f64, dy: f64) -> Self {
        Self {
            block: block.into(),
            offset: PinOffset::Micron { dx, dy },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PinRepr {
    block: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    per_variant: Option<Vec<(f64, f64)>>,
}

impl From<PinRepr> for Pin {
    fn from(r: PinRepr) -> Self {
        let offset = if let Some(table) = r.per_variant {
            PinOffset::PerVariant(table)
        } else if let (Some(dx), Some(dy)) = (r.dx, r.dy) {
            PinOffset::Micron { dx, dy }
        } else {
            PinOffset::Center
        };
        Pin {
            block: r.block,
            offset,
        }
    }
}

impl From<Pin> for PinRepr {
    fn from(p: Pin) -> Self {
        let (dx, dy, per_variant) = match p.offset {
            PinOffset::Center => (None, None, None),
            PinOffset::Micron { dx, dy } => (Some(dx), Some(dy), None),
            PinOffset::PerVariant(t) => (None, None, Some(t)),
        };
        PinRepr {
            block: p.block,
            dx,
            dy,
            per_variant,
        }
    }
}

fn default_net_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub pins: Vec<Pin>,
    #[serde(default = "default_net_weight")]
    pub weight: f64,
}

impl Net {
    pub fn new(name: impl Into<String>, pins: Vec<Pin>) -> Self {
        Self {
            name: name.into(),
            pins,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(default)]
    pub symmetry_pairs: Vec<(String, String)>,
    /// Groups forced to share the same y coordinate.
    #[serde(default)]
    pub h_align: Vec<Vec<String>>,
    /// Groups forced to share the same x coordinate.
    #[serde(default)]
    pub v_align: Vec<Vec<String>>,
    /// Gap inserted between the members of a folded symmetry pair.
    #[serde(default)]
    pub symmetry_spacing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.3,
        }
    }
}

/// Which way the aspect ratio `R` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AspectOrientation {
    #[default]
    HeightOverWidth,
    WidthOverHeight,
}

fn default_aspect() -> f64 {
    1.0
}

fn default_name() -> String {
    "circuit".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    #[serde(default = "default_name")]
    pub name: String,
    pub blocks: Vec<Block>,
    #[serde(default)]
    pub nets: Vec<Net>,
    #[serde(default)]
    pub constraints: ConstraintSet,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "default_aspect")]
    pub target_aspect_ratio: f64,
    #[serde(default)]
    pub aspect_orientation: AspectOrientation,
}

impl Circuit {
    pub fn new(name: impl Into<String>, blocks: Vec<Block>, nets: Vec<Net>) -> Self {
        Self {
            name: name.into(),
            blocks,
            nets,
            constraints: ConstraintSet::default(),
            weights: Weights::default(),
            target_aspect_ratio: 1.0,
            aspect_orientation: AspectOrientation::default(),
        }
    }

    pub fn block_index(&self, id: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.id == id)
    }

    pub fn block(&self, id: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::UnknownBlock(id.to_string()))
    }

    /// Current aspect ratio of a `width x height` box under this circuit's
    /// orientation convention.
    pub fn aspect_ratio(&self, width: f64, height: f64) -> f64 {
        match self.aspect_orientation {
            AspectOrientation::HeightOverWidth => height / width,
            AspectOrientation::WidthOverHeight => width / height,
        }
    }
}

/// Pin offset in the frame of the chosen, possibly rotated, possibly
/// mirrored footprint; µm from the placed rect's lower-left corner.
pub fn resolve_pin_offset(
    block: &Block,
    offset: &PinOffset,
    variant: usize,
    rotated: bool,
    mirrored: bool,
) -> (f64, f64) {
    let v = &block.variants[variant];
    let (dx, dy) = match offset {
        PinOffset::Center => (v.width / 2.0, v.height / 2.0),
        PinOffset::Micron { dx, dy } => {
            let v0 = &block.variants[0];
            (dx / v0.width * v.width, dy / v0.height * v.height)
        }
        PinOffset::PerVariant(table) => table[variant],
    };
    let (dx, dy) = if mirrored { (v.width - dx, dy) } else { (dx, dy) };
    if rotated {
        (dy, dx)
    } else {
        (dx, dy)
    }
}

/// Absolute coordinate of a pin in a placement.
pub fn pin_position(circuit: &Circuit, placement: &Placement, pin: &Pin) -> Result<(f64, f64)> {
    let rect = placement
        .rects
        .get(&pin.block)
        .ok_or_else(|| Error::UnplacedBlock {
            net: String::new(),
            block: pin.block.clone(),
        })?;
    let block = circuit.block(&pin.block)?;
    let (dx, dy) = resolve_pin_offset(block, &pin.offset, rect.variant, rect.rotated, rect.mirrored);
    Ok((rect.x + dx, rect.y + dy))
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateBlockId { id: String },
    EmptyVariants { id: String },
    NonPositiveVariant { id: String, index: usize },
    TotalWidthMismatch { id: String, index: usize },
    PinTableLength { net: String, block: String },
    EmptyNet { net: String },
    UnknownPinBlock { net: String, block: String },
    NegativeNetWeight { net: String },
    RepeatedSymmetryBlock { id: String },
    UnknownConstraintBlock { id: String },
    SmallAlignmentGroup { axis: char, index: usize },
    NegativeWeight { which: &'static str },
    WeightSumExceedsOne { sum: f64 },
    NonPositiveAspectTarget,
    NegativeSymmetrySpacing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateBlockId { id } => write!(f, "duplicate block id `{id}`"),
            EmptyVariants { id } => write!(f, "block `{id}` has no shape variants"),
            NonPositiveVariant { id, index } => {
                write!(f, "block `{id}` variant {index} has non-positive dimensions")
            }
            TotalWidthMismatch { id, index } => write!(
                f,
                "block `{id}` variant {index}: finger_width*fingers*multiplicity disagrees with the declared total width"
            ),
            PinTableLength { net, block } => write!(
                f,
                "net `{net}`: pin on `{block}` has a per-variant table of the wrong length"
            ),
            EmptyNet { net } => write!(f, "net `{net}` has no pins"),
            UnknownPinBlock { net, block } => {
                write!(f, "net `{net}` references unknown block `{block}`")
            }
            NegativeNetWeight { net } => write!(f, "net `{net}` has a negative weight"),
            RepeatedSymmetryBlock { id } => {
                write!(f, "block `{id}` appears in more than one symmetry pair")
            }
            UnknownConstraintBlock { id } => {
                write!(f, "constraint references unknown block `{id}`")
            }
            SmallAlignmentGroup { axis, index } => write!(
                f,
                "{axis}_align group {index} has fewer than 2 distinct existing blocks"
            ),
            NegativeWeight { which } => write!(f, "weight {which} is negative"),
            WeightSumExceedsOne { sum } => write!(f, "alpha + beta = {sum} exceeds 1"),
            NonPositiveAspectTarget => write!(f, "target aspect ratio must be positive"),
            NegativeSymmetrySpacing => write!(f, "symmetry spacing must be non-negative"),
        }
    }
}

/// Every violated invariant with the offending id; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Turns a non-empty report into an error.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

pub fn validate_circuit(circuit: &Circuit) -> ValidationReport {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for b in &circuit.blocks {
        if !ids.insert(b.id.as_str()) {
            out.push(Violation::DuplicateBlockId { id: b.id.clone() });
        }
        if b.variants.is_empty() {
            out.push(Violation::EmptyVariants { id: b.id.clone() });
        }
        for (i, v) in b.variants.iter().enumerate() {
            if !(v.width > 0.0 && v.height > 0.0) {
                out.push(Violation::NonPositiveVariant {
                    id: b.id.clone(),
                    index: i,
                });
            }
        }
        // Params must agree with the declared total width, or with each
        // other when no width is declared explicitly.
        let declared = b.total_width.or_else(|| {
            b.variants
                .iter()
                .find_map(|v| v.params.as_ref().map(ShapeParams::total_width))
        });
        if let Some(w_tot) = declared {
            for (i, v) in b.variants.iter().enumerate() {
                if let Some(p) = &v.params {
                    let got = p.total_width();
                    if (got - w_tot).abs() > REL_TOL * w_tot.abs().max(1.0) {
                        out.push(Violation::TotalWidthMismatch {
                            id: b.id.clone(),
                            index: i,
                        });
                    }
                }
            }
        }
    }

    for net in &circuit.nets {
        if net.pins.is_empty() {
            out.push(Violation::EmptyNet {
                net: net.name.clone(),
            });
        }
        if net.weight < 0.0 {
            out.push(Violation::NegativeNetWeight {
                net: net.name.clone(),
            });
        }
        for pin in &net.pins {
            match circuit.block_index(&pin.block) {
                None => out.push(Violation::UnknownPinBlock {
                    net: net.name.clone(),
                    block: pin.block.clone(),
                }),
                Some(bi) => {
                    if let PinOffset::PerVariant(t) = &pin.offset {
                        if t.len() != circuit.blocks[bi].variants.len() {
                            out.push(Violation::PinTableLength {
                                net: net.name.clone(),
                                block: pin.block.clone(),
                            });
                        }
                    }
                }
            }
        }
    }

    let cs = &circuit.constraints;
    let mut seen_in_pair = BTreeSet::new();
    for (a, b) in &cs.symmetry_pairs {
        for id in [a, b] {
            if circuit.block_index(id).is_none() {
                out.push(Violation::UnknownConstraintBlock { id: id.clone() });
            }
            if !seen_in_pair.insert(id.clone()) {
                out.push(Violation::RepeatedSymmetryBlock { id: id.clone() });
            }
        }
    }
    for (axis, groups) in [('h', &cs.h_align), ('v', &cs.v_align)] {
        for (gi, group) in groups.iter().enumerate() {
            let mut distinct = BTreeSet::new();
            for id in group {
                if circuit.block_index(id).is_none() {
                    out.push(Violation::UnknownConstraintBlock { id: id.clone() });
                } else {
                    distinct.insert(id.as_str());
                }
            }
            if distinct.len() < 2 {
                out.push(Violation::SmallAlignmentGroup { axis, index: gi });
            }
        }
    }
    if cs.symmetry_spacing < 0.0 {
        out.push(Violation::NegativeSymmetrySpacing);
    }

    let w = &circuit.weights;
    if w.alpha < 0.0 {
        out.push(Violation::NegativeWeight { which: "alpha" });
    }
    if w.beta < 0.0 {
        out.push(Violation::NegativeWeight { which: "beta" });
    }
    if w.alpha + w.beta > 1.0 + 1e-12 {
        out.push(Violation::WeightSumExceedsOne {
            sum: w.alpha + w.beta,
        });
    }
    if circuit.target_aspect_ratio <= 0.0 || circuit.target_aspect_ratio.is_nan() {
        out.push(Violation::NonPositiveAspectTarget);
    }

    ValidationReport { violations: out }
}

// ---------------------------------------------------------------------------
// Symmetry folding
// ---------------------------------------------------------------------------

/// Metadata needed to expand a composite back into its two members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub composite: String,
    pub left: String,
    pub right: String,
    pub spacing: f64,
}

/// A circuit with symmetry pairs replaced by composite blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldedCircuit {
    pub circuit: Circuit,
    pub folds: Vec<FoldRecord>,
}

impl FoldedCircuit {
    /// Expands composite rects back to the original pair members. The right
    /// member is placed mirrored about the composite's vertical center axis.
    pub fn unfold(&self, placement: &Placement) -> Placement {
        let mut rects = placement.rects.clone();
        for fold in &self.folds {
            let Some(comp) = rects.remove(&fold.composite) else {
                continue;
            };
            let member_w = (comp.w - fold.spacing) / 2.0;
            rects.insert(
                fold.left.clone(),
                PlacedRect {
                    x: comp.x,
                    y: comp.y,
                    w: member_w,
                    h: comp.h,
                    variant: comp.variant,
                    rotated: false,
                    mirrored: false,
                },
            );
            rects.insert(
                fold.right.clone(),
                PlacedRect {
                    x: comp.x + member_w + fold.spacing,
                    y: comp.y,
                    w: member_w,
                    h: comp.h,
                    variant: comp.variant,
                    rotated: false,
                    mirrored: true,
                },
            );
        }
        Placement::from_rects(rects)
    }
}

fn unique_id(base: String, taken: &BTreeSet<String>) -> String {
    if !taken.contains(&base) {
        return base;
    }
    let mut i = 2;
    loop {
        let cand = format!("{base}_{i}");
        if !taken.contains(&cand) {
            return cand;
        }
        i += 1;
    }
}

/// Replaces each symmetry pair by a composite block twice the member width
/// plus the configured spacing, mirroring the second member's pins about the
/// composite center axis. Nets and alignment groups are rewritten to the
/// composite ids; symmetry constraints are consumed by the fold.
pub fn fold_symmetry(circuit: &Circuit) -> Result<FoldedCircuit> {
    let mut folded = circuit.clone();
    let mut folds = Vec::new();
    if circuit.constraints.symmetry_pairs.is_empty() {
        return Ok(FoldedCircuit {
            circuit: folded,
            folds,
        });
    }
    let spacing = circuit.constraints.symmetry_spacing;
    let mut taken: BTreeSet<String> = circuit.blocks.iter().map(|b| b.id.clone()).collect();
    // member id -> (composite id, mirrored)
    let mut remap: BTreeMap<String, (String, bool)> = BTreeMap::new();

    for (left_id, right_id) in &circuit.constraints.symmetry_pairs {
        let left = circuit.block(left_id)?;
        let right = circuit.block(right_id)?;
        let dims_match = left.variants.len() == right.variants.len()
            && left.variants.iter().zip(&right.variants).all(|(a, b)| {
                (a.width - b.width).abs() <= REL_TOL * a.width.abs().max(1.0)
                    && (a.height - b.height).abs() <= REL_TOL * a.height.abs().max(1.0)
            });
        if !dims_match {
            return Err(Error::SymmetryMismatch(left_id.clone(), right_id.clone()));
        }
        let comp_id = unique_id(format!("{left_id}+{right_id}"), &taken);
        taken.insert(comp_id.clone());
        let variants = left
            .variants
            .iter()
            .map(|v| ShapeVariant::new(2.0 * v.width + spacing, v.height))
            .collect();
        let group = match (&left.group, &right.group) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        let comp = Block {
            id: comp_id.clone(),
            variants,
            rotatable: false,
            group,
            total_width: None,
        };
        // Replace the left member in place to keep a stable block order.
        let li = folded.block_index(left_id).expect("member exists");
        folded.blocks[li] = comp;
        folded.blocks.retain(|b| b.id != *right_id);
        remap.insert(left_id.clone(), (comp_id.clone(), false));
        remap.insert(right_id.clone(), (comp_id.clone(), true));
        folds.push(FoldRecord {
            composite: comp_id,
            left: left_id.clone(),
            right: right_id.clone(),
            spacing,
        });
    }

    // Rewrite pins on folded members into exact per-variant composite offsets.
    for net in &mut folded.nets {
        for pin in &mut net.pins {
            let Some((comp_id, mirrored)) = remap.get(&pin.block) else {
                continue;
            };
            let member = circuit.block(&pin.block)?;
            let table = member
                .variants
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let (dx, dy) = resolve_pin_offset(member, &pin.offset, k, false, false);
                    if *mirrored {
                        // Composite width at variant k = 2 w_k + spacing.
                        (2.0 * v.width + spacing - dx, dy)
                    } else {
                        (dx, dy)
                    }
                })
                .collect();
            pin.block = comp_id.clone();
            pin.offset = PinOffset::PerVariant(table);
        }
    }

    // Alignment groups follow their members into the composites.
    let remap_group = |groups: &mut Vec<Vec<String>>| {
        for group in groups.iter_mut() {
            let mut seen = BTreeSet::new();
            let mut next = Vec::new();
            for id in group.iter() {
                let mapped = remap.get(id).map(|(c, _)| c.clone()).unwrap_or_else(|| id.clone());
                if seen.insert(mapped.clone()) {
                    next.push(mapped);
                }
            }
            *group = next;
        }
        // A group collapsed onto a single composite is trivially satisfied.
        groups.retain(|g| g.len() >= 2);
    };
    remap_group(&mut folded.constraints.h_align);
    remap_group(&mut folded.constraints.v_align);
    folded.constraints.symmetry_pairs.clear();

    Ok(FoldedCircuit {
        circuit: folded,
        folds,
    })
}
