//! Floorplan cost: bounding-box area, half-perimeter wirelength with a
//! sliding-window normalizer, aspect-ratio penalty, and the combined
//! weighted objective
//!
//! `total = alpha * area/sum_block_area + beta * hpwl/hpwl_avg
//!          + (1 - alpha - beta) * (target_ratio - ratio)^2`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{pin_position, Circuit};
use crate::seqpair::Placement;

/// Window length of the wirelength normalizer.
pub const HPWL_WINDOW: usize = 100;

/// Ring buffer of recent HPWL values; the mean standardizes the wirelength
/// term. One tracker per search instance.
#[derive(Debug, Clone, Default)]
pub struct CostTracker {
    window: VecDeque<f64>,
}

impl CostTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, hpwl: f64) {
        if self.window.len() == HPWL_WINDOW {
            self.window.pop_front();
        }
        self.window.push_back(hpwl);
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Arithmetic mean of the stored values.
    pub fn average(&self) -> Option<f64> {
        if self.window.is_empty() {
            None
        } else {
            Some(self.window.iter().sum::<f64>() / self.window.len() as f64)
        }
    }
}

/// Weighted half-perimeter wirelength over all nets. A single-pin net has a
/// degenerate bounding box and contributes zero.
pub fn hpwl(circuit: &Circuit, placement: &Placement) -> Result<f64> {
    let mut total = 0.0;
    for net in &circuit.nets {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for pin in &net.pins {
            let (x, y) = pin_position(circuit, placement, pin).map_err(|e| match e {
                Error::UnplacedBlock { block, .. } => Error::UnplacedBlock {
                    net: net.name.clone(),
                    block,
                },
                other => other,
            })?;
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        if net.pins.is_empty() {
            continue;
        }
        total += net.weight * ((max_x - min_x) + (max_y - min_y));
    }
    Ok(total)
}

/// Bounding-box area of the placement, µm².
pub fn area_cost(placement: &Placement) -> f64 {
    placement.width * placement.height
}

/// Percentage of the bounding box not covered by blocks.
pub fn empty_space(placement: &Placement) -> f64 {
    let f_area = area_cost(placement);
    if f_area == 0.0 {
        return 0.0;
    }
    100.0 * (f_area - placement.block_area()) / f_area
}

/// The combined objective split into its raw terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub area_term: f64,
    pub wirelength_term: f64,
    pub aspect_term: f64,
    pub total: f64,
    pub f_area: f64,
    pub hpwl: f64,
    pub aspect_ratio: f64,
}

/// Evaluates the combined cost and then records the current HPWL in the
/// tracker. Until a first value is recorded the normalizer equals the
/// current HPWL, which makes the first wirelength term exactly one.
pub fn combined_cost(
    circuit: &Circuit,
    placement: &Placement,
    tracker: &mut CostTracker,
) -> Result<CostBreakdown> {
    let f_area = area_cost(placement);
    let block_area = placement.block_area();
    let wl = hpwl(circuit, placement)?;

    let area_term = f_area / block_area;
    let wirelength_term = match tracker.average() {
        Some(avg) if avg > 0.0 => wl / avg,
        Some(_) | None => {
            if wl == 0.0 {
                0.0
            } else {
                1.0
            }
        }
    };
    let ratio = circuit.aspect_ratio(placement.width, placement.height);
    let aspect_term = (circuit.target_aspect_ratio - ratio).powi(2);

    let alpha = circuit.weights.alpha;
    let beta = circuit.weights.beta;
    let total = alpha * area_term + beta * wirelength_term + (1.0 - alpha - beta) * aspect_term;

    tracker.push(wl);
    Ok(CostBreakdown {
        area_term,
        wirelength_term,
        aspect_term,
        total,
        f_area,
        hpwl: wl,
        aspect_ratio: ratio,
    })
}

/// Which objective a search optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostModel {
    /// Bounding-box area only.
    Area,
    /// Weighted area + wirelength + aspect penalty.
    #[default]
    Combined,
}

/// Owns the cost state of one search instance.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub model: CostModel,
    pub tracker: CostTracker,
}

impl Evaluator {
    pub fn new(model: CostModel) -> Self {
        Self {
            model,
            tracker: CostTracker::new(),
        }
    }

    pub fn evaluate(&mut self, circuit: &Circuit, placement: &Placement) -> Result<f64> {
        match self.model {
            CostModel::Area => Ok(area_cost(placement)),
            CostModel::Combined => Ok(combined_cost(circuit, placement, &mut self.tracker)?.total),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, Circuit, Net, Pin, ShapeVariant, Weights};
    use crate::seqpair::{pack, PlacedRect, SequencePair};
    use rand::Rng as _;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn unit_block(id: &str) -> Block {
        Block::new(id, vec![ShapeVariant::new(1.0, 1.0)])
    }

    fn point_placement(points: &[(&str, f64, f64)]) -> Placement {
        let rects: BTreeMap<String, PlacedRect> = points
            .iter()
            .map(|&(id, x, y)| {
                (
                    id.to_string(),
                    PlacedRect {
                        x,
                        y,
                        w: 1.0,
                        h: 1.0,
                        variant: 0,
                        rotated: false,
                        mirrored: false,
                    },
                )
            })
            .collect();
        Placement::from_rects(rects)
    }

    /// Circuit whose unit blocks put pin centers at (x+0.5, y+0.5), so pin
    /// spans match the rect spans used to author the fixtures.
    fn pin_fixture() -> Circuit {
        let blocks = vec![unit_block("p0"), unit_block("p1"), unit_block("p2")];
        Circuit::new("pins", blocks, vec![])
    }

    #[test]
    fn single_pin_net_contributes_zero() {
        let mut c = pin_fixture();
        c.nets = vec![Net::new("n", vec![Pin::center("p0")])];
        let p = point_placement(&[("p0", 0.0, 0.0), ("p1", 3.0, 4.0), ("p2", 1.0, 1.0)]);
        assert_eq!(hpwl(&c, &p).unwrap(), 0.0);
    }

    #[test]
    fn hpwl_of_two_point_net() {
        let mut c = pin_fixture();
        c.nets = vec![Net::new("n", vec![Pin::center("p0"), Pin::center("p1")])];
        // Centers at (0,0) and (3,4) via corner offsets of -0.5.
        let p = point_placement(&[("p0", -0.5, -0.5), ("p1", 2.5, 3.5), ("p2", 9.0, 9.0)]);
        assert!((hpwl(&c, &p).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn hpwl_sums_weighted_nets() {
        let mut c = pin_fixture();
        c.nets = vec![
            Net::new("a", vec![Pin::at("p0", 0.0, 0.0), Pin::at("p1", 0.0, 0.0)]),
            Net::new(
                "b",
                vec![
                    Pin::at("p0", 1.0, 1.0),
                    Pin::at("p1", -1.0, 1.0),
                    Pin::at("p2", -1.0, 2.0),
                ],
            ),
        ];
        // Pin coords net a: (0,0), (3,4) -> 7.
        // Net b: (1,1), (2,5), (0,3) -> (2-0) + (5-1) = 6.
        let p = point_placement(&[("p0", 0.0, 0.0), ("p1", 3.0, 4.0), ("p2", 1.0, 1.0)]);
        assert!((hpwl(&c, &p).unwrap() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn unplaced_block_is_an_error() {
        let mut c = pin_fixture();
        c.nets = vec![Net::new("n", vec![Pin::center("p0"), Pin::center("p1")])];
        let p = point_placement(&[("p0", 0.0, 0.0)]);
        assert!(matches!(
            hpwl(&c, &p),
            Err(Error::UnplacedBlock { net, block }) if net == "n" && block == "p1"
        ));
    }

    #[test]
    fn area_of_packed_chain() {
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]),
            Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
        ];
        let c = Circuit::new("chain", blocks, vec![]);
        let p = pack(&SequencePair::identity(&c.blocks), &c).unwrap();
        assert_eq!(area_cost(&p), 24.0);
        assert!(area_cost(&p) >= p.block_area());
        // Empty space of the chain: 100 * (24 - 11) / 24.
        assert!((empty_space(&p) - 100.0 * 13.0 / 24.0).abs() < 1e-9);
    }

    #[test]
    fn empty_space_bounds() {
        let c = Circuit::new("one", vec![Block::new("a", vec![ShapeVariant::new(2.0, 3.0)])], vec![]);
        let p = pack(&SequencePair::identity(&c.blocks), &c).unwrap();
        assert_eq!(empty_space(&p), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]),
            Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
            Block::new("c", vec![ShapeVariant::new(1.0, 4.0)]),
        ];
        let c = Circuit::new("rand", blocks, vec![]);
        for _ in 0..50 {
            let p = pack(&SequencePair::random(&c.blocks, &mut rng), &c).unwrap();
            let e = empty_space(&p);
            assert!((0.0..100.0).contains(&e));
        }
    }

    #[test]
    fn combined_cost_hand_example() {
        // alpha 0.5, beta 0.3, F=120, sum A=100, HPWL=70, avg=70, R*=1, R=1.2
        // -> 0.5*1.2 + 0.3*1.0 + 0.2*0.04 = 0.908
        let mut c = Circuit::new(
            "hand",
            vec![Block::new("a", vec![ShapeVariant::new(100.0, 1.0)])],
            vec![],
        );
        c.weights = Weights {
            alpha: 0.5,
            beta: 0.3,
        };
        c.target_aspect_ratio = 1.0;
        // One 100x1 block in a 100x120-ish box is awkward; instead drive the
        // formula directly through a crafted placement: block area 100,
        // bounding box 120, ratio 1.2.
        let mut rects = BTreeMap::new();
        rects.insert(
            "a".to_string(),
            PlacedRect {
                x: 0.0,
                y: 0.0,
                w: 10.0,
                h: 10.0,
                variant: 0,
                rotated: false,
                mirrored: false,
            },
        );
        // Bounding box forced via a zero-area phantom is not representable;
        // craft the placement fields directly.
        let placement = Placement {
            rects,
            width: 10.0,
            height: 12.0,
        };
        c.blocks[0].variants[0] = ShapeVariant::new(10.0, 10.0);
        c.nets = vec![Net::new("n", vec![Pin::at("a", 0.0, 0.0), Pin::at("a", 35.0, 35.0)])];
        let mut tracker = CostTracker::new();
        tracker.push(70.0);
        let bd = combined_cost(&c, &placement, &mut tracker).unwrap();
        assert!((bd.hpwl - 70.0).abs() < 1e-12);
        assert!((bd.total - 0.908).abs() < 1e-12);
        assert!(
            (bd.total
                - (0.5 * bd.area_term + 0.3 * bd.wirelength_term + 0.2 * bd.aspect_term))
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn weight_collapse_to_pure_area() {
        let blocks = vec![
            Block::new("a", vec![ShapeVariant::new(2.0, 2.0)]),
            Block::new("b", vec![ShapeVariant::new(3.0, 1.0)]),
        ];
        let mut c = Circuit::new("areaonly", blocks, vec![]);
        c.weights = Weights {
            alpha: 1.0,
            beta: 0.0,
        };
        let p = pack(&SequencePair::identity(&c.blocks), &c).unwrap();
        let mut tracker = CostTracker::new();
        let bd = combined_cost(&c, &p, &mut tracker).unwrap();
        assert!((bd.total - area_cost(&p) / p.block_area()).abs() < 1e-12);
    }

    #[test]
    fn perfect_aspect_and_zero_weights_give_zero() {
        let mut c = Circuit::new(
            "aspect",
            vec![Block::new("a", vec![ShapeVariant::new(2.0, 2.0)])],
            vec![],
        );
        c.weights = Weights {
            alpha: 0.0,
            beta: 0.0,
        };
        c.target_aspect_ratio = 1.0;
        let p = pack(&SequencePair::identity(&c.blocks), &c).unwrap();
        let bd = combined_cost(&c, &p, &mut CostTracker::new()).unwrap();
        assert_eq!(bd.total, 0.0);
    }

    #[test]
    fn hpwl_is_translation_invariant() {
        let mut c = pin_fixture();
        c.nets = vec![
            Net::new("a", vec![Pin::center("p0"), Pin::center("p1")]),
            Net::new("b", vec![Pin::center("p1"), Pin::center("p2")]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let pts: Vec<(&str, f64, f64)> = vec![
                ("p0", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
                ("p1", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
                ("p2", rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)),
            ];
            let base = point_placement(&pts);
            let (dx, dy) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
            let shifted_pts: Vec<(&str, f64, f64)> =
                pts.iter().map(|&(id, x, y)| (id, x + dx, y + dy)).collect();
            let shifted = point_placement(&shifted_pts);
            let a = hpwl(&c, &base).unwrap();
            let b = hpwl(&c, &shifted).unwrap();
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn tracker_mean_matches_recompute() {
        let mut tracker = CostTracker::new();
        let mut shadow: Vec<f64> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for i in 0..500 {
            let v = rng.random_range(0.0..100.0);
            tracker.push(v);
            shadow.push(v);
            let tail = &shadow[shadow.len().saturating_sub(HPWL_WINDOW)..];
            let expect = tail.iter().sum::<f64>() / tail.len() as f64;
            assert_eq!(tracker.average().unwrap(), expect, "step {i}");
            assert!(tracker.len() <= HPWL_WINDOW);
        }
    }

    #[test]
    fn combined_cost_monotone_in_area_when_beta_zero() {
        let mut c = Circuit::new(
            "mono",
            vec![Block::new("a", vec![ShapeVariant::new(2.0, 2.0)])],
            vec![],
        );
        c.weights = Weights {
            alpha: 0.7,
            beta: 0.0,
        };
        c.target_aspect_ratio = 1.0;
        let make = |w: f64| Placement {
            rects: {
                let mut m = BTreeMap::new();
                m.insert(
                    "a".into(),
                    PlacedRect {
                        x: 0.0,
                        y: 0.0,
                        w: 2.0,
                        h: 2.0,
                        variant: 0,
                        rotated: false,
                        mirrored: false,
                    },
                );
                m
            },
            width: w,
            height: w,
        };
        let mut last = f64::NEG_INFINITY;
        for w in [2.0, 3.0, 4.0, 8.0] {
            let bd = combined_cost(&c, &make(w), &mut CostTracker::new()).unwrap();
            assert!(bd.total > last);
            last = bd.total;
        }
    }
}
