//! Shape-variant enumeration from an electrical width decomposition.
//!
//! A device of total width `W` is split into `fingers` parallel fingers of
//! `finger_width` each, stacked `multiplicity` rows high; a triple is legal
//! when `finger_width * fingers * multiplicity == W`. The footprint model is
//! linear: width = `fingers * (finger_width + spacing)`, height =
//! `multiplicity * row_height`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ShapeParams, ShapeVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub total_width: f64,
    /// Allowed finger widths, µm.
    pub finger_widths: Vec<f64>,
    /// Inclusive finger-count interval.
    pub fingers: (u32, u32),
    /// Inclusive multiplicity interval.
    pub multiplicity: (u32, u32),
    #[serde(default)]
    pub finger_spacing: f64,
    pub row_height: f64,
}

impl ShapeSpec {
    fn check(&self) -> bool {
        self.total_width > 0.0
            && !self.finger_widths.is_empty()
            && self.finger_widths.iter().all(|&w| w > 0.0)
            && self.fingers.0 >= 1
            && self.fingers.0 <= self.fingers.1
            && self.multiplicity.0 >= 1
            && self.multiplicity.0 <= self.multiplicity.1
            && self.finger_spacing >= 0.0
            && self.row_height > 0.0
    }
}

/// Enumerates every legal `(finger_width, fingers, multiplicity)` triple and
/// maps it to a footprint. The list is deduplicated by footprint and sorted
/// by width, then height, ascending. An empty result is an error so the
/// caller decides the fallback.
pub fn enumerate_shapes(spec: &ShapeSpec) -> Result<Vec<ShapeVariant>> {
    assert!(spec.check(), "malformed shape spec");
    let rel = 1e-9 * spec.total_width.abs().max(1.0);
    let mut variants: Vec<ShapeVariant> = Vec::new();
    let mut widths = spec.finger_widths.clone();
    widths.sort_by(f64::total_cmp);
    for &wf in &widths {
        for nf in spec.fingers.0..=spec.fingers.1 {
            for m in spec.multiplicity.0..=spec.multiplicity.1 {
                let product = wf * nf as f64 * m as f64;
                if (product - spec.total_width).abs() > rel {
                    continue;
                }
                let footprint = ShapeVariant {
                    width: nf as f64 * (wf + spec.finger_spacing),
                    height: m as f64 * spec.row_height,
                    params: Some(ShapeParams {
                        finger_width: wf,
                        fingers: nf,
                        multiplicity: m,
                    }),
                };
                if !variants
                    .iter()
                    .any(|v| v.width == footprint.width && v.height == footprint.height)
                {
                    variants.push(footprint);
                }
            }
        }
    }
    if variants.is_empty() {
        return Err(Error::NoLegalShape {
            total_width: spec.total_width,
        });
    }
    variants.sort_by(|a, b| {
        a.width
            .total_cmp(&b.width)
            .then(a.height.total_cmp(&b.height))
    });
    Ok(variants)
}
