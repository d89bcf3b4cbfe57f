//! Circuit file parsing. A block carries either explicit `variants` or a
//! `shape_spec` expanded through the shape enumerator at load time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_circuit, AspectOrientation, Block, Circuit, ConstraintSet, Net, Weights};
use crate::shapes::{enumerate_shapes, ShapeSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockFile {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    variants: Option<Vec<crate::model::ShapeVariant>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shape_spec: Option<ShapeSpec>,
    #[serde(default)]
    rotatable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_width: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CircuitFile {
    #[serde(default = "default_name")]
    name: String,
    blocks: Vec<BlockFile>,
    #[serde(default)]
    nets: Vec<Net>,
    #[serde(default)]
    constraints: ConstraintSet,
    #[serde(default)]
    weights: Weights,
    #[serde(default = "default_aspect")]
    target_aspect_ratio: f64,
    #[serde(default)]
    aspect_orientation: AspectOrientation,
}

fn default_name() -> String {
    "circuit".to_string()
}

fn default_aspect() -> f64 {
    1.0
}

fn syntax_error(e: &serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses and validates a circuit from JSON text. Shape-spec blocks are
/// expanded to explicit variants; semantic violations are returned as a
/// validation report, distinct from syntax errors.
pub fn parse_circuit_str(text: &str) -> Result<Circuit> {
    let file: CircuitFile = serde_json::from_str(text).map_err(|e| syntax_error(&e))?;
    let mut blocks = Vec::with_capacity(file.blocks.len());
    for b in file.blocks {
        let (variants, total_width) = match (b.variants, &b.shape_spec) {
            (Some(v), _) => (v, b.total_width),
            (None, Some(spec)) => (enumerate_shapes(spec)?, Some(spec.total_width)),
            (None, None) => (Vec::new(), b.total_width),
        };
        blocks.push(Block {
            id: b.id,
            variants,
            rotatable: b.rotatable,
            group: b.group,
            total_width,
        });
    }
    let circuit = Circuit {
        name: file.name,
        blocks,
        nets: file.nets,
        constraints: file.constraints,
        weights: file.weights,
        target_aspect_ratio: file.target_aspect_ratio,
        aspect_orientation: file.aspect_orientation,
    };
    validate_circuit(&circuit).into_result()?;
    Ok(circuit)
}

pub fn parse_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::InputFile {
        path: path.display().to_string(),
        source,
    })?;
    parse_circuit_str(&text)
}

/// Serializes a circuit model (always with explicit variants).
pub fn write_circuit(circuit: &Circuit, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(circuit).expect("circuit serializes");
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_one_block_file() {
        let c = parse_circuit_str(
            r#"{"blocks": [{"id": "M1", "variants": [{"width": 2.0, "height": 3.0}]}]}"#,
        )
        .unwrap();
        assert_eq!(c.blocks.len(), 1);
        assert_eq!(c.blocks[0].id, "M1");
        assert_eq!(c.name, "circuit");
    }

    #[test]
    fn weight_violation_is_a_semantic_error() {
        let err = parse_circuit_str(
            r#"{
                "blocks": [{"id": "M1", "variants": [{"width": 2.0, "height": 3.0}]}],
                "weights": {"alpha": 0.5, "beta": 0.6}
            }"#,
        )
        .unwrap_err();
        match err {
            Error::InvalidCircuit(report) => {
                assert!(report.to_string().contains("exceeds 1"));
            }
            other => panic!("expected a validation report, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_line_and_column() {
        let err = parse_circuit_str("{\n  \"blocks\": [,]\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn shape_spec_blocks_expand() {
        let c = parse_circuit_str(
            r#"{
                "blocks": [{
                    "id": "M1",
                    "shape_spec": {
                        "total_width": 12.0,
                        "finger_widths": [1.0, 2.0, 3.0],
                        "fingers": [1, 6],
                        "multiplicity": [1, 2],
                        "row_height": 1.0
                    }
                }]
            }"#,
        )
        .unwrap();
        assert!(c.blocks[0].variants.len() >= 2);
        assert_eq!(c.blocks[0].total_width, Some(12.0));
    }

    #[test]
    fn parse_serialize_parse_is_stable() {
        let text = r#"{
            "name": "rt",
            "blocks": [
                {"id": "A", "variants": [{"width": 2.0, "height": 3.0}], "rotatable": true},
                {"id": "B", "variants": [{"width": 2.0, "height": 3.0}]}
            ],
            "nets": [{"name": "n1", "pins": [{"block": "A", "dx": 0.5, "dy": 1.0}, {"block": "B"}]}],
            "constraints": {"symmetry_pairs": [["A", "B"]]},
            "weights": {"alpha": 0.4, "beta": 0.2},
            "target_aspect_ratio": 1.5
        }"#;
        let first = parse_circuit_str(text).unwrap();
        let serialized = serde_json::to_string(&first).unwrap();
        let second = parse_circuit_str(&serialized).unwrap();
        assert_eq!(first, second);
    }
}
