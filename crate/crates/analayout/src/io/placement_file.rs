//! Placement, trace and conduit files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Circuit;
use crate::route::Conduit;
use crate::search::TracePoint;
use crate::seqpair::Placement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementMetrics {
    pub cost: f64,
    pub hpwl: f64,
    pub empty_space_pct: f64,
    pub area: f64,
}

/// Versioned placement dump; everything needed to re-derive the metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementFile {
    pub format_version: u32,
    pub circuit: String,
    pub algorithm: String,
    pub seed: u64,
    pub placement: Placement,
    pub metrics: PlacementMetrics,
    /// Echo of the search configuration that produced this placement.
    pub config: serde_json::Value,
}

impl PlacementFile {
    pub const VERSION: u32 = 1;
}

fn parse_error(e: &serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn save_placement(file: &PlacementFile, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(file).expect("serializes"))?;
    Ok(())
}

pub fn load_placement(path: &Path) -> Result<PlacementFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::InputFile {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| parse_error(&e))
}

/// `step,current_cost,best_cost` rows of a search trace.
pub fn write_trace_csv(trace: &[TracePoint], path: &Path) -> Result<()> {
    let mut out = String::from("step,current_cost,best_cost\n");
    for t in trace {
        out.push_str(&format!("{},{:.9},{:.9}\n", t.step, t.current, t.best));
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Conduit export
// ---------------------------------------------------------------------------

/// One conduit as handed to the detailed-routing stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConduitEntry {
    pub orientation: String,
    pub layer: u8,
    pub span: (f64, f64),
    pub cross_position: f64,
    pub width: f64,
    pub nets: Vec<String>,
    /// Ids of every block connected by the member nets.
    pub blocks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConduitFile {
    pub format_version: u32,
    pub conduits: Vec<ConduitEntry>,
}

impl ConduitFile {
    pub fn from_conduits(conduits: &[Conduit], circuit: &Circuit) -> Self {
        let entries = conduits
            .iter()
            .map(|c| {
                let mut blocks: Vec<String> = Vec::new();
                for net_name in &c.nets {
                    if let Some(net) = circuit.nets.iter().find(|n| &n.name == net_name) {
                        for pin in &net.pins {
                            if !blocks.contains(&pin.block) {
                                blocks.push(pin.block.clone());
                            }
                        }
                    }
                }
                blocks.sort();
                ConduitEntry {
                    orientation: match c.orientation {
                        crate::route::Orientation::Horizontal => "horizontal".to_string(),
                        crate::route::Orientation::Vertical => "vertical".to_string(),
                    },
                    layer: c.layer,
                    span: c.span,
                    cross_position: c.cross,
                    width: c.width,
                    nets: c.nets.clone(),
                    blocks,
                }
            })
            .collect();
        Self {
            format_version: 1,
            conduits: entries,
        }
    }
}

pub fn export_conduits(conduits: &[Conduit], circuit: &Circuit, path: &Path) -> Result<()> {
    let file = ConduitFile::from_conduits(conduits, circuit);
    std::fs::write(path, serde_json::to_string_pretty(&file).expect("serializes"))?;
    Ok(())
}

pub fn load_conduits(path: &Path) -> Result<ConduitFile> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::InputFile {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| parse_error(&e))
}
