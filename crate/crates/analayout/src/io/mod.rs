//! File formats, SVG rendering, and the benchmark runner.
//!
//! Everything on disk is JSON (circuits, placements, conduits, models) or
//! CSV (benchmark summaries, cost traces); all writers are deterministic
//! for identical inputs so pipeline outputs can be compared byte for byte.

mod bench;
mod circuit_file;
mod placement_file;
mod svg;

pub use bench::{
    run_benchmark, write_records, write_summary_csv, AlgoKind, BenchConfig, BenchModels,
    BenchOutcome, RunRecord, SummaryRow,
};
pub use circuit_file::{parse_circuit, parse_circuit_str, write_circuit};
pub use placement_file::{
    export_conduits, load_conduits, load_placement, save_placement, write_trace_csv,
    ConduitEntry, ConduitFile, PlacementFile, PlacementMetrics,
};
pub use svg::{emit_svg, render_svg, SvgOptions};
