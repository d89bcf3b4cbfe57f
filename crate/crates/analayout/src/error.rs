//! Crate-wide error type.

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Semantic violations found by circuit validation.
    #[error("invalid circuit:\n{0}")]
    InvalidCircuit(ValidationReport),

    /// A block id that does not exist in the circuit.
    #[error("unknown block id `{0}`")]
    UnknownBlock(String),

    /// Symmetry pair whose members do not share variant dimensions.
    #[error("symmetry pair ({0}, {1}) has mismatched variant dimensions")]
    SymmetryMismatch(String, String),

    /// Alignment snapping could not be satisfied for this state.
    #[error("alignment group {group} cannot be satisfied for this state")]
    AlignmentInfeasible { group: String },

    /// Shape enumeration produced no legal variant.
    #[error("no legal shape decomposition for total width {total_width}")]
    NoLegalShape { total_width: f64 },

    /// A net references a block missing from the placement.
    #[error("net `{net}` has a pin on unplaced block `{block}`")]
    UnplacedBlock { net: String, block: String },

    /// A routing terminal lies strictly inside an obstacle.
    #[error("net `{net}`: terminal ({x}, {y}) lies inside an obstacle")]
    UnroutableTerminal { net: String, x: f64, y: f64 },

    /// A routing terminal cannot be reached on the grid.
    #[error("net `{net}`: terminal ({x}, {y}) is unreachable")]
    UnroutableNet { net: String, x: f64, y: f64 },

    /// An action id outside the environment's action set.
    #[error("illegal action {action} for an environment with {count} actions")]
    IllegalAction { action: usize, count: usize },

    /// step() called on a finished episode.
    #[error("episode is finished; call reset() before stepping")]
    EpisodeFinished,

    /// PPO produced a non-finite loss.
    #[error("training aborted: non-finite loss ({0})")]
    TrainingDiverged(String),

    /// Malformed input text (syntax, not semantics).
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An input file that cannot be opened or read.
    #[error("cannot read input `{path}`: {source}")]
    InputFile {
        path: String,
        source: std::io::Error,
    },

    /// A model file whose header does not match the requested use.
    #[error("model file mismatch: {0}")]
    ModelMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
