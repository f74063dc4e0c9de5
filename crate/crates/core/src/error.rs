//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`DpkError`]. Engine-level
//! failures wrap the measure-level condition that triggered them (for
//! example, a prior assigning zero mass to a nonempty partition block
//! surfaces as [`DpkError::PriorNullBlock`]).

use thiserror::Error;

/// Errors produced by measures, models, partitions, and update engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpkError {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),

    #[error("invalid event: atom index {index} out of range for {m} atoms")]
    InvalidEvent { index: usize, m: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Conditioning on a nonempty event of probability zero. Conditioning on
    /// the empty event is not an error: it yields zero by convention.
    #[error("conditioning event is nonempty but has probability zero")]
    NullNonemptyConditioner,

    #[error("operands live on different state spaces")]
    SpaceMismatch,

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid convex weights: {0}")]
    InvalidWeights(String),

    #[error("invalid observation model: {0}")]
    InvalidModel(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("symbol `{0}` was already observed")]
    DuplicateObservation(String),

    #[error("partition does not match this model: {0}")]
    ModelMismatch(String),

    /// The tacit positivity assumption failed: the prior gives zero
    /// probability to a nonempty block, so the update ratio is undefined.
    #[error("prior assigns zero probability to nonempty partition block `{block}`")]
    PriorNullBlock { block: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("generator {generator} assigns zero probability to the nonempty conditioning event")]
    NullConditioner { generator: usize },

    #[error("lower envelope of the conditioning event is zero")]
    NullEnvelope,

    /// The geometric upper bound came out above one. Not expected to occur;
    /// surfaced as an error rather than clamped.
    #[error("geometric upper bound exceeds one: {0}")]
    UpperBoundExceedsOne(f64),

    #[error("witness index {index} out of range for {len} generators")]
    InvalidWitness { index: usize, len: usize },

    #[error("empty credal set")]
    EmptyCredalSet,

    #[error("invalid coarsening map: {0}")]
    InvalidCoarsening(String),

    #[error("empty preimage for product symbol `{0}`")]
    EmptyPreimage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid stream: {0}")]
    InvalidStream(String),

    #[error("linear program failed: {0}")]
    LpFailure(String),
}

pub type Result<T> = std::result::Result<T, DpkError>;
