use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate. Validation findings
/// are *not* errors (they are data, see `ValidationReport`); this enum
/// covers operations whose preconditions fail or whose computations
/// cannot complete.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structure is invalid: {0}")]
    InvalidStructure(String),

    #[error("unknown clone id {0}")]
    UnknownCloneId(usize),

    #[error("unknown model id {0}")]
    UnknownModel(usize),

    #[error("invalid address {addr}: {reason}")]
    InvalidAddress { addr: String, reason: String },

    #[error("addresses {a} and {b} are nested; the collection must be disjoint")]
    NestedAddresses { a: String, b: String },

    #[error("matrix not irreducible; persistent zero entries at {0:?} (1-based row, col)")]
    NotIrreducible(Vec<(usize, usize)>),

    #[error(
        "eigen-iteration did not converge within {iterations} iterations (best eigenvalue {best})"
    )]
    NonConvergence { best: f64, iterations: usize },

    #[error("operation requires Frobenius eigenvalue 1, found {lambda}")]
    EigenvalueNotUnit { lambda: f64 },

    #[error(
        "eigenvalue at d = 0 is {lambda} <= 1; structure violates the two-clones-per-model premise"
    )]
    DegenerateSpectrum { lambda: f64 },

    #[error("no upper bracket for the dimension below d = {cap}; eigenvalue still {lambda}")]
    BracketSearchFailed { cap: f64, lambda: f64 },

    #[error("root of the characteristic condition is not bracketed")]
    RootNotBracketed,

    #[error("1 is not the largest root at the solution (other root {other})")]
    NotLargestRoot { other: f64 },

    #[error("exact arithmetic unavailable: {0}")]
    ExactUnavailable(String),

    #[error("enumeration too large: {count} exceeds cap {cap}")]
    EnumerationTooLarge { count: u64, cap: u64 },

    #[error("caps exceeded (L <= {max_l}, S <= {max_s}); requested L = {l}, S = {s}, roughly {estimate:.3e} unions")]
    CapsExceeded {
        l: usize,
        s: usize,
        max_l: usize,
        max_s: usize,
        estimate: f64,
    },

    #[error("truncations were computed with different caps: ({0}, {1}) vs ({2}, {3})")]
    CapsMismatch(usize, usize, usize, usize),

    #[error("dimensions differ ({d_source} vs {d_target}); mass ratios across different dimensions are not meaningful")]
    DimensionMismatch { d_source: f64, d_target: f64 },

    #[error("pair index {0} out of range ({1} pairs)")]
    PairIndexOutOfRange(usize, usize),

    #[error("level {level} exceeds cap {cap}")]
    LevelTooDeep { level: usize, cap: usize },

    #[error("embedding is incomplete: {0}")]
    MissingEmbedding(String),

    #[error("embedding is invalid: {0}")]
    InvalidEmbedding(String),

    #[error("bad scale grid: {0}")]
    ScaleGrid(String),

    #[error("bad argument: {0}")]
    BadArgument(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
