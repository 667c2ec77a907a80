use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("codebook bits must be in 1..=16, got {0}")]
    BitsOutOfRange(u32),

    #[error("degenerate channel: best remaining beam-pair gain {gain:e} is below threshold")]
    DegenerateChannel { gain: f64 },

    #[error("vector lies in the span of the existing basis (residual norm {residual:e})")]
    SpanCollapse { residual: f64 },

    #[error("channel rank is below the requested {requested} streams")]
    RankDeficient { requested: usize },

    #[error("exhaustive search would evaluate {count} combinations (limit {limit})")]
    InstanceTooLarge { count: u128, limit: u128 },

    #[error("combiner Gram matrix is singular")]
    SingularCombiner,

    #[error("combiner column {0} is numerically zero")]
    ZeroCombinerColumn(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
