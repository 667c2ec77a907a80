//! Numerical thresholds shared by the design and metric routines.

/// All absolute and relative thresholds in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Minimum beam-pair gain `|w^H H f|` for a selection to count.
    pub degenerate_gain: f64,
    /// Minimum Gram-Schmidt residual norm before a vector is considered dependent.
    pub span_collapse: f64,
    /// Pivot floor for the Cholesky factor of the combiner Gram matrix.
    pub singular_combiner: f64,
    /// Minimum combiner column norm in the SINR computation.
    pub zero_column: f64,
    /// `s_k / s_1` below which a singular value is treated as zero.
    pub rank_relative: f64,
    /// Elementwise distance under which two codebook vectors are the same beam.
    pub beam_equality: f64,
    /// Interference-to-signal ratio considered numerically zero.
    pub interference: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    degenerate_gain: 1e-12,
    span_collapse: 1e-10,
    singular_combiner: 1e-12,
    zero_column: 1e-12,
    rank_relative: 1e-12,
    beam_equality: 1e-9,
    interference: 1e-8,
};
