//! Codebook-based joint hybrid analog/digital precoder and combiner design
//! for millimeter-wave MIMO spatial multiplexing.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices and the thin SVD.
//! - [`channel`]: clustered narrowband channels over uniform linear arrays.
//! - [`codebook`]: beamsteering codebooks on a uniform angle grid.
//! - [`beamdesign`]: the successive joint beam-pair selection with residual
//!   projection, plus full-digital, greedy and exhaustive reference designs.
//! - [`metrics`]: spectral efficiency, per-stream SINR, sum-rate and the
//!   water-filling capacity bound.
//! - [`experiment`]: reproducible parameter sweeps and CSV output.

pub mod beamdesign;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod tolerance;

pub use beamdesign::{
    deflate, exhaustive_joint_search, full_digital_svd, greedy_no_deflation, joint_design, orthonormal_residual,
    select_pair, BeamPair, FullDigitalDesign, HybridDesign,
};
pub use channel::{
    cluster_powers, sample_channel, sample_laplacian_angle, ula_response, ArrayConfig, ChannelParams,
    ChannelRealization, MeanAngleRange, PowerProfile, Ray,
};
pub use codebook::{build_beamsteering_codebook, distinct_beam_count, Codebook};
pub use error::{Error, Result};
pub use experiment::{run_sweep, Algorithm, ExperimentConfig, SweepAxis, SweepOutput, SummaryRow, TrialRecord};
pub use linalg::{ComplexMatrix, Svd, C64};
pub use metrics::{per_stream_sinr, spectral_efficiency, sum_rate, waterfilling_capacity, LinkBudget, RateUnit};
pub use tolerance::{Tolerances, TOLERANCES};
