//! Deterministic Monte-Carlo sweeps.
//!
//! Each (sweep index, trial) pair gets its own ChaCha8 stream seeded by
//! [`trial_seed`], draws one channel, and every configured algorithm is
//! evaluated on that same channel. Work items run in parallel on a rayon
//! pool but results are collected in (sweep index, trial, algorithm) order,
//! so the output does not depend on the worker count.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{Algorithm, ExperimentConfig, SweepAxis, SweepPoint, CONFIG_KEYS};

use crate::beamdesign::{full_digital_svd, greedy_no_deflation, joint_design};
use crate::channel::{fmt_real, sample_channel, ChannelRealization};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{per_stream_sinr, spectral_efficiency, sum_rate_in, LinkBudget, RateUnit};

pub const RECORDS_HEADER: &str =
    "sweep_axis,sweep_value,trial,algorithm,spectral_efficiency_bps_hz,sum_rate_bps_hz,min_sinr_db,elapsed_s,skipped";
pub const SUMMARY_HEADER: &str = "sweep_axis,sweep_value,algorithm,trials,se_mean,se_std,rate_mean,rate_std";

/// Floor applied before converting the weakest SINR to dB.
const MIN_SINR_FLOOR: f64 = 1e-30;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the random stream for one trial:
/// `splitmix64(splitmix64(splitmix64(base) ^ sweep_index) ^ trial)`.
pub fn trial_seed(base_seed: u64, sweep_index: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ sweep_index) ^ trial)
}

/// The channel drawn for one (sweep index, trial).
pub fn trial_channel(point: &SweepPoint, base_seed: u64, sweep_index: usize, trial: usize) -> Result<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(base_seed, sweep_index as u64, trial as u64));
    sample_channel(&point.channel, &mut rng)
}

/// Transmit and receive codebooks for a sweep point.
pub fn point_codebooks(cfg: &ExperimentConfig, point: &SweepPoint) -> Result<(Codebook, Codebook)> {
    let mut f_cb = Codebook::beamsteering(cfg.codebook_bits_tx, point.channel.tx)?;
    let mut w_cb = Codebook::beamsteering(cfg.codebook_bits_rx, point.channel.rx)?;
    if cfg.dedupe_codebook {
        f_cb = f_cb.deduplicated();
        w_cb = w_cb.deduplicated();
    }
    Ok((f_cb, w_cb))
}

/// Metrics and selections of one algorithm on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub sinr: Vec<f64>,
    pub spectral_efficiency: f64,
    pub sum_rate: f64,
    /// Codebook indices per stream; `None` for the full-digital benchmark.
    pub tx_indices: Option<Vec<usize>>,
    pub rx_indices: Option<Vec<usize>>,
}

impl Evaluation {
    pub fn min_sinr_db(&self) -> f64 {
        let min = self.sinr.iter().copied().fold(f64::INFINITY, f64::min);
        10.0 * min.max(MIN_SINR_FLOOR).log10()
    }
}

/// Runs one algorithm on `h` and computes its metrics.
pub fn evaluate(
    algorithm: Algorithm,
    h: &ComplexMatrix,
    f_cb: &Codebook,
    w_cb: &Codebook,
    budget: &LinkBudget,
    rate_unit: RateUnit,
) -> Result<Evaluation> {
    let ns = budget.n_streams;
    let (f, w, tx, rx) = match algorithm {
        Algorithm::Joint | Algorithm::GreedyNoDeflation => {
            let d = if algorithm == Algorithm::Joint {
                joint_design(h, f_cb, w_cb, ns)?
            } else {
                greedy_no_deflation(h, f_cb, w_cb, ns)?
            };
            (d.precoder(), d.combiner(), Some(d.tx_indices), Some(d.rx_indices))
        }
        Algorithm::FullDigital => {
            let d = full_digital_svd(h, ns)?;
            (d.f, d.w, None, None)
        }
    };
    let sinr = per_stream_sinr(h, &f, &w, budget)?;
    Ok(Evaluation {
        spectral_efficiency: spectral_efficiency(h, &f, &w, budget)?,
        sum_rate: sum_rate_in(&sinr, rate_unit),
        sinr,
        tx_indices: tx,
        rx_indices: rx,
    })
}

/// Failures that mark a trial as skipped rather than aborting the sweep.
pub fn is_trial_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateChannel { .. }
            | Error::SpanCollapse { .. }
            | Error::RankDeficient { .. }
            | Error::SingularCombiner
            | Error::ZeroCombinerColumn(_)
            | Error::NonFinite
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub spectral_efficiency: f64,
    pub sum_rate: f64,
    pub min_sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    pub algorithm: Algorithm,
    /// `None` when the trial was skipped.
    pub metrics: Option<TrialMetrics>,
    pub elapsed_seconds: f64,
}

impl TrialRecord {
    pub fn skipped(&self) -> bool {
        self.metrics.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub algorithm: Algorithm,
    /// Trials that contributed (skipped ones excluded).
    pub trials: usize,
    pub skipped: usize,
    pub se_mean: f64,
    pub se_std: f64,
    pub rate_mean: f64,
    pub rate_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub axis: SweepAxis,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutput {
    pub fn skipped_count(&self) -> usize {
        self.records.iter().filter(|r| r.skipped()).count()
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    point: &SweepPoint,
    books: &(Codebook, Codebook),
    sweep_index: usize,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let channel = trial_channel(point, cfg.base_seed, sweep_index, trial)?;
    let budget = LinkBudget::from_snr_db(point.snr_db, point.n_streams)?;
    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let start = Instant::now();
            let outcome = evaluate(algorithm, &channel.h, &books.0, &books.1, &budget, cfg.rate_unit);
            let elapsed = if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 };
            let metrics = match outcome {
                Ok(ev) => Some(TrialMetrics {
                    spectral_efficiency: ev.spectral_efficiency,
                    sum_rate: ev.sum_rate,
                    min_sinr_db: ev.min_sinr_db(),
                }),
                Err(e) if is_trial_failure(&e) => None,
                Err(e) => return Err(e),
            };
            Ok(TrialRecord {
                sweep_index,
                sweep_value: point.value,
                trial,
                algorithm,
                metrics,
                elapsed_seconds: elapsed,
            })
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates records per (sweep value, algorithm), in sweep then
/// algorithm order.
pub fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (idx, &value) in cfg.sweep_values.iter().enumerate() {
        for &algorithm in &cfg.algorithms {
            let group: Vec<&TrialRecord> =
                records.iter().filter(|r| r.sweep_index == idx && r.algorithm == algorithm).collect();
            let ok: Vec<TrialMetrics> = group.iter().filter_map(|r| r.metrics).collect();
            let se: Vec<f64> = ok.iter().map(|m| m.spectral_efficiency).collect();
            let rate: Vec<f64> = ok.iter().map(|m| m.sum_rate).collect();
            let (se_mean, se_std) = mean_std(&se);
            let (rate_mean, rate_std) = mean_std(&rate);
            rows.push(SummaryRow {
                sweep_value: value,
                algorithm,
                trials: ok.len(),
                skipped: group.len() - ok.len(),
                se_mean,
                se_std,
                rate_mean,
                rate_std,
            });
        }
    }
    rows
}

/// Runs the whole sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let points: Vec<SweepPoint> = (0..cfg.sweep_values.len()).map(|i| cfg.point(i)).collect();
    let books: Vec<(Codebook, Codebook)> = points.iter().map(|p| point_codebooks(cfg, p)).collect::<Result<_>>()?;

    let items: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..cfg.trials).map(move |t| (p, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let per_item: Vec<Vec<TrialRecord>> = pool.install(|| {
        items
            .par_iter()
            .map(|&(p, t)| run_trial(cfg, &points[p], &books[p], p, t))
            .collect::<Result<_>>()
    })?;

    let records: Vec<TrialRecord> = per_item.into_iter().flatten().collect();
    let summary = summarize(cfg, &records);
    Ok(SweepOutput { axis: cfg.sweep_axis, records, summary })
}

fn fmt_sweep_value(axis: SweepAxis, v: f64) -> String {
    if axis.is_discrete() {
        format!("{}", v as u64)
    } else {
        fmt_real(v)
    }
}

pub fn write_records<W: Write>(axis: SweepAxis, records: &[TrialRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RECORDS_HEADER}")?;
    for r in records {
        let (se, rate, sinr) = match r.metrics {
            Some(m) => (fmt_real(m.spectral_efficiency), fmt_real(m.sum_rate), fmt_real(m.min_sinr_db)),
            None => (String::new(), String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{se},{rate},{sinr},{},{}",
            axis,
            fmt_sweep_value(axis, r.sweep_value),
            r.trial,
            r.algorithm,
            fmt_real(r.elapsed_seconds),
            u8::from(r.skipped())
        )?;
    }
    out.flush()
}

pub fn write_summary<W: Write>(axis: SweepAxis, summary: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            axis,
            fmt_sweep_value(axis, s.sweep_value),
            s.algorithm,
            s.trials,
            fmt_real(s.se_mean),
            fmt_real(s.se_std),
            fmt_real(s.rate_mean),
            fmt_real(s.rate_std)
        )?;
    }
    out.flush()
}

pub fn write_records_csv(axis: SweepAxis, records: &[TrialRecord], path: &Path) -> Result<()> {
    write_records(axis, records, BufWriter::new(File::create(path)?))?;
    Ok(())
}

pub fn write_summary_csv(axis: SweepAxis, summary: &[SummaryRow], path: &Path) -> Result<()> {
    write_summary(axis, summary, BufWriter::new(File::create(path)?))?;
    Ok(())
}
