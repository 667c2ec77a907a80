//! Hybrid precoder/combiner designs.
//!
//! [`joint_design`] is the successive, interference-aware beam-pair
//! selection: each stream takes the codebook pair with the largest gain on
//! the current residual channel, the residual is then projected away from
//! the orthonormalized transmit and receive directions already used, and
//! finally an SVD of the effective channel `W_RF^H H F_RF` yields the
//! baseband precoder and combiner.
//!
//! Also here: the full-digital SVD benchmark, a greedy selection without the
//! projection step, and an exhaustive search for tiny instances.

use itertools::Itertools;

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::metrics::{per_stream_sinr, sum_rate, LinkBudget};
use crate::tolerance::TOLERANCES;

/// Upper bound on `C(|F|, N_s) * C(|W|, N_s) * N_s!` for the exhaustive search.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone)]
pub struct HybridDesign {
    /// `N_t × N_s`, columns drawn from the transmit codebook.
    pub f_rf: ComplexMatrix,
    /// `N_s × N_s`, scaled so that `||F_RF F_BB||_F^2 = N_s`.
    pub f_bb: ComplexMatrix,
    /// `N_r × N_s`, columns drawn from the receive codebook.
    pub w_rf: ComplexMatrix,
    /// `N_s × N_s` with orthonormal columns.
    pub w_bb: ComplexMatrix,
    pub tx_indices: Vec<usize>,
    pub rx_indices: Vec<usize>,
    /// Orthonormalized transmit directions. Empty for designs that do not
    /// build them (the greedy and exhaustive baselines).
    pub p_basis: Vec<ComplexMatrix>,
    pub q_basis: Vec<ComplexMatrix>,
    /// Singular values of the effective channel, descending.
    pub effective_gains: Vec<f64>,
}

impl HybridDesign {
    pub fn n_streams(&self) -> usize {
        self.tx_indices.len()
    }

    /// `F_RF F_BB`.
    pub fn precoder(&self) -> ComplexMatrix {
        self.f_rf.matmul(&self.f_bb).expect("design shapes are consistent")
    }

    /// `W_RF W_BB`.
    pub fn combiner(&self) -> ComplexMatrix {
        self.w_rf.matmul(&self.w_bb).expect("design shapes are consistent")
    }
}

#[derive(Debug, Clone)]
pub struct FullDigitalDesign {
    pub f: ComplexMatrix,
    pub w: ComplexMatrix,
}

/// A selected transmit/receive codebook pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamPair {
    pub f_idx: usize,
    pub w_idx: usize,
    pub gain: f64,
}

fn check_codebooks(h: &ComplexMatrix, f_cb: &Codebook, w_cb: &Codebook) -> Result<()> {
    if h.cols() != f_cb.dimension() || h.rows() != w_cb.dimension() {
        return Err(Error::DimensionMismatch {
            op: "codebook/channel",
            left: h.shape(),
            right: (w_cb.dimension(), f_cb.dimension()),
        });
    }
    Ok(())
}

/// `|W_cb^H H F_cb|`, rows indexed by receive beam, columns by transmit beam.
fn gain_table(h: &ComplexMatrix, f_cb: &Codebook, w_cb: &Codebook) -> Result<Vec<Vec<f64>>> {
    check_codebooks(h, f_cb, w_cb)?;
    let g = w_cb.matrix().hermitian_matmul(&h.matmul(f_cb.matrix())?)?;
    Ok((0..g.rows()).map(|r| (0..g.cols()).map(|c| g.get(r, c).norm()).collect()).collect())
}

/// All pairs by descending gain; ties go to the smaller (w, f).
fn ranked_pairs(table: &[Vec<f64>]) -> Vec<BeamPair> {
    let mut pairs: Vec<BeamPair> = table
        .iter()
        .enumerate()
        .flat_map(|(w_idx, row)| row.iter().enumerate().map(move |(f_idx, &gain)| BeamPair { f_idx, w_idx, gain }))
        .collect();
    // Stable sort keeps the row-major (w, f) order among equal gains.
    pairs.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    pairs
}

/// The codebook pair maximizing `|w^H H f|`.
///
/// Ties resolve to the lexicographically smallest (receive, transmit) index.
pub fn select_pair(h_tilde: &ComplexMatrix, f_cb: &Codebook, w_cb: &Codebook) -> Result<BeamPair> {
    let table = gain_table(h_tilde, f_cb, w_cb)?;
    let mut best = BeamPair { f_idx: 0, w_idx: 0, gain: f64::NEG_INFINITY };
    for (w_idx, row) in table.iter().enumerate() {
        for (f_idx, &gain) in row.iter().enumerate() {
            if gain > best.gain {
                best = BeamPair { f_idx, w_idx, gain };
            }
        }
    }
    if best.gain.is_nan() || best.gain < TOLERANCES.degenerate_gain {
        return Err(Error::DegenerateChannel { gain: best.gain.max(0.0) });
    }
    Ok(best)
}

fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    (0..a.rows()).map(|i| a.get(i, 0).conj() * b.get(i, 0)).sum()
}

/// Unit-norm component of `v` orthogonal to an orthonormal `basis`.
///
/// Classical Gram-Schmidt, `v - sum_i (b_i^H v) b_i`, followed by one
/// re-orthogonalization pass so the result stays orthogonal to 1e-10 even
/// when `v` is nearly in the span.
pub fn orthonormal_residual(v: &ComplexMatrix, basis: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let project_out = |x: &ComplexMatrix| -> ComplexMatrix {
        let mut r = x.clone();
        for b in basis {
            let coeff = inner(b, x);
            r = r.sub(&b.scale(coeff)).expect("basis vectors match v in length");
        }
        r
    };
    let first = project_out(v);
    let residual = first.frobenius_norm();
    if residual < TOLERANCES.span_collapse {
        return Err(Error::SpanCollapse { residual });
    }
    let second = project_out(&first);
    Ok(second.scale_real(1.0 / second.frobenius_norm()))
}

/// `(I - q q^H) H (I - p p^H)` as two rank-one updates.
pub fn deflate(h_tilde: &ComplexMatrix, p: &ComplexMatrix, q: &ComplexMatrix) -> ComplexMatrix {
    // A = H - q (q^H H)
    let qh = q.hermitian_matmul(h_tilde).expect("q matches channel rows");
    let a = h_tilde.sub(&q.matmul(&qh).expect("outer product")).expect("same shape");
    // A - (A p) p^H
    let ap = a.matmul(p).expect("p matches channel columns");
    a.sub(&ap.matmul(&p.hermitian()).expect("outer product")).expect("same shape")
}

/// SVD of `W_RF^H H F_RF` and the power normalization of the precoder.
fn baseband_stage(
    h: &ComplexMatrix,
    f_rf: ComplexMatrix,
    w_rf: ComplexMatrix,
    tx_indices: Vec<usize>,
    rx_indices: Vec<usize>,
    p_basis: Vec<ComplexMatrix>,
    q_basis: Vec<ComplexMatrix>,
) -> Result<HybridDesign> {
    let ns = tx_indices.len();
    let h_eff = w_rf.hermitian_matmul(&h.matmul(&f_rf)?)?;
    let svd = h_eff.svd()?;
    let f_bb = svd.v.leading_columns(ns);
    let w_bb = svd.u.leading_columns(ns);
    let norm = f_rf.matmul(&f_bb)?.frobenius_norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::RankDeficient { requested: ns });
    }
    let f_bb = f_bb.scale_real((ns as f64).sqrt() / norm);
    Ok(HybridDesign {
        f_rf,
        f_bb,
        w_rf,
        w_bb,
        tx_indices,
        rx_indices,
        p_basis,
        q_basis,
        effective_gains: svd.singular_values,
    })
}

fn check_streams(h: &ComplexMatrix, n_streams: usize) -> Result<()> {
    if n_streams == 0 || n_streams > h.rows().min(h.cols()) {
        return Err(Error::InvalidParameter(format!(
            "stream count {n_streams} must be in 1..={}",
            h.rows().min(h.cols())
        )));
    }
    Ok(())
}

/// Successive joint beam-pair selection with residual-channel projection,
/// followed by the SVD baseband stage.
///
/// If the best pair on the residual would repeat a direction already used
/// (its Gram-Schmidt residual vanishes), the next pair in gain order is
/// tried instead.
pub fn joint_design(h: &ComplexMatrix, f_cb: &Codebook, w_cb: &Codebook, n_streams: usize) -> Result<HybridDesign> {
    check_streams(h, n_streams)?;
    check_codebooks(h, f_cb, w_cb)?;

    let mut h_tilde = h.clone();
    let mut tx_indices = Vec::with_capacity(n_streams);
    let mut rx_indices = Vec::with_capacity(n_streams);
    let mut p_basis: Vec<ComplexMatrix> = Vec::with_capacity(n_streams);
    let mut q_basis: Vec<ComplexMatrix> = Vec::with_capacity(n_streams);

    for k in 0..n_streams {
        let best = select_pair(&h_tilde, f_cb, w_cb)?;
        let (pair, p, q) = if k == 0 {
            (best, f_cb.vector(best.f_idx), w_cb.vector(best.w_idx))
        } else {
            match extend_bases(&best, f_cb, w_cb, &p_basis, &q_basis) {
                Ok((p, q)) => (best, p, q),
                Err(Error::SpanCollapse { .. }) => fallback_pair(&h_tilde, f_cb, w_cb, &p_basis, &q_basis)?,
                Err(e) => return Err(e),
            }
        };
        tx_indices.push(pair.f_idx);
        rx_indices.push(pair.w_idx);
        h_tilde = deflate(&h_tilde, &p, &q);
        p_basis.push(p);
        q_basis.push(q);
    }

    let f_rf = f_cb.matrix().select_columns(&tx_indices);
    let w_rf = w_cb.matrix().select_columns(&rx_indices);
    baseband_stage(h, f_rf, w_rf, tx_indices, rx_indices, p_basis, q_basis)
}

fn extend_bases(
    pair: &BeamPair,
    f_cb: &Codebook,
    w_cb: &Codebook,
    p_basis: &[ComplexMatrix],
    q_basis: &[ComplexMatrix],
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let p = orthonormal_residual(&f_cb.vector(pair.f_idx), p_basis)?;
    let q = orthonormal_residual(&w_cb.vector(pair.w_idx), q_basis)?;
    Ok((p, q))
}

fn fallback_pair(
    h_tilde: &ComplexMatrix,
    f_cb: &Codebook,
    w_cb: &Codebook,
    p_basis: &[ComplexMatrix],
    q_basis: &[ComplexMatrix],
) -> Result<(BeamPair, ComplexMatrix, ComplexMatrix)> {
    let table = gain_table(h_tilde, f_cb, w_cb)?;
    let mut last_gain = 0.0;
    for pair in ranked_pairs(&table) {
        if pair.gain < TOLERANCES.degenerate_gain {
            break;
        }
        last_gain = pair.gain;
        if let Ok((p, q)) = extend_bases(&pair, f_cb, w_cb, p_basis, q_basis) {
            return Ok((pair, p, q));
        }
    }
    Err(Error::DegenerateChannel { gain: last_gain })
}

/// Unconstrained SVD benchmark: `F = V_Ns` (equal power, `||F||_F^2 = N_s`)
/// and `W = U_Ns`.
pub fn full_digital_svd(h: &ComplexMatrix, n_streams: usize) -> Result<FullDigitalDesign> {
    check_streams(h, n_streams).map_err(|_| Error::RankDeficient { requested: n_streams })?;
    let svd = h.svd()?;
    let s = &svd.singular_values;
    if s[0] <= 0.0 || s[n_streams - 1] <= TOLERANCES.rank_relative * s[0] {
        return Err(Error::RankDeficient { requested: n_streams });
    }
    let v = svd.v.leading_columns(n_streams);
    let scale = (n_streams as f64).sqrt() / v.frobenius_norm();
    Ok(FullDigitalDesign {
        f: v.scale_real(scale),
        w: svd.u.leading_columns(n_streams),
    })
}

/// Picks the `N_s` largest `|w^H H f|` with no repeated transmit or receive
/// beam and no projection between picks, then applies the same baseband
/// stage as [`joint_design`].
///
/// Codebook entries carrying the same beam count as the same index.
pub fn greedy_no_deflation(h: &ComplexMatrix, f_cb: &Codebook, w_cb: &Codebook, n_streams: usize) -> Result<HybridDesign> {
    check_streams(h, n_streams)?;
    let table = gain_table(h, f_cb, w_cb)?;
    let f_class = f_cb.beam_classes();
    let w_class = w_cb.beam_classes();

    let mut tx_indices = Vec::with_capacity(n_streams);
    let mut rx_indices = Vec::with_capacity(n_streams);
    let mut last_gain = 0.0;
    for pair in ranked_pairs(&table) {
        if tx_indices.len() == n_streams || pair.gain < TOLERANCES.degenerate_gain {
            break;
        }
        last_gain = pair.gain;
        let f_used = tx_indices.iter().any(|&i| f_class[i] == f_class[pair.f_idx]);
        let w_used = rx_indices.iter().any(|&i| w_class[i] == w_class[pair.w_idx]);
        if !f_used && !w_used {
            tx_indices.push(pair.f_idx);
            rx_indices.push(pair.w_idx);
        }
    }
    if tx_indices.len() < n_streams {
        return Err(Error::DegenerateChannel { gain: last_gain });
    }

    let f_rf = f_cb.matrix().select_columns(&tx_indices);
    let w_rf = w_cb.matrix().select_columns(&rx_indices);
    baseband_stage(h, f_rf, w_rf, tx_indices, rx_indices, Vec::new(), Vec::new())
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Evaluation count guarded by [`EXHAUSTIVE_LIMIT`].
pub fn exhaustive_search_size(f_len: usize, w_len: usize, n_streams: usize) -> u128 {
    let fact: u128 = (1..=n_streams as u128).product();
    binomial(f_len, n_streams)
        .saturating_mul(binomial(w_len, n_streams))
        .saturating_mul(fact)
}

/// Sum-rate of a hybrid design under `budget`.
pub fn design_sum_rate(h: &ComplexMatrix, design: &HybridDesign, budget: &LinkBudget) -> Result<f64> {
    let gammas = per_stream_sinr(h, &design.precoder(), &design.combiner(), budget)?;
    Ok(sum_rate(&gammas))
}

/// Exact maximizer of the sum-rate over all analog selections, each
/// completed by the SVD baseband stage.
///
/// Enumerates unordered column subsets of both codebooks; the baseband SVD
/// makes the stream pairing irrelevant. Candidates that cannot be
/// evaluated (rank-deficient effective channel) are skipped. Among equal
/// rates the first subset in lexicographic order wins.
pub fn exhaustive_joint_search(
    h: &ComplexMatrix,
    f_cb: &Codebook,
    w_cb: &Codebook,
    n_streams: usize,
    budget: &LinkBudget,
) -> Result<(HybridDesign, f64)> {
    check_streams(h, n_streams)?;
    check_codebooks(h, f_cb, w_cb)?;
    let count = exhaustive_search_size(f_cb.len(), w_cb.len(), n_streams);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::InstanceTooLarge { count, limit: EXHAUSTIVE_LIMIT });
    }
    let budget = LinkBudget { n_streams, ..*budget };

    let mut best: Option<(HybridDesign, f64)> = None;
    for tx in (0..f_cb.len()).combinations(n_streams) {
        let f_rf = f_cb.matrix().select_columns(&tx);
        for rx in (0..w_cb.len()).combinations(n_streams) {
            let w_rf = w_cb.matrix().select_columns(&rx);
            let Ok(design) = baseband_stage(h, f_rf.clone(), w_rf, tx.clone(), rx, Vec::new(), Vec::new()) else {
                continue;
            };
            let Ok(rate) = design_sum_rate(h, &design, &budget) else {
                continue;
            };
            if best.as_ref().is_none_or(|(_, r)| rate > *r) {
                best = Some((design, rate));
            }
        }
    }
    best.ok_or(Error::DegenerateChannel { gain: 0.0 })
}
