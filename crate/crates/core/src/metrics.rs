//! Link metrics: log-det spectral efficiency, per-stream SINR, sum-rate and
//! the water-filling capacity bound.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::tolerance::TOLERANCES;

/// Transmit power, noise variance and stream count, all in linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub power: f64,
    pub noise_var: f64,
    pub n_streams: usize,
}

impl LinkBudget {
    pub fn new(power: f64, noise_var: f64, n_streams: usize) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) || !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power and noise variance must be positive, got {power} and {noise_var}"
            )));
        }
        if n_streams == 0 {
            return Err(Error::InvalidParameter("at least one stream is required".into()));
        }
        Ok(Self { power, noise_var, n_streams })
    }

    /// Unit power with `noise_var = 10^(-snr_db / 10)`.
    pub fn from_snr_db(snr_db: f64, n_streams: usize) -> Result<Self> {
        Self::new(1.0, 10f64.powf(-snr_db / 10.0), n_streams)
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise_var
    }

    fn per_stream_power(&self) -> f64 {
        self.power / self.n_streams as f64
    }
}

/// Logarithm base used for rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateUnit {
    /// bits/s/Hz
    #[default]
    Bits,
    /// nats/s/Hz
    Nats,
}

impl RateUnit {
    fn log1p(self, x: f64) -> f64 {
        match self {
            RateUnit::Bits => x.ln_1p() / std::f64::consts::LN_2,
            RateUnit::Nats => x.ln_1p(),
        }
    }
}

fn check_design(h: &ComplexMatrix, f: &ComplexMatrix, w: &ComplexMatrix) -> Result<()> {
    if h.cols() != f.rows() {
        return Err(Error::DimensionMismatch { op: "precoder", left: h.shape(), right: f.shape() });
    }
    if h.rows() != w.rows() || w.cols() != f.cols() {
        return Err(Error::DimensionMismatch { op: "combiner", left: h.shape(), right: w.shape() });
    }
    Ok(())
}

/// `log2 det(I + P/N_s R_n^{-1} W^H H F F^H H^H W)` with `R_n = sigma^2 W^H W`.
///
/// With `W^H W = L L^H`, the determinant equals that of the Hermitian
/// positive-definite `I + P/(N_s sigma^2) (L^{-1} G)(L^{-1} G)^H`, where
/// `G = W^H H F`, whose log-det is read off a second Cholesky factor.
pub fn spectral_efficiency(
    h: &ComplexMatrix,
    f: &ComplexMatrix,
    w: &ComplexMatrix,
    budget: &LinkBudget,
) -> Result<f64> {
    check_design(h, f, w)?;
    let g = w.hermitian_matmul(&h.matmul(f)?)?;
    let gram = w.hermitian_matmul(w)?.into_inner();
    let chol = Cholesky::new(gram).ok_or(Error::SingularCombiner)?;
    let l = chol.l();
    if (0..l.nrows()).any(|i| l[(i, i)].re <= TOLERANCES.singular_combiner.sqrt()) {
        return Err(Error::SingularCombiner);
    }
    let a = l.solve_lower_triangular(g.as_inner()).ok_or(Error::SingularCombiner)?;
    let k = a.nrows();
    let gain = budget.per_stream_power() / budget.noise_var;
    let arg = nalgebra::DMatrix::identity(k, k) + (&a * a.adjoint()) * num_complex::Complex64::new(gain, 0.0);
    let chol = Cholesky::new(arg).ok_or(Error::NonFinite)?;
    let l = chol.l();
    let logdet: f64 = (0..k).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
    Ok((logdet / std::f64::consts::LN_2).max(0.0))
}

/// Per-stream SINR with inter-stream interference treated as noise.
pub fn per_stream_sinr(
    h: &ComplexMatrix,
    f: &ComplexMatrix,
    w: &ComplexMatrix,
    budget: &LinkBudget,
) -> Result<Vec<f64>> {
    check_design(h, f, w)?;
    let g = w.hermitian_matmul(&h.matmul(f)?)?;
    let p = budget.per_stream_power();
    let ns = g.rows();
    (0..ns)
        .map(|k| {
            let w_norm_sq: f64 = (0..w.rows()).map(|i| w.get(i, k).norm_sqr()).sum();
            if w_norm_sq.sqrt() < TOLERANCES.zero_column {
                return Err(Error::ZeroCombinerColumn(k));
            }
            let signal = p * g.get(k, k).norm_sqr();
            let interference: f64 = (0..g.cols()).filter(|&i| i != k).map(|i| p * g.get(k, i).norm_sqr()).sum();
            Ok(signal / (interference + budget.noise_var * w_norm_sq))
        })
        .collect()
}

/// `sum_k log2(1 + gamma_k)`.
pub fn sum_rate(gammas: &[f64]) -> f64 {
    sum_rate_in(gammas, RateUnit::Bits)
}

pub fn sum_rate_in(gammas: &[f64], unit: RateUnit) -> f64 {
    gammas.iter().map(|&g| unit.log1p(g)).sum()
}

/// Capacity of `h` at total power `P` under water-filling over its
/// singular modes, found by bisection on the water level.
pub fn waterfilling_capacity(h: &ComplexMatrix, budget: &LinkBudget) -> Result<f64> {
    let svd = h.svd()?;
    let gains: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s * s / budget.noise_var)
        .filter(|&g| g > 0.0)
        .collect();
    if gains.is_empty() {
        return Ok(0.0);
    }
    let allocated = |level: f64| -> f64 { gains.iter().map(|g| (level - 1.0 / g).max(0.0)).sum() };
    let mut lo = 0.0;
    let mut hi = budget.power + gains.iter().map(|g| 1.0 / g).fold(0.0, f64::max);
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if allocated(mid) > budget.power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let level = 0.5 * (lo + hi);
    Ok(gains.iter().map(|g| ((level - 1.0 / g).max(0.0) * g).ln_1p()).sum::<f64>() / std::f64::consts::LN_2)
}
