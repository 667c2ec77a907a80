//! Clustered (Saleh-Valenzuela) narrowband channel with uniform linear arrays.
//!
//! A realization is the sum of `clusters * rays` rank-one terms
//! `alpha * a_r(aoa) a_t(aod)^H`, scaled by `sqrt(N_t N_r / (N_cl N_ray))`.
//! Cluster mean angles are uniform over their configured ranges; ray angles
//! are Laplacian around the cluster mean; gains are circularly-symmetric
//! complex Gaussians whose per-cluster variances sum to the cluster count.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Geometry of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub n_elements: usize,
    /// Element spacing over wavelength, `d / lambda`.
    pub spacing: f64,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("element spacing must be positive, got {spacing}")));
        }
        Ok(Self { n_elements, spacing })
    }

    /// Half-wavelength array.
    pub fn half_wavelength(n_elements: usize) -> Self {
        Self { n_elements, spacing: 0.5 }
    }

    /// Array response `a(theta)`, an `N × 1` unit-norm vector.
    pub fn response(&self, theta: f64) -> ComplexMatrix {
        self.response_from_sine(theta.sin())
    }

    /// Array response for a given `sin(theta)`.
    ///
    /// Element `k` is `exp(j 2 pi (d/lambda) k s) / sqrt(N)`. The phase is
    /// reduced to whole cycles before the exponential so that equal `s`
    /// (and the grating pair `s = ±1` at half-wavelength spacing) give
    /// bit-identical vectors.
    pub fn response_from_sine(&self, sine: f64) -> ComplexMatrix {
        let n = self.n_elements;
        let amp = 1.0 / (n as f64).sqrt();
        let entries: Vec<C64> = (0..n)
            .map(|k| {
                let cycles = (self.spacing * k as f64 * sine).rem_euclid(1.0);
                C64::from_polar(amp, TAU * cycles)
            })
            .collect();
        ComplexMatrix::column_vector(&entries)
    }
}

/// Free-function form of [`ArrayConfig::response`].
pub fn ula_response(cfg: &ArrayConfig, theta: f64) -> ComplexMatrix {
    cfg.response(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerProfile {
    /// Every cluster has unit average power.
    Uniform,
    /// Cluster `i` (1-based) has power proportional to `0.7^i`.
    Exponential07,
}

/// Average cluster powers, normalized so they sum to `n_clusters`.
pub fn cluster_powers(n_clusters: usize, profile: PowerProfile) -> Vec<f64> {
    match profile {
        PowerProfile::Uniform => vec![1.0; n_clusters],
        PowerProfile::Exponential07 => {
            let raw: Vec<f64> = (1..=n_clusters).map(|i| 0.7f64.powi(i as i32)).collect();
            let c = n_clusters as f64 / raw.iter().sum::<f64>();
            raw.into_iter().map(|p| c * p).collect()
        }
    }
}

/// One Laplacian draw with the given mean and standard deviation.
///
/// Uses the inverse CDF on a single uniform variate with scale
/// `b = std_dev / sqrt(2)`. No wrapping is applied.
pub fn sample_laplacian_angle<R: Rng + ?Sized>(mean: f64, std_dev: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    if std_dev == 0.0 {
        return mean;
    }
    let b = std_dev * FRAC_1_SQRT_2;
    let centered = u - 0.5;
    mean - b * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
}

/// Where cluster mean angles are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanAngleRange {
    /// Uniform over `[low, high)`.
    Interval { low: f64, high: f64 },
    /// Uniform over a sector of the given width whose start is itself drawn
    /// uniformly from `[0, 2 pi)` once per realization.
    RandomSector { width: f64 },
}

impl MeanAngleRange {
    pub fn full_circle() -> Self {
        MeanAngleRange::Interval { low: 0.0, high: TAU }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MeanAngleRange::Interval { low, high } => low.is_finite() && high.is_finite() && low <= high,
            MeanAngleRange::RandomSector { width } => width.is_finite() && width >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid angle range {self:?}")))
        }
    }

    /// Resolves the range for one realization (draws the sector start if needed).
    fn resolve<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            MeanAngleRange::Interval { low, high } => (low, high),
            MeanAngleRange::RandomSector { width } => {
                let start = rng.random::<f64>() * TAU;
                (start, start + width)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub tx: ArrayConfig,
    pub rx: ArrayConfig,
    pub n_clusters: usize,
    pub n_rays: usize,
    /// Per-ray angle standard deviation in radians, shared by AoD and AoA.
    pub angle_spread: f64,
    pub aod_mean_range: MeanAngleRange,
    pub aoa_mean_range: MeanAngleRange,
    pub power_profile: PowerProfile,
}

impl Default for ChannelParams {
    /// 128-element half-wavelength arrays, 10 clusters of 10 rays, 2.5°
    /// spread, AoDs over the full circle, AoAs in a random 60° sector.
    fn default() -> Self {
        Self {
            tx: ArrayConfig::half_wavelength(128),
            rx: ArrayConfig::half_wavelength(128),
            n_clusters: 10,
            n_rays: 10,
            angle_spread: 2.5f64.to_radians(),
            aod_mean_range: MeanAngleRange::full_circle(),
            aoa_mean_range: MeanAngleRange::RandomSector { width: PI / 3.0 },
            power_profile: PowerProfile::Exponential07,
        }
    }
}

impl ChannelParams {
    pub fn with_antennas(mut self, n_tx: usize, n_rx: usize) -> Self {
        self.tx.n_elements = n_tx;
        self.rx.n_elements = n_rx;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ArrayConfig::new(self.tx.n_elements, self.tx.spacing)?;
        ArrayConfig::new(self.rx.n_elements, self.rx.spacing)?;
        if self.n_clusters == 0 || self.n_rays == 0 {
            return Err(Error::InvalidParameter("cluster and ray counts must be at least 1".into()));
        }
        if !(self.angle_spread >= 0.0 && self.angle_spread.is_finite()) {
            return Err(Error::InvalidParameter("angle spread must be a nonnegative number".into()));
        }
        self.aod_mean_range.validate()?;
        self.aoa_mean_range.validate()
    }
}

/// One propagation path. `cluster` and `ray` are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub cluster: usize,
    pub ray: usize,
    pub gain: C64,
    pub aod: f64,
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_r × N_t` channel matrix.
    pub h: ComplexMatrix,
    pub rays: Vec<Ray>,
}

impl ChannelRealization {
    /// Builds the channel matrix from an explicit list of rays.
    ///
    /// The normalization uses the number of rays given, so a single ray with
    /// unit gain yields `sqrt(N_t N_r) a_r a_t^H`.
    pub fn from_rays(tx: &ArrayConfig, rx: &ArrayConfig, rays: Vec<Ray>) -> Result<Self> {
        if rays.is_empty() {
            return Err(Error::InvalidParameter("a channel needs at least one ray".into()));
        }
        let n_paths = rays.len();
        let scale = ((tx.n_elements * rx.n_elements) as f64 / n_paths as f64).sqrt();

        // H = scale * A_r diag(alpha) A_t^H, assembled as one product.
        let mut a_r = ComplexMatrix::zeros(rx.n_elements, n_paths);
        let mut a_t = ComplexMatrix::zeros(tx.n_elements, n_paths);
        for (p, ray) in rays.iter().enumerate() {
            let ar = rx.response(ray.aoa);
            let at = tx.response(ray.aod);
            for i in 0..rx.n_elements {
                a_r.set(i, p, ar.get(i, 0) * ray.gain * scale);
            }
            for i in 0..tx.n_elements {
                a_t.set(i, p, at.get(i, 0));
            }
        }
        let h = a_r.matmul(&a_t.hermitian())?;
        Ok(Self { h, rays })
    }

    /// Writes the rays and then the matrix as CSV.
    ///
    /// Layout: header `cluster,ray,re_alpha,im_alpha,aod_rad,aoa_rad`, one
    /// line per ray, then header `row,col,re,im` and one line per entry in
    /// row-major order. Reals use 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "cluster,ray,re_alpha,im_alpha,aod_rad,aoa_rad")?;
        for r in &self.rays {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.cluster,
                r.ray,
                fmt_real(r.gain.re),
                fmt_real(r.gain.im),
                fmt_real(r.aod),
                fmt_real(r.aoa)
            )?;
        }
        writeln!(out, "row,col,re,im")?;
        for i in 0..self.h.rows() {
            for j in 0..self.h.cols() {
                let z = self.h.get(i, j);
                writeln!(out, "{i},{j},{},{}", fmt_real(z.re), fmt_real(z.im))?;
            }
        }
        Ok(())
    }
}

/// 17 significant digits, round-trip exact.
pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Draws one channel realization.
///
/// Draw order: AoD range, AoA range (sector start if random); per cluster
/// the mean AoD then mean AoA; per ray (cluster-major) the gain real and
/// imaginary parts, then AoD, then AoA.
pub fn sample_channel<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> Result<ChannelRealization> {
    params.validate()?;
    let (aod_lo, aod_hi) = params.aod_mean_range.resolve(rng);
    let (aoa_lo, aoa_hi) = params.aoa_mean_range.resolve(rng);

    let means: Vec<(f64, f64)> = (0..params.n_clusters)
        .map(|_| {
            let aod = aod_lo + (aod_hi - aod_lo) * rng.random::<f64>();
            let aoa = aoa_lo + (aoa_hi - aoa_lo) * rng.random::<f64>();
            (aod, aoa)
        })
        .collect();

    let powers = cluster_powers(params.n_clusters, params.power_profile);
    let mut rays = Vec::with_capacity(params.n_clusters * params.n_rays);
    for (cluster, (&(mean_aod, mean_aoa), &power)) in means.iter().zip(&powers).enumerate() {
        let sd = (power / 2.0).sqrt();
        for ray in 0..params.n_rays {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let aod = sample_laplacian_angle(mean_aod, params.angle_spread, rng);
            let aoa = sample_laplacian_angle(mean_aoa, params.angle_spread, rng);
            rays.push(Ray {
                cluster,
                ray,
                gain: C64::new(sd * re, sd * im),
                aod,
                aoa,
            });
        }
    }
    ChannelRealization::from_rays(&params.tx, &params.rx, rays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn response_broadside() {
        let a = ArrayConfig::half_wavelength(4).response(0.0);
        for k in 0..4 {
            assert!((a.get(k, 0) - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn response_endfire_alternates_sign() {
        let a = ArrayConfig::half_wavelength(2).response(PI / 2.0);
        let r = FRAC_1_SQRT_2;
        assert!((a.get(0, 0) - C64::new(r, 0.0)).norm() < 1e-12);
        assert!((a.get(1, 0) - C64::new(-r, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn response_is_unit_norm_constant_modulus() {
        let cfg = ArrayConfig::new(37, 0.73).unwrap();
        for t in [-10.0, -1.0, 0.3, 2.0, 77.7] {
            let a = cfg.response(t);
            assert!((a.frobenius_norm() - 1.0).abs() < 1e-12);
            for k in 0..37 {
                assert!((a.get(k, 0).norm() - 1.0 / 37f64.sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn array_config_rejects_bad_values() {
        assert!(ArrayConfig::new(0, 0.5).is_err());
        assert!(ArrayConfig::new(4, 0.0).is_err());
        assert!(ArrayConfig::new(4, f64::NAN).is_err());
    }

    #[test]
    fn cluster_powers_examples() {
        assert_eq!(cluster_powers(1, PowerProfile::Exponential07), vec![1.0]);
        let p = cluster_powers(2, PowerProfile::Exponential07);
        assert!((p[0] - 2.0 * 0.7 / 1.19).abs() < 1e-12);
        assert!((p[1] - 2.0 * 0.49 / 1.19).abs() < 1e-12);
        assert!((p[0] - 1.17647).abs() < 1e-5 && (p[1] - 0.82353).abs() < 1e-5);
        assert_eq!(cluster_powers(3, PowerProfile::Uniform), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn cluster_powers_sum_and_ratio() {
        for n in 1..=20 {
            let p = cluster_powers(n, PowerProfile::Exponential07);
            assert!((p.iter().sum::<f64>() - n as f64).abs() < 1e-12);
            for w in p.windows(2) {
                assert!(w[1] < w[0]);
                assert!((w[1] / w[0] - 0.7).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_zero_spread_is_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert_eq!(sample_laplacian_angle(1.234, 0.0, &mut rng), 1.234);
        }
    }

    #[test]
    fn laplacian_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sd = 0.2;
        let mut draws: Vec<f64> = (0..100_000).map(|_| sample_laplacian_angle(0.5, sd, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        assert!((var.sqrt() - sd).abs() < 0.03 * sd, "sample sd {}", var.sqrt());
        draws.sort_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        assert!((median - 0.5).abs() < 0.01, "median {median}");
    }

    #[test]
    fn single_ray_unit_gain() {
        let tx = ArrayConfig::half_wavelength(6);
        let rx = ArrayConfig::half_wavelength(5);
        let ray = Ray { cluster: 0, ray: 0, gain: C64::new(1.0, 0.0), aod: 0.4, aoa: -1.1 };
        let real = ChannelRealization::from_rays(&tx, &rx, vec![ray]).unwrap();
        let expected = rx.response(-1.1).matmul(&tx.response(0.4).hermitian()).unwrap().scale_real(30f64.sqrt());
        assert!(real.h.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    // Independent per-ray accumulation of the channel sum.
    fn naive_sum(tx: &ArrayConfig, rx: &ArrayConfig, rays: &[Ray]) -> ComplexMatrix {
        let scale = ((tx.n_elements * rx.n_elements) as f64 / rays.len() as f64).sqrt();
        let mut h = ComplexMatrix::zeros(rx.n_elements, tx.n_elements);
        for r in rays {
            let term = rx.response(r.aoa).matmul(&tx.response(r.aod).hermitian()).unwrap();
            h = h.add(&term.scale(r.gain * scale)).unwrap();
        }
        h
    }

    #[test]
    fn realization_matches_ray_list() {
        let params = ChannelParams::default().with_antennas(12, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let real = sample_channel(&params, &mut rng).unwrap();
        assert_eq!(real.rays.len(), 100);
        assert_eq!(real.h.shape(), (9, 12));
        let oracle = naive_sum(&params.tx, &params.rx, &real.rays);
        assert!(real.h.max_abs_diff(&oracle).unwrap() < 1e-10);
    }

    #[test]
    fn sampling_is_deterministic() {
        let params = ChannelParams::default().with_antennas(8, 8);
        let a = sample_channel(&params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_channel(&params, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn aoa_means_stay_in_sector() {
        let params = ChannelParams { angle_spread: 0.0, ..ChannelParams::default().with_antennas(4, 4) };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let real = sample_channel(&params, &mut rng).unwrap();
            let aoas: Vec<f64> = real.rays.iter().map(|r| r.aoa).collect();
            let lo = aoas.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = aoas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo <= PI / 3.0);
            assert!(real.rays.iter().all(|r| (0.0..TAU).contains(&r.aod)));
        }
    }

    #[test]
    fn rank_bounded_by_path_count() {
        let params = ChannelParams {
            n_clusters: 2,
            n_rays: 2,
            ..ChannelParams::default().with_antennas(16, 16)
        };
        let real = sample_channel(&params, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        let s = real.h.svd().unwrap().singular_values;
        assert!(s[4] < 1e-10 * s[0]);
    }

    #[test]
    fn energy_normalization() {
        let params = ChannelParams::default().with_antennas(16, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 20_000;
        let mean = (0..n)
            .map(|_| sample_channel(&params, &mut rng).unwrap().h.frobenius_norm().powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((mean / 256.0 - 1.0).abs() < 0.02, "mean energy ratio {}", mean / 256.0);
    }

    #[test]
    fn csv_layout() {
        let tx = ArrayConfig::half_wavelength(2);
        let ray = Ray { cluster: 0, ray: 0, gain: C64::new(1.0, 0.0), aod: 0.0, aoa: 0.0 };
        let real = ChannelRealization::from_rays(&tx, &tx, vec![ray]).unwrap();
        let mut buf = Vec::new();
        real.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 1 + 1 + 4);
        assert_eq!(lines[0], "cluster,ray,re_alpha,im_alpha,aod_rad,aoa_rad");
        assert_eq!(lines[2], "row,col,re,im");
        let re: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert!((re - 1.0).abs() < 1e-15);
    }
}
