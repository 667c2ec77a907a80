//! Beamsteering codebooks on a uniform angle grid.

use std::f64::consts::TAU;

use crate::channel::ArrayConfig;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::tolerance::TOLERANCES;

/// Array responses at the angles `2 pi i / 2^bits`, `i = 1..=2^bits`.
///
/// Vectors are stored as the columns of one `N × len` matrix so that the
/// beam search can score every candidate with a single product.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    bits: u32,
    array: ArrayConfig,
    angles: Vec<f64>,
    vectors: ComplexMatrix,
    deduplicated: bool,
}

/// `sin(2 pi m / n)` evaluated on the first quadrant and mirrored, so that
/// grid points sharing a sine (theta and pi - theta) get the same bits.
fn grid_sine(i: usize, n: usize) -> f64 {
    let m = i % n;
    let (r, sign) = if 4 * m <= n {
        (m, 1.0)
    } else if 2 * m <= n {
        (n / 2 - m, 1.0)
    } else if 4 * m <= 3 * n {
        (m - n / 2, -1.0)
    } else {
        (n - m, -1.0)
    };
    sign * (TAU * r as f64 / n as f64).sin()
}

impl Codebook {
    pub fn beamsteering(bits: u32, array: ArrayConfig) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::BitsOutOfRange(bits));
        }
        let n = 1usize << bits;
        let angles: Vec<f64> = (1..=n).map(|i| TAU * i as f64 / n as f64).collect();
        let columns: Vec<ComplexMatrix> = (1..=n).map(|i| array.response_from_sine(grid_sine(i, n))).collect();
        Ok(Self {
            bits,
            array,
            angles,
            vectors: ComplexMatrix::from_columns(&columns)?,
            deduplicated: false,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.array
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn is_deduplicated(&self) -> bool {
        self.deduplicated
    }

    /// Vector length `N`.
    pub fn dimension(&self) -> usize {
        self.vectors.rows()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, idx: usize) -> f64 {
        self.angles[idx]
    }

    /// All vectors as columns.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn vector(&self, idx: usize) -> ComplexMatrix {
        self.vectors.column(idx)
    }

    fn same_beam(&self, a: usize, b: usize) -> bool {
        (0..self.dimension()).all(|k| (self.vectors.get(k, a) - self.vectors.get(k, b)).norm() <= TOLERANCES.beam_equality)
    }

    /// For every entry, the index of the first entry carrying the same beam.
    pub fn beam_classes(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = Vec::new();
        let mut class = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            match reps.iter().find(|&&r| self.same_beam(r, i)) {
                Some(&r) => class.push(r),
                None => {
                    reps.push(i);
                    class.push(i);
                }
            }
        }
        class
    }

    /// Number of distinct beams (entries equal within 1e-9 count once).
    pub fn distinct_beam_count(&self) -> usize {
        self.beam_classes().iter().enumerate().filter(|&(i, &c)| i == c).count()
    }

    /// Copy keeping only the first entry of each distinct beam.
    pub fn deduplicated(&self) -> Codebook {
        let keep: Vec<usize> = self
            .beam_classes()
            .into_iter()
            .enumerate()
            .filter_map(|(i, c)| (i == c).then_some(i))
            .collect();
        Codebook {
            bits: self.bits,
            array: self.array,
            angles: keep.iter().map(|&i| self.angles[i]).collect(),
            vectors: self.vectors.select_columns(&keep),
            deduplicated: true,
        }
    }
}

pub fn build_beamsteering_codebook(bits: u32, cfg: &ArrayConfig) -> Result<Codebook> {
    Codebook::beamsteering(bits, *cfg)
}

pub fn distinct_beam_count(cb: &Codebook) -> usize {
    cb.distinct_beam_count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn six_bits_gives_64_vectors() {
        let cb = Codebook::beamsteering(6, ArrayConfig::half_wavelength(128)).unwrap();
        assert_eq!(cb.len(), 64);
        assert_eq!(cb.dimension(), 128);
    }

    #[test]
    fn bits_out_of_range() {
        let cfg = ArrayConfig::half_wavelength(4);
        assert!(matches!(Codebook::beamsteering(0, cfg), Err(Error::BitsOutOfRange(0))));
        assert!(matches!(Codebook::beamsteering(17, cfg), Err(Error::BitsOutOfRange(17))));
        assert!(Codebook::beamsteering(16, ArrayConfig::half_wavelength(1)).is_ok());
    }

    #[test]
    fn one_bit_two_elements() {
        let cb = Codebook::beamsteering(1, ArrayConfig::half_wavelength(2)).unwrap();
        assert!((cb.angle(0) - PI).abs() < 1e-15);
        assert!((cb.angle(1) - TAU).abs() < 1e-15);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..2 {
            for k in 0..2 {
                assert!((cb.matrix().get(k, i).re - r).abs() < 1e-15);
                assert!(cb.matrix().get(k, i).im.abs() < 1e-15);
            }
        }
        assert_eq!(cb.distinct_beam_count(), 1);
        assert_eq!(cb.deduplicated().len(), 1);
    }

    #[test]
    fn constant_modulus_unit_norm() {
        for bits in 1..=7 {
            for n in [1, 3, 8, 33] {
                let cb = Codebook::beamsteering(bits, ArrayConfig::new(n, 0.5).unwrap()).unwrap();
                assert_eq!(cb.len(), 1 << bits);
                for i in 0..cb.len() {
                    let v = cb.vector(i);
                    assert!((v.frobenius_norm() - 1.0).abs() < 1e-12);
                    for k in 0..n {
                        assert!((v.get(k, 0).norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn vectors_match_array_response_at_grid_angles() {
        let cfg = ArrayConfig::new(16, 0.5).unwrap();
        let cb = Codebook::beamsteering(5, cfg).unwrap();
        for i in 0..cb.len() {
            let diff = cb.vector(i).max_abs_diff(&cfg.response(cb.angle(i))).unwrap();
            assert!(diff < 1e-13, "entry {i} differs by {diff}");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let cfg = ArrayConfig::new(12, 0.4).unwrap();
        assert_eq!(Codebook::beamsteering(6, cfg).unwrap(), Codebook::beamsteering(6, cfg).unwrap());
    }

    #[test]
    fn mirrored_grid_angles_give_identical_vectors() {
        // theta = 2 pi i / n and pi - theta = 2 pi (n/2 - i) / n (mod 2 pi).
        for bits in 2..=8 {
            let n = 1usize << bits;
            let cb = Codebook::beamsteering(bits, ArrayConfig::new(9, 0.37).unwrap()).unwrap();
            for i in 1..=n {
                let mirror = (n / 2 + n - i % n) % n;
                let mirror = if mirror == 0 { n } else { mirror };
                assert_eq!(cb.vector(i - 1), cb.vector(mirror - 1), "bits {bits} i {i}");
            }
        }
    }

    // Union-find over every pair: the independent count of beam classes.
    fn pairwise_classes(cb: &Codebook) -> usize {
        let n = cb.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for a in 0..n {
            for b in (a + 1)..n {
                let d = cb.vector(a).max_abs_diff(&cb.vector(b)).unwrap();
                if d <= 1e-9 {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    #[test]
    fn distinct_count_matches_pairwise_oracle() {
        let cb = Codebook::beamsteering(6, ArrayConfig::half_wavelength(8)).unwrap();
        let oracle = pairwise_classes(&cb);
        assert_eq!(oracle, 32);
        assert_eq!(cb.distinct_beam_count(), oracle);
        for (bits, n, d) in [(3, 8, 0.5), (4, 5, 0.3), (5, 16, 0.5), (4, 4, 1.0)] {
            let cb = Codebook::beamsteering(bits, ArrayConfig::new(n, d).unwrap()).unwrap();
            assert_eq!(cb.distinct_beam_count(), pairwise_classes(&cb), "bits {bits} n {n} d {d}");
        }
    }

    #[test]
    fn distinct_sines_give_full_count() {
        // Every full grid repeats sin = 0 (at pi and 2 pi), so distinct sines
        // only occur after deduplication.
        let cb = Codebook::beamsteering(2, ArrayConfig::new(4, 0.25).unwrap()).unwrap();
        // sines 1, 0, -1, 0; quarter-wavelength spacing keeps +1 and -1 apart
        assert_eq!(cb.distinct_beam_count(), 3);
        let dd = cb.deduplicated();
        assert_eq!(dd.len(), 3);
        assert_eq!(dd.distinct_beam_count(), dd.len());
        assert!(dd.is_deduplicated());
    }

    #[test]
    fn grid_sine_is_exact_at_axes() {
        assert_eq!(grid_sine(0, 8), 0.0);
        assert_eq!(grid_sine(4, 8), 0.0);
        assert_eq!(grid_sine(2, 8), 1.0);
        assert_eq!(grid_sine(6, 8), -1.0);
        assert_eq!(grid_sine(1, 8), grid_sine(3, 8));
        assert_eq!(grid_sine(5, 8), grid_sine(7, 8));
    }
}
