//! Dense Cholesky sampling of fBm at arbitrary times.
//!
//! O(n^3) and only meant as an independent reference for the FFT sampler
//! and for small-lattice checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::fgn::check_alpha;
use crate::{Error, Result};

pub const MAX_ORACLE_POINTS: usize = 4096;
const PSD_TOL: f64 = 1e-9;

/// `Cov(B_s, B_t) = (|s|^a + |t|^a - |t - s|^a) / 2`.
pub fn fbm_covariance(alpha: f64, s: f64, t: f64) -> f64 {
    0.5 * (libm::pow(libm::fabs(s), alpha) + libm::pow(libm::fabs(t), alpha)
        - libm::pow(libm::fabs(t - s), alpha))
}

/// Lower-triangular factor of the fBm covariance at `times`.
///
/// Rank-deficient directions (such as `t = 0`, where `B_0 = 0`) get a zero
/// column, so the factor is `L` with `L L^T = C` for positive semidefinite `C`.
#[derive(Debug, Clone)]
pub struct FbmCholesky {
    alpha: f64,
    times: Vec<f64>,
    // row-major n x n
    factor: Vec<f64>,
}

impl FbmCholesky {
    pub fn new(alpha: f64, times: &[f64]) -> Result<Self> {
        check_alpha(alpha)?;
        let n = times.len();
        if n > MAX_ORACLE_POINTS {
            return Err(Error::invalid(alloc::format!(
                "oracle supports at most {MAX_ORACLE_POINTS} times, got {n}"
            )));
        }
        let mut sorted = times.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("oracle times must be finite and distinct"));
        }
        let scale = times
            .iter()
            .map(|&t| libm::pow(libm::fabs(t), alpha))
            .fold(0.0, f64::max)
            .max(1.0);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = fbm_covariance(alpha, times[j], times[j]);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d < -PSD_TOL * scale {
                return Err(Error::Numerical(alloc::format!(
                    "covariance not positive semidefinite: pivot {j} = {d:e}"
                )));
            }
            if d <= PSD_TOL * scale {
                continue;
            }
            let root = libm::sqrt(d);
            l[j * n + j] = root;
            for i in j + 1..n {
                let mut v = fbm_covariance(alpha, times[i], times[j]);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = v / root;
            }
        }
        Ok(Self {
            alpha,
            times: times.to_vec(),
            factor: l,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `L * normals`.
    pub fn sample_into(&self, normals: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.times.len();
        if normals.len() != n || out.len() != n {
            return Err(Error::invalid(alloc::format!(
                "oracle needs {n} normals and outputs, got {} and {}",
                normals.len(),
                out.len()
            )));
        }
        for i in 0..n {
            let row = &self.factor[i * n..i * n + i + 1];
            out[i] = row.iter().zip(normals).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    pub fn sample(&self, normals: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.times.len()];
        self.sample_into(normals, &mut out)?;
        Ok(out)
    }
}

/// One exact fBm draw at `times` from the given standard normals.
pub fn cholesky_oracle_sample(alpha: f64, times: &[f64], normals: &[f64]) -> Result<Vec<f64>> {
    FbmCholesky::new(alpha, times)?.sample(normals)
}
