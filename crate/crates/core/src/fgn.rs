//! Exact fractional Gaussian noise by circulant embedding (Davies–Harte) and
//! assembly of two-sided fractional Brownian motion on `[-T, T]`.
//!
//! Noise is always simulated on the unit lattice and rescaled to mesh `eta`
//! by self-similarity, so one spectrum per `(alpha, n_steps)` serves every
//! mesh with the same number of steps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dft::FftPlan;
use crate::rng::GaussianStream;
use crate::{Error, Result};

/// Relative clamp tolerance for negative circulant eigenvalues.
pub const EIGENVALUE_CLAMP_TOL: f64 = 1e-8;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "alpha",
            value: alpha,
            expected: "0 < alpha <= 2",
        })
    }
}

/// The simulation lattice `t_k = -T + k * eta`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub alpha: f64,
    pub horizon: f64,
    pub eta: f64,
    pub n_steps: usize,
}

impl GridSpec {
    /// Validates `alpha in (0, 2]`, `T` a multiple of `eta`, and `2T/eta` a
    /// power of two.
    pub fn new(alpha: f64, horizon: f64, eta: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain {
                name: "T",
                value: horizon,
                expected: "T > 0",
            });
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain {
                name: "eta",
                value: eta,
                expected: "eta > 0",
            });
        }
        let half = horizon / eta;
        let rounded = libm::round(half);
        if rounded < 1.0 || libm::fabs(half - rounded) > 1e-9 * rounded {
            return Err(Error::invalid(format!(
                "T = {horizon} is not an integer multiple of eta = {eta}"
            )));
        }
        if rounded > (1u64 << 40) as f64 {
            return Err(Error::invalid(format!("2T/eta = {} is too large", 2.0 * rounded)));
        }
        let n_steps = 2 * rounded as usize;
        if !n_steps.is_power_of_two() {
            return Err(Error::invalid(format!(
                "2T/eta = {n_steps} is not a power of two"
            )));
        }
        Ok(Self {
            alpha,
            horizon,
            eta,
            n_steps,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.alpha / 2.0
    }

    /// Index of `t = 0`.
    pub fn zero_index(&self) -> usize {
        self.n_steps / 2
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    /// Lattice time `t_k`; exactly zero at the anchor.
    pub fn time(&self, k: usize) -> f64 {
        (k as f64 - self.zero_index() as f64) * self.eta
    }

    /// The same lattice with a different `alpha`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, ..*self })
    }
}

#[inline]
pub(crate) fn autocov_unchecked(alpha: f64, k: u64) -> f64 {
    let k = k as f64;
    let up = libm::pow(k + 1.0, alpha);
    let mid = libm::pow(k, alpha);
    let down = libm::pow(libm::fabs(k - 1.0), alpha);
    0.5 * (up - 2.0 * mid + down)
}

/// Autocovariance `gamma(k) = (|k+1|^a - 2|k|^a + |k-1|^a) / 2` of unit-step fGn.
pub fn fgn_autocov(alpha: f64, k: u64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(autocov_unchecked(alpha, k))
}

/// `gamma(0), ..., gamma(n_steps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovSeq {
    pub values: Vec<f64>,
}

impl AutocovSeq {
    pub fn new(alpha: f64, n_steps: usize) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            values: (0..=n_steps as u64)
                .map(|k| autocov_unchecked(alpha, k))
                .collect(),
        })
    }

    /// First row of the `2n x 2n` circulant embedding:
    /// `gamma(0), ..., gamma(n), gamma(n-1), ..., gamma(1)`.
    pub fn embedded_row(&self) -> Vec<f64> {
        let n = self.values.len() - 1;
        let mut row = Vec::with_capacity(2 * n);
        row.extend_from_slice(&self.values);
        row.extend(self.values[1..n].iter().rev());
        row
    }
}

/// Eigenvalues of the circulant embedding plus the synthesis weights and FFT
/// plan derived from them. Immutable once built; share it freely.
#[derive(Debug, Clone)]
pub struct CirculantSpectrum {
    alpha: f64,
    n_steps: usize,
    eigenvalues: Vec<f64>,
    clamp_count: usize,
    weights: Vec<f64>,
    plan: FftPlan,
}

impl CirculantSpectrum {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Clamped eigenvalues, length `2 * n_steps`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    /// Embedding length `2 * n_steps`.
    pub fn embedding_len(&self) -> usize {
        2 * self.n_steps
    }

    /// Inverse DFT of the clamped eigenvalues (real parts); should equal
    /// [`AutocovSeq::embedded_row`].
    pub fn reconstruct_row(&self) -> Result<Vec<f64>> {
        let mut buf: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::new(l, 0.0))
            .collect();
        self.plan.inverse(&mut buf)?;
        Ok(buf.into_iter().map(|z| z.re).collect())
    }
}

/// Builds the circulant embedding spectrum for `n_steps` unit increments.
///
/// Eigenvalues within `-1e-8 * max` of zero are clamped to zero; anything
/// more negative is an [`Error::EmbeddingFailure`].
pub fn circulant_spectrum(alpha: f64, n_steps: usize) -> Result<CirculantSpectrum> {
    check_alpha(alpha)?;
    if n_steps == 0 || !n_steps.is_power_of_two() {
        return Err(Error::invalid(format!(
            "n_steps = {n_steps} is not a power of two"
        )));
    }
    let len = 2 * n_steps;
    let plan = FftPlan::new(len)?;
    let row = AutocovSeq::new(alpha, n_steps)?.embedded_row();
    let mut buf: Vec<Complex64> = row.iter().map(|&g| Complex64::new(g, 0.0)).collect();
    plan.forward(&mut buf)?;
    // The row is real and symmetric, so the spectrum is real.
    let raw: Vec<f64> = buf.iter().map(|z| z.re).collect();
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = EIGENVALUE_CLAMP_TOL * max;
    let mut clamp_count = 0;
    let mut eigenvalues = Vec::with_capacity(len);
    for (index, &value) in raw.iter().enumerate() {
        if value < -tol {
            return Err(Error::EmbeddingFailure {
                index,
                value,
                tolerance: tol,
            });
        }
        if value < 0.0 {
            clamp_count += 1;
            eigenvalues.push(0.0);
        } else {
            eigenvalues.push(value);
        }
    }
    let weights = synthesis_weights(&eigenvalues);
    Ok(CirculantSpectrum {
        alpha,
        n_steps,
        eigenvalues,
        clamp_count,
        weights,
        plan,
    })
}

// Hermitian synthesis: real amplitudes at frequencies 0 and N/2 use
// sqrt(lambda/N); each conjugate pair (k, N-k) uses sqrt(lambda/(2N)) on a
// complex Gaussian.
fn synthesis_weights(eigenvalues: &[f64]) -> Vec<f64> {
    let len = eigenvalues.len() as f64;
    let half = eigenvalues.len() / 2;
    eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            if k == 0 || k == half {
                libm::sqrt(l / len)
            } else {
                libm::sqrt(l / (2.0 * len))
            }
        })
        .collect()
}

/// The i.i.d. standard normals consumed by one replication.
///
/// Its length `2 * n_steps` does not depend on `alpha`, so the same vector
/// drives every `alpha` of a replication (common random numbers).
#[derive(Debug, Clone, PartialEq)]
pub struct SeedVector {
    pub normals: Vec<f64>,
    pub rep_index: u64,
    pub master_seed: u64,
}

impl SeedVector {
    /// Draws `2 * n_steps` normals from the stream of `(master_seed, rep_index)`.
    pub fn derive(master_seed: u64, rep_index: u64, n_steps: usize) -> Self {
        let mut normals = vec![0.0; 2 * n_steps];
        GaussianStream::new(master_seed, rep_index).fill(&mut normals);
        Self {
            normals,
            rep_index,
            master_seed,
        }
    }

    /// Refills in place, reusing the allocation.
    pub fn rederive(&mut self, master_seed: u64, rep_index: u64, n_steps: usize) {
        self.normals.resize(2 * n_steps, 0.0);
        GaussianStream::new(master_seed, rep_index).fill(&mut self.normals);
        self.master_seed = master_seed;
        self.rep_index = rep_index;
    }
}

/// Reusable FFT buffer for [`sample_unit_fgn_into`].
#[derive(Debug, Default, Clone)]
pub struct FgnScratch {
    buf: Vec<Complex64>,
}

/// One exact draw of `n_steps` unit-step fGn increments.
pub fn sample_unit_fgn(spectrum: &CirculantSpectrum, seeds: &SeedVector) -> Result<Vec<f64>> {
    let mut out = vec![0.0; spectrum.n_steps];
    sample_unit_fgn_into(spectrum, &seeds.normals, &mut FgnScratch::default(), &mut out)?;
    Ok(out)
}

/// Allocation-free variant of [`sample_unit_fgn`].
pub fn sample_unit_fgn_into(
    spectrum: &CirculantSpectrum,
    normals: &[f64],
    scratch: &mut FgnScratch,
    out: &mut [f64],
) -> Result<()> {
    let len = spectrum.embedding_len();
    let half = spectrum.n_steps;
    if normals.len() != len {
        return Err(Error::invalid(format!(
            "seed vector has {} normals, embedding needs {len}",
            normals.len()
        )));
    }
    if out.len() != half {
        return Err(Error::invalid(format!(
            "output has length {}, expected {half}",
            out.len()
        )));
    }
    let w = &spectrum.weights;
    let buf = &mut scratch.buf;
    buf.clear();
    buf.resize(len, Complex64::new(0.0, 0.0));
    // normals[0] -> frequency 0, normals[1] -> frequency N/2,
    // normals[2k], normals[2k+1] -> real/imag parts at frequency k.
    buf[0] = Complex64::new(w[0] * normals[0], 0.0);
    buf[half] = Complex64::new(w[half] * normals[1], 0.0);
    for k in 1..half {
        let z = Complex64::new(w[k] * normals[2 * k], w[k] * normals[2 * k + 1]);
        buf[k] = z;
        buf[len - k] = z.conj();
    }
    spectrum.plan.forward(buf)?;
    for (o, z) in out.iter_mut().zip(buf.iter()) {
        *o = z.re;
    }
    Ok(())
}

/// Two-sided fBm sampled on the lattice of `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl FbmPath {
    pub fn zero_index(&self) -> usize {
        self.grid.zero_index()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.grid.time(k))
    }
}

/// Cumulates unit increments over the whole window, re-anchors at `t = 0`
/// and rescales to mesh `eta` by `eta^(alpha/2)`.
pub fn build_two_sided_fbm(increments: &[f64], grid: &GridSpec) -> Result<FbmPath> {
    let mut values = Vec::new();
    build_two_sided_fbm_into(increments, grid, &mut values)?;
    Ok(FbmPath {
        grid: *grid,
        values,
    })
}

pub(crate) fn build_two_sided_fbm_into(
    increments: &[f64],
    grid: &GridSpec,
    values: &mut Vec<f64>,
) -> Result<()> {
    if increments.len() != grid.n_steps {
        return Err(Error::invalid(format!(
            "{} increments for a lattice with {} steps",
            increments.len(),
            grid.n_steps
        )));
    }
    values.clear();
    values.reserve(grid.n_points());
    let mut acc = 0.0;
    values.push(0.0);
    for &x in increments {
        acc += x;
        values.push(acc);
    }
    let anchor = values[grid.zero_index()];
    let scale = libm::pow(grid.eta, grid.hurst());
    for v in values.iter_mut() {
        *v = scale * (*v - anchor);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;


    #[test]
    fn autocov_examples() {
        assert_eq!(fgn_autocov(1.5, 0).unwrap(), 1.0);
        for k in 1..10 {
            assert!(fgn_autocov(1.0, k).unwrap().abs() < 1e-15);
        }
        assert_eq!(fgn_autocov(2.0, 5).unwrap(), 1.0);
        assert!(matches!(fgn_autocov(0.0, 1), Err(Error::Domain { .. })));
        assert!(fgn_autocov(2.5, 1).is_err());
    }

    #[test]
    fn autocov_is_bounded() {
        for &a in &[0.1, 0.5, 1.0, 1.3, 1.9, 2.0] {
            let seq = AutocovSeq::new(a, 64).unwrap();
            assert_eq!(seq.values[0], 1.0);
            assert!(seq.values.iter().all(|g| g.abs() <= 1.0 + 1e-15));
        }
    }

    #[test]
    fn grid_validation() {
        let g = GridSpec::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(g.n_steps, 4);
        assert_eq!(g.zero_index(), 2);
        assert_eq!(g.time(2), 0.0);
        assert_eq!(g.time(0), -1.0);
        assert!(GridSpec::new(1.0, 1.0, 0.3).is_err());
        assert!(GridSpec::new(1.0, 3.0, 1.0).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.5).is_err());
        assert!(GridSpec::new(1.0, -1.0, 0.5).is_err());
        assert!(GridSpec::new(1.0, 32.0, libm::pow(2.0, -10.0)).is_ok());
    }

    #[test]
    fn spectrum_alpha_two_is_dc_only() {
        let s = circulant_spectrum(2.0, 4).unwrap();
        assert!((s.eigenvalues()[0] - 8.0).abs() < 1e-12);
        assert!(s.eigenvalues()[1..].iter().all(|&l| l.abs() < 1e-12));
    }

    #[test]
    fn spectrum_alpha_one_is_flat() {
        let s = circulant_spectrum(1.0, 4).unwrap();
        assert_eq!(s.clamp_count(), 0);
        assert!(s.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn spectrum_rejects_bad_sizes() {
        assert!(circulant_spectrum(1.0, 6).is_err());
        assert!(circulant_spectrum(1.0, 0).is_err());
    }

    #[test]
    fn alpha_two_increments_are_equal() {
        let s = circulant_spectrum(2.0, 8).unwrap();
        let seeds = SeedVector::derive(11, 0, 8);
        let x = sample_unit_fgn(&s, &seeds).unwrap();
        for v in &x {
            assert!((v - x[0]).abs() < 1e-12 * x[0].abs().max(1.0));
        }
    }

    #[test]
    fn sample_rejects_wrong_seed_length() {
        let s = circulant_spectrum(1.0, 8).unwrap();
        let seeds = SeedVector::derive(1, 0, 4);
        assert!(matches!(
            sample_unit_fgn(&s, &seeds),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn path_is_anchored_and_scaled() {
        let g = GridSpec::new(1.4, 1.0, 0.25).unwrap();
        let zero = build_two_sided_fbm(&[0.0; 8], &g).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let p = build_two_sided_fbm(&[1.0, -2.0, 0.5, 0.3, 0.7, -0.1, 2.0, 1.0], &g).unwrap();
        assert_eq!(p.values.len(), 9);
        assert_eq!(p.values[p.zero_index()], 0.0);
        assert!(build_two_sided_fbm(&[0.0; 7], &g).is_err());
    }

    #[test]
    fn alpha_two_path_is_linear() {
        let g = GridSpec::new(2.0, 2.0, 0.25).unwrap();
        let s = circulant_spectrum(2.0, g.n_steps).unwrap();
        let seeds = SeedVector::derive(5, 9, g.n_steps);
        let p = build_two_sided_fbm(&sample_unit_fgn(&s, &seeds).unwrap(), &g).unwrap();
        let slope = p.values[g.n_steps] / g.time(g.n_steps);
        for (k, &v) in p.values.iter().enumerate() {
            let lin = g.time(k) * slope;
            assert!((v - lin).abs() <= 1e-9 * lin.abs().max(1e-300) + 1e-15);
        }
    }
}
