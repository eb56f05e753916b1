//! Single-threaded building blocks of the Monte Carlo estimator: the
//! configuration, per-replication kernels, row summaries, and the
//! change-of-measure check.
//!
//! The parallel drivers in the `pickands` crate call [`Replicator`] once per
//! replication index and reduce the stored results in index order, which is
//! what makes their output independent of the worker count.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::fgn::{
    build_two_sided_fbm_into, check_alpha, sample_unit_fgn_into, CirculantSpectrum, FgnScratch,
    GridSpec, SeedVector,
};
use crate::oracle::FbmCholesky;
use crate::pathfun::{functionals_strided, z_from_values_into, PathFunctionals};
use crate::rng::GaussianStream;
use crate::stats::{summarize, Summary};
use crate::{Error, Result};

/// Monte Carlo configuration shared by every estimator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimatorConfig {
    pub alphas: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: f64,
    pub eta: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub workers: usize,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        for &a in &self.alphas {
            check_alpha(a)?;
        }
        self.grid(self.alphas.first().copied().unwrap_or(1.0)).map(|_| ())
    }

    pub fn grid(&self, alpha: f64) -> Result<GridSpec> {
        GridSpec::new(alpha, self.horizon, self.eta)
    }

    pub fn n_steps(&self) -> Result<usize> {
        Ok(self.grid(1.0)?.n_steps)
    }
}

/// Monte Carlo point estimate with dispersion statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateRow {
    pub alpha: f64,
    pub mean: f64,
    /// `None` with a single replication.
    pub sample_stddev: Option<f64>,
    pub stderr: Option<f64>,
    pub ci95_lo: Option<f64>,
    pub ci95_hi: Option<f64>,
    pub reps: usize,
}

impl EstimateRow {
    /// Summarizes per-replication values with a normal-theory 95% interval.
    pub fn from_values(alpha: f64, values: &[f64]) -> Self {
        Self::from_summary(alpha, summarize(values))
    }

    pub fn from_summary(alpha: f64, s: Summary) -> Self {
        Self {
            alpha,
            mean: s.mean,
            sample_stddev: s.sample_stddev,
            stderr: s.stderr,
            ci95_lo: s.stderr.map(|se| s.mean - 1.96 * se),
            ci95_hi: s.stderr.map(|se| s.mean + 1.96 * se),
            reps: s.count,
        }
    }
}

/// Reusable buffers for one worker; evaluates replications against a set
/// of spectra sharing the same `n_steps`.
#[derive(Debug, Default)]
pub struct Replicator {
    seeds: Option<SeedVector>,
    fgn: FgnScratch,
    increments: Vec<f64>,
    path: Vec<f64>,
    z: Vec<f64>,
}

impl Replicator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Draws the seed vector of `(master_seed, rep_index)` for `n_steps`.
    pub fn load_seeds(&mut self, master_seed: u64, rep_index: u64, n_steps: usize) -> &SeedVector {
        match &mut self.seeds {
            Some(s) => s.rederive(master_seed, rep_index, n_steps),
            None => self.seeds = Some(SeedVector::derive(master_seed, rep_index, n_steps)),
        }
        self.seeds.as_ref().expect("seeds just loaded")
    }

    pub fn seeds(&self) -> Option<&SeedVector> {
        self.seeds.as_ref()
    }

    /// Simulates `Z` on `grid` from the loaded seeds and returns it.
    pub fn simulate_z(&mut self, spectrum: &CirculantSpectrum, grid: &GridSpec) -> Result<&[f64]> {
        if spectrum.n_steps() != grid.n_steps || spectrum.alpha() != grid.alpha {
            return Err(Error::invalid(format!(
                "spectrum (alpha {}, n {}) does not match grid (alpha {}, n {})",
                spectrum.alpha(),
                spectrum.n_steps(),
                grid.alpha,
                grid.n_steps
            )));
        }
        let seeds = self
            .seeds
            .as_ref()
            .ok_or_else(|| Error::invalid("no seed vector loaded"))?;
        self.increments.resize(grid.n_steps, 0.0);
        sample_unit_fgn_into(spectrum, &seeds.normals, &mut self.fgn, &mut self.increments)?;
        build_two_sided_fbm_into(&self.increments, grid, &mut self.path)?;
        z_from_values_into(grid, &self.path, &mut self.z);
        Ok(&self.z)
    }

    /// Lattice functionals of the current replication on `grid`.
    pub fn functionals(&mut self, spectrum: &CirculantSpectrum, grid: &GridSpec) -> Result<PathFunctionals> {
        self.simulate_z(spectrum, grid)?;
        functionals_strided(&self.z, grid.eta, grid.zero_index(), 1)
    }

    /// Functionals for each coarsening `stride` of one simulated trace.
    pub fn functionals_sweep(
        &mut self,
        spectrum: &CirculantSpectrum,
        grid: &GridSpec,
        strides: &[usize],
        out: &mut Vec<PathFunctionals>,
    ) -> Result<()> {
        self.simulate_z(spectrum, grid)?;
        out.clear();
        for &s in strides {
            out.push(functionals_strided(&self.z, grid.eta, grid.zero_index(), s)?);
        }
        Ok(())
    }
}

/// Strides `eta_c / eta` for a list of nested meshes, validated against the
/// lattice of `grid`.
pub fn sweep_strides(grid: &GridSpec, etas: &[f64]) -> Result<Vec<usize>> {
    if etas.is_empty() {
        return Err(Error::invalid("eta list is empty"));
    }
    etas.iter()
        .map(|&eta_c| {
            let ratio = eta_c / grid.eta;
            let r = libm::round(ratio);
            let nested = r >= 1.0
                && libm::fabs(ratio - r) <= 1e-9 * r
                && (r as usize).is_power_of_two()
                && (r as usize) <= grid.zero_index();
            if nested {
                Ok(r as usize)
            } else {
                Err(Error::invalid(format!(
                    "eta = {eta_c} is not a power-of-two multiple of the finest mesh {} within T = {}",
                    grid.eta, grid.horizon
                )))
            }
        })
        .collect()
}

/// `eta^-1 P(sup_k Z_{k eta} = 0)` from per-replication indicators.
pub fn albin_row(alpha: f64, eta: f64, indicators: &[bool]) -> EstimateRow {
    let values: Vec<f64> = indicators
        .iter()
        .map(|&hit| if hit { 1.0 / eta } else { 0.0 })
        .collect();
    EstimateRow::from_values(alpha, &values)
}

/// Monte Carlo estimates of both sides of the change-of-measure identity
/// `E[e^{Z_t} F(Z)] = E[F(theta_t Z)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChangeOfMeasure {
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of `lhs - rhs` from the paired differences.
    pub combined_stderr: f64,
}

/// Translation-invariant test functional `max_s e^{z_s} / sum_s e^{z_s}`.
fn max_over_sum(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = z.iter().map(|&v| libm::exp(v - m)).sum();
    1.0 / s
}

fn z_at(alpha: f64, times: &[f64], b: &[f64], out: &mut [f64]) {
    for ((o, &t), &bt) in out.iter_mut().zip(times).zip(b) {
        *o = SQRT_2 * bt - libm::pow(libm::fabs(t), alpha);
    }
}

/// Both sides of the identity on a small lattice using the Cholesky oracle.
///
/// The left side samples `Z` on `lattice`; the right side samples `Z` on
/// `lattice - t`, which is `theta_t Z` read on `lattice`. Both sides consume
/// the same normals per replication, so the difference has a paired
/// standard error and `t = 0` gives identical estimates.
pub fn change_of_measure_check(
    alpha: f64,
    t: f64,
    lattice: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ChangeOfMeasure> {
    check_alpha(alpha)?;
    if reps < 2 {
        return Err(Error::invalid("need at least 2 replications"));
    }
    let t_index = lattice
        .iter()
        .position(|&s| s == t)
        .ok_or_else(|| Error::invalid(format!("t = {t} is not a lattice point")))?;
    if !lattice.iter().any(|&s| s == 0.0) {
        return Err(Error::invalid("lattice must contain 0"));
    }
    let shifted: Vec<f64> = lattice.iter().map(|&s| s - t).collect();
    let direct = FbmCholesky::new(alpha, lattice)?;
    let moved = FbmCholesky::new(alpha, &shifted)?;

    let n = lattice.len();
    let mut normals = vec![0.0; n];
    let (mut b, mut z) = (vec![0.0; n], vec![0.0; n]);
    let mut lhs = Vec::with_capacity(reps);
    let mut rhs = Vec::with_capacity(reps);
    let mut diff = Vec::with_capacity(reps);
    for r in 0..reps {
        GaussianStream::new(seed, r as u64).fill(&mut normals);
        direct.sample_into(&normals, &mut b)?;
        z_at(alpha, lattice, &b, &mut z);
        let l = libm::exp(z[t_index]) * max_over_sum(&z);
        moved.sample_into(&normals, &mut b)?;
        z_at(alpha, &shifted, &b, &mut z);
        let rr = max_over_sum(&z);
        lhs.push(l);
        rhs.push(rr);
        diff.push(l - rr);
    }
    let d = summarize(&diff);
    Ok(ChangeOfMeasure {
        lhs: crate::stats::mean(&lhs),
        rhs: crate::stats::mean(&rhs),
        combined_stderr: d.stderr.unwrap_or(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::circulant_spectrum;

    #[test]
    fn row_statistics() {
        let row = EstimateRow::from_values(1.0, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(row.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((row.sample_stddev.unwrap() - sd).abs() < 1e-15);
        assert!((row.stderr.unwrap() - sd / 2.0).abs() < 1e-15);
        assert!((row.ci95_lo.unwrap() - (2.5 - 1.96 * sd / 2.0)).abs() < 1e-15);
        let single = EstimateRow::from_values(1.0, &[0.7]);
        assert!(single.sample_stddev.is_none() && single.ci95_hi.is_none());
    }

    #[test]
    fn albin_zero_successes() {
        let row = albin_row(1.0, 0.125, &[false; 10]);
        assert_eq!(row.mean, 0.0);
        let row = albin_row(1.0, 0.125, &[true, false, false, false]);
        assert_eq!(row.mean, 2.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EstimatorConfig {
            alphas: vec![1.0],
            horizon: 4.0,
            eta: 0.25,
            reps: 1,
            master_seed: 0,
            workers: 1,
        };
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.n_steps().unwrap(), 32);
        cfg.reps = 0;
        assert!(cfg.validate().is_err());
        cfg.reps = 1;
        cfg.eta = 0.3;
        assert!(cfg.validate().is_err());
        cfg.eta = 0.25;
        cfg.alphas.push(2.5);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn sweep_strides_validation() {
        let g = GridSpec::new(1.0, 4.0, 0.125).unwrap();
        assert_eq!(sweep_strides(&g, &[0.125, 0.25, 1.0]).unwrap(), vec![1, 2, 8]);
        assert!(sweep_strides(&g, &[0.375]).is_err());
        assert!(sweep_strides(&g, &[0.0625]).is_err());
        assert!(sweep_strides(&g, &[8.0]).is_err());
        assert!(sweep_strides(&g, &[]).is_err());
    }

    #[test]
    fn sweep_coarse_max_never_exceeds_fine() {
        let g = GridSpec::new(1.3, 8.0, 1.0 / 32.0).unwrap();
        let s = circulant_spectrum(1.3, g.n_steps).unwrap();
        let mut rep = Replicator::new();
        let strides = [1, 2, 4, 8];
        let mut out = Vec::new();
        for r in 0..50 {
            rep.load_seeds(3, r, g.n_steps);
            rep.functionals_sweep(&s, &g, &strides, &mut out).unwrap();
            for w in out.windows(2) {
                assert!(w[1].m_eta <= w[0].m_eta);
            }
            let direct = rep.functionals(&s, &g).unwrap();
            assert_eq!(direct, out[0]);
            assert!(direct.ratio > 0.0 && direct.ratio <= 32.0);
        }
    }

    #[test]
    fn replicator_rejects_mismatch() {
        let g = GridSpec::new(1.3, 8.0, 1.0 / 32.0).unwrap();
        let s = circulant_spectrum(1.0, g.n_steps).unwrap();
        let mut rep = Replicator::new();
        rep.load_seeds(0, 0, g.n_steps);
        assert!(rep.functionals(&s, &g).is_err());
    }

    #[test]
    fn change_of_measure_identity_at_zero() {
        let lat = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let r = change_of_measure_check(1.2, 0.0, &lat, 200, 4).unwrap();
        assert_eq!(r.lhs, r.rhs);
        assert_eq!(r.combined_stderr, 0.0);
    }

    #[test]
    fn change_of_measure_argument_errors() {
        let lat = [-1.0, 0.0, 1.0];
        assert!(change_of_measure_check(1.0, 0.5, &lat, 10, 0).is_err());
        assert!(change_of_measure_check(1.0, 1.0, &[-1.0, 1.0], 10, 0).is_err());
    }
}
