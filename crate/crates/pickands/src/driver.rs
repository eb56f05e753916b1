//! Parallel estimators. Each replication index is evaluated independently
//! and its results are stored by index; every reduction then runs in index
//! order, so the output does not depend on the number of workers.

use std::sync::Arc;

use rayon::prelude::*;

use pickands_core::estimator::{albin_row, sweep_strides, EstimateRow, EstimatorConfig, Replicator};
use pickands_core::rng::mix_seed;
use pickands_core::{CirculantSpectrum, GridSpec, PathFunctionals};

use crate::cache;
use crate::error::CliError;

pub use pickands_core::estimator::{change_of_measure_check, ChangeOfMeasure};

/// How the columns of an `eta` sweep are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// One trace at the finest mesh, subsampled for coarser meshes.
    #[default]
    SameTrace,
    /// A fresh set of replications per mesh.
    Independent,
}

struct Setup {
    grids: Vec<GridSpec>,
    spectra: Vec<Arc<CirculantSpectrum>>,
    n_steps: usize,
}

fn setup(config: &EstimatorConfig) -> Result<Setup, CliError> {
    config.validate()?;
    let mut grids = Vec::with_capacity(config.alphas.len());
    let mut spectra = Vec::with_capacity(config.alphas.len());
    for &alpha in &config.alphas {
        let g = config.grid(alpha)?;
        spectra.push(cache::spectrum(alpha, g.n_steps)?);
        grids.push(g);
    }
    let n_steps = config.n_steps()?;
    Ok(Setup { grids, spectra, n_steps })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

/// Runs `kernel` for every replication and returns the results in index
/// order. All alphas of a replication share one seed vector.
fn replicate<T, F>(config: &EstimatorConfig, setup: &Setup, master_seed: u64, kernel: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&mut Replicator, &GridSpec, &CirculantSpectrum) -> pickands_core::Result<T> + Sync,
{
    let reps = config.reps as u64;
    let alphas = setup.grids.len();
    let run = || {
        (0..reps)
            .into_par_iter()
            .map_init(Replicator::new, |rep, r| {
                rep.load_seeds(master_seed, r, setup.n_steps);
                let mut row = Vec::with_capacity(alphas);
                for (g, s) in setup.grids.iter().zip(&setup.spectra) {
                    row.push(kernel(rep, g, s)?);
                }
                Ok(row)
            })
            .collect::<pickands_core::Result<Vec<Vec<T>>>>()
    };
    let per_rep = pool(config.workers)?.install(run)?;
    Ok(transpose(per_rep, alphas))
}

fn transpose<T>(per_rep: Vec<Vec<T>>, width: usize) -> Vec<T> {
    // Flattened as [alpha][rep].
    let reps = per_rep.len();
    let mut cols: Vec<Vec<T>> = (0..width).map(|_| Vec::with_capacity(reps)).collect();
    for row in per_rep {
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    cols.into_iter().flatten().collect()
}

/// Estimates `H_alpha^eta(T)` for every alpha as the mean of `M/S` over
/// replications, with common random numbers across alphas.
pub fn estimate_ratio(config: &EstimatorConfig) -> Result<Vec<EstimateRow>, CliError> {
    let s = setup(config)?;
    let values = replicate(config, &s, config.master_seed, |rep, g, spec| Ok(rep.functionals(spec, g)?.ratio))?;
    Ok(rows(config, &values))
}

/// Estimates `eta^-1 P(sup_k Z_{k eta} = 0)` on the truncated lattice.
pub fn estimate_albin(config: &EstimatorConfig) -> Result<Vec<EstimateRow>, CliError> {
    let s = setup(config)?;
    let hits = replicate(config, &s, config.master_seed, |rep, g, spec| {
        Ok(rep.functionals(spec, g)?.sup_at_zero)
    })?;
    Ok(config
        .alphas
        .iter()
        .zip(hits.chunks(config.reps))
        .map(|(&a, h)| albin_row(a, config.eta, h))
        .collect())
}

fn rows(config: &EstimatorConfig, values: &[f64]) -> Vec<EstimateRow> {
    config
        .alphas
        .iter()
        .zip(values.chunks(config.reps))
        .map(|(&a, v)| EstimateRow::from_values(a, v))
        .collect()
}

/// Estimates on several nested meshes: one row per alpha, one column per
/// entry of `etas`. `config.eta` is the finest mesh simulated.
pub fn estimate_eta_sweep(
    config: &EstimatorConfig,
    etas: &[f64],
    mode: SweepMode,
) -> Result<Vec<Vec<EstimateRow>>, CliError> {
    config.validate()?;
    let strides = sweep_strides(&config.grid(1.0)?, etas)?;
    match mode {
        SweepMode::SameTrace => same_trace_sweep(config, &strides),
        SweepMode::Independent => {
            let mut columns = Vec::with_capacity(etas.len());
            for (c, &eta) in etas.iter().enumerate() {
                let cfg = EstimatorConfig {
                    eta,
                    master_seed: mix_seed(config.master_seed, c as u64 + 1),
                    ..config.clone()
                };
                columns.push(estimate_ratio(&cfg)?);
            }
            Ok((0..config.alphas.len())
                .map(|a| columns.iter().map(|col| col[a].clone()).collect())
                .collect())
        }
    }
}

fn same_trace_sweep(config: &EstimatorConfig, strides: &[usize]) -> Result<Vec<Vec<EstimateRow>>, CliError> {
    let s = setup(config)?;
    let sweeps = replicate(config, &s, config.master_seed, |rep, g, spec| {
        let mut out: Vec<PathFunctionals> = Vec::with_capacity(strides.len());
        rep.functionals_sweep(spec, g, strides, &mut out)?;
        Ok(out.into_iter().map(|f| f.ratio).collect::<Vec<f64>>())
    })?;
    let mut matrix = Vec::with_capacity(config.alphas.len());
    for (&alpha, per_rep) in config.alphas.iter().zip(sweeps.chunks(config.reps)) {
        let row = (0..strides.len())
            .map(|c| {
                let col: Vec<f64> = per_rep.iter().map(|v| v[c]).collect();
                EstimateRow::from_values(alpha, &col)
            })
            .collect();
        matrix.push(row);
    }
    Ok(matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alphas: Vec<f64>, reps: usize, workers: usize) -> EstimatorConfig {
        EstimatorConfig {
            alphas,
            horizon: 8.0,
            eta: 1.0 / 16.0,
            reps,
            master_seed: 11,
            workers,
        }
    }

    #[test]
    fn transpose_layout() {
        let t = transpose(vec![vec![1, 2], vec![3, 4], vec![5, 6]], 2);
        assert_eq!(t, vec![1, 3, 5, 2, 4, 6]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = estimate_ratio(&cfg(vec![0.8, 1.5], 40, 1)).unwrap();
        for w in [2, 8] {
            assert_eq!(estimate_ratio(&cfg(vec![0.8, 1.5], 40, w)).unwrap(), one);
        }
    }

    #[test]
    fn finest_sweep_column_matches_ratio() {
        let c = cfg(vec![1.0, 1.7], 30, 2);
        let direct = estimate_ratio(&c).unwrap();
        let sweep = estimate_eta_sweep(&c, &[1.0 / 16.0, 0.25], SweepMode::SameTrace).unwrap();
        for (row, d) in sweep.iter().zip(&direct) {
            assert_eq!(&row[0], d);
        }
    }

    #[test]
    fn independent_sweep_shape() {
        let c = cfg(vec![1.0], 10, 1);
        let m = estimate_eta_sweep(&c, &[1.0 / 16.0, 0.125], SweepMode::Independent).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].len(), 2);
        assert!(estimate_eta_sweep(&c, &[0.1], SweepMode::SameTrace).is_err());
    }

    #[test]
    fn albin_is_a_scaled_probability() {
        let c = cfg(vec![1.0, 2.0], 50, 1);
        for row in estimate_albin(&c).unwrap() {
            assert!(row.mean * c.eta >= 0.0 && row.mean * c.eta <= 1.0);
        }
    }

    #[test]
    fn zero_reps_rejected() {
        assert!(estimate_ratio(&cfg(vec![1.0], 0, 1)).is_err());
    }
}
