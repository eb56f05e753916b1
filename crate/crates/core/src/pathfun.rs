//! Lattice functionals of the drifted field `Z_t = sqrt(2) B_t - |t|^alpha`.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::fgn::{FbmPath, GridSpec};
use crate::stats::CompensatedSum;
use crate::{Error, Result};

/// `Z` on the lattice of `grid`; exactly zero at the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPath {
    pub grid: GridSpec,
    pub z_values: Vec<f64>,
}

pub fn z_from_fbm(path: &FbmPath) -> ZPath {
    let mut z_values = Vec::new();
    z_from_values_into(&path.grid, &path.values, &mut z_values);
    ZPath {
        grid: path.grid,
        z_values,
    }
}

pub(crate) fn z_from_values_into(grid: &GridSpec, b: &[f64], z: &mut Vec<f64>) {
    z.clear();
    z.extend(b.iter().enumerate().map(|(k, &bk)| {
        let t = grid.time(k);
        SQRT_2 * bk - libm::pow(libm::fabs(t), grid.alpha)
    }));
}

/// Discrete supremum, Riemann sum and their ratio for one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFunctionals {
    /// `exp(max_k z_k)`; may be `+inf` when the maximum is huge.
    pub m_eta: f64,
    /// `eta * sum_k exp(z_k)`; may be `+inf` alongside `m_eta`.
    pub s_eta: f64,
    /// `m_eta / s_eta`, computed after subtracting the maximum so it stays finite.
    pub ratio: f64,
    /// `max_k z_k`.
    pub z_max: f64,
    pub argmax_index: usize,
    /// All lattice values are `<= 0`, i.e. the supremum sits at the origin.
    pub sup_at_zero: bool,
}

pub fn functionals(z: &ZPath) -> PathFunctionals {
    functionals_strided(&z.z_values, z.grid.eta, z.grid.zero_index(), 1)
        .expect("a ZPath always has a valid lattice")
}

/// Functionals on the sub-lattice `{zero_index + j * stride}` of `z`, whose
/// mesh is `eta * stride`.
///
/// Ties for the maximum go to the index closest to `zero_index`, then to the
/// negative side.
pub fn functionals_strided(
    z: &[f64],
    eta: f64,
    zero_index: usize,
    stride: usize,
) -> Result<PathFunctionals> {
    if stride == 0 || zero_index >= z.len() || zero_index % stride != 0 {
        return Err(Error::invalid(alloc::format!(
            "stride {stride} does not align with anchor {zero_index} on {} points",
            z.len()
        )));
    }
    let mesh = eta * stride as f64;
    let dist = |k: usize| k.abs_diff(zero_index);

    let mut z_max = f64::NEG_INFINITY;
    let mut argmax = zero_index;
    for k in (0..z.len()).step_by(stride) {
        let v = z[k];
        let better = v > z_max
            || (v == z_max && (dist(k) < dist(argmax) || (dist(k) == dist(argmax) && k < argmax)));
        if better {
            z_max = v;
            argmax = k;
        }
    }
    if !z_max.is_finite() {
        return Err(Error::Numerical(alloc::format!(
            "non-finite lattice maximum {z_max}"
        )));
    }

    let mut acc = CompensatedSum::new();
    for k in (0..z.len()).step_by(stride) {
        acc.add(libm::exp(z[k] - z_max));
    }
    let shifted = acc.value();
    let m_eta = libm::exp(z_max);
    Ok(PathFunctionals {
        m_eta,
        s_eta: mesh * m_eta * shifted,
        ratio: 1.0 / (mesh * shifted),
        z_max,
        argmax_index: argmax,
        sup_at_zero: z_max <= 0.0,
    })
}
