//! Least-squares extrapolation of `H_alpha^eta(T)` to `eta = 0` under the
//! model `H_alpha^eta(T) = H_alpha(T) - c * eta^(alpha/2)`.

use alloc::vec::Vec;

use crate::fgn::check_alpha;
use crate::stats::CompensatedSum;
use crate::{Error, Result};

/// How the `(eta, estimate)` points were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FitMode {
    /// All columns come from one simulated trace; errors are dependent and
    /// no standard errors are reported.
    #[default]
    SameTrace,
    /// Independent runs per `eta`; normal-theory standard errors are valid.
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitPoint {
    pub eta: f64,
    pub estimate: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EtaScalingFit {
    pub alpha: f64,
    /// Intercept: the extrapolated `H_alpha(T)`.
    pub h_t_hat: f64,
    /// Minus the slope in the regressor `eta^(alpha/2)`.
    pub c_hat: f64,
    pub points: Vec<FitPoint>,
    pub r_squared: f64,
    pub n_points: usize,
    pub mode: FitMode,
    /// `(se(h_t_hat), se(c_hat))`; only in independent mode with >= 3 points.
    pub standard_errors: Option<(f64, f64)>,
}

impl EtaScalingFit {
    pub fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.residual)
    }
}

/// Fits with [`FitMode::SameTrace`].
pub fn fit_eta_scaling(points: &[(f64, f64)], alpha: f64) -> Result<EtaScalingFit> {
    fit_eta_scaling_with(points, alpha, FitMode::SameTrace)
}

pub fn fit_eta_scaling_with(points: &[(f64, f64)], alpha: f64, mode: FitMode) -> Result<EtaScalingFit> {
    check_alpha(alpha)?;
    if points.iter().any(|&(eta, y)| !(eta > 0.0) || !y.is_finite()) {
        return Err(Error::invalid("every point needs eta > 0 and a finite estimate"));
    }
    let mut etas: Vec<f64> = points.iter().map(|p| p.0).collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    if etas.len() < 2 {
        return Err(Error::invalid(alloc::format!(
            "need at least 2 distinct eta values, got {}",
            etas.len()
        )));
    }

    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(eta, _)| libm::pow(eta, 0.5 * alpha)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let x_bar = crate::stats::sum(&xs) / n;
    let y_bar = crate::stats::sum(&ys) / n;
    let (mut sxx, mut sxy, mut syy) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for (&x, &y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - x_bar, y - y_bar);
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    let slope = sxy.value() / sxx.value();
    let intercept = y_bar - slope * x_bar;

    let mut rss = CompensatedSum::new();
    let fitted: Vec<FitPoint> = points
        .iter()
        .zip(&xs)
        .map(|(&(eta, y), &x)| {
            let residual = y - (intercept + slope * x);
            rss.add(residual * residual);
            FitPoint {
                eta,
                estimate: y,
                residual,
            }
        })
        .collect();
    let r_squared = if syy.value() > 0.0 {
        1.0 - rss.value() / syy.value()
    } else {
        1.0
    };
    let standard_errors = match mode {
        FitMode::Independent if points.len() > 2 => {
            let s2 = rss.value() / (n - 2.0);
            let se_slope = libm::sqrt(s2 / sxx.value());
            let se_icpt = libm::sqrt(s2 * (1.0 / n + x_bar * x_bar / sxx.value()));
            Some((se_icpt, se_slope))
        }
        _ => None,
    };
    Ok(EtaScalingFit {
        alpha,
        h_t_hat: intercept,
        c_hat: -slope,
        points: fitted,
        r_squared,
        n_points: points.len(),
        mode,
        standard_errors,
    })
}

/// Model value `h_t_hat - c_hat * eta^(alpha/2)`.
pub fn predict(fit: &EtaScalingFit, eta: f64) -> f64 {
    fit.h_t_hat - fit.c_hat * libm::pow(eta, 0.5 * fit.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    #[test]
    fn exact_affine_recovery() {
        let alpha = 1.0;
        let pts: Vec<(f64, f64)> = [1.0 / 1024.0, 1.0 / 512.0, 1.0 / 256.0, 1.0 / 128.0]
            .iter()
            .map(|&e: &f64| (e, 0.9 - 0.5 * e.sqrt()))
            .collect();
        let f = fit_eta_scaling(&pts, alpha).unwrap();
        assert!((f.h_t_hat - 0.9).abs() < 1e-12);
        assert!((f.c_hat - 0.5).abs() < 1e-12);
        assert!(f.residuals().all(|r| r.abs() < 1e-12));
        assert!(f.standard_errors.is_none());
        assert_eq!(f.n_points, 4);
    }

    #[test]
    fn two_points_interpolate() {
        let pts = [(0.25, 0.7), (0.0625, 0.8)];
        let f = fit_eta_scaling(&pts, 2.0).unwrap();
        assert!((predict(&f, 0.25) - 0.7).abs() < 1e-14);
        assert!((predict(&f, 0.0625) - 0.8).abs() < 1e-14);
        assert_eq!(predict(&f, 0.0), f.h_t_hat);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_eta_scaling(&[(0.1, 1.0)], 1.0).is_err());
        assert!(fit_eta_scaling(&[(0.1, 1.0), (0.1, 0.9)], 1.0).is_err());
        assert!(fit_eta_scaling(&[(0.0, 1.0), (0.1, 0.9)], 1.0).is_err());
        assert!(fit_eta_scaling(&[(0.2, 1.0), (0.1, 0.9)], 3.0).is_err());
    }

    #[test]
    fn independent_mode_reports_errors() {
        let pts = [(0.01, 0.95), (0.02, 0.94), (0.04, 0.92), (0.08, 0.885)];
        let f = fit_eta_scaling_with(&pts, 1.5, FitMode::Independent).unwrap();
        let (a, b) = f.standard_errors.unwrap();
        assert!(a > 0.0 && b > 0.0);
    }

    #[test]
    fn predict_monotone_when_slope_positive() {
        let pts = [(0.01, 0.95), (0.02, 0.94), (0.04, 0.92)];
        let f = fit_eta_scaling(&pts, 1.0).unwrap();
        assert!(f.c_hat > 0.0);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..12 {
            let v = predict(&f, 2f64.powi(-k));
            assert!(v > prev);
            prev = v;
        }
        let a = predict(&f, 0.01);
        let b = predict(&f, 0.001);
        assert!(b > a);
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal(ys in proptest::collection::vec(0.5f64..1.5, 5), alpha in 0.5f64..2.0) {
            let etas = [1.0 / 1024.0, 1.0 / 512.0, 1.0 / 256.0, 1.0 / 128.0, 1.0 / 64.0];
            let pts: Vec<(f64, f64)> = etas.iter().cloned().zip(ys.iter().cloned()).collect();
            let f = fit_eta_scaling(&pts, alpha).unwrap();
            let s: f64 = f.residuals().sum();
            let sx: f64 = f.points.iter().map(|p| p.residual * p.eta.powf(alpha / 2.0)).sum();
            prop_assert!(s.abs() < 1e-12);
            prop_assert!(sx.abs() < 1e-12);
        }

        #[test]
        fn affine_inputs_are_recovered(h in 0.3f64..1.3, c in -2.0f64..2.0, alpha in 0.5f64..2.0) {
            let pts: Vec<(f64, f64)> = (4..9).map(|k| {
                let e = 2f64.powi(-k);
                (e, h - c * e.powf(alpha / 2.0))
            }).collect();
            let f = fit_eta_scaling(&pts, alpha).unwrap();
            prop_assert!((f.h_t_hat - h).abs() < 1e-12);
            prop_assert!((f.c_hat - c).abs() < 1e-10 * c.abs().max(1.0));
        }
    }
}
