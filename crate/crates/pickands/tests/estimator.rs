use pickands::driver::{estimate_eta_sweep, estimate_ratio, SweepMode};
use pickands_core::estimator::EstimatorConfig;
use pickands_core::regress::{fit_eta_scaling, predict};

fn config(alphas: Vec<f64>, horizon: f64, eta: f64, reps: usize) -> EstimatorConfig {
    EstimatorConfig {
        alphas,
        horizon,
        eta,
        reps,
        master_seed: 7,
        workers: 2,
    }
}

#[test]
fn alpha_two_has_small_dispersion() {
    let row = &estimate_ratio(&config(vec![2.0], 8.0, 2f64.powi(-8), 100)).unwrap()[0];
    assert!(row.sample_stddev.unwrap() <= 0.02, "{row:?}");
    assert!(row.mean > 0.0 && row.mean <= 256.0);
}

#[test]
fn confidence_interval_layout() {
    for row in estimate_ratio(&config(vec![0.9, 1.4], 8.0, 2f64.powi(-6), 50)).unwrap() {
        let se = row.stderr.unwrap();
        assert_eq!(se, row.sample_stddev.unwrap() / 50f64.sqrt());
        assert_eq!(row.ci95_lo.unwrap(), row.mean - 1.96 * se);
        assert_eq!(row.ci95_hi.unwrap(), row.mean + 1.96 * se);
    }
}

#[test]
fn alpha_one_estimates_rise_as_mesh_shrinks() {
    let etas: Vec<f64> = (5..=8).rev().map(|k| 2f64.powi(-k)).collect();
    let m = estimate_eta_sweep(&config(vec![1.0], 16.0, etas[0], 300), &etas, SweepMode::SameTrace).unwrap();
    for w in m[0].windows(2) {
        let slack = 2.0 * w[0].stderr.unwrap().max(w[1].stderr.unwrap());
        assert!(w[1].mean <= w[0].mean + slack, "{:?}", m[0]);
    }
}

#[test]
fn extrapolation_near_one_and_prediction_close_to_direct() {
    let etas: Vec<f64> = (6..=9).rev().map(|k| 2f64.powi(-k)).collect();
    let m = estimate_eta_sweep(&config(vec![1.0], 32.0, etas[0], 500), &etas, SweepMode::SameTrace).unwrap();
    let pts: Vec<(f64, f64)> = etas.iter().zip(&m[0]).map(|(&e, r)| (e, r.mean)).collect();
    let fit = fit_eta_scaling(&pts, 1.0).unwrap();
    assert!((fit.h_t_hat - 1.0).abs() <= 0.03, "{fit:?}");

    let coarse = fit_eta_scaling(&pts[1..], 1.0).unwrap();
    let gap = (predict(&coarse, etas[0]) - pts[0].1).abs();
    assert!(gap < 0.03, "gap {gap}");
}
