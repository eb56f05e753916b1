use std::path::Path;
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/appendix_b.csv");

fn pickands(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pickands"))
        .args(args)
        .env_remove("PICKANDS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn small_estimate(extra: &[&str]) -> Output {
    let mut args = vec!["estimate", "--alphas", "1,1.5", "--T", "4", "--eta", "2^-4", "--reps", "20"];
    args.extend_from_slice(extra);
    pickands(&args)
}

#[test]
fn estimate_is_byte_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(small_estimate(&["--workers", "1", "--out", a.to_str().unwrap()]).status.success());
    assert!(small_estimate(&["--workers", "3", "--out", b.to_str().unwrap()]).status.success());
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("alpha,estimate,sample_stddev,stderr,ci95_lo,ci95_hi\n1.000,"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn workers_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_pickands"))
        .args(["estimate", "--alphas", "1", "--T", "4", "--eta", "2^-4", "--reps", "20"])
        .env("PICKANDS_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let pinned = pickands(&["estimate", "--alphas", "1", "--T", "4", "--eta", "2^-4", "--reps", "20", "--workers", "1"]);
    assert_eq!(stdout(&o), stdout(&pinned));
}

#[test]
fn single_rep_leaves_dispersion_empty() {
    let o = pickands(&["estimate", "--alphas", "1.2", "--T", "4", "--eta", "2^-4", "--reps", "1"]);
    assert!(o.status.success());
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(line.starts_with("1.200,") && line.ends_with(",,,,"), "{line}");
}

#[test]
fn default_grid_has_27_rows() {
    let o = pickands(&["estimate", "--T", "4", "--eta", "2^-4", "--reps", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 28);
    assert!(lines[1].starts_with("0.700,") && lines[27].starts_with("2.000,"));
}

#[test]
fn albin_method_and_json() {
    let o = small_estimate(&["--method", "albin", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let m = r["mean"].as_f64().unwrap();
        assert!((0.0..=16.0).contains(&m));
    }
}

#[test]
fn bad_configuration_exits_with_config_status() {
    for args in [
        vec!["estimate", "--eta", "0.3", "--T", "4"],
        vec!["estimate", "--alphas", "2.5", "--T", "4", "--eta", "2^-4"],
        vec!["estimate", "--reps", "0", "--T", "4", "--eta", "2^-4"],
        vec!["estimate", "--alphas", "1:0:2"],
        vec!["estimate", "--no-such-flag"],
    ] {
        let o = pickands(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn bounds_on_reference_fixture() {
    let o = pickands(&["bounds", FIXTURE]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let got = stdout(&o);
    let want = std::fs::read_to_string(FIXTURE).unwrap();
    assert_eq!(got.lines().count(), 28);
    assert_eq!(got.lines().next(), want.lines().next());
    for (g, w) in got.lines().zip(want.lines()).skip(1) {
        let g: Vec<&str> = g.split(',').collect();
        let w: Vec<&str> = w.split(',').collect();
        assert_eq!(&g[..3], &w[..3]);
        if w[3] == "---" {
            assert_eq!(&g[3..], &["---", "---"]);
        } else {
            let tol = if w[0] == "1.000" { 2e-3 } else { 1e-4 };
            for k in 3..5 {
                let d = (g[k].parse::<f64>().unwrap() - w[k].parse::<f64>().unwrap()).abs();
                assert!(d <= tol, "{g:?} vs {w:?}");
            }
        }
    }
}

#[test]
fn bounds_empty_and_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let o = pickands(&["bounds", empty.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "alpha,estimate\n1.2,oops\n").unwrap();
    assert_eq!(pickands(&["bounds", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(pickands(&["bounds", "/no/such/file.csv"]).status.code(), Some(2));
}

#[test]
fn estimate_output_feeds_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let est = dir.path().join("est.csv");
    assert!(small_estimate(&["--out", est.to_str().unwrap()]).status.success());
    let o = pickands(&["bounds", est.to_str().unwrap(), "--T", "4", "--eta", "2^-4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("alpha,estimate,sample_stddev,lower_bound,upper_bound\n"));
}

#[test]
fn table_composes_estimate_and_bounds() {
    let o = pickands(&["table", "--alphas", "0.8,1.5", "--T", "4", "--eta", "2^-4", "--reps", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
    let est = stdout(&pickands(&["estimate", "--alphas", "0.8,1.5", "--T", "4", "--eta", "2^-4", "--reps", "10"]));
    for (t, e) in rows.iter().zip(est.lines()).skip(1) {
        let t: Vec<&str> = t.split(',').collect();
        let e: Vec<&str> = e.split(',').collect();
        assert_eq!(&t[..3], &e[..3]);
    }
}

#[test]
fn regress_arguments() {
    let o = pickands(&["regress", "--etas", "2^-4", "--T", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pickands(&["regress", "--etas", "2^-4,0.1", "--T", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn regress_echoes_exact_synthetic_points() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("points.csv");
    let mut text = String::from("alpha,eta,estimate\n");
    for k in 4..8 {
        let eta = 2f64.powi(-k);
        text.push_str(&format!("1,{eta},{}\n", 0.9 - 0.5 * eta.sqrt()));
    }
    std::fs::write(&p, text).unwrap();
    let o = pickands(&["regress", "--points", p.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let fit = &v[0];
    assert!((fit["h_t_hat"].as_f64().unwrap() - 0.9).abs() < 1e-12);
    assert!((fit["c_hat"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let o = pickands(&["regress", "--points", p.to_str().unwrap()]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("1.000,0.9000000,0.5000000,1.0000000,4,"));
}

#[test]
fn regress_simulated_sweep() {
    let o = pickands(&["regress", "--alphas", "1,1.5", "--T", "4", "--etas", "2^-6,2^-5,2^-4", "--reps", "30"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = pickands(&["regress", "--T", "4", "--etas", "2^-6,2^-5,2^-4", "--reps", "30", "--independent", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[0]["fit"]["standard_errors"].is_array());
}

#[test]
fn identity_check_statuses() {
    let o = pickands(&["identity-check"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 2.0).abs() < 1e-4);
    }
    assert_eq!(pickands(&["identity-check", "--eta", "0.5", "--tol", "1e-300"]).status.code(), Some(3));
    assert_eq!(pickands(&["identity-check", "--eta", "-1"]).status.code(), Some(2));
}

#[test]
fn fgn_dump_shapes() {
    let o = pickands(&["fgn-dump", "--count", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "rep,t,B_t,Z_t\n");

    let o = pickands(&["fgn-dump", "--alpha", "2", "--T", "2", "--eta", "1/4", "--count", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 34);
    for path in rows.chunks(17) {
        let slope = path[16][2] / path[16][1];
        for r in path {
            assert!((r[2] - slope * r[1]).abs() < 1e-12, "{r:?}");
            assert!((r[3] - (2f64.sqrt() * r[2] - r[1] * r[1])).abs() < 1e-12);
        }
    }
}

#[test]
fn fixture_is_present() {
    assert!(Path::new(FIXTURE).exists());
}
