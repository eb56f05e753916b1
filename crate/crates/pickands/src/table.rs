//! Parsing of numeric flags and the CSV/JSON table formats.
//!
//! Values are written with 7 decimals and alpha with 3, the layout of the
//! published table. Missing values are an empty field, failed bounds are
//! `---`.

use std::io::{Read, Write};

use serde::Serialize;

use pickands_core::bounds::{interval, BoundParams, IntervalReport};
use pickands_core::estimator::EstimateRow;
use pickands_core::regress::EtaScalingFit;

use crate::error::CliError;

pub const ESTIMATE_HEADER: [&str; 6] = ["alpha", "estimate", "sample_stddev", "stderr", "ci95_lo", "ci95_hi"];
pub const BOUNDS_HEADER: [&str; 5] = ["alpha", "estimate", "sample_stddev", "lower_bound", "upper_bound"];
pub const MISSING_BOUND: &str = "---";

/// Parses `0.5`, `1/8`, `2^-10` or `1e-3`.
pub fn parse_real(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::config(format!("cannot parse {s:?} as a number"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let v = if let Some((b, e)) = s.split_once('^') {
        num(b)?.powf(num(e)?)
    } else if let Some((n, d)) = s.split_once('/') {
        num(n)? / num(d)?
    } else {
        num(s)?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Parses a comma list (`1,1.5,2^0`) or an inclusive range `start:step:end`.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [one] => one.split(',').map(parse_real).collect(),
        [start, step, end] => {
            let (a, h, b) = (parse_real(start)?, parse_real(step)?, parse_real(end)?);
            if !(h > 0.0) || b < a {
                return Err(CliError::config(format!(
                    "range {s:?} needs a positive step and start <= end"
                )));
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            // Snap to 12 decimals so 0.7 + 6 * 0.05 prints and hashes as 1.0.
            Ok((0..count)
                .map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(CliError::config(format!(
            "{s:?} is neither a comma list nor start:step:end"
        ))),
    }
}

pub fn fmt_value(v: f64) -> String {
    format!("{v:.7}")
}

pub fn fmt_alpha(a: f64) -> String {
    format!("{a:.3}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

fn fmt_bound(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_else(|| MISSING_BOUND.to_string())
}

pub fn write_estimates_csv<W: Write>(out: W, rows: &[EstimateRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ESTIMATE_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_alpha(r.alpha),
            fmt_value(r.mean),
            fmt_opt(r.sample_stddev),
            fmt_opt(r.stderr),
            fmt_opt(r.ci95_lo),
            fmt_opt(r.ci95_hi),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One line of the bounds table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRow {
    pub alpha: f64,
    pub estimate: f64,
    pub sample_stddev: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<IntervalReport>,
    /// Why a bound is missing.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl BoundsRow {
    /// Applies the interval bounds to one estimate. Precondition failures
    /// become missing bounds; other errors are returned.
    pub fn compute(
        alpha: f64,
        estimate: f64,
        sample_stddev: Option<f64>,
        horizon: f64,
        eta: f64,
        params: &BoundParams,
    ) -> Result<Self, CliError> {
        let mut row = BoundsRow {
            alpha,
            estimate,
            sample_stddev,
            lower_bound: None,
            upper_bound: None,
            report: None,
            failures: Vec::new(),
        };
        match interval(estimate, alpha, horizon, eta, params) {
            Ok(rep) => {
                row.lower_bound = rep.lb;
                row.upper_bound = rep.ub;
                row.failures = rep.preconditions.iter().filter_map(|p| p.detail.clone()).collect();
                row.report = Some(rep);
            }
            Err(e) if e.is_precondition() => row.failures.push(e.to_string()),
            Err(e) => return Err(e.into()),
        }
        Ok(row)
    }
}

pub fn write_bounds_csv<W: Write>(out: W, rows: &[BoundsRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUNDS_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_alpha(r.alpha),
            fmt_value(r.estimate),
            fmt_opt(r.sample_stddev),
            fmt_bound(r.lower_bound),
            fmt_bound(r.upper_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// An `(alpha, estimate, sample_stddev)` record read from an estimates table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateInput {
    pub alpha: f64,
    pub estimate: f64,
    pub sample_stddev: Option<f64>,
}

/// Reads any CSV with `alpha` and `estimate` columns (`mean` is accepted for
/// `estimate`). A zero-byte input yields `Ok(None)`.
pub fn read_estimates_csv<R: Read>(mut input: R) -> Result<Option<Vec<EstimateInput>>, CliError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Ok(None);
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
    let alpha_col = col(&["alpha"]).ok_or_else(|| CliError::config("input has no `alpha` column"))?;
    let est_col = col(&["estimate", "mean"]).ok_or_else(|| CliError::config("input has no `estimate` column"))?;
    let sd_col = col(&["sample_stddev"]);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let parse = |c: usize, what: &str| {
            parse_real(field(c)).map_err(|_| {
                CliError::config(format!("row {}: bad {what} value {:?}", line + 1, field(c)))
            })
        };
        let sample_stddev = match sd_col {
            Some(c) if !field(c).is_empty() => Some(parse(c, "sample_stddev")?),
            _ => None,
        };
        rows.push(EstimateInput {
            alpha: parse(alpha_col, "alpha")?,
            estimate: parse(est_col, "estimate")?,
            sample_stddev,
        });
    }
    Ok(Some(rows))
}

/// Reads `(alpha, eta, estimate)` points for a regression.
pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::config(format!("points file has no `{name}` column")))
    };
    let (a, e, y) = (col("alpha")?, col("eta")?, col("estimate")?);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |c: usize| parse_real(rec.get(c).unwrap_or(""));
        out.push((get(a)?, get(e)?, get(y)?));
    }
    Ok(out)
}

/// Regression summary for one alpha.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressRow {
    pub alpha: f64,
    pub h_t_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub finest_eta: f64,
    pub predicted_finest: f64,
    pub raw_finest: f64,
    pub fit: EtaScalingFit,
}

pub fn write_regress_csv<W: Write>(out: W, rows: &[RegressRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha",
        "h_T_hat",
        "c_hat",
        "r_squared",
        "n_points",
        "finest_eta",
        "predicted_finest",
        "raw_finest",
    ])?;
    for r in rows {
        w.write_record([
            fmt_alpha(r.alpha),
            fmt_value(r.h_t_hat),
            fmt_value(r.c_hat),
            fmt_value(r.r_squared),
            r.n_points.to_string(),
            format!("{:e}", r.finest_eta),
            fmt_value(r.predicted_finest),
            fmt_value(r.raw_finest),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
