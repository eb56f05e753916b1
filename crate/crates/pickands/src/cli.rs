//! Command-line interface.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pickands_core::bounds::BoundParams;
use pickands_core::estimator::EstimatorConfig;
use pickands_core::fgn::{build_two_sided_fbm, sample_unit_fgn};
use pickands_core::identity::identity_check;
use pickands_core::pathfun::z_from_fbm;
use pickands_core::regress::{fit_eta_scaling_with, predict, FitMode};
use pickands_core::{GridSpec, SeedVector};

use crate::driver::{estimate_albin, estimate_eta_sweep, estimate_ratio, SweepMode};
use crate::error::{CliError, ExitStatus};
use crate::table::{self, BoundsRow, EstimateInput, RegressRow};
use crate::cache;

pub const DEFAULT_SEED: u64 = 20_180_128;

#[derive(Debug, Parser)]
#[command(name = "pickands", version, about = "Estimate Pickands' constants of fractional Brownian motion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimates of H_alpha^eta(T) per alpha.
    Estimate(EstimateArgs),
    /// Lower and upper bounds on H_alpha from an estimates table.
    Bounds(BoundsArgs),
    /// Extrapolate to eta -> 0 by regressing on eta^(alpha/2).
    Regress(RegressArgs),
    /// Check the alpha = 2 integral identity by quadrature.
    IdentityCheck(IdentityArgs),
    /// Dump simulated fBm paths and the drifted process Z.
    FgnDump(DumpArgs),
    /// Estimates followed by bounds, in one table.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Method {
    /// Mean of sup / integral over the window.
    #[default]
    Ratio,
    /// Probability that the lattice supremum sits at the origin.
    Albin,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Comma list or start:step:end range.
    #[arg(long, visible_alias = "alpha", default_value = "0.70:0.05:2.00")]
    pub alphas: String,
    /// Half-width of the simulation window [-T, T].
    #[arg(long = "T", default_value = "32")]
    pub horizon: String,
    /// Lattice mesh; accepts forms like 2^-10 or 1/8.
    #[arg(long, default_value = "2^-10")]
    pub eta: String,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "PICKANDS_WORKERS")]
    pub workers: Option<usize>,
}

impl SimArgs {
    pub fn config(&self) -> Result<EstimatorConfig, CliError> {
        let alphas = table::parse_list(&self.alphas)?;
        let workers = match self.workers {
            Some(w) => w,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        let config = EstimatorConfig {
            alphas,
            horizon: table::parse_real(&self.horizon)?,
            eta: table::parse_real(&self.eta)?,
            reps: self.reps,
            master_seed: self.seed,
            workers,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub psi: Option<f64>,
    /// Level tau on the central window.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Multiplier for both epsilon schedules.
    #[arg(long)]
    pub eps_scale: Option<f64>,
}

impl BoundArgs {
    pub fn params(&self) -> Result<BoundParams, CliError> {
        let mut p = BoundParams::default();
        if let Some(v) = self.gamma {
            p.gamma = v;
        }
        if let Some(v) = self.psi {
            p.psi = v;
        }
        if let Some(v) = self.tau {
            p.tau_base = v;
        }
        if let Some(v) = self.eps_scale {
            p.eps_scale = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum, default_value_t = Method::Ratio)]
    pub method: Method,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Estimates CSV with `alpha` and `estimate` columns; `-` for stdin.
    pub input: PathBuf,
    #[arg(long = "T", default_value = "128")]
    pub horizon: String,
    #[arg(long, default_value = "2^-18")]
    pub eta: String,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RegressArgs {
    #[arg(long, visible_alias = "alpha", default_value = "1")]
    pub alphas: String,
    #[arg(long = "T", default_value = "32")]
    pub horizon: String,
    /// Meshes to regress over; the smallest is simulated.
    #[arg(long, default_value = "2^-10,2^-9,2^-8,2^-7")]
    pub etas: String,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, env = "PICKANDS_WORKERS")]
    pub workers: Option<usize>,
    /// Simulate each mesh independently instead of subsampling one trace.
    #[arg(long)]
    pub independent: bool,
    /// Fit `(alpha, eta, estimate)` points from a CSV instead of simulating.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value = "0.25,0.5,1")]
    pub eta: String,
    /// Largest accepted |value - 2|; exceeding it exits with status 3.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[arg(long = "T", default_value = "4")]
    pub horizon: String,
    #[arg(long, default_value = "2^-4")]
    pub eta: String,
    /// Number of paths.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `args` and runs the command, printing errors to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Config.into() } else { ExitStatus::Success.into() };
        }
    };
    match run(&cli) {
        Ok(()) => ExitStatus::Success.into(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status().into()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Regress(a) => cmd_regress(a),
        Command::IdentityCheck(a) => cmd_identity_check(a),
        Command::FgnDump(a) => cmd_fgn_dump(a),
        Command::Table(a) => cmd_table(a),
    }
}

fn open_output(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &out.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<T: Serialize + ?Sized>(
    out: &OutputArgs,
    value: &T,
    csv: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut w = open_output(out)?;
    match out.format {
        Format::Csv => csv(&mut w)?,
        Format::Json => table::write_json(&mut w, value)?,
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let config = a.sim.config()?;
    let rows = match a.method {
        Method::Ratio => estimate_ratio(&config)?,
        Method::Albin => estimate_albin(&config)?,
    };
    emit(&a.output, &rows, |w| table::write_estimates_csv(w, &rows))
}

fn read_input(path: &PathBuf) -> Result<Box<dyn Read>, CliError> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin().lock()))
    } else {
        File::open(path)
            .map(|f| Box::new(f) as Box<dyn Read>)
            .map_err(|e| CliError::config(format!("cannot open {}: {e}", path.display())))
    }
}

fn bounds_rows(
    inputs: &[EstimateInput],
    horizon: f64,
    eta: f64,
    params: &BoundParams,
) -> Result<Vec<BoundsRow>, CliError> {
    inputs
        .iter()
        .map(|r| BoundsRow::compute(r.alpha, r.estimate, r.sample_stddev, horizon, eta, params))
        .collect()
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<(), CliError> {
    let horizon = table::parse_real(&a.horizon)?;
    let eta = table::parse_real(&a.eta)?;
    GridSpec::new(1.0, horizon, eta)?;
    let params = a.bounds.params()?;
    let Some(inputs) = table::read_estimates_csv(read_input(&a.input)?)? else {
        // Nothing in, nothing out.
        let mut w = open_output(&a.output)?;
        w.flush()?;
        return Ok(());
    };
    let rows = bounds_rows(&inputs, horizon, eta, &params)?;
    emit(&a.output, &rows, |w| table::write_bounds_csv(w, &rows))
}

pub fn cmd_table(a: &TableArgs) -> Result<(), CliError> {
    let config = a.sim.config()?;
    let params = a.bounds.params()?;
    let est = estimate_ratio(&config)?;
    let inputs: Vec<EstimateInput> = est
        .iter()
        .map(|r| EstimateInput {
            alpha: r.alpha,
            estimate: r.mean,
            sample_stddev: r.sample_stddev,
        })
        .collect();
    let rows = bounds_rows(&inputs, config.horizon, config.eta, &params)?;
    emit(&a.output, &rows, |w| table::write_bounds_csv(w, &rows))
}

fn regress_row(alpha: f64, points: &[(f64, f64)], mode: FitMode) -> Result<RegressRow, CliError> {
    let fit = fit_eta_scaling_with(points, alpha, mode)?;
    let &(finest_eta, raw_finest) = points
        .iter()
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .expect("fit succeeded on a non-empty set");
    Ok(RegressRow {
        alpha,
        h_t_hat: fit.h_t_hat,
        c_hat: fit.c_hat,
        r_squared: fit.r_squared,
        n_points: fit.n_points,
        finest_eta,
        predicted_finest: predict(&fit, finest_eta),
        raw_finest,
        fit,
    })
}

pub fn cmd_regress(a: &RegressArgs) -> Result<(), CliError> {
    let mode = if a.independent { FitMode::Independent } else { FitMode::SameTrace };
    let rows = match &a.points {
        Some(path) => {
            let points = table::read_points_csv(read_input(path)?)?;
            let mut alphas: Vec<f64> = Vec::new();
            for &(al, _, _) in &points {
                if !alphas.contains(&al) {
                    alphas.push(al);
                }
            }
            alphas
                .iter()
                .map(|&al| {
                    let pts: Vec<(f64, f64)> =
                        points.iter().filter(|p| p.0 == al).map(|&(_, e, y)| (e, y)).collect();
                    regress_row(al, &pts, mode)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        None => {
            let etas = table::parse_list(&a.etas)?;
            if etas.len() < 2 {
                return Err(CliError::config("regression needs at least two values in --etas"));
            }
            let finest = etas.iter().cloned().fold(f64::INFINITY, f64::min);
            let sim = SimArgs {
                alphas: a.alphas.clone(),
                horizon: a.horizon.clone(),
                eta: finest.to_string(),
                reps: a.reps,
                seed: a.seed,
                workers: a.workers,
            };
            let config = sim.config()?;
            let sweep_mode = if a.independent { SweepMode::Independent } else { SweepMode::SameTrace };
            let matrix = estimate_eta_sweep(&config, &etas, sweep_mode)?;
            config
                .alphas
                .iter()
                .zip(&matrix)
                .map(|(&al, row)| {
                    let pts: Vec<(f64, f64)> = etas.iter().zip(row).map(|(&e, r)| (e, r.mean)).collect();
                    regress_row(al, &pts, mode)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    emit(&a.output, &rows, |w| table::write_regress_csv(w, &rows))
}

pub fn cmd_identity_check(a: &IdentityArgs) -> Result<(), CliError> {
    let etas = table::parse_list(&a.eta)?;
    let checks = etas
        .iter()
        .map(|&e| identity_check(e))
        .collect::<Result<Vec<_>, _>>()?;
    emit(&a.output, &checks, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["eta", "value", "abs_error"])?;
        for ch in &checks {
            c.write_record([ch.eta.to_string(), format!("{:.12}", ch.value), format!("{:e}", ch.abs_error)])?;
        }
        c.flush()?;
        Ok(())
    })?;
    match checks.iter().find(|c| !(c.abs_error <= a.tol)) {
        Some(c) => Err(CliError::Numerical(format!(
            "identity off by {:e} at eta = {} (tolerance {:e})",
            c.abs_error, c.eta, a.tol
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct DumpedPath {
    rep: usize,
    t: Vec<f64>,
    b: Vec<f64>,
    z: Vec<f64>,
}

pub fn cmd_fgn_dump(a: &DumpArgs) -> Result<(), CliError> {
    let grid = GridSpec::new(
        table::parse_real(&a.alpha)?,
        table::parse_real(&a.horizon)?,
        table::parse_real(&a.eta)?,
    )?;
    let spectrum = cache::spectrum(grid.alpha, grid.n_steps)?;
    let mut paths = Vec::with_capacity(a.count);
    for rep in 0..a.count {
        let seeds = SeedVector::derive(a.seed, rep as u64, grid.n_steps);
        let path = build_two_sided_fbm(&sample_unit_fgn(&spectrum, &seeds)?, &grid)?;
        let z = z_from_fbm(&path);
        paths.push(DumpedPath {
            rep,
            t: path.times().collect(),
            b: path.values,
            z: z.z_values,
        });
    }
    emit(&a.output, &paths, |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["rep", "t", "B_t", "Z_t"])?;
        for p in &paths {
            for k in 0..p.t.len() {
                c.write_record([p.rep.to_string(), p.t[k].to_string(), p.b[k].to_string(), p.z[k].to_string()])?;
            }
        }
        c.flush()?;
        Ok(())
    })
}
