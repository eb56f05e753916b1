//! Deterministic truncation and discretization bounds that turn a point
//! estimate of `H_alpha^eta(T)` into an interval for `H_alpha`.
//!
//! The calculus has three ingredients:
//!
//! * an auxiliary tail bound for `E[M_J / S_J^eta; E]` on a window `J`,
//!   built from the variance gap `kappa`, an explicit chaining bound
//!   `E(eta)` on the expected discretization error, a level `tau`, and
//!   `P(E)`;
//! * Borell-type bounds on the probability that the field climbs above its
//!   drift on the truncation windows `J_j = [a_j, a_{j+1})`,
//!   `a_j = T (1 + gamma)^(j-1)`;
//! * a Borell bound on the probability that the lattice maximum misses the
//!   continuous supremum by more than `epsilon`.
//!
//! The upper bound is
//! `e^eps * est + aux(J_0, tau, P(Delta_0 > eps)) + 2 sum_j aux(J_j, tau_j, P(E_j))`
//! and the lower bound is
//! `(est - aux(J_0, tau, 2 sum_j P(S_j^eta > eps eta q_j))) / (1 + eps)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, SQRT_2};

use crate::fgn::check_alpha;
use crate::{Error, Result};

/// Tuning constants of the bound calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundParams {
    /// Geometric growth of the truncation windows.
    pub gamma: f64,
    /// Decay rate of the weights `q_j = psi (1 + psi)^(-|j|) / 2`.
    pub psi: f64,
    /// Level `tau` for the terms on `J_0`.
    pub tau_base: f64,
    /// `tau_j = tau_j_base * tau_j_growth^(j-1)` on `J_j`.
    pub tau_j_base: f64,
    pub tau_j_growth: f64,
    /// Multiplies both epsilon schedules.
    pub eps_scale: f64,
    /// Hard cap on the number of window terms.
    pub j_cap: usize,
    /// Relative tolerance that ends every infinite sum.
    pub term_tol: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            gamma: 0.025,
            psi: 0.3,
            tau_base: 1.4,
            tau_j_base: 1.3,
            tau_j_growth: 1.005,
            eps_scale: 1.0,
            j_cap: 10_000,
            term_tol: 1e-16,
        }
    }
}

impl BoundParams {
    /// `epsilon` for the upper bound: `0.005 + 0.025 (2 - alpha)`.
    pub fn eps_ub(&self, alpha: f64) -> f64 {
        self.eps_scale * (0.005 + 0.025 * (2.0 - alpha))
    }

    /// `epsilon` for the lower bound: a third of [`Self::eps_ub`].
    pub fn eps_lb(&self, alpha: f64) -> f64 {
        self.eps_ub(alpha) / 3.0
    }

    pub fn tau_j(&self, j: usize) -> f64 {
        self.tau_j_base * libm::pow(self.tau_j_growth, (j - 1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, value: f64, expected: &'static str| {
            Err(Error::Domain {
                name,
                value,
                expected,
            })
        };
        if !(self.gamma > 0.0) {
            return bad("gamma", self.gamma, "gamma > 0");
        }
        if !(self.psi > 0.0) {
            return bad("psi", self.psi, "psi > 0");
        }
        if !(self.tau_base > 1.0) {
            return bad("tau", self.tau_base, "tau > 1");
        }
        if !(self.tau_j_base > 1.0 && self.tau_j_growth >= 1.0) {
            return bad("tau_j", self.tau_j_base, "tau_j_base > 1, growth >= 1");
        }
        if !(self.eps_scale > 0.0) {
            return bad("eps_scale", self.eps_scale, "eps_scale > 0");
        }
        if !(self.term_tol > 0.0 && self.term_tol < 1.0) {
            return bad("term_tol", self.term_tol, "0 < term_tol < 1");
        }
        if self.j_cap == 0 {
            return Err(Error::invalid("j_cap must be positive"));
        }
        Ok(())
    }
}

/// The truncation windows `a_j = T (1 + gamma)^(j-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSeq {
    pub horizon: f64,
    pub gamma: f64,
}

impl WindowSeq {
    pub fn new(horizon: f64, gamma: f64) -> Self {
        Self { horizon, gamma }
    }

    /// `a_j` for `j >= 1`.
    pub fn a(&self, j: usize) -> f64 {
        self.horizon * libm::pow(1.0 + self.gamma, (j - 1) as f64)
    }

    /// `J_j = [a_j, a_{j+1})`.
    pub fn window(&self, j: usize) -> (f64, f64) {
        let a = self.a(j);
        (a, a * (1.0 + self.gamma))
    }

    /// `|J_j| = gamma * a_j`.
    pub fn len(&self, j: usize) -> f64 {
        self.gamma * self.a(j)
    }
}

/// Standard Gaussian upper tail `Q(x) = P(N > x)`.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Variance gap `sup_{t in J} (Var Z_t - Var Z_t^eta)` for a window whose
/// largest `|t|` is `t_max`, bounded by `2 max(eta^a, t_max^a - (t_max - eta)^a)`.
pub fn kappa_window(t_max: f64, alpha: f64, eta: f64) -> f64 {
    let edge = if t_max > eta {
        libm::pow(t_max, alpha) - libm::pow(t_max - eta, alpha)
    } else {
        libm::pow(t_max, alpha)
    };
    2.0 * libm::pow(eta, alpha).max(edge)
}

/// Chaining bound `E(eta)` on `E[sqrt(2) sup_J (B_t - B_t^eta)]` for a window
/// of length `window_len`:
///
/// `sqrt(2 pi / log 2) * sum_{j>=2} 2^(3/2) r^(1-j) sqrt(log(2^(j+1) N_j^2))`
/// with `r = 1 / (2 eta^(alpha/2))` and `N_j = |J| r^(j/H)`, `H = alpha/2`.
pub fn entropy_bound(window_len: f64, alpha: f64, eta: f64, term_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let log_r = -LN_2 - 0.5 * alpha * libm::log(eta);
    if !(log_r > 0.0) {
        return Err(Error::precondition(
            "entropy bound",
            format!("mesh too coarse for entropy bound: eta^(alpha/2) = {} >= 1/2", libm::exp(-log_r - LN_2)),
        ));
    }
    if !(window_len > 0.0) {
        return Err(Error::Domain {
            name: "window length",
            value: window_len,
            expected: "|J| > 0",
        });
    }
    let hurst = 0.5 * alpha;
    let log_len = libm::log(window_len);
    let mut total = 0.0;
    for j in 2..100_000usize {
        let jf = j as f64;
        let log_n = log_len + jf / hurst * log_r;
        let inner = (jf + 1.0) * LN_2 + 2.0 * log_n;
        if inner <= 0.0 {
            return Err(Error::precondition(
                "entropy bound",
                format!("log(2^(j+1) N_j^2) = {inner} is not positive at j = {j}"),
            ));
        }
        let term = 2.0 * SQRT_2 * libm::exp(-(jf - 1.0) * log_r) * libm::sqrt(inner);
        total += term;
        if term < term_tol * total {
            return Ok(libm::sqrt(2.0 * PI / LN_2) * total);
        }
    }
    Err(Error::Numerical("entropy series did not converge".to_string()))
}

/// Event-independent pieces of the auxiliary bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuxTerms {
    pub kappa: f64,
    pub entropy: f64,
    /// `(1/eta) int_tau^inf exp(-(log y - m)^2 / (4 eta^a)) dy`.
    pub integral_term: f64,
    /// `(tau/eta) exp(-(log tau - m)^2 / (4 eta^a))`.
    pub point_term: f64,
}

impl AuxTerms {
    /// Full auxiliary bound `integral + point + (tau/eta) P(E)`.
    pub fn with_event(&self, tau: f64, eta: f64, p_event: f64) -> f64 {
        self.integral_term + self.point_term + tau / eta * p_event
    }
}

/// Evaluates the two event-independent terms with `m = kappa + entropy`.
///
/// The integral is done in closed form: with `u = log y` and
/// `sigma^2 = 2 eta^alpha` it equals
/// `(1/eta) sigma sqrt(2 pi) e^(m + sigma^2/2) Q((log tau - m - sigma^2) / sigma)`.
pub fn aux_tail_terms(eta: f64, alpha: f64, kappa: f64, entropy: f64, tau: f64) -> Result<AuxTerms> {
    let m = kappa + entropy;
    let floor = libm::exp(m);
    if !(tau > floor) {
        return Err(Error::precondition(
            "auxiliary bound",
            format!("tau = {tau} must exceed exp(E + kappa) = {floor:.6}"),
        ));
    }
    let var = 2.0 * libm::pow(eta, alpha);
    let sigma = libm::sqrt(var);
    let gap = libm::log(tau) - m;
    let point_term = tau / eta * libm::exp(-gap * gap / (2.0 * var));
    let integral_term = libm::exp(m + 0.5 * var) * gaussian_tail((gap - var) / sigma)
        * sigma
        * libm::sqrt(2.0 * PI)
        / eta;
    Ok(AuxTerms {
        kappa,
        entropy,
        integral_term,
        point_term,
    })
}

/// Borell bound on `P(E_j)`, the probability that `sqrt(2) B` exceeds the
/// drift somewhere on `J_j`:
/// `exp(-(a_j^(a/2) - sqrt(2) gamma^(a/2))^2 / (4 (1 + gamma)^a))`.
pub fn p_truncation_event(j: usize, alpha: f64, horizon: f64, gamma: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if j == 0 {
        return Err(Error::invalid("truncation windows start at j = 1"));
    }
    if !(horizon > gamma * libm::pow(2.0, 1.0 / alpha)) {
        return Err(Error::precondition(
            format!("truncation window {j}"),
            format!("T too small for truncation bound: need T > gamma 2^(1/alpha)"),
        ));
    }
    let aj = WindowSeq::new(horizon, gamma).a(j);
    let gap = libm::pow(aj, 0.5 * alpha) - SQRT_2 * libm::pow(gamma, 0.5 * alpha);
    if !(gap > 0.0) {
        return Err(Error::precondition(
            format!("truncation window {j}"),
            "T too small for truncation bound: a_j^(alpha/2) <= sqrt(2) gamma^(alpha/2)",
        ));
    }
    Ok(libm::exp(-gap * gap / (4.0 * libm::pow(1.0 + gamma, alpha))))
}

/// Discretization floor `kappa_0 = max(eta^a, T^a - (T - eta)^a)`.
pub fn kappa_zero(alpha: f64, horizon: f64, eta: f64) -> f64 {
    libm::pow(eta, alpha).max(libm::pow(horizon, alpha) - libm::pow(horizon - eta, alpha))
}

/// Bound on `P(Delta_0(eta) > eps)`:
/// `(2T/eta) exp(-[(eps - kappa_0) / (sqrt(2) eta^(a/2)) - 1]^2 / 2)`, clipped to 1.
pub fn p_discretization_event(eps: f64, alpha: f64, horizon: f64, eta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let k0 = kappa_zero(alpha, horizon, eta);
    if !(eps > k0) {
        return Err(Error::precondition(
            "discretization event",
            format!("epsilon {eps} below discretization floor kappa_0 = {k0:e}"),
        ));
    }
    let x = (eps - k0) / (SQRT_2 * libm::pow(eta, 0.5 * alpha));
    if !(x > 1.0) {
        return Err(Error::precondition(
            "discretization event",
            format!("(eps - kappa_0) / (sqrt(2) eta^(alpha/2)) = {x} must exceed 1"),
        ));
    }
    let p = 2.0 * horizon / eta * libm::exp(-0.5 * (x - 1.0) * (x - 1.0));
    Ok(p.min(1.0))
}

/// A named contribution to one side of an interval.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

/// Outcome of one precondition check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreconditionCheck {
    pub term: String,
    pub ok: bool,
    pub detail: Option<String>,
}

/// One side of an interval with its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSide {
    pub value: f64,
    pub epsilon: f64,
    pub breakdown: Vec<BoundTerm>,
    /// Number of window terms summed before the series was cut.
    pub windows_used: usize,
}

fn term(name: &str, value: f64) -> BoundTerm {
    BoundTerm {
        name: name.to_string(),
        value,
    }
}

fn check_inputs(estimate: f64, alpha: f64, horizon: f64, eta: f64, params: &BoundParams) -> Result<()> {
    check_alpha(alpha)?;
    params.validate()?;
    if !(estimate.is_finite() && estimate >= 0.0) {
        return Err(Error::Domain {
            name: "estimate",
            value: estimate,
            expected: "finite and >= 0",
        });
    }
    if !(horizon > 0.0 && eta > 0.0 && eta < horizon) {
        return Err(Error::invalid(format!(
            "need 0 < eta < T, got eta = {eta}, T = {horizon}"
        )));
    }
    Ok(())
}

fn central_aux(alpha: f64, horizon: f64, eta: f64, params: &BoundParams) -> Result<AuxTerms> {
    let kappa = kappa_window(horizon, alpha, eta);
    let entropy = entropy_bound(2.0 * horizon, alpha, eta, params.term_tol)
        .map_err(|e| relabel(e, "J_0"))?;
    aux_tail_terms(eta, alpha, kappa, entropy, params.tau_base).map_err(|e| relabel(e, "J_0"))
}

fn relabel(err: Error, window: &str) -> Error {
    match err {
        Error::Precondition { term, detail } => Error::Precondition {
            term: format!("{term} on {window}"),
            detail,
        },
        other => other,
    }
}

/// Upper bound on `H_alpha`:
/// `e^eps est + disc + 2 sum_{j>=1} trunc_j` with `eps = params.eps_ub(alpha)`.
pub fn upper_bound(
    estimate: f64,
    alpha: f64,
    horizon: f64,
    eta: f64,
    params: &BoundParams,
) -> Result<BoundSide> {
    check_inputs(estimate, alpha, horizon, eta, params)?;
    let eps = params.eps_ub(alpha);
    let main = libm::exp(eps) * estimate;

    let central = central_aux(alpha, horizon, eta, params)?;
    let p_disc = p_discretization_event(eps, alpha, horizon, eta)?;
    let disc = central.with_event(params.tau_base, eta, p_disc);

    let windows = WindowSeq::new(horizon, params.gamma);
    let mut trunc = crate::stats::CompensatedSum::new();
    let mut used = 0;
    loop {
        let j = used + 1;
        if j > params.j_cap {
            return Err(Error::precondition(
                "truncation sum",
                format!("did not reach relative tolerance within {} windows", params.j_cap),
            ));
        }
        let label = format!("J_{j}");
        let (_, hi) = windows.window(j);
        let kappa = kappa_window(hi, alpha, eta);
        let entropy = entropy_bound(windows.len(j), alpha, eta, params.term_tol)
            .map_err(|e| relabel(e, &label))?;
        let tau = params.tau_j(j);
        let aux = aux_tail_terms(eta, alpha, kappa, entropy, tau).map_err(|e| relabel(e, &label))?;
        let p = p_truncation_event(j, alpha, horizon, params.gamma)?;
        let t = aux.with_event(tau, eta, p);
        trunc.add(t);
        used = j;
        let running = main + disc + 2.0 * trunc.value();
        if t == 0.0 || t < params.term_tol * running {
            break;
        }
    }
    let trunc_sum = 2.0 * trunc.value();
    Ok(BoundSide {
        value: main + disc + trunc_sum,
        epsilon: eps,
        breakdown: alloc::vec![
            term("ub_main", main),
            term("ub_disc", disc),
            term("ub_trunc_sum", trunc_sum),
        ],
        windows_used: used,
    })
}

/// Borell bound on `P(S_j^eta > eps eta q_j)` for `j >= 1`, or the formal
/// value when its argument is nonpositive (the caller decides whether that
/// is acceptable).
fn lower_window_bound(j: usize, eps: f64, alpha: f64, horizon: f64, eta: f64, params: &BoundParams) -> (f64, f64) {
    let windows = WindowSeq::new(horizon, params.gamma);
    let aj = windows.a(j);
    let log_q = libm::log(0.5 * params.psi) - (j as f64) * libm::log1p(params.psi);
    let arg = libm::log(eps * eta / (params.gamma * aj)) + log_q + libm::pow(aj, alpha)
        - SQRT_2 * libm::pow(params.gamma, 0.5 * alpha) * libm::pow(aj, 0.5 * alpha);
    let denom = 4.0 * libm::pow(1.0 + params.gamma, alpha) * libm::pow(aj, alpha);
    (arg, libm::exp(-arg * arg / denom))
}

/// Lower bound on `H_alpha`:
/// `(est - aux(J_0, tau, P(E))) / (1 + eps)` with `eps = params.eps_lb(alpha)` and
/// `P(E) <= 2 sum_{j>=1} P(S_j^eta > eps eta q_j)`.
pub fn lower_bound(
    estimate: f64,
    alpha: f64,
    horizon: f64,
    eta: f64,
    params: &BoundParams,
) -> Result<BoundSide> {
    check_inputs(estimate, alpha, horizon, eta, params)?;
    let eps = params.eps_lb(alpha);
    let main = estimate / (1.0 + eps);

    let mut p_sum = crate::stats::CompensatedSum::new();
    let mut used = 0;
    loop {
        let j = used + 1;
        if j > params.j_cap {
            return Err(Error::precondition(
                "lower-bound event sum",
                format!("did not reach relative tolerance within {} windows", params.j_cap),
            ));
        }
        let (arg, bound) = lower_window_bound(j, eps, alpha, horizon, eta, params);
        if !(arg > 0.0) && bound > params.term_tol {
            return Err(Error::precondition(
                format!("window sum term J_{j}"),
                format!("T too small: Borell argument {arg:.4} is not positive"),
            ));
        }
        p_sum.add(bound);
        used = j;
        if bound == 0.0 || bound < params.term_tol * p_sum.value() {
            break;
        }
    }
    let p_event = (2.0 * p_sum.value()).min(1.0);
    let central = central_aux(alpha, horizon, eta, params)?;
    let correction = central.with_event(params.tau_base, eta, p_event) / (1.0 + eps);
    Ok(BoundSide {
        value: main - correction,
        epsilon: eps,
        breakdown: alloc::vec![term("lb_main", main), term("lb_correction", correction)],
        windows_used: used,
    })
}

/// Interval estimate for `H_alpha` from a point estimate of `H_alpha^eta(T)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalReport {
    pub alpha: f64,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub horizon: f64,
    pub eta: f64,
    pub estimate: f64,
    pub lb: Option<f64>,
    pub ub: Option<f64>,
    pub eps_lb: f64,
    pub eps_ub: f64,
    pub breakdown: Vec<BoundTerm>,
    pub preconditions: Vec<PreconditionCheck>,
}

impl IntervalReport {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.breakdown.iter().find(|t| t.name == name).map(|t| t.value)
    }

    pub fn preconditions_ok(&self) -> bool {
        self.preconditions.iter().all(|p| p.ok)
    }
}

/// Both sides at once. Fails only when neither side can be computed; a
/// single failing side is reported as `None` with its reason in
/// `preconditions`.
pub fn interval(
    estimate: f64,
    alpha: f64,
    horizon: f64,
    eta: f64,
    params: &BoundParams,
) -> Result<IntervalReport> {
    let upper = upper_bound(estimate, alpha, horizon, eta, params);
    let lower = lower_bound(estimate, alpha, horizon, eta, params);
    let check = |name: &str, r: &Result<BoundSide>| PreconditionCheck {
        term: name.to_string(),
        ok: r.is_ok(),
        detail: r.as_ref().err().map(|e| e.to_string()),
    };
    let preconditions = alloc::vec![check("upper_bound", &upper), check("lower_bound", &lower)];
    match (&upper, &lower) {
        (Err(e), Err(_)) => return Err(e.clone()),
        _ => {}
    }
    let mut breakdown = Vec::new();
    if let Ok(u) = &upper {
        breakdown.extend(u.breakdown.iter().cloned());
    }
    if let Ok(l) = &lower {
        breakdown.extend(l.breakdown.iter().cloned());
    }
    Ok(IntervalReport {
        alpha,
        horizon,
        eta,
        estimate,
        lb: lower.as_ref().ok().map(|s| s.value),
        ub: upper.as_ref().ok().map(|s| s.value),
        eps_lb: params.eps_lb(alpha),
        eps_ub: params.eps_ub(alpha),
        breakdown,
        preconditions,
    })
}
