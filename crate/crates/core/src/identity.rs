//! Deterministic check of the α = 2 identity
//! `int_R dy / sum_k exp(k y eta^2 - k^2 eta^2) = 2` for every `eta > 0`.
//!
//! Completing the square, the integrand is
//! `exp(-eta^2 y^2 / 4) / theta(y)` with `theta(y) = sum_k exp(-eta^2 (k - y/2)^2)`.
//! It is even in `y`, so we integrate over `[0, inf)` and double.

use crate::{Error, Result};

/// Terms of `theta` farther than `K` from the peak are below `exp(-eta^2 K^2)`;
/// `eta^2 K^2 >= 45` leaves a relative tail under `1e-18`.
const INNER_EXPONENT: f64 = 45.0;
const OUTER_CUTOFF: f64 = 1e-12;
const PANEL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityCheck {
    pub eta: f64,
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

fn integrand(y: f64, eta: f64, half_width: i64) -> f64 {
    let e2 = eta * eta;
    let center = 0.5 * y;
    let k0 = libm::round(center) as i64;
    let mut theta = 0.0;
    for k in (k0 - half_width)..=(k0 + half_width) {
        let d = k as f64 - center;
        theta += libm::exp(-e2 * d * d);
    }
    libm::exp(-0.25 * e2 * y * y) / theta
}

struct Simpson<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evals: usize,
}

impl Simpson<'_> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || libm::fabs(diff) <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }

    fn integrate(&mut self, a: f64, b: f64, tol: f64) -> f64 {
        let fa = self.eval(a);
        let fb = self.eval(b);
        let fm = self.eval(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        self.recurse(a, b, fa, fm, fb, whole, tol, 40)
    }
}

/// Evaluates the left-hand side for the given `eta` and compares it with 2.
pub fn identity_check(eta: f64) -> Result<IdentityCheck> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain {
            name: "eta",
            value: eta,
            expected: "eta > 0",
        });
    }
    let half_width = (libm::sqrt(INNER_EXPONENT) / eta) as i64 + 2;
    let f = |y: f64| integrand(y, eta, half_width);
    let mut simpson = Simpson { f: &f, evals: 0 };
    // theta has period 2 in y; panels of width 2 keep each piece smooth.
    let panel = 2.0;
    let mut total = crate::stats::CompensatedSum::new();
    let mut a = 0.0;
    loop {
        let b = a + panel;
        total.add(simpson.integrate(a, b, PANEL_TOL));
        if f(b) < OUTER_CUTOFF {
            break;
        }
        a = b;
    }
    let value = 2.0 * total.value();
    Ok(IdentityCheck {
        eta,
        value,
        abs_error: libm::fabs(value - 2.0),
        evaluations: simpson.evals,
    })
}
