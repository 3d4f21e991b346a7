//! Tukey biweight rho/psi, the M-scale and the tau-scale.
//!
//! The rho function is normalized to sup rho = 1:
//!
//! ```text
//! rho(u, c) = 3(u/c)^2 - 3(u/c)^4 + (u/c)^6   for |u| <= c,   1 otherwise
//! ```
//!
//! An M-scale s solves (1/n) sum rho(u_j / s) = b; the tau-scale combines an
//! M-scale s1 (tuning c1) with a second, flatter rho (tuning c2 >= c1):
//! tau^2 = s1^2 * (1/n) sum rho2(u_j / s1). With b = 0.5 and the default
//! pair c1 = 1.548, c2 = 6.08 this yields 50% breakdown and 95% normal
//! efficiency for the regression estimators built on top.

use crate::error::{Error, Result};

/// Tuning constants for the tau-scale pair.
#[derive(Debug, Clone, Copy)]
pub struct RhoParams {
    c1: f64,
    c2: f64,
    b: f64,
}

impl Default for RhoParams {
    fn default() -> Self {
        RhoParams {
            c1: 1.548,
            c2: 6.08,
            b: 0.5,
        }
    }
}

impl RhoParams {
    /// c2 >= c1 enforces rho2 <= rho1 pointwise; b must lie in (0, 1).
    pub fn new(c1: f64, c2: f64, b: f64) -> Result<Self> {
        if !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho tuning constants must be positive: c1={c1}, c2={c2}"
            )));
        }
        if c2 < c1 {
            return Err(Error::InvalidParameter(format!(
                "c2 must be >= c1 so that rho2 <= rho1 pointwise: c1={c1}, c2={c2}"
            )));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "M-scale target b must lie in (0,1), got {b}"
            )));
        }
        Ok(RhoParams { c1, c2, b })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Tukey biweight rho, normalized to 1 at |u| >= c.
pub fn rho(u: f64, c: f64) -> f64 {
    let x = u / c;
    if x.abs() >= 1.0 {
        return 1.0;
    }
    let x2 = x * x;
    x2 * (3.0 + x2 * (x2 - 3.0))
}

/// psi = d rho / du: (6u/c^2)(1 - (u/c)^2)^2 inside the window, 0 outside.
pub fn psi(u: f64, c: f64) -> f64 {
    let x = u / c;
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let t = 1.0 - x * x;
    6.0 * u / (c * c) * t * t
}

/// M-scale solution with a degeneracy flag.
#[derive(Debug, Clone, Copy)]
pub struct MScale {
    pub value: f64,
    /// Set when fewer than the breakdown-required number of inputs are
    /// nonzero and the exact solution collapses to 0.
    pub degenerate: bool,
}

const M_SCALE_REL_TOL: f64 = 1e-10;

/// Solves (1/n) sum rho(u_j / s) = b for s > 0.
///
/// The left side is strictly decreasing in s wherever it is not flat, so a
/// bracketing bisection is globally safe; a Newton polish sharpens the root.
/// When at most ceil(n b) of the inputs are nonzero the equation has no
/// positive root and the scale is exactly 0 (breakdown).
pub fn m_scale(u: &[f64], c: f64, b: f64) -> MScale {
    assert!(!u.is_empty(), "m_scale requires at least one residual");
    let n = u.len() as f64;
    let nonzero = u.iter().filter(|v| **v != 0.0 && v.is_finite()).count() as f64;
    // as s -> 0+ the average tends to nonzero/n; a root needs that limit > b
    if nonzero / n <= b {
        return MScale {
            value: 0.0,
            degenerate: true,
        };
    }

    let mut abs: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = abs[abs.len() / 2].max(abs[abs.len() - 1] / 1e12);

    let avg = |s: f64| u.iter().map(|v| rho(v / s, c)).sum::<f64>() / n - b;

    // bracket around the median-based start
    let mut lo = (med / c).max(f64::MIN_POSITIVE);
    let mut hi = abs[abs.len() - 1] * c;
    for _ in 0..200 {
        if avg(lo) > 0.0 {
            break;
        }
        lo /= 8.0;
    }
    for _ in 0..200 {
        if avg(hi) < 0.0 {
            break;
        }
        hi *= 8.0;
    }

    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = avg(s);
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        // Newton step using d/ds avg = -(1/n) sum psi(u/s) u / s^2
        let dfds = -u.iter().map(|v| psi(v / s, c) * v).sum::<f64>() / (n * s * s);
        let mut next = if dfds != 0.0 {
            s - f / dfds
        } else {
            0.5 * (lo + hi)
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= M_SCALE_REL_TOL * s {
            return MScale {
                value: next,
                degenerate: false,
            };
        }
        s = next;
    }
    MScale {
        value: s,
        degenerate: false,
    }
}

/// Tau-scale built on the params' (c1, c2, b) pair.
pub fn tau_scale(u: &[f64], params: &RhoParams) -> MScale {
    tau_scale_with(u, params, |v| rho(v, params.c2))
}

/// Tau-scale with an arbitrary rho2; the quadratic rho2 hook makes
/// tau^2 = ave(u^2) exactly, which the tests exploit. Not public API.
pub(crate) fn tau_scale_with<F: Fn(f64) -> f64>(u: &[f64], params: &RhoParams, rho2: F) -> MScale {
    let s1 = m_scale(u, params.c1, params.b);
    if s1.degenerate || s1.value == 0.0 {
        return s1;
    }
    let n = u.len() as f64;
    let mean_rho2 = u.iter().map(|v| rho2(v / s1.value)).sum::<f64>() / n;
    MScale {
        value: s1.value * mean_rho2.sqrt(),
        degenerate: false,
    }
}
