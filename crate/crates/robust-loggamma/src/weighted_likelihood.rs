//! Pearson residuals, RAF-based robustness weights and the likelihood-type
//! estimators: maximum likelihood, fully iterated weighted likelihood (FIWL)
//! and the one-step weighted likelihood (1SWL).
//!
//! The Pearson residual compares a kernel density estimate of the data with
//! the model density smoothed by the same kernel:
//! delta(y) = f*(y)/f*_theta(y) - 1. A residual adjustment function A turns
//! it into a weight w = min(1, [A(delta)+1]+ / (delta+1)); with A(delta) =
//! delta every weight is 1 and the weighted-likelihood equations reduce to
//! plain maximum likelihood. The FIWL solves sum w(y_j, theta) z(y_j, theta)
//! = 0 by weighted Fisher scoring; the 1SWL takes a single scoring step from
//! a robust start using the model-quadrature matrix J.

use crate::control::Control;
use crate::distribution::{log_density, quantile, score, score_jacobian, Theta};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method};
use crate::linalg::solve3;
use serde::{Deserialize, Serialize};

/// RAF family selector as it appears in configuration (tau supplied apart).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RafChoice {
    Ned,
    Gkl,
    Pwd,
    Hd,
    Schi2,
}

impl RafChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            RafChoice::Ned => "ned",
            RafChoice::Gkl => "gkl",
            RafChoice::Pwd => "pwd",
            RafChoice::Hd => "hd",
            RafChoice::Schi2 => "schi2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ned" => Some(RafChoice::Ned),
            "gkl" => Some(RafChoice::Gkl),
            "pwd" => Some(RafChoice::Pwd),
            "hd" => Some(RafChoice::Hd),
            "schi2" => Some(RafChoice::Schi2),
            _ => None,
        }
    }
}

/// Residual adjustment function with its family parameter resolved.
///
/// - `Ned`: negative exponential disparity, A = 2 - (2 + d) e^(-d)
/// - `Gkl(tau)`: generalized Kullback-Leibler, A = log(tau d + 1)/tau,
///   0 <= tau <= 1 (tau -> 0 is the identity / maximum likelihood)
/// - `Pwd(tau)`: power divergence, A = tau ((d + 1)^(1/tau) - 1), tau != 0;
///   tau = 1 is maximum likelihood, tau = 2 the Hellinger distance
/// - `Hd`: Hellinger distance, identical to Pwd(2)
/// - `Schi2`: symmetric chi-squared, A = d (3d + 4)/(d + 2)^2, derived from
///   the disparity generator G(d) = d^2/(d + 2) via A = (1+d) G'(d) - G(d)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RafKind {
    Ned,
    Gkl(f64),
    Pwd(f64),
    Hd,
    Schi2,
}

impl RafKind {
    /// Pairs a family choice with its tau, validating the domain.
    pub fn from_choice(choice: RafChoice, tau: f64) -> Result<Self> {
        match choice {
            RafChoice::Ned => Ok(RafKind::Ned),
            RafChoice::Gkl => {
                if !(0.0..=1.0).contains(&tau) {
                    return Err(Error::Usage(format!(
                        "GKL requires 0 <= tau <= 1, got {tau}"
                    )));
                }
                Ok(RafKind::Gkl(tau))
            }
            RafChoice::Pwd => {
                if tau == 0.0 || !tau.is_finite() {
                    return Err(Error::Usage(format!(
                        "PWD requires finite tau != 0, got {tau}"
                    )));
                }
                Ok(RafKind::Pwd(tau))
            }
            RafChoice::Hd => Ok(RafKind::Hd),
            RafChoice::Schi2 => Ok(RafKind::Schi2),
        }
    }

    /// True when A is exactly the identity (the maximum-likelihood case).
    pub fn is_identity(&self) -> bool {
        matches!(self, RafKind::Pwd(t) if *t == 1.0) || matches!(self, RafKind::Gkl(t) if *t == 0.0)
    }
}

/// The residual adjustment A(delta). All families satisfy A(0) = 0 and
/// A'(0) = 1 (minimum-disparity standardization).
pub fn raf(kind: RafKind, delta: f64) -> Result<f64> {
    if delta < -1.0 || delta.is_nan() {
        return Err(Error::Domain(format!(
            "Pearson residual must be >= -1, got {delta}"
        )));
    }
    match kind {
        RafKind::Ned => Ok(2.0 - (2.0 + delta) * (-delta).exp()),
        RafKind::Gkl(tau) => {
            if tau == 0.0 {
                return Ok(delta);
            }
            let arg = tau * delta + 1.0;
            if arg <= 0.0 {
                return Err(Error::Domain(format!(
                    "GKL needs tau*delta + 1 > 0, got {arg}"
                )));
            }
            Ok(arg.ln() / tau)
        }
        RafKind::Pwd(tau) => Ok(tau * ((delta + 1.0).powf(1.0 / tau) - 1.0)),
        RafKind::Hd => Ok(2.0 * ((delta + 1.0).sqrt() - 1.0)),
        RafKind::Schi2 => {
            let d2 = delta + 2.0;
            Ok(delta * (3.0 * delta + 4.0) / (d2 * d2))
        }
    }
}

/// w(delta) = min(1, [A(delta) + 1]+ / (delta + 1)), with the delta -> -1
/// limit resolved by the sign of A(-1) + 1. Total on delta >= -1.
fn weight_from_delta(kind: RafKind, delta: f64) -> f64 {
    let delta = delta.max(-1.0);
    let a = match kind {
        RafKind::Gkl(tau) if tau > 0.0 && tau * delta + 1.0 <= 0.0 => f64::NEG_INFINITY,
        _ => raf(kind, delta).unwrap_or(f64::NEG_INFINITY),
    };
    let num = (a + 1.0).max(0.0);
    let denom = delta + 1.0;
    if denom <= 0.0 {
        return if num > 0.0 { 1.0 } else { 0.0 };
    }
    (num / denom).min(1.0).max(0.0)
}

/// Gaussian kernel density estimate evaluated by linear interpolation on a
/// 512-point grid spanning [min - 3h, max + 3h]; zero outside the grid.
#[derive(Debug, Clone)]
pub struct Kde {
    x0: f64,
    dx: f64,
    vals: Vec<f64>,
}

const KDE_GRID: usize = 512;
const KDE_CUT: f64 = 3.0;

/// Builds the KDE of the data with the given bandwidth (kernel std. dev.).
pub fn kde(y: &[f64], bandwidth: f64) -> Result<Kde> {
    if y.len() < 2 {
        return Err(Error::Usage("kde needs at least two observations".into()));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::Usage(format!(
            "kde bandwidth must be positive, got {bandwidth}"
        )));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in y {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let x0 = lo - KDE_CUT * bandwidth;
    let x1 = hi + KDE_CUT * bandwidth;
    let dx = (x1 - x0) / (KDE_GRID - 1) as f64;
    let norm = 1.0 / (y.len() as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
    let vals = (0..KDE_GRID)
        .map(|g| {
            let xg = x0 + g as f64 * dx;
            y.iter()
                .map(|v| {
                    let t = (xg - v) / bandwidth;
                    (-0.5 * t * t).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(Kde { x0, dx, vals })
}

impl Kde {
    /// Linear interpolation on the grid; zero outside its span.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if t < 0.0 || t > (KDE_GRID - 1) as f64 {
            return 0.0;
        }
        let i = (t as usize).min(KDE_GRID - 2);
        let frac = t - i as f64;
        self.vals[i] * (1.0 - frac) + self.vals[i + 1] * frac
    }

    /// Trapezoid integral over the grid, used by the normalization checks.
    pub fn grid_integral(&self) -> f64 {
        let inner: f64 = self.vals[1..KDE_GRID - 1].iter().sum();
        self.dx * (0.5 * (self.vals[0] + self.vals[KDE_GRID - 1]) + inner)
    }
}

/// Smoothed model density: the K-component Gaussian mixture
/// (1/K) sum_k k(y, y_k, h), y_k the model quantile of order (k - 0.5)/K.
#[derive(Debug, Clone)]
pub struct SmoothedModel {
    centers: Vec<f64>,
    bandwidth: f64,
}

pub fn smoothed_model(theta: &Theta, bandwidth: f64, k: usize) -> Result<SmoothedModel> {
    if k < 2 {
        return Err(Error::Usage("smoothed model needs K >= 2".into()));
    }
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(Error::Usage(format!(
            "smoothed model bandwidth must be positive, got {bandwidth}"
        )));
    }
    let centers = (1..=k)
        .map(|i| quantile((i as f64 - 0.5) / k as f64, theta))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SmoothedModel { centers, bandwidth })
}

impl SmoothedModel {
    pub fn eval(&self, y: f64) -> f64 {
        self.ln_eval(y).exp()
    }

    /// log of the mixture by log-sum-exp, finite even deep in the tails.
    pub fn ln_eval(&self, y: f64) -> f64 {
        let h = self.bandwidth;
        let mut max_e = f64::NEG_INFINITY;
        for c in &self.centers {
            let t = (y - c) / h;
            let e = -0.5 * t * t;
            if e > max_e {
                max_e = e;
            }
        }
        if max_e == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = self
            .centers
            .iter()
            .map(|c| {
                let t = (y - c) / h;
                (-0.5 * t * t - max_e).exp()
            })
            .sum();
        max_e + sum.ln()
            - (self.centers.len() as f64).ln()
            - h.ln()
            - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
}

/// The kernel density estimate of the data and the matching smoothed model
/// density, built with one shared bandwidth so that delta -> 0 at the model.
#[derive(Debug, Clone)]
pub struct SmoothedPair {
    pub data_density: Kde,
    pub model_density: SmoothedModel,
    pub bandwidth: f64,
}

impl SmoothedPair {
    /// Bandwidth is bw * sigma of `theta` (the adaptive choice).
    pub fn build(y: &[f64], theta: &Theta, control: &Control) -> Result<Self> {
        let h = control.bw * theta.sigma();
        Ok(SmoothedPair {
            data_density: kde(y, h)?,
            model_density: smoothed_model(theta, h, control.subdivisions)?,
            bandwidth: h,
        })
    }

    /// Pearson residual delta(t) = f*(t)/f*_theta(t) - 1, evaluated in log
    /// space so that model-density underflow saturates to +inf rather than
    /// breaking, and kde-zero regions return exactly -1.
    pub fn pearson(&self, t: f64) -> f64 {
        let fs = self.data_density.eval(t);
        if fs <= 0.0 {
            return -1.0;
        }
        let lfm = self.model_density.ln_eval(t);
        ((fs.ln() - lfm).exp() - 1.0).max(-1.0)
    }
}

/// Pearson residuals of each observation under `theta`, bandwidth bw * sigma.
pub fn pearson_residuals(y: &[f64], theta: &Theta, control: &Control) -> Result<Vec<f64>> {
    let pair = SmoothedPair::build(y, theta, control)?;
    Ok(y.iter().map(|v| pair.pearson(*v)).collect())
}

/// Robustness weights w(y_j, theta) in [0, 1]; weights below minw become 0.
pub fn wle_weights(y: &[f64], theta: &Theta, control: &Control) -> Result<Vec<f64>> {
    let kind = control.raf_kind()?;
    let pair = SmoothedPair::build(y, theta, control)?;
    Ok(weights_from_pair(y, &pair, kind, control.minw))
}

fn weights_from_pair(y: &[f64], pair: &SmoothedPair, kind: RafKind, minw: f64) -> Vec<f64> {
    y.iter()
        .map(|v| {
            let w = weight_from_delta(kind, pair.pearson(*v));
            if w < minw {
                0.0
            } else {
                w
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Newton machinery shared by ML / FIWL / 1SWL. Everything runs in
// (mu, ln sigma, lambda) coordinates so sigma stays positive by construction.
// ---------------------------------------------------------------------------

fn theta_from_internal(p: &[f64; 3]) -> Result<Theta> {
    Theta::new(p[0], p[1].exp(), p[2])
}

fn internal_from_theta(t: &Theta) -> [f64; 3] {
    [t.mu(), t.sigma().ln(), t.lambda()]
}

/// Weighted log-likelihood, score and Hessian in internal coordinates.
struct WeightedState {
    loglik: f64,
    grad: [f64; 3],
    hess: [[f64; 3]; 3],
    score_inf: f64,
}

fn weighted_state(y: &[f64], w: &[f64], theta: &Theta) -> Result<WeightedState> {
    let sigma = theta.sigma();
    let mut loglik = 0.0;
    let mut g = [0.0f64; 3];
    let mut h = [[0.0f64; 3]; 3];
    for (v, wj) in y.iter().zip(w) {
        if *wj == 0.0 {
            continue;
        }
        loglik += wj * log_density(*v, theta);
        let z = score(*v, theta)?;
        let hz = score_jacobian(*v, theta)?;
        for i in 0..3 {
            g[i] += wj * z[i];
            for j in 0..3 {
                h[i][j] += wj * hz[i][j];
            }
        }
    }
    let score_inf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // chain rule into (mu, ln sigma, lambda)
    let g_sigma = g[1];
    g[1] *= sigma;
    for j in 0..3 {
        h[1][j] *= sigma;
        h[j][1] *= sigma;
    }
    h[1][1] += sigma * g_sigma;
    Ok(WeightedState {
        loglik,
        grad: g,
        hess: h,
        score_inf,
    })
}

/// Maximizes sum w_j log f(y_j; theta) for FIXED weights by damped Newton
/// with an objective line search. Returns the final theta, iteration count
/// and the max-norm of the (original-coordinates) weighted score.
fn weighted_newton(
    y: &[f64],
    w: &[f64],
    start: &Theta,
    max_it: usize,
    gtol: f64,
) -> Result<(Theta, usize, f64, bool)> {
    let mut p = internal_from_theta(start);
    let mut theta = *start;
    let mut state = weighted_state(y, w, &theta)?;
    let mut iters = 0;
    for it in 1..=max_it {
        iters = it;
        if state.score_inf <= gtol {
            return Ok((theta, it - 1, state.score_inf, true));
        }
        // Newton direction; fall back to scaled steepest ascent if the
        // Hessian is not usable or does not give an ascent direction
        let mut dir = match solve3(&state.hess, &state.grad) {
            Ok(d) => [-d[0], -d[1], -d[2]],
            Err(_) => scaled_gradient(&state.grad),
        };
        let mut slope: f64 = dir.iter().zip(&state.grad).map(|(d, g)| d * g).sum();
        if !(slope > 0.0) || !slope.is_finite() {
            dir = scaled_gradient(&state.grad);
            slope = dir.iter().zip(&state.grad).map(|(d, g)| d * g).sum();
        }
        // cap crazy steps
        let norm = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > 5.0 {
            for d in dir.iter_mut() {
                *d *= 5.0 / norm;
            }
            slope *= 5.0 / norm;
        }

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [
                p[0] + alpha * dir[0],
                (p[1] + alpha * dir[1]).clamp(-700.0, 700.0),
                p[2] + alpha * dir[2],
            ];
            if let Ok(t_cand) = theta_from_internal(&cand) {
                if let Ok(s_cand) = weighted_state(y, w, &t_cand) {
                    if s_cand.loglik.is_finite()
                        && s_cand.loglik >= state.loglik + 1e-4 * alpha * slope
                    {
                        let delta = (0..3).fold(0.0f64, |m, k| m.max((cand[k] - p[k]).abs()));
                        p = cand;
                        theta = t_cand;
                        state = s_cand;
                        accepted = true;
                        if delta < 1e-12 {
                            return Ok((
                                theta,
                                it,
                                state.score_inf,
                                state.score_inf <= gtol * 10.0,
                            ));
                        }
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Ok((theta, it, state.score_inf, state.score_inf <= gtol * 10.0));
        }
    }
    Ok((
        theta,
        iters,
        state.score_inf,
        state.score_inf <= gtol * 10.0,
    ))
}

fn scaled_gradient(g: &[f64; 3]) -> [f64; 3] {
    let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    [g[0] / norm, g[1] / norm, g[2] / norm]
}

fn score_tolerance(n: usize, base: f64) -> f64 {
    base * (n as f64 / 500.0).max(1.0)
}

/// Maximum likelihood fit by damped Newton on (mu, ln sigma, lambda).
/// All reported weights are 1.
pub fn ml_fit(y: &[f64], start: &Theta) -> Result<FitResult> {
    if y.len() < 4 {
        return Err(Error::Usage(format!(
            "ml_fit requires n >= 4, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("data contains non-finite values".into()));
    }
    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let w = vec![1.0; y_sorted.len()];
    let gtol = score_tolerance(y_sorted.len(), 1e-8);
    let (theta, iters, score_inf, converged) = weighted_newton(&y_sorted, &w, start, 200, gtol)?;
    if !converged && score_inf > 1e-3 {
        // report the best iterate but flag the failure
        let mut fit = FitResult::new(theta, w, iters, Method::Ml, y_sorted, false);
        fit.tau = None;
        return Ok(fit);
    }
    Ok(FitResult::new(
        theta,
        w,
        iters,
        Method::Ml,
        y_sorted,
        converged,
    ))
}

/// Fully iterated weighted likelihood: weighted Fisher scoring with
/// step-halving on the weighted-score norm, weights and bandwidth recomputed
/// from the current parameters at every iteration.
pub fn fiwl_fit(y: &[f64], start: &Theta, control: &Control) -> Result<FitResult> {
    control.validate()?;
    if y.len() < 5 {
        return Err(Error::Usage(format!(
            "fiwl_fit requires n >= 5, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("data contains non-finite values".into()));
    }
    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let n = y_sorted.len();
    let gtol = score_tolerance(n, 1e-6);

    let mut theta = *start;
    let mut weights = wle_weights(&y_sorted, &theta, control)?;
    let mut converged = false;
    let mut iters = 0;
    for it in 1..=control.max_it {
        iters = it;
        let state = weighted_state(&y_sorted, &weights, &theta)?;
        if state.score_inf <= gtol {
            converged = true;
            break;
        }
        // one scoring step with the weights held fixed
        let dir = match solve3(&state.hess, &state.grad) {
            Ok(d) => [-d[0], -d[1], -d[2]],
            Err(_) => {
                return Ok(FitResult::new(
                    theta,
                    weights,
                    it,
                    Method::Wl,
                    y_sorted,
                    false,
                ));
            }
        };
        let p = internal_from_theta(&theta);
        let mut alpha = 1.0;
        let mut next = theta;
        let mut moved = false;
        for _ in 0..30 {
            let cand = [
                p[0] + alpha * dir[0],
                (p[1] + alpha * dir[1]).clamp(-700.0, 700.0),
                p[2] + alpha * dir[2],
            ];
            if let Ok(t_cand) = theta_from_internal(&cand) {
                if let Ok(s_cand) = weighted_state(&y_sorted, &weights, &t_cand) {
                    if s_cand.score_inf < state.score_inf || s_cand.score_inf <= gtol {
                        next = t_cand;
                        moved = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            return Ok(FitResult::new(
                theta,
                weights,
                it,
                Method::Wl,
                y_sorted,
                false,
            ));
        }
        let delta = (theta.mu() - next.mu())
            .abs()
            .max((theta.sigma() - next.sigma()).abs())
            .max((theta.lambda() - next.lambda()).abs());
        theta = next;
        weights = wle_weights(&y_sorted, &theta, control)?;
        if delta < control.refine_tol {
            let state = weighted_state(&y_sorted, &weights, &theta)?;
            converged = state.score_inf <= gtol * 10.0;
            break;
        }
    }
    if !converged {
        let state = weighted_state(&y_sorted, &weights, &theta)?;
        converged = state.score_inf <= gtol * 10.0;
    }
    Ok(FitResult::new(
        theta,
        weights,
        iters,
        Method::Wl,
        y_sorted,
        converged,
    ))
}

/// One-step weighted likelihood from a robust start (WQtau by convention):
/// theta_hat = theta~ - step * J^-1 (1/n) sum w(y_j, theta~) z(y_j, theta~),
/// with J = (1/K) sum_k w(y_k, theta~) grad z(y_k, theta~) over the model
/// quantiles y_k of order (k - 0.5)/K, K = nexp. The bandwidth is frozen at
/// theta~'s sigma. No iteration beyond the single step (halved only if it
/// would leave the parameter space).
pub fn oneswl_fit(y: &[f64], start: &Theta, control: &Control) -> Result<FitResult> {
    control.validate()?;
    if y.len() < 5 {
        return Err(Error::Usage(format!(
            "oneswl_fit requires n >= 5, got {}",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("data contains non-finite values".into()));
    }
    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let n = y_sorted.len();
    let kind = control.raf_kind()?;

    let pair = SmoothedPair::build(&y_sorted, start, control)?;
    let weights = weights_from_pair(&y_sorted, &pair, kind, control.minw);

    // mean weighted score at the start
    let mut g = [0.0f64; 3];
    for (v, wj) in y_sorted.iter().zip(&weights) {
        if *wj == 0.0 {
            continue;
        }
        let z = score(*v, start)?;
        for i in 0..3 {
            g[i] += wj * z[i];
        }
    }
    for v in g.iter_mut() {
        *v /= n as f64;
    }

    // J by the K-point model-quantile quadrature, weights from the same
    // frozen smoothing pair
    let k = control.nexp;
    let mut j_mat = [[0.0f64; 3]; 3];
    for i in 1..=k {
        let yk = quantile((i as f64 - 0.5) / k as f64, start)?;
        let wk = {
            let w = weight_from_delta(kind, pair.pearson(yk));
            if w < control.minw {
                0.0
            } else {
                w
            }
        };
        if wk == 0.0 {
            continue;
        }
        let hz = score_jacobian(yk, start)?;
        for r in 0..3 {
            for c in 0..3 {
                j_mat[r][c] += wk * hz[r][c];
            }
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            j_mat[r][c] /= k as f64;
        }
    }

    let dir = solve3(&j_mat, &g).map_err(|_| {
        Error::Singular(
            "one-step J matrix is singular; use the fully iterated method (WL) instead".into(),
        )
    })?;

    // theta_hat = theta~ - step * J^-1 g, halving only to stay in the domain
    let mut factor = control.step;
    let mut theta_hat = *start;
    for _ in 0..40 {
        let cand = Theta::new(
            start.mu() - factor * dir[0],
            start.sigma() - factor * dir[1],
            start.lambda() - factor * dir[2],
        );
        if let Ok(t) = cand {
            theta_hat = t;
            break;
        }
        factor *= 0.5;
    }

    // reported weights are re-evaluated at the arrival point with the frozen
    // bandwidth pair, so they describe the returned fit
    let final_pair = SmoothedPair {
        data_density: pair.data_density.clone(),
        model_density: smoothed_model(&theta_hat, pair.bandwidth, control.subdivisions)?,
        bandwidth: pair.bandwidth,
    };
    let final_weights = weights_from_pair(&y_sorted, &final_pair, kind, control.minw);

    Ok(FitResult::new(
        theta_hat,
        final_weights,
        1,
        Method::OneWl,
        y_sorted,
        true,
    ))
}

/// The quadrature J used by the one-step estimator, exposed for the
/// inference layer's diagnostics.
pub fn oneswl_information(y: &[f64], theta: &Theta, control: &Control) -> Result<[[f64; 3]; 3]> {
    let kind = control.raf_kind()?;
    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let pair = SmoothedPair::build(&y_sorted, theta, control)?;
    let k = control.nexp;
    let mut j_mat = [[0.0f64; 3]; 3];
    for i in 1..=k {
        let yk = quantile((i as f64 - 0.5) / k as f64, theta)?;
        let wk = weight_from_delta(kind, pair.pearson(yk));
        let wk = if wk < control.minw { 0.0 } else { wk };
        if wk == 0.0 {
            continue;
        }
        let hz = score_jacobian(yk, theta)?;
        for r in 0..3 {
            for c in 0..3 {
                j_mat[r][c] += wk * hz[r][c];
            }
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            j_mat[r][c] /= k as f64;
        }
    }
    Ok(j_mat)
}

/// Max-norm of the weighted score sum, used by fixed-point diagnostics.
pub fn weighted_score_inf(y: &[f64], w: &[f64], theta: &Theta) -> Result<f64> {
    let mut g = [0.0f64; 3];
    for (v, wj) in y.iter().zip(w) {
        if *wj == 0.0 {
            continue;
        }
        let z = score(*v, theta)?;
        for i in 0..3 {
            g[i] += wj * z[i];
        }
    }
    Ok(g.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
