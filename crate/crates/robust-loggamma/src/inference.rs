//! Standard errors, confidence intervals, the weighted Wald test and the
//! weighted Wilks test of the loggamma submodel sigma = lambda.
//!
//! The covariance estimate behind every interval is the inverse of the
//! empirical weighted information J_n = -sum w_j grad z(y_j; theta_hat),
//! the natural companion of the one-step estimator's J. Intervals for the
//! derived functionals (eta and model quantiles) use the delta method.

use crate::control::Control;
use crate::distribution::{
    log_density, mean_exp, quantile, quantile_std, score, score_jacobian, Theta,
};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method};
use crate::linalg::{inv3, solve2_sym, solve3, sym3_eigenvalues};
use crate::special::{gamma_q, normal_quantile};
use crate::weighted_likelihood::{oneswl_information, wle_weights};
use serde::{Deserialize, Serialize};

/// Confidence interval for one model quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileCi {
    pub p: f64,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Wald-type summary of a fit: standard errors and confidence intervals for
/// the parameters, eta and requested model quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub theta: Theta,
    pub se: [f64; 3],
    pub param_cis: [(f64, f64); 3],
    pub eta: Option<f64>,
    pub eta_se: Option<f64>,
    pub eta_ci: Option<(f64, f64)>,
    pub cov: [[f64; 3]; 3],
    pub quantile_cis: Vec<QuantileCi>,
    pub conf_level: f64,
}

/// Outcome of a Wald or Wilks test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Present for single-restriction Wald tests only.
    pub conf_int: Option<(f64, f64)>,
    /// Null-constrained estimates where the test produces them.
    pub null_theta: Option<Theta>,
}

/// Null hypothesis for the weighted Wald test: any nonempty subset of the
/// parameters pinned to given values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
}

impl NullSpec {
    fn restrictions(&self) -> Vec<(usize, f64)> {
        let mut r = Vec::new();
        if let Some(v) = self.mu {
            r.push((0, v));
        }
        if let Some(v) = self.sigma {
            r.push((1, v));
        }
        if let Some(v) = self.lambda {
            r.push((2, v));
        }
        r
    }
}

/// Which fit supplies the weights of the weighted Wilks statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WilksWeights {
    #[default]
    Unconstrained,
    Constrained,
}

/// Chi-squared upper tail with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// The empirical weighted information J_n = -sum w_j grad z(y_j; theta) and
/// its inverse (the covariance estimate).
fn weighted_information(fit: &FitResult) -> Result<([[f64; 3]; 3], [[f64; 3]; 3])> {
    let mut info = [[0.0f64; 3]; 3];
    for (y, w) in fit.data_sorted.iter().zip(&fit.weights) {
        if *w == 0.0 {
            continue;
        }
        let h = score_jacobian(*y, &fit.theta)?;
        for i in 0..3 {
            for j in 0..3 {
                info[i][j] -= w * h[i][j];
            }
        }
    }
    let ev = sym3_eigenvalues(&info);
    if !(ev[0] > 0.0) {
        let cond = if ev[0] != 0.0 {
            ev[2] / ev[0]
        } else {
            f64::INFINITY
        };
        return Err(Error::Singular(format!(
            "weighted information is not positive definite: eigenvalues {ev:?}, condition number {cond:.3e}"
        )));
    }
    let cov = inv3(&info).map_err(|_| {
        Error::Singular(format!(
            "weighted information inversion failed: eigenvalues {ev:?}, condition number {:.3e}",
            ev[2] / ev[0]
        ))
    })?;
    Ok((info, cov))
}

/// d Q*(p, lambda) / d lambda by central difference, step 1e-5 max(1, |lambda|).
fn dqstar_dlambda(p: f64, lambda: f64) -> Result<f64> {
    let h = 1e-5 * lambda.abs().max(1.0);
    Ok((quantile_std(p, lambda + h)? - quantile_std(p, lambda - h)?) / (2.0 * h))
}

/// Gradient of eta = E(exp(y)) in (mu, sigma, lambda); d/dmu is exactly eta,
/// the others by central differences of the closed form.
fn eta_gradient(theta: &Theta, eta: f64) -> Option<[f64; 3]> {
    let h_s = 1e-6 * theta.sigma().max(1.0);
    let h_l = 1e-6 * theta.lambda().abs().max(1.0);
    let at = |sigma: f64, lambda: f64| -> Option<f64> {
        mean_exp(&Theta::new(theta.mu(), sigma, lambda).ok()?).ok()
    };
    let ds = (at(theta.sigma() + h_s, theta.lambda())? - at(theta.sigma() - h_s, theta.lambda())?)
        / (2.0 * h_s);
    let dl = (at(theta.sigma(), theta.lambda() + h_l)? - at(theta.sigma(), theta.lambda() - h_l)?)
        / (2.0 * h_l);
    Some([eta, ds, dl])
}

/// Wald summary of a fit: parameter/eta/quantile confidence intervals at
/// `conf_level`, quantiles at the probabilities in `probs`.
pub fn summarize(fit: &FitResult, probs: &[f64], conf_level: f64) -> Result<FitSummary> {
    if !(conf_level > 0.0 && conf_level < 1.0) {
        return Err(Error::Usage(format!(
            "confidence level must lie in (0,1), got {conf_level}"
        )));
    }
    let (_, cov) = weighted_information(fit)?;
    let z = normal_quantile(0.5 * (1.0 + conf_level));
    let theta = fit.theta;
    let est = theta.as_array();
    let mut se = [0.0f64; 3];
    let mut param_cis = [(0.0, 0.0); 3];
    for k in 0..3 {
        se[k] = cov[k][k].max(0.0).sqrt();
        param_cis[k] = (est[k] - z * se[k], est[k] + z * se[k]);
    }

    let eta = fit.eta;
    let (eta_se, eta_ci) = match eta {
        Some(e) => match eta_gradient(&theta, e) {
            Some(g) => {
                let var = quad_form(&cov, &g);
                let s = var.max(0.0).sqrt();
                (Some(s), Some((e - z * s, e + z * s)))
            }
            None => (None, None),
        },
        None => (None, None),
    };

    let mut quantile_cis = Vec::with_capacity(probs.len());
    for &p in probs {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Usage(format!(
                "quantile probabilities must lie in (0,1), got {p}"
            )));
        }
        let estimate = quantile(p, &theta)?;
        let qs = quantile_std(p, theta.lambda())?;
        let grad = [1.0, qs, theta.sigma() * dqstar_dlambda(p, theta.lambda())?];
        let s = quad_form(&cov, &grad).max(0.0).sqrt();
        quantile_cis.push(QuantileCi {
            p,
            estimate,
            se: s,
            lower: estimate - z * s,
            upper: estimate + z * s,
        });
    }

    Ok(FitSummary {
        theta,
        se,
        param_cis,
        eta,
        eta_se,
        eta_ci,
        cov,
        quantile_cis,
        conf_level,
    })
}

fn quad_form(m: &[[f64; 3]; 3], v: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += v[i] * m[i][j] * v[j];
        }
    }
    s
}

/// Weighted Wald test of the partial null in `null_spec`.
///
/// The statistic is the quadratic form of the restricted coordinates in the
/// inverse of their covariance block; a single restriction also reports the
/// Wald confidence interval for the restricted parameter (multi-parameter
/// nulls do not get intervals).
pub fn weighted_wald_test(
    fit: &FitResult,
    null_spec: &NullSpec,
    conf_level: f64,
) -> Result<TestResult> {
    let restrictions = null_spec.restrictions();
    if restrictions.is_empty() {
        return Err(Error::Usage(
            "Wald test needs at least one restricted parameter".into(),
        ));
    }
    let (_, cov) = weighted_information(fit)?;
    let est = fit.theta.as_array();
    let d: Vec<f64> = restrictions.iter().map(|&(k, v)| est[k] - v).collect();
    let statistic = match restrictions.len() {
        1 => {
            let k = restrictions[0].0;
            d[0] * d[0] / cov[k][k]
        }
        2 => {
            let (i, j) = (restrictions[0].0, restrictions[1].0);
            let x = solve2_sym(cov[i][i], cov[i][j], cov[j][j], &[d[0], d[1]])?;
            d[0] * x[0] + d[1] * x[1]
        }
        _ => {
            let rhs = [d[0], d[1], d[2]];
            let x = solve3(&cov, &rhs)?;
            d[0] * x[0] + d[1] * x[1] + d[2] * x[2]
        }
    };
    let df = restrictions.len();
    let p_value = chi2_sf(statistic, df);

    let conf_int = if df == 1 {
        let k = restrictions[0].0;
        let z = normal_quantile(0.5 * (1.0 + conf_level));
        let se = cov[k][k].max(0.0).sqrt();
        Some((est[k] - z * se, est[k] + z * se))
    } else {
        None
    };
    let mut null = est;
    for &(k, v) in &restrictions {
        null[k] = v;
    }
    let null_theta = Theta::new(null[0], null[1], null[2]).ok();
    Ok(TestResult {
        statistic,
        df,
        p_value,
        conf_int,
        null_theta,
    })
}

/// Feasible starting point on the sigma = lambda curve, where lambda must
/// be positive; infeasible starts are projected with a small floor.
fn project_to_curve(start: &Theta) -> (f64, f64) {
    let s = if start.lambda() > 0.0 {
        0.5 * (start.sigma() + start.lambda())
    } else {
        start.sigma().max(1e-3)
    };
    (start.mu(), s.max(1e-3))
}

/// Weighted state restricted to the curve theta = (mu, s, s), internal
/// coordinates (mu, ln s).
fn curve_state(y: &[f64], w: &[f64], mu: f64, s: f64) -> Result<(f64, [f64; 2], [[f64; 2]; 2])> {
    let theta = Theta::new(mu, s, s)?;
    let mut loglik = 0.0;
    let mut g = [0.0f64; 2];
    let mut h = [[0.0f64; 2]; 2];
    for (v, wj) in y.iter().zip(w) {
        if *wj == 0.0 {
            continue;
        }
        loglik += wj * log_density(*v, &theta);
        let z = score(*v, &theta)?;
        let hz = score_jacobian(*v, &theta)?;
        let zs = z[1] + z[2];
        g[0] += wj * z[0];
        g[1] += wj * zs;
        h[0][0] += wj * hz[0][0];
        h[0][1] += wj * (hz[0][1] + hz[0][2]);
        h[1][1] += wj * (hz[1][1] + 2.0 * hz[1][2] + hz[2][2]);
    }
    h[1][0] = h[0][1];
    // chain rule into ln s
    let g_s = g[1];
    g[1] *= s;
    h[0][1] *= s;
    h[1][0] *= s;
    h[1][1] = s * s * h[1][1] + s * g_s;
    Ok((loglik, g, h))
}

fn curve_newton(
    y: &[f64],
    w: &[f64],
    mu0: f64,
    s0: f64,
    max_it: usize,
    gtol: f64,
) -> Result<(f64, f64, bool)> {
    let mut p = [mu0, s0.ln()];
    let (mut loglik, mut g, mut h) = curve_state(y, w, p[0], p[1].exp())?;
    for _ in 0..max_it {
        let ginf = g[0].abs().max(g[1].abs());
        if ginf <= gtol {
            return Ok((p[0], p[1].exp(), true));
        }
        let dir = match solve2_sym(h[0][0], h[0][1], h[1][1], &g) {
            Ok(d) => [-d[0], -d[1]],
            Err(_) => {
                let n = g[0].abs().max(g[1].abs()).max(1e-300);
                [g[0] / n, g[1] / n]
            }
        };
        let slope = dir[0] * g[0] + dir[1] * g[1];
        let dir = if slope > 0.0 {
            dir
        } else {
            let n = g[0].abs().max(g[1].abs()).max(1e-300);
            [g[0] / n, g[1] / n]
        };
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = [
                p[0] + alpha * dir[0],
                (p[1] + alpha * dir[1]).clamp(-700.0, 700.0),
            ];
            if let Ok((ll, gg, hh)) = curve_state(y, w, cand[0], cand[1].exp()) {
                if ll.is_finite() && ll >= loglik {
                    let delta = (cand[0] - p[0]).abs().max((cand[1] - p[1]).abs());
                    p = cand;
                    loglik = ll;
                    g = gg;
                    h = hh;
                    moved = true;
                    if delta < 1e-12 {
                        let ginf = g[0].abs().max(g[1].abs());
                        return Ok((p[0], p[1].exp(), ginf <= gtol * 10.0));
                    }
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !moved {
            let ginf = g[0].abs().max(g[1].abs());
            return Ok((p[0], p[1].exp(), ginf <= gtol * 10.0));
        }
    }
    let ginf = g[0].abs().max(g[1].abs());
    Ok((p[0], p[1].exp(), ginf <= gtol * 10.0))
}

/// Fit under the constraint sigma = lambda (the two-parameter loggamma
/// submodel), reusing the chosen method's machinery on the curve.
pub fn constrained_fit_sigma_eq_lambda(
    y: &[f64],
    start: &Theta,
    method: Method,
    control: &Control,
) -> Result<FitResult> {
    if y.len() < 5 {
        return Err(Error::Usage(format!(
            "constrained fit requires n >= 5, got {}",
            y.len()
        )));
    }
    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let n = y_sorted.len();
    let (mu0, s0) = project_to_curve(start);
    let gtol = 1e-6 * (n as f64 / 500.0).max(1.0);

    match method {
        Method::Ml | Method::QTau | Method::WQTau => {
            let w = vec![1.0; n];
            let (mu, s, converged) = curve_newton(&y_sorted, &w, mu0, s0, 200, gtol)?;
            Ok(FitResult::new(
                Theta::new(mu, s, s)?,
                w,
                0,
                Method::Ml,
                y_sorted,
                converged,
            ))
        }
        Method::Wl => {
            let mut mu = mu0;
            let mut s = s0;
            let mut weights = wle_weights(&y_sorted, &Theta::new(mu, s, s)?, control)?;
            let mut converged = false;
            let mut iters = 0;
            for it in 1..=control.max_it {
                iters = it;
                let (new_mu, new_s, _) = curve_newton(&y_sorted, &weights, mu, s, 30, gtol)?;
                let delta = (new_mu - mu).abs().max((new_s - s).abs());
                mu = new_mu;
                s = new_s;
                weights = wle_weights(&y_sorted, &Theta::new(mu, s, s)?, control)?;
                if delta < control.refine_tol {
                    converged = true;
                    break;
                }
            }
            Ok(FitResult::new(
                Theta::new(mu, s, s)?,
                weights,
                iters,
                Method::Wl,
                y_sorted,
                converged,
            ))
        }
        Method::OneWl => {
            let theta0 = Theta::new(mu0, s0, s0)?;
            let weights = wle_weights(&y_sorted, &theta0, control)?;
            // mean weighted score restricted to the curve
            let mut g = [0.0f64; 2];
            for (v, wj) in y_sorted.iter().zip(&weights) {
                if *wj == 0.0 {
                    continue;
                }
                let z = score(*v, &theta0)?;
                g[0] += wj * z[0];
                g[1] += wj * (z[1] + z[2]);
            }
            g[0] /= n as f64;
            g[1] /= n as f64;
            let j3 = oneswl_information(&y_sorted, &theta0, control)?;
            let j_r = [
                [j3[0][0], j3[0][1] + j3[0][2]],
                [
                    j3[1][0] + j3[2][0],
                    j3[1][1] + j3[1][2] + j3[2][1] + j3[2][2],
                ],
            ];
            let det = j_r[0][0] * j_r[1][1] - j_r[0][1] * j_r[1][0];
            if det.abs() < 1e-300 || !det.is_finite() {
                return Err(Error::Singular(
                    "constrained one-step J is singular; use WL".into(),
                ));
            }
            let d = [
                (j_r[1][1] * g[0] - j_r[0][1] * g[1]) / det,
                (j_r[0][0] * g[1] - j_r[1][0] * g[0]) / det,
            ];
            let mut factor = control.step;
            let mut mu = mu0;
            let mut s = s0;
            for _ in 0..40 {
                let cand_s = s0 - factor * d[1];
                if cand_s > 0.0 {
                    mu = mu0 - factor * d[0];
                    s = cand_s;
                    break;
                }
                factor *= 0.5;
            }
            let theta = Theta::new(mu, s, s)?;
            let weights = wle_weights(&y_sorted, &theta, control)?;
            Ok(FitResult::new(
                theta,
                weights,
                1,
                Method::OneWl,
                y_sorted,
                true,
            ))
        }
    }
}

/// Weighted Wilks test of the hypothesis sigma = lambda:
/// statistic 2 sum w_j [l(y_j; theta_hat) - l(y_j; theta_0_hat)] against
/// chi-squared with 1 degree of freedom. Weights come from the unconstrained
/// fit by default (`WilksWeights::Constrained` switches the source).
pub fn weighted_wilks_test(
    y: &[f64],
    fit: &FitResult,
    control: &Control,
    weights_source: WilksWeights,
) -> Result<TestResult> {
    let constrained = constrained_fit_sigma_eq_lambda(y, &fit.theta, fit.method, control)?;
    let weights = match weights_source {
        WilksWeights::Unconstrained => &fit.weights,
        WilksWeights::Constrained => &constrained.weights,
    };
    let mut stat = 0.0;
    for (yv, w) in constrained.data_sorted.iter().zip(weights) {
        if *w == 0.0 {
            continue;
        }
        stat += 2.0 * w * (log_density(*yv, &fit.theta) - log_density(*yv, &constrained.theta));
    }
    if stat < -1e-8 {
        return Err(Error::EstimationFailure(format!(
            "Wilks statistic is negative ({stat:.3e}): the constrained fit beat the unconstrained one"
        )));
    }
    let statistic = stat.max(0.0);
    Ok(TestResult {
        statistic,
        df: 1,
        p_value: chi2_sf(statistic, 1),
        conf_int: None,
        null_theta: Some(constrained.theta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::sample;
    use crate::weighted_likelihood::ml_fit;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn theta(mu: f64, sigma: f64, lambda: f64) -> Theta {
        Theta::new(mu, sigma, lambda).unwrap()
    }

    fn ml_fit_of(seed: u64, t: &Theta, n: usize) -> FitResult {
        let y = sample(n, t, seed);
        ml_fit(&y, t).unwrap()
    }

    #[test]
    fn chi2_tail_reference_values() {
        // chi2 sf(3.841459, 1) = 0.05
        assert_abs_diff_eq!(chi2_sf(3.8414588206941218, 1), 0.05, epsilon = 1e-10);
        assert_abs_diff_eq!(chi2_sf(5.991464547107979, 2), 0.05, epsilon = 1e-10);
        assert_abs_diff_eq!(chi2_sf(0.0, 1), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn wald_ci_reconstruction_drg_arithmetic() {
        // from the documented output: location 8.04, s.e. 0.09841 gives the
        // 95% interval (7.847, 8.233)
        let z = normal_quantile(0.975);
        let lo = 8.04 - z * 0.09841;
        let hi = 8.04 + z * 0.09841;
        assert_abs_diff_eq!(lo, 7.847, epsilon = 5e-4);
        assert_abs_diff_eq!(hi, 8.233, epsilon = 5e-4);
    }

    #[test]
    fn summarize_consistency() {
        let t = theta(0.0, 1.0, 0.5);
        let fit = ml_fit_of(42, &t, 800);
        let s = summarize(&fit, &[0.5, 0.9, 0.95], 0.95).unwrap();
        for k in 0..3 {
            assert!(s.se[k] > 0.0);
            assert!(s.param_cis[k].0 < fit.theta.as_array()[k]);
            assert!(s.param_cis[k].1 > fit.theta.as_array()[k]);
            assert_relative_eq!(s.se[k], s.cov[k][k].sqrt(), max_relative = 1e-12);
        }
        // quantile CIs bracket their estimates and increase in p
        for w in s.quantile_cis.windows(2) {
            assert!(w[0].estimate < w[1].estimate);
        }
        for q in &s.quantile_cis {
            assert!(q.lower < q.estimate && q.estimate < q.upper);
        }
        // widening with the level
        let s99 = summarize(&fit, &[], 0.99).unwrap();
        for k in 0..3 {
            assert!(s99.param_cis[k].0 < s.param_cis[k].0);
            assert!(s99.param_cis[k].1 > s.param_cis[k].1);
        }
        assert!(s.eta.is_some() && s.eta_se.is_some());
    }

    #[test]
    fn wald_test_null_at_estimate_is_zero() {
        let fit = ml_fit_of(7, &theta(0.3, 0.8, 0.4), 300);
        let spec = NullSpec {
            lambda: Some(fit.theta.lambda()),
            ..Default::default()
        };
        let r = weighted_wald_test(&fit, &spec, 0.95).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn wald_test_single_restriction_duality() {
        let fit = ml_fit_of(11, &theta(0.0, 1.0, 0.6), 400);
        let s = summarize(&fit, &[], 0.95).unwrap();
        // statistic equals ((est - null)/se)^2 and rejects at 5% iff the
        // null sits outside the 95% interval
        for null in [-0.4f64, 0.0, 0.55, 1.4] {
            let spec = NullSpec {
                lambda: Some(null),
                ..Default::default()
            };
            let r = weighted_wald_test(&fit, &spec, 0.95).unwrap();
            let zstat = (fit.theta.lambda() - null) / s.se[2];
            assert_relative_eq!(r.statistic, zstat * zstat, max_relative = 1e-10);
            let outside = null < s.param_cis[2].0 || null > s.param_cis[2].1;
            assert_eq!(r.p_value < 0.05, outside, "null {null}");
            let ci = r.conf_int.unwrap();
            assert_abs_diff_eq!(ci.0, s.param_cis[2].0, epsilon = 1e-12);
        }
    }

    #[test]
    fn wald_test_reproduces_documented_shape_test() {
        // lambda_hat = -0.6437, se = 0.3005 must give ww ~ 4.588, p ~ 0.032
        let stat = (0.6437f64 / 0.3005).powi(2);
        assert_abs_diff_eq!(stat, 4.5876, epsilon = 0.01);
        let p = chi2_sf(stat, 1);
        assert_abs_diff_eq!(p, 0.0322, epsilon = 0.001);
    }

    #[test]
    fn wald_test_multi_restriction_has_no_ci() {
        let fit = ml_fit_of(13, &theta(0.0, 1.0, 0.5), 300);
        let spec = NullSpec {
            mu: Some(0.0),
            sigma: Some(1.0),
            ..Default::default()
        };
        let r = weighted_wald_test(&fit, &spec, 0.95).unwrap();
        assert_eq!(r.df, 2);
        assert!(r.conf_int.is_none());
        assert!(r.statistic >= 0.0);
        let empty = NullSpec::default();
        assert!(weighted_wald_test(&fit, &empty, 0.95).is_err());
    }

    #[test]
    fn constrained_fit_recovers_curve_truth() {
        // sigma = lambda = 0.5
        let t = theta(1.0, 0.5, 0.5);
        let y = sample(1000, &t, 19);
        let fit = constrained_fit_sigma_eq_lambda(
            &y,
            &theta(0.9, 0.6, 0.4),
            Method::Ml,
            &Control::default(),
        )
        .unwrap();
        assert_eq!(fit.theta.sigma(), fit.theta.lambda());
        assert!((fit.theta.mu() - 1.0).abs() < 0.1, "mu {}", fit.theta.mu());
        assert!(
            (fit.theta.sigma() - 0.5).abs() < 0.1,
            "s {}",
            fit.theta.sigma()
        );
    }

    #[test]
    fn constrained_fit_fixed_point_when_already_on_curve() {
        let t = theta(0.5, 0.6, 0.6);
        let y = sample(800, &t, 23);
        let free = ml_fit(&y, &t).unwrap();
        let constrained =
            constrained_fit_sigma_eq_lambda(&y, &free.theta, Method::Ml, &Control::default())
                .unwrap();
        // the constrained optimum is close to the free one when the free fit
        // already sits near the curve
        assert!((constrained.theta.mu() - free.theta.mu()).abs() < 0.1);
        assert!(
            (constrained.theta.sigma() - 0.5 * (free.theta.sigma() + free.theta.lambda())).abs()
                < 0.1
        );
    }

    #[test]
    fn wilks_test_degenerate_and_negative_guard() {
        let t = theta(0.5, 0.6, 0.6);
        let y = sample(800, &t, 29);
        let fit = ml_fit(&y, &t).unwrap();
        let r = weighted_wilks_test(&y, &fit, &Control::default(), WilksWeights::Unconstrained)
            .unwrap();
        assert!(r.statistic >= 0.0);
        assert!(r.df == 1);
        // data generated on the curve: the statistic should be small and p
        // comfortably away from 0
        assert!(r.p_value > 0.01, "p = {}", r.p_value);
        assert!(r.null_theta.is_some());
        let nt = r.null_theta.unwrap();
        assert_eq!(nt.sigma(), nt.lambda());
    }

    #[test]
    fn wilks_test_rejects_off_curve_data() {
        // lambda = 0 data is far from any sigma = lambda model
        let t = theta(0.0, 1.0, 0.0);
        let y = sample(800, &t, 31);
        let fit = ml_fit(&y, &t).unwrap();
        let r = weighted_wilks_test(&y, &fit, &Control::default(), WilksWeights::Unconstrained)
            .unwrap();
        assert!(r.statistic > 10.0, "stat = {}", r.statistic);
        assert!(r.p_value < 0.01);
    }
}
