//! The generalized loggamma family LG(mu, sigma, lambda).
//!
//! A variable y ~ LG(mu, sigma, lambda) is y = mu + sigma * u where the
//! standardized u has density
//!
//! ```text
//! f_lambda(u) = |lambda| / Gamma(a) * a^a * exp(a * (lambda u - e^(lambda u))),   a = lambda^-2
//! f_0(u)      = standard normal density                                (lambda = 0)
//! ```
//!
//! The family contains the normal (lambda = 0), logWeibull (lambda = 1),
//! logexponential (lambda = 1, sigma = 1) and loggamma (sigma = lambda)
//! models. All closed forms below come from the monotone transform
//! t = a e^(lambda u) ~ Gamma(a, 1), which gives the CDF through the
//! regularized incomplete gamma function and sampling through a single
//! gamma draw.

use crate::error::{Error, Result};
use crate::special::{
    gamma_p, gamma_q, inv_gamma_p, inv_gamma_q, ln_gamma, ln_minus_digamma, normal_cdf,
    normal_quantile, recip_minus_trigamma,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Below this |lambda| the distribution is numerically indistinguishable from
/// the normal branch for CDF/quantile/sampling purposes (a = lambda^-2 > 1e12).
const LAMBDA_GAMMA_CUTOFF: f64 = 1e-6;
/// Density branch cutoff; the lambda != 0 branch stays accurate much further.
const LAMBDA_DENSITY_CUTOFF: f64 = 1e-8;
/// |lambda| at or below this uses finite differences for the lambda-score.
const LAMBDA_SCORE_SEAM: f64 = 1e-4;
/// The lambda-lambda Hessian entry cancels catastrophically sooner than the
/// score does (terms of size 1/lambda^4 collapse to O(1)); below this the
/// five-point stencil is the accurate route.
const LAMBDA_HESS_SEAM: f64 = 5e-3;
/// a = lambda^-2 above this switches the normalizing constant to the Stirling
/// remainder form, which avoids the cancellation of the direct sum.
const STIRLING_A_CUTOFF: f64 = 2500.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Parameter triple (location, scale, shape) of the loggamma family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    mu: f64,
    sigma: f64,
    lambda: f64,
}

impl Theta {
    /// Validates sigma > 0 and finiteness of all three fields.
    pub fn new(mu: f64, sigma: f64, lambda: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite parameters ({mu}, {sigma}, {lambda})"
            )));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Theta { mu, sigma, lambda })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Parameters as an array in (mu, sigma, lambda) order.
    pub fn as_array(&self) -> [f64; 3] {
        [self.mu, self.sigma, self.lambda]
    }
}

/// Generalized-gamma reparametrization (alpha, gamma, delta) and the mean
/// eta = E(exp(y)) on the original scale. Defined only for lambda != 0.
#[derive(Debug, Clone, Copy)]
pub struct GammaDerived {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `None` when alpha + 1/gamma <= 0 (the moment diverges).
    pub eta: Option<f64>,
}

impl GammaDerived {
    pub fn from_theta(theta: &Theta) -> Result<Self> {
        let lambda = theta.lambda();
        if lambda == 0.0 {
            return Err(Error::Domain(
                "generalized-gamma parameters require lambda != 0".into(),
            ));
        }
        let alpha = lambda.powi(-2);
        let gamma = lambda / theta.sigma();
        // delta = exp(mu + 2 log|lambda| sigma / lambda); log|lambda| (i.e.
        // log(lambda^2)/2) extends the exponent to negative shapes, matching
        // E(G^(sigma/lambda)) for G ~ Gamma(alpha, 1).
        let delta = (theta.mu() + 2.0 * lambda.abs().ln() * theta.sigma() / lambda).exp();
        let shifted = alpha + 1.0 / gamma;
        let eta = if shifted > 0.0 {
            let ln_eta = delta.ln() + ln_gamma(shifted) - ln_gamma(alpha);
            Some(ln_eta.exp())
        } else {
            None
        };
        Ok(GammaDerived {
            alpha,
            gamma,
            delta,
            eta,
        })
    }
}

/// Normalizing constant group log|lambda| + a log a - lgamma(a) - a, which
/// tends to -log sqrt(2 pi) as lambda -> 0. Direct evaluation cancels badly
/// for large a, so the Stirling remainder takes over past the cutoff.
fn ln_norm_const(lambda: f64, a: f64) -> f64 {
    if a >= STIRLING_A_CUTOFF {
        let r = 1.0 / (a * a);
        let stirling_rem = (1.0 / 12.0 - r * (1.0 / 360.0 - r / 1260.0)) / a;
        -LN_SQRT_2PI - stirling_rem
    } else {
        lambda.abs().ln() + a * a.ln() - ln_gamma(a) - a
    }
}

/// log f_lambda(u) for the standardized variable.
fn log_density_std(u: f64, lambda: f64) -> f64 {
    if !u.is_finite() {
        return f64::NEG_INFINITY;
    }
    if lambda.abs() <= LAMBDA_DENSITY_CUTOFF {
        return -LN_SQRT_2PI - 0.5 * u * u;
    }
    let a = lambda.powi(-2);
    let w = lambda * u;
    // a (lambda u - e^(lambda u)) = -a - a (expm1(w) - w); the -a folds into
    // the normalizing group, and expm1(w) - w is cancellation-free.
    ln_norm_const(lambda, a) - a * (w.exp_m1() - w)
}

/// Density of LG(theta) at y.
pub fn density(y: f64, theta: &Theta) -> f64 {
    log_density(y, theta).exp()
}

/// Log-density of LG(theta) at y; returns -inf where the density underflows
/// in exact arithmetic (never for finite y, but kept -inf-safe for the
/// likelihood sums downstream).
pub fn log_density(y: f64, theta: &Theta) -> f64 {
    let u = (y - theta.mu()) / theta.sigma();
    log_density_std(u, theta.lambda()) - theta.sigma().ln()
}

/// CDF of LG(theta) at y.
///
/// For lambda > 0 this is P(a, a e^(lambda u)) with a = lambda^-2 and
/// u = (y-mu)/sigma; for lambda < 0 the reflected upper tail Q(a, a e^(lambda u));
/// for lambda = 0 the standard normal CDF.
pub fn cdf(y: f64, theta: &Theta) -> f64 {
    let u = (y - theta.mu()) / theta.sigma();
    cdf_std(u, theta.lambda())
}

fn cdf_std(u: f64, lambda: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if lambda.abs() <= LAMBDA_GAMMA_CUTOFF {
        return normal_cdf(u);
    }
    let a = lambda.powi(-2);
    let ln_x = a.ln() + lambda * u;
    let x = ln_x.exp();
    if lambda > 0.0 {
        gamma_p(a, x)
    } else {
        gamma_q(a, x)
    }
}

/// Standardized quantile Q*(p, lambda) = Q(p, (0, 1, lambda)).
pub fn quantile_std(p: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p <= 0.0 || p >= 1.0 {
        return Err(Error::Domain(format!(
            "quantile probability must lie in (0,1), got {p}"
        )));
    }
    if lambda.abs() <= LAMBDA_GAMMA_CUTOFF {
        return Ok(normal_quantile(p));
    }
    let a = lambda.powi(-2);
    let x = if lambda > 0.0 {
        inv_gamma_p(a, p)
    } else {
        inv_gamma_q(a, p)
    };
    let x = x.max(f64::MIN_POSITIVE);
    Ok((x.ln() - a.ln()) / lambda)
}

/// Quantile of LG(theta): mu + sigma * Q*(p, lambda), the affine identity
/// evaluated exactly in this form.
pub fn quantile(p: f64, theta: &Theta) -> Result<f64> {
    Ok(theta.mu() + theta.sigma() * quantile_std(p, theta.lambda())?)
}

/// Mean of exp(y): eta = delta Gamma(alpha + 1/gamma) / Gamma(alpha) for
/// lambda != 0, exp(mu + sigma^2/2) for lambda = 0.
pub fn mean_exp(theta: &Theta) -> Result<f64> {
    if theta.lambda().abs() <= LAMBDA_DENSITY_CUTOFF {
        return Ok((theta.mu() + 0.5 * theta.sigma() * theta.sigma()).exp());
    }
    let derived = GammaDerived::from_theta(theta)?;
    derived.eta.ok_or_else(|| {
        Error::MomentUndefined(format!(
            "E(exp(y)) diverges: alpha + 1/gamma = {} <= 0",
            derived.alpha + 1.0 / derived.gamma
        ))
    })
}

/// i.i.d. draws from LG(theta), deterministic for a given seed.
///
/// Sampling goes through the gamma transform u = log(lambda^2 G)/lambda with
/// G ~ Gamma(lambda^-2, 1) (normal draw at lambda = 0), which is exact in
/// distribution and much faster than quantile inversion.
pub fn sample(n: usize, theta: &Theta, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(n, theta, &mut rng)
}

/// As [`sample`], drawing from a caller-provided RNG.
pub fn sample_with_rng<R: Rng>(n: usize, theta: &Theta, rng: &mut R) -> Vec<f64> {
    let lambda = theta.lambda();
    (0..n)
        .map(|_| {
            let u = if lambda.abs() <= LAMBDA_GAMMA_CUTOFF {
                standard_normal(rng)
            } else {
                let a = lambda.powi(-2);
                let g = gamma_draw(rng, a).max(f64::MIN_POSITIVE);
                (g.ln() - a.ln()) / lambda
            };
            theta.mu() + theta.sigma() * u
        })
        .collect()
}

/// Marsaglia polar method for a standard normal draw.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Marsaglia-Tsang gamma generator, shape `a`, unit rate.
fn gamma_draw<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a < 1.0 {
        // boost: Gamma(a) = Gamma(a+1) * U^(1/a)
        let x = gamma_draw(rng, a + 1.0);
        let u: f64 = loop {
            let u = rng.gen::<f64>();
            if u > 0.0 {
                break u;
            }
        };
        return x * u.powf(1.0 / a);
    }
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = standard_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.gen::<f64>();
        if u < 1.0 - 0.0331 * x.powi(4) {
            return d * v;
        }
        if u > 0.0 && u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Score vector: gradient of the log-density in (mu, sigma, lambda).
///
/// The mu and sigma components are analytic everywhere. The lambda component
/// is analytic (digamma-based) for |lambda| > 1e-4; across the lambda = 0
/// seam it switches to a 4th-order central difference of the log-density in
/// lambda, where the analytic expression loses all significance.
pub fn score(y: f64, theta: &Theta) -> Result<[f64; 3]> {
    if !y.is_finite() {
        return Err(Error::Domain(format!("score requires finite y, got {y}")));
    }
    let sigma = theta.sigma();
    let lambda = theta.lambda();
    let u = (y - theta.mu()) / sigma;

    let (z_mu, z_sigma) = if lambda == 0.0 {
        (u / sigma, (u * u - 1.0) / sigma)
    } else {
        let em = (lambda * u).exp_m1();
        (em / (sigma * lambda), (u * em / lambda - 1.0) / sigma)
    };

    let z_lambda = if lambda.abs() <= LAMBDA_SCORE_SEAM {
        lambda_score_fd(u, lambda)
    } else {
        lambda_score_analytic(u, lambda)
    };
    Ok([z_mu, z_sigma, z_lambda])
}

fn lambda_score_analytic(u: f64, lambda: f64) -> f64 {
    let a = lambda.powi(-2);
    let w = lambda * u;
    let em = w.exp_m1();
    // B = -psi(a) + ln a + 1 + lambda u - e^(lambda u), assembled from the
    // cancellation-free pieces (ln a - psi(a)) and (lambda u - expm1).
    let b = ln_minus_digamma(a) + (w - em);
    1.0 / lambda - (2.0 * a / lambda) * b - a * u * em
}

/// 4th-order central difference of log f_lambda(u) in lambda, step chosen so
/// every evaluation point sits in the Stirling-stable branch.
fn lambda_score_fd(u: f64, lambda: f64) -> f64 {
    let h = 0.01;
    let f = |l: f64| log_density_std(u, l);
    (-f(lambda + 2.0 * h) + 8.0 * f(lambda + h) - 8.0 * f(lambda - h) + f(lambda - 2.0 * h))
        / (12.0 * h)
}

/// Jacobian of the score (the Hessian of the log-density), symmetric 3x3 in
/// (mu, sigma, lambda) order.
pub fn score_jacobian(y: f64, theta: &Theta) -> Result<[[f64; 3]; 3]> {
    if !y.is_finite() {
        return Err(Error::Domain(format!(
            "score_jacobian requires finite y, got {y}"
        )));
    }
    let sigma = theta.sigma();
    let lambda = theta.lambda();
    let u = (y - theta.mu()) / sigma;
    let s2 = sigma * sigma;

    let (h_mm, h_ms, h_ss, h_ml, h_sl) = if lambda == 0.0 {
        (
            -1.0 / s2,
            -2.0 * u / s2,
            (1.0 - 3.0 * u * u) / s2,
            u * u / (2.0 * sigma),
            u * u * u / (2.0 * sigma),
        )
    } else {
        let w = lambda * u;
        let em = w.exp_m1();
        let e = em + 1.0;
        let cross = (u * e * lambda - em) / (lambda * lambda);
        (
            -e / s2,
            -em / (s2 * lambda) - u * e / s2,
            -2.0 * u * em / (s2 * lambda) - u * u * e / s2 + 1.0 / s2,
            cross / sigma,
            u * cross / sigma,
        )
    };

    let h_ll = if lambda.abs() <= LAMBDA_HESS_SEAM {
        lambda_hessian_fd(u, lambda)
    } else {
        lambda_hessian_analytic(u, lambda)
    };

    Ok([[h_mm, h_ms, h_ml], [h_ms, h_ss, h_sl], [h_ml, h_sl, h_ll]])
}

fn lambda_hessian_analytic(u: f64, lambda: f64) -> f64 {
    let a = lambda.powi(-2);
    let l2 = lambda * lambda;
    let w = lambda * u;
    let em = w.exp_m1();
    let e = em + 1.0;
    let b = ln_minus_digamma(a) + (w - em);
    -1.0 / l2
        + (6.0 * a / l2) * b
        + (4.0 * a * a / l2) * recip_minus_trigamma(a)
        + (4.0 * a / lambda) * u * em
        - a * u * u * e
}

/// 4th-order five-point stencil for the second lambda-derivative of the
/// log-density across the seam.
fn lambda_hessian_fd(u: f64, lambda: f64) -> f64 {
    let h = 0.02;
    let f = |l: f64| log_density_std(u, l);
    (-f(lambda + 2.0 * h) + 16.0 * f(lambda + h) - 30.0 * f(lambda) + 16.0 * f(lambda - h)
        - f(lambda - 2.0 * h))
        / (12.0 * h * h)
}

/// Per-order-statistic asymptotic variances
/// v^2(theta, u) = sigma^2 u (1-u) / f_lambda(Q*(u, lambda))^2.
pub fn quantile_variance(theta: &Theta, u: f64) -> Result<f64> {
    let q = quantile_std(u, theta.lambda())?;
    let ln_f = log_density_std(q, theta.lambda());
    let s = theta.sigma();
    // evaluated in log space; extreme u may still overflow to +inf, callers
    // clamp (see the weighted fit)
    Ok((2.0 * s.ln() + (u * (1.0 - u)).ln() - 2.0 * ln_f).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn theta(mu: f64, sigma: f64, lambda: f64) -> Theta {
        Theta::new(mu, sigma, lambda).unwrap()
    }

    /// Adaptive Simpson oracle, independent of the cdf implementation.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn step<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    /// Adaptive Simpson over [a, b] split into ~unit panels, so a narrow
    /// density bump inside a wide interval cannot be missed.
    fn panel_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        let panels = ((b - a) / 2.0).ceil().max(1.0) as usize;
        let w = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * w;
                simpson(f, lo, lo + w, tol / panels as f64)
            })
            .sum()
    }

    #[test]
    fn density_standard_normal_at_zero() {
        assert_relative_eq!(
            density(0.0, &theta(0.0, 1.0, 0.0)),
            0.3989422804014327,
            max_relative = 1e-12
        );
    }

    #[test]
    fn density_logexponential_at_zero() {
        // lambda = 1: |1|/Gamma(1) * 1^1 * exp(1*(0 - 1)) = e^-1
        assert_relative_eq!(
            density(0.0, &theta(0.0, 1.0, 1.0)),
            (-1.0f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn density_location_scale_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mu = rng.gen_range(-3.0..3.0);
            let sigma = rng.gen_range(0.2..4.0);
            let lambda = rng.gen_range(-2.5..2.5);
            let y = rng.gen_range(-8.0..8.0);
            let lhs = density(y, &theta(mu, sigma, lambda));
            let rhs = density((y - mu) / sigma, &theta(0.0, 1.0, lambda)) / sigma;
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12, epsilon = 1e-300);
        }
    }

    #[test]
    fn density_special_case_logexponential_curve() {
        // lambda = 1, sigma = 1: f(u) = exp(u - e^u)
        for &u in &[-3.0, -1.0, 0.0, 0.5, 2.0] {
            assert_relative_eq!(
                density(u, &theta(0.0, 1.0, 1.0)),
                (u - u.exp()).exp(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn log_density_matches_density_and_stays_finite() {
        assert_relative_eq!(
            log_density(0.0, &theta(0.0, 1.0, 0.0)),
            -0.9189385332046728,
            max_relative = 1e-12
        );
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let lambda = rng.gen_range(-2.0..2.0);
            let y = rng.gen_range(-6.0..6.0);
            let t = theta(0.0, 1.0, lambda);
            assert_relative_eq!(
                log_density(y, &t).exp(),
                density(y, &t),
                max_relative = 1e-12,
                epsilon = 1e-300
            );
        }
        // y = 50, lambda = 1: l = 50 - e^50 dominates; density underflows but
        // the log stays finite and correct
        let ld = log_density(50.0, &theta(0.0, 1.0, 1.0));
        assert_relative_eq!(ld, 50.0 - 50.0f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        for &lambda in &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let t = theta(0.0, 1.0, lambda);
            let total = panel_integral(&|u: f64| density(u, &t), -80.0, 60.0, 1e-11);
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn density_continuous_at_lambda_zero() {
        let t0 = theta(0.0, 1.0, 0.0);
        let teps = theta(0.0, 1.0, 1e-4);
        let mut worst: f64 = 0.0;
        let mut y = -5.0;
        while y <= 5.0 {
            worst = worst.max((density(y, &teps) - density(y, &t0)).abs());
            y += 0.01;
        }
        assert!(worst < 1e-3, "max density gap at lambda=1e-4: {worst}");
    }

    #[test]
    fn cdf_against_quadrature_oracle() {
        for &lambda in &[-2.0, -0.5, 0.5, 1.0, 2.0] {
            let t = theta(0.0, 1.0, lambda);
            for &y in &[-2.0, -0.5, 0.0, 0.8, 2.5] {
                let quad = panel_integral(&|u: f64| density(u, &t), -80.0, y, 1e-11);
                assert_abs_diff_eq!(cdf(y, &t), quad, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn cdf_frozen_reference_values() {
        // mpmath through the gamma-transform closed form
        assert_relative_eq!(
            cdf(0.5, &theta(0.0, 1.0, 1.0)),
            0.8077043544520351,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cdf(0.3, &theta(0.0, 1.0, -0.5)),
            0.5490175536480708,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cdf(-1.0, &theta(0.0, 1.0, 2.0)),
            0.46999746125970394,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cdf(0.7, &theta(0.0, 1.0, -2.0)),
            0.4569193761233613,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            cdf(0.0, &theta(0.0, 1.0, 0.5)),
            0.5665298796332911,
            max_relative = 1e-12
        );
        assert_relative_eq!(cdf(0.0, &theta(0.0, 1.0, 0.0)), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn quantile_cdf_roundtrip() {
        for &lambda in &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
            let t = theta(0.3, 1.7, lambda);
            for j in 1..100 {
                let p = j as f64 / 100.0;
                let q = quantile(p, &t).unwrap();
                assert_abs_diff_eq!(cdf(q, &t), p, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn quantile_known_points() {
        assert_abs_diff_eq!(
            quantile(0.5, &theta(0.0, 1.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-14
        );
        // lambda = 1: F(0) = P(1, 1) = 1 - e^-1, so the quantile there is 0
        let p = 1.0 - (-1.0f64).exp();
        assert_abs_diff_eq!(
            quantile(p, &theta(0.0, 1.0, 1.0)).unwrap(),
            0.0,
            epsilon = 1e-11
        );
        assert!(quantile(0.0, &theta(0.0, 1.0, 1.0)).is_err());
        assert!(quantile(1.0, &theta(0.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn quantile_affine_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let mu = rng.gen_range(-4.0..4.0);
            let sigma = rng.gen_range(0.1..5.0);
            let lambda = rng.gen_range(-2.5..2.5);
            let p = rng.gen_range(0.01..0.99);
            let full = quantile(p, &theta(mu, sigma, lambda)).unwrap();
            let std = quantile(p, &theta(0.0, 1.0, lambda)).unwrap();
            assert_relative_eq!(
                full,
                mu + sigma * std,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn sample_deterministic_given_seed() {
        let t = theta(1.0, 2.0, -0.7);
        let a = sample(5, &t, 99);
        let b = sample(5, &t, 99);
        assert_eq!(a, b);
        let c = sample(5, &t, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_kolmogorov_smirnov() {
        // 1% critical value 1.63/sqrt(n)
        let n = 10_000;
        for &lambda in &[-1.0, 0.0, 1.0] {
            let t = theta(0.0, 1.0, lambda);
            let mut draws = sample(n, &t, 2024);
            draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut ks: f64 = 0.0;
            for (j, y) in draws.iter().enumerate() {
                let f = cdf(*y, &t);
                let hi = (j + 1) as f64 / n as f64;
                let lo = j as f64 / n as f64;
                ks = ks.max((f - hi).abs()).max((f - lo).abs());
            }
            assert!(
                ks < 1.63 / (n as f64).sqrt(),
                "KS={ks} too large for lambda={lambda}"
            );
        }
    }

    #[test]
    fn sample_mean_exp_monte_carlo() {
        let t = theta(0.0, 0.5, 1.0);
        let n = 100_000;
        let draws = sample(n, &t, 7);
        let mean: f64 = draws.iter().map(|y| y.exp()).sum::<f64>() / n as f64;
        let eta = mean_exp(&t).unwrap();
        // Var(e^y) = E e^(2y) - eta^2, and 2y ~ LG(2 mu, 2 sigma, lambda)
        let second = mean_exp(&theta(0.0, 1.0, 1.0)).unwrap();
        let se = ((second - eta * eta) / n as f64).sqrt();
        assert!(
            (mean - eta).abs() < 3.0 * se,
            "mean {mean} vs eta {eta} (se {se})"
        );
    }

    #[test]
    fn mean_exp_reference_values() {
        // documented DRG example: eta = 4381 within 0.5%
        let eta = mean_exp(&theta(8.04, 0.4944, -0.6437)).unwrap();
        assert!((eta - 4381.0).abs() / 4381.0 < 0.005, "eta = {eta}");
        assert_relative_eq!(eta, 4380.97, max_relative = 1e-4);

        assert_relative_eq!(
            mean_exp(&theta(0.0, 1.0, 1.0)).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mean_exp(&theta(0.0, 1.0, 0.0)).unwrap(),
            (0.5f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn mean_exp_divergent_moment_errors() {
        // alpha + sigma/lambda <= 0: lambda < 0 with sigma large
        let t = theta(0.0, 10.0, -1.0);
        assert!(matches!(mean_exp(&t), Err(Error::MomentUndefined(_))));
    }

    #[test]
    fn score_normal_components() {
        let z = score(0.0, &theta(0.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(z[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn score_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let mu = rng.gen_range(-2.0..2.0);
            let sigma = rng.gen_range(0.3..3.0);
            let lambda = rng.gen_range(-2.5..2.5);
            let t = theta(mu, sigma, lambda);
            let y = mu + sigma * rng.gen_range(-4.0..4.0);
            let z = score(y, &t).unwrap();
            let fd = score_fd_oracle(y, &t);
            for k in 0..3 {
                let tol = 1e-5 * fd[k].abs().max(1.0);
                assert!(
                    (z[k] - fd[k]).abs() <= tol,
                    "score[{k}] {} vs fd {} at y={y}, theta={t:?}",
                    z[k],
                    fd[k]
                );
            }
        }
    }

    #[test]
    fn score_near_seam_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let lambda = rng.gen_range(-3e-4..3e-4);
            let t = theta(0.0, 1.0, lambda);
            let y = rng.gen_range(-4.0..4.0);
            let z = score(y, &t).unwrap();
            let fd = score_fd_seam_oracle(y, &t);
            for k in 0..3 {
                assert_abs_diff_eq!(z[k], fd[k], epsilon = 1e-5);
            }
        }
    }

    /// Central-difference oracle for the score, independent steps per axis.
    fn score_fd_oracle(y: f64, t: &Theta) -> [f64; 3] {
        let h = 1e-6;
        let f = |mu: f64, sigma: f64, lambda: f64| {
            log_density(y, &Theta::new(mu, sigma, lambda).unwrap())
        };
        let (m, s, l) = (t.mu(), t.sigma(), t.lambda());
        [
            (f(m + h, s, l) - f(m - h, s, l)) / (2.0 * h),
            (f(m, s + h, l) - f(m, s - h, l)) / (2.0 * h),
            (f(m, s, l + h) - f(m, s, l - h)) / (2.0 * h),
        ]
    }

    /// Near lambda = 0 the log-density carries ~1e-10 absolute noise from the
    /// huge-a branch, so the oracle uses a 4th-order stencil with a wider
    /// step to keep the roundoff amplification down.
    fn score_fd_seam_oracle(y: f64, t: &Theta) -> [f64; 3] {
        let f = |mu: f64, sigma: f64, lambda: f64| {
            log_density(y, &Theta::new(mu, sigma, lambda).unwrap())
        };
        let (m, s, l) = (t.mu(), t.sigma(), t.lambda());
        let h = 1e-6;
        let hl = 1e-3;
        let d4 = |a: f64, b: f64, c: f64, d: f64| (-a + 8.0 * b - 8.0 * c + d) / (12.0 * hl);
        [
            (f(m + h, s, l) - f(m - h, s, l)) / (2.0 * h),
            (f(m, s + h, l) - f(m, s - h, l)) / (2.0 * h),
            d4(
                f(m, s, l + 2.0 * hl),
                f(m, s, l + hl),
                f(m, s, l - hl),
                f(m, s, l - 2.0 * hl),
            ),
        ]
    }

    #[test]
    fn score_integrates_to_zero() {
        let t = theta(0.5, 1.5, 0.8);
        let n = 100_000;
        let draws = sample(n, &t, 31);
        let mut sums = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for y in &draws {
            let z = score(*y, &t).unwrap();
            for k in 0..3 {
                sums[k] += z[k];
                sq[k] += z[k] * z[k];
            }
        }
        for k in 0..3 {
            let mean = sums[k] / n as f64;
            let var = sq[k] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(
                mean.abs() < 4.0 * se,
                "score component {k}: mean {mean} vs se {se}"
            );
        }
    }

    #[test]
    fn jacobian_symmetric_and_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mu = rng.gen_range(-2.0..2.0);
            let sigma = rng.gen_range(0.3..3.0);
            let lambda = rng.gen_range(-2.5..2.5);
            let t = theta(mu, sigma, lambda);
            let y = mu + sigma * rng.gen_range(-4.0..4.0);
            let h = score_jacobian(y, &t).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((h[i][j] - h[j][i]).abs() < 1e-8);
                }
            }
            let fd = jacobian_fd_oracle(y, &t);
            for i in 0..3 {
                for j in 0..3 {
                    let tol = 1e-4 * fd[i][j].abs().max(1.0);
                    assert!(
                        (h[i][j] - fd[i][j]).abs() <= tol,
                        "H[{i}][{j}] {} vs fd {} at y={y}, theta={t:?}",
                        h[i][j],
                        fd[i][j]
                    );
                }
            }
        }
    }

    /// Central differences of the score vector, the independent Hessian oracle.
    fn jacobian_fd_oracle(y: f64, t: &Theta) -> [[f64; 3]; 3] {
        let h = 1e-5;
        let sc = |mu: f64, sigma: f64, lambda: f64| {
            score(y, &Theta::new(mu, sigma, lambda).unwrap()).unwrap()
        };
        let (m, s, l) = (t.mu(), t.sigma(), t.lambda());
        let cols = [
            (sc(m + h, s, l), sc(m - h, s, l)),
            (sc(m, s + h, l), sc(m, s - h, l)),
            (sc(m, s, l + h), sc(m, s, l - h)),
        ];
        let mut out = [[0.0; 3]; 3];
        for (j, (plus, minus)) in cols.iter().enumerate() {
            for i in 0..3 {
                out[i][j] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        // symmetrize the oracle the same way the contract states
        for i in 0..3 {
            for j in (i + 1)..3 {
                let m = 0.5 * (out[i][j] + out[j][i]);
                out[i][j] = m;
                out[j][i] = m;
            }
        }
        out
    }

    #[test]
    fn fisher_information_positive_definite() {
        // E[-grad z] at theta = (0, 1, 0.5) estimated by quadrature
        let t = theta(0.0, 1.0, 0.5);
        let mut info = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let f = |y: f64| -score_jacobian(y, &t).unwrap()[i][j] * density(y, &t);
                info[i][j] = simpson(&f, -60.0, 30.0, 1e-10);
            }
        }
        // Sylvester criterion on the symmetric matrix
        let d1 = info[0][0];
        let d2 = info[0][0] * info[1][1] - info[0][1] * info[1][0];
        let d3 = info[0][0] * (info[1][1] * info[2][2] - info[1][2] * info[2][1])
            - info[0][1] * (info[1][0] * info[2][2] - info[1][2] * info[2][0])
            + info[0][2] * (info[1][0] * info[2][1] - info[1][1] * info[2][0]);
        assert!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0, "minors: {d1} {d2} {d3}");
    }

    #[test]
    fn quantile_variance_known_value() {
        // theta = (0,1,0), u = 0.5: 0.25 / phi(0)^2 = pi/2
        let v = quantile_variance(&theta(0.0, 1.0, 0.0), 0.5).unwrap();
        assert_relative_eq!(v, std::f64::consts::PI / 2.0, max_relative = 1e-12);
        // scales as sigma^2
        let v2 = quantile_variance(&theta(0.0, 2.0, 0.7), 0.3).unwrap();
        let v1 = quantile_variance(&theta(0.0, 1.0, 0.7), 0.3).unwrap();
        assert_relative_eq!(v2, 4.0 * v1, max_relative = 1e-12);
        // symmetric under u -> 1-u at lambda = 0
        let a = quantile_variance(&theta(0.0, 1.0, 0.0), 0.2).unwrap();
        let b = quantile_variance(&theta(0.0, 1.0, 0.0), 0.8).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn theta_validation() {
        assert!(Theta::new(0.0, 0.0, 0.0).is_err());
        assert!(Theta::new(0.0, -1.0, 0.0).is_err());
        assert!(Theta::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(Theta::new(0.0, 1.0, f64::INFINITY).is_err());
        assert!(Theta::new(0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn gamma_derived_consistency() {
        let t = theta(8.04, 0.4944, -0.6437);
        let d = GammaDerived::from_theta(&t).unwrap();
        assert_relative_eq!(d.alpha, 1.0 / (0.6437f64 * 0.6437), max_relative = 1e-12);
        assert_relative_eq!(d.gamma, -0.6437 / 0.4944, max_relative = 1e-12);
        assert!(d.eta.is_some());
        assert!(GammaDerived::from_theta(&theta(0.0, 1.0, 0.0)).is_err());
    }
}
