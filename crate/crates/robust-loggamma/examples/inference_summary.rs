//! Wald summaries and robust tests: standard errors, confidence intervals
//! for parameters / eta / model quantiles, the weighted Wald test of
//! lambda = 0 (is the lognormal acceptable?) and the weighted Wilks test of
//! sigma = lambda (is the plain loggamma acceptable?).
//!
//! ```bash
//! cargo run --release --example inference_summary
//! ```

use robust_loggamma::cli::fit_pipeline;
use robust_loggamma::distribution::sample;
use robust_loggamma::inference::{
    summarize, weighted_wald_test, weighted_wilks_test, NullSpec, WilksWeights,
};
use robust_loggamma::{Control, Method, Theta};

fn main() {
    // skewed log-cost-like data with a couple of outliers
    let truth = Theta::new(8.0, 0.5, -0.6).unwrap();
    let mut y = sample(250, &truth, 77);
    y.extend([10.8, 11.2]);

    let control = Control {
        n_resample: 200,
        ..Control::default()
    };
    let fit = fit_pipeline(&y, Method::OneWl, None, None, &control).unwrap();

    let summary = summarize(&fit, &[0.9, 0.95, 0.99], 0.95).unwrap();
    let names = ["Location", "Scale", "Shape"];
    for k in 0..3 {
        println!(
            "{:>9}: {:>8.4}   s.e. {:.4}   95% CI ({:.4}, {:.4})",
            names[k],
            fit.theta.as_array()[k],
            summary.se[k],
            summary.param_cis[k].0,
            summary.param_cis[k].1
        );
    }
    if let (Some(eta), Some(se), Some(ci)) = (summary.eta, summary.eta_se, summary.eta_ci) {
        println!(
            "{:>9}: {eta:>8.0}   s.e. {se:.0}    95% CI ({:.0}, {:.0})",
            "E(exp X)", ci.0, ci.1
        );
    }
    for q in &summary.quantile_cis {
        println!(
            "  quantile p={:<5} {:>8.3}  s.e. {:.3}  ({:.3}, {:.3})",
            q.p, q.estimate, q.se, q.lower, q.upper
        );
    }

    // Wald test: is the shape zero (lognormal model)?
    let wald = weighted_wald_test(
        &fit,
        &NullSpec {
            lambda: Some(0.0),
            ..Default::default()
        },
        0.95,
    )
    .unwrap();
    println!(
        "\nWald test of lambda = 0: ww = {:.4}, df = {}, p = {:.4}",
        wald.statistic, wald.df, wald.p_value
    );

    // Wilks test: is sigma = lambda (the two-parameter loggamma) acceptable?
    let wilks = weighted_wilks_test(&y, &fit, &control, WilksWeights::Unconstrained).unwrap();
    let null = wilks.null_theta.unwrap();
    println!(
        "Wilks test of sigma = lambda: statistic = {:.4}, p = {:.4} (mu0 = {:.4}, sigma0 = {:.4})",
        wilks.statistic,
        wilks.p_value,
        null.mu(),
        null.sigma()
    );
}
