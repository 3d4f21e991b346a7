//! The weighted-likelihood estimators: fully iterated (WL) and one-step
//! (oneWL), with the robustness weights that identify outliers.
//!
//! ```bash
//! cargo run --release --example weighted_likelihood_fit
//! ```

use robust_loggamma::cli::fit_pipeline;
use robust_loggamma::distribution::sample;
use robust_loggamma::{Control, Method, Theta};

fn main() {
    let truth = Theta::new(0.0, 1.0, 0.5).unwrap();
    let mut y = sample(300, &truth, 23);
    // three isolated gross outliers
    y.extend([9.5, 10.0, 11.0]);

    let control = Control {
        n_resample: 200,
        ..Control::default()
    };

    // the default pipeline: QTau -> WQTau for starting values, then the
    // requested likelihood-based method
    for method in [Method::OneWl, Method::Wl, Method::Ml] {
        let fit = fit_pipeline(&y, method, None, None, &control).unwrap();
        println!(
            "{:>6}:  mu = {:+.3}  sigma = {:.3}  lambda = {:+.3}  (iterations {}, converged {})",
            method.as_str(),
            fit.theta.mu(),
            fit.theta.sigma(),
            fit.theta.lambda(),
            fit.iterations,
            fit.converged
        );
        if method != Method::Ml {
            let flagged: Vec<(usize, f64)> = fit
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w < 0.1)
                .map(|(i, w)| (i, *w))
                .collect();
            let mean_w = fit.weights.iter().sum::<f64>() / fit.weights.len() as f64;
            println!("        mean weight {mean_w:.3}; observations with weight < 0.1:");
            for (i, w) in flagged {
                println!(
                    "          #{i:<4} y = {:>7.3}   w = {w:.4}",
                    fit.data_sorted[i]
                );
            }
        }
    }
}
