//! Q-Q plot data with pointwise 90% confidence bands: theoretical quantiles
//! of the fitted model against the order statistics, plus the robustness
//! weight of each point (plot-ready CSV, like the `loggamma qq` subcommand).
//!
//! ```bash
//! cargo run --release --example qq_bands > qq.csv
//! ```

use robust_loggamma::cli::fit_pipeline;
use robust_loggamma::distribution::sample;
use robust_loggamma::inference::summarize;
use robust_loggamma::{Control, Method, Theta};

fn main() {
    let truth = Theta::new(0.0, 1.0, 1.0).unwrap();
    let mut y = sample(120, &truth, 5);
    y.extend([6.0, 7.5]); // two points that should fall outside the bands

    let control = Control {
        n_resample: 200,
        ..Control::default()
    };
    let fit = fit_pipeline(&y, Method::OneWl, None, None, &control).unwrap();

    let n = fit.n();
    let probs: Vec<f64> = (1..=n).map(|j| (j as f64 - 0.5) / n as f64).collect();
    let summary = summarize(&fit, &probs, 0.90).unwrap();

    println!("theoretical_q,empirical_q,lower,upper,weight");
    let mut outside = 0;
    for (j, q) in summary.quantile_cis.iter().enumerate() {
        let empirical = fit.data_sorted[j];
        if empirical < q.lower || empirical > q.upper {
            outside += 1;
        }
        println!(
            "{:.6},{:.6},{:.6},{:.6},{:.4}",
            q.estimate, empirical, q.lower, q.upper, fit.weights[j]
        );
    }
    eprintln!("{outside} of {n} points fall outside the 90% bands");
}
