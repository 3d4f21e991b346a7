//! Monte Carlo harness in miniature: generate clean and contaminated
//! samples, fit each method across seeds, and report median errors.
//!
//! ```bash
//! cargo run --release --example simulate_contaminated
//! ```

use robust_loggamma::cli::fit_pipeline;
use robust_loggamma::distribution::sample;
use robust_loggamma::{Control, Method, Theta};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() {
    let truth = Theta::new(0.0, 1.0, 1.0).unwrap();
    let n = 300;
    let eps = 0.15;
    let shift = 12.0;
    let seeds = 9;

    let control = Control {
        n_resample: 120,
        ..Control::default()
    };

    println!(
        "truth: LG(0, 1, 1), n = {n}, {:.0}% contamination at +{shift}",
        eps * 100.0
    );
    for contaminated in [false, true] {
        println!(
            "\n{} data:",
            if contaminated {
                "contaminated"
            } else {
                "clean"
            }
        );
        for method in [
            Method::QTau,
            Method::WQTau,
            Method::OneWl,
            Method::Wl,
            Method::Ml,
        ] {
            let mut sig_err = Vec::new();
            let mut lam_err = Vec::new();
            for seed in 0..seeds {
                let mut y = sample(n, &truth, seed);
                if contaminated {
                    let k = (eps * n as f64).floor() as usize;
                    for v in y.iter_mut().take(k) {
                        *v += shift;
                    }
                }
                let fit = fit_pipeline(&y, method, None, None, &control).unwrap();
                sig_err.push((fit.theta.sigma() - truth.sigma()).abs());
                lam_err.push((fit.theta.lambda() - truth.lambda()).abs());
            }
            println!(
                "  {:>6}: median |sigma - 1| = {:.3}   median |lambda - 1| = {:.3}",
                method.as_str(),
                median(sig_err),
                median(lam_err)
            );
        }
    }
}
