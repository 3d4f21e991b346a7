//! Tour of the LG(mu, sigma, lambda) distribution itself: density, CDF,
//! quantiles, random draws and the cost-scale mean eta = E(exp(y)).
//!
//! ```bash
//! cargo run --example distribution_tour
//! ```

use robust_loggamma::distribution::{cdf, density, mean_exp, quantile, sample};
use robust_loggamma::Theta;

fn main() {
    // the family nests the normal (lambda = 0), logWeibull (lambda = 1),
    // logexponential (lambda = 1, sigma = 1) and loggamma (sigma = lambda)
    let members = [
        ("normal(0,1)", Theta::new(0.0, 1.0, 0.0).unwrap()),
        ("logWeibull(0,2)", Theta::new(0.0, 2.0, 1.0).unwrap()),
        ("logexponential", Theta::new(0.0, 1.0, 1.0).unwrap()),
        ("loggamma(0,2)", Theta::new(0.0, 2.0, 2.0).unwrap()),
    ];

    println!("densities at a few points:");
    print!("{:>16}", "y");
    for y in [-4.0, -2.0, 0.0, 1.0, 2.0] {
        print!("{y:>10.1}");
    }
    println!();
    for (name, theta) in &members {
        print!("{name:>16}");
        for y in [-4.0, -2.0, 0.0, 1.0, 2.0] {
            print!("{:>10.4}", density(y, theta));
        }
        println!();
    }

    let theta = Theta::new(0.0, 1.0, -0.6).unwrap();
    println!("\nquantiles of LG(0, 1, -0.6) and the CDF round trip:");
    for p in [0.01, 0.1, 0.5, 0.9, 0.99] {
        let q = quantile(p, &theta).unwrap();
        println!(
            "  p = {p:<5} Q(p) = {q:>8.4}   F(Q(p)) = {:.10}",
            cdf(q, &theta)
        );
    }

    // sampling is deterministic given the seed
    let draws = sample(5, &theta, 42);
    println!("\nfive draws with seed 42: {draws:.4?}");
    let again = sample(5, &theta, 42);
    assert_eq!(draws, again);

    // eta is the mean on the original (exp) scale; it is the managerially
    // relevant quantity when y is a log cost
    let cost_model = Theta::new(8.04, 0.4944, -0.6437).unwrap();
    println!(
        "\nE(exp(y)) for the cost model (8.04, 0.4944, -0.6437): {:.0}",
        mean_exp(&cost_model).unwrap()
    );
    // the moment can diverge: alpha + sigma/lambda must stay positive
    let divergent = Theta::new(0.0, 10.0, -1.0).unwrap();
    println!(
        "divergent case errors: {}",
        mean_exp(&divergent).unwrap_err()
    );
}
