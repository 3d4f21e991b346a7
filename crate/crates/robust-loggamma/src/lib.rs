// Numeric code idioms: published coefficient tables keep their full printed
// precision, `!(x > 0.0)` deliberately catches NaN, and 3x3 matrix loops
// index both sides.
#![allow(clippy::excessive_precision)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

//! Robust estimation and inference for the three-parameter generalized
//! loggamma distribution LG(mu, sigma, lambda).
//!
//! The crate provides the distribution itself (density, CDF, quantile,
//! sampling, scores), the robust Qtau / weighted-Qtau estimators built on
//! tau-scales of quantile-matching residuals, maximum likelihood, the
//! weighted-likelihood estimators (fully iterated and one-step), and
//! Wald/Wilks inference with outlier-downweighting.
//!
//! Start with [`control::Control`] and the fit entry points
//! [`qtau::qtau_fit`], [`qtau::wqtau_fit`], [`weighted_likelihood::ml_fit`],
//! [`weighted_likelihood::fiwl_fit`] and [`weighted_likelihood::oneswl_fit`],
//! or run the `loggamma` binary. The `examples/` directory walks through each
//! capability end to end.

pub mod cli;
pub mod control;
pub mod distribution;
pub mod error;
pub mod fit;
pub mod inference;
pub mod qtau;
pub mod robust_scale;
pub mod special;
pub mod weighted_likelihood;

mod linalg;

pub use control::Control;
pub use distribution::Theta;
pub use error::{Error, Result};
pub use fit::{FitResult, Method};
pub use weighted_likelihood::RafKind;
