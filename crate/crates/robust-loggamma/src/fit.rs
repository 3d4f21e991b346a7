//! Shared fit-result types returned by every estimation method.

use crate::distribution::{mean_exp, Theta};
use serde::{Deserialize, Serialize};

/// Estimation method tags, spelled the way the CLI accepts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "QTau")]
    QTau,
    #[serde(rename = "WQTau")]
    WQTau,
    #[serde(rename = "oneWL")]
    OneWl,
    #[serde(rename = "WL")]
    Wl,
    #[serde(rename = "ML")]
    Ml,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::QTau => "QTau",
            Method::WQTau => "WQTau",
            Method::OneWl => "oneWL",
            Method::Wl => "WL",
            Method::Ml => "ML",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "QTau" => Some(Method::QTau),
            "WQTau" => Some(Method::WQTau),
            "oneWL" => Some(Method::OneWl),
            "WL" => Some(Method::Wl),
            "ML" => Some(Method::Ml),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One grid point of the Qtau lambda profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGridPoint {
    pub lambda: f64,
    pub tau: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Output of any fit: estimates, per-observation weights aligned with the
/// sorted data, iteration count, the method tag and the eta functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: Theta,
    /// E(exp(y)) at the estimate; `None` when the moment diverges.
    pub eta: Option<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub method: Method,
    /// The input data, sorted ascending; weights are aligned with it.
    pub data_sorted: Vec<f64>,
    pub converged: bool,
    /// Minimized tau-scale (QTau / WQTau only).
    pub tau: Option<f64>,
    /// Full tau(lambda) profile over the grid (QTau / WQTau only).
    pub tau_profile: Option<Vec<TauGridPoint>>,
}

impl FitResult {
    pub(crate) fn new(
        theta: Theta,
        weights: Vec<f64>,
        iterations: usize,
        method: Method,
        data_sorted: Vec<f64>,
        converged: bool,
    ) -> Self {
        let eta = mean_exp(&theta).ok();
        FitResult {
            theta,
            eta,
            weights,
            iterations,
            method,
            data_sorted,
            converged,
            tau: None,
            tau_profile: None,
        }
    }

    pub fn n(&self) -> usize {
        self.data_sorted.len()
    }
}
