//! Tuning constants for every estimator, mirroring the reference chart of
//! the fitting front end. The documented defaults are the ones the CLI
//! `--help` reports.

use crate::error::{Error, Result};
use crate::robust_scale::RhoParams;
use crate::weighted_likelihood::{RafChoice, RafKind};
use serde::{Deserialize, Serialize};

/// All tuning knobs in one place.
///
/// | field        | default | role                                            |
/// |--------------|---------|-------------------------------------------------|
/// | tuning_rho   | 1.548   | c1 of the M-scale rho                           |
/// | tuning_psi   | 6.08    | c2 of the efficiency rho                        |
/// | n_resample   | 500     | N, 2-point subsamples per lambda                |
/// | max_it       | 100     | IRWLS / scoring iteration cap                   |
/// | refine_tol   | 1e-7    | parameter-change convergence tolerance          |
/// | lower, upper | -3, 3   | lambda grid range                               |
/// | grid_n       | 61      | lambda grid points                              |
/// | bw           | 0.3     | kernel bandwidth = bw * sigma                   |
/// | subdivisions | 100     | K of the smoothed model density                 |
/// | raf          | NED     | residual adjustment function                    |
/// | raf_tau      | 1.0     | RAF family parameter (GKL / PWD)                |
/// | minw         | 0.04    | weights below this are set to zero              |
/// | nexp         | 1000    | K of the one-step J quadrature                  |
/// | step         | 1.0     | one-step multiplier                             |
/// | seed         | 0       | RNG seed for the resampling search              |
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Control {
    pub tuning_rho: f64,
    pub tuning_psi: f64,
    pub n_resample: usize,
    pub max_it: usize,
    pub refine_tol: f64,
    pub lower: f64,
    pub upper: f64,
    pub grid_n: usize,
    pub bw: f64,
    pub subdivisions: usize,
    pub raf: RafChoice,
    pub raf_tau: f64,
    pub minw: f64,
    pub nexp: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for Control {
    fn default() -> Self {
        Control {
            tuning_rho: 1.548,
            tuning_psi: 6.08,
            n_resample: 500,
            max_it: 100,
            refine_tol: 1e-7,
            lower: -3.0,
            upper: 3.0,
            grid_n: 61,
            bw: 0.3,
            subdivisions: 100,
            raf: RafChoice::Ned,
            raf_tau: 1.0,
            minw: 0.04,
            nexp: 1000,
            step: 1.0,
            seed: 0,
        }
    }
}

impl Control {
    /// Checks the cross-field invariants before a fit.
    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) {
            return Err(Error::Usage(format!(
                "lambda grid must have lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if self.grid_n < 1 || self.n_resample < 1 || self.max_it < 1 {
            return Err(Error::Usage(
                "grid_n, n_resample and max_it must all be >= 1".into(),
            ));
        }
        if self.subdivisions < 2 || self.nexp < 2 {
            return Err(Error::Usage("subdivisions and nexp must be >= 2".into()));
        }
        if !(0.0..1.0).contains(&self.minw) {
            return Err(Error::Usage(format!(
                "minw must lie in [0, 1), got {}",
                self.minw
            )));
        }
        if !(self.step > 0.0) && self.step != 0.0 {
            return Err(Error::Usage(format!(
                "step must be >= 0, got {}",
                self.step
            )));
        }
        if !(self.bw > 0.0) {
            return Err(Error::Usage(format!(
                "bw must be positive, got {}",
                self.bw
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::Usage(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        self.rho_params()?;
        self.raf_kind().map(|_| ())
    }

    /// The (c1, c2, b = 0.5) triple used by every tau-scale in the pipeline.
    pub fn rho_params(&self) -> Result<RhoParams> {
        RhoParams::new(self.tuning_rho, self.tuning_psi, 0.5)
    }

    /// The validated RAF assembled from [`Control::raf`] and [`Control::raf_tau`].
    pub fn raf_kind(&self) -> Result<RafKind> {
        RafKind::from_choice(self.raf, self.raf_tau)
    }

    /// The equally spaced lambda grid [lower, upper] with grid_n points.
    pub fn lambda_grid(&self) -> Vec<f64> {
        if self.grid_n == 1 {
            return vec![0.5 * (self.lower + self.upper)];
        }
        let step = (self.upper - self.lower) / (self.grid_n - 1) as f64;
        (0..self.grid_n)
            .map(|i| self.lower + i as f64 * step)
            .collect()
    }
}
