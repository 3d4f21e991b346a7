//! Command-line front end: `fit`, `test`, `qq` and `simulate` subcommands
//! over newline-delimited numeric input, with JSON or R-style text output.
//!
//! Exit codes: 0 ok, 2 input error, 3 estimation failure, 4 usage error.

use crate::control::Control;
use crate::distribution::{sample, Theta};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method};
use crate::inference::{
    summarize, weighted_wald_test, weighted_wilks_test, FitSummary, NullSpec, TestResult,
    WilksWeights,
};
use crate::qtau::{qtau_fit, wqtau_fit};
use crate::weighted_likelihood::{fiwl_fit, ml_fit, oneswl_fit, RafChoice};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "loggamma",
    about = "Robust fitting and inference for the generalized loggamma distribution",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the three-parameter loggamma model to data
    Fit(FitArgs),
    /// Fit, then run a weighted Wald test (or the Wilks test of sigma = lambda)
    Test(TestArgs),
    /// Fit, then emit the Q-Q table with pointwise confidence bands as CSV
    Qq(QqArgs),
    /// Generate (optionally contaminated) samples from a loggamma model
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Input file of one number per line ('-' or omitted reads stdin);
    /// '#' lines and blank lines are skipped
    input: Option<PathBuf>,

    /// Select column K (1-based) from comma-separated input
    #[arg(long, value_name = "K")]
    column: Option<usize>,

    /// Apply a natural-log transform at ingestion (errors on values <= 0)
    #[arg(long)]
    log: bool,
}

#[derive(Args, Debug, Clone)]
struct ControlArgs {
    /// Estimation method
    #[arg(long, default_value = "oneWL", value_parser = parse_method)]
    method: Method,

    /// Starting values "mu,sigma,lambda" (skips the QTau/WQTau chain)
    #[arg(long, value_name = "MU,SIGMA,LAMBDA", value_parser = parse_theta, allow_hyphen_values = true)]
    start: Option<Theta>,

    /// Seed of the resampling search
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Residual adjustment function
    #[arg(long, default_value = "ned", value_parser = parse_raf)]
    raf: RafChoice,

    /// RAF family parameter (GKL / PWD)
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    raf_tau: f64,

    /// Kernel bandwidth factor (bandwidth = bw * sigma)
    #[arg(long, default_value_t = 0.3)]
    bw: f64,

    /// Lambda grid as "lower:upper:n"
    #[arg(long, value_name = "LO:HI:N", value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<(f64, f64, usize)>,

    /// Number of 2-point subsamples per lambda
    #[arg(long, default_value_t = 500)]
    n_resample: usize,

    /// Weights below this are set to zero
    #[arg(long, default_value_t = 0.04)]
    minw: f64,

    /// Quadrature size of the one-step J matrix
    #[arg(long, default_value_t = 1000)]
    nexp: usize,

    /// One-step multiplier
    #[arg(long, default_value_t = 1.0)]
    step: f64,

    /// M-scale tuning constant c1
    #[arg(long, default_value_t = 1.548)]
    tuning_rho: f64,

    /// Efficiency tuning constant c2
    #[arg(long, default_value_t = 6.08)]
    tuning_psi: f64,

    /// Iteration cap for IRWLS / weighted scoring
    #[arg(long, default_value_t = 100)]
    max_it: usize,

    /// Parameter-change convergence tolerance
    #[arg(long, default_value_t = 1e-7)]
    refine_tol: f64,

    /// Mixture size K of the smoothed model density
    #[arg(long, default_value_t = 100)]
    subdivisions: usize,

    /// Optional per-observation weights file (methods QTau / WQTau only)
    #[arg(long, value_name = "FILE")]
    weights: Option<PathBuf>,

    /// Confidence level for intervals
    #[arg(long, default_value_t = 0.95)]
    level: f64,

    /// Summary quantile probabilities, comma separated
    #[arg(long, default_value = "0.9,0.95,0.99", value_parser = parse_probs)]
    probs: Probs,

    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone)]
struct Probs(Vec<f64>);

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    control: ControlArgs,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    control: ControlArgs,

    /// Null value for the location parameter
    #[arg(long, value_name = "MU0", allow_negative_numbers = true)]
    mu: Option<f64>,

    /// Null value for the scale parameter
    #[arg(long, value_name = "SIGMA0", allow_negative_numbers = true)]
    sigma: Option<f64>,

    /// Null value for the shape parameter
    #[arg(long, value_name = "LAMBDA0", allow_negative_numbers = true)]
    lambda: Option<f64>,

    /// Run the weighted Wilks test of sigma = lambda instead of a Wald test
    #[arg(long)]
    wilks: bool,
}

#[derive(Args, Debug)]
struct QqArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    control: ControlArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Location parameter
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
    /// Scale parameter
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Shape parameter
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Sample size
    #[arg(long, short)]
    n: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Contamination fraction in [0, 0.5)
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Additive shift applied to the contaminated block
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    shift: f64,
    /// Output file (stdout when omitted)
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s).ok_or_else(|| {
        format!("unknown method '{s}' (expected one of: oneWL, WQTau, WL, QTau, ML)")
    })
}

fn parse_raf(s: &str) -> std::result::Result<RafChoice, String> {
    RafChoice::parse(s).ok_or_else(|| format!("unknown RAF '{s}' (ned, gkl, pwd, hd, schi2)"))
}

fn parse_theta(s: &str) -> std::result::Result<Theta, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected 'mu,sigma,lambda', got '{s}'"));
    }
    let vals: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}: '{p}'")))
        .collect::<std::result::Result<_, _>>()?;
    Theta::new(vals[0], vals[1], vals[2]).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected 'lower:upper:n', got '{s}'"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    let n: usize = parts[2].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi, n))
}

fn parse_probs(s: &str) -> std::result::Result<Probs, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}: '{p}'")))
        .collect::<std::result::Result<_, _>>()?;
    if v.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err("probabilities must lie in (0,1)".into());
    }
    Ok(Probs(v))
}

impl ControlArgs {
    fn to_control(&self) -> Control {
        let mut c = Control {
            seed: self.seed,
            raf: self.raf,
            raf_tau: self.raf_tau,
            bw: self.bw,
            n_resample: self.n_resample,
            minw: self.minw,
            nexp: self.nexp,
            step: self.step,
            tuning_rho: self.tuning_rho,
            tuning_psi: self.tuning_psi,
            max_it: self.max_it,
            refine_tol: self.refine_tol,
            subdivisions: self.subdivisions,
            ..Control::default()
        };
        if let Some((lo, hi, n)) = self.grid {
            c.lower = lo;
            c.upper = hi;
            c.grid_n = n;
        }
        c
    }
}

// ---------------------------------------------------------------------------
// input handling
// ---------------------------------------------------------------------------

fn read_raw(input: &Option<PathBuf>) -> Result<String> {
    match input {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::Input(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

/// Parses newline-delimited numbers, skipping '#' comments and blank lines.
/// Reports 1-based line numbers on failure.
pub fn parse_data(raw: &str, column: Option<usize>, log_transform: bool) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let field = match column {
            Some(k) => {
                if k == 0 {
                    return Err(Error::Usage("--column is 1-based".into()));
                }
                trimmed.split(',').nth(k - 1).ok_or_else(|| {
                    Error::Input(format!("line {lineno}: no column {k} in '{trimmed}'"))
                })?
            }
            None => trimmed,
        };
        let v: f64 = field.trim().parse().map_err(|_| {
            Error::Input(format!(
                "line {lineno}: cannot parse '{}' as a number",
                field.trim()
            ))
        })?;
        if !v.is_finite() {
            return Err(Error::Input(format!("line {lineno}: non-finite value {v}")));
        }
        if log_transform {
            if v <= 0.0 {
                return Err(Error::Input(format!(
                    "line {lineno}: --log requires positive values, got {v}"
                )));
            }
            out.push(v.ln());
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

fn read_data(args: &InputArgs) -> Result<Vec<f64>> {
    let raw = read_raw(&args.input)?;
    let data = parse_data(&raw, args.column, args.log)?;
    if data.len() < 5 {
        return Err(Error::Input(format!(
            "need at least 5 observations, parsed {}",
            data.len()
        )));
    }
    Ok(data)
}

fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_data(&raw, None, false)
}

// ---------------------------------------------------------------------------
// fit pipeline
// ---------------------------------------------------------------------------

/// Runs the requested method with the documented default chaining: without
/// explicit starting values, QTau and WQTau are run in series to provide
/// them.
pub fn fit_pipeline(
    y: &[f64],
    method: Method,
    start: Option<Theta>,
    weights: Option<&[f64]>,
    control: &Control,
) -> Result<FitResult> {
    if weights.is_some() && !matches!(method, Method::QTau | Method::WQTau) {
        return Err(Error::Usage(
            "--weights applies to methods QTau and WQTau only".into(),
        ));
    }
    match method {
        Method::QTau => qtau_fit(y, control, weights),
        Method::WQTau => {
            let base = match start {
                Some(t) => {
                    let mut sorted = y.to_vec();
                    sorted.sort_by(f64::total_cmp);
                    let n = sorted.len();
                    FitResult::new(t, vec![1.0; n], 0, Method::QTau, sorted, true)
                }
                None => qtau_fit(y, control, weights)?,
            };
            wqtau_fit(y, &base, control)
        }
        Method::Ml | Method::Wl | Method::OneWl => {
            let start_theta = match start {
                Some(t) => t,
                None => {
                    let q = qtau_fit(y, control, weights)?;
                    wqtau_fit(y, &q, control)?.theta
                }
            };
            match method {
                Method::Ml => ml_fit(y, &start_theta),
                Method::Wl => fiwl_fit(y, &start_theta, control),
                Method::OneWl => oneswl_fit(y, &start_theta, control),
                _ => unreachable!(),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Serialized fit output: the fitted components plus the Wald summary block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitReport {
    pub schema: u32,
    pub method: Method,
    pub n: usize,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub eta: Option<f64>,
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub data: Vec<f64>,
    /// Absent when the weighted information is singular (e.g. gross outliers
    /// under a weights-are-one method).
    pub summary: Option<SummaryReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SummaryReport {
    pub conf_level: f64,
    pub se: [f64; 3],
    pub param_ci: [[f64; 2]; 3],
    pub eta_se: Option<f64>,
    pub eta_ci: Option<[f64; 2]>,
    pub quantiles: Vec<QuantileReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QuantileReport {
    pub p: f64,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FitReport {
    fn build(fit: &FitResult, summary: Option<&FitSummary>) -> Self {
        FitReport {
            schema: 1,
            method: fit.method,
            n: fit.n(),
            mu: fit.theta.mu(),
            sigma: fit.theta.sigma(),
            lambda: fit.theta.lambda(),
            eta: fit.eta,
            weights: fit.weights.clone(),
            iterations: fit.iterations,
            converged: fit.converged,
            data: fit.data_sorted.clone(),
            summary: summary.map(|summary| SummaryReport {
                conf_level: summary.conf_level,
                se: summary.se,
                param_ci: [
                    [summary.param_cis[0].0, summary.param_cis[0].1],
                    [summary.param_cis[1].0, summary.param_cis[1].1],
                    [summary.param_cis[2].0, summary.param_cis[2].1],
                ],
                eta_se: summary.eta_se,
                eta_ci: summary.eta_ci.map(|(a, b)| [a, b]),
                quantiles: summary
                    .quantile_cis
                    .iter()
                    .map(|q| QuantileReport {
                        p: q.p,
                        estimate: q.estimate,
                        se: q.se,
                        lower: q.lower,
                        upper: q.upper,
                    })
                    .collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TestReport {
    pub schema: u32,
    pub test: String,
    pub method: Method,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub conf_int: Option<[f64; 2]>,
    pub null_mu: Option<f64>,
    pub null_sigma: Option<f64>,
    pub null_lambda: Option<f64>,
    pub estimates: [f64; 3],
}

/// Rounds to four significant digits, the register of the reference output.
fn signif4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    if x.abs() < 1e-4 {
        return format!("{x:.4e}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (3 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // trim trailing zeros but keep at least one digit
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn format_fit_text(report: &FitReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("Method:  {}\n\n", report.method));
    out.push_str(&format!(
        "Location:  {}  Scale:  {}  Shape:  {}  E(exp(X)):  {}\n\n",
        signif4(report.mu),
        signif4(report.sigma),
        signif4(report.lambda),
        report.eta.map_or("undefined".into(), signif4),
    ));
    let Some(s) = &report.summary else {
        out.push_str("(confidence intervals unavailable: weighted information is singular)\n\n");
        out.push_str(&weights_block(&report.weights));
        return out;
    };
    let level_pct = s.conf_level * 100.0;
    let names = ["Location", "Scale", "Shape"];
    let est = [report.mu, report.sigma, report.lambda];
    for k in 0..3 {
        out.push_str(&format!(
            "{}:  {} s.e.  {}\n( {} ,  {} )\n{} percent confidence interval\n\n",
            names[k],
            signif4(est[k]),
            signif4(s.se[k]),
            signif4(s.param_ci[k][0]),
            signif4(s.param_ci[k][1]),
            signif4(level_pct)
        ));
    }
    if let (Some(eta), Some(eta_se), Some(ci)) = (report.eta, s.eta_se, s.eta_ci) {
        out.push_str(&format!(
            "Mean(exp(X)):  {} s.e.  {}\n( {} ,  {} )\n{} percent confidence interval\n\n",
            signif4(eta),
            signif4(eta_se),
            signif4(ci[0]),
            signif4(ci[1]),
            signif4(level_pct)
        ));
    }
    for q in &s.quantiles {
        out.push_str(&format!(
            "Quantile of order  {} :  {} s.e.  {}\n( {} ,  {} )\n{} percent confidence interval\n\n",
            q.p,
            signif4(q.estimate),
            signif4(q.se),
            signif4(q.lower),
            signif4(q.upper),
            signif4(level_pct)
        ));
    }
    out.push_str(&weights_block(&report.weights));
    out
}

fn weights_block(weights: &[f64]) -> String {
    let near_one: Vec<f64> = weights.iter().copied().filter(|w| *w > 0.999).collect();
    let mut rest: Vec<f64> = weights.iter().copied().filter(|w| *w <= 0.999).collect();
    let mut out = String::from("Robustness weights:\n");
    if rest.is_empty() {
        out.push_str(&format!(" all {} weights are ~= 1\n", weights.len()));
        return out;
    }
    rest.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let k = ((rest.len() as f64 - 1.0) * p).round() as usize;
        rest[k]
    };
    let mean = rest.iter().sum::<f64>() / rest.len() as f64;
    out.push_str(&format!(
        " {} weights are ~= 1. The remaining {} ones are summarized as\n",
        near_one.len(),
        rest.len()
    ));
    out.push_str("   Min. 1st Qu.  Median    Mean 3rd Qu.    Max.\n");
    out.push_str(&format!(
        " {} {} {} {} {} {}\n",
        signif4(rest[0]),
        signif4(q(0.25)),
        signif4(q(0.5)),
        signif4(mean),
        signif4(q(0.75)),
        signif4(rest[rest.len() - 1])
    ));
    out
}

fn format_test_text(report: &TestReport, level: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("\t{} based on {}\n\n", report.test, report.method));
    out.push_str(&format!(
        "ww = {}, df = {}, p-value = {}\n",
        signif4(report.statistic),
        report.df,
        signif4(report.p_value)
    ));
    if report.test.contains("Wilks") {
        out.push_str("alternative hypothesis: sigma is not equal to lambda\n");
        if let (Some(m0), Some(s0)) = (report.null_mu, report.null_sigma) {
            out.push_str(&format!(
                "null estimates: mu0 = {}, sigma0 = lambda0 = {}\n",
                signif4(m0),
                signif4(s0)
            ));
        }
    } else {
        let mut alts = Vec::new();
        if let Some(v) = report.null_mu {
            alts.push(format!("true location is not equal to {}", signif4(v)));
        }
        if let Some(v) = report.null_sigma {
            alts.push(format!("true scale is not equal to {}", signif4(v)));
        }
        if let Some(v) = report.null_lambda {
            alts.push(format!("true shape is not equal to {}", signif4(v)));
        }
        out.push_str(&format!("alternative hypothesis: {}\n", alts.join(" and ")));
    }
    if let Some(ci) = report.conf_int {
        out.push_str(&format!(
            "{} percent confidence interval:\n {:.8} {:.8}\n",
            signif4(level * 100.0),
            ci[0],
            ci[1]
        ));
    }
    out.push_str(&format!(
        "sample estimates (mu, sigma, lambda):\n {} {} {}\n",
        signif4(report.estimates[0]),
        signif4(report.estimates[1]),
        signif4(report.estimates[2])
    ));
    out
}

// ---------------------------------------------------------------------------
// subcommand drivers
// ---------------------------------------------------------------------------

fn run_fit(args: &FitArgs) -> Result<String> {
    let y = read_data(&args.input)?;
    let control = args.control.to_control();
    control.validate()?;
    let weights = match &args.control.weights {
        Some(p) => Some(read_weights(p)?),
        None => None,
    };
    let fit = fit_pipeline(
        &y,
        args.control.method,
        args.control.start,
        weights.as_deref(),
        &control,
    )?;
    let summary = summarize(&fit, &args.control.probs.0, args.control.level).ok();
    let report = FitReport::build(&fit, summary.as_ref());
    if args.control.json {
        Ok(serde_json::to_string_pretty(&report).expect("report serialization") + "\n")
    } else {
        Ok(format_fit_text(&report))
    }
}

fn run_test(args: &TestArgs) -> Result<String> {
    let y = read_data(&args.input)?;
    let control = args.control.to_control();
    control.validate()?;
    if !args.wilks && args.mu.is_none() && args.sigma.is_none() && args.lambda.is_none() {
        return Err(Error::Usage(
            "test needs --wilks or at least one of --mu/--sigma/--lambda".into(),
        ));
    }
    let weights = match &args.control.weights {
        Some(p) => Some(read_weights(p)?),
        None => None,
    };
    let fit = fit_pipeline(
        &y,
        args.control.method,
        args.control.start,
        weights.as_deref(),
        &control,
    )?;

    let (name, result): (String, TestResult) = if args.wilks {
        let r = weighted_wilks_test(&y, &fit, &control, WilksWeights::Unconstrained)?;
        ("Weighted Wilks Test (sigma = lambda)".into(), r)
    } else {
        let spec = NullSpec {
            mu: args.mu,
            sigma: args.sigma,
            lambda: args.lambda,
        };
        let r = weighted_wald_test(&fit, &spec, args.control.level)?;
        ("Weighted Wald Test".into(), r)
    };

    let report = TestReport {
        schema: 1,
        test: name,
        method: fit.method,
        statistic: result.statistic,
        df: result.df,
        p_value: result.p_value,
        conf_int: result.conf_int.map(|(a, b)| [a, b]),
        null_mu: if args.wilks {
            result.null_theta.map(|t| t.mu())
        } else {
            args.mu
        },
        null_sigma: if args.wilks {
            result.null_theta.map(|t| t.sigma())
        } else {
            args.sigma
        },
        null_lambda: if args.wilks { None } else { args.lambda },
        estimates: fit.theta.as_array(),
    };
    if args.control.json {
        Ok(serde_json::to_string_pretty(&report).expect("report serialization") + "\n")
    } else {
        Ok(format_test_text(&report, args.control.level))
    }
}

fn run_qq(args: &QqArgs) -> Result<String> {
    let y = read_data(&args.input)?;
    let control = args.control.to_control();
    control.validate()?;
    let weights = match &args.control.weights {
        Some(p) => Some(read_weights(p)?),
        None => None,
    };
    let fit = fit_pipeline(
        &y,
        args.control.method,
        args.control.start,
        weights.as_deref(),
        &control,
    )?;
    // pointwise delta-method bands at the requested level (0.90 by default
    // in the reference workflow; --level sets it)
    let n = fit.n();
    let probs: Vec<f64> = (1..=n).map(|j| (j as f64 - 0.5) / n as f64).collect();
    let summary = summarize(&fit, &probs, args.control.level)?;
    let mut out = String::from("theoretical_q,empirical_q,lower,upper,weight\n");
    for (j, q) in summary.quantile_cis.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            q.estimate, fit.data_sorted[j], q.lower, q.upper, fit.weights[j]
        ));
    }
    Ok(out)
}

fn run_simulate(args: &SimulateArgs) -> Result<String> {
    if !(0.0..0.5).contains(&args.eps) {
        return Err(Error::Usage(format!(
            "contamination fraction must lie in [0, 0.5), got {}",
            args.eps
        )));
    }
    if args.n == 0 {
        return Err(Error::Usage("sample size must be positive".into()));
    }
    let theta =
        Theta::new(args.mu, args.sigma, args.lambda).map_err(|e| Error::Usage(e.to_string()))?;
    let mut y = sample(args.n, &theta, args.seed);
    let k = (args.eps * args.n as f64).floor() as usize;
    for v in y.iter_mut().take(k) {
        *v += args.shift;
    }
    let mut out = format!(
        "# loggamma sample: mu={} sigma={} lambda={} n={} seed={} eps={} shift={}\n",
        args.mu, args.sigma, args.lambda, args.n, args.seed, args.eps, args.shift
    );
    for v in &y {
        out.push_str(&format!("{v}\n"));
    }
    Ok(out)
}

/// Maps an error to the documented exit code.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) => 2,
        Error::Usage(_) => 4,
        _ => 3,
    }
}

/// Entry point used by the binary: parses arguments, runs the subcommand,
/// prints the output, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match CliArgs::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 4,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Test(a) => run_test(a),
        Command::Qq(a) => run_qq(a),
        Command::Simulate(a) => match run_simulate(a) {
            Ok(text) => {
                if let Some(path) = &a.output {
                    match std::fs::write(path, &text) {
                        Ok(()) => Ok(String::new()),
                        Err(e) => Err(Error::Input(format!(
                            "cannot write {}: {e}",
                            path.display()
                        ))),
                    }
                } else {
                    Ok(text)
                }
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
