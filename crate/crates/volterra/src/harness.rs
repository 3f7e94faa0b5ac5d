//! Experiment drivers shared by the command line and the test suite:
//! convergence studies with order estimation, solvability reports, and
//! interpolation-bound tables, rendered to CSV or JSON.

use crate::error::{Error, Result};
use crate::holder::{Beta, HolderParams, SampledFunction};
use crate::interp::{interp_error_bound, interp_linear, Mesh};
use crate::problem::{
    existence_margin, find_r0, growth_integral, Problem, QuadPolicy, RegularityMeta,
};
use crate::quadrature::gauss_rule;
use crate::solver::linear::{solve_linear, LinearConfig};
use crate::solver::spectral::{solve_spectral, SpectralConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Linear,
    Spectral,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Linear => write!(f, "linear"),
            Method::Spectral => write!(f, "spectral"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub method: Method,
    /// Mesh cells for the linear method, polynomial degrees for spectral.
    pub resolutions: Vec<usize>,
    /// Cell rule of the linear method; ignored by spectral runs.
    pub cell_quad: QuadPolicy,
    /// Inner rule size of the spectral method; `None` tracks the degree.
    pub inner_points: Option<usize>,
    /// Absolute residual tolerance; `None` picks the method default.
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Uniform probe points for sup and L2 error measurement.
    pub probes: usize,
}

impl ExperimentConfig {
    pub fn new(method: Method, resolutions: Vec<usize>) -> Self {
        ExperimentConfig {
            method,
            resolutions,
            cell_quad: QuadPolicy::Trapezoid { panels: 1 },
            inner_points: None,
            tol: None,
            max_iter: match method {
                Method::Linear => 100,
                Method::Spectral => 200,
            },
            probes: 200,
        }
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(match self.method {
            Method::Linear => 1e-12,
            Method::Spectral => 1e-13,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.resolutions.is_empty() {
            return Err(Error::Config("no resolutions requested".into()));
        }
        if self.resolutions[0] == 0 {
            return Err(Error::Config("resolutions must be at least 1".into()));
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "resolutions must be strictly increasing".into(),
            ));
        }
        if self.probes < 2 {
            return Err(Error::Config("need at least two probe points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Mesh width for the linear method, the degree itself for spectral.
    pub h_or_degree: f64,
    pub err_sup: Option<f64>,
    pub err_l2: Option<f64>,
    pub iters: Option<usize>,
    pub seconds: f64,
    /// `None` when the solve succeeded, otherwise the failure rendered.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub method: Method,
    /// Library version, echoed so archived reports identify their producer.
    pub version: String,
    /// The configuration that produced the rows.
    pub config: ExperimentConfig,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of log error against log h over the finest half
    /// of the rows; linear method only, needs at least three error rows.
    pub observed_order: Option<f64>,
    /// Row-to-row error improvement factors; spectral method only.
    pub decay_factors: Vec<f64>,
    pub all_converged: bool,
}

pub const CSV_HEADER: &str = "method,problem,N,h_or_degree,err_sup,err_l2,iters,seconds";

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl ConvergenceReport {
    /// Deterministic CSV rendering. Wall-clock seconds are deliberately
    /// left empty so identical runs produce identical bytes; timings live
    /// in the JSON rendering.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let h_or_degree = match self.method {
                Method::Linear => fmt_float(row.h_or_degree),
                Method::Spectral => format!("{}", row.n),
            };
            let err_sup = row.err_sup.map(fmt_float).unwrap_or_default();
            let err_l2 = row.err_l2.map(fmt_float).unwrap_or_default();
            let iters = row.iters.map(|i| i.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},\n",
                self.method, self.problem, row.n, h_or_degree, err_sup, err_l2, iters
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One parsed line of the CSV rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub method: String,
    pub problem: String,
    pub n: usize,
    pub h_or_degree: f64,
    pub err_sup: Option<f64>,
    pub err_l2: Option<f64>,
    pub iters: Option<usize>,
    pub seconds: Option<f64>,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "unexpected CSV header: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Config(format!(
                "line {}: expected 8 fields, found {}",
                k + 2,
                fields.len()
            )));
        }
        let opt_f64 = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse::<f64>()
                    .map(Some)
                    .map_err(|e| Error::Config(format!("line {}: {e}", k + 2)))
            }
        };
        rows.push(CsvRow {
            method: fields[0].to_string(),
            problem: fields[1].to_string(),
            n: fields[2]
                .parse()
                .map_err(|e| Error::Config(format!("line {}: {e}", k + 2)))?,
            h_or_degree: fields[3]
                .parse()
                .map_err(|e| Error::Config(format!("line {}: {e}", k + 2)))?,
            err_sup: opt_f64(fields[4])?,
            err_l2: opt_f64(fields[5])?,
            iters: opt_f64(fields[6])?.map(|v| v as usize),
            seconds: opt_f64(fields[7])?,
        });
    }
    Ok(rows)
}

/// Run the configured solver at every resolution and measure errors
/// against the exact solution. Failures at one resolution keep their row,
/// flagged, without aborting the others.
pub fn run_convergence(problem: &Problem, config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if !problem.has_exact() {
        return Err(Error::Config(format!(
            "problem '{}' has no exact solution to measure against",
            problem.name()
        )));
    }

    let rows: Vec<ConvergenceRow> = config
        .resolutions
        .par_iter()
        .map(|&n| run_single(problem, config, n))
        .collect();

    let observed_order = match config.method {
        Method::Linear => fit_order(&rows),
        Method::Spectral => None,
    };
    let decay_factors = match config.method {
        Method::Spectral => decay(&rows),
        Method::Linear => Vec::new(),
    };
    let all_converged = rows.iter().all(|r| r.failure.is_none());

    Ok(ConvergenceReport {
        problem: problem.name().to_string(),
        method: config.method,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        rows,
        observed_order,
        decay_factors,
        all_converged,
    })
}

fn run_single(problem: &Problem, config: &ExperimentConfig, n: usize) -> ConvergenceRow {
    let start = Instant::now();
    let exact = |t: f64| problem.exact_at(t).expect("checked by run_convergence");
    let outcome: Result<(f64, f64, usize)> = match config.method {
        Method::Linear => {
            let solver = LinearConfig {
                n,
                cell_quad: config.cell_quad,
                tol: config.tol(),
                max_iter: config.max_iter,
            };
            solve_linear(problem, &solver).and_then(|sol| {
                // Nodal sup error: the convergence statement for the
                // marching scheme concerns the collocation nodes, and
                // between-node interpolation error would otherwise drown
                // the nodal rate for low-regularity solutions.
                let mesh = sol.interpolant.mesh();
                let err_sup = (0..=n)
                    .map(|i| (sol.node_values()[i] - exact(mesh.node(i))).abs())
                    .fold(0.0f64, f64::max);
                let err_l2 = l2_error(&|t| sol.eval(t), &exact, config.probes)?;
                Ok((err_sup, err_l2, sol.iterations))
            })
        }
        Method::Spectral => {
            let solver = SpectralConfig {
                degree: n,
                inner_points: config.inner_points,
                tol: config.tol(),
                max_iter: config.max_iter,
            };
            solve_spectral(problem, &solver).and_then(|sol| {
                let mut err_sup = 0.0f64;
                for k in 0..=config.probes {
                    let t = k as f64 / config.probes as f64;
                    err_sup = err_sup.max((sol.eval(t)? - exact(t)).abs());
                }
                for &t in sol.nodes() {
                    err_sup = err_sup.max((sol.eval(t)? - exact(t)).abs());
                }
                let err_l2 = l2_error(&|t| sol.eval(t).expect("probe inside [0, 1]"), &exact, config.probes)?;
                Ok((err_sup, err_l2, sol.iterations))
            })
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let h_or_degree = match config.method {
        Method::Linear => 1.0 / n as f64,
        Method::Spectral => n as f64,
    };
    match outcome {
        Ok((err_sup, err_l2, iters)) => ConvergenceRow {
            n,
            h_or_degree,
            err_sup: Some(err_sup),
            err_l2: Some(err_l2),
            iters: Some(iters),
            seconds,
            failure: None,
        },
        Err(e) => ConvergenceRow {
            n,
            h_or_degree,
            err_sup: None,
            err_l2: None,
            iters: None,
            seconds,
            failure: Some(e.to_string()),
        },
    }
}

/// L2 distance of two functions on [0, 1]: 64-point Gauss on each panel of
/// the uniform probe partition.
fn l2_error(
    approx: &dyn Fn(f64) -> f64,
    exact: &dyn Fn(f64) -> f64,
    probes: usize,
) -> Result<f64> {
    let unit = gauss_rule(64, 0.0, 1.0)?;
    let mut total = 0.0;
    for k in 0..probes {
        let a = k as f64 / probes as f64;
        let b = (k + 1) as f64 / probes as f64;
        let rule = unit.mapped_to(a, b)?;
        for (node, weight) in rule.nodes.iter().zip(&rule.weights) {
            let d = approx(*node) - exact(*node);
            total += weight * d * d;
        }
    }
    Ok(total.sqrt())
}

/// Least-squares slope of log error versus log h over the finest half of
/// the converged rows, at least three of them.
fn fit_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.err_sup.map(|e| (r.h_or_degree, e)))
        .filter(|&(_, e)| e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if points.len() < 3 {
        return None;
    }
    let take = (points.len() + 1) / 2;
    let tail = &points[points.len() - take.max(3)..];
    let m = tail.len() as f64;
    let (sx, sy): (f64, f64) = tail.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in tail {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

fn decay(rows: &[ConvergenceRow]) -> Vec<f64> {
    let errs: Vec<f64> = rows.iter().filter_map(|r| r.err_sup).collect();
    errs.windows(2).map(|w| w[0] / w[1]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExistenceStatus {
    /// A radius with positive margin exists.
    Satisfiable,
    /// The growth integral is finite but the margin never turns positive.
    NotSatisfiable,
    /// The growth integral diverges for these parameters.
    Divergent,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceReport {
    pub alpha: f64,
    pub beta: f64,
    pub status: ExistenceStatus,
    /// The growth integral I.
    pub integral: Option<f64>,
    /// I^(alpha/beta), the factor multiplying the nonlinearity envelope.
    pub integral_factor: Option<f64>,
    /// Its reciprocal, the threshold a normalized envelope must stay under.
    pub inverse_factor: Option<f64>,
    /// Smallest radius with nonnegative margin, when one exists.
    pub r0: Option<f64>,
    /// Margin at twice that radius, a measure of slack.
    pub margin_at_2r0: Option<f64>,
}

impl ExistenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("alpha = {}, beta = {}\n", self.alpha, self.beta);
        match self.status {
            ExistenceStatus::Divergent => {
                out.push_str("growth integral diverges: condition not applicable\n");
            }
            _ => {
                out.push_str(&format!(
                    "growth integral   I = {:.12e}\nintegral factor     = {:.12e}\ninverse factor      = {:.12e}\n",
                    self.integral.unwrap_or(f64::NAN),
                    self.integral_factor.unwrap_or(f64::NAN),
                    self.inverse_factor.unwrap_or(f64::NAN),
                ));
                match self.r0 {
                    Some(r0) => out.push_str(&format!(
                        "condition satisfiable: r0 = {:.12e}, margin at 2 r0 = {:.12e}\n",
                        r0,
                        self.margin_at_2r0.unwrap_or(f64::NAN)
                    )),
                    None => out.push_str("condition not satisfiable: no radius crosses the margin\n"),
                }
            }
        }
        out
    }
}

/// Evaluate the solvability condition for the given growth data.
pub fn run_existence(meta: &RegularityMeta, params: &HolderParams) -> Result<ExistenceReport> {
    let beta = match params.beta() {
        Beta::Finite(b) => b,
        Beta::Infinite => {
            return Err(Error::Unsupported(
                "the solvability check needs finite beta".into(),
            ))
        }
    };
    let alpha = params.alpha();
    let integral = match growth_integral(meta, params) {
        Ok(i) => i,
        Err(Error::Divergent(_)) => {
            return Ok(ExistenceReport {
                alpha,
                beta,
                status: ExistenceStatus::Divergent,
                integral: None,
                integral_factor: None,
                inverse_factor: None,
                r0: None,
                margin_at_2r0: None,
            })
        }
        Err(e) => return Err(e),
    };
    let factor = integral.powf(alpha / beta);
    let r0 = find_r0(meta, params)?;
    let margin_at_2r0 = match r0 {
        Some(r) => Some(existence_margin(meta, params, 2.0 * r)?),
        None => None,
    };
    Ok(ExistenceReport {
        alpha,
        beta,
        status: if r0.is_some() {
            ExistenceStatus::Satisfiable
        } else {
            ExistenceStatus::NotSatisfiable
        },
        integral: Some(integral),
        integral_factor: Some(factor),
        inverse_factor: Some(1.0 / factor),
        r0,
        margin_at_2r0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpBoundRow {
    pub h: f64,
    pub measured: f64,
    pub bound: f64,
    /// measured / bound; at most 1 up to sampling slack.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpBoundReport {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub samples: usize,
    pub rows: Vec<InterpBoundRow>,
}

impl InterpBoundReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("h,measured,bound,ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:.6e},{:.12e},{:.12e},{:.6}\n",
                row.h, row.measured, row.bound, row.ratio
            ));
        }
        out
    }
}

/// Compare measured piecewise-linear interpolation errors against the
/// modulus-based bound on a dense sample of the function.
pub fn run_interp_bound(
    f: &dyn Fn(f64) -> f64,
    params: &HolderParams,
    hs: &[f64],
    samples: usize,
) -> Result<InterpBoundReport> {
    if hs.is_empty() {
        return Err(Error::Config("no mesh widths requested".into()));
    }
    let sample = SampledFunction::from_fn(0.0, 1.0, samples, f)?;
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        if !(0.0..=1.0).contains(&h) || h <= 0.0 {
            return Err(Error::Domain(format!("mesh width {h} outside (0, 1]")));
        }
        let n = (1.0 / h).round() as usize;
        let mesh = Mesh::uniform(0.0, 1.0, n)?;
        let xh = interp_linear(f, &mesh)?;
        let grid = sample.values();
        let m = grid.len() - 1;
        let mut measured = 0.0f64;
        for (j, &v) in grid.iter().enumerate() {
            let t = j as f64 / m as f64;
            measured = measured.max((v - xh.eval(t)).abs());
        }
        let bound = interp_error_bound(&sample, params, h)?;
        rows.push(InterpBoundRow {
            h,
            measured,
            bound,
            ratio: measured / bound,
        });
    }
    Ok(InterpBoundReport {
        alpha: params.alpha(),
        beta: match params.beta() {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        },
        samples,
        rows,
    })
}
