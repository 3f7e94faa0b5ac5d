//! Global polynomial collocation at Gauss points.
//!
//! The solution is represented by its values at the `N + 1` Gauss nodes of
//! `[0, 1]` and evaluated through the barycentric form. Collocating at node
//! `t_i` turns the equation into a dense nonlinear system: the integral over
//! `[0, t_i]` is discretized by an inner Gauss rule whose abscissae read the
//! current iterate through interpolation. Picard sweeps handle the
//! contractive regime; a damped Newton iteration with a finite-difference
//! Jacobian takes over when the sweeps stop contracting.

use crate::error::{Error, Result};
use crate::interp::BarycentricPolynomial;
use crate::problem::Problem;
use crate::quadrature::gauss_rule;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    /// Polynomial degree; the solver collocates at `degree + 1` nodes.
    pub degree: usize,
    /// Points of the inner rule discretizing each `[0, t_i]`. Defaults to
    /// `degree + 1` so the inner rule keeps pace with the unknowns.
    pub inner_points: Option<usize>,
    /// Absolute tolerance on the sup norm of the collocation residual.
    pub tol: f64,
    /// Budget of Picard sweeps plus Newton steps.
    pub max_iter: usize,
}

impl SpectralConfig {
    pub fn new(degree: usize) -> Self {
        SpectralConfig {
            degree,
            inner_points: None,
            tol: 1e-13,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralSolution {
    polynomial: BarycentricPolynomial,
    /// Picard sweeps plus Newton steps spent.
    pub iterations: usize,
    /// Sup norm of the final collocation residual.
    pub max_residual: f64,
    /// Whether the floor clamp on the nonlinearity fired in the final sweep.
    pub clamped: bool,
}

impl SpectralSolution {
    /// Evaluate the collocation polynomial. The representation is only
    /// trustworthy on the solve interval, so points outside error out.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return Err(Error::Domain(format!(
                "evaluation point {t} lies outside [0, 1]"
            )));
        }
        Ok(self.polynomial.eval(t.clamp(0.0, 1.0)))
    }

    pub fn nodes(&self) -> &[f64] {
        self.polynomial.nodes()
    }

    pub fn node_values(&self) -> &[f64] {
        self.polynomial.values()
    }

    pub fn polynomial(&self) -> &BarycentricPolynomial {
        &self.polynomial
    }
}

/// Weighted discrete inner product `sum_i x_i y_i w_i`.
pub fn discrete_inner(x: &[f64], y: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(Error::Domain(format!(
            "inner product needs equal lengths, got {} / {} / {}",
            x.len(),
            y.len(),
            w.len()
        )));
    }
    Ok(x.iter().zip(y).zip(w).map(|((a, b), c)| a * b * c).sum())
}

/// Picard sweeps that stop contracting before this many steps hand the
/// iteration to Newton.
const PICARD_PATIENCE: usize = 5;

struct CollocationSystem<'a> {
    problem: &'a Problem,
    nodes: Vec<f64>,
    forcing: Vec<f64>,
    /// Inner abscissae, row-major: `points[i][q]` lies in `[0, nodes[i]]`.
    points: Vec<Vec<f64>>,
    /// Inner weights matching `points`.
    weights: Vec<Vec<f64>>,
    /// Kernel values `G(t_i, points[i][q])`.
    kernel: Vec<Vec<f64>>,
    /// Interpolation matrix rows: `interp[i][q][j]` maps node values to the
    /// iterate at `points[i][q]`.
    interp: Vec<Vec<Vec<f64>>>,
}

impl<'a> CollocationSystem<'a> {
    fn build(problem: &'a Problem, config: &SpectralConfig) -> Result<Self> {
        let n = config.degree + 1;
        let outer = gauss_rule(n, 0.0, 1.0)?;
        let nodes = outer.nodes;
        let m = config.inner_points.unwrap_or(n);
        if m == 0 {
            return Err(Error::Domain("inner rule needs at least one point".into()));
        }
        let shape = BarycentricPolynomial::new(nodes.clone(), vec![0.0; n])?;

        let forcing: Vec<f64> = nodes.iter().map(|&t| problem.g(t)).collect::<Result<_>>()?;

        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut kernel = Vec::with_capacity(n);
        let mut interp = Vec::with_capacity(n);
        for &t in &nodes {
            let rule = gauss_rule(m, 0.0, t)?;
            let k: Vec<f64> = rule.nodes.iter().map(|&s| problem.kernel(t, s)).collect();
            let rows: Vec<Vec<f64>> = rule
                .nodes
                .iter()
                .map(|&s| shape.cardinal_row(s))
                .collect();
            points.push(rule.nodes);
            weights.push(rule.weights);
            kernel.push(k);
            interp.push(rows);
        }

        Ok(CollocationSystem {
            problem,
            nodes,
            forcing,
            points,
            weights,
            kernel,
            interp,
        })
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    /// The collocation map `F(v)_i = g(t_i) + sum_q w_q G f(s_q, x_v(s_q))`.
    fn apply(&self, v: &[f64], clamped: &mut bool) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mut acc = self.forcing[i];
            for q in 0..self.points[i].len() {
                let s = self.points[i][q];
                let xs: f64 = self.interp[i][q]
                    .iter()
                    .zip(v)
                    .map(|(c, val)| c * val)
                    .sum();
                let (fx, hit) = self.problem.f_guarded(s, xs);
                *clamped |= hit;
                acc += self.weights[i][q] * self.kernel[i][q] * fx;
            }
            if !acc.is_finite() {
                return Err(Error::NonFinite {
                    point: self.nodes[i],
                    context: "spectral collocation sweep".into(),
                });
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Residual `v - F(v)` and its sup norm.
    fn residual(&self, v: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut ignore = false;
        let fv = self.apply(v, &mut ignore)?;
        let r: Vec<f64> = v.iter().zip(&fv).map(|(a, b)| a - b).collect();
        let norm = r.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        Ok((r, norm))
    }
}

pub fn solve_spectral(problem: &Problem, config: &SpectralConfig) -> Result<SpectralSolution> {
    if config.degree == 0 {
        return Err(Error::Domain("need polynomial degree >= 1".into()));
    }
    if !(config.tol > 0.0) || config.max_iter == 0 {
        return Err(Error::Domain(
            "tolerance must be positive and the iteration budget nonzero".into(),
        ));
    }
    let system = CollocationSystem::build(problem, config)?;
    let n = system.len();

    let mut v = system.forcing.clone();
    let mut iterations = 0usize;
    let mut history = Vec::new();
    let mut newton = false;
    let mut stalls = 0usize;

    loop {
        let (r, norm) = system.residual(&v)?;
        if norm <= config.tol {
            let mut clamped = false;
            let _ = system.apply(&v, &mut clamped)?;
            let polynomial = BarycentricPolynomial::new(system.nodes.clone(), v)?;
            return Ok(SpectralSolution {
                polynomial,
                iterations,
                max_residual: norm,
                clamped,
            });
        }
        if iterations >= config.max_iter {
            return Err(Error::SpectralConvergence {
                residual: norm,
                history,
            });
        }
        if let Some(&prev) = history.last() {
            if norm >= 0.9 * prev {
                stalls += 1;
                if stalls >= PICARD_PATIENCE {
                    newton = true;
                }
            }
        }
        history.push(norm);

        if newton {
            let jac = jacobian(&system, &v, &r)?;
            let lu = jac.lu();
            let step = lu
                .solve(&DVector::from_column_slice(&r))
                .ok_or_else(|| Error::SpectralConvergence {
                    residual: norm,
                    history: history.clone(),
                })?;
            // Backtrack until the residual drops; a zero-length step means
            // the iteration has genuinely stalled.
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-6 {
                let trial: Vec<f64> = (0..n).map(|i| v[i] - lambda * step[i]).collect();
                let (_, trial_norm) = system.residual(&trial)?;
                if trial_norm < norm {
                    v = trial;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::SpectralConvergence {
                    residual: norm,
                    history,
                });
            }
        } else {
            let mut ignore = false;
            v = system.apply(&v, &mut ignore)?;
        }
        iterations += 1;
    }
}

/// Forward-difference Jacobian of the residual map at `v`.
fn jacobian(system: &CollocationSystem, v: &[f64], r0: &[f64]) -> Result<DMatrix<f64>> {
    let n = v.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut bumped = v.to_vec();
    for j in 0..n {
        let delta = 1e-7 * v[j].abs().max(1.0);
        bumped[j] = v[j] + delta;
        let (rj, _) = system.residual(&bumped)?;
        bumped[j] = v[j];
        for i in 0..n {
            jac[(i, j)] = (rj[i] - r0[i]) / delta;
        }
    }
    Ok(jac)
}
