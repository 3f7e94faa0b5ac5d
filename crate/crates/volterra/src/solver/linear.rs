//! Piecewise-linear collocation by forward marching.
//!
//! On a uniform mesh the collocation conditions at the nodes decouple into
//! one scalar equation per node: everything left of the current cell is
//! already known, so node `n` solves
//!
//! ```text
//!     u = g(t_n) + sum_{j < n-1} cell_j(t_n) + last_cell(t_n, u)
//! ```
//!
//! where `last_cell` integrates across `[t_{n-1}, t_n]` with the unknown
//! entering through the interpolant. Each scalar equation runs fixed-point
//! iteration and falls back to a finite-difference Newton step once the
//! residual grows twice.

use crate::error::{Error, Result};
use crate::interp::{Mesh, PiecewiseLinearFunction};
use crate::problem::{Problem, QuadPolicy};
use crate::quadrature::gauss_rule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    /// Number of mesh cells.
    pub n: usize,
    /// Rule applied on each cell of the marching sums.
    pub cell_quad: QuadPolicy,
    /// Absolute tolerance on the scalar collocation residuals.
    pub tol: f64,
    /// Iteration budget per node.
    pub max_iter: usize,
}

impl LinearConfig {
    pub fn new(n: usize) -> Self {
        LinearConfig {
            n,
            cell_quad: QuadPolicy::Trapezoid { panels: 1 },
            tol: 1e-12,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub interpolant: PiecewiseLinearFunction,
    /// Nonlinear iterations summed over all nodes.
    pub iterations: usize,
    /// Largest fixed-point residual accepted at any node.
    pub max_residual: f64,
    /// Whether the floor clamp on the nonlinearity fired while finalizing
    /// the converged solution. A true value means the reported solution
    /// leaves the admissible domain of `f` between nodes.
    pub clamped: bool,
}

impl LinearSolution {
    pub fn eval(&self, t: f64) -> f64 {
        self.interpolant.eval(t)
    }

    pub fn node_values(&self) -> &[f64] {
        self.interpolant.values()
    }
}

/// Relative quadrature layout shared by every cell.
struct CellRule {
    /// Node positions within the unit cell.
    theta: Vec<f64>,
    /// Weights for the unit cell; scale by the cell width on use.
    weights: Vec<f64>,
}

fn cell_rule(policy: &QuadPolicy) -> Result<CellRule> {
    match *policy {
        QuadPolicy::Gauss { order } => {
            let rule = gauss_rule(order, 0.0, 1.0)?;
            Ok(CellRule {
                theta: rule.nodes,
                weights: rule.weights,
            })
        }
        QuadPolicy::Trapezoid { panels } => {
            if panels == 0 {
                return Err(Error::Domain("trapezoid rule needs panels >= 1".into()));
            }
            let theta: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
            let mut weights = vec![1.0 / panels as f64; panels + 1];
            weights[0] *= 0.5;
            weights[panels] *= 0.5;
            Ok(CellRule { theta, weights })
        }
    }
}

pub fn solve_linear(problem: &Problem, config: &LinearConfig) -> Result<LinearSolution> {
    if config.n == 0 {
        return Err(Error::Domain("need at least one mesh cell".into()));
    }
    if !(config.tol > 0.0) || config.max_iter == 0 {
        return Err(Error::Domain(
            "tolerance must be positive and the iteration budget nonzero".into(),
        ));
    }
    let mesh = Mesh::uniform(0.0, 1.0, config.n)?;
    let h = mesh.h();
    let rule = cell_rule(&config.cell_quad)?;
    let m = rule.theta.len();

    let forcing: Vec<f64> = (0..=config.n)
        .map(|i| problem.g(mesh.node(i)))
        .collect::<Result<_>>()?;

    // Quadrature abscissae per cell and the nonlinearity values at them,
    // filled in as cells are finalized. Kernel values depend on the row and
    // are recomputed, the `f` values do not.
    let mut points = vec![0.0f64; config.n * m];
    for j in 0..config.n {
        let left = mesh.node(j);
        for (q, &th) in rule.theta.iter().enumerate() {
            points[j * m + q] = left + h * th;
        }
    }
    let mut fvals = vec![0.0f64; config.n * m];

    let mut values = vec![0.0f64; config.n + 1];
    values[0] = forcing[0];
    if !values[0].is_finite() {
        return Err(Error::NonFinite {
            point: 0.0,
            context: "forcing at the left endpoint".into(),
        });
    }

    let mut total_iterations = 0usize;
    let mut max_residual = 0.0f64;
    let mut clamped = false;

    for n in 1..=config.n {
        let tn = mesh.node(n);
        // Fixed part: forcing plus all fully known cells.
        let mut c_n = forcing[n];
        for j in 0..n - 1 {
            let mut cell = 0.0;
            for q in 0..m {
                cell += rule.weights[q]
                    * problem.kernel(tn, points[j * m + q])
                    * fvals[j * m + q];
            }
            c_n += h * cell;
        }
        if !c_n.is_finite() {
            return Err(Error::NonFinite {
                point: tn,
                context: "accumulated history of the marching sum".into(),
            });
        }

        // Kernel values across the active cell, fixed for this row.
        let j = n - 1;
        let kernel_row: Vec<f64> = (0..m)
            .map(|q| problem.kernel(tn, points[j * m + q]))
            .collect();
        let x_left = values[n - 1];
        let phi = |u: f64| -> f64 {
            let mut acc = 0.0;
            for q in 0..m {
                let s = points[j * m + q];
                let xs = x_left * (1.0 - rule.theta[q]) + u * rule.theta[q];
                acc += rule.weights[q] * kernel_row[q] * problem.f(s, xs);
            }
            h * acc
        };

        let mut u = x_left;
        let mut newton = false;
        let mut rises = 0u32;
        let mut last_res = f64::INFINITY;
        let mut converged = false;
        for it in 1..=config.max_iter {
            let proposed = c_n + phi(u);
            let res = proposed - u;
            if !proposed.is_finite() {
                return Err(Error::NonFinite {
                    point: tn,
                    context: "scalar iteration".into(),
                });
            }
            if res.abs() <= config.tol {
                u = proposed;
                total_iterations += it;
                max_residual = max_residual.max(res.abs());
                converged = true;
                break;
            }
            if res.abs() > last_res {
                rises += 1;
                if rises >= 2 {
                    newton = true;
                }
            }
            last_res = res.abs();
            if newton {
                let delta = 1e-7 * u.abs().max(1.0);
                let res_shifted = c_n + phi(u + delta) - (u + delta);
                let slope = (res_shifted - res) / delta;
                if slope.abs() > 1e-14 {
                    u -= res / slope;
                } else {
                    u = proposed;
                }
            } else {
                u = proposed;
            }
        }
        if !converged {
            return Err(Error::NodeConvergence {
                node: n,
                residual: last_res,
                iterations: config.max_iter,
            });
        }

        values[n] = u;
        for q in 0..m {
            let s = points[j * m + q];
            let xs = x_left * (1.0 - rule.theta[q]) + u * rule.theta[q];
            let (fx, hit) = problem.f_guarded(s, xs);
            fvals[j * m + q] = fx;
            clamped |= hit;
        }
    }

    Ok(LinearSolution {
        interpolant: PiecewiseLinearFunction::new(mesh, values)?,
        iterations: total_iterations,
        max_residual,
        clamped,
    })
}

/// Collocation residuals of an approximation at the mesh nodes:
/// `x_h(t_n) - (T x_h)(t_n) - g(t_n)` with the integral evaluated by the
/// configured cell rule on the interpolant's own mesh.
pub fn residual(
    problem: &Problem,
    xh: &PiecewiseLinearFunction,
    config: &LinearConfig,
) -> Result<Vec<f64>> {
    let mesh = xh.mesh();
    let h = mesh.h();
    let rule = cell_rule(&config.cell_quad)?;
    let m = rule.theta.len();
    let values = xh.values();

    let mut fvals = vec![0.0f64; mesh.n() * m];
    let mut points = vec![0.0f64; mesh.n() * m];
    for j in 0..mesh.n() {
        let left = mesh.node(j);
        for (q, &th) in rule.theta.iter().enumerate() {
            let s = left + h * th;
            points[j * m + q] = s;
            let xs = values[j] * (1.0 - th) + values[j + 1] * th;
            fvals[j * m + q] = problem.f(s, xs);
        }
    }

    let mut out = Vec::with_capacity(mesh.n() + 1);
    out.push(values[0] - problem.g(mesh.node(0))?);
    for n in 1..=mesh.n() {
        let tn = mesh.node(n);
        let mut integral = 0.0;
        for j in 0..n {
            let mut cell = 0.0;
            for q in 0..m {
                cell += rule.weights[q]
                    * problem.kernel(tn, points[j * m + q])
                    * fvals[j * m + q];
            }
            integral += h * cell;
        }
        out.push(values[n] - integral - problem.g(tn)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{apply_t, by_name};
    use approx::assert_relative_eq;

    fn node_error(problem: &Problem, solution: &LinearSolution) -> f64 {
        let mesh = solution.interpolant.mesh();
        (0..=mesh.n())
            .map(|i| {
                let t = mesh.node(i);
                (solution.eval(t) - problem.exact_at(t).unwrap()).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn smooth_problem_converges_at_second_order() {
        let p = by_name("smooth-exp").unwrap();
        let coarse = solve_linear(&p, &LinearConfig::new(32)).unwrap();
        let fine = solve_linear(&p, &LinearConfig::new(64)).unwrap();
        let e32 = node_error(&p, &coarse);
        let e64 = node_error(&p, &fine);
        assert!(e64 < 2e-3, "error at N = 64 is {e64}");
        let ratio = e32 / e64;
        assert!(
            (3.0..5.0).contains(&ratio),
            "halving h should quarter the error, got ratio {ratio}"
        );
    }

    #[test]
    fn cusp_problem_converges_near_first_order_at_the_nodes() {
        let p = by_name("holder-cusp").unwrap();
        let e: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| node_error(&p, &solve_linear(&p, &LinearConfig::new(n)).unwrap()))
            .collect();
        for pair in e.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!(
                (1.6..3.0).contains(&ratio),
                "node errors {e:?} give ratio {ratio}"
            );
        }
    }

    #[test]
    fn capillary_solution_is_monotone_and_bounded() {
        let p = by_name("capillary").unwrap();
        let sol = solve_linear(&p, &LinearConfig::new(256)).unwrap();
        let v = sol.node_values();
        assert_eq!(v[0], 0.0);
        for w in v.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "solution must not decrease");
        }
        // The nonlinearity pins the range: f stays nonnegative until
        // x = 1/2, so the solution cannot overshoot it.
        assert!(v.iter().all(|&x| (0.0..0.5).contains(&x)));
    }

    #[test]
    fn capillary_solution_satisfies_the_equation() {
        let p = by_name("capillary").unwrap();
        let sol = solve_linear(&p, &LinearConfig::new(256)).unwrap();
        let quad = QuadPolicy::default();
        for t in [0.2, 0.5, 0.8, 1.0] {
            let lhs = sol.eval(t);
            let rhs = apply_t(&p, &|s| sol.eval(s), t, &quad).unwrap();
            // The gap is the h^2-scale difference between the cell rule
            // and the dyadic reference quadrature.
            assert_relative_eq!(lhs, rhs, max_relative = 5e-4, epsilon = 1e-5);
        }
    }

    #[test]
    fn refining_the_mesh_reproduces_coarse_nodes() {
        let p = by_name("smooth-exp").unwrap();
        let coarse = solve_linear(&p, &LinearConfig::new(128)).unwrap();
        let fine = solve_linear(&p, &LinearConfig::new(256)).unwrap();
        for i in 0..=128 {
            let t = i as f64 / 128.0;
            assert_relative_eq!(
                coarse.eval(t),
                fine.eval(t),
                max_relative = 1e-3,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn gauss_cells_march_at_the_same_order() {
        let p = by_name("smooth-exp").unwrap();
        let mut config = LinearConfig::new(64);
        config.cell_quad = QuadPolicy::Gauss { order: 4 };
        let gauss = node_error(&p, &solve_linear(&p, &config).unwrap());
        let trap = node_error(&p, &solve_linear(&p, &LinearConfig::new(64)).unwrap());
        // Both rules integrate the interpolant to O(h^2); the constants
        // differ but neither should leave the second-order regime.
        assert!(gauss < 5e-4, "gauss cells give error {gauss}");
        assert!(trap < 5e-4, "trapezoid cells give error {trap}");
    }

    #[test]
    fn solved_residuals_sit_below_the_tolerance() {
        let p = by_name("smooth-exp").unwrap();
        let config = LinearConfig::new(64);
        let sol = solve_linear(&p, &config).unwrap();
        let r = residual(&p, &sol.interpolant, &config).unwrap();
        assert_eq!(r.len(), 65);
        let max = r.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(max <= config.tol, "max residual {max} above {}", config.tol);
        assert!(!sol.clamped);
    }

    #[test]
    fn perturbing_a_node_shows_up_in_its_residual() {
        let p = by_name("smooth-exp").unwrap();
        let config = LinearConfig::new(64);
        let sol = solve_linear(&p, &config).unwrap();
        let mesh = sol.interpolant.mesh().clone();
        let mut values = sol.interpolant.values().to_vec();
        values[32] += 1e-3;
        let bumped = PiecewiseLinearFunction::new(mesh, values).unwrap();
        let r = residual(&p, &bumped, &config).unwrap();
        assert!(
            r[32].abs() > 1e-4,
            "residual at the bumped node is {}",
            r[32]
        );
    }

    #[test]
    fn unit_problem_marches_exactly() {
        // G = 1, f = 1, g = 0 integrates to x(t) = t regardless of the
        // cell rule, so both the solve and the residual should be exact.
        let p = Problem::builder("unit")
            .kernel(|_, _| 1.0)
            .nonlinearity(|_, _| 1.0)
            .forcing(|_| 0.0)
            .build()
            .unwrap();
        let config = LinearConfig::new(16);
        let sol = solve_linear(&p, &config).unwrap();
        let mesh = sol.interpolant.mesh();
        for i in 0..=16 {
            assert_relative_eq!(
                sol.node_values()[i],
                mesh.node(i),
                max_relative = 1e-14,
                epsilon = 1e-14
            );
        }
        let r = residual(&p, &sol.interpolant, &config).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-14), "{r:?}");
    }

    #[test]
    fn starved_iteration_budget_reports_the_node() {
        let p = by_name("capillary").unwrap();
        let mut config = LinearConfig::new(16);
        config.max_iter = 1;
        match solve_linear(&p, &config) {
            Err(Error::NodeConvergence { node, .. }) => assert!(node >= 1),
            other => panic!("expected a node convergence error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation_rejects_degenerate_input() {
        let p = by_name("smooth-exp").unwrap();
        assert!(solve_linear(&p, &LinearConfig::new(0)).is_err());
        let mut config = LinearConfig::new(8);
        config.tol = 0.0;
        assert!(solve_linear(&p, &config).is_err());
    }
}
