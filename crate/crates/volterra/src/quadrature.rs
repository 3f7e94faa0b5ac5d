//! Gauss-Legendre and composite trapezoid rules on finite intervals.
//!
//! Rules are built once and reused: nodes come from Newton iteration on the
//! Legendre recurrence seeded with Chebyshev guesses, weights from the
//! standard `2 / ((1 - x^2) P_m'(x)^2)` formula on [-1, 1], then both are
//! mapped affinely onto the requested interval.

use crate::error::{Error, Result};

/// Newton step tolerance for Legendre root polishing.
const ROOT_TOL: f64 = 1e-15;
/// Iteration cap for a single root; hitting it is an internal failure.
const ROOT_MAX_ITER: usize = 100;

/// A fixed quadrature rule on `[a, b]`: paired nodes and weights.
///
/// Nodes are strictly increasing and lie in the open interval; weights are
/// positive and sum to `b - a`. A degenerate interval (`a == b`) is stored
/// as the empty rule, which integrates everything to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Reseats the rule on `[c, d]` by the affine map that carries
    /// `[a, b]` onto it, rescaling weights by `(d - c) / (b - a)`.
    pub fn mapped_to(&self, c: f64, d: f64) -> Result<QuadratureRule> {
        if !(c.is_finite() && d.is_finite()) || c > d {
            return Err(Error::Domain(format!(
                "cannot map rule onto [{c}, {d}]; need finite c <= d"
            )));
        }
        if self.is_empty() || c == d {
            return Ok(QuadratureRule {
                nodes: Vec::new(),
                weights: Vec::new(),
                a: c,
                b: d,
            });
        }
        let scale = (d - c) / (self.b - self.a);
        Ok(QuadratureRule {
            nodes: self.nodes.iter().map(|&x| c + (x - self.a) * scale).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
            a: c,
            b: d,
        })
    }
}

/// Evaluates the Legendre polynomial `P_n` and its derivative at `t` by the
/// three-term recurrence `(k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}` together
/// with `P'_{k+1} = P'_{k-1} + (2k+1) P_k`.
pub fn legendre_eval(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut dp_prev) = (1.0, 0.0);
    let (mut p, mut dp) = (t, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
    }
    (p, dp)
}

/// Builds the `m`-point Gauss-Legendre rule on `[a, b]`.
///
/// `a == b` yields the empty rule (the zero functional). Each root of `P_m`
/// is polished by Newton iteration from the Chebyshev guess
/// `cos(pi (4i + 3) / (4m + 2))` until the step falls below 1e-15.
pub fn gauss_rule(m: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::Domain("gauss rule needs at least one point".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!(
            "gauss rule interval [{a}, {b}] must be finite with a <= b"
        )));
    }
    if a == b {
        return Ok(QuadratureRule {
            nodes: Vec::new(),
            weights: Vec::new(),
            a,
            b,
        });
    }

    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        // Chebyshev guesses run from the largest root down, so fill from the back.
        let mut x = (std::f64::consts::PI * (4 * i + 3) as f64 / (4 * m + 2) as f64).cos();
        let mut converged = false;
        for _ in 0..ROOT_MAX_ITER {
            let (p, dp) = legendre_eval(m, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= ROOT_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootIteration {
                iterations: ROOT_MAX_ITER,
            });
        }
        let (_, dp) = legendre_eval(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = w;
    }

    // Affine map [-1, 1] -> [a, b].
    let half = 0.5 * (b - a);
    for i in 0..m {
        nodes[i] = a + half * (nodes[i] + 1.0);
        weights[i] *= half;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        a,
        b,
    })
}

/// Applies a rule to an integrand. Any non-finite integrand value aborts
/// with the offending node in the error.
pub fn integrate(rule: &QuadratureRule, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                point: x,
                context: "integrand".into(),
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Composite trapezoid rule with `panels` equal panels on `[a, b]`.
/// A degenerate interval integrates to zero.
pub fn trapezoid(a: f64, b: f64, f: impl Fn(f64) -> f64, panels: usize) -> Result<f64> {
    if panels == 0 {
        return Err(Error::Domain("trapezoid needs at least one panel".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::Domain(format!(
            "trapezoid interval [{a}, {b}] must be finite with a <= b"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let h = (b - a) / panels as f64;
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                point: x,
                context: "integrand".into(),
            })
        }
    };
    let mut acc = 0.5 * (eval(a)? + eval(b)?);
    for i in 1..panels {
        acc += eval(a + h * i as f64)?;
    }
    Ok(acc * h)
}
