//! Integral Holder spaces over sampled functions.
//!
//! The seminorm of interest integrates a power of the modulus of continuity
//! against a singular weight,
//!
//! ```text
//!     j(x, [0, s]) = integral_0^s sigma^-(beta+1) * omega(x, sigma)^(beta/alpha) d sigma,
//! ```
//!
//! with the `beta = infinity` form `sup_sigma sigma^-alpha omega(x, sigma)`
//! recovering the classical Holder seminorm. Everything here works on a
//! uniformly sampled function: the empirical modulus is a lower
//! approximation of the true one, so seminorm values carry a sampling error
//! that shrinks with the grid. Integrals run over dyadic panels
//! `[s 2^-(k+1), s 2^-k]` and stop at the grid resolution, below which the
//! empirical modulus carries no information.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::quadrature::gauss_rule;

/// Points per dyadic panel when integrating the seminorm density.
const PANEL_GAUSS_POINTS: usize = 5;

/// Second exponent of the space: finite `beta >= alpha`, or the supremum
/// form `beta = infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

/// Exponent pair `(alpha, beta)` with `0 < alpha <= 1` and `beta >= alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderParams {
    alpha: f64,
    beta: Beta,
}

impl HolderParams {
    pub fn new(alpha: f64, beta: Beta) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(Error::Domain(format!(
                "alpha = {alpha} must lie in (0, 1]"
            )));
        }
        if let Beta::Finite(b) = beta {
            if !b.is_finite() || b < alpha {
                return Err(Error::Domain(format!(
                    "finite beta = {b} must satisfy beta >= alpha = {alpha}"
                )));
            }
        }
        Ok(HolderParams { alpha, beta })
    }

    pub fn finite(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, Beta::Finite(beta))
    }

    pub fn infinite(alpha: f64) -> Result<Self> {
        Self::new(alpha, Beta::Infinite)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }
}

/// A function known through `M + 1` equally spaced samples on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    a: f64,
    b: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    /// Wraps explicit samples; needs at least two finite values and `a < b`.
    pub fn new(a: f64, b: f64, values: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Domain(format!(
                "sample interval [{a}, {b}] must be finite with a < b"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Domain("need at least two samples".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample value {bad}")));
        }
        Ok(SampledFunction { a, b, values })
    }

    /// Samples `f` at the `m + 1` grid points of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("need at least one grid segment".into()));
        }
        let values = (0..=m)
            .map(|i| f(a + (b - a) * i as f64 / m as f64))
            .collect();
        Self::new(a, b, values)
    }

    /// Number of grid segments `M`.
    pub fn segments(&self) -> usize {
        self.values.len() - 1
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        self.a + (self.b - self.a) * i as f64 / self.segments() as f64
    }

    pub fn span(&self) -> f64 {
        self.b - self.a
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Empirical modulus of continuity: the largest `|x(t_i) - x(t_j)|` over
/// sample pairs with `|t_i - t_j| <= sigma`. A lower approximation of the
/// true modulus, exactly monotone in `sigma`.
///
/// Runs in O(M) with a sliding window: every admissible pair is covered by
/// comparing each right endpoint against the running window max and min.
pub fn modulus(x: &SampledFunction, sigma: f64) -> Result<f64> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Domain(format!("sigma = {sigma} must be positive")));
    }
    let v = &x.values;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut lo = 0usize;
    let mut best = 0.0f64;
    for j in 0..v.len() {
        let tj = x.grid_point(j);
        while lo < j && tj - x.grid_point(lo) > sigma {
            if maxq.front() == Some(&lo) {
                maxq.pop_front();
            }
            if minq.front() == Some(&lo) {
                minq.pop_front();
            }
            lo += 1;
        }
        if let Some(&i) = maxq.front() {
            best = best.max(v[i] - v[j]);
        }
        if let Some(&i) = minq.front() {
            best = best.max(v[j] - v[i]);
        }
        while maxq.back().is_some_and(|&k| v[k] <= v[j]) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&k| v[k] >= v[j]) {
            minq.pop_back();
        }
        minq.push_back(j);
    }
    Ok(best)
}

/// Truncation depth for dyadic panel sums: one panel per halving until the
/// grid resolution is reached.
fn panel_depth(x: &SampledFunction) -> usize {
    (x.segments() as f64).log2().ceil() as usize
}

/// The seminorm integral over `[0, s]` for finite `beta`, evaluated with
/// 5-point Gauss on each dyadic panel `[s 2^-(k+1), s 2^-k]`.
pub fn j_seminorm(x: &SampledFunction, p: &HolderParams, s: f64) -> Result<f64> {
    let beta = match p.beta {
        Beta::Finite(b) => b,
        Beta::Infinite => {
            return Err(Error::Unsupported(
                "j_seminorm needs finite beta; use j_sup for the supremum form".into(),
            ))
        }
    };
    if !s.is_finite() || s <= 0.0 || s > x.span() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "s = {s} must lie in (0, {}]",
            x.span()
        )));
    }
    let base = gauss_rule(PANEL_GAUSS_POINTS, 0.0, 1.0)?;
    let exponent = beta / p.alpha;
    let mut total = 0.0;
    // Smallest panels first so the accumulation order is fixed and benign.
    for k in (0..panel_depth(x)).rev() {
        let hi = s * 0.5f64.powi(k as i32);
        let lo = 0.5 * hi;
        let rule = base.mapped_to(lo, hi)?;
        for (&sig, &w) in rule.nodes.iter().zip(&rule.weights) {
            let om = modulus(x, sig)?;
            if om > 0.0 {
                total += w * sig.powf(-(beta + 1.0)) * om.powf(exponent);
            }
        }
    }
    Ok(total)
}

/// The `beta = infinity` seminorm: `max sigma^-alpha omega(x, sigma)` over
/// dyadic `sigma = span * 2^-k`, `k = 0 ..= ceil(log2 M)`.
pub fn j_sup(x: &SampledFunction, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in (0, 1]")));
    }
    let mut best = 0.0f64;
    for k in 0..=panel_depth(x) {
        let sigma = x.span() * 0.5f64.powi(k as i32);
        let om = modulus(x, sigma)?;
        best = best.max(sigma.powf(-alpha) * om);
    }
    Ok(best)
}

/// The space norm `|x(a)| + j(x, [0, span])^(alpha/beta)`, with `j_sup`
/// taking over in the `beta = infinity` case.
pub fn norm_alpha_beta(x: &SampledFunction, p: &HolderParams) -> Result<f64> {
    let head = x.values[0].abs();
    match p.beta {
        Beta::Finite(beta) => {
            Ok(head + j_seminorm(x, p, x.span())?.powf(p.alpha / beta))
        }
        Beta::Infinite => Ok(head + j_sup(x, p.alpha)?),
    }
}

/// The constant in front of the sup-norm bound.
///
/// Finite beta: `(beta / (2^beta - 1))^(alpha/beta)
/// * (1 - 2^-(beta / (beta/alpha - 1)))^-((beta - alpha)/beta)`,
/// evaluated partly in log space so large beta stays stable. `beta = alpha`
/// is the degenerate case of the exponent and gets its limiting value
/// `alpha / (2^alpha - 1)`; `beta = infinity` gives the limit
/// `1 / (2^alpha - 1)`.
pub fn sup_bound_constant(p: &HolderParams) -> f64 {
    let alpha = p.alpha;
    match p.beta {
        Beta::Infinite => 1.0 / (2.0f64.powf(alpha) - 1.0),
        Beta::Finite(beta) if beta == alpha => alpha / (2.0f64.powf(alpha) - 1.0),
        Beta::Finite(beta) => {
            // ln(2^beta - 1) = beta ln 2 + ln(1 - 2^-beta), stable for any beta.
            let ln_denom = beta * std::f64::consts::LN_2 + (-(2.0f64.powf(-beta))).ln_1p();
            let first = ((alpha / beta) * (beta.ln() - ln_denom)).exp();
            let e = beta / (beta / alpha - 1.0);
            let second = (1.0 - 2.0f64.powf(-e)).powf(-(beta - alpha) / beta);
            first * second
        }
    }
}

/// Sup-norm bound from the dyadic decomposition of `[0, t_span]`: for
/// finite beta `C(alpha, beta) * span^alpha * ||x||_{alpha,beta}`, for
/// `beta = infinity` `span^alpha / (2^alpha - 1) * j_sup`. Both dominate
/// the deviation `max |x - x(a)|` over the sample grid.
pub fn sup_norm_bound(x: &SampledFunction, p: &HolderParams, t_span: f64) -> Result<f64> {
    if (t_span - x.span()).abs() > 1e-12 * x.span() {
        return Err(Error::Domain(format!(
            "t_span = {t_span} does not match the sampled interval length {}",
            x.span()
        )));
    }
    let scale = t_span.powf(p.alpha);
    match p.beta {
        Beta::Finite(_) => Ok(sup_bound_constant(p) * scale * norm_alpha_beta(x, p)?),
        Beta::Infinite => {
            Ok(scale / (2.0f64.powf(p.alpha) - 1.0) * j_sup(x, p.alpha)?)
        }
    }
}
