//! Problem definitions for the equation
//!
//! ```text
//!     x(t) = integral_0^t G(t, s) f(s, x(s)) ds + g(t),    t in [0, 1],
//! ```
//!
//! together with the integral operator itself, a small registry of named
//! instances, and a solvability check based on growth data for `G` and `f`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holder::{Beta, HolderParams};
use crate::quadrature::{gauss_rule, trapezoid};

type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Dyadic panel depth for whole-interval quadrature: panels shrink toward
/// the left endpoint until they fall below one ulp of the interval.
const DYADIC_DEPTH: i32 = 52;

/// How integrals of the data are evaluated outside the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadPolicy {
    /// Uniform trapezoid sums with the given panel count.
    Trapezoid { panels: usize },
    /// Gauss rules of the given order on dyadic panels clustering at the
    /// lower endpoint, which absorbs integrable endpoint singularities.
    Gauss { order: usize },
}

impl Default for QuadPolicy {
    fn default() -> Self {
        QuadPolicy::Gauss { order: 20 }
    }
}

/// Growth and smoothness data used by the solvability check:
/// `|G| <= m_g`, `|G(t, s) - G(t', s)| <= k_g rho(|t - t'|)`,
/// `|f(s, 0)| <= m_f`, and `|f(s, x) - f(s, 0)| <= phi(|x|)` with `phi`
/// nondecreasing and vanishing at zero.
#[derive(Clone)]
pub struct RegularityMeta {
    pub m_g: f64,
    pub k_g: f64,
    pub rho: Fn1,
    pub m_f: f64,
    pub phi: Fn1,
    /// Constant of a linear envelope `phi(u) <= L u`, when one exists.
    pub lipschitz: Option<f64>,
}

impl std::fmt::Debug for RegularityMeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegularityMeta")
            .field("m_g", &self.m_g)
            .field("k_g", &self.k_g)
            .field("m_f", &self.m_f)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
enum Forcing {
    Closed(Fn1),
    /// `g = exact - integral of f along exact` under the stored policy;
    /// needs the exact solution.
    Manufactured(QuadPolicy),
}

/// One instance of the integral equation.
#[derive(Clone)]
pub struct Problem {
    name: String,
    description: String,
    kernel: Fn2,
    nonlinearity: Fn2,
    forcing: Forcing,
    exact: Option<Fn1>,
    floor: Option<f64>,
    meta: Option<RegularityMeta>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

pub struct ProblemBuilder {
    name: String,
    description: String,
    kernel: Option<Fn2>,
    nonlinearity: Option<Fn2>,
    forcing: Option<Forcing>,
    exact: Option<Fn1>,
    floor: Option<f64>,
    meta: Option<RegularityMeta>,
}

impl Problem {
    pub fn builder(name: impl Into<String>) -> ProblemBuilder {
        ProblemBuilder {
            name: name.into(),
            description: String::new(),
            kernel: None,
            nonlinearity: None,
            forcing: None,
            exact: None,
            floor: None,
            meta: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        (self.kernel)(t, s)
    }

    /// The nonlinearity, with the state clamped to the problem's floor so
    /// transient iterates cannot step outside the domain of `f` (for
    /// instance a negative square-root argument). Inactive at solutions.
    pub fn f(&self, s: f64, x: f64) -> f64 {
        let xc = match self.floor {
            Some(m) => x.max(m),
            None => x,
        };
        (self.nonlinearity)(s, xc)
    }

    pub fn floor(&self) -> Option<f64> {
        self.floor
    }

    pub fn exact_at(&self, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|f| f(t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn meta(&self) -> Option<&RegularityMeta> {
        self.meta.as_ref()
    }

    /// The forcing term `g(t)`. Manufactured forcing evaluates
    /// `exact(t) - integral_0^t G f(s, exact(s)) ds` with the policy fixed
    /// when the forcing was manufactured.
    pub fn g(&self, t: f64) -> Result<f64> {
        match &self.forcing {
            Forcing::Closed(g) => Ok(g(t)),
            Forcing::Manufactured(quad) => {
                let exact = self.exact.as_ref().expect("checked at build time").clone();
                let integral = volterra_integral(self, &move |s| exact(s), t, quad)?;
                Ok(self.exact_at(t).expect("checked at build time") - integral)
            }
        }
    }

    /// The nonlinearity together with a flag recording whether the floor
    /// clamp fired, for domain-guard diagnostics.
    pub fn f_guarded(&self, s: f64, x: f64) -> (f64, bool) {
        let clamped = self.floor.is_some_and(|m| x < m);
        (self.f(s, x), clamped)
    }
}

impl ProblemBuilder {
    pub fn description(mut self, text: impl Into<String>) -> Self {
        self.description = text.into();
        self
    }

    pub fn kernel(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.kernel = Some(Arc::new(g));
        self
    }

    pub fn nonlinearity(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.nonlinearity = Some(Arc::new(f));
        self
    }

    pub fn forcing(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Forcing::Closed(Arc::new(g)));
        self
    }

    pub fn forcing_zero(self) -> Self {
        self.forcing(|_| 0.0)
    }

    /// Derive the forcing from the exact solution: `g = x - integral term`
    /// evaluated under the given policy.
    pub fn forcing_manufactured(mut self, quad: QuadPolicy) -> Self {
        self.forcing = Some(Forcing::Manufactured(quad));
        self
    }

    pub fn exact(mut self, x: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(x));
        self
    }

    /// Clamp the state argument of `f` from below.
    pub fn floor(mut self, m: f64) -> Self {
        self.floor = Some(m);
        self
    }

    pub fn meta(mut self, meta: RegularityMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn build(self) -> Result<Problem> {
        let kernel = self
            .kernel
            .ok_or_else(|| Error::Config(format!("problem '{}' has no kernel", self.name)))?;
        let nonlinearity = self.nonlinearity.ok_or_else(|| {
            Error::Config(format!("problem '{}' has no nonlinearity", self.name))
        })?;
        let forcing = self
            .forcing
            .ok_or_else(|| Error::Config(format!("problem '{}' has no forcing", self.name)))?;
        if matches!(forcing, Forcing::Manufactured(_)) && self.exact.is_none() {
            return Err(Error::Config(format!(
                "problem '{}' manufactures its forcing but has no exact solution",
                self.name
            )));
        }
        Ok(Problem {
            name: self.name,
            description: self.description,
            kernel,
            nonlinearity,
            forcing,
            exact: self.exact,
            floor: self.floor,
            meta: self.meta,
        })
    }
}

/// `integral_0^t G(t, s) f(s, x(s)) ds` under the given policy.
pub fn volterra_integral(
    problem: &Problem,
    x: &dyn Fn(f64) -> f64,
    t: f64,
    quad: &QuadPolicy,
) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("upper limit t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrand = |s: f64| problem.kernel(t, s) * problem.f(s, x(s));
    match *quad {
        QuadPolicy::Trapezoid { panels } => trapezoid(0.0, t, integrand, panels),
        QuadPolicy::Gauss { order } => {
            let base = gauss_rule(order, 0.0, 1.0)?;
            let mut total = 0.0;
            // Smallest panels first; the last panel reaches t exactly.
            for k in (0..=DYADIC_DEPTH).rev() {
                let hi = t * 0.5f64.powi(k);
                let lo = if k == DYADIC_DEPTH { 0.0 } else { 0.5 * hi };
                let rule = base.mapped_to(lo, hi)?;
                for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let v = integrand(s);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            point: s,
                            context: format!(
                                "integrand of problem '{}' at t = {t}",
                                problem.name
                            ),
                        });
                    }
                    total += w * v;
                }
            }
            Ok(total)
        }
    }
}

/// The full operator `(T x)(t) = integral term + g(t)`.
pub fn apply_t(
    problem: &Problem,
    x: &dyn Fn(f64) -> f64,
    t: f64,
    quad: &QuadPolicy,
) -> Result<f64> {
    Ok(volterra_integral(problem, x, t, quad)? + problem.g(t)?)
}

/// A copy of the problem whose forcing is rebuilt from its exact solution,
/// so that solution solves the returned problem by construction.
pub fn manufacture_g(problem: &Problem, quad: QuadPolicy) -> Result<Problem> {
    if !problem.has_exact() {
        return Err(Error::Config(format!(
            "problem '{}' has no exact solution to manufacture from",
            problem.name()
        )));
    }
    let mut copy = problem.clone();
    copy.forcing = Forcing::Manufactured(quad);
    Ok(copy)
}

/// Named problems available out of the box.
pub fn registry() -> Vec<Problem> {
    vec![capillary(), holder_cusp(), log_solution(), smooth_exp()]
}

pub fn problem_names() -> Vec<String> {
    registry().into_iter().map(|p| p.name).collect()
}

pub fn by_name(name: &str) -> Result<Problem> {
    registry()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownProblem {
            name: name.to_string(),
            available: problem_names().join(", "),
        })
}

fn capillary() -> Problem {
    Problem::builder("capillary")
        .description(
            "Capillary rise: kernel 1 - exp(-(t - s)), nonlinearity 1 - sqrt(2x), zero forcing.",
        )
        .kernel(|t, s| 1.0 - (-(t - s)).exp())
        .nonlinearity(|_s, x| 1.0 - (2.0 * x).sqrt())
        .forcing_zero()
        .floor(0.0)
        .meta(RegularityMeta {
            m_g: 1.0,
            k_g: 1.0,
            rho: Arc::new(|sigma| sigma),
            m_f: 1.0,
            phi: Arc::new(|u| (2.0 * u).sqrt()),
            lipschitz: None,
        })
        .build()
        .expect("registry problem is complete")
}

fn holder_cusp() -> Problem {
    let exact = |t: f64| (0.5 - (t - 0.5).abs()).max(0.0).sqrt();
    Problem::builder("holder-cusp")
        .description(
            "Square-root cusp at both endpoints and the midpoint: constant kernel, \
             nonlinearity 1 + sqrt(x), forcing fitted to exact sqrt(1/2 - |t - 1/2|).",
        )
        .kernel(|_t, _s| 1.0)
        .nonlinearity(|_s, x| 1.0 + x.sqrt())
        .forcing(|t| {
            // Antiderivatives of 1 + exact(s)^(1/2) on the two halves.
            if t <= 0.5 {
                t.sqrt() - t - 0.8 * t.powf(1.25)
            } else {
                let tail = 1.0 - t;
                tail.sqrt() - t - 1.6 * 0.5f64.powf(1.25) + 0.8 * tail.powf(1.25)
            }
        })
        .exact(exact)
        .floor(0.0)
        .meta(RegularityMeta {
            m_g: 1.0,
            k_g: 0.0,
            rho: Arc::new(|sigma| sigma),
            m_f: 1.0,
            phi: Arc::new(|u| u.sqrt()),
            lipschitz: None,
        })
        .build()
        .expect("registry problem is complete")
}

fn log_solution() -> Problem {
    // 1/(1 - ln t) extends continuously by 0 at t = 0; IEEE evaluates the
    // limit directly. The modulus decays like 1/|ln sigma|, slower than any
    // power, so this solution escapes every space the toolkit measures.
    let exact = |t: f64| 1.0 / (1.0 - t.ln());
    Problem::builder("log")
        .description(
            "Logarithmically slow modulus: kernel t - s, nonlinearity 1 + exp(-x), \
             forcing manufactured from exact 1/(1 - ln t).",
        )
        .kernel(|t, s| t - s)
        .nonlinearity(|_s, x| 1.0 + (-x).exp())
        .forcing_manufactured(QuadPolicy::default())
        .exact(exact)
        .meta(RegularityMeta {
            m_g: 1.0,
            k_g: 1.0,
            rho: Arc::new(|sigma| sigma),
            m_f: 2.0,
            // |exp(-x) - 1| reaches exp(|x|) - 1 on the negative side.
            phi: Arc::new(f64::exp_m1),
            lipschitz: None,
        })
        .build()
        .expect("registry problem is complete")
}

fn smooth_exp() -> Problem {
    Problem::builder("smooth-exp")
        .description(
            "Smooth benchmark: kernel exp(t - s), nonlinearity 1 + x, zero forcing, \
             exact (exp(2t) - 1)/2.",
        )
        .kernel(|t, s| (t - s).exp())
        .nonlinearity(|_s, x| 1.0 + x)
        .forcing_zero()
        .exact(|t| 0.5 * ((2.0 * t).exp() - 1.0))
        .meta(RegularityMeta {
            m_g: std::f64::consts::E,
            k_g: std::f64::consts::E,
            rho: Arc::new(|sigma| sigma),
            m_f: 1.0,
            phi: Arc::new(|u| u),
            lipschitz: Some(1.0),
        })
        .build()
        .expect("registry problem is complete")
}

/// Checks the declared growth data against samples of the actual kernel
/// and nonlinearity.
pub fn validate_meta(problem: &Problem) -> Result<()> {
    let meta = problem
        .meta()
        .ok_or_else(|| Error::Config(format!("problem '{}' has no growth data", problem.name())))?;
    let grid = 40usize;
    let pt = |i: usize| i as f64 / grid as f64;
    let slack = 1.0 + 1e-9;
    for i in 0..=grid {
        let t = pt(i);
        for j in 0..=i {
            let s = pt(j);
            let gv = problem.kernel(t, s).abs();
            if gv > meta.m_g * slack {
                return Err(Error::Domain(format!(
                    "|G({t}, {s})| = {gv} exceeds declared bound {}",
                    meta.m_g
                )));
            }
        }
    }
    for i in 0..=grid {
        let s = pt(i);
        for j in i..=grid {
            let t1 = pt(j);
            for k in j..=grid {
                let t2 = pt(k);
                let dev = (problem.kernel(t2, s) - problem.kernel(t1, s)).abs();
                let allowed = meta.k_g * (meta.rho)(t2 - t1);
                if dev > allowed * slack + 1e-14 {
                    return Err(Error::Domain(format!(
                        "kernel varies by {dev} between t = {t1} and {t2} at s = {s}, \
                         declared bound allows {allowed}"
                    )));
                }
            }
        }
        let base = problem.f(s, 0.0);
        if base.abs() > meta.m_f * slack {
            return Err(Error::Domain(format!(
                "|f({s}, 0)| = {} exceeds declared bound {}",
                base.abs(),
                meta.m_f
            )));
        }
        for k in 0..=grid {
            let x = problem.floor().unwrap_or(-2.0) + 4.0 * k as f64 / grid as f64;
            let dev = (problem.f(s, x) - base).abs();
            let allowed = (meta.phi)(x.abs());
            if dev > allowed * slack + 1e-14 {
                return Err(Error::Domain(format!(
                    "|f({s}, {x}) - f({s}, 0)| = {dev} exceeds phi(|x|) = {allowed}"
                )));
            }
        }
    }
    // Shape conditions on the moduli themselves.
    let mut prev_rho = 0.0;
    let mut prev_phi = 0.0;
    for k in 1..=grid {
        let u = k as f64 / grid as f64;
        let r = (meta.rho)(u);
        let p = (meta.phi)(u);
        if r < prev_rho - 1e-14 || p < prev_phi - 1e-14 {
            return Err(Error::Domain(
                "rho and phi must be nondecreasing".into(),
            ));
        }
        prev_rho = r;
        prev_phi = p;
    }
    if (meta.phi)(0.0).abs() > 1e-12 {
        return Err(Error::Domain("phi must vanish at zero".into()));
    }
    Ok(())
}

/// The growth integral `I = integral_0^1 sigma^-(beta+1)
/// (k_g rho(sigma) + sigma m_g)^(beta/alpha) d sigma`, evaluated over
/// dyadic panels toward zero until the tail is negligible. Detects
/// divergence by panels that stop shrinking.
pub fn growth_integral(meta: &RegularityMeta, p: &HolderParams) -> Result<f64> {
    let beta = match p.beta() {
        Beta::Finite(b) => b,
        Beta::Infinite => {
            return Err(Error::Unsupported(
                "the solvability check needs finite beta".into(),
            ))
        }
    };
    let alpha = p.alpha();
    // 20 points per panel: the integrand is a frozen power of sigma times
    // the growth data, and fractional powers need the headroom on the
    // panels nearest 1.
    let base = gauss_rule(20, 0.0, 1.0)?;
    let mut total = 0.0;
    let mut prev_panel = f64::INFINITY;
    for k in 0..4096 {
        let hi = 0.5f64.powi(k);
        let lo = 0.5 * hi;
        let rule = base.mapped_to(lo, hi)?;
        let mut panel = 0.0;
        for (&sigma, &w) in rule.nodes.iter().zip(&rule.weights) {
            let core = meta.k_g * (meta.rho)(sigma) + sigma * meta.m_g;
            if core < 0.0 || !core.is_finite() {
                return Err(Error::Domain(format!(
                    "growth kernel is {core} at sigma = {sigma}"
                )));
            }
            if core > 0.0 {
                panel += w * sigma.powf(-(beta + 1.0)) * core.powf(beta / alpha);
            }
        }
        total += panel;
        if k >= 8 && panel <= 1e-16 * total {
            return Ok(total);
        }
        if k >= 64 && panel >= prev_panel * (1.0 - 1e-6) {
            return Err(Error::Divergent(format!(
                "growth integral does not settle: panel {k} contributes {panel} \
                 after a running total of {total}"
            )));
        }
        prev_panel = panel;
    }
    Err(Error::Divergent(
        "growth integral tail did not settle within 4096 dyadic panels".into(),
    ))
}

/// Solvability margin at radius `r0`:
/// `r0 - (phi(r0) + m_f) * I^(alpha/beta)`. Positive means the growth
/// condition admits a solution within the ball of radius `r0`.
pub fn existence_margin(meta: &RegularityMeta, p: &HolderParams, r0: f64) -> Result<f64> {
    if !r0.is_finite() || r0 <= 0.0 {
        return Err(Error::Domain(format!("radius r0 = {r0} must be positive")));
    }
    let beta = match p.beta() {
        Beta::Finite(b) => b,
        Beta::Infinite => {
            return Err(Error::Unsupported(
                "the solvability check needs finite beta".into(),
            ))
        }
    };
    let i = growth_integral(meta, p)?;
    Ok(r0 - ((meta.phi)(r0) + meta.m_f) * i.powf(p.alpha() / beta))
}

/// Smallest radius where the margin crosses from negative to positive,
/// found by a geometric scan over [1e-8, 1e8] and bisection to ten digits.
/// `None` when the margin never changes sign there.
pub fn find_r0(meta: &RegularityMeta, p: &HolderParams) -> Result<Option<f64>> {
    let margin = |r: f64| existence_margin(meta, p, r);
    let mut lo = 1e-8;
    let mut m_lo = margin(lo)?;
    let ratio = 10f64.powf(0.25);
    let mut hi = lo;
    let mut bracket = None;
    while hi < 1e8 {
        hi *= ratio;
        let m_hi = margin(hi)?;
        if m_lo < 0.0 && m_hi >= 0.0 {
            bracket = Some((lo, hi));
            break;
        }
        lo = hi;
        m_lo = m_hi;
    }
    let (mut a, mut b) = match bracket {
        Some(pair) => pair,
        None => return Ok(None),
    };
    while b - a > 1e-10 * b {
        let mid = 0.5 * (a + b);
        if margin(mid)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
