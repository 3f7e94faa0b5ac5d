//! Inline problem definitions: a flat JSON document whose functions are
//! expression strings over `t`, `s`, and `x`.
//!
//! ```json
//! {
//!   "name": "my-problem",
//!   "G": "1 - exp(-(t - s))",
//!   "f": "1 - sqrt(2*x)",
//!   "g": "0",
//!   "exact": "t^2",
//!   "floor": 0.0,
//!   "meta": {
//!     "M_G": 1.0, "K_G": 1.0, "M_f": 1.0,
//!     "rho": "s", "phi": "sqrt(2*x)", "L": 1.0
//!   }
//! }
//! ```
//!
//! `g` is either an expression in `t` or the literal `"manufactured"`,
//! which requires `exact`. `rho` is an expression in `s` (the lag), `phi`
//! an expression in `x` (the magnitude).

use anyhow::{bail, Context};
use serde::Deserialize;
use std::path::Path;
use std::sync::Arc;
use volterra::expr::{parse, Bindings, Expr, Var};
use volterra::problem::{Problem, QuadPolicy, RegularityMeta};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(rename = "G")]
    pub kernel: String,
    pub f: String,
    pub g: String,
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub meta: Option<MetaFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaFile {
    #[serde(rename = "M_G")]
    pub m_g: f64,
    #[serde(rename = "K_G")]
    pub k_g: f64,
    #[serde(rename = "M_f")]
    pub m_f: f64,
    pub rho: String,
    pub phi: String,
    #[serde(rename = "L", default)]
    pub lipschitz: Option<f64>,
}

fn compile(source: &str, allowed: &[Var], what: &str) -> anyhow::Result<Expr> {
    let expr = parse(source).with_context(|| format!("parsing {what} expression"))?;
    for var in [Var::T, Var::S, Var::X] {
        if expr.uses(var) && !allowed.contains(&var) {
            bail!(
                "{what} expression {source:?} uses variable {var:?}, which it cannot depend on"
            );
        }
    }
    Ok(expr)
}

pub fn load_problem(path: &Path) -> anyhow::Result<Problem> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading problem file {}", path.display()))?;
    let file: ProblemFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    problem_from_file(&file)
}

pub fn problem_from_file(file: &ProblemFile) -> anyhow::Result<Problem> {
    let kernel = compile(&file.kernel, &[Var::T, Var::S], "kernel")?;
    let f = compile(&file.f, &[Var::S, Var::X], "nonlinearity")?;

    let mut builder = Problem::builder(&file.name)
        .kernel(move |t, s| kernel.eval(&Bindings::ts(t, s)).unwrap_or(f64::NAN))
        .nonlinearity(move |s, x| f.eval(&Bindings::sx(s, x)).unwrap_or(f64::NAN));

    if let Some(source) = &file.exact {
        let exact = compile(source, &[Var::T], "exact solution")?;
        builder = builder.exact(move |t| exact.eval(&Bindings::t(t)).unwrap_or(f64::NAN));
    }
    if file.g == "manufactured" {
        if file.exact.is_none() {
            bail!("manufactured forcing needs an exact solution");
        }
        builder = builder.forcing_manufactured(QuadPolicy::default());
    } else {
        let g = compile(&file.g, &[Var::T], "forcing")?;
        builder = builder.forcing(move |t| g.eval(&Bindings::t(t)).unwrap_or(f64::NAN));
    }
    if let Some(floor) = file.floor {
        builder = builder.floor(floor);
    }
    if let Some(meta) = &file.meta {
        let rho = compile(&meta.rho, &[Var::S], "rho")?;
        let phi = compile(&meta.phi, &[Var::X], "phi")?;
        builder = builder.meta(RegularityMeta {
            m_g: meta.m_g,
            k_g: meta.k_g,
            m_f: meta.m_f,
            rho: Arc::new(move |s| rho.eval(&Bindings::sx(s, 0.0)).unwrap_or(f64::NAN)),
            phi: Arc::new(move |x| phi.eval(&Bindings::sx(0.0, x)).unwrap_or(f64::NAN)),
            lipschitz: meta.lipschitz,
        });
    }
    builder.build().map_err(Into::into)
}
